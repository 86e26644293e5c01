use std::collections::VecDeque;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;

/// Mean of the last `window` values pushed.
#[derive(Debug, Clone, PartialEq)]
pub struct RunningAverage {
    window: usize,
    values: VecDeque<f64>,
}

impl RunningAverage {
    pub fn new(window: usize) -> Self {
        Self {
            window: window.max(1),
            values: VecDeque::with_capacity(window),
        }
    }

    pub fn with_values(window: usize, values: &[f64]) -> Self {
        let mut avg = Self::new(window);
        for &v in values {
            avg.push(v);
        }
        avg
    }

    pub fn push(&mut self, v: f64) -> f64 {
        if self.values.len() == self.window {
            self.values.pop_front();
        }
        self.values.push_back(v);
        self.mean()
    }

    /// Summed in insertion order so resumed runs reproduce the same bits.
    pub fn mean(&self) -> f64 {
        if self.values.is_empty() {
            0.0
        } else {
            self.values.iter().sum::<f64>() / self.values.len() as f64
        }
    }

    pub fn values(&self) -> Vec<f64> {
        self.values.iter().copied().collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub step: u64,
    pub samples: u64,
    pub batch_reward: f64,
    pub running_avg: f64,
    pub wnorms: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunMetrics {
    pub layers: usize,
    pub rows: Vec<MetricsRow>,
}

impl RunMetrics {
    pub fn new(layers: usize) -> Self {
        Self {
            layers,
            rows: Vec::new(),
        }
    }

    pub fn header(layers: usize) -> String {
        let mut h = String::from("step,samples,batch_reward,running_avg");
        for l in 1..=layers {
            write!(h, ",wnorm_{l}").expect("string write");
        }
        h
    }

    pub fn final_running_avg(&self) -> Option<f64> {
        self.rows.last().map(|r| r.running_avg)
    }

    /// CSV with a header line; every line ends in `\n`. Floats use Rust's
    /// shortest round-trip formatting, independent of locale.
    pub fn to_csv(&self) -> String {
        let mut out = Self::header(self.layers);
        out.push('\n');
        for r in &self.rows {
            write!(out, "{},{},{},{}", r.step, r.samples, r.batch_reward, r.running_avg).expect("string write");
            for n in &r.wnorms {
                write!(out, ",{n}").expect("string write");
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn running_average_window() {
        let mut avg = RunningAverage::new(3);
        assert_eq!(avg.push(1.0), 1.0);
        assert_eq!(avg.push(-1.0), 0.0);
        assert_eq!(avg.push(1.0), 1.0 / 3.0);
        assert_eq!(avg.push(1.0), 1.0 / 3.0);
        assert_eq!(avg.push(1.0), 1.0);
        let again = RunningAverage::with_values(3, &avg.values());
        assert_eq!(again, avg);
    }

    #[test]
    fn csv_schema() {
        let mut m = RunMetrics::new(3);
        m.rows.push(MetricsRow {
            step: 1,
            samples: 128,
            batch_reward: 0.25,
            running_avg: 0.25,
            wnorms: vec![1.5, 0.5, 0.125],
        });
        assert_eq!(
            m.to_csv(),
            "step,samples,batch_reward,running_avg,wnorm_1,wnorm_2,wnorm_3\n1,128,0.25,0.25,1.5,0.5,0.125\n"
        );
    }
}
