//! Named experiment configurations shipped with the crate.

use crate::error::{Error, Result};

use super::config::ExperimentConfig;

pub const PRESET_NAMES: [&str; 5] = [
    "global_reinforce",
    "wm_reinforce",
    "wm_reinforce_reg",
    "wm_direct",
    "wm_direct_reg",
];

fn preset_text(name: &str) -> Option<&'static str> {
    Some(match name {
        "global_reinforce" => include_str!("../../presets/global_reinforce.json"),
        "wm_reinforce" => include_str!("../../presets/wm_reinforce.json"),
        "wm_reinforce_reg" => include_str!("../../presets/wm_reinforce_reg.json"),
        "wm_direct" => include_str!("../../presets/wm_direct.json"),
        "wm_direct_reg" => include_str!("../../presets/wm_direct_reg.json"),
        _ => return None,
    })
}

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let text = preset_text(name).ok_or_else(|| {
        Error::Config(format!("unknown preset {name:?}; known: {}", PRESET_NAMES.join(", ")))
    })?;
    ExperimentConfig::from_json(text)
}

/// Initialization half-width for the small-network protocol. At the preset
/// value of 0.1 every sampled rule on the 16-8 network saturates hidden units
/// early and stalls.
pub const DESK_INIT_SCALE: f64 = 0.5;

/// A preset shrunk to run in seconds: 2-address multiplexer, 16-8 hidden
/// units, [`DESK_INIT_SCALE`], `total_samples` rounded down to a whole number
/// of batches.
pub fn desk_scale(name: &str, total_samples: u64) -> Result<ExperimentConfig> {
    let mut cfg = preset(name)?;
    cfg.env = "mux:k=2".into();
    cfg.hidden = vec![16, 8];
    cfg.init_scale = DESK_INIT_SCALE;
    let b = cfg.batch_size as u64;
    cfg.total_samples = (total_samples / b).max(1) * b;
    Ok(cfg)
}
