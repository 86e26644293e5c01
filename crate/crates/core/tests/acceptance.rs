//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails. The full-scale run is skipped unless
//! `--include-ignored` or `--ignored` is passed.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use weightmax::harness::{desk_scale, mean_std, preset, run_experiment, run_matrix, Checkpoint, Trainer, PRESET_NAMES};
use weightmax::network::NetShape;
use weightmax::oracle::suite;
use weightmax::oracle::EnumBudget;
use weightmax::rules::{RuleKind, RuleSpec};

struct Outcome {
    passed: bool,
    detail: String,
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut out = f();
    let took = start.elapsed();
    out.detail.push_str(&format!("; {:.2}s", took.as_secs_f64()));
    if let Some(limit) = limit {
        if took > limit {
            out.passed = false;
            out.detail.push_str(&format!(" exceeds {:.0}s", limit.as_secs_f64()));
        }
    }
    out
}

fn from_check(c: &suite::CheckResult) -> String {
    format!("{} = {:e} (tolerance {:e})", c.name, c.measured, c.tolerance)
}

fn arp_identity() -> Outcome {
    let c = suite::check_arp_identity(10_000).unwrap();
    Outcome {
        passed: c.passed,
        detail: from_check(&c),
    }
}

fn global_reinforce_unbiased() -> Outcome {
    let c = suite::check_global_reinforce_unbiased(&[0, 1, 2, 3, 4], &EnumBudget::default()).unwrap();
    Outcome {
        passed: c.passed,
        detail: from_check(&c),
    }
}

fn direct_equals_ste() -> Outcome {
    let (ratio, exp) = suite::check_direct_vs_ste(200).unwrap();
    Outcome {
        passed: ratio.passed && exp.passed,
        detail: format!("{}, {}", from_check(&ratio), from_check(&exp)),
    }
}

fn small_norm_scaling() -> Outcome {
    let (cos, spread, _) = suite::check_small_norm_scaling(&[0, 1, 2, 3, 4], &EnumBudget::default()).unwrap();
    Outcome {
        passed: cos.passed && spread.passed,
        detail: format!(
            "min cosine at eps 0.05 = {:.12} (must exceed 0.99), max residual/eps^2 spread = {:.4} (must be below 4)",
            cos.measured, spread.measured
        ),
    }
}

fn gradient_routes() -> Outcome {
    let budget = EnumBudget::default();
    let fd = suite::check_fd_vs_analytic(&budget).unwrap();
    let forms = suite::check_score_forms(&budget).unwrap();
    Outcome {
        passed: fd.passed && forms.passed,
        detail: format!("{}, {}", from_check(&fd), from_check(&forms)),
    }
}

const DESK_SEEDS: [u64; 5] = [0, 1, 2, 3, 4];
const DESK_SAMPLES: u64 = 500_000;

struct Desk {
    direct_reg: f64,
    reinforce_reg: f64,
    global: f64,
    classification: f64,
    samples: u64,
}

fn desk_runs() -> Desk {
    let mut classification = desk_scale("wm_reinforce", DESK_SAMPLES).unwrap();
    classification.name = "wm_classification".into();
    classification.rule = RuleSpec::new(RuleKind::WmClassification);
    let configs = vec![
        desk_scale("wm_direct_reg", DESK_SAMPLES).unwrap(),
        desk_scale("wm_reinforce_reg", DESK_SAMPLES).unwrap(),
        desk_scale("global_reinforce", DESK_SAMPLES).unwrap(),
        classification,
    ];
    let samples = configs[0].total_samples;
    let summary = run_matrix(&configs, &DESK_SEEDS).unwrap();
    let mean = |name: &str| mean_std(&summary.finals(name)).0;
    Desk {
        direct_reg: mean("wm_direct_reg"),
        reinforce_reg: mean("wm_reinforce_reg"),
        global: mean("global_reinforce"),
        classification: mean("wm_classification"),
        samples,
    }
}

fn desk_ordering(d: &Desk) -> Outcome {
    let order_top = d.direct_reg >= d.reinforce_reg;
    let order_global = d.reinforce_reg > d.global && d.direct_reg > d.global;
    let reach = d.direct_reg >= 0.9 && d.reinforce_reg >= 0.9;
    Outcome {
        passed: order_top && order_global && reach,
        detail: format!(
            "{} samples, 5 seeds: wm_direct_reg {:.4}, wm_reinforce_reg {:.4}, global_reinforce {:.4}; \
             direct_reg >= reinforce_reg: {order_top}, both above global: {order_global}, both >= 0.9: {reach}",
            d.samples, d.direct_reg, d.reinforce_reg, d.global
        ),
    }
}

fn classification_fails(d: &Desk) -> Outcome {
    let gap = d.reinforce_reg - d.classification;
    Outcome {
        passed: gap >= 0.2,
        detail: format!(
            "wm_classification {:.4}, wm_reinforce_reg {:.4}, gap {gap:.4} (must be >= 0.2)",
            d.classification, d.reinforce_reg
        ),
    }
}

fn full_scale() -> Outcome {
    let dir = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("full_scale");
    std::fs::create_dir_all(&dir).unwrap();
    let configs: Vec<_> = PRESET_NAMES.iter().map(|n| preset(n).unwrap()).collect();
    let summary = run_matrix(&configs, &DESK_SEEDS).unwrap();
    summary.write_csv(&dir.join("summary.csv")).unwrap();
    for r in &summary.runs {
        r.metrics.write_csv(&dir.join(format!("{}_seed{}.csv", r.config, r.seed))).unwrap();
    }
    let m = |name: &str| mean_std(&summary.finals(name)).0;
    let (g, r, rr, d, dr) = (
        m("global_reinforce"),
        m("wm_reinforce"),
        m("wm_reinforce_reg"),
        m("wm_direct"),
        m("wm_direct_reg"),
    );
    let slowest = g < r.min(rr).min(d).min(dr);
    let reg_helps = rr > r && dr > d && (rr - r) > (dr - d);
    let best = dr >= rr && rr > r.max(d);
    Outcome {
        passed: slowest && reg_helps && best,
        detail: format!(
            "global {g:.4}, wm_reinforce {r:.4}, wm_reinforce_reg {rr:.4}, wm_direct {d:.4}, wm_direct_reg {dr:.4}; \
             global slowest: {slowest}, regularization helps more for reinforce: {reg_helps}, direct_reg best then reinforce_reg: {best}; csv in {}",
            dir.display()
        ),
    }
}

fn determinism() -> Outcome {
    let mut cfg = desk_scale("wm_direct_reg", 200 * 128).unwrap();
    cfg.seed = 7;
    let a = run_experiment(&cfg).unwrap().metrics.to_csv();
    let b = run_experiment(&cfg).unwrap().metrics.to_csv();
    let same_csv = a == b;

    let full = desk_scale("wm_reinforce_reg", 200 * 128).unwrap();
    let mut half = full.clone();
    half.total_samples = 100 * 128;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ckpt.json");
    half.checkpoint_interval = Some(100);
    half.checkpoint_path = Some(path.clone());
    Trainer::new(half).unwrap().run().unwrap();
    let resumed = Trainer::resume(full.clone(), Checkpoint::load(&path).unwrap()).unwrap().run().unwrap();
    let straight = run_experiment(&full).unwrap();
    let same_weights = resumed.weights == straight.weights;
    Outcome {
        passed: same_csv && same_weights,
        detail: format!("identical CSV bytes: {same_csv}, 100 + checkpoint + 100 equals 200 bit for bit: {same_weights}"),
    }
}

fn parameter_count() -> Outcome {
    let shape = NetShape::from_sizes(&[37, 64, 32, 1], true).unwrap();
    let n = shape.param_count();
    Outcome {
        passed: n == 4545,
        detail: format!("37-64-32-1 with bias has {n} parameters"),
    }
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    if args.iter().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let full = args.iter().any(|a| a == "--include-ignored" || a == "--ignored");

    let secs = |s| Some(Duration::from_secs(s));
    let mut results: Vec<(u32, &str, Option<Outcome>)> = vec![
        (1, "associative reward-penalty decomposition", Some(timed(secs(1), arp_identity))),
        (2, "global REINFORCE is unbiased", Some(timed(secs(10), global_reinforce_unbiased))),
        (3, "direct gradient equals STE backprop", Some(timed(secs(5), direct_equals_ste))),
        (4, "small-norm gradient following", Some(timed(secs(60), small_norm_scaling))),
        (5, "gradient routes agree", Some(timed(None, gradient_routes))),
    ];
    let start = Instant::now();
    let desk = desk_runs();
    let desk_secs = start.elapsed().as_secs_f64();
    let mut o6 = desk_ordering(&desk);
    o6.detail.push_str(&format!("; {desk_secs:.2}s shared with 7"));
    results.push((6, "desk-scale learning-curve ordering", Some(o6)));
    results.push((7, "classification variant does not learn", Some(classification_fails(&desk))));
    results.push((8, "full-scale reproduction", full.then(|| timed(None, full_scale))));
    results.push((9, "determinism and resume", Some(timed(None, determinism))));
    results.push((10, "parameter count", Some(timed(None, parameter_count))));

    let mut failed = 0;
    for (n, name, outcome) in &results {
        match outcome {
            Some(o) => {
                if !o.passed {
                    failed += 1;
                }
                println!("criterion {n:>2} {}: {name}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
            }
            None => println!("criterion {n:>2} SKIP: {name}: hours of compute; run with --include-ignored"),
        }
    }
    println!("acceptance: {failed} failed");
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
