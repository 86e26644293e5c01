use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_weightmax"))
}

#[test]
fn show_config_prints_regularization() {
    let out = bin().args(["show-config", "wm_direct_reg"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("beta = (0, 1e-5, 1e-3)\n"), "{text}");
    assert!(text.contains("\"reg_weights\""));

    let out = bin().arg("show-config").output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["global_reinforce", "wm_reinforce", "wm_reinforce_reg", "wm_direct", "wm_direct_reg"] {
        assert!(text.contains(&format!("{name}: ")), "{text}");
    }
}

#[test]
fn train_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("m.csv");
    let weights = dir.path().join("w.json");
    let status = bin()
        .args(["train", "--config", "wm_direct_reg", "--samples", "256", "--seed", "3", "--out"])
        .arg(&csv)
        .arg("--weights-out")
        .arg(&weights)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("step,samples,batch_reward,running_avg,wnorm_1,wnorm_2,wnorm_3"));
    assert_eq!(lines.count(), 2);
    let w = weightmax::network::WeightStack::load(&weights).unwrap();
    assert_eq!(w.param_count(), 4545);
}

#[test]
fn resume_through_cli() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let mut c = weightmax::harness::desk_scale("wm_reinforce_reg", 10 * 128).unwrap();
    std::fs::write(&cfg, c.to_json().unwrap()).unwrap();
    let ckpt = dir.path().join("ckpt.json");
    let run = |extra: &[&str], weights: &std::path::Path| {
        let mut cmd = bin();
        cmd.args(["train", "--config"]).arg(&cfg).args(extra).arg("--weights-out").arg(weights);
        assert!(cmd.status().unwrap().success());
    };
    let w_full = dir.path().join("full.json");
    run(&[], &w_full);
    c.total_samples = 4 * 128;
    let half = dir.path().join("half.json");
    std::fs::write(&half, c.to_json().unwrap()).unwrap();
    let mut cmd = bin();
    cmd.args(["train", "--config"]).arg(&half).arg("--checkpoint").arg(&ckpt);
    assert!(cmd.status().unwrap().success());
    let w_resumed = dir.path().join("resumed.json");
    run(&["--resume", ckpt.to_str().unwrap()], &w_resumed);
    assert_eq!(std::fs::read_to_string(w_full).unwrap(), std::fs::read_to_string(w_resumed).unwrap());
}

#[test]
fn sweep_summarizes_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("summary.csv");
    let status = bin()
        .args(["sweep", "--config", "global_reinforce", "--seeds", "1,2", "--samples", "384", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("config,step,samples,mean_running_avg,std_running_avg\n"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn verify_passes_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let status = bin().arg("verify").arg("--report").arg(&report).status().unwrap();
    assert_eq!(status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["passed"], true);
    assert!(json["checks"].as_array().unwrap().len() >= 10);
}

#[test]
fn verify_fails_when_budget_is_too_small() {
    let status = bin().args(["verify", "--max-hidden-bits", "2"]).status().unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(bin().args(["train", "--bogus"]).status().unwrap().code(), Some(2));
    assert_eq!(bin().arg("nope").status().unwrap().code(), Some(2));
    assert_eq!(bin().args(["train", "--config", "no_such_preset"]).status().unwrap().code(), Some(1));
}
