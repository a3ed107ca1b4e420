use std::path::Path;
use std::process::{Command, Output};

fn wlticket(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wlticket"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn bounds_reports_probability_and_width() {
    let out = wlticket(&[
        "bounds", "--N", "3", "--rho", "0.5", "--k", "1", "--m", "4", "--gamma", "0.99",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["gamma"]["raw"].as_f64().unwrap(), 0.8125);
    assert_eq!(v["m_min"].as_u64().unwrap(), 9);
}

#[test]
fn config_errors_exit_with_one() {
    assert_eq!(
        code(&wlticket(&[
            "bounds", "--N", "3", "--rho", "1.5", "--k", "1", "--m", "4"
        ])),
        1
    );
    assert_eq!(code(&wlticket(&["bounds", "--N", "3"])), 1);
    assert_eq!(
        code(&wlticket(&["sweep", "--config", "/nonexistent/sweep.cfg"])),
        1
    );

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "epochs = many\n").unwrap();
    assert_eq!(code(&wlticket(&["sweep", "--config", s(&cfg)])), 1);
    std::fs::write(&cfg, "no_such_key = 3\n").unwrap();
    assert_eq!(code(&wlticket(&["sweep", "--config", s(&cfg)])), 1);
}

#[test]
fn data_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = format!("tu:{}/NOPE", s(dir.path()));
    assert_eq!(code(&wlticket(&["sifdg", "--dataset", &missing])), 2);
    let runs = dir.path().join("runs.csv");
    assert_eq!(
        code(&wlticket(&[
            "report",
            "--runs",
            s(&runs),
            "--out",
            s(dir.path())
        ])),
        2
    );
    std::fs::write(&runs, "not,a,runs,file\n").unwrap();
    assert_eq!(
        code(&wlticket(&[
            "report",
            "--runs",
            s(&runs),
            "--out",
            s(dir.path())
        ])),
        2
    );
}

#[test]
fn sweep_then_report_reproduces_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.json");
    std::fs::write(
        &cfg,
        r#"{"datasets": ["triangle_vs_path:5"], "rho_grid": [0.5, 0.9], "seeds": 2, "epochs": 10, "hidden_dim": 2}"#,
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = wlticket(&["sweep", "--config", s(&cfg), "--out", s(&out_dir)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for name in [
        "runs.csv",
        "timings.csv",
        "winning_prob.csv",
        "transition.csv",
        "correlation.csv",
        "scatter_tau.csv",
    ] {
        assert!(out_dir.join(name).exists(), "{name} missing");
    }
    let runs = std::fs::read_to_string(out_dir.join("runs.csv")).unwrap();
    assert_eq!(runs.lines().count(), 5);

    let again = wlticket(&[
        "--sequential",
        "sweep",
        "--config",
        s(&cfg),
        "--out",
        s(&out_dir),
        "--resume",
    ]);
    assert_eq!(code(&again), 0);
    assert_eq!(
        std::fs::read_to_string(out_dir.join("runs.csv")).unwrap(),
        runs
    );

    let report_dir = dir.path().join("report");
    let rep = wlticket(&[
        "report",
        "--runs",
        s(&out_dir.join("runs.csv")),
        "--out",
        s(&report_dir),
        "--config",
        s(&cfg),
    ]);
    assert_eq!(code(&rep), 0);
    for name in ["winning_prob.csv", "transition.csv", "correlation.csv"] {
        assert_eq!(
            std::fs::read(report_dir.join(name)).unwrap(),
            std::fs::read(out_dir.join(name)).unwrap(),
            "{name} differs"
        );
    }
}

#[test]
fn train_tau_and_sparsify_share_checkpoints() {
    let dir = tempfile::tempdir().unwrap();
    let ckpt = dir.path().join("model.json");
    let out = wlticket(&[
        "train",
        "--dataset",
        "trees_vs_unicyclic:30",
        "--out",
        s(&ckpt),
        "--epochs",
        "5",
        "--hidden-dim",
        "8",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let tau = json(&wlticket(&[
        "tau",
        "--checkpoint",
        s(&ckpt),
        "--dataset",
        "trees_vs_unicyclic:30",
    ]));
    let t = tau["tau"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&t));

    let pruned = dir.path().join("pruned.json");
    let sp = wlticket(&[
        "sparsify",
        "--dataset",
        "trees_vs_unicyclic:30",
        "--checkpoint",
        s(&ckpt),
        "--rho-step",
        "0.2",
        "--k-trials",
        "5",
        "--out",
        s(&pruned),
    ]);
    assert_eq!(code(&sp), 0, "{}", String::from_utf8_lossy(&sp.stderr));
    assert!(json(&sp)["sparsity"].as_f64().unwrap() > 0.0);
    let after = json(&wlticket(&[
        "tau",
        "--checkpoint",
        s(&pruned),
        "--dataset",
        "trees_vs_unicyclic:30",
    ]));
    assert!(after["tau"].as_f64().unwrap() >= t);

    let wrong = wlticket(&[
        "tau",
        "--checkpoint",
        s(&ckpt),
        "--dataset",
        "triangle_vs_path:3",
    ]);
    assert_eq!(code(&wrong), 2);
}

#[test]
fn sifdg_finds_the_swapped_pairs() {
    let out = wlticket(&["sifdg", "--dataset", "swapped_labels:3"]);
    assert_eq!(code(&out), 0);
    assert!(json(&out)["pairs"].as_u64().unwrap() > 0);
}
