use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use caviar::commands::read_policy;
use caviar::{dataset, trace};

const SMALL: &str = r#"{
  "name": "small",
  "seed": 5,
  "scene": {"bs_position": [0, 0, 0], "nlos_angle_masks_deg": [[20, 30]]},
  "trajectory": {"phases": [
    {"name": "takeoff", "duration": 10, "start": [30, 0, 0], "end": [30, 0, 30]},
    {"name": "land", "duration": 10, "start": [30, 0, 30], "end": [30, 0, 0]}
  ]},
  "array": {"n_t": 16, "n_r": 1},
  "dataset": {"episodes": 2},
  "episode": {"length": 5},
  "learning": {"episodes": 3, "bins": 16, "theta_range_deg": [0, 60]},
  "evaluation": {"seeds": 3}
}"#;

fn caviar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_caviar")).args(args).output().expect("binary runs")
}

fn setup() -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.json");
    fs::write(&cfg, SMALL).unwrap();
    (dir, cfg)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn exit_codes() {
    let (dir, cfg) = setup();
    assert_eq!(caviar(&["--help"]).status.code(), Some(0));
    assert!(stdout(&caviar(&["--help"])).contains("learning.alpha"));
    assert_eq!(caviar(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(caviar(&["generate", "--config", s(&cfg)]).status.code(), Some(1));
    assert_eq!(caviar(&["generate", "--config", s(&cfg), "--out", "x", "--set", "nokey"]).status.code(), Some(1));

    let out = dir.path().join("out");
    let bad = caviar(&["generate", "--config", s(&cfg), "--out", s(&out), "--set", "channel.nlos_sigma=-1"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("channel"));
    let bad = caviar(&["train", "--config", s(&cfg), "--out", s(&out), "--set", "array.n_t=\"many\""]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("array.n_t"));

    let missing = dir.path().join("nope.json");
    assert_eq!(caviar(&["train", "--config", s(&missing), "--out", s(&out)]).status.code(), Some(3));
    let no_policy = caviar(&["evaluate", "--config", s(&cfg), "--out", s(&out), "--policy", s(&missing)]);
    assert_eq!(no_policy.status.code(), Some(3));
}

#[test]
fn generate_writes_counts_and_is_deterministic() {
    let (dir, cfg) = setup();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let out = caviar(&["generate", "--config", s(&cfg), "--out", s(&a)]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("episodes: 2  scenes: 10"), "{}", stdout(&out));
    assert!(caviar(&["generate", "--config", s(&cfg), "--out", s(&b)]).status.success());
    let names = ["manifest.json", "episode_00000.jsonl", "episode_00001.jsonl"];
    for n in names {
        assert_eq!(fs::read(a.join(n)).unwrap(), fs::read(b.join(n)).unwrap(), "{n}");
    }
    let (manifest, episodes) = dataset::read(&a).unwrap();
    assert_eq!(manifest.num_episodes, 2);
    assert!(episodes.iter().all(|e| e.scenes.len() == 5));

    // A different seed changes the channels.
    let c = dir.path().join("c");
    assert!(caviar(&["generate", "--config", s(&cfg), "--out", s(&c), "--seed", "6"]).status.success());
    assert_ne!(fs::read(a.join(names[1])).unwrap(), fs::read(c.join(names[1])).unwrap());
}

#[test]
fn corrupt_dataset_reports_line() {
    let (dir, cfg) = setup();
    let a = dir.path().join("a");
    assert!(caviar(&["generate", "--config", s(&cfg), "--out", s(&a)]).status.success());
    let file = a.join("episode_00001.jsonl");
    let text = fs::read_to_string(&file).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    lines[2] = "{\"episode_id\": 1}";
    fs::write(&file, lines.join("\n")).unwrap();
    let err = dataset::read(&a).unwrap_err().to_string();
    assert!(err.contains("line 3"), "{err}");

    lines.truncate(2);
    fs::write(&file, lines.join("\n")).unwrap();
    assert!(dataset::read(&a).unwrap_err().to_string().contains("2 scenes"));

    let manifest = a.join("manifest.json");
    let text = fs::read_to_string(&manifest).unwrap().replace("caviar-lite/1", "caviar-lite/0");
    fs::write(&manifest, text).unwrap();
    assert!(dataset::read(&a).unwrap_err().to_string().contains("format version"));
}

#[test]
fn train_evaluate_report() {
    let (dir, cfg) = setup();
    let out = dir.path().join("run");
    assert!(caviar(&["train", "--config", s(&cfg), "--out", s(&out)]).status.success());
    let curve = fs::read_to_string(out.join("learning_curve.csv")).unwrap();
    assert_eq!(curve.lines().count(), 4);
    let policy = out.join("policy.json");
    let table = read_policy(&policy).unwrap();
    assert_eq!(table.num_actions(), 16);

    let ev = caviar(&["evaluate", "--config", s(&cfg), "--out", s(&out), "--policy", s(&policy)]);
    assert!(ev.status.success(), "{}", String::from_utf8_lossy(&ev.stderr));
    let summary: trace::Summary = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    let names: Vec<&str> = summary.policies.iter().map(|m| m.name.as_str()).collect();
    assert_eq!(names, ["oracle", "baseline", "trained"]);
    assert_eq!(summary.steps, 15);

    let t = trace::read_trace(&out.join("trace.csv")).unwrap();
    assert_eq!(t.steps.len(), 15);
    let col_mean = t.steps.iter().map(|s| s.optimum).sum::<f64>() / 15.0;
    assert!((summary.optimum.mean - col_mean).abs() < 1e-12);
    assert!((summary.policies[0].mean - col_mean).abs() < 1e-12);
    for (i, m) in summary.policies.iter().enumerate() {
        assert!(m.mean <= summary.optimum.mean + 1e-12);
        let mean = t.steps.iter().map(|s| s.rewards[i]).sum::<f64>() / 15.0;
        assert!((mean - m.mean).abs() < 1e-12);
    }

    let rep = caviar(&["report", s(&out)]);
    assert!(rep.status.success());
    let text = stdout(&rep);
    assert!(text.contains("mean optimum") && text.contains("NLOS windows") && text.contains("min optimum"));
}

#[test]
fn zero_episode_training_gives_zero_table() {
    let (dir, cfg) = setup();
    let out = dir.path().join("run");
    let r = caviar(&["train", "--config", s(&cfg), "--out", s(&out), "--set", "learning.episodes=0"]);
    assert!(r.status.success());
    assert_eq!(fs::read_to_string(out.join("learning_curve.csv")).unwrap().lines().count(), 1);
    let table = read_policy(&out.join("policy.json")).unwrap();
    assert!((0..table.bins()).all(|b| table.row(b).iter().all(|&v| v == 0.0)));
}

#[test]
fn policy_reload_gives_same_actions() {
    let (dir, cfg) = setup();
    let out = dir.path().join("run");
    let config = caviar::config::load(&cfg, &[], None).unwrap();
    let outcome = caviar::commands::cmd_train(&config, &out).unwrap();
    let reloaded = read_policy(&out.join("policy.json")).unwrap();
    assert_eq!(reloaded, outcome.table);
    for k in 0..=600 {
        let theta = -10.0 + 0.1 * k as f64;
        assert_eq!(reloaded.greedy(theta), outcome.table.greedy(theta));
    }
}

#[test]
fn los_only_baseline_matches_optimum() {
    let (dir, cfg) = setup();
    let out = dir.path().join("run");
    let r = caviar(&[
        "evaluate",
        "--config",
        s(&cfg),
        "--out",
        s(&out),
        "--set",
        "scene.nlos_angle_masks_deg=[]",
        "--set",
        "channel.num_paths=1",
    ]);
    assert!(r.status.success());
    let summary: trace::Summary = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary.nlos_steps, 0);
    assert_eq!(summary.policies[1].mean, summary.optimum.mean);
}

#[test]
fn report_on_empty_and_malformed_traces() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.csv");
    fs::write(&empty, "seed,t,theta_deg,los,reward_oracle,action_oracle,optimum\n").unwrap();
    let r = caviar(&["report", s(&empty)]);
    assert!(r.status.success());
    assert!(stdout(&r).contains("no steps"));

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "seed,t,theta_deg,los,optimum\n1,0,abc,1,3.0\n").unwrap();
    let r = caviar(&["report", s(&bad)]);
    assert_eq!(r.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&r.stderr).contains("line 2"));
}
