use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_neotaxis"));
    cmd.env_remove("NEOTAXIS_SEED");
    cmd
}

fn scenario(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(format!("{name}.toml"))
}

fn header(stdout: &[u8]) -> serde_json::Value {
    let text = std::str::from_utf8(stdout).unwrap();
    serde_json::from_str(text.lines().next().unwrap()).unwrap()
}

#[test]
fn run_writes_versioned_log() {
    let out = bin()
        .args(["run", "--kind", "kmeans", "--seed", "5"])
        .arg(scenario("experiment2_forgetting_on"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let head = header(&out.stdout);
    assert_eq!(head["schema_version"], 1);
    assert!(head.to_string().contains("kmeans"));
}

#[test]
fn seed_flag_beats_environment() {
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut cmd = bin();
        cmd.arg("run").arg(scenario("experiment2_forgetting_on"));
        if let Some(s) = env {
            cmd.env("NEOTAXIS_SEED", s);
        }
        if let Some(s) = flag {
            cmd.args(["--seed", s]);
        }
        cmd.output().unwrap().stdout
    };
    assert_eq!(run(Some("9"), None), run(None, Some("9")));
    assert_eq!(run(Some("3"), Some("9")), run(None, Some("9")));
}

#[test]
fn suite_writes_csv() {
    let dir = std::env::temp_dir().join(format!("neotaxis-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let csv = dir.join("summary.csv");
    let out = bin()
        .args(["suite", "--kind", "som_ring,kmeans", "--out"])
        .arg(&csv)
        .arg(scenario("experiment2_forgetting_off"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.starts_with("scenario,kind,seed,gating,status,detail"));
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn trace_prints_one_row_per_tick() {
    let out = bin().args(["trace", "--schedule", "10:1,5:0", "--alpha", "1.2"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("tick,stimulus,alpha_1.2"));
    assert_eq!(lines.count(), 15);
}

#[test]
fn bad_schedule_is_rejected() {
    assert!(!bin().args(["trace", "--schedule", "ten:1"]).output().unwrap().status.success());
}
