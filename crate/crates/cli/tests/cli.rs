use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn randiso(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_randiso")).args(args).output().expect("binary runs")
}

fn config_path(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name).display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// CSV rows without the trailing runtime column.
fn without_runtime(csv: &str) -> Vec<String> {
    csv.lines()
        .take_while(|l| !l.is_empty())
        .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head).to_string())
        .collect()
}

#[test]
fn synthesize_example_certifies_every_equation() {
    let out = randiso(&["synthesize", "--config", &config_path("synthesize.conf"), "--format", "jsonl"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows: Vec<serde_json::Value> = stdout(&out).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let agreement = rows.iter().find(|r| r["quantity"] == "agreement").unwrap();
    assert_eq!(agreement["pass"], true);
    let certs: Vec<_> = rows.iter().filter(|r| r.get("kind").is_some()).collect();
    assert!(!certs.is_empty());
    assert!(certs.iter().all(|c| c["ok"] == true));
}

#[test]
fn reports_are_deterministic() {
    let run = || stdout(&randiso(&["tower", "--config", &config_path("tower.conf")]));
    assert_eq!(without_runtime(&run()), without_runtime(&run()));
    let other = stdout(&randiso(&["tower", "--config", &config_path("tower.conf"), "--seed", "2"]));
    assert_ne!(without_runtime(&run())[1], without_runtime(&other)[1]);
}

#[test]
fn equal_elements_are_at_distance_zero() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("same.conf");
    let x = "tilde { step 1 [(0 1), ()] ; mpt 1 1 0 }";
    fs::write(&conf, format!("a = {x}\nb = {x}\nseed = 1\n")).unwrap();
    let out = randiso(&["metrics", "--config", conf.to_str().unwrap()]);
    assert!(out.status.success());
    for line in stdout(&out).lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        if fields[2] != "pointwise_tail_bound" && fields[2] != "sandwich" && fields[2] != "estimate_below_exact" {
            assert_eq!(fields[3], "0", "{line}");
        }
    }
}

#[test]
fn metrics_on_the_sample_config() {
    let out = randiso(&["metrics", "--config", &config_path("metrics.conf")]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains(",lu_exact,"));
}

#[test]
fn config_errors_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("bad.conf");
    fs::write(&conf, "height = 8\n# note\nlevel = ten\nseed = 1\n").unwrap();
    let out = randiso(&["tower", "--config", conf.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("config line 3"));
    fs::write(&conf, "height = 8\nlevle = 9\n").unwrap();
    let out = randiso(&["tower", "--config", conf.to_str().unwrap()]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("config line 2: unknown key \"levle\""));
}

#[test]
fn sampling_needs_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("noseed.conf");
    fs::write(&conf, "height = 8\n").unwrap();
    let out = randiso(&["tower", "--config", conf.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));
}

#[test]
fn density_reads_a_neighbourhood_file() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("report.csv");
    let out = randiso(&["density", "--config", &config_path("density.conf"), "--out", out_path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(out_path).unwrap();
    assert!(text.lines().any(|l| l.contains(",member,true,true,")));
}

#[test]
fn constant_and_diagonal_modes() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("d.conf");
    fs::write(&conf, "mode = constant\neps = 1/16\nseed = 4\n").unwrap();
    assert!(randiso(&["density", "--config", conf.to_str().unwrap()]).status.success());
    fs::write(&conf, "mode = diagonal\ncoordinates = 2\nseed = 4\n").unwrap();
    let out = randiso(&["density", "--config", conf.to_str().unwrap()]);
    assert!(out.status.success(), "{}{}", stdout(&out), String::from_utf8_lossy(&out.stderr));
}

#[test]
fn power_checks_pass() {
    let out = randiso(&["power", "--config", &config_path("power.conf")]);
    assert!(out.status.success(), "{}", stdout(&out));
}

#[test]
fn verify_selected_criteria() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("v.conf");
    fs::write(&conf, "only = 5, 10\n").unwrap();
    let out = randiso(&["verify", "--config", conf.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stdout(&out));
    assert_eq!(stdout(&out).lines().count(), 3);
}

#[test]
fn metric_group_synthesis() {
    let out = randiso(&["synthesize", "--seed", "3", "--config", &config_path("mpt.conf")]);
    assert!(out.status.success(), "{}{}", stdout(&out), String::from_utf8_lossy(&out.stderr));
}
