use std::fs;
use std::process::{Command, Output};

fn qretarget(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qretarget"))
        .args(args)
        .env_remove("QRETARGET_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn field(text: &str, key: &str) -> String {
    text.lines()
        .find_map(|l| l.strip_prefix(key))
        .unwrap_or_else(|| panic!("no `{key}` in\n{text}"))
        .trim()
        .to_string()
}

#[test]
fn attack_variant1_table() {
    let o = qretarget(&["attack", "--variant", "1"]);
    assert!(o.status.success());
    assert_eq!(
        stdout(&o),
        "n,difficulty,CPoW,timeToCreate,realTimeWhenCreated,timestamp\n\
         1,1,1,4,4,0.015625\n\
         2,64,65,32,36,1.01563\n"
    );
    assert!(stderr(&o).contains("# total CPoW: 65"));
}

#[test]
fn attack_variant2_revenue_footer() {
    let o = qretarget(&["attack", "--variant", "2"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 13);
    assert_eq!(field(&stderr(&o), "# revenue:"), "22.34%");
    assert_eq!(field(&stderr(&o), "# lag:"), "0.701574 epoch-times");
}

#[test]
fn attack_variant4_shape() {
    let o = qretarget(&["attack", "--variant", "4"]);
    assert!(o.status.success());
    let err = stderr(&o);
    assert_eq!(field(&err, "# peak difficulty:"), "256 (3 epochs)");
    assert_eq!(field(&err, "# epochs:"), "540");
    assert_eq!(field(&err, "# total real time:"), "554.936 epoch-times");
}

#[test]
fn clamped_variant1_is_rejected() {
    let o = qretarget(&["attack", "--variant", "1", "--clamp", "4"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
    assert!(stderr(&o).contains("clamp"), "{}", stderr(&o));
}

#[test]
fn output_file_and_directory_env() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_qretarget"))
        .args(["attack", "--variant", "3", "--output", "v3.csv"])
        .env("QRETARGET_OUTPUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    let written = fs::read_to_string(dir.path().join("v3.csv")).unwrap();
    assert!(written.starts_with("n,difficulty,CPoW"));
    // footer moves to stdout when the table goes to a file
    assert!(stdout(&o).contains("# revenue:"));
}

#[test]
fn deterministic_race() {
    let o = qretarget(&["race", "--variant", "1"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(field(&out, "margin:"), "29");
    assert_eq!(field(&out, "win probability:"), "1");
    assert_eq!(field(&out, "winner (CumulativeWork):"), "attacker");
}

#[test]
fn monte_carlo_race_is_reproducible() {
    let args = ["race", "--variant", "1", "--mode", "mc", "--trials", "5000", "--seed", "11"];
    let a = qretarget(&args);
    let b = qretarget(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let p: f64 = field(&stdout(&a), "win probability:").parse().unwrap();
    assert!(p >= 0.999);
}

#[test]
fn trials_need_monte_carlo_mode() {
    let o = qretarget(&["race", "--trials", "10"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn counterexample_rules_disagree() {
    let o = qretarget(&["race", "--counterexample"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(field(&out, "LongestChain:"), "attacker");
    assert_eq!(field(&out, "CumulativeWork:"), "honest");
}

#[test]
fn counterexample_precondition() {
    // at power 0.0001 the attacker chain is shorter than the honest one
    let o = qretarget(&["race", "--counterexample", "--power", "0.0001"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn feasibility_defaults() {
    let o = qretarget(&["feasibility"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(field(&out, "speed ratio r:"), "0.00684653 (0.685%)");
    let years: f64 = field(&out, "r^-2 scale:").trim_end_matches(" years").parse().unwrap();
    assert!((800.0..840.0).contains(&years));
}

#[test]
fn feasibility_scaling() {
    let many = stdout(&qretarget(&["feasibility", "--machines", "10000"]));
    assert!(field(&many, "speed ratio r:").starts_with("0.684653"));
    let slow = stdout(&qretarget(&["feasibility", "--clock", "1e9"]));
    assert!(field(&slow, "quantum block time:").starts_with("876356 s"));
}

#[test]
fn validate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("v2.csv");
    let o = qretarget(&["attack", "--variant", "2", "--output", path.to_str().unwrap()]);
    assert!(o.status.success());
    let v = qretarget(&["validate", path.to_str().unwrap()]);
    assert!(v.status.success(), "{}", stdout(&v));
    assert!(stdout(&v).starts_with("valid: 12 epochs at r = 0.25"));

    let r = qretarget(&["race", "--schedule", path.to_str().unwrap()]);
    assert!(r.status.success(), "{}", stderr(&r));
    assert_eq!(field(&stdout(&r), "winner (CumulativeWork):"), "attacker");
}

#[test]
fn validate_reports_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let good = stdout(&qretarget(&["attack", "--variant", "2"]));
    let tampered: Vec<String> = good
        .lines()
        .map(|l| match l.strip_prefix("3,") {
            Some(rest) => {
                let mut cols: Vec<&str> = rest.split(',').collect();
                cols[0] = "9";
                format!("3,{}", cols.join(","))
            }
            None => l.to_string(),
        })
        .collect();
    let path = dir.path().join("bad.csv");
    fs::write(&path, tampered.join("\n") + "\n").unwrap();
    let o = qretarget(&["validate", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("transition 2 -> 3"), "{}", stdout(&o));
}

#[test]
fn validate_empty_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.csv");
    fs::write(&path, "").unwrap();
    let o = qretarget(&["validate", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 1"));
}

#[test]
fn usage_errors() {
    assert_eq!(qretarget(&["attack"]).status.code(), Some(1));
    assert_eq!(qretarget(&["attack", "--variant", "7"]).status.code(), Some(1));
    assert_eq!(qretarget(&["attack", "--variant", "1", "--r", "2"]).status.code(), Some(1));
    assert_eq!(qretarget(&["attack", "--variant", "2", "--n-top", "4"]).status.code(), Some(1));
    assert_eq!(qretarget(&["bogus"]).status.code(), Some(1));
    assert_eq!(qretarget(&["--help"]).status.code(), Some(0));
}

#[test]
fn config_file_sits_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    fs::write(&conf, "variant = 3\nn_top = 5\nr = 0.125\n").unwrap();
    let from_file = qretarget(&["--config", conf.to_str().unwrap(), "attack"]);
    let explicit = qretarget(&["attack", "--variant", "3", "--n-top", "5", "--r", "0.125"]);
    assert!(from_file.status.success(), "{}", stderr(&from_file));
    assert_eq!(from_file.stdout, explicit.stdout);

    let overridden = qretarget(&["--config", conf.to_str().unwrap(), "attack", "--r", "0.25"]);
    let expected = qretarget(&["attack", "--variant", "3", "--n-top", "5"]);
    assert_eq!(overridden.stdout, expected.stdout);
}

#[test]
fn attack_output_is_byte_stable() {
    for variant in ["1", "2", "3", "4", "revenue"] {
        let a = qretarget(&["attack", "--variant", variant]);
        let b = qretarget(&["attack", "--variant", variant]);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "variant {variant}");
    }
}
