use std::fs;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sharp-embed"))
}

fn code(args: &[&str]) -> i32 {
    bin().args(args).output().unwrap().status.code().unwrap()
}

#[test]
fn passing_suite_exits_zero() {
    assert_eq!(code(&["check-inequalities", "--dims", "2,3"]), 0);
    assert_eq!(code(&["lq-constants", "--dims", "3,4"]), 0);
}

#[test]
fn shrunken_kernel_is_reported_as_a_violation() {
    let out = bin()
        .args(["check-inequalities", "--dims", "3", "--kernel-scale", "0.9"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("FAIL"));
}

#[test]
fn bad_configuration_exits_two() {
    assert_eq!(code(&["check-inequalities", "--dims", ""]), 2);
    assert_eq!(code(&["check-inequalities", "--dims", "1"]), 2);
    assert_eq!(code(&["sweep-sharpness", "--family", "nope"]), 2);
    assert_eq!(code(&["no-such-command"]), 2);
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "samples = many\n").unwrap();
    assert_eq!(code(&["check-inequalities", "--config", cfg.to_str().unwrap()]), 2);
    assert_eq!(code(&["check-inequalities", "--config", "/nonexistent/run.cfg"]), 2);
}

#[test]
fn same_seed_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, seed: &str| {
        let path = dir.path().join(name);
        let st = bin()
            .args(["check-inequalities", "--dims", "2,3", "--seed", seed, "--out", path.to_str().unwrap()])
            .output()
            .unwrap();
        assert!(st.status.success());
        fs::read(path).unwrap()
    };
    let a = run("a.csv", "11");
    let b = run("b.csv", "11");
    let c = run("c.csv", "12");
    assert_eq!(a, b);
    assert_ne!(a, c);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("n,kind,sample,shells,l1,points,violations,worst_measure_ratio\n"));
    assert!(!text.contains('\r'));
}

#[test]
fn csv_goes_to_stdout_without_out() {
    let out = bin().args(["sweep-sharpness", "--family", "bump", "--dims", "2"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().next().unwrap().starts_with("family,n,t,delta"));
    assert!(text.lines().skip(1).all(|l| l.starts_with("bump,2,")));
}
