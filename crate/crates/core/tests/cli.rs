use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn selstab(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_selstab"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn value<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .unwrap_or_else(|| panic!("no {key} in {text:?}"))
}

#[test]
fn generate_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let o = selstab(
        &[
            "generate",
            "--source",
            "periodic",
            "--pattern",
            "01",
            "--n",
            "6",
            "--out",
            "-",
            "--format",
            "ascii01",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "010101");
    assert_eq!(value(&stderr(&o), "n"), "6");
}

#[test]
fn balanced_bias_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("balanced.bits"), "0101").unwrap();
    let o = selstab(&["bias", "--in", "balanced.bits"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "bias=0\n");
}

#[test]
fn bad_rule_names_the_state() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("bad.rule"),
        "state 1: move +1 select halt=no -> 1,2,1\nstate 2: move +1 skip halt=no -> 1,3,1\n",
    )
    .unwrap();
    let o = selstab(&["validate-rule", "--rule", "bad.rule"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("undefined state 3"), "{}", stderr(&o));
    assert!(stdout(&o).is_empty());
}

#[test]
fn good_rule_validates() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("id.rule"),
        "# identity\nstate 1: move +1 select halt=no -> 1,1,1\n",
    )
    .unwrap();
    let o = selstab(&["validate-rule", "--rule", "id.rule"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "valid=true\nstates=1\nk_rule_bits=120\n");
}

#[test]
fn io_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = selstab(&["bias", "--in", "missing.bits"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).is_empty());
    assert!(!stderr(&o).is_empty());
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["frobnicate"][..],
        &["bias", "--in", "x", "--bogus"],
        &["bias"],
    ] {
        let o = selstab(args, dir.path());
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(stdout(&o).is_empty());
    }
    let o = selstab(&["--help"], dir.path());
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn empty_bias_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("empty.bits"), "").unwrap();
    let o = selstab(&["bias", "--in", "empty.bits"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn select_complexity_and_bound() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let o = selstab(
        &[
            "generate", "--source", "uniform", "--seed", "3", "--n", "4096", "--out", "x.bits",
            "--format", "packed",
        ],
        p,
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(value(&stdout(&o), "n"), "4096");

    let o = selstab(
        &[
            "select", "--rule", "every:2", "--in", "x.bits", "--out", "s.bits",
        ],
        p,
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(value(&out, "sub_len"), "2048");
    assert_eq!(value(&out, "halt_reason"), "index_out_of_range");
    assert_eq!(fs::read_to_string(p.join("s.bits")).unwrap().len(), 2048);

    let o = selstab(&["complexity", "--in", "x.bits", "--estimator", "lz78"], p);
    let out = stdout(&o);
    assert_eq!(value(&out, "estimator"), "lz78");
    assert_eq!(value(&out, "deficiency_bits"), "0");

    let o = selstab(
        &[
            "deficiency",
            "--in",
            "x.bits",
            "--estimator",
            "block_entropy:4",
        ],
        p,
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(value(&stdout(&o), "estimator"), "block_entropy:4");

    let o = selstab(
        &[
            "bound", "--in", "x.bits", "--rule", "identity", "--c", "0.5",
        ],
        p,
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(value(&out, "k_rule_bits"), "120");
    assert_eq!(value(&out, "c"), "0.5");
    assert_eq!(value(&out, "satisfied"), "true");

    let o = selstab(&["curve", "--in", "x.bits", "--stride", "1024"], p);
    let out = stdout(&o);
    assert_eq!(value(&out, "points"), "4");
    value(&out, "curve.4096").parse::<f64>().unwrap();
}

#[test]
fn select_payload_on_stdout() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("x.bits"), "1111").unwrap();
    let o = selstab(
        &[
            "select",
            "--rule",
            "transient:1",
            "--in",
            "x.bits",
            "--out",
            "-",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "11");
    assert_eq!(value(&stderr(&o), "sub_len"), "2");
}

#[test]
fn experiment_and_calibrate() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    fs::write(
        p.join("e.conf"),
        "source = uniform\nseed = 2\nn = 16384\nrules = identity, transient:2, random:seeds=1-4:states=4\nreplicates = 3\nc = 0.3\noutput = out.csv\n",
    )
    .unwrap();
    let o = selstab(&["experiment", "--config", "e.conf"], p);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(value(&stdout(&o), "records"), "18");
    let csv = fs::read_to_string(p.join("out.csv")).unwrap();
    assert!(csv.starts_with(
        "rule_id,k_rule_bits,seed,sub_len,bias,delta_hat_bits,bound,satisfied,halt_reason\n"
    ));
    assert_eq!(csv.lines().count(), 19);

    fs::write(
        p.join("c.conf"),
        "source = uniform\nseed = 2\nn = 16384\nrules = identity, transient:1, transient:2, transient:3\nreplicates = 4\n",
    )
    .unwrap();
    let o = selstab(&["calibrate", "--config", "c.conf"], p);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(value(&stdout(&o), "c_hat").parse::<f64>().unwrap() > 0.0);

    fs::write(
        p.join("bad.conf"),
        "source = uniform\nn = 10\nrules = identity\nwhat = 1\n",
    )
    .unwrap();
    let o = selstab(&["experiment", "--config", "bad.conf"], p);
    assert_eq!(o.status.code(), Some(1));
}
