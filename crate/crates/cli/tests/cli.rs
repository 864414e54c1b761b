use std::process::{Command, Output};

fn masterfield(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_masterfield"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn eval_unit_square() {
    let o = masterfield(&["eval", "--loop", "NESW", "--k", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("loop,k,value,method"));
    assert_eq!(lines.next(), Some("NESW,1,0.606530659712633,exact"));
    assert_eq!(lines.next(), None);
}

#[test]
fn eval_several_loops_and_powers() {
    let o = masterfield(&["eval", "--loop", "ENWS,EENWWS", "--k", "1,2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 5);
    assert!(stdout(&o).contains("EENWWS,2,-0.135335283236613,exact"));
}

#[test]
fn empty_loop_needs_constant_flag() {
    let o = masterfield(&["eval", "--loop", ""]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("empty word allowed only as explicit constant"));
    let o = masterfield(&["eval", "--constant", "--k", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o)
        .lines()
        .nth(1)
        .unwrap()
        .ends_with(",3,1.00000000000000,exact"));
}

#[test]
fn bad_token_reports_position() {
    let o = masterfield(&["eval", "--loop", "ENXS"]);
    assert!(!o.status.success());
    let err = stderr(&o);
    assert!(err.contains('X') && err.contains('2'), "{err}");
}

#[test]
fn open_path_is_rejected() {
    let o = masterfield(&["eval", "--loop", "ENW"]);
    assert!(!o.status.success());
    assert!(stderr(&o).starts_with("error:"));
}

#[test]
fn checks_pass_on_default_corpus() {
    for kind in ["braid", "area", "divisibility", "gauge", "basis"] {
        let o = masterfield(&[
            "check",
            kind,
            "--corpus",
            "default",
            "--kmax",
            "2",
            "--max-len",
            "2",
            "--max-strands",
            "3",
        ]);
        assert!(o.status.success(), "{kind}: {}", stderr(&o));
        let out = stdout(&o);
        assert!(out.starts_with("check,case,k,lhs,rhs,error\n"), "{kind}");
        assert!(out.lines().count() > 1, "{kind}");
    }
}

#[test]
fn axiom_table() {
    let o = masterfield(&["check", "axioms", "--max-n", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("axiom,n,holds,convention,witness\n"));
    assert!(
        out.lines()
            .skip(1)
            .all(|l| l.split(',').nth(2) == Some("true")),
        "{out}"
    );
}

#[test]
fn corpus_file_with_comments() {
    let dir = std::env::temp_dir().join(format!("masterfield-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("corpus.txt");
    std::fs::write(&path, "# two loops\nENWS\n\nEENWNWSS  # three faces\n").unwrap();
    let o = masterfield(&[
        "check",
        "basis",
        "--corpus",
        path.to_str().unwrap(),
        "--kmax",
        "2",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 1 + 2 * 2);

    std::fs::write(&path, "ENWS\nENW\n").unwrap();
    let o = masterfield(&["check", "basis", "--corpus", path.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

#[test]
fn moments_table() {
    let o = masterfield(&["moments", "--t", "1,2", "--kmax", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("t,k,moment\n"));
    assert!(out.contains("1.00000000000000,1,0.606530659712633"));
    assert!(out.contains("1.00000000000000,2,0\n"));
    assert_eq!(out.lines().count(), 1 + 2 * 3);
}

#[test]
fn graph_summary() {
    let o = masterfield(&["graph", "--loop", "EENWNWSS"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(!stdout(&o).is_empty());
}

#[test]
fn output_file() {
    let dir = std::env::temp_dir().join(format!("masterfield-out-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("eval.csv");
    let o = masterfield(&["--output", path.to_str().unwrap(), "eval", "--loop", "ENWS"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let written = std::fs::read_to_string(&path).unwrap();
    assert!(written.starts_with("loop,k,value,method\n"));
}

#[test]
fn mc_output_is_byte_stable() {
    let args = |workers: &'static str| {
        vec![
            "mc",
            "--loop",
            "ENWS,EENWWS",
            "--k",
            "1,2",
            "--N",
            "4",
            "--samples",
            "6",
            "--seed",
            "3",
            "--steps-per-unit",
            "50",
            "--workers",
            workers,
        ]
    };
    let a = masterfield(&args("1"));
    assert!(a.status.success(), "{}", stderr(&a));
    let b = masterfield(&args("1"));
    let c = masterfield(&args("2"));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
    assert!(stdout(&a).starts_with("loop,k,re,im,stderr,method\n"));
}

#[test]
fn compare_mc_small() {
    let o = masterfield(&[
        "compare-mc",
        "--kmax",
        "1",
        "--N",
        "8",
        "--samples",
        "20",
        "--steps-per-unit",
        "50",
        "--z",
        "6",
    ]);
    assert!(
        stdout(&o).starts_with("loop,k,exact,mc_re,mc_im,stderr,agree\n"),
        "{}",
        stderr(&o)
    );
    assert_eq!(stdout(&o).lines().count(), 11);
}
