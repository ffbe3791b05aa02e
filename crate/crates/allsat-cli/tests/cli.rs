use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../allsat/tests/data").join(name)
}

fn allsat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_allsat"))
        .args(args)
        .env_remove("ALLSAT_DUMP_DIR")
        .output()
        .expect("run allsat")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn solve_prints_counts_for_every_mode() {
    let six = data("six_vars.cnf");
    let six = six.to_str().unwrap();
    for extra in [
        vec!["--mode", "blocking"],
        vec!["--mode", "blocking", "--simplify", "--continue"],
        vec!["--mode", "nonblocking", "--uip", "dlevel", "--backtrack", "bj"],
        vec!["--mode", "bdd", "--cache", "separator"],
        vec!["--mode", "bdd-blocking", "--cache", "cutset"],
        vec!["--mode", "oracle"],
    ] {
        let mut args = vec!["solve", six];
        args.extend(extra.iter().copied());
        let o = allsat(&args);
        assert_eq!(o.status.code(), Some(0), "{extra:?}");
        assert_eq!(stdout(&o).trim(), "22", "{extra:?}");
    }
    let o = allsat(&["solve", data("cycle.cnf").to_str().unwrap(), "--mode", "blocking"]);
    assert_eq!(stdout(&o).trim(), "2");
}

#[test]
fn cubes_output_lists_models() {
    let o = allsat(&["solve", data("cycle.cnf").to_str().unwrap(), "--output", "cubes"]);
    assert_eq!(o.status.code(), Some(0));
    let mut lines: Vec<String> = stdout(&o).lines().map(str::to_owned).collect();
    lines.sort();
    assert_eq!(lines, vec!["-1 -2 -3 0", "1 2 3 0"]);
}

#[test]
fn limits_and_bad_input_set_the_exit_code() {
    let six = data("six_vars.cnf");
    let o = allsat(&["solve", six.to_str().unwrap(), "--time-limit", "0"]);
    assert_eq!(o.status.code(), Some(10));

    let o = allsat(&["solve", "/nonexistent/x.cnf"]);
    assert_eq!(o.status.code(), Some(20));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error: reading"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.cnf");
    std::fs::write(&bad, "p cnf 2 1\n1 3 0\n").unwrap();
    assert_eq!(allsat(&["solve", bad.to_str().unwrap()]).status.code(), Some(20));

    let o = allsat(&["solve", six.to_str().unwrap(), "--mode", "blocking", "--cache", "cutset"]);
    assert_eq!(o.status.code(), Some(20));
}

#[test]
fn verify_reports_agreement() {
    let six = data("six_vars.cnf");
    let o = allsat(&["verify", six.to_str().unwrap(), "--a", "bdd/cutset", "--b", "bdd/separator"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("agree"));
    assert!(stdout(&o).contains("oracle: 22"));

    let cycle = data("cycle.cnf");
    let o = allsat(&["verify", cycle.to_str().unwrap(), "--a", "blocking", "--b", "nonblocking"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn bench_writes_the_tables() {
    let src = tempfile::tempdir().unwrap();
    let out = tempfile::tempdir().unwrap();
    let configs = src.path().join("configs.txt");
    std::fs::write(&configs, "blocking\nnonblocking/sublevel/cbj\nbdd/cutset\n").unwrap();
    for name in ["six_vars.cnf", "cycle.cnf"] {
        std::fs::copy(data(name), src.path().join(name)).unwrap();
    }
    let o = allsat(&[
        "bench",
        src.path().to_str().unwrap(),
        "--configs",
        configs.to_str().unwrap(),
        "--out",
        out.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let runs = std::fs::read_to_string(out.path().join("runs.csv")).unwrap();
    assert_eq!(runs.lines().count(), 1 + 2 * 3);
    for table in ["cactus.csv", "histogram.csv"] {
        assert!(out.path().join(table).exists());
    }

    let empty = tempfile::tempdir().unwrap();
    let o = allsat(&["bench", empty.path().to_str().unwrap(), "--out", out.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let runs = std::fs::read_to_string(out.path().join("runs.csv")).unwrap();
    assert_eq!(runs.lines().count(), 1);
}

#[test]
fn dump_dir_from_environment_wins() {
    let flag_dir = tempfile::tempdir().unwrap();
    let env_dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_allsat"))
        .args([
            "solve",
            data("six_vars.cnf").to_str().unwrap(),
            "--mode",
            "bdd",
            "--refresh-threshold",
            "8",
            "--dump-dir",
            flag_dir.path().to_str().unwrap(),
        ])
        .env("ALLSAT_DUMP_DIR", env_dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).trim(), "22");
    let names: Vec<String> = std::fs::read_dir(env_dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    assert!(names.iter().any(|n| n.ends_with(".manifest")), "{names:?}");
    assert!(names.iter().any(|n| n.ends_with(".obdd")), "{names:?}");
    assert_eq!(std::fs::read_dir(flag_dir.path()).unwrap().count(), 0);
}
