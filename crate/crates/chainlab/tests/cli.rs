//! Runs the `chainlab` binary end to end.

use std::path::Path;
use std::process::{Command, Output};

fn chainlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chainlab"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_reader(csv.as_bytes());
    r.records()
        .map(|x| x.unwrap().iter().map(str::to_string).collect())
        .collect()
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    let i = header.iter().position(|h| *h == name).unwrap();
    rows(csv).into_iter().map(|r| r[i].clone()).collect()
}

#[test]
fn analyze_two_state() {
    let o = chainlab(&[
        "analyze",
        "--chain",
        "switch1",
        "--instance",
        "6,6,6,6,5,5;6,6,6,6,5,5",
    ]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(column(&out, "tau"), ["1368"]);
    assert_eq!(column(&out, "n_states"), ["2"]);
    let upper: f64 = column(&out, "upper_spectral")[0].parse().unwrap();
    assert!((upper - 1676.0).abs() < 0.5);
}

#[test]
fn analyze_with_reduction_and_exports() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("k33");
    let loads = dir.path().join("loads.csv");
    let o = chainlab(&[
        "analyze",
        "--chain",
        "matching1",
        "--instance",
        "111;111;111",
        "--export",
        prefix.to_str().unwrap(),
        "--loads",
        loads.to_str().unwrap(),
        "--scheme",
        "canonical",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert_eq!(column(&out, "n_states"), ["24"]);
    assert_eq!(column(&out, "scheme"), ["canonical"]);
    assert!(!column(&out, "theory_bound")[0].is_empty());
    let states = std::fs::read_to_string(dir.path().join("k33.states")).unwrap();
    assert_eq!(states.lines().count(), 24);
    let edges = std::fs::read_to_string(dir.path().join("k33.edges")).unwrap();
    let total: f64 = edges
        .lines()
        .filter(|l| l.starts_with("0 "))
        .map(|l| l.split(' ').nth(3).unwrap().parse::<f64>().unwrap())
        .sum();
    assert!((total - 1.0).abs() < 1e-12);
    assert!(std::fs::read_to_string(loads)
        .unwrap()
        .starts_with("src,dst,load,pi_u_Puv,ratio\n"));

    let o = chainlab(&[
        "analyze",
        "--chain",
        "switch1",
        "--instance",
        "6,6,6,6,5,5;6,6,6,6,5,5",
        "--fraction",
        "0.99",
    ]);
    assert_eq!(column(&stdout(&o), "tau"), ["1368", "14"]);
}

#[test]
fn input_errors_exit_one() {
    let o = chainlab(&["analyze", "--chain", "switch1", "--instance", "3,3;2,2"]);
    assert_eq!(o.status.code(), Some(1));
    let o = chainlab(&["analyze", "--chain", "bogus", "--instance", "1;1"]);
    assert_eq!(o.status.code(), Some(1));
    let o = chainlab(&["analyze", "--chain", "switch1"]);
    assert_eq!(o.status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.txt");
    std::fs::write(&file, "11;1\n").unwrap();
    let o = chainlab(&[
        "enumerate",
        "--chain",
        "matching1",
        "--file",
        file.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.txt:1:"));
}

#[test]
fn computation_errors_exit_two() {
    // Fewer states allowed than the chain has.
    let o = chainlab(&[
        "analyze",
        "--chain",
        "switch1",
        "--instance",
        "2,2,2;2,2,2",
        "--build-cap",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn enumerate_small_universe() {
    let o = chainlab(&[
        "enumerate",
        "--chain",
        "switch2",
        "--max-rows",
        "2",
        "--max-cols",
        "2",
    ]);
    assert!(o.status.success());
    assert_eq!(rows(&stdout(&o)).len(), 6);
}

#[test]
fn enumerate_graph_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("graphs.txt");
    std::fs::write(&file, "# K2,2 three ways\n11;11\nC]\n:CoKN\n\n").unwrap();
    let o = chainlab(&[
        "enumerate",
        "--chain",
        "matching2",
        "--file",
        file.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(column(&out, "instance_id"), ["11;11", "11;11", "11;11"]);

    std::fs::write(&file, "").unwrap();
    let o = chainlab(&[
        "enumerate",
        "--chain",
        "matching1",
        "--file",
        file.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 1);
}

#[test]
fn resume_skips_finished_instances() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.csv");
    let args = |resume: bool| {
        let mut a = vec![
            "enumerate",
            "--chain",
            "switch1",
            "--max-rows",
            "3",
            "--max-cols",
            "3",
            "--out",
        ];
        a.push(out.to_str().unwrap());
        if resume {
            a.push("--resume");
        }
        a.into_iter().map(String::from).collect::<Vec<_>>()
    };
    let run = |a: Vec<String>| {
        Command::new(env!("CARGO_BIN_EXE_chainlab"))
            .args(a)
            .status()
            .unwrap()
    };
    assert!(run(args(false)).success());
    let full = std::fs::read_to_string(&out).unwrap();
    assert_eq!(rows(&full).len(), 33);

    // Drop the last ten instances from both files, as if the run was killed.
    let journal = Path::new(&format!("{}.journal", out.display())).to_path_buf();
    let kept: Vec<&str> = full.lines().take(1 + 23).collect();
    std::fs::write(&out, kept.join("\n") + "\n").unwrap();
    let j = std::fs::read_to_string(&journal).unwrap();
    let jk: Vec<&str> = j.lines().take(23).collect();
    std::fs::write(&journal, jk.join("\n") + "\n").unwrap();

    assert!(run(args(true)).success());
    assert_eq!(std::fs::read_to_string(&out).unwrap(), full);
    assert!(run(args(true)).success());
    assert_eq!(std::fs::read_to_string(&out).unwrap(), full);
}

#[test]
fn loop_reduce_fraction_zero_pairs_identical_rows() {
    let o = chainlab(&[
        "loop-reduce",
        "--chain",
        "switch1",
        "--max-rows",
        "3",
        "--max-cols",
        "3",
        "--fraction",
        "0",
    ]);
    assert!(o.status.success());
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 66);
    for pair in r.chunks(2) {
        assert_eq!(pair[0][2], "original");
        assert_eq!(pair[1][2], "reduced");
        assert_eq!(pair[0][3..], pair[1][3..]);
    }
}

#[test]
fn loop_reduce_skips_weighted_chain() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("g.txt");
    std::fs::write(&file, "11;11\n").unwrap();
    let o = chainlab(&[
        "loop-reduce",
        "--chain",
        "matching2",
        "--file",
        file.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 1);
}

#[test]
fn scale_predicts_beyond_cap() {
    let o = chainlab(&[
        "scale",
        "--family",
        "A",
        "--n-min",
        "4",
        "--n-max",
        "8",
        "--mixing-cap",
        "200",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    let flags = column(&out, "tau_predicted_flag");
    assert_eq!(flags.len(), 5);
    assert!(flags.contains(&"0".to_string()) && flags.contains(&"1".to_string()));
    assert!(String::from_utf8_lossy(&o.stderr).contains("log tau ~ log n"));
}

#[test]
fn walk_is_reproducible() {
    let args = [
        "walk",
        "--chain",
        "switch1",
        "--instance",
        "2,2,2;2,2,2",
        "--steps",
        "0",
    ];
    assert_eq!(stdout(&chainlab(&args)).trim(), "110;101;011");
    let args = [
        "walk",
        "--chain",
        "matching2",
        "--instance",
        "111;111;111",
        "--steps",
        "50",
        "--seed",
        "9",
    ];
    let a = stdout(&chainlab(&args));
    assert_eq!(a, stdout(&chainlab(&args)));
    assert_eq!(a.trim().len(), 11);
}

#[test]
fn walk_histogram_two_state() {
    let o = chainlab(&[
        "walk",
        "--chain",
        "switch1",
        "--instance",
        "6,6,6,6,5,5;6,6,6,6,5,5",
        "--steps",
        "1368",
        "--seed",
        "1",
        "--histogram",
        "100000",
    ]);
    assert!(o.status.success());
    let out = stdout(&o);
    let freqs: Vec<f64> = out
        .lines()
        .map(|l| l.split(' ').nth(2).unwrap().parse().unwrap())
        .collect();
    assert_eq!(freqs.len(), 2);
    for f in freqs {
        assert!((f - 0.5).abs() < 0.005, "{out}");
    }
}
