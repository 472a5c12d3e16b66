//! End-to-end tests of the `markedk` binary: file formats, config replay
//! and exit codes.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use markedk::{Hypothesis, ScenarioSpec};
use serde_json::Value;
use tempfile::TempDir;

fn markedk(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_markedk"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], dir: &Path) -> Output {
    let out = markedk(args, dir);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn code(args: &[&str], dir: &Path) -> i32 {
    markedk(args, dir).status.code().expect("exit code")
}

fn json(path: &Path) -> Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    csv::Reader::from_path(path)
        .unwrap()
        .records()
        .map(|r| r.unwrap().iter().map(str::to_string).collect())
        .collect()
}

fn simulate(dir: &TempDir, name: &str, extra: &[&str]) -> PathBuf {
    let path = dir.path().join(name);
    let mut args = vec!["simulate", "--out", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    ok(&args, dir.path());
    path
}

#[test]
fn simulated_csv_round_trips_to_full_precision() {
    let dir = TempDir::new().unwrap();
    let csv = simulate(
        &dir,
        "p.csv",
        &[
            "--hypothesis",
            "H1",
            "--expected-n",
            "40",
            "--h",
            "2",
            "--seed",
            "11",
        ],
    );
    let want = ScenarioSpec::global_preset(Hypothesis::H1, 40.0, 2.0, 11)
        .generate()
        .unwrap()
        .pattern;
    let got = rows(&csv);
    assert_eq!(got.len(), want.len());
    for (row, (p, m)) in got.iter().zip(want.points().iter().zip(want.marks())) {
        let v: Vec<f64> = row.iter().map(|s| s.parse().unwrap()).collect();
        assert_eq!(v[0].to_bits(), p.x.to_bits());
        assert_eq!(v[1].to_bits(), p.y.to_bits());
        assert_eq!(v[2].to_bits(), m.to_bits());
    }
}

#[test]
fn labeled_scenarios_carry_a_truth_column() {
    let dir = TempDir::new().unwrap();
    let manifest = dir.path().join("m.json");
    let csv = simulate(
        &dir,
        "local.csv",
        &[
            "--hypothesis",
            "H1L",
            "--expected-n",
            "60",
            "--manifest",
            manifest.to_str().unwrap(),
        ],
    );
    let header = fs::read_to_string(&csv).unwrap();
    assert!(header.starts_with("x,y,mark,truth\n"));
    let m = json(&manifest);
    assert_eq!(m["command"], "simulate");
    assert_eq!(m["points"].as_u64().unwrap() as usize, rows(&csv).len());

    let out = dir.path().join("t.json");
    let points = dir.path().join("points.csv");
    ok(
        &[
            "test",
            csv.to_str().unwrap(),
            "--hypothesis",
            "H1L",
            "-B",
            "19",
            "--points",
            points.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ],
        dir.path(),
    );
    let t = json(&out);
    let counts = &t["truth_counts"];
    let total: u64 = ["tp", "fp", "tn", "fn_"]
        .iter()
        .map(|k| counts[*k].as_u64().unwrap())
        .sum();
    assert_eq!(total as usize, rows(&csv).len());
    let per_point = rows(&points);
    assert_eq!(per_point.len(), rows(&csv).len());
    assert!(per_point.iter().all(|r| r.len() == 6));
}

#[test]
fn every_command_replays_byte_for_byte() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let data = simulate(&dir, "data.csv", &["--hypothesis", "H3", "--seed", "5"]);
    fs::write(
        d.join("groups.csv"),
        "g,depth,time\na,1,10\na,2,11\na,3,12\nb,2.5,20\nb,4,21\nb,5,30\n",
    )
    .unwrap();
    let data = data.to_str().unwrap();
    let runs: Vec<Vec<&str>> = vec![
        vec![
            "simulate",
            "--hypothesis",
            "H2",
            "--expected-n",
            "30",
            "--seed",
            "3",
        ],
        vec!["test", data, "-B", "19", "--seed", "2"],
        vec![
            "test",
            data,
            "--hypothesis",
            "H2",
            "-B",
            "19",
            "--intensity",
            "kernel",
        ],
        vec![
            "test",
            data,
            "--local",
            "-B",
            "19",
            "--edge-correction",
            "none",
        ],
        vec![
            "power",
            "--hypothesis",
            "H3",
            "-R",
            "4",
            "-B",
            "19",
            "--expected-n",
            "25",
        ],
        vec![
            "classify",
            "--hypothesis",
            "H1L",
            "-R",
            "2",
            "-B",
            "19",
            "--expected-n",
            "25",
        ],
        vec!["ks", "groups.csv", "--group", "g", "--vars", "depth,time"],
    ];
    for (k, args) in runs.iter().enumerate() {
        let first = d.join(format!("run{k}.out"));
        let mut a = args.clone();
        a.extend(["--out", first.to_str().unwrap()]);
        ok(&a, d);
        let bytes = fs::read(&first).unwrap();

        let manifest = if args[0] == "simulate" {
            let m = d.join(format!("run{k}.json"));
            let mut a = args.clone();
            a.extend([
                "--out",
                first.to_str().unwrap(),
                "--manifest",
                m.to_str().unwrap(),
            ]);
            ok(&a, d);
            m
        } else {
            first.clone()
        };
        let replay = d.join(format!("run{k}.replay"));
        ok(
            &[
                args[0],
                "--config",
                manifest.to_str().unwrap(),
                "--out",
                replay.to_str().unwrap(),
            ],
            d,
        );
        assert_eq!(fs::read(&replay).unwrap(), bytes, "replay of {args:?}");
    }
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let mut outputs = Vec::new();
    for threads in ["1", "2", "4"] {
        let out = d.join(format!("p{threads}.json"));
        ok(
            &[
                "power",
                "--hypothesis",
                "H1",
                "-R",
                "6",
                "-B",
                "19",
                "--threads",
                threads,
                "--out",
                out.to_str().unwrap(),
            ],
            d,
        );
        outputs.push(fs::read(out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
}

#[test]
fn toml_config_drives_a_run() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    fs::write(
        d.join("run.toml"),
        "seed = 21\n\
         [window]\nxmin = 0.0\nxmax = 100.0\nymin = 0.0\nymax = 100.0\n\
         [grid]\npoints = 32\n\
         [scenario.generator]\nkind = \"hom_poisson\"\nlambda = 0.005\n\
         [scenario.marks]\nkind = \"iid_uniform01\"\n",
    )
    .unwrap();
    ok(&["simulate", "--config", "run.toml", "--out", "sim.csv"], d);
    let pts = rows(&d.join("sim.csv"));
    assert!(pts.len() > 20);
    assert!(pts
        .iter()
        .all(|r| (0.0..=100.0).contains(&r[0].parse::<f64>().unwrap())));

    ok(
        &[
            "test",
            "sim.csv",
            "--config",
            "run.toml",
            "--hypothesis",
            "H1",
            "-B",
            "19",
            "--curves",
            "curves",
            "--out",
            "t.json",
        ],
        d,
    );
    let t = json(&d.join("t.json"));
    assert_eq!(t["config"]["grid"]["points"], 32);
    assert_eq!(t["config"]["window"]["xmax"], 100.0);
    let p = t["result"]["global"]["p_value"].as_f64().unwrap();
    assert!(p > 0.0 && p <= 1.0);

    let curves = rows(&d.join("curves/curves.csv"));
    assert_eq!(curves.len(), 32);
    let header = fs::read_to_string(d.join("curves/curves.csv")).unwrap();
    assert!(header.starts_with("r,k,ktf,kappa,"));
    let last: f64 = curves[31][0].parse().unwrap();
    assert!((last - 25.0).abs() < 1e-12);
    assert!(d.join("curves/manifest.json").exists());
}

#[test]
fn ks_compares_two_groups() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    fs::write(
        d.join("ev.csv"),
        "significant,mag\n1,1\n1,2\n1,3\n1,4\n0,5\n0,6\n0,7\n0,8\n",
    )
    .unwrap();
    ok(
        &[
            "ks",
            "ev.csv",
            "--group",
            "significant",
            "--vars",
            "mag",
            "--out",
            "ks.json",
        ],
        d,
    );
    let v = json(&d.join("ks.json"));
    let r = &v["comparisons"][0]["result"];
    assert_eq!(v["comparisons"][0]["variable"], "mag");
    assert_eq!(r["d"].as_f64().unwrap(), 1.0);
    assert!(r["p_value"].as_f64().unwrap() < 0.05);

    fs::write(d.join("three.csv"), "g,v\na,1\nb,2\nc,3\n").unwrap();
    assert_eq!(
        code(&["ks", "three.csv", "--group", "g", "--vars", "v"], d),
        1
    );
}

#[test]
fn exit_codes_follow_the_convention() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    assert_eq!(code(&["--help"], d), 0);
    assert_eq!(code(&["--version"], d), 0);
    assert_eq!(code(&["frobnicate"], d), 1);
    assert_eq!(code(&["test", "--hypothesis", "H9", "x.csv"], d), 1);
    assert_eq!(code(&["test", "missing.csv"], d), 1);

    fs::write(d.join("one.csv"), "x,y,mark\n0.5,0.5,1\n").unwrap();
    assert_eq!(code(&["test", "one.csv"], d), 1);
    fs::write(d.join("neg.csv"), "x,y,mark\n0.5,0.5,1\n0.2,0.2,-1\n").unwrap();
    assert_eq!(code(&["test", "neg.csv"], d), 1);
    fs::write(d.join("nan.csv"), "x,y,mark\n0.5,0.5,1\n0.2,NaN,1\n").unwrap();
    let out = markedk(&["test", "nan.csv"], d);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
    fs::write(d.join("bad.toml"), "seed = 1\nbogus = 2\n").unwrap();
    assert_eq!(code(&["simulate", "--config", "bad.toml"], d), 1);
    fs::write(
        d.join("three.csv"),
        "x,y,mark\n0.5,0.5,1\n0.2,0.2,2\n0.7,0.1,3\n",
    )
    .unwrap();
    assert_eq!(code(&["test", "three.csv", "-B", "19"], d), 0);
    assert_eq!(code(&["test", "three.csv", "-B", "5"], d), 1);

    fs::write(d.join("file"), "").unwrap();
    assert_eq!(code(&["simulate", "--out", "file/sub.csv"], d), 2);
}
