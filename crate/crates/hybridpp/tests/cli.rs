use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

struct Output {
    code: i32,
    stdout: String,
    stderr: String,
}

fn hybridpp<S: AsRef<std::ffi::OsStr>>(args: &[S]) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_hybridpp"))
        .args(args)
        .output()
        .unwrap();
    Output {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

fn ok<S: AsRef<std::ffi::OsStr>>(args: &[S]) -> String {
    let out = hybridpp(args);
    assert_eq!(out.code, 0, "{}", out.stderr);
    out.stdout
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// A bimodal column and a skewed one, 300 rows, no randomness.
fn two_columns(dir: &Path) -> PathBuf {
    let mut text = String::from("id,score,load\n");
    for i in 0..300 {
        let u = ((i as f64 + 0.5) * 0.618_033_988_749_895).fract();
        let score = if i % 3 == 0 {
            20.0 + 5.0 * u
        } else {
            40.0 + 10.0 * u * u
        };
        let load = if i % 17 == 0 {
            String::new()
        } else {
            format!("{}", (u * 7.0).powi(2))
        };
        text.push_str(&format!("r{i},{score},{load}\n"));
    }
    write(dir, "data.csv", &text)
}

#[test]
fn learn_writes_program_and_stats() {
    let dir = tempfile::tempdir().unwrap();
    let csv = two_columns(dir.path());
    let out = dir.path().join("out");
    ok(&[
        "learn".as_ref(),
        csv.as_os_str(),
        "--columns".as_ref(),
        "score,load".as_ref(),
        "--max-size".as_ref(),
        "8".as_ref(),
        "--max-order".as_ref(),
        "3".as_ref(),
        "--out".as_ref(),
        out.as_os_str(),
    ]);
    let stats = json(&out.join("stats.json"));
    assert_eq!(stats["# Cont"], 2);
    let attrs = stats["attributes"].as_array().unwrap();
    assert_eq!(attrs[0]["name"], "score");
    assert_eq!(attrs[0]["missing"], 0);
    assert_eq!(attrs[1]["missing"], 18);
    assert_eq!(attrs[1]["n"], 282);
    for a in attrs {
        let mass: f64 = a["pieces"]
            .as_array()
            .unwrap()
            .iter()
            .map(|p| p["mass"].as_f64().unwrap())
            .sum();
        assert!((mass - 1.0).abs() < 1e-9);
    }
    let program = std::fs::read_to_string(out.join("program.pl")).unwrap();
    assert!(program.contains("score_1(S) :- score(S), ininterval(S, "));
    assert!(program.contains("load_1(L) :- load(L), ininterval(L, "));
}

#[test]
fn learned_piece_masses_match_queries() {
    let dir = tempfile::tempdir().unwrap();
    let csv = two_columns(dir.path());
    let out = dir.path().join("out");
    ok(&[
        "learn".as_ref(),
        csv.as_os_str(),
        "--columns".as_ref(),
        "score".as_ref(),
        "--max-size".as_ref(),
        "10".as_ref(),
        "--max-order".as_ref(),
        "4".as_ref(),
        "--out".as_ref(),
        out.as_os_str(),
    ]);
    let stats = json(&out.join("stats.json"));
    let pieces = stats["attributes"][0]["pieces"].as_array().unwrap().clone();
    let queries: String = pieces
        .iter()
        .map(|p| format!("query({}(X)).\n", p["predicate"].as_str().unwrap()))
        .collect();
    let q = write(dir.path(), "queries.pl", &queries);
    let results: Value = serde_json::from_str(&ok(&[
        "query".as_ref(),
        out.join("program.pl").as_os_str(),
        q.as_os_str(),
    ]))
    .unwrap();
    for (p, r) in pieces.iter().zip(results.as_array().unwrap()) {
        let d = p["mass"].as_f64().unwrap() - r["probability"].as_f64().unwrap();
        assert!(d.abs() < 1e-9, "{p} {r}");
    }
}

#[test]
fn learning_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let csv = two_columns(dir.path());
    let run = |name: &str| {
        let out = dir.path().join(name);
        ok(&[
            "learn".as_ref(),
            csv.as_os_str(),
            "--key".as_ref(),
            "id".as_ref(),
            "--max-size".as_ref(),
            "8".as_ref(),
            "--max-order".as_ref(),
            "3".as_ref(),
            "--seed".as_ref(),
            "5".as_ref(),
            "--out".as_ref(),
            out.as_os_str(),
        ]);
        (
            std::fs::read(out.join("program.pl")).unwrap(),
            std::fs::read(out.join("stats.json")).unwrap(),
        )
    };
    assert_eq!(run("a"), run("b"));
}

fn university(dir: &Path) -> PathBuf {
    let f = fixture("university");
    let out = dir.join("learn");
    ok(&[
        "learn".as_ref(),
        f.join("students.csv").as_os_str(),
        "--key".as_ref(),
        "student".as_ref(),
        "--max-size".as_ref(),
        "12".as_ref(),
        "--max-order".as_ref(),
        "4".as_ref(),
        "--out".as_ref(),
        out.as_os_str(),
    ]);
    out.join("program.pl")
}

#[test]
fn university_rules_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let program = university(dir.path());
    let f = fixture("university");
    let args = |out: &Path| -> Vec<std::ffi::OsString> {
        vec![
            "induce".into(),
            program.clone().into(),
            f.join("university.pl").into(),
            "--target".into(),
            "grade_high".into(),
            "--examples".into(),
            f.join("examples.pl").into(),
            "--out".into(),
            out.into(),
        ]
    };
    ok(&args(&dir.path().join("a")));
    ok(&args(&dir.path().join("b")));
    let a = std::fs::read_to_string(dir.path().join("a/hypothesis.pl")).unwrap();
    let b = std::fs::read_to_string(dir.path().join("b/hypothesis.pl")).unwrap();
    assert_eq!(a, b);
    assert!(
        a.starts_with("grade_high(A) :- difficulty_easy(A), takes(B, A), intelligence_"),
        "{a}"
    );
    let rules = json(&dir.path().join("a/rules.json"));
    assert_eq!(rules["Rules"], 1);
    assert_eq!(rules["prec"], 1.0);
    assert_eq!(rules["Neg"], 0.0);
    assert_eq!(rules["Pred"], 3.0);
}

#[test]
fn transform_writes_mapping_and_task() {
    let dir = tempfile::tempdir().unwrap();
    let program = university(dir.path());
    let f = fixture("university");
    let out = dir.path().join("task");
    ok(&[
        "transform".as_ref(),
        program.as_os_str(),
        f.join("university.pl").as_os_str(),
        "--target".as_ref(),
        "grade_high/1".as_ref(),
        "--examples".as_ref(),
        f.join("examples.pl").as_os_str(),
        "--out".as_ref(),
        out.as_os_str(),
    ]);
    let mapping = json(&out.join("mapping.json"));
    let rows = mapping.as_array().unwrap();
    for attr in ["intelligence/2", "nrhours/2"] {
        let mass: f64 = rows
            .iter()
            .filter(|r| r["attribute"] == attr)
            .map(|r| r["probability"].as_f64().unwrap())
            .sum();
        assert!((mass - 1.0).abs() < 1e-6, "{attr} {mass}");
    }
    let discretized = std::fs::read_to_string(out.join("discretized.pl")).unwrap();
    assert!(discretized.contains(":: intelligence_1(E)."));
    let bias = std::fs::read_to_string(out.join("bias.pl")).unwrap();
    assert!(bias.starts_with("learn(grade_high(t"));
    assert!(bias.contains("mode(takes(in, out))."));

    let from_dir = ok(&["induce".as_ref(), out.as_os_str()]);
    let from_program = ok(&[
        "induce".as_ref(),
        program.as_os_str(),
        f.join("university.pl").as_os_str(),
        "--target".as_ref(),
        "grade_high".as_ref(),
        "--examples".as_ref(),
        f.join("examples.pl").as_os_str(),
    ]);
    assert_eq!(from_dir, from_program);
}

#[test]
fn query_examples_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let coin = write(dir.path(), "coin.pl", "0.6 :: heads. q :- heads. query(q).");
    let r: Value = serde_json::from_str(&ok(&["query".as_ref(), coin.as_os_str()])).unwrap();
    assert_eq!(r[0]["probability"], 0.6);
    assert_eq!(r[0]["conditioned"], false);

    let uniform = write(
        dir.path(),
        "uniform.pl",
        "1*X^0 :: att_1(X).
         att_1(X) :- att(X), ininterval(X, 0, 1).
         avg :- att(X), ininterval(X, 0.2, 0.5).
         high :- att(X), above(X, 0.4).
         query(avg).",
    );
    let r: Value = serde_json::from_str(&ok(&["query".as_ref(), uniform.as_os_str()])).unwrap();
    assert!((r[0]["probability"].as_f64().unwrap() - 0.3).abs() < 1e-15);

    let evidence = write(dir.path(), "evidence.pl", "evidence(high).");
    let r: Value = serde_json::from_str(&ok(&[
        "query".as_ref(),
        uniform.as_os_str(),
        "--evidence".as_ref(),
        evidence.as_os_str(),
    ]))
    .unwrap();
    assert!((r[0]["probability"].as_f64().unwrap() - 0.1 / 0.6).abs() < 1e-12);
    assert_eq!(r[0]["conditioned"], true);
}

#[test]
fn plotdata_samples_the_density() {
    let dir = tempfile::tempdir().unwrap();
    let uniform = write(
        dir.path(),
        "uniform.pl",
        "0.5*X^0 :: att_1(X). att_1(X) :- att(X), ininterval(X, 1, 3).",
    );
    let text = ok(&[
        "plotdata".as_ref(),
        uniform.as_os_str(),
        "--attribute".as_ref(),
        "att".as_ref(),
    ]);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,density"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let (x, y) = l.split_once(',').unwrap();
            (x.parse().unwrap(), y.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 201);
    assert!(rows.iter().all(|r| r.1 == 0.5));
    assert_eq!(rows[0].0, 1.0);
    assert_eq!(rows[200].0, 3.0);

    let one = ok(&[
        "plotdata".as_ref(),
        uniform.as_os_str(),
        "--attribute".as_ref(),
        "att".as_ref(),
        "--points".as_ref(),
        "1".as_ref(),
    ]);
    assert_eq!(one, "x,density\n1,0.5\n");
}

#[test]
fn plotdata_integrates_to_one() {
    let dir = tempfile::tempdir().unwrap();
    let csv = two_columns(dir.path());
    let program = ok(&[
        "learn".as_ref(),
        csv.as_os_str(),
        "--columns".as_ref(),
        "score".as_ref(),
        "--max-size".as_ref(),
        "8".as_ref(),
        "--max-order".as_ref(),
        "3".as_ref(),
    ]);
    let p = write(dir.path(), "score.pl", &program);
    let text = ok(&[
        "plotdata".as_ref(),
        p.as_os_str(),
        "--attribute".as_ref(),
        "score/1".as_ref(),
        "--points".as_ref(),
        "10001".as_ref(),
    ]);
    let rows: Vec<(f64, f64)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let (x, y) = l.split_once(',').unwrap();
            (x.parse().unwrap(), y.parse().unwrap())
        })
        .collect();
    // trapezoid rule
    let area: f64 = rows
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
        .sum();
    assert!((area - 1.0).abs() < 0.01, "{area}");
}

#[test]
fn stats_lists_pieces() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "p.pl",
        "0.5*X^0 :: lo(X). lo(X) :- att(X), ininterval(X, 0, 1).
         0.5*X^0 :: hi(X). hi(X) :- att(X), ininterval(X, 1, 2).
         0.3 :: rain.",
    );
    let s: Value = serde_json::from_str(&ok(&["stats".as_ref(), p.as_os_str()])).unwrap();
    assert_eq!(s["prob_facts"], 1);
    assert_eq!(s["attributes"][0]["attribute"], "att/1");
    assert_eq!(s["attributes"][0]["pieces"][1]["predicate"], "hi/1");
    assert_eq!(s["attributes"][0]["pieces"][1]["mass"], 0.5);
}

#[test]
fn aliases_name_the_pieces() {
    let dir = tempfile::tempdir().unwrap();
    let csv = two_columns(dir.path());
    let aliases = write(dir.path(), "aliases.json", r#"{"score": ["score_low", "score_high"]}"#);
    let program = ok(&[
        "learn".as_ref(),
        csv.as_os_str(),
        "--columns".as_ref(),
        "score".as_ref(),
        "--bins".as_ref(),
        "2".as_ref(),
        "--method".as_ref(),
        "ew".as_ref(),
        "--max-order".as_ref(),
        "2".as_ref(),
        "--aliases".as_ref(),
        aliases.as_os_str(),
    ]);
    assert!(program.contains("score_low(S) :- score(S), ininterval(S, "));
    assert!(program.contains("score_high(S) :- score(S), ininterval(S, "));
}

#[test]
fn distance_method_uses_the_target_column() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("x,class\n");
    for i in 0..120 {
        let x = i as f64 / 4.0;
        text.push_str(&format!("{x},{}\n", if x < 12.0 { "a" } else { "b" }));
    }
    let csv = write(dir.path(), "labelled.csv", &text);
    let out = dir.path().join("out");
    ok(&[
        "learn".as_ref(),
        csv.as_os_str(),
        "--method".as_ref(),
        "distance".as_ref(),
        "--target".as_ref(),
        "class".as_ref(),
        "--bins".as_ref(),
        "4".as_ref(),
        "--max-order".as_ref(),
        "2".as_ref(),
        "--out".as_ref(),
        out.as_os_str(),
    ]);
    let stats = json(&out.join("stats.json"));
    let a = &stats["attributes"][0];
    assert_eq!(a["method"], "distance");
    assert_eq!(a["bins"], 2);
    assert_eq!(a["pieces"][0]["hi"].as_f64().unwrap(), 11.875);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(hybridpp(&["learn", "--bogus"]).code, 1);
    assert_eq!(hybridpp(&["frobnicate"]).code, 1);
    assert_eq!(hybridpp::<&str>(&[]).code, 1);
    assert_eq!(hybridpp(&["--help"]).code, 0);

    let missing = dir.path().join("nope.csv");
    assert_eq!(hybridpp(&["learn".as_ref(), missing.as_os_str()]).code, 2);

    let bad = write(dir.path(), "bad.csv", "a,b\n1,x\n2,y\n");
    let r = hybridpp(&["learn".as_ref(), bad.as_os_str(), "--columns".as_ref(), "b".as_ref()]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("not a number"));

    let constant = write(dir.path(), "constant.csv", "a\n1\n1\n1\n");
    assert_eq!(hybridpp(&["learn".as_ref(), constant.as_os_str()]).code, 2);

    let syntax = write(dir.path(), "syntax.pl", "q :- .");
    assert_eq!(hybridpp(&["query".as_ref(), syntax.as_os_str()]).code, 2);

    let mut big = String::new();
    for i in 0..30 {
        big.push_str(&format!("0.5 :: f{i}. q :- f{i}.\n"));
    }
    big.push_str("query(q).\n");
    let big = write(dir.path(), "big.pl", &big);
    let r = hybridpp(&[
        "query".as_ref(),
        big.as_os_str(),
        "--choice-cap".as_ref(),
        "1000".as_ref(),
    ]);
    assert_eq!(r.code, 3, "{}", r.stderr);

    let program = write(dir.path(), "bg.pl", "item(a). item(b). q(a).");
    let examples = write(dir.path(), "ex.pl", "t(a).");
    let r = hybridpp(&[
        "induce".as_ref(),
        program.as_os_str(),
        "--target".as_ref(),
        "".as_ref(),
        "--examples".as_ref(),
        examples.as_os_str(),
    ]);
    assert_eq!(r.code, 1);
    let empty = write(dir.path(), "empty.pl", "");
    let r = hybridpp(&[
        "induce".as_ref(),
        program.as_os_str(),
        "--target".as_ref(),
        "t/1".as_ref(),
        "--examples".as_ref(),
        empty.as_os_str(),
    ]);
    assert_eq!(r.code, 2);
}
