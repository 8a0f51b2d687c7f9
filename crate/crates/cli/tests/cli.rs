use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn cspsketch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cspsketch"))
        .args(args)
        .env_remove("CSPSKETCH_TOL")
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
    let prefix = format!("{key}=");
    text.lines()
        .find_map(|l| l.strip_prefix(&prefix))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
        .to_string()
}

fn p(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).display().to_string()
}

#[test]
fn dicut_curve_row_two_thirds() {
    let o = cspsketch(&["--family", "builtin:dicut", "--format", "tsv", "curve", "--grid", "0.5:0.05:1.0,2/3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next().unwrap(), format!("# cspsketch {}", env!("CARGO_PKG_VERSION")));
    assert_eq!(lines.next().unwrap(), "gamma\tbeta\tlower");
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split('\t').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 12);
    let row = rows.iter().find(|r| (r[0] - 2.0 / 3.0).abs() < 1e-12).expect("row at 2/3");
    assert!((row[1] - 1.0 / 3.0).abs() <= 1e-3, "{row:?}");
    assert!(stderr(&o).contains("seed=0"));
}

#[test]
fn empty_stream_is_runtime_error() {
    let dir = TempDir::new().unwrap();
    let cert = p(&dir, "cert.txt");
    let o = cspsketch(&["--family", "builtin:dicut", "separate", "--gamma", "1", "--beta", "0.3", "-o", &cert]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let stream = p(&dir, "empty.txt");
    fs::write(&stream, "n=6 family=builtin:dicut\n").unwrap();
    let o = cspsketch(&["--family", "builtin:dicut", "run-stream", "--cert", &cert, "--stream", &stream]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("empty instance"), "{}", stderr(&o));
}

#[test]
fn gen_then_eval_maxcut_yes_is_satisfiable() {
    let dir = TempDir::new().unwrap();
    for seed in ["0", "1", "2"] {
        let s = p(&dir, &format!("s{seed}.txt"));
        let o = cspsketch(&[
            "--family", "builtin:maxcut", "--seed", seed, "gen", "--game", "pssd", "--case", "yes", "--n", "16", "--alpha",
            "1/16", "--blocks", "12", "-o", &s,
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        assert!(stderr(&o).contains(&format!("seed={seed}")));
        assert!(Path::new(&format!("{s}.meta.json")).exists());
        let o = cspsketch(&["--family", "builtin:maxcut", "eval", "--instance", &s]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        assert_eq!(field(&stdout(&o), "optimum").parse::<f64>().unwrap(), 1.0);
    }
}

#[test]
fn gen_is_deterministic_and_meta_records_planted_assignment() {
    let dir = TempDir::new().unwrap();
    let run = |name: &str| {
        let s = p(&dir, name);
        let o = cspsketch(&[
            "--family", "builtin:dicut", "--seed", "42", "gen", "--case", "no", "--n", "20", "--alpha", "0.1", "--blocks",
            "5", "--tau", "0.25", "--debug", "-o", &s,
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        (fs::read(&s).unwrap(), fs::read_to_string(format!("{s}.meta.json")).unwrap())
    };
    let (a, meta_a) = run("a.txt");
    let (b, meta_b) = run("b.txt");
    assert_eq!(a, b);
    let meta: serde_json::Value = serde_json::from_str(&meta_a).unwrap();
    let meta_b: serde_json::Value = serde_json::from_str(&meta_b).unwrap();
    assert_eq!(meta["x_star"], meta_b["x_star"]);
    assert_eq!(meta["x_star"].as_array().unwrap().len(), 20);
    assert_eq!(meta["seed"], 42);
    assert_eq!(meta["padding"], 3);
}

#[test]
fn certificate_round_trip_through_files() {
    let dir = TempDir::new().unwrap();
    let cert = p(&dir, "cert.txt");
    let o = cspsketch(&["--family", "builtin:dicut", "separate", "--gamma", "0.7", "--beta", "0.3", "-o", &cert]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = cspsketch(&["--family", "builtin:dicut", "verify-cert", "--cert", &cert, "--trials", "20"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(field(&stdout(&o), "pass"), "true");

    // A single satisfied DICUT edge: value 1, so the sketch answers YES.
    let yes = p(&dir, "yes.txt");
    fs::write(&yes, "n=2 family=builtin:dicut\n+ dicut 1 2\n+ dicut 1 2\n").unwrap();
    let o = cspsketch(&["--family", "builtin:dicut", "run-stream", "--cert", &cert, "--stream", &yes]);
    assert_eq!((o.status.code(), stdout(&o).trim()), (Some(0), "YES"));

    // A directed triangle has DICUT value 1/3.
    let no = p(&dir, "no.txt");
    fs::write(&no, "n=3 family=builtin:dicut\n+ dicut 1 2\n+ dicut 2 3\n+ dicut 3 1\n+ dicut 1 3\n- dicut 1 3\n").unwrap();
    let o = cspsketch(&["--family", "builtin:dicut", "run-stream", "--cert", &cert, "--stream", &no]);
    assert_eq!((o.status.code(), stdout(&o).trim()), (Some(1), "NO"));
    let sampled =
        cspsketch(&["--family", "builtin:dicut", "run-stream", "--cert", &cert, "--stream", &no, "--mode", "sampled", "--rate", "1"]);
    assert_eq!(sampled.status.code(), Some(1));
}

#[test]
fn classify_writes_witness_files() {
    let dir = TempDir::new().unwrap();
    let prefix = p(&dir, "w");
    let o = cspsketch(&["--family", "builtin:maxcut", "classify", "--gamma", "1", "--beta", "0.55", "--witness", &prefix]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(field(&stdout(&o), "verdict"), "INTERSECT");
    let dy = fs::read_to_string(format!("{prefix}.dy")).unwrap();
    assert!(dy.starts_with("family=builtin:maxcut"));
    assert!(Path::new(&format!("{prefix}.dn")).exists());
    let o = cspsketch(&["--family", "builtin:dicut", "classify", "--gamma", "0.6", "--beta", "0.2"]);
    assert_eq!(field(&stdout(&o), "verdict"), "DISJOINT");
}

#[test]
fn resist_and_rho() {
    let o = cspsketch(&["--family", "builtin:qcol:3", "resist"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(field(&out, "resistant"), "yes");
    assert!((field(&out, "rho").parse::<f64>().unwrap() - 2.0 / 3.0).abs() < 1e-4);
    let o = cspsketch(&["--family", "builtin:dicut", "rho"]);
    assert!((field(&stdout(&o), "rho").parse::<f64>().unwrap() - 0.25).abs() < 1e-4);
}

#[test]
fn polarize_prints_trace_and_chain_output() {
    let o = cspsketch(&["--family", "builtin:dicut", "polarize", "--dist", "uniform"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("# step loop=0 depth=0 i=2 j=1 u=(2,1) v=(1,2) eps=0.25"), "{out}");
    assert!(out.contains("p dicut 1 1 0.5") && out.contains("p dicut 2 2 0.5"), "{out}");
}

#[test]
fn decompose_padded_matched_pair() {
    let dir = TempDir::new().unwrap();
    let dy = p(&dir, "dy.txt");
    let dn = p(&dir, "dn.txt");
    fs::write(&dy, "family=builtin:maxcut\np neq 1 2 0.5\np neq 2 1 0.5\n").unwrap();
    fs::write(&dn, "family=builtin:maxcut\np neq 1 1 0.5\np neq 2 2 0.5\n").unwrap();
    let o = cspsketch(&["--family", "builtin:maxcut", "decompose-padded", "--dist-y", &dy, "--dist-n", &dn]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("# tau="));
    assert!(out.contains("# d0") && out.contains("# dy_prime") && out.contains("# dn_prime"));
}

#[test]
fn exactcheck_reports_constant_and_count() {
    let dir = TempDir::new().unwrap();
    let fam = p(&dir, "fam.txt");
    fs::write(&fam, "q=2 k=2\nf or 0 1 1 1\n").unwrap();
    let inst = p(&dir, "inst.txt");
    fs::write(&inst, "n=3\nc or 1 2 1\nc or 2 3 0.5\n").unwrap();
    let o = cspsketch(&["--family", &fam, "exactcheck", "--instance", &inst]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(field(&out, "constant_satisfiable"), "2");
    assert_eq!(field(&out, "count_value").parse::<f64>().unwrap(), 1.0);
    let o = cspsketch(&["--family", "builtin:maxcut", "exactcheck"]);
    assert_eq!(field(&stdout(&o), "constant_satisfiable"), "none");
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(cspsketch(&["bogus"]).status.code(), Some(2));
    assert_eq!(cspsketch(&["rho"]).status.code(), Some(2));
    assert_eq!(cspsketch(&["--family", "builtin:dicut", "--tol", "-1", "rho"]).status.code(), Some(2));
    assert_eq!(cspsketch(&["--family", "builtin:nope", "rho"]).status.code(), Some(2));
    assert_eq!(cspsketch(&["--family", "builtin:dicut", "curve", "--grid", "1:0:2"]).status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_three() {
    let o = cspsketch(&["--family", "/nonexistent/family.txt", "rho"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).starts_with("error:"));
    let o = cspsketch(&["--family", "builtin:maxcut", "separate", "--gamma", "1", "--beta", "0.6"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn json_meta_and_tolerance_env() {
    let dir = TempDir::new().unwrap();
    let meta = p(&dir, "meta.json");
    let o = Command::new(env!("CARGO_BIN_EXE_cspsketch"))
        .args(["--family", "builtin:dicut", "--json-meta", &meta, "classify", "--gamma", "0.6", "--beta", "0.2"])
        .env("CSPSKETCH_TOL", "0.001")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(field(&stdout(&o), "delta"), "0.001");
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&meta).unwrap()).unwrap();
    assert_eq!(v["effective_tol"], 0.001);
    assert_eq!(v["config"]["family"], "builtin:dicut");
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let args = ["--family", "builtin:qug:3", "--seed", "7", "alpha", "--step", "0.1"];
    let a = cspsketch(&args);
    let b = cspsketch(&args);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    assert!((field(&stdout(&a), "alpha").parse::<f64>().unwrap() - 1.0 / 3.0).abs() < 5e-3);
}
