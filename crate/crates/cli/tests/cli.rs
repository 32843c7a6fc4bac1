use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dilation_core::linalg::c64;
use dilation_core::sample;
use dilation_core::tuples::flip_pair;
use dilation_core::OperatorTuple;
use dilation_lab::TupleFile;
use serde_json::Value;
use tempfile::TempDir;

fn run(args: &[&str], env_seed: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_dilation-lab"));
    cmd.args(args).env_remove("DILATION_LAB_SEED");
    if let Some(s) = env_seed {
        cmd.env("DILATION_LAB_SEED", s);
    }
    cmd.output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write(dir: &TempDir, name: &str, t: &OperatorTuple) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, TupleFile::from_tuple(t).with_name(name).to_json()).unwrap();
    path
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn report_envelope_has_the_contract_fields() {
    let out = run(&["check", "prop6"], None);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(keys.len(), 6);
    for k in ["schema_version", "command", "config", "results", "warnings", "pass"] {
        assert!(keys.contains(&k), "missing {k}");
    }
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["config"]["degree"], 5);
    assert_eq!(v["config"]["tol"], 1e-10);
    assert_eq!(v["config"]["rank_tol"], 1e-9);
    assert_eq!(v["config"]["seed"], 0);
    assert_eq!(v["results"].as_array().unwrap().len(), 2);
    assert_eq!(v["pass"], true);
}

#[test]
fn env_seed_overrides_flag() {
    let a = run(&["check", "lemma10", "--seed", "3", "--trials", "20"], None);
    let b = run(&["check", "lemma10", "--seed", "9", "--trials", "20"], Some("3"));
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&b)["config"]["seed"], 3);
}

#[test]
fn malformed_env_seed_is_an_input_error() {
    let out = run(&["check", "prop6"], Some("seven"));
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("DILATION_LAB_SEED"));
}

#[test]
fn unknown_suite_is_an_input_error() {
    assert_eq!(code(&run(&["check", "nope"], None)), 2);
}

#[test]
fn failed_assertion_exits_one() {
    let out = run(&["check", "chain", "--tol", "1e-300"], None);
    assert_eq!(code(&out), 1);
    assert_eq!(json(&out)["pass"], false);
}

#[test]
fn bad_input_files_exit_two() {
    let dir = TempDir::new().unwrap();
    let truncated = dir.path().join("truncated.json");
    std::fs::write(&truncated, "{\"n\": 2,").unwrap();
    let extra = dir.path().join("extra.json");
    std::fs::write(&extra, r#"{"n":1,"dim":1,"matrices":[[[[0.5,0]]]],"colour":"red"}"#).unwrap();
    let shape = dir.path().join("shape.json");
    std::fs::write(&shape, r#"{"n":2,"dim":1,"matrices":[[[[0.5,0]]]]}"#).unwrap();
    let missing = dir.path().join("missing.json");
    for path in [&truncated, &extra, &shape, &missing] {
        let out = run(&["piece", "--input", p(path)], None);
        assert_eq!(code(&out), 2, "{}", path.display());
        assert!(out.stdout.is_empty());
    }
    assert_eq!(code(&run(&["piece"], None)), 2);
    assert_eq!(code(&run(&["check", "prop6", "--degree", "1"], None)), 2);
}

#[test]
fn pure_method_rejects_a_coisometry() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "flip.json", &flip_pair());
    let out = run(&["dilate", "--input", p(&f), "--method", "pure"], None);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("tail_bound"));
}

#[test]
fn schaeffer_dilation_of_flip_pair() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "flip.json", &flip_pair());
    let out = run(&["dilate", "--input", p(&f), "--degree", "4"], None);
    assert_eq!(code(&out), 0);
    let r = &json(&out)["results"][0];
    assert_eq!(r["method"], "schaeffer");
    assert_eq!(r["safe_degree"], 3);
    assert!(r["cuntz_window_residual"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn pure_and_symmetric_methods_on_a_commuting_contraction() {
    let dir = TempDir::new().unwrap();
    let mut rng = sample::rng(11);
    let t = sample::random_nilpotent_commuting(&mut rng, 2, 3, 0.2);
    let f = write(&dir, "nil.json", &t);
    for method in ["pure", "symmetric"] {
        let out = run(&["dilate", "--input", p(&f), "--method", method], None);
        assert_eq!(code(&out), 0, "{method}: {}", String::from_utf8_lossy(&out.stderr));
        let r = &json(&out)["results"][0];
        assert_eq!(r["pass"], true);
    }
    let out = run(&["dilate", "--input", p(&f), "--method", "pure"], None);
    assert!(json(&out)["results"][0]["symmetric_leakage"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn cuntz_state_needs_a_point() {
    let dir = TempDir::new().unwrap();
    let w = OperatorTuple::from_scalars(&[c64(0.6, 0.0), c64(0.0, 0.8)]).unwrap();
    let f = write(&dir, "w.json", &w);
    let out = run(&["dilate", "--input", p(&f), "--method", "cuntz-state"], None);
    assert_eq!(code(&out), 0);
    let flip = write(&dir, "flip.json", &flip_pair());
    assert_eq!(code(&run(&["dilate", "--input", p(&flip), "--method", "cuntz-state"], None)), 2);
}

#[test]
fn dump_is_written_or_refused() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "flip.json", &flip_pair());
    let dump = dir.path().join("dump.json");
    let out = run(
        &["dilate", "--input", p(&f), "--degree", "3", "--dump", p(&dump)],
        None,
    );
    assert_eq!(code(&out), 0);
    let file = TupleFile::read(&dump).unwrap();
    let dense = file.to_tuple().unwrap();
    assert_eq!(dense.n(), 2);
    assert_eq!(dense.dim(), json(&out)["results"][0]["ambient_dim"].as_u64().unwrap() as usize);

    let refused = dir.path().join("refused.json");
    let out = run(
        &["dilate", "--input", p(&f), "--dump", p(&refused), "--max-dump-entries", "100"],
        None,
    );
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("refusing"));
    assert!(!refused.exists());
}

#[test]
fn piece_output_embeds_a_tuple_file() {
    let dir = TempDir::new().unwrap();
    let mut rng = sample::rng(5);
    let c = sample::random_commuting(&mut rng, 2, 2, 0.3);
    let t = c.direct_sum(&flip_pair().scaled(0.5)).unwrap();
    let f = write(&dir, "mix.json", &t);
    let out = run(&["piece", "--input", p(&f)], None);
    assert_eq!(code(&out), 0);
    let r = &json(&out)["results"][0];
    assert_eq!(r["piece_dim"], 2);
    let piece: TupleFile = serde_json::from_value(r["piece"].clone()).unwrap();
    assert!(piece.to_tuple().unwrap().is_commuting(1e-9));
}

#[test]
fn classify_equivalence_verdicts() {
    let dir = TempDir::new().unwrap();
    let mut rng = sample::rng(21);
    let (z, points, _) = sample::random_spherical_unitary(&mut rng, 2, 3);
    let u = sample::haar_unitary(&mut rng, 3);
    let same = write(&dir, "a.json", &z);
    let conj = write(&dir, "b.json", &z.conjugate(&u).unwrap());
    let mut moved = points.clone();
    moved[0] = sample::random_sphere_point(&mut rng, 2);
    let other = write(&dir, "c.json", &sample::spherical_from_points(&moved, &u));

    let out = run(&["classify", "--input", p(&same), "--input", p(&conj)], None);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["results"][2]["verdict"], "equivalent");

    let out = run(&["classify", "--input", p(&same), "--input", p(&other)], None);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["results"][2]["verdict"], "inequivalent");
}

#[test]
fn classify_coisometry_without_spherical_part() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "flip.json", &flip_pair());
    let out = run(&["classify", "--input", p(&f), "--degree", "4"], None);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let r = &json(&out)["results"][0];
    assert_eq!(r["input_kind"], "coisometry");
    assert_eq!(r["spherical_part"], "none");

    let g = write(&dir, "half.json", &flip_pair().scaled(0.5));
    assert_eq!(code(&run(&["classify", "--input", p(&g)], None)), 2);
}

#[test]
fn markdown_and_output_file() {
    let dir = TempDir::new().unwrap();
    let target = dir.path().join("report.md");
    let out = run(&["check", "prop6", "--format", "markdown", "--output", p(&target)], None);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&target).unwrap();
    assert!(text.starts_with("# dilation-lab check prop6"));
    assert!(text.contains("| max principal angle |"));
}

#[test]
fn tuple_file_round_trip_through_disk_is_bit_exact() {
    let dir = TempDir::new().unwrap();
    let mut rng = sample::rng(8);
    let mut t = sample::random_tuple(&mut rng, 3, 4);
    let mut ms = t.clone().into_matrices();
    ms[0][(0, 0)] = c64(f64::MIN_POSITIVE / 8.0, -1e308);
    ms[1][(2, 3)] = c64(0.1 + 0.2, -0.0);
    t = OperatorTuple::new(ms).unwrap();
    let path = write(&dir, "t.json", &t);
    let back = TupleFile::read(&path).unwrap().to_tuple().unwrap();
    for (a, b) in t.matrices().iter().zip(back.matrices()) {
        for (x, y) in a.iter().zip(b.iter()) {
            assert_eq!(x.re.to_bits(), y.re.to_bits());
            assert_eq!(x.im.to_bits(), y.im.to_bits());
        }
    }
}
