use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::Arc;

use fmf_core::eigsys::{synthesize, SynthOptions};
use fmf_core::format::{self, EigensystemsDoc, FormalSumDoc, MatrixSetDoc, RestrictionDoc};
use fmf_core::heckemat::principal_prime;
use fmf_core::{ClassGroup, Field, Ideal};

fn fmf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fmf")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("fmf-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn class_numbers() {
    for (d, h) in [(1, 1), (5, 2), (23, 3)] {
        let o = fmf(&["classgroup", "--d", &d.to_string()]);
        assert_eq!(o.status.code(), Some(0));
        let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(v["h"], h);
        assert_eq!(v["schema"], 1);
    }
}

#[test]
fn p1_listing() {
    let o = fmf(&["p1", "--d", "5", "--level", "(6)"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["count"], v["psi"]);
    assert_eq!(v["count"], 96);
    assert_eq!(v["symbols"][0]["lift"], "[[1,0],[0,1]]");
}

#[test]
fn hecke_matrices_counts_and_round_trip() {
    let o = fmf(&["hecke-matrices", "--d", "1", "--level", "(3)", "--op", "Ta((1+w))"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: MatrixSetDoc = format::from_json(&stdout(&o)).unwrap();
    assert_eq!(doc.matrices.len(), 3);
    let f = Field::new(1).unwrap();
    let three = Ideal::from_int(f, 3).unwrap();
    let p = Ideal::principal(f.int(1, 1)).unwrap();
    let set = principal_prime(&p, &three).unwrap();
    assert_eq!(doc.data().unwrap(), format::MatrixSetData::of(&set));
    assert_eq!(format::to_json(&doc), stdout(&o));

    let o = fmf(&["hecke-matrices", "--d", "1", "--level", "(3)", "--op", "Ta((2))"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: MatrixSetDoc = format::from_json(&stdout(&o)).unwrap();
    assert_eq!(doc.matrices.len(), 7);
}

#[test]
fn usage_errors() {
    let o = fmf(&["hecke-matrices", "--d", "5", "--level", "(3)", "--op", "Ta((2,1+w))"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(fmf(&["classgroup", "--d", "5", "--frobnicate", "1"]).status.code(), Some(2));
    assert_eq!(fmf(&["classgroup", "--d", "4"]).status.code(), Some(2));
    assert_eq!(fmf(&["p1", "--d", "1", "--level", "(1+"]).status.code(), Some(2));
    assert_eq!(fmf(&["verify", "--d", "1", "--level", "(1)"]).status.code(), Some(2));
    assert_eq!(fmf(&["verify", "--d", "1", "--level", "(6)", "--suite", "nope"]).status.code(), Some(2));
}

#[test]
fn apply_identity_and_level_change() {
    let o = fmf(&["apply", "--d", "5", "--level", "(6)", "--op", "Comp[]", "--point", "std0:1,0"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: FormalSumDoc = format::from_json(&stdout(&o)).unwrap();
    let v = doc.sum().unwrap();
    assert_eq!(v.len(), 1);
    let p = v.terms().next().unwrap().0.literal();
    let again = fmf(&["apply", "--d", "5", "--level", "(6)", "--op", "Comp[]", "--point", &p]);
    assert_eq!(stdout(&again), stdout(&o));

    let o = fmf(&["apply", "--d", "1", "--level", "(6)", "--op", "Ad((2),(3))", "--point", "std0:0,0"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: FormalSumDoc = format::from_json(&stdout(&o)).unwrap();
    assert_eq!(doc.level, "[2,0,2]");
    assert!(doc.sum().unwrap().all_valid());

    let w2 = fmf(&["apply", "--d", "1", "--level", "(6)", "--op", "Comp[Wq((2)),Wq((2))]", "--point", "std0:0,0"]);
    let t2 = fmf(&["apply", "--d", "1", "--level", "(6)", "--op", "Taa((2))", "--point", "std0:0,0"]);
    assert_eq!(stdout(&w2), stdout(&t2));
}

#[test]
fn apply_to_formal_sums() {
    let first = scratch("first.json");
    let path = first.to_str().unwrap();
    let base = ["apply", "--d", "1", "--level", "(3)"];
    let o = fmf(&[&base[..], &["--op", "Ta((2+w))", "--point", "std0:0,0", "--out", path]].concat());
    assert_eq!(o.status.code(), Some(0));
    let chained = fmf(&[&base[..], &["--op", "Ta((2-w))", "--in", path]].concat());
    let direct = fmf(&[&base[..], &["--op", "Comp[Ta((2-w)),Ta((2+w))]", "--point", "std0:0,0"]].concat());
    assert_eq!(chained.status.code(), Some(0));
    assert_eq!(stdout(&chained), stdout(&direct));

    let doc: FormalSumDoc = format::from_json(&std::fs::read_to_string(&first).unwrap()).unwrap();
    let literal = doc.sum().unwrap().literal();
    let from_literal = fmf(&[&base[..], &["--op", "Ta((2-w))", "--point", &literal]].concat());
    assert_eq!(stdout(&from_literal), stdout(&chained));

    let neither = fmf(&[&base[..], &["--op", "Ta((2-w))"]].concat());
    assert_eq!(neither.status.code(), Some(2));
    let wrong_level = fmf(&["apply", "--d", "1", "--level", "(6)", "--op", "Ta((2-w))", "--in", path]);
    assert_eq!(wrong_level.status.code(), Some(2));
}

#[test]
fn verify_gaussian_level_six() {
    let o = fmf(&["verify", "--d", "1", "--level", "(6)", "--suite", "relations"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["passed"], true);
}

fn write_restriction(name: &str, d: i64, seed: u64, force: bool) -> PathBuf {
    let cg = Arc::new(ClassGroup::new(Field::new(d).unwrap()));
    let n = Ideal::from_int(cg.field(), 3).unwrap();
    let lam = synthesize(seed, cg, n, 60, SynthOptions { force_inner_twist: force });
    let r = lam.restrict_to_principal().with_witnesses(lam.witnesses());
    let path = scratch(name);
    std::fs::write(&path, format::to_json(&RestrictionDoc::from_restriction(&r))).unwrap();
    path
}

fn recovered(path: &Path) -> (Option<i32>, usize, String) {
    let o = fmf(&["recover", "--in", path.to_str().unwrap()]);
    let n =
        if o.status.success() { format::from_json::<EigensystemsDoc>(&stdout(&o)).unwrap().systems.len() } else { 0 };
    (o.status.code(), n, String::from_utf8_lossy(&o.stderr).into_owned())
}

#[test]
fn recover_files() {
    assert_eq!(recovered(&write_restriction("h1.json", 1, 1, false)).1, 1);
    assert_eq!(recovered(&write_restriction("h2.json", 5, 1, false)).1, 2);
    assert_eq!(recovered(&write_restriction("h2-self.json", 5, 1, true)).1, 1);

    let path = write_restriction("bad.json", 5, 2, false);
    let mut doc: RestrictionDoc = format::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let v = doc.values.iter_mut().filter(|v| v.op.matches("T(").count() == 2).nth(3).unwrap();
    v.coeffs[0] = format!("{}1", v.coeffs[0]);
    std::fs::write(&path, format::to_json(&doc)).unwrap();
    let (code, _, err) = recovered(&path);
    assert_eq!(code, Some(1));
    assert!(err.contains("disagrees"), "{err}");
}

#[test]
fn recover_output_is_stable() {
    let path = write_restriction("stable.json", 5, 4, false);
    let out = scratch("stable-out.json");
    let o = fmf(&["recover", "--in", path.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    let doc: EigensystemsDoc = format::from_json(&text).unwrap();
    assert_eq!(format::to_json(&doc), text);
    let cg = Arc::new(ClassGroup::new(Field::new(5).unwrap()));
    let systems = doc.systems(cg).unwrap();
    assert!(systems.iter().all(|e| e.validate()));
    assert_eq!(fmf(&["recover", "--in", "/nonexistent/file.json"]).status.code(), Some(2));
}
