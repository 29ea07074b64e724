use std::path::PathBuf;
use std::process::{Command, Output};

use serde::Serialize;
use serde_json::Value;

use ovsa_core::amalg::SigmaProblem;
use ovsa_core::formulas::{OvsaAtom, QFFormula, QFTerm, Relation};
use ovsa_core::gallery::GALLERY;
use ovsa_core::{
    AmalgamationProblem, Element, HahnModel, HahnVector, Index, Model, OrderWithAction, Rational, SigmaPoly,
};

fn scratch(test: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(test);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn put(dir: &PathBuf, name: &str, value: &impl Serialize) -> String {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string(value).unwrap()).unwrap();
    path.to_str().unwrap().to_owned()
}

fn ovsa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ovsa"))
        .args(args)
        .env_remove("OVSA_SEED")
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}\n{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
    })
}

fn e(i: i64) -> HahnVector {
    HahnVector::basis(Index::Int(i))
}

fn q(n: i64) -> Rational {
    Rational::from_int(n)
}

#[test]
fn classify_examples() {
    let dir = scratch("classify");
    let out = ovsa(&["classify", "--poly", &put(&dir, "inc.json", &SigmaPoly::from_ints(&[1, 1]))]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["class"]["class"], "abs_increasing");

    let out = ovsa(&["classify", "--poly", &put(&dir, "fix.json", &SigmaPoly::from_ints(&[-1, 1]))]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["class"]["class"], "not_abs_monotone");
    assert_eq!(r["witness"]["root"], "1/1");

    // x² − x + 1 = (x − 1/2)² + 3/4 has no real root
    let out = ovsa(&["classify", "--poly", &put(&dir, "q.json", &SigmaPoly::from_ints(&[1, -1, 1]))]);
    assert_eq!(json(&out)["class"]["class"], "abs_increasing");

    // σ² − 2 has only the irrational positive root √2
    let out = ovsa(&["classify", "--poly", &put(&dir, "irr.json", &SigmaPoly::from_ints(&[-2, 0, 1]))]);
    let r = json(&out);
    assert_eq!(r["witness"], Value::Null);
    assert!(r["note"].is_string());
}

#[test]
fn solve_alternating_residual() {
    let dir = scratch("solve");
    let f = put(&dir, "f.json", &SigmaPoly::from_ints(&[1, 1]));
    let d = put(&dir, "d.json", &e(0));
    let out = ovsa(&["solve", "--poly", &f, "--rhs", &d, "--cap", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["outcome"], "residual");
    assert_eq!(r["steps"], 10);
    assert_eq!(r["verified"], true);
    let partial: HahnVector = serde_json::from_value(r["partial"].clone()).unwrap();
    let want = HahnVector::from_terms((0..10).map(|i| (Index::Int(i), q(if i % 2 == 0 { 1 } else { -1 }))));
    assert_eq!(partial, want);
    let remainder: HahnVector = serde_json::from_value(r["remainder"].clone()).unwrap();
    assert_eq!(remainder, e(10));
}

#[test]
fn solve_finds_exact_solution() {
    let dir = scratch("solve-exact");
    // (2 + σ)(e₀ − e₁) = 2e₀ − e₁ − e₂
    let f = put(&dir, "f.json", &SigmaPoly::from_ints(&[2, 1]));
    let d = put(&dir, "d.json", &HahnVector::from_terms([(Index::Int(0), q(2)), (Index::Int(1), q(-1)), (Index::Int(2), q(-1))]));
    let r = json(&ovsa(&["solve", "--poly", &f, "--rhs", &d]));
    assert_eq!(r["outcome"], "solved");
    let x: HahnVector = serde_json::from_value(r["partial"].clone()).unwrap();
    assert_eq!(x, e(0).sub(&e(1)));
    assert_eq!(r["verified"], true);
}

#[test]
fn extend_degree1() {
    let dir = scratch("extend");
    let f = put(&dir, "f.json", &SigmaPoly::from_ints(&[1, -1]));
    let a = put(&dir, "a.json", &Element::Hahn(e(0)));
    let out = ovsa(&["extend", "--poly", &f, "--rhs", &a, "--pairs", "200", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&out);
    assert_eq!(r["equation_holds"], true);
    assert_eq!(r["laws"]["failed"], 0);
    let m: Model = serde_json::from_value(r["model"].clone()).unwrap();
    assert!(matches!(m, Model::Ext(_)));
}

#[test]
fn amalgamate_order_problem() {
    let dir = scratch("amalg");
    let prob = AmalgamationProblem {
        a: OrderWithAction::chain(Vec::<String>::new()),
        b: OrderWithAction::chain(["b"]),
        c: OrderWithAction::chain(["c"]),
    };
    let out = ovsa(&["amalgamate", "--problem", &put(&dir, "p.json", &prob)]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["amalgam"]["d"]["points"], serde_json::json!(["b", "c"]));
    assert_eq!(r["b_embeds"], true);
}

#[test]
fn amalgamate_sigma_problem() {
    let dir = scratch("amalg-sigma");
    let a = HahnModel::int_shift();
    let prob = SigmaProblem {
        a: a.clone(),
        b: Model::Hahn(a.clone()),
        b_prefix: vec![],
        b_elem: Element::Hahn(e(0)),
        c: a,
        c_prefix: vec![],
    };
    let p = put(&dir, "p.json", &prob);
    let out = ovsa(&["amalgamate", "--problem", &p, "--poly", &put(&dir, "f.json", &SigmaPoly::from_ints(&[1, 1]))]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&out)["stages"].as_array().unwrap().len(), 1);

    let out = ovsa(&["amalgamate", "--problem", &p, "--poly", &put(&dir, "g.json", &SigmaPoly::from_ints(&[-2, 0, 1]))]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(ovsa(&["amalgamate", "--problem", &p]).status.code(), Some(1));
}

fn lt_gt() -> (QFFormula<OvsaAtom>, QFFormula<OvsaAtom>) {
    let atom = |rel| QFFormula::atom(1, OvsaAtom::compare(QFTerm::var(0), rel, QFTerm::var(1)));
    (atom(Relation::Lt), atom(Relation::Gt))
}

fn scaled(cs: &[i64]) -> Vec<Vec<Element>> {
    cs.iter().map(|c| vec![Element::Hahn(e(0).scale(&q(*c)))]).collect()
}

#[test]
fn alt_and_ip_search() {
    let dir = scratch("formulas");
    let (phi, psi) = lt_gt();
    let (phi, psi) = (put(&dir, "phi.json", &phi), put(&dir, "psi.json", &psi));
    let seq = put(&dir, "seq.json", &scaled(&[-3, -1, 0, 2, 5]));
    let b = put(&dir, "b.json", &vec![Element::Hahn(e(0))]);
    let r = json(&ovsa(&["alt", "--phi", &phi, "--psi", &psi, "--seq", &seq, "--b", &b]));
    assert_eq!(r["alternation"], serde_json::json!({"kind": "count", "n": 1}));

    let a_pool = put(&dir, "a.json", &scaled(&[0, 2]));
    let b_pool = put(&dir, "bp.json", &scaled(&[-1, 1, 3]));
    let ip = |n: &str| json(&ovsa(&["ip-search", "--phi", &phi, "--psi", &psi, "--n", n, "--a-pool", &a_pool, "--b-pool", &b_pool]));
    assert_eq!(ip("1")["verdict"], "found");
    assert_eq!(ip("2")["verdict"], "not_found");
}

#[test]
fn every_gallery_entry_passes() {
    for name in GALLERY {
        let out = ovsa(&["gallery", name, "--seed", "7"]);
        assert_eq!(out.status.code(), Some(0), "{name}");
        assert!(json(&out)["claims"].as_array().unwrap().iter().all(|c| c["holds"] == true));
    }
    assert_eq!(ovsa(&["gallery", "nope"]).status.code(), Some(1));
}

#[test]
fn check_suites() {
    let out = ovsa(&["check", "solve-roundtrip"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["verified"], "300/300");
    let out = ovsa(&["check", "hahn", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(json(&out)["reports"][0]["cases"].as_u64().unwrap() > 0);
    assert_eq!(ovsa(&["check", "nope"]).status.code(), Some(1));
}

#[test]
fn seed_flag_env_and_out_agree() {
    let dir = scratch("seed");
    let flag = ovsa(&["check", "orders", "--seed", "11"]).stdout;
    let env = Command::new(env!("CARGO_BIN_EXE_ovsa"))
        .args(["check", "orders"])
        .env("OVSA_SEED", "11")
        .output()
        .unwrap()
        .stdout;
    assert_eq!(flag, env);
    let out = dir.join("r.json");
    let status = ovsa(&["check", "orders", "--seed", "11", "--out", out.to_str().unwrap()]).status;
    assert!(status.success());
    assert_eq!(std::fs::read(out).unwrap(), flag);
}

#[test]
fn malformed_input_is_a_schema_error() {
    let dir = scratch("schema");
    let bad = dir.join("bad.json");
    std::fs::write(&bad, r#"{"terms": [{"exp": 0, "coef": "1/0"}]}"#).unwrap();
    assert_eq!(ovsa(&["classify", "--poly", bad.to_str().unwrap()]).status.code(), Some(3));
    std::fs::write(&bad, "[1, 2").unwrap();
    assert_eq!(ovsa(&["classify", "--poly", bad.to_str().unwrap()]).status.code(), Some(3));
}
