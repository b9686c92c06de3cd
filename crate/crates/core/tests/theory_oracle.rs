//! Bound evaluators against values frozen from an independent 50-digit
//! evaluation.

use serde_json::Value;
use stcs_core::riplab::{c0, f_value, q_for, theory_bounds, TheoryParams};

const REL: f64 = 1e-12;

fn close(label: &str, got: f64, want: f64) {
    let err = (got - want).abs() / want.abs().max(f64::MIN_POSITIVE);
    assert!(err <= REL, "{label}: got {got:e}, want {want:e}, rel {err:e}");
}

fn grid() -> Vec<Value> {
    serde_json::from_str::<Value>(stcs_oracles::THEORY_GRID_JSON).unwrap().as_array().unwrap().clone()
}

#[test]
fn exact_constants() {
    assert_eq!(q_for(1), 16);
    assert_eq!(c0(0.3), 0.0050625);
}

#[test]
fn grid_matches_high_precision_oracle() {
    let rows = grid();
    assert_eq!(rows.len(), 20);
    for r in rows {
        let get = |key: &str| r[key].as_f64().unwrap();
        let (n, m, k) = (r["n"].as_u64().unwrap() as usize, r["m"].as_u64().unwrap() as usize, r["k"].as_u64().unwrap() as usize);
        let delta = get("delta");
        let tag = format!("n={n} m={m} k={k} delta={delta}");
        let b = theory_bounds(TheoryParams::new(n, m, k, delta)).unwrap();
        assert_eq!(b.q as u64, r["q"].as_u64().unwrap(), "{tag}");
        close(&format!("{tag} c0"), b.c0, get("c0"));
        close(&format!("{tag} f"), f_value(k, m, delta), get("f"));
        close(&format!("{tag} f"), b.f_value, get("f"));
        close(&format!("{tag} f_block"), b.f_block, get("f_block"));
        close(&format!("{tag} lemma exponent"), b.lemma.exponent, get("lemma_exponent"));
        close(&format!("{tag} lemma"), b.lemma.raw, get("lemma_raw"));
        close(&format!("{tag} union exponent"), b.union.exponent, get("union_exponent"));
        close(&format!("{tag} union"), b.union.raw, get("union_raw"));
        close(&format!("{tag} simplified exponent"), b.simplified.exponent, get("simplified_exponent"));
        close(&format!("{tag} simplified"), b.simplified.raw, get("simplified_raw"));
        close(&format!("{tag} c3"), b.c3, get("c3"));
        close(&format!("{tag} c1_min"), b.c1_min, get("c1_min"));
        close(&format!("{tag} threshold"), b.k_threshold, get("k_threshold"));
        assert_eq!(b.lemma.vacuous, get("lemma_raw") <= 0.0, "{tag}");
        assert_eq!(b.union.vacuous, get("union_raw") <= 0.0, "{tag}");
    }
}
