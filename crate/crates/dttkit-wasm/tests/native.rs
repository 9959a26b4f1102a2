//! The demo's operations, exercised natively through their plain-Rust twins.

use dttkit_wasm::{apply_impl, cost_table_impl, plan_tree_impl, DEMO_MAX_N};

#[test]
fn plan_tree_shows_skew_children() {
    let tree = plan_tree_impl("dct3", 8, "", "radix2").unwrap();
    assert!(tree.starts_with("DCT-3_8"), "{tree}");
    assert!(tree.contains("DCT-3_4(1/4)") && tree.contains("DCT-3_4(3/4)"));

    let skew = plan_tree_impl("dct3", 4, "1/3", "min-cost").unwrap();
    assert!(skew.starts_with("DCT-3_4(1/3)"), "{skew}");
}

#[test]
fn cost_table_reproduces_closed_forms() {
    let table = cost_table_impl("dct3", "2 4 8 16", "", "min-cost").unwrap();
    let totals: Vec<&str> = table
        .lines()
        .skip(1)
        .map(|l| l.split_whitespace().nth_back(2).unwrap())
        .collect();
    assert_eq!(totals, ["3", "13", "41", "113"]);
    let deltas: Vec<&str> = table
        .lines()
        .skip(1)
        .map(|l| l.split_whitespace().last().unwrap())
        .collect();
    assert!(deltas.iter().all(|d| *d == "+0"), "{table}");
}

#[test]
fn apply_matches_definition() {
    let a = apply_impl("dct2", "", "min-cost", &[1.0, 1.0]).unwrap();
    assert_eq!(a.output, vec![2.0, 0.0]);
    let x: Vec<f64> = (0..32).map(|i| (i as f64).cos()).collect();
    let b = apply_impl("dst4", "", "radix2", &x).unwrap();
    assert!(b.max_deviation < 1e-12, "{}", b.max_deviation);
}

#[test]
fn bad_input_is_reported() {
    assert!(plan_tree_impl("dct9", 4, "", "min-cost").is_err());
    assert!(plan_tree_impl("dct3", DEMO_MAX_N + 1, "", "min-cost").is_err());
    assert!(plan_tree_impl("dct3", 4, "x", "min-cost").is_err());
    assert!(plan_tree_impl("dct3", 4, "", "fastest").is_err());
    assert!(plan_tree_impl("dft", 4, "", "min-cost").is_err());
    assert!(cost_table_impl("dct3", "", "", "min-cost").is_err());
    assert!(apply_impl("dct2", "", "min-cost", &[]).is_err());
}
