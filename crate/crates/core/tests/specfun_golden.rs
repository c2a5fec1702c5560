//! Checks the special-function kernel against the checked-in multiprecision
//! table (`tests/data/specfun_golden.txt`, regenerated by `gen_golden.py`).

use supercrit::specfun::{arg_gamma_continuous, digamma, ln_gamma_signed};

const GOLDEN: &str = include_str!("data/specfun_golden.txt");

struct Record {
    function: String,
    x: f64,
    y: f64,
    expected: f64,
}

fn records() -> Vec<Record> {
    GOLDEN
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|line| {
            let fields: Vec<&str> = line.split_whitespace().collect();
            assert_eq!(fields.len(), 4, "malformed golden line: {line}");
            Record {
                function: fields[0].to_string(),
                x: fields[1].parse().unwrap(),
                y: fields[2].parse().unwrap(),
                expected: fields[3].parse().unwrap(),
            }
        })
        .collect()
}

#[test]
fn golden_table_has_two_hundred_pinned_points() {
    let recs = records();
    let pinned = recs
        .iter()
        .filter(|r| matches!(r.function.as_str(), "lngamma" | "digamma" | "arggamma"))
        .count();
    assert_eq!(pinned, 200);
}

#[test]
fn ln_gamma_matches_golden_to_1e13_relative() {
    let mut worst: f64 = 0.0;
    for r in records().iter().filter(|r| r.function == "lngamma") {
        let got = ln_gamma_signed(r.x).unwrap().log_mag;
        let rel = if r.expected == 0.0 {
            got.abs()
        } else {
            ((got - r.expected) / r.expected).abs()
        };
        worst = worst.max(rel);
        assert!(rel < 1e-13, "ln|Γ({})| = {got}, expected {}", r.x, r.expected);
    }
    println!("ln_gamma worst relative error {worst:e}");
}

#[test]
fn gamma_sign_matches_golden() {
    for r in records().iter().filter(|r| r.function == "gammasign") {
        let got = ln_gamma_signed(r.x).unwrap().sign;
        assert_eq!(f64::from(got), r.expected, "sign Γ({})", r.x);
    }
}

#[test]
fn digamma_matches_golden_to_1e12_absolute() {
    let mut worst: f64 = 0.0;
    for r in records().iter().filter(|r| r.function == "digamma") {
        let got = digamma(r.x).unwrap();
        let err = (got - r.expected).abs();
        worst = worst.max(err);
        assert!(err < 1e-12, "ψ({}) = {got}, expected {}", r.x, r.expected);
    }
    println!("digamma worst absolute error {worst:e}");
}

#[test]
fn arg_gamma_matches_golden_to_1e11_absolute() {
    let mut worst: f64 = 0.0;
    for r in records().iter().filter(|r| r.function == "arggamma") {
        let got = arg_gamma_continuous(r.x, r.y).unwrap();
        let err = (got - r.expected).abs();
        worst = worst.max(err);
        assert!(
            err < 1e-11,
            "arg Γ({} + {}i) = {got}, expected {}",
            r.x,
            r.y,
            r.expected
        );
    }
    println!("arg_gamma worst absolute error {worst:e}");
}
