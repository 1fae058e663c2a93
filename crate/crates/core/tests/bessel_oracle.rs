//! `bessel_j` against a 40-digit mpmath table.

use gaqed_core::special::{bessel_integrals, bessel_j};

const REL_TOL: f64 = 1e-12;

fn reference() -> Vec<(u32, f64, f64)> {
    include_str!("data/bessel_j_reference.csv")
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("n,"))
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (
                f[0].parse().unwrap(),
                f[1].parse().unwrap(),
                f[2].parse().unwrap(),
            )
        })
        .collect()
}

#[test]
fn table_relative_error() {
    let table = reference();
    assert!(table.len() > 700);
    let mut worst = (0.0, 0, 0.0);
    for (n, x, r) in table {
        let rel = (bessel_j(n, x).unwrap() - r).abs() / r.abs();
        if rel > worst.0 {
            worst = (rel, n, x);
        }
    }
    assert!(
        worst.0 <= REL_TOL,
        "worst relative error {:e} at n={} x={}",
        worst.0,
        worst.1,
        worst.2
    );
}

#[test]
fn sequence_agrees_with_single_orders() {
    for (n, x, r) in reference().into_iter().filter(|t| t.1 <= 400.0) {
        let v = bessel_integrals(n as usize, x).value[n as usize];
        assert!((v - r).abs() <= REL_TOL * r.abs(), "n={n} x={x}");
    }
}
