//! Integer-order Bessel functions of the first kind and their running
//! integrals.
//!
//! Small arguments use the power series. Otherwise the whole sequence
//! `J_0 ..= J_m` comes from Miller's backward recurrence, normalised with
//! `J_0 + 2 sum_k J_2k = 1`. The running integrals use
//!
//! ```text
//! int_0^x J_n        = 2 sum_{k>=0} J_{n+2k+1}(x)
//! int_0^x int_0^y J_n = 4 sum_{k>=0} (k+1) J_{n+2k+2}(x)
//! ```
//!
//! both of which follow from `2 J_n' = J_{n-1} - J_{n+1}` by telescoping.

use crate::error::{Error, Result};

pub const MAX_ORDER: u32 = 64;
pub const MAX_ARG: f64 = 1e5;

/// Below this argument the power series is used.
const SERIES_LIMIT: f64 = 2.0;
const RESCALE_AT: f64 = 1e250;

/// `J_n(x)` for `0 <= n <= 64`, `0 <= x <= 1e5`.
pub fn bessel_j(n: u32, x: f64) -> Result<f64> {
    if n > MAX_ORDER {
        return Err(Error::OutOfDomain {
            what: "Bessel order n",
            value: n as f64,
            domain: "[0, 64]",
        });
    }
    if !(0.0..=MAX_ARG).contains(&x) {
        return Err(Error::OutOfDomain {
            what: "Bessel argument x",
            value: x,
            domain: "[0, 1e5]",
        });
    }
    Ok(bessel_sequence(n as usize, x)[n as usize])
}

/// `J_0(x) ..= J_nmax(x)` for finite `x >= 0`, without the public bounds.
pub fn bessel_sequence(nmax: usize, x: f64) -> Vec<f64> {
    assert!(
        x.is_finite() && x >= 0.0,
        "bessel_sequence needs finite x >= 0, got {x}"
    );
    if x == 0.0 {
        let mut out = vec![0.0; nmax + 1];
        out[0] = 1.0;
        return out;
    }
    if x <= SERIES_LIMIT {
        return (0..=nmax).map(|n| series(n, x)).collect();
    }
    let mut out = miller(nmax, x);
    out.truncate(nmax + 1);
    out
}

/// Order beyond which `J_n(x)` is below ~1e-30 and can be dropped from
/// sums over orders.
pub fn negligible_order(x: f64) -> usize {
    (x + 20.0 * x.cbrt() + 40.0).ceil() as usize
}

/// Values and running integrals of `J_n` at a common argument.
#[derive(Debug, Clone, PartialEq)]
pub struct BesselIntegrals {
    /// `J_n(x)`.
    pub value: Vec<f64>,
    /// `int_0^x J_n(t) dt`.
    pub first: Vec<f64>,
    /// `int_0^x dy int_0^y J_n(t) dt`.
    pub second: Vec<f64>,
}

/// `J_n`, its integral and its double integral for `n = 0 ..= nmax`.
pub fn bessel_integrals(nmax: usize, x: f64) -> BesselIntegrals {
    let top = nmax + negligible_order(x) + 4;
    let j = bessel_sequence(top, x);
    // Suffix sums over every other order.
    let mut s1 = vec![0.0; top + 3];
    let mut s2 = vec![0.0; top + 3];
    for k in (0..=top).rev() {
        s1[k] = j[k] + s1[k + 2];
        // s2[k] = sum_{m>=0} (m+1) J_{k+2m}
        s2[k] = s1[k] + s2[k + 2];
    }
    let first = (0..=nmax).map(|n| 2.0 * s1[n + 1]).collect();
    let second = (0..=nmax).map(|n| 4.0 * s2[n + 2]).collect();
    BesselIntegrals {
        value: j[..=nmax].to_vec(),
        first,
        second,
    }
}

fn series(n: usize, x: f64) -> f64 {
    let h = 0.5 * x;
    let mut lead = 1.0;
    for i in 1..=n {
        lead *= h / i as f64;
    }
    if lead == 0.0 {
        return 0.0;
    }
    let q = -h * h;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= q / (k as f64 * (n + k) as f64);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    lead * sum
}

fn start_order(nmax: usize, x: f64) -> usize {
    let top = (nmax as f64).max(x);
    let m = (top + (160.0 * top).sqrt() + 20.0).ceil() as usize;
    m + (m & 1)
}

/// Backward recurrence from an even start order `m`; returns `J_0 ..= J_m`.
fn miller(nmax: usize, x: f64) -> Vec<f64> {
    let m = start_order(nmax, x);
    let mut j = vec![0.0; m + 2];
    j[m] = 1e-300;
    for k in (1..=m).rev() {
        // 2k/x rounded once per order; a shared 1/x would shift the argument
        // coherently across the whole recurrence.
        let next = (2 * k) as f64 / x * j[k] - j[k + 1];
        j[k - 1] = next;
        if next.abs() > RESCALE_AT {
            let s = 1.0 / RESCALE_AT;
            for v in &mut j[k - 1..=m] {
                *v *= s;
            }
        }
    }
    let (mut sum, mut comp) = (j[0], 0.0);
    for v in j[2..=m].iter().step_by(2) {
        let t = sum + 2.0 * v;
        comp += if sum.abs() >= (2.0 * v).abs() {
            (sum - t) + 2.0 * v
        } else {
            (2.0 * v - t) + sum
        };
        sum = t;
    }
    let inv = 1.0 / (sum + comp);
    j.truncate(m + 1);
    j.iter_mut().for_each(|v| *v *= inv);
    j
}
