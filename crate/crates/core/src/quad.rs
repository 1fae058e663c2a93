//! Adaptive Gauss–Kronrod (7, 15) quadrature.

use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_INTERVALS: usize = 200_000;

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// `int_a^b f` to absolute tolerance `tol`. Globally adaptive: the
/// interval with the largest error estimate is bisected until the summed
/// estimate meets `tol` or the roundoff floor of the result.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (v, e) = gk15(&f, a, b);
    let mut heap = BinaryHeap::from([Piece {
        err: e,
        a,
        b,
        value: v,
    }]);
    let (mut value, mut err) = (v, e);
    while err > tol.max(50.0 * f64::EPSILON * value.abs()) {
        if heap.len() >= MAX_INTERVALS {
            return Err(Error::NoConvergence("adaptive quadrature"));
        }
        let p = heap.pop().expect("non-empty");
        let m = 0.5 * (p.a + p.b);
        if m <= p.a.min(p.b) || m >= p.a.max(p.b) {
            return Err(Error::NoConvergence(
                "adaptive quadrature: interval underflow",
            ));
        }
        let (l, el) = gk15(&f, p.a, m);
        let (r, er) = gk15(&f, m, p.b);
        value += l + r - p.value;
        err += el + er - p.err;
        heap.push(Piece {
            err: el,
            a: p.a,
            b: m,
            value: l,
        });
        heap.push(Piece {
            err: er,
            a: m,
            b: p.b,
            value: r,
        });
    }
    let mut parts: Vec<f64> = heap.into_iter().map(|p| p.value).collect();
    parts.sort_by(|x, y| x.abs().total_cmp(&y.abs()));
    Ok(parts.iter().sum())
}

struct Piece {
    err: f64,
    a: f64,
    b: f64,
    value: f64,
}

impl PartialEq for Piece {
    fn eq(&self, o: &Self) -> bool {
        self.err.total_cmp(&o.err).is_eq()
    }
}

impl Eq for Piece {}

impl PartialOrd for Piece {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Piece {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&o.err)
    }
}

/// `int_a^b f` split into `pieces` equal panels, each integrated adaptively.
/// Suited to long oscillatory ranges.
pub fn integrate_panels<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    pieces: usize,
    tol: f64,
) -> Result<f64> {
    let pieces = pieces.max(1);
    let h = (b - a) / pieces as f64;
    let each = tol / pieces as f64;
    (0..pieces).try_fold(0.0, |acc, i| {
        let lo = a + i as f64 * h;
        let hi = if i + 1 == pieces { b } else { lo + h };
        Ok(acc + integrate(&f, lo, hi, each)?)
    })
}
