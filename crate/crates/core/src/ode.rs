//! Dormand–Prince 5(4) integration of complex linear systems.

use crate::error::{Error, Result};
use crate::C64;

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rtol: 1e-11,
            atol: 1e-13,
        }
    }
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

const MAX_STEPS: usize = 1_000_000;

/// Advances `y' = f(t, y)` from `t0` to `t1` in place.
pub fn integrate<F>(f: F, t0: f64, t1: f64, y: &mut [C64], tol: Tolerance) -> Result<()>
where
    F: Fn(f64, &[C64], &mut [C64]),
{
    let span = t1 - t0;
    if span == 0.0 {
        return Ok(());
    }
    let n = y.len();
    let mut k = vec![vec![C64::new(0.0, 0.0); n]; 7];
    let mut tmp = vec![C64::new(0.0, 0.0); n];
    let mut y5 = vec![C64::new(0.0, 0.0); n];
    let mut t = t0;
    let mut h = span;
    f(t, y, &mut k[0]);
    for _ in 0..MAX_STEPS {
        if (t1 - t) * span.signum() <= 1e-15 * span.abs() {
            return Ok(());
        }
        if (t + h - t1) * span.signum() > 0.0 {
            h = t1 - t;
        }
        for s in 1..7 {
            for i in 0..n {
                let mut acc = y[i];
                for (r, kr) in k.iter().enumerate().take(s) {
                    acc += kr[i] * (h * A[s][r]);
                }
                tmp[i] = acc;
            }
            f(t + C[s] * h, &tmp, &mut k[s]);
        }
        let mut err = 0.0f64;
        for i in 0..n {
            let mut hi = y[i];
            let mut lo = y[i];
            for s in 0..7 {
                hi += k[s][i] * (h * B5[s]);
                lo += k[s][i] * (h * B4[s]);
            }
            y5[i] = hi;
            let scale = tol.atol + tol.rtol * y[i].norm().max(hi.norm());
            err = err.max((hi - lo).norm() / scale);
        }
        if err <= 1.0 {
            t += h;
            y.copy_from_slice(&y5);
            // FSAL: the last stage is f at the new point.
            k.swap(0, 6);
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
        if h.abs() < 1e-14 * span.abs() {
            return Err(Error::NoConvergence("Dormand-Prince step size underflow"));
        }
    }
    Err(Error::NoConvergence("Dormand-Prince step budget"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_level_rotation() {
        // y' = -i [[0, w], [w, 0]] y, y(0) = (1, 0) => (cos wt, -i sin wt).
        let w = 0.7;
        let mut y = vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        let f = |_t: f64, y: &[C64], dy: &mut [C64]| {
            dy[0] = C64::new(0.0, -w) * y[1];
            dy[1] = C64::new(0.0, -w) * y[0];
        };
        integrate(f, 0.0, 10.0, &mut y, Tolerance::default()).unwrap();
        assert!((y[0] - C64::new((7.0f64).cos(), 0.0)).norm() < 1e-9);
        assert!((y[1] - C64::new(0.0, -(7.0f64).sin())).norm() < 1e-9);
    }

    #[test]
    fn time_dependent_decay() {
        // y' = -t y  => y = exp(-t^2/2).
        let mut y = vec![C64::new(1.0, 0.0)];
        integrate(
            |t, y, dy| dy[0] = y[0] * -t,
            0.0,
            3.0,
            &mut y,
            Tolerance::default(),
        )
        .unwrap();
        assert!((y[0].re - (-4.5f64).exp()).abs() < 1e-11);
    }
}
