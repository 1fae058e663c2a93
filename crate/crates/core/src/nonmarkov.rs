//! Weisskopf–Wigner amplitude dynamics with Bessel memory kernels.
//!
//! With `U_m(tau) = i^|m| J_|m|(2 xi tau)` the kernels are
//!
//! ```text
//! G(tau)   = U_0 + U_N              (giant atom)
//! F_j(tau) = U_j + U_{j-N}          (photon on site j)
//! Q(tau)   = U_M + U_{N-M}          (giant/small cross kernel)
//! ```
//!
//! and the amplitudes are
//!
//! ```text
//! alpha(t)  = exp(-D(t)),  D(t) = 2 g^2 int_0^t dt1 int_0^t1 G(tau) dtau
//! beta_j(t) = -i g int_0^t dtau alpha(t - tau) F_j(tau)
//! ```
//!
//! `D` carries a plus sign so that `|alpha|` decays for the constructive
//! `N = 4` kernel; the exact evolution confirms this choice.

use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{self, Tolerance};
use crate::params::SystemParams;
use crate::special::{bessel_integrals, bessel_sequence};
use crate::timeseries::TimeSeries;
use crate::{i_pow, C64};

/// Largest grid step, in units of `1/xi`.
pub const MAX_STEP: f64 = 0.02;
/// Agreement required between the cumulative-quadrature and closed-form `D`.
pub const D_CROSS_CHECK: f64 = 1e-8;

/// Checks `t_grid` is uniform from `0` with step `<= 0.02 / xi` and returns
/// the step (`0` for grids of fewer than two points).
pub fn check_uniform(t_grid: &[f64], xi: f64) -> Result<f64> {
    let Some(&t0) = t_grid.first() else {
        return Ok(0.0);
    };
    if t0 != 0.0 {
        return Err(Error::BadGrid(
            "memory-kernel grids must start at t = 0".into(),
        ));
    }
    if t_grid.len() < 2 {
        return Ok(0.0);
    }
    let h = (t_grid[t_grid.len() - 1] - t0) / (t_grid.len() - 1) as f64;
    if h <= 0.0 || !h.is_finite() {
        return Err(Error::BadGrid("times must be strictly ascending".into()));
    }
    for (i, &t) in t_grid.iter().enumerate() {
        if (t - i as f64 * h).abs() > 1e-9 * h.max(t) {
            return Err(Error::BadGrid(format!("grid is not uniform at index {i}")));
        }
    }
    let limit = MAX_STEP / xi;
    if h > limit * (1.0 + 1e-12) {
        return Err(Error::GridTooCoarse { step: h, limit });
    }
    Ok(h)
}

/// `J_0 ..= J_nmax` at `2 xi t` for every grid time.
#[derive(Debug, Clone)]
pub struct KernelTable {
    pub times: Vec<f64>,
    separation: i64,
    small_site: Option<i64>,
    nmax: usize,
    /// `values[i][n] = J_n(2 xi t_i)`.
    values: Vec<Vec<f64>>,
}

impl KernelTable {
    /// Table covering `G`, `Q` (with a small atom) and `F_j` for `sites`.
    pub fn new(params: &SystemParams, t_grid: &[f64], sites: &[i64]) -> Self {
        let n = params.separation as i64;
        let mut nmax = n;
        for &j in sites {
            nmax = nmax.max(j.abs()).max((j - n).abs());
        }
        let values = t_grid
            .par_iter()
            .map(|&t| bessel_sequence(nmax as usize, 2.0 * params.xi * t))
            .collect();
        KernelTable {
            times: t_grid.to_vec(),
            separation: n,
            small_site: params.small_atom.map(|s| s.site as i64),
            nmax: nmax as usize,
            values,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `U_m(t_i) = i^|m| J_|m|(2 xi t_i)`.
    pub fn u(&self, m: i64, i: usize) -> C64 {
        let k = m.unsigned_abs() as usize;
        assert!(k <= self.nmax, "order {k} outside the kernel table");
        i_pow(k as i64) * self.values[i][k]
    }

    pub fn g(&self, i: usize) -> C64 {
        self.u(0, i) + self.u(self.separation, i)
    }

    pub fn f(&self, j: i64, i: usize) -> C64 {
        self.u(j, i) + self.u(j - self.separation, i)
    }

    pub fn q(&self, i: usize) -> Option<C64> {
        self.small_site
            .map(|m| self.u(m, i) + self.u(self.separation - m, i))
    }
}

/// `D(t)` in closed form from the double integrals of `J_0` and `J_N`.
pub fn d_closed(params: &SystemParams, t: f64) -> C64 {
    let n = params.separation;
    let s = 2.0 * params.xi;
    let b = bessel_integrals(n, s * t);
    let inner = C64::new(b.second[0], 0.0) + i_pow(n as i64) * b.second[n];
    inner * (2.0 * params.g * params.g / (s * s))
}

/// `D` on a uniform grid by cumulative quadrature: the inner integral of `G`
/// is exact, the outer integral uses the end-corrected trapezoid
/// `h/2 (g1_a + g1_b) + h^2/12 (G_a - G_b)` (`g1' = G`).
fn d_cumulative(params: &SystemParams, t_grid: &[f64], h: f64) -> Vec<C64> {
    let n = params.separation;
    let s = 2.0 * params.xi;
    let (g, g1): (Vec<C64>, Vec<C64>) = t_grid
        .par_iter()
        .map(|&t| {
            let b = bessel_integrals(n, s * t);
            let ip = i_pow(n as i64);
            (
                C64::new(b.value[0], 0.0) + ip * b.value[n],
                (C64::new(b.first[0], 0.0) + ip * b.first[n]) / s,
            )
        })
        .unzip();
    let mut d = Vec::with_capacity(t_grid.len());
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..t_grid.len() {
        if i > 0 {
            acc += (g1[i - 1] + g1[i]) * (0.5 * h) + (g[i - 1] - g[i]) * (h * h / 12.0);
        }
        d.push(acc * (2.0 * params.g * params.g));
    }
    d
}

/// Giant-atom amplitude `alpha = exp(-D)` with `D` in closed form, checked
/// against the cumulative quadrature. Columns `alpha_re`, `alpha_im`, `p_e`,
/// `d_re`, `d_im`.
pub fn alpha_single(params: &SystemParams, t_grid: &[f64]) -> Result<TimeSeries> {
    params.validate()?;
    let h = check_uniform(t_grid, params.xi)?;
    let quad = d_cumulative(params, t_grid, h);
    let d: Vec<C64> = t_grid.par_iter().map(|&t| d_closed(params, t)).collect();
    let worst = d
        .iter()
        .zip(&quad)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    if worst > D_CROSS_CHECK {
        return Err(Error::Disagreement {
            what: "D(t): cumulative quadrature vs closed form",
            diff: worst,
            tolerance: D_CROSS_CHECK,
        });
    }
    let alpha: Vec<C64> = d.iter().map(|v| (-v).exp()).collect();
    let mut ts = TimeSeries::new(t_grid.to_vec());
    ts.push_complex("alpha", &alpha)?;
    ts.push("p_e", alpha.iter().map(|a| a.norm_sqr()).collect())?;
    ts.push_complex("d", &d)?;
    Ok(ts)
}

/// Linear convolution `c_n = sum_{k<=n} a_{n-k} b_k` for `n < a.len()`.
fn convolve(a: &[C64], b: &[C64]) -> Vec<C64> {
    let n = a.len();
    if n == 0 {
        return Vec::new();
    }
    let size = (2 * n).next_power_of_two();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(size);
    let inv = planner.plan_fft_inverse(size);
    let mut x: Vec<C64> = a
        .iter()
        .copied()
        .chain(std::iter::repeat(C64::default()))
        .take(size)
        .collect();
    let mut y: Vec<C64> = b
        .iter()
        .copied()
        .chain(std::iter::repeat(C64::default()))
        .take(size)
        .collect();
    fwd.process(&mut x);
    fwd.process(&mut y);
    for (p, q) in x.iter_mut().zip(&y) {
        *p *= q;
    }
    inv.process(&mut x);
    x.truncate(n);
    let scale = 1.0 / size as f64;
    x.iter_mut().for_each(|v| *v *= scale);
    x
}

/// `int_0^{t_n} a(t_n - tau) f(tau) dtau` for every `n`, trapezoid with
/// third-order Gregory end corrections once four intervals are available.
fn memory_integral(a: &[C64], f: &[C64], h: f64) -> Vec<C64> {
    let raw = convolve(a, f);
    (0..a.len())
        .map(|n| {
            if n == 0 {
                return C64::default();
            }
            let p = |k: usize| a[n - k] * f[k];
            let mut v = (raw[n] - (p(0) + p(n)) * 0.5) * h;
            if n >= 4 {
                let ends = p(n) * 3.0 - p(n - 1) * 4.0 + p(n - 2) + p(0) * 3.0 - p(1) * 4.0 + p(2);
                v -= ends * (h / 24.0);
            }
            v
        })
        .collect()
}

/// Photon amplitudes `beta_j(t)` for each `j` in `sites`. Columns
/// `beta_<j>_re`, `beta_<j>_im` and `site_<j>` (`|beta_j|^2`).
pub fn beta_profile(params: &SystemParams, t_grid: &[f64], sites: &[i64]) -> Result<TimeSeries> {
    let alpha_ts = alpha_single(params, t_grid)?;
    let h = check_uniform(t_grid, params.xi)?;
    let alpha: Vec<C64> = alpha_ts
        .column("alpha_re")
        .expect("column")
        .iter()
        .zip(alpha_ts.column("alpha_im").expect("column"))
        .map(|(&r, &i)| C64::new(r, i))
        .collect();
    let table = KernelTable::new(params, t_grid, sites);
    let coupling = C64::new(0.0, -params.g);
    let betas: Vec<Vec<C64>> = sites
        .par_iter()
        .map(|&j| {
            let f: Vec<C64> = (0..table.len()).map(|i| table.f(j, i)).collect();
            memory_integral(&alpha, &f, h)
                .into_iter()
                .map(|v| v * coupling)
                .collect()
        })
        .collect();
    let mut ts = TimeSeries::new(t_grid.to_vec());
    for (j, b) in sites.iter().zip(&betas) {
        ts.push_complex(&format!("beta_{j}"), b)?;
    }
    for (j, b) in sites.iter().zip(&betas) {
        ts.push(
            format!("site_{j}"),
            b.iter().map(|v| v.norm_sqr()).collect(),
        )?;
    }
    Ok(ts)
}

/// Which atom holds the excitation at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MagicInitial {
    Giant,
    Small,
}

/// Coupled amplitudes of the giant and small atoms,
///
/// ```text
/// alpha_g' = M_gg alpha_g + M_gs alpha_s,   alpha_s' = M_gs alpha_g + M_ss alpha_s
/// M_gg = -2 g^2 int_0^t G,   M_ss = -g_s^2 int_0^t J_0(2 xi tau),   M_gs = -g g_s int_0^t Q
/// ```
///
/// Columns `alpha_g_re/_im`, `alpha_s_re/_im`, `p_g`, `p_s`.
pub fn magic_amplitudes(
    params: &SystemParams,
    t_grid: &[f64],
    initial: MagicInitial,
) -> Result<TimeSeries> {
    params.validate()?;
    let sa = params.small_atom_or_err("magic_amplitudes")?;
    if !params.is_resonant() {
        return Err(Error::NotResonant("magic_amplitudes"));
    }
    check_uniform(t_grid, params.xi)?;
    let (n, m) = (params.separation, sa.site);
    let (g, gs, s) = (params.g, sa.g_s, 2.0 * params.xi);
    let coefficients = move |t: f64| {
        let b = bessel_integrals(n, s * t);
        let int = |k: usize| i_pow(k as i64) * (b.first[k] / s);
        (
            -(int(0) + int(n)) * (2.0 * g * g),
            -int(0) * (gs * gs),
            -(int(m) + int(n - m)) * (g * gs),
        )
    };
    let rhs = |t: f64, y: &[C64], dy: &mut [C64]| {
        let (mgg, mss, mgs) = coefficients(t);
        dy[0] = mgg * y[0] + mgs * y[1];
        dy[1] = mgs * y[0] + mss * y[1];
    };
    let mut y = match initial {
        MagicInitial::Giant => [C64::new(1.0, 0.0), C64::default()],
        MagicInitial::Small => [C64::default(), C64::new(1.0, 0.0)],
    };
    let tol = Tolerance {
        rtol: 1e-11,
        atol: 1e-13,
    };
    let mut ag = Vec::with_capacity(t_grid.len());
    let mut asm = Vec::with_capacity(t_grid.len());
    let mut t = 0.0;
    for &tn in t_grid {
        ode::integrate(rhs, t, tn, &mut y, tol)?;
        t = tn;
        ag.push(y[0]);
        asm.push(y[1]);
    }
    let mut ts = TimeSeries::new(t_grid.to_vec());
    ts.push_complex("alpha_g", &ag)?;
    ts.push_complex("alpha_s", &asm)?;
    ts.push("p_g", ag.iter().map(|a| a.norm_sqr()).collect())?;
    ts.push("p_s", asm.iter().map(|a| a.norm_sqr()).collect())?;
    Ok(ts)
}
