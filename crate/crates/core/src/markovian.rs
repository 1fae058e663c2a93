//! Markovian master equations for the giant atom and the magic-cavity pair.
//!
//! Rates (resonant case, `omega = omega_c`):
//!
//! ```text
//! A1 = g^2 (1 + i^N) / xi     A2 = g_s^2 / (2 xi)     B = g g_s (i^M + i^(N-M)) / (2 xi)
//! gamma_g = Re A1   delta_g = Im A1   gamma_s = A2   gamma_I = Re B   g_I = Im B
//! ```
//!
//! Density matrices are vectorised row-major, `vec(rho)[i d + j] = rho_ij`,
//! so `vec(A rho B) = (A (x) B^T) vec(rho)`. Two-atom basis index is
//! `2 a_g + a_s` with `a = 1` for the excited level.

use std::io::{self, Write};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::timeseries::{check_grid, fmt_num, TimeSeries};
use crate::{i_pow, C64};

/// Allowed `|Tr rho - 1|` over an evolution.
pub const TRACE_TOL: f64 = 1e-8;
/// Eigenvalues of `rho` below `-POSITIVITY_TOL` are reported.
pub const POSITIVITY_TOL: f64 = 1e-8;
/// Relative singular-value gap below which a steady state is non-unique.
pub const NULL_GAP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarkovRates {
    /// Single-giant-atom rate; equals `a1`.
    pub a: C64,
    pub a1: C64,
    /// Zero without a small atom.
    pub a2: f64,
    /// Zero without a small atom.
    pub b: C64,
    pub gamma_g: f64,
    pub gamma_s: f64,
    pub gamma_i: f64,
    pub delta_g: f64,
    pub g_i: f64,
}

pub fn compute_rates(params: &SystemParams) -> Result<MarkovRates> {
    params.validate()?;
    if !params.is_resonant() {
        return Err(Error::NotResonant("compute_rates"));
    }
    let (g, xi, n) = (params.g, params.xi, params.separation as i64);
    let a1 = (C64::new(1.0, 0.0) + i_pow(n)) * (g * g / xi);
    let (a2, b) = match params.small_atom {
        Some(sa) => {
            let m = sa.site as i64;
            (
                sa.g_s * sa.g_s / (2.0 * xi),
                (i_pow(m) + i_pow(n - m)) * (g * sa.g_s / (2.0 * xi)),
            )
        }
        None => (0.0, C64::new(0.0, 0.0)),
    };
    Ok(MarkovRates {
        a: a1,
        a1,
        a2,
        b,
        gamma_g: a1.re,
        gamma_s: a2,
        gamma_i: b.re,
        delta_g: a1.im,
        g_i: b.im,
    })
}

/// Density matrix of one (`dim = 2`) or two (`dim = 4`) atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomsDensityMatrix {
    pub entries: DMatrix<C64>,
}

impl AtomsDensityMatrix {
    pub fn new(entries: DMatrix<C64>) -> Result<Self> {
        let d = entries.nrows();
        if !entries.is_square() || !(d == 2 || d == 4) {
            return Err(Error::InvalidParam {
                field: "rho",
                reason: format!(
                    "expected a 2x2 or 4x4 matrix, got {}x{}",
                    d,
                    entries.ncols()
                ),
            });
        }
        Ok(AtomsDensityMatrix { entries })
    }

    pub fn from_pure(psi: &[C64]) -> Result<Self> {
        let v = DVector::from_column_slice(psi);
        let n = v.norm();
        Self::new(&v * v.adjoint() / C64::new(n * n, 0.0))
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// `|e><e|` for the single giant atom.
    pub fn single_excited() -> Self {
        Self::basis(2, 1)
    }

    /// `sigma_+ |g, g>`.
    pub fn giant_excited() -> Self {
        Self::basis(4, 2)
    }

    /// `tau_+ |g, g>`.
    pub fn small_excited() -> Self {
        Self::basis(4, 1)
    }

    fn basis(d: usize, k: usize) -> Self {
        let mut m = DMatrix::zeros(d, d);
        m[(k, k)] = C64::new(1.0, 0.0);
        AtomsDensityMatrix { entries: m }
    }

    pub fn trace(&self) -> C64 {
        self.entries.trace()
    }

    pub fn asymmetry(&self) -> f64 {
        (&self.entries - self.entries.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.entries + self.entries.adjoint()) * C64::new(0.5, 0.0);
        h.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// `<sigma_+ sigma_->`.
    pub fn population_g(&self) -> f64 {
        match self.dim() {
            2 => self.entries[(1, 1)].re,
            _ => self.entries[(2, 2)].re + self.entries[(3, 3)].re,
        }
    }

    /// `<tau_+ tau_->` (two atoms only).
    pub fn population_s(&self) -> f64 {
        self.entries[(1, 1)].re + self.entries[(3, 3)].re
    }

    /// `<sigma_+ tau_-> = Tr(rho sigma_+ tau_-)` (two atoms only).
    pub fn coherence_gs(&self) -> C64 {
        self.entries[(1, 2)]
    }

    pub fn vec(&self) -> DVector<C64> {
        let d = self.dim();
        DVector::from_fn(d * d, |k, _| self.entries[(k / d, k % d)])
    }

    pub fn from_vec(v: &DVector<C64>) -> Self {
        let d = (v.len() as f64).sqrt().round() as usize;
        AtomsDensityMatrix {
            entries: DMatrix::from_fn(d, d, |i, j| v[i * d + j]),
        }
    }

    /// Checks the Hermiticity, trace and positivity invariants.
    pub fn check(&self) -> Result<()> {
        let asym = self.asymmetry();
        if asym > 1e-10 {
            return Err(Error::Disagreement {
                what: "density matrix Hermiticity",
                diff: asym,
                tolerance: 1e-10,
            });
        }
        let tr = (self.trace() - C64::new(1.0, 0.0)).norm();
        if tr > TRACE_TOL {
            return Err(Error::Disagreement {
                what: "density matrix trace",
                diff: tr,
                tolerance: TRACE_TOL,
            });
        }
        let min = self.min_eigenvalue();
        if min < -POSITIVITY_TOL {
            return Err(Error::Disagreement {
                what: "density matrix positivity",
                diff: min,
                tolerance: POSITIVITY_TOL,
            });
        }
        Ok(())
    }
}

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn lowering() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)])
}

/// `sigma_-` and `tau_-` on the two-atom space.
fn two_atom_lowering() -> (DMatrix<C64>, DMatrix<C64>) {
    let s = lowering();
    let id = DMatrix::<C64>::identity(2, 2);
    (s.kronecker(&id), id.kronecker(&s))
}

fn left(a: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(&DMatrix::identity(a.nrows(), a.nrows()))
}

fn right(b: &DMatrix<C64>) -> DMatrix<C64> {
    DMatrix::identity(b.nrows(), b.nrows()).kronecker(&b.transpose())
}

fn sandwich(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(&b.transpose())
}

/// `D_[O1,O2] rho = 2 O2 rho O1 - rho O1 O2 - O1 O2 rho`.
fn dissipator(o1: &DMatrix<C64>, o2: &DMatrix<C64>) -> DMatrix<C64> {
    let p = o1 * o2;
    sandwich(o2, o1) * c(2.0) - right(&p) - left(&p)
}

/// `-i [H, .]`.
fn commutator(h: &DMatrix<C64>) -> DMatrix<C64> {
    (left(h) - right(h)) * C64::new(0.0, -1.0)
}

/// Single giant atom in the lab frame:
/// `-i Omega [|e><e|, rho] + (A + A*) s rho s+ - A s+ s rho - A* rho s+ s`.
pub fn liouvillian_single(params: &SystemParams) -> Result<DMatrix<C64>> {
    let r = compute_rates(params)?;
    let s = lowering();
    let sp = s.adjoint();
    let n = &sp * &s;
    Ok(
        commutator(&(n.clone() * c(params.omega))) + sandwich(&s, &sp) * c(2.0 * r.a.re)
            - left(&n) * r.a
            - right(&n) * r.a.conj(),
    )
}

/// Master-equation variant for the magic-cavity pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MasterForm {
    /// Dissipators `gamma_g D[s+,s-] + gamma_s D[t+,t-] + gamma_I (D[t+,s-] + D[s+,t-])`
    /// with `gamma_I = Re B` as defined.
    Literal,
    /// The rate form with complex `A1`, `A2`, `B` before regrouping.
    Appendix,
    /// `2 K rho K+ - {K+ K, rho}` with `K = sqrt(gamma_g) s- + sgn(gamma_I) sqrt(gamma_s) t-`;
    /// equal to `Literal` when `gamma_I^2 = gamma_g gamma_s`.
    SingleJump,
    /// `K = sqrt(gamma_g) s- + sqrt(gamma_s) t-` regardless of the sign of
    /// `gamma_I`.
    PaperJump,
}

impl MasterForm {
    pub const ALL: [MasterForm; 4] = [
        MasterForm::Literal,
        MasterForm::Appendix,
        MasterForm::SingleJump,
        MasterForm::PaperJump,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MasterForm::Literal => "literal",
            MasterForm::Appendix => "appendix",
            MasterForm::SingleJump => "single_jump",
            MasterForm::PaperJump => "paper_jump",
        }
    }
}

/// Drive detuning and amplitude (zero without a drive).
fn drive_of(params: &SystemParams) -> (f64, f64) {
    params.drive.map_or((0.0, 0.0), |d| (d.delta, d.eta))
}

/// Rotating-frame Hamiltonian
/// `(Delta + delta_g) s+ s- + Delta t+ t- + g_I (s+ t- + t+ s-) + eta (s+ + s-)`.
pub fn effective_hamiltonian(params: &SystemParams) -> Result<DMatrix<C64>> {
    params.small_atom_or_err("effective_hamiltonian")?;
    let r = compute_rates(params)?;
    let (delta, eta) = drive_of(params);
    let (sm, tm) = two_atom_lowering();
    let (sp, tp) = (sm.adjoint(), tm.adjoint());
    Ok(&sp * &sm * c(delta + r.delta_g)
        + &tp * &tm * c(delta)
        + (&sp * &tm + &tp * &sm) * c(r.g_i)
        + (&sp + &sm) * c(eta))
}

fn single_jump_rate_check(r: &MarkovRates) -> Result<()> {
    let diff = (r.gamma_i * r.gamma_i - r.gamma_g * r.gamma_s).abs();
    if diff > 1e-12 * (r.gamma_g * r.gamma_s).max(1e-300) || r.gamma_g * r.gamma_s == 0.0 {
        return Err(Error::Unsupported(format!(
            "single-jump form needs gamma_I^2 = gamma_g gamma_s > 0 (gamma_g = {}, gamma_s = {}, gamma_I = {})",
            r.gamma_g, r.gamma_s, r.gamma_i
        )));
    }
    Ok(())
}

/// Liouvillian of the magic-cavity pair on the 16-dimensional space.
pub fn liouvillian_magic(params: &SystemParams, form: MasterForm) -> Result<DMatrix<C64>> {
    params.small_atom_or_err("liouvillian_magic")?;
    let r = compute_rates(params)?;
    let (sm, tm) = two_atom_lowering();
    let (sp, tp) = (sm.adjoint(), tm.adjoint());
    let jump = |sign: f64| -> DMatrix<C64> {
        let k = &sm * c(r.gamma_g.sqrt()) + &tm * c(sign * r.gamma_s.sqrt());
        let kd = k.adjoint();
        let kk = &kd * &k;
        commutator(&effective_hamiltonian(params).expect("checked")) + sandwich(&k, &kd) * c(2.0)
            - left(&kk)
            - right(&kk)
    };
    Ok(match form {
        MasterForm::Literal => {
            commutator(&effective_hamiltonian(params)?)
                + dissipator(&sp, &sm) * c(r.gamma_g)
                + dissipator(&tp, &tm) * c(r.gamma_s)
                + (dissipator(&tp, &sm) + dissipator(&sp, &tm)) * c(r.gamma_i)
        }
        MasterForm::Appendix => {
            let (delta, eta) = drive_of(params);
            let h0 = (&sp * &sm + &tp * &tm) * c(delta) + (&sp + &sm) * c(eta);
            let ns = &sp * &sm;
            let cross = &tp * &sm + &sp * &tm;
            commutator(&h0) + sandwich(&sm, &sp) * c(2.0 * r.a1.re)
                - left(&ns) * r.a1
                - right(&ns) * r.a1.conj()
                + dissipator(&tp, &tm) * c(r.a2)
                + (sandwich(&sm, &tp) + sandwich(&tm, &sp)) * c(2.0 * r.b.re)
                - left(&cross) * r.b
                - right(&cross) * r.b.conj()
        }
        MasterForm::SingleJump => {
            single_jump_rate_check(&r)?;
            jump(r.gamma_i.signum())
        }
        MasterForm::PaperJump => {
            single_jump_rate_check(&r)?;
            jump(1.0)
        }
    })
}

/// Dense text form: a `rows cols` line, then one line per row of
/// space-separated `re,im` pairs.
pub fn write_liouvillian<W: Write>(l: &DMatrix<C64>, mut w: W) -> io::Result<()> {
    writeln!(w, "{} {}", l.nrows(), l.ncols())?;
    for i in 0..l.nrows() {
        let row: Vec<String> = (0..l.ncols())
            .map(|j| format!("{},{}", fmt_num(l[(i, j)].re), fmt_num(l[(i, j)].im)))
            .collect();
        writeln!(w, "{}", row.join(" "))?;
    }
    Ok(())
}

/// `rho(t)` on `t_grid` from `exp(L dt)`, reusing the propagator across
/// equal steps.
pub fn propagate(
    l: &DMatrix<C64>,
    rho0: &AtomsDensityMatrix,
    t_grid: &[f64],
) -> Result<Vec<AtomsDensityMatrix>> {
    check_grid(t_grid)?;
    let mut v = rho0.vec();
    let mut t = 0.0;
    let mut cache: Option<(f64, DMatrix<C64>)> = None;
    let mut out = Vec::with_capacity(t_grid.len());
    for &tn in t_grid {
        let dt = tn - t;
        if dt > 0.0 {
            let reuse = cache
                .as_ref()
                .is_some_and(|(h, _)| (h - dt).abs() <= 1e-13 * dt);
            if !reuse {
                cache = Some((dt, (l * c(dt)).exp()));
            }
            v = &cache.as_ref().expect("set").1 * v;
        }
        t = tn;
        out.push(AtomsDensityMatrix::from_vec(&v));
    }
    Ok(out)
}

fn trace_guard(states: &[AtomsDensityMatrix]) -> Result<f64> {
    let mut min_eig = f64::INFINITY;
    for s in states {
        let drift = (s.trace() - C64::new(1.0, 0.0)).norm();
        if drift > TRACE_TOL {
            return Err(Error::Disagreement {
                what: "trace preservation",
                diff: drift,
                tolerance: TRACE_TOL,
            });
        }
        min_eig = min_eig.min(s.min_eigenvalue());
    }
    Ok(min_eig)
}

/// Single giant atom: `p_e` from the Liouvillian propagator, `p_e_analytic`
/// (`rho_ee(0) e^{-2 Re A t}`), and the coherence `rho_eg` from both.
pub fn evolve_single_ga(
    params: &SystemParams,
    rho0: &AtomsDensityMatrix,
    t_grid: &[f64],
) -> Result<TimeSeries> {
    if rho0.dim() != 2 {
        return Err(Error::InvalidParam {
            field: "rho0",
            reason: "single giant atom needs a 2x2 density matrix".into(),
        });
    }
    rho0.check()?;
    let r = compute_rates(params)?;
    let states = propagate(&liouvillian_single(params)?, rho0, t_grid)?;
    trace_guard(&states)?;
    let ee0 = rho0.entries[(1, 1)].re;
    let eg0 = rho0.entries[(1, 0)];
    let mut ts = TimeSeries::new(t_grid.to_vec());
    ts.push("p_e", states.iter().map(|s| s.entries[(1, 1)].re).collect())?;
    ts.push(
        "p_e_analytic",
        t_grid
            .iter()
            .map(|&t| ee0 * (-2.0 * r.a.re * t).exp())
            .collect(),
    )?;
    let eg: Vec<C64> = states.iter().map(|s| s.entries[(1, 0)]).collect();
    ts.push_complex("rho_eg", &eg)?;
    let decay = C64::new(r.a.re, params.omega + r.a.im);
    let eg_exact: Vec<C64> = t_grid.iter().map(|&t| eg0 * (-decay * t).exp()).collect();
    ts.push_complex("rho_eg_analytic", &eg_exact)?;
    Ok(ts)
}

/// Magic-cavity pair: `p_g`, `p_s`, `coh_gs_re/_im` (`<s+ t->`) and
/// `min_eig`. Positivity loss beyond `-1e-8` is recorded as a warning.
pub fn evolve_magic(
    params: &SystemParams,
    rho0: &AtomsDensityMatrix,
    t_grid: &[f64],
    form: MasterForm,
) -> Result<TimeSeries> {
    params.small_atom_or_err("evolve_magic")?;
    if rho0.dim() != 4 {
        return Err(Error::InvalidParam {
            field: "rho0",
            reason: "magic cavity needs a 4x4 density matrix".into(),
        });
    }
    rho0.check()?;
    let states = propagate(&liouvillian_magic(params, form)?, rho0, t_grid)?;
    let min_eig = trace_guard(&states)?;
    let mut ts = TimeSeries::new(t_grid.to_vec());
    if min_eig < -POSITIVITY_TOL {
        ts.warnings.push(format!(
            "{} form lost positivity: min eigenvalue {min_eig:.3e}",
            form.name()
        ));
    }
    ts.push("p_g", states.iter().map(|s| s.population_g()).collect())?;
    ts.push("p_s", states.iter().map(|s| s.population_s()).collect())?;
    let coh: Vec<C64> = states.iter().map(|s| s.coherence_gs()).collect();
    ts.push_complex("coh_gs", &coh)?;
    ts.push(
        "min_eig",
        states.iter().map(|s| s.min_eigenvalue()).collect(),
    )?;
    Ok(ts)
}

#[derive(Debug, Clone)]
pub struct SteadyState {
    pub rho: AtomsDensityMatrix,
    /// Smallest singular value of `L` over the largest.
    pub residual: f64,
    /// Second-smallest singular value over the largest.
    pub gap: f64,
    pub unique: bool,
}

/// Null vector of `L`, normalised to unit trace and Hermitised.
pub fn steady_state(l: &DMatrix<C64>) -> Result<SteadyState> {
    let svd = l.clone().svd(false, true);
    let v_t = svd
        .v_t
        .as_ref()
        .ok_or(Error::NoConvergence("Liouvillian SVD"))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    let max = svd.singular_values.max();
    let null = v_t.row(order[0]).adjoint();
    let mut rho = AtomsDensityMatrix::from_vec(&null);
    let tr = rho.trace();
    rho.entries /= tr;
    rho.entries = (&rho.entries + rho.entries.adjoint()) * c(0.5);
    let gap = svd.singular_values[order[1]] / max;
    Ok(SteadyState {
        rho,
        residual: svd.singular_values[order[0]] / max,
        gap,
        unique: gap >= NULL_GAP,
    })
}

/// Steady populations against the drive detuning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RabiScan {
    pub delta: Vec<f64>,
    pub p_g: Vec<f64>,
    pub p_s: Vec<f64>,
    pub unique: Vec<bool>,
    pub warnings: Vec<String>,
}

impl RabiScan {
    /// `delta,p_g,p_s,unique`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "delta,p_g,p_s,unique")?;
        for i in 0..self.delta.len() {
            writeln!(
                w,
                "{},{},{},{}",
                fmt_num(self.delta[i]),
                fmt_num(self.p_g[i]),
                fmt_num(self.p_s[i]),
                u8::from(self.unique[i])
            )?;
        }
        Ok(())
    }
}

/// `delta_grid` points from `-half_width` to `half_width`.
pub fn detuning_grid(half_width: f64, points: usize) -> Vec<f64> {
    if points < 2 {
        return vec![0.0; points];
    }
    (0..points)
        .map(|i| -half_width + 2.0 * half_width * i as f64 / (points - 1) as f64)
        .collect()
}

pub fn rabi_scan(params: &SystemParams, delta_grid: &[f64], form: MasterForm) -> Result<RabiScan> {
    let drive = params.drive.ok_or(Error::MissingDrive("rabi_scan"))?;
    if drive.eta <= 0.0 {
        return Err(Error::InvalidParam {
            field: "eta",
            reason: "Rabi scan needs a drive amplitude eta > 0".into(),
        });
    }
    let rows: Vec<Result<SteadyState>> = delta_grid
        .par_iter()
        .map(|&d| {
            let p = params.clone().with_drive(drive.eta, d);
            steady_state(&liouvillian_magic(&p, form)?)
        })
        .collect();
    let mut scan = RabiScan {
        delta: delta_grid.to_vec(),
        p_g: vec![],
        p_s: vec![],
        unique: vec![],
        warnings: vec![],
    };
    for (d, r) in delta_grid.iter().zip(rows) {
        let s = r?;
        if !s.unique {
            scan.warnings.push(format!(
                "steady state at delta = {d} is not unique (gap {:.3e})",
                s.gap
            ));
        }
        scan.p_g.push(s.rho.population_g());
        scan.p_s.push(s.rho.population_s());
        scan.unique.push(s.unique);
    }
    Ok(scan)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DarkState {
    /// Amplitudes on `|e,g>` and `|g,e>`.
    pub c_g: f64,
    pub c_s: f64,
    /// Long-time `<t+ t->` from `tau_+ |g,g>`: `gamma_g^2 / (gamma_s + gamma_g)^2`.
    pub plateau: f64,
}

impl DarkState {
    /// Four-component state in the two-atom basis.
    pub fn vector(&self) -> [C64; 4] {
        [c(0.0), c(self.c_s), c(self.c_g), c(0.0)]
    }
}

/// Dark state of the single-jump form, `K |D> = 0` with
/// `K = sqrt(gamma_g) s- + sgn(gamma_I) sqrt(gamma_s) t-`.
pub fn dark_state(params: &SystemParams) -> Result<DarkState> {
    params.small_atom_or_err("dark_state")?;
    let r = compute_rates(params)?;
    single_jump_rate_check(&r)?;
    let total = r.gamma_g + r.gamma_s;
    let norm = total.sqrt();
    Ok(DarkState {
        c_g: r.gamma_s.sqrt() / norm,
        c_s: -r.gamma_i.signum() * r.gamma_g.sqrt() / norm,
        plateau: r.gamma_g * r.gamma_g / (total * total),
    })
}

/// Jump operator of [`MasterForm::SingleJump`].
pub fn single_jump_operator(params: &SystemParams) -> Result<DMatrix<C64>> {
    let r = compute_rates(params)?;
    single_jump_rate_check(&r)?;
    let (sm, tm) = two_atom_lowering();
    Ok(sm * c(r.gamma_g.sqrt()) + tm * c(r.gamma_i.signum() * r.gamma_s.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timeseries::uniform_grid;

    fn magic(n: usize, m: usize) -> SystemParams {
        SystemParams::resonant(n, 0.1).with_small_atom(0.1, m)
    }

    #[test]
    fn rate_closed_forms() {
        let r = compute_rates(&SystemParams::resonant(4, 0.1)).unwrap();
        assert_eq!(r.a, C64::new(2.0 * (0.1 * 0.1), 0.0));
        let r = compute_rates(&SystemParams::resonant(6, 0.1)).unwrap();
        assert_eq!(r.a, C64::new(0.0, 0.0));
        let r = compute_rates(&magic(6, 1)).unwrap();
        assert_eq!(r.gamma_i, 0.0);
        assert_eq!(r.g_i, 0.1 * 0.1);
        let r = compute_rates(&magic(4, 2)).unwrap();
        assert!((r.gamma_i + (r.gamma_g * r.gamma_s).sqrt()).abs() < 1e-16);
    }

    #[test]
    fn non_resonant_rejected() {
        let mut p = SystemParams::resonant(4, 0.1);
        p.omega = 0.3;
        assert!(matches!(compute_rates(&p), Err(Error::NotResonant(_))));
    }

    #[test]
    fn vectorisation_convention() {
        let a = DMatrix::from_fn(2, 2, |i, j| C64::new((i + 2 * j) as f64, 1.0 - i as f64));
        let b = DMatrix::from_fn(2, 2, |i, j| C64::new(1.0 + (i * j) as f64, j as f64));
        let rho = AtomsDensityMatrix {
            entries: DMatrix::from_fn(2, 2, |i, j| C64::new((3 * i + j) as f64, (i as f64) - 0.5)),
        };
        let direct = AtomsDensityMatrix {
            entries: &a * &rho.entries * &b,
        };
        let via = AtomsDensityMatrix::from_vec(&(sandwich(&a, &b) * rho.vec()));
        assert!((direct.entries - via.entries).norm() < 1e-13);
    }

    #[test]
    fn literal_matches_appendix_form() {
        for (n, m) in [(4, 1), (4, 2), (6, 1), (6, 2), (5, 2)] {
            let p = magic(n, m).with_drive(1e-3, 0.004);
            let l1 = liouvillian_magic(&p, MasterForm::Literal).unwrap();
            let l2 = liouvillian_magic(&p, MasterForm::Appendix).unwrap();
            assert!((l1 - l2).norm() < 1e-15, "N={n}, M={m}");
        }
    }

    #[test]
    fn single_jump_equals_literal_only_with_matching_sign() {
        let p = magic(4, 2);
        let lit = liouvillian_magic(&p, MasterForm::Literal).unwrap();
        let sj = liouvillian_magic(&p, MasterForm::SingleJump).unwrap();
        let pj = liouvillian_magic(&p, MasterForm::PaperJump).unwrap();
        assert!((&lit - &sj).norm() < 1e-15);
        assert!((&lit - &pj).norm() > 1e-3);
        assert!(matches!(
            liouvillian_magic(&magic(6, 1), MasterForm::SingleJump),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn single_ga_analytic_and_propagated() {
        for n in [4, 6, 3] {
            let p = SystemParams::resonant(n, 0.1);
            let psi = [c(0.6), C64::new(0.0, 0.8)];
            let ts = evolve_single_ga(
                &p,
                &AtomsDensityMatrix::from_pure(&psi).unwrap(),
                &uniform_grid(50.0, 0.5),
            )
            .unwrap();
            for (a, b) in ts
                .column("p_e")
                .unwrap()
                .iter()
                .zip(ts.column("p_e_analytic").unwrap())
            {
                assert!((a - b).abs() < 1e-10);
            }
            for part in ["re", "im"] {
                let a = ts.column(&format!("rho_eg_{part}")).unwrap();
                let b = ts.column(&format!("rho_eg_analytic_{part}")).unwrap();
                assert!(a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-10));
            }
        }
    }

    #[test]
    fn exchange_without_dissipation() {
        // N = 6, M = 1: gamma_g = gamma_I = 0, exchange at g_I damped by gamma_s.
        let p = magic(6, 1);
        let ts = evolve_magic(
            &p,
            &AtomsDensityMatrix::giant_excited(),
            &uniform_grid(200.0, 1.0),
            MasterForm::Literal,
        )
        .unwrap();
        let r = compute_rates(&p).unwrap();
        let pg = ts.column("p_g").unwrap();
        assert!((pg[0] - 1.0).abs() < 1e-15);
        let quarter = (std::f64::consts::FRAC_PI_2 / r.g_i).round() as usize;
        assert!(pg[quarter] < 0.05);
        assert!(ts.warnings.is_empty());
    }

    #[test]
    fn dark_state_is_annihilated() {
        let p = magic(4, 2);
        let d = dark_state(&p).unwrap();
        let k = single_jump_operator(&p).unwrap();
        let v = DVector::from_column_slice(&d.vector());
        assert!((k * v).norm() < 1e-12);
        assert!((d.plateau - 0.64).abs() < 1e-14);
        let sym = SystemParams::resonant(4, 0.1).with_small_atom(0.2, 2);
        assert!((dark_state(&sym).unwrap().plateau - 0.25).abs() < 1e-14);
    }

    #[test]
    fn steady_state_matches_long_time_limit() {
        let p = magic(6, 1).with_drive(1e-3, 0.004);
        let l = liouvillian_magic(&p, MasterForm::Literal).unwrap();
        let ss = steady_state(&l).unwrap();
        assert!(ss.unique);
        // Dressed modes relax at about gamma_s / 2.
        let late = propagate(&l, &AtomsDensityMatrix::giant_excited(), &[10000.0]).unwrap();
        assert!((&late[0].entries - &ss.rho.entries)
            .iter()
            .all(|z| z.norm() < 1e-8));
    }
}
