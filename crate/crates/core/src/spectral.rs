//! Bound states of the giant atom: BOCs from the self-energy equation,
//! BICs from the confinement condition, and the BIC–BOC beating they
//! produce.
//!
//! Energies `E` in the self-energy equation are measured from `omega_c`.
//! For `|E| > 2 xi` the lattice Green's function is
//!
//! ```text
//! (1/2pi) int dk e^{ikn} / (E + 2 xi cos k) = sgn(E) (-sgn(E) b)^|n| / sqrt(E^2 - 4 xi^2)
//! b = (|E| - sqrt(E^2 - 4 xi^2)) / (2 xi)
//! ```
//!
//! and substituting `E = sgn(E) xi (b + 1/b)` turns the bound-state
//! condition into the regular equation
//! `xi^2 (1/b^2 - b^2) = 2 g^2 (1 + (-sgn(E) b)^N)` on `0 < b < 1`.

use std::fmt;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigen::{confined_near, dense_eigen, dense_spectrum, out_of_band};
use crate::error::{Error, Result};
use crate::lattice::{build_hamiltonian, Hamiltonian, SingleExcitationState};
use crate::params::SystemParams;
use crate::quad;
use crate::roots::brent;
use crate::timeseries::{check_grid, fmt_num, TimeSeries};
use crate::{i_pow, C64};

/// Agreement required between the quadrature and closed-form self-energy.
pub const RHS_CROSS_CHECK: f64 = 1e-10;
/// Agreement required between the two BIC constructions.
pub const BIC_ROUTE_TOL: f64 = 1e-6;
/// Residual bound every returned bound state satisfies.
pub const RESIDUAL_TOL: f64 = 1e-8;
/// Eigenvalue window used to collect near-degenerate confined candidates.
pub const BIC_WINDOW: f64 = 1e-8;
/// Extra sites on each side of the legs in the lattice used for confined
/// states.
const COMPACT_PAD: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundKind {
    Bic,
    BocUpper,
    BocLower,
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundKind::Bic => "BIC",
            BoundKind::BocUpper => "BOC_upper",
            BoundKind::BocLower => "BOC_lower",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundState {
    pub energy: f64,
    pub kind: BoundKind,
    pub c_atom_g: C64,
    pub c_atom_s: Option<C64>,
    /// Photon amplitude per lattice site, array order.
    pub profile: Vec<C64>,
    /// Array index of physical site 0.
    pub origin: usize,
}

impl BoundState {
    fn from_real(params: &SystemParams, energy: f64, kind: BoundKind, v: &[f64]) -> Self {
        let n = params.n_sites;
        let c = |x: f64| C64::new(x, 0.0);
        let mut s = BoundState {
            energy,
            kind,
            c_atom_g: c(v[n]),
            c_atom_s: params.small_atom.map(|_| c(v[n + 1])),
            profile: v[..n].iter().map(|&x| c(x)).collect(),
            origin: params.origin_offset,
        };
        if s.c_atom_g.norm() > 1e-12 {
            s.rotate(s.c_atom_g.conj() / s.c_atom_g.norm());
        } else {
            s.align_on_first_site();
        }
        s
    }

    fn rotate(&mut self, phase: C64) {
        self.c_atom_g *= phase;
        if let Some(a) = self.c_atom_s.as_mut() {
            *a *= phase;
        }
        self.profile.iter_mut().for_each(|d| *d *= phase);
    }

    /// Rotates the global phase so the first site amplitude above `1e-6`
    /// of the largest is real positive.
    pub fn align_on_first_site(&mut self) {
        let max = self.profile.iter().map(|d| d.norm()).fold(0.0, f64::max);
        if let Some(d) = self.profile.iter().find(|d| d.norm() > 1e-6 * max).copied() {
            self.rotate(d.conj() / d.norm());
        }
    }

    /// Amplitude on physical site `j`.
    pub fn site(&self, j: i64) -> C64 {
        let idx = self.origin as i64 + j;
        if idx < 0 {
            return C64::new(0.0, 0.0);
        }
        self.profile.get(idx as usize).copied().unwrap_or_default()
    }

    pub fn to_vector(&self) -> Vec<C64> {
        let mut v = self.profile.clone();
        v.push(self.c_atom_g);
        if let Some(s) = self.c_atom_s {
            v.push(s);
        }
        v
    }

    pub fn norm_sqr(&self) -> f64 {
        self.to_vector().iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn residual(&self, h: &Hamiltonian) -> f64 {
        h.residual(&self.to_vector(), self.energy)
    }

    /// `<E|psi>`.
    pub fn overlap(&self, psi: &SingleExcitationState) -> C64 {
        self.to_vector()
            .iter()
            .zip(psi.to_vector())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    fn check_residual(&self, h: &Hamiltonian) -> Result<()> {
        let r = self.residual(h);
        if r > RESIDUAL_TOL {
            return Err(Error::Disagreement {
                what: "bound-state residual",
                diff: r,
                tolerance: RESIDUAL_TOL,
            });
        }
        Ok(())
    }
}

fn require_resonant(params: &SystemParams, what: &'static str) -> Result<()> {
    params.validate()?;
    if !params.is_resonant() {
        return Err(Error::NotResonant(what));
    }
    Ok(())
}

/// Closed-form right-hand side of the self-energy equation at detuning
/// `e = E - omega_c`, `|e| > 2 xi`.
pub fn boc_rhs_closed(params: &SystemParams, e: f64) -> f64 {
    rhs_closed_gap(params, e.abs() - 2.0 * params.xi, e.signum())
}

/// `(g^2/pi) int_{-pi}^{pi} dk (1 + cos kN) / (e + 2 xi cos k)` by adaptive
/// quadrature.
pub fn boc_rhs_quadrature(params: &SystemParams, e: f64) -> Result<f64> {
    rhs_quadrature_gap(params, e.abs() - 2.0 * params.xi, e.signum())
}

/// Both right-hand sides take the distance `gap = |e| - 2 xi` to the band
/// edge and the side `s = sgn(e)`, so roots near the edge keep their digits.
fn rhs_closed_gap(params: &SystemParams, gap: f64, s: f64) -> f64 {
    let xi = params.xi;
    let root = (gap * (gap + 4.0 * xi)).sqrt();
    let beta = (gap + 2.0 * xi - root) / (2.0 * xi);
    let far = (-s * beta).powi(params.separation as i32);
    2.0 * params.g * params.g * s * (1.0 + far) / root
}

fn rhs_quadrature_gap(params: &SystemParams, gap: f64, s: f64) -> Result<f64> {
    let (xi, n) = (params.xi, params.separation as f64);
    // |e + 2 xi cos k| = gap + 4 xi cos^2(k/2) above the band, mirrored below.
    let f = |k: f64| {
        let half = if s > 0.0 {
            (0.5 * k).cos()
        } else {
            (0.5 * k).sin()
        };
        (1.0 + (k * n).cos()) / (gap + 4.0 * xi * half * half)
    };
    let pieces = params.separation.max(4);
    let rough = quad::integrate_panels(f, 0.0, std::f64::consts::PI, pieces, 1e-6)?;
    let fine = quad::integrate_panels(f, 0.0, std::f64::consts::PI, pieces, 1e-13 * rough.abs())?;
    Ok(s * 2.0 * params.g * params.g / std::f64::consts::PI * fine)
}

/// Root `b` in `(0, 1)` of `xi^2 (1/b^2 - b^2) - 2 g^2 (1 + (-s b)^N)`.
fn solve_beta(params: &SystemParams, s: f64) -> Result<f64> {
    let (xi, g, n) = (params.xi, params.g, params.separation as i32);
    let h = |b: f64| xi * xi * (1.0 / (b * b) - b * b) - 2.0 * g * g * (1.0 + (-s * b).powi(n));
    let lo = 0.5 * xi / (xi + 2.0 * g);
    let hi = 1.0 - 1e-12;
    brent(h, lo, hi, 1e-16)
}

/// BOC energy above (`upper`) or below the band from the self-energy
/// equation, verified against adaptive quadrature of the integral form.
pub fn boc_energy(params: &SystemParams, upper: bool) -> Result<f64> {
    require_resonant(params, "boc_energy")?;
    if params.g <= 0.0 {
        return Err(Error::InvalidParam {
            field: "g",
            reason: "BOC energies need g > 0".into(),
        });
    }
    let s = if upper { 1.0 } else { -1.0 };
    let b = solve_beta(params, s).map_err(|e| match e {
        Error::BracketFailure { .. } => {
            Error::NoBoundState("self-energy equation has no root outside the band")
        }
        other => other,
    })?;
    let gap = params.xi * (1.0 - b) * (1.0 - b) / b;
    let closed = rhs_closed_gap(params, gap, s);
    let quad = rhs_quadrature_gap(params, gap, s)?;
    let diff = (closed - quad).abs();
    if diff > RHS_CROSS_CHECK * closed.abs().max(1.0) {
        return Err(Error::Disagreement {
            what: "self-energy closed form vs quadrature",
            diff,
            tolerance: RHS_CROSS_CHECK,
        });
    }
    Ok(params.omega_c + s * params.xi * (b + 1.0 / b))
}

/// Upper and lower BOC energies; fails if either is missing.
pub fn boc_energies(params: &SystemParams) -> Result<(f64, f64)> {
    Ok((boc_energy(params, true)?, boc_energy(params, false)?))
}

/// `|sum_j exp(i K n_j)| ~ 0`: a BIC exists for legs at `n_j` and resonant
/// wavenumber `K`.
pub fn bic_condition(k: f64, legs: &[i64]) -> bool {
    let s: C64 = legs
        .iter()
        .map(|&n| C64::from_polar(1.0, k * n as f64))
        .sum();
    s.norm() <= 1e-12 * legs.len().max(1) as f64
}

/// Two-leg BIC in the resonant case: `1 + i^N = 0`, i.e. `N mod 4 = 2`.
pub fn bic_exists_single(params: &SystemParams) -> Result<bool> {
    require_resonant(params, "bic_exists_single")?;
    Ok(1.0 + i_pow(params.separation as i64) == C64::new(0.0, 0.0))
}

/// Magic-cavity BIC condition `K M = m pi`, `K (N - M) = n pi` with `m`, `n`
/// of equal parity.
pub fn bic_magic_condition(params: &SystemParams) -> Result<bool> {
    params.validate()?;
    let sa = params.small_atom_or_err("bic_magic_condition")?;
    let Some(k) = params.resonant_wavenumber() else {
        return Ok(false);
    };
    let multiple = |x: f64| {
        let r = x / std::f64::consts::PI;
        ((r - r.round()).abs() < 1e-9).then_some(r.round() as i64)
    };
    let n = params.separation;
    Ok(
        match (
            multiple(k * sa.site as f64),
            multiple(k * (n - sa.site) as f64),
        ) {
            (Some(a), Some(b)) => (a - b).rem_euclid(2) == 0,
            _ => false,
        },
    )
}

/// `b_j / c = (g / 4 pi xi) PV int dk (1 + e^{ikN}) e^{-ikj} / cos k` for
/// each `j` in `sites`, by symmetric midpoint pairing about `k = +-pi/2`
/// with grid doubling until the change is below `1e-8`.
pub fn bic_profile_pv(params: &SystemParams, sites: &[i64]) -> Result<Vec<C64>> {
    let n = params.separation as f64;
    let eval = |m: usize| -> Vec<C64> {
        let h = 2.0 * std::f64::consts::PI / m as f64;
        let mut acc = vec![C64::new(0.0, 0.0); sites.len()];
        for i in 0..m {
            let k = -std::f64::consts::FRAC_PI_2 + (i as f64 + 0.5) * h;
            let w = (C64::new(1.0, 0.0) + C64::from_polar(1.0, k * n)) / k.cos();
            for (a, &j) in acc.iter_mut().zip(sites) {
                *a += w * C64::from_polar(1.0, -k * j as f64);
            }
        }
        let scale = params.g / (4.0 * std::f64::consts::PI * params.xi) * h;
        acc.into_iter().map(|a| a * scale).collect()
    };
    let mut m = 16;
    let mut prev = eval(m);
    while m < 1 << 18 {
        m *= 2;
        let next = eval(m);
        let change = prev
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        if change <= 1e-8 {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::NoConvergence("BIC principal-value quadrature"))
}

fn compact(params: &SystemParams) -> SystemParams {
    params
        .clone()
        .centered(params.separation + 1 + 2 * COMPACT_PAD)
}

/// Confined eigenvector at `E = omega` on a compact lattice, embedded in
/// `params`' lattice.
fn confined_eigenvector(params: &SystemParams) -> Result<BoundState> {
    let small = compact(params);
    let h = build_hamiltonian(&small)?;
    let (vals, vecs) = dense_eigen(&h);
    let inside: Vec<usize> = (0..=small.separation as i64)
        .filter_map(|j| small.site_index(j))
        .collect();
    let outside: Vec<usize> = (0..small.n_sites).filter(|i| !inside.contains(i)).collect();
    let c = confined_near(&vals, &vecs, params.omega, BIC_WINDOW, &outside)
        .ok_or(Error::NoBoundState("no eigenvalue at the atomic frequency"))?;
    if c.leakage > 1e-12 {
        return Err(Error::NoBoundState(
            "eigenvector at the atomic frequency is not confined",
        ));
    }
    let v: Vec<f64> = c.vector.iter().copied().collect();
    let local = BoundState::from_real(&small, params.omega, BoundKind::Bic, &v);
    Ok(embed(params, &local, small.origin_offset))
}

fn embed(params: &SystemParams, local: &BoundState, local_origin: usize) -> BoundState {
    let mut profile = vec![C64::new(0.0, 0.0); params.n_sites];
    for (idx, d) in local.profile.iter().enumerate() {
        let j = idx as i64 - local_origin as i64;
        if let Some(t) = params.site_index(j) {
            profile[t] = *d;
        }
    }
    BoundState {
        profile,
        origin: params.origin_offset,
        ..local.clone()
    }
}

/// The two BIC constructions: the principal-value profile (normalised,
/// giant-atom amplitude real positive) and the confined eigenvector of the
/// lattice Hamiltonian, both rephased so the first nonzero site is real
/// positive for comparison.
pub fn bic_profile_routes(params: &SystemParams) -> Result<(BoundState, BoundState)> {
    if !bic_exists_single(params)? {
        return Err(Error::NoBoundState("N mod 4 != 2: no two-leg BIC"));
    }
    if params.small_atom.is_some() {
        return Err(Error::Unsupported(
            "bic_profile is for the single giant atom; use bic_magic_cavity".into(),
        ));
    }
    let pad = COMPACT_PAD as i64;
    let labels: Vec<i64> = (-pad..=params.separation as i64 + pad).collect();
    let b = bic_profile_pv(params, &labels)?;
    let mut profile = vec![C64::new(0.0, 0.0); params.n_sites];
    for (&j, &v) in labels.iter().zip(&b) {
        if let Some(i) = params.site_index(j) {
            profile[i] = v;
        }
    }
    let mut pv = BoundState {
        energy: params.omega,
        kind: BoundKind::Bic,
        c_atom_g: C64::new(1.0, 0.0),
        c_atom_s: None,
        profile,
        origin: params.origin_offset,
    };
    let norm = pv.norm_sqr().sqrt();
    pv.rotate(C64::new(1.0 / norm, 0.0));
    let mut e = confined_eigenvector(params)?;
    e.align_on_first_site();
    Ok((pv, e))
}

/// Largest componentwise difference between two states after aligning
/// both on their first nonzero site.
pub fn route_difference(a: &BoundState, b: &BoundState) -> f64 {
    let (mut a, mut b) = (a.clone(), b.clone());
    a.align_on_first_site();
    b.align_on_first_site();
    a.to_vector()
        .iter()
        .zip(b.to_vector())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Two-leg BIC profile from the principal-value integral, cross-checked
/// against the confined eigenvector of the lattice Hamiltonian.
pub fn bic_profile(params: &SystemParams) -> Result<BoundState> {
    let (pv, e) = bic_profile_routes(params)?;
    let diff = route_difference(&pv, &e);
    if diff > BIC_ROUTE_TOL {
        return Err(Error::Disagreement {
            what: "BIC profile: PV integral vs eigenvector",
            diff,
            tolerance: BIC_ROUTE_TOL,
        });
    }
    pv.check_residual(&build_hamiltonian(params)?)?;
    Ok(pv)
}

/// Upper and lower BOCs of `params`' lattice Hamiltonian, phased so the
/// giant-atom amplitude is real positive.
pub fn boc_states(params: &SystemParams) -> Result<(BoundState, BoundState)> {
    params.validate()?;
    if params.g <= 0.0 {
        return Err(Error::InvalidParam {
            field: "g",
            reason: "BOCs need g > 0".into(),
        });
    }
    let h = build_hamiltonian(params)?;
    let up = out_of_band(&h, true)?;
    let lo = out_of_band(&h, false)?;
    let up = BoundState::from_real(params, up.energy, BoundKind::BocUpper, &up.vector);
    let lo = BoundState::from_real(params, lo.energy, BoundKind::BocLower, &lo.vector);
    up.check_residual(&h)?;
    lo.check_residual(&h)?;
    Ok((up, lo))
}

/// Magic-cavity BIC, if the confinement condition holds.
pub fn bic_magic_cavity(params: &SystemParams) -> Result<Option<BoundState>> {
    if !params.is_resonant() {
        params.validate()?;
        return Err(Error::NotResonant("bic_magic_cavity"));
    }
    if !bic_magic_condition(params)? {
        return Ok(None);
    }
    let s = confined_eigenvector(params)?;
    s.check_residual(&build_hamiltonian(params)?)?;
    Ok(Some(s))
}

/// Long-time small-atom population predicted by the magic-cavity BIC for
/// the initial state `tau_+ |G>`: `|<psi0|E_I><E_I|tau_+|G>|^2`.
pub fn bic_projection_population(params: &SystemParams) -> Result<f64> {
    let bic =
        bic_magic_cavity(params)?.ok_or(Error::NoBoundState("magic-cavity BIC condition fails"))?;
    let psi0 = SingleExcitationState::small_excited(params)?;
    let c = bic.overlap(&psi0);
    Ok((c.conj() * c).norm_sqr())
}

/// Full lattice spectrum per coupling, plus the bound-state branches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumTable {
    pub g: Vec<f64>,
    /// `energies[i]` is the ascending spectrum at `g[i]`.
    pub energies: Vec<Vec<f64>>,
    /// From the self-energy equation (band edges at `g = 0`, NaN where the
    /// branch does not exist).
    pub upper: Vec<f64>,
    pub lower: Vec<f64>,
    /// Confined eigenvalue at the atomic frequency, when a BIC exists.
    pub bic: Option<Vec<f64>>,
}

impl SpectrumTable {
    /// `g,index,energy`.
    pub fn write_spectrum_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "g,index,energy")?;
        for (g, row) in self.g.iter().zip(&self.energies) {
            for (i, e) in row.iter().enumerate() {
                writeln!(w, "{},{i},{}", fmt_num(*g), fmt_num(*e))?;
            }
        }
        Ok(())
    }

    /// `g,e_upper,e_lower[,e_bic]`.
    pub fn write_branches_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let bic = self.bic.as_ref();
        writeln!(
            w,
            "g,e_upper,e_lower{}",
            if bic.is_some() { ",e_bic" } else { "" }
        )?;
        for i in 0..self.g.len() {
            let mut line = format!(
                "{},{},{}",
                fmt_num(self.g[i]),
                fmt_num(self.upper[i]),
                fmt_num(self.lower[i])
            );
            if let Some(b) = bic {
                line.push(',');
                line.push_str(&fmt_num(b[i]));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

pub fn spectrum_vs_g(params: &SystemParams, g_grid: &[f64]) -> Result<SpectrumTable> {
    require_resonant(params, "spectrum_vs_g")?;
    for &g in g_grid {
        params.clone().with_coupling(g).validate()?;
    }
    let with_bic = bic_exists_single(params)? && params.small_atom.is_none();
    // (spectrum, upper, lower, bic) per coupling.
    type Row = (Vec<f64>, f64, f64, f64);
    let rows: Vec<Result<Row>> = g_grid
        .par_iter()
        .map(|&g| {
            let p = params.clone().with_coupling(g);
            let h = build_hamiltonian(&p)?;
            let branch = |upper: bool| match boc_energy(&p, upper) {
                Err(Error::NoBoundState(_)) => Ok(f64::NAN),
                other => other,
            };
            let (up, lo) = if g > 0.0 {
                (branch(true)?, branch(false)?)
            } else {
                (p.omega_c + 2.0 * p.xi, p.omega_c - 2.0 * p.xi)
            };
            if with_bic {
                let (vals, vecs) = dense_eigen(&h);
                let inside: Vec<usize> = (0..=p.separation as i64)
                    .filter_map(|j| p.site_index(j))
                    .collect();
                let outside: Vec<usize> = (0..p.n_sites).filter(|i| !inside.contains(i)).collect();
                let e = confined_near(&vals, &vecs, p.omega, BIC_WINDOW, &outside)
                    .map_or(f64::NAN, |c| c.energy);
                Ok((vals, up, lo, e))
            } else {
                Ok((dense_spectrum(&h), up, lo, f64::NAN))
            }
        })
        .collect();
    let mut t = SpectrumTable {
        g: g_grid.to_vec(),
        energies: vec![],
        upper: vec![],
        lower: vec![],
        bic: None,
    };
    let mut bic = Vec::new();
    for r in rows {
        let (vals, up, lo, e) = r?;
        t.energies.push(vals);
        t.upper.push(up);
        t.lower.push(lo);
        bic.push(e);
    }
    if with_bic {
        t.bic = Some(bic);
    }
    Ok(t)
}

/// Overlaps `<E_alpha|psi0>` with the three bound states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlapSet {
    pub c_u: C64,
    pub c_l: C64,
    pub c_i: C64,
    /// `E_U - E_I` from the self-energy equation.
    pub delta: f64,
    /// `1 - sum |c_alpha|^2`: weight carried by the continuum.
    pub continuum_weight: f64,
}

#[derive(Debug, Clone)]
pub struct BoundTriple {
    pub upper: BoundState,
    pub lower: BoundState,
    pub bic: BoundState,
}

pub fn overlaps(
    params: &SystemParams,
    initial: &SingleExcitationState,
) -> Result<(OverlapSet, BoundTriple)> {
    let bic = bic_profile(params)?;
    let (upper, lower) = boc_states(params)?;
    let (e_up, _) = boc_energies(params)?;
    let c_u = upper.overlap(initial);
    let c_l = lower.overlap(initial);
    let c_i = bic.overlap(initial);
    let bound = c_u.norm_sqr() + c_l.norm_sqr() + c_i.norm_sqr();
    let set = OverlapSet {
        c_u,
        c_l,
        c_i,
        delta: e_up - params.omega,
        continuum_weight: 1.0 - bound,
    };
    Ok((set, BoundTriple { upper, lower, bic }))
}

/// Default continuum weight above which the bound-state prediction is
/// flagged.
pub const CONTINUUM_WARN: f64 = 0.5;

/// Bound-state prediction of the atomic and photonic populations.
///
/// Columns: `p_e_beat` (the closed form `|c_I^2 + 2 c_U^2 cos(delta t)|^2`
/// with atomic amplitudes `c_alpha`), `p_e_bound` (the general sum
/// `|sum_a <e|E_a><E_a|psi0> e^{-i(E_a - omega) t}|^2`), their difference
/// `beat_residual`, and `site_<j>` photon populations from the same sum.
pub fn bic_boc_oscillation(
    params: &SystemParams,
    initial: &SingleExcitationState,
    t_grid: &[f64],
    sites: &[i64],
    continuum_threshold: f64,
) -> Result<TimeSeries> {
    check_grid(t_grid)?;
    let (set, states) = overlaps(params, initial)?;
    let mut ts = TimeSeries::new(t_grid.to_vec());
    if set.continuum_weight > continuum_threshold {
        ts.warnings.push(format!(
            "continuum carries {:.3} of the initial state (threshold {continuum_threshold}); the bound-state \
             prediction only describes the long-time part",
            set.continuum_weight
        ));
    }
    let terms = [
        (&states.upper, set.c_u),
        (&states.lower, set.c_l),
        (&states.bic, set.c_i),
    ];
    let phase = |e: f64, t: f64| C64::from_polar(1.0, -(e - params.omega) * t);
    let cu = states.upper.c_atom_g.re;
    let ci = states.bic.c_atom_g.re;
    let beat: Vec<f64> = t_grid
        .iter()
        .map(|&t| (ci * ci + 2.0 * cu * cu * (set.delta * t).cos()).powi(2))
        .collect();
    let bound: Vec<f64> = t_grid
        .iter()
        .map(|&t| {
            terms
                .iter()
                .map(|(s, c)| s.c_atom_g * c * phase(s.energy, t))
                .sum::<C64>()
                .norm_sqr()
        })
        .collect();
    let residual: Vec<f64> = beat.iter().zip(&bound).map(|(a, b)| a - b).collect();
    ts.push("p_e_beat", beat)?;
    ts.push("p_e_bound", bound)?;
    ts.push("beat_residual", residual)?;
    for &j in sites {
        let col = t_grid
            .iter()
            .map(|&t| {
                terms
                    .iter()
                    .map(|(s, c)| s.site(j) * c * phase(s.energy, t))
                    .sum::<C64>()
                    .norm_sqr()
            })
            .collect();
        ts.push(format!("site_{j}"), col)?;
    }
    Ok(ts)
}

/// Bound-state table: `kind,energy,c_atom_g_re,c_atom_g_im,site,d_re,d_im`
/// with trailing `c_atom_s_re,c_atom_s_im` (empty without a small atom), one
/// row per site label in `lo..=hi`.
pub fn write_bound_states_csv<W: Write>(
    states: &[BoundState],
    lo: i64,
    hi: i64,
    mut w: W,
) -> io::Result<()> {
    writeln!(
        w,
        "kind,energy,c_atom_g_re,c_atom_g_im,site,d_re,d_im,c_atom_s_re,c_atom_s_im"
    )?;
    for s in states {
        let small = s.c_atom_s.map_or(",".to_string(), |a| {
            format!("{},{}", fmt_num(a.re), fmt_num(a.im))
        });
        for j in lo..=hi {
            let d = s.site(j);
            writeln!(
                w,
                "{},{},{},{},{j},{},{},{small}",
                s.kind,
                fmt_num(s.energy),
                fmt_num(s.c_atom_g.re),
                fmt_num(s.c_atom_g.im),
                fmt_num(d.re),
                fmt_num(d.im)
            )?;
        }
    }
    Ok(())
}

/// Dense spectrum of `params`' lattice (for symmetry checks).
pub fn lattice_spectrum(params: &SystemParams) -> Result<Vec<f64>> {
    Ok(dense_spectrum(&build_hamiltonian(params)?))
}
