//! Exact unitary evolution of a single-excitation state on the truncated
//! lattice.
//!
//! The propagator is a Taylor series of `exp(-i H h)` with `||H|| h <= 1`
//! (Gershgorin bound), truncated once a term falls below `1e-16` of the
//! state norm. Every approximate solver in the crate is judged against it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{build_hamiltonian, Hamiltonian, SingleExcitationState};
use crate::params::SystemParams;
use crate::timeseries::{check_grid, Heatmap, TimeSeries};
use crate::C64;

/// Allowed drift of `||psi||^2` over a run.
pub const NORM_TOL: f64 = 1e-9;
/// Outermost sites per end counted by the `edge_weight` column.
pub const EDGE_SITES: usize = 10;

const TERM_CUTOFF: f64 = 1e-16;
const MAX_TERMS: usize = 60;

/// Which columns [`evolve`] emits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableSpec {
    /// `p_e` (and `p_tau` with a small atom).
    pub populations: bool,
    /// `alpha_g_re`, `alpha_g_im` (and `alpha_s_*`).
    pub amplitudes: bool,
    /// `site_<j>` photon populations.
    pub sites: Vec<i64>,
    /// `norm`, `energy` and `edge_weight`.
    pub invariants: bool,
}

impl Default for ObservableSpec {
    fn default() -> Self {
        ObservableSpec {
            populations: true,
            amplitudes: false,
            sites: Vec::new(),
            invariants: true,
        }
    }
}

impl ObservableSpec {
    pub fn with_sites(mut self, sites: impl IntoIterator<Item = i64>) -> Self {
        self.sites = sites.into_iter().collect();
        self
    }
}

struct Propagator {
    h: Hamiltonian,
    psi: Vec<C64>,
    t: f64,
    term: Vec<C64>,
    next: Vec<C64>,
    max_step: f64,
}

impl Propagator {
    fn new(h: Hamiltonian, psi: Vec<C64>) -> Self {
        let n = psi.len();
        let max_step = 1.0 / h.norm_bound().max(f64::MIN_POSITIVE);
        Propagator {
            h,
            psi,
            t: 0.0,
            term: vec![C64::default(); n],
            next: vec![C64::default(); n],
            max_step,
        }
    }

    fn advance_to(&mut self, t: f64) -> Result<()> {
        let span = t - self.t;
        if span <= 0.0 {
            return Ok(());
        }
        let steps = (span / self.max_step).ceil().max(1.0) as usize;
        let h = span / steps as f64;
        for _ in 0..steps {
            self.step(h)?;
        }
        self.t = t;
        Ok(())
    }

    fn step(&mut self, h: f64) -> Result<()> {
        let scale = self.psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        self.term.copy_from_slice(&self.psi);
        let mi_h = C64::new(0.0, -h);
        for k in 1..=MAX_TERMS {
            self.h.apply(&self.term, &mut self.next);
            let f = mi_h / k as f64;
            let mut size = 0.0;
            for (t, n) in self.term.iter_mut().zip(&self.next) {
                *t = n * f;
                size += t.norm_sqr();
            }
            for (p, t) in self.psi.iter_mut().zip(&self.term) {
                *p += t;
            }
            if size.sqrt() <= TERM_CUTOFF * scale {
                return Ok(());
            }
        }
        Err(Error::NoConvergence("Taylor propagator"))
    }
}

fn check_initial(params: &SystemParams, initial: &SingleExcitationState) -> Result<()> {
    if initial.sites.len() != params.n_sites
        || initial.origin != params.origin_offset
        || initial.atom_s.is_some() != params.small_atom.is_some()
    {
        return Err(Error::InvalidParam {
            field: "initial",
            reason: "initial state was built for a different lattice or atom configuration".into(),
        });
    }
    let n = initial.norm_sqr();
    if (n - 1.0).abs() > NORM_TOL {
        return Err(Error::InvalidParam {
            field: "initial",
            reason: format!("initial state has norm^2 {n}, expected 1"),
        });
    }
    Ok(())
}

/// Propagates `initial` through `t_grid`, calling `visit(i, psi)` at each
/// grid time.
pub fn propagate<F>(
    params: &SystemParams,
    initial: &SingleExcitationState,
    t_grid: &[f64],
    mut visit: F,
) -> Result<()>
where
    F: FnMut(usize, &[C64]),
{
    check_grid(t_grid)?;
    check_initial(params, initial)?;
    if let Some(&t_max) = t_grid.last() {
        params.check_horizon(t_max)?;
    }
    let h = build_hamiltonian(params)?;
    let psi0 = initial.to_vector();
    let n0 = initial.norm_sqr();
    let mut p = Propagator::new(h, psi0);
    for (i, &t) in t_grid.iter().enumerate() {
        p.advance_to(t)?;
        let drift = (p.psi.iter().map(|a| a.norm_sqr()).sum::<f64>() - n0).abs();
        if drift > NORM_TOL {
            return Err(Error::NormDrift {
                drift,
                tolerance: NORM_TOL,
            });
        }
        visit(i, &p.psi);
    }
    Ok(())
}

/// State at a single time `t`.
pub fn evolve_state(
    params: &SystemParams,
    initial: &SingleExcitationState,
    t: f64,
) -> Result<SingleExcitationState> {
    let mut out = None;
    propagate(params, initial, &[t], |_, psi| out = Some(psi.to_vec()))?;
    SingleExcitationState::from_vector(params, &out.expect("one grid point"))
}

/// Exact evolution with the columns selected by `spec`.
pub fn evolve(
    params: &SystemParams,
    initial: &SingleExcitationState,
    t_grid: &[f64],
    spec: &ObservableSpec,
) -> Result<TimeSeries> {
    let n = params.n_sites;
    let site_idx: Vec<usize> = spec
        .sites
        .iter()
        .map(|&j| {
            params.site_index(j).ok_or_else(|| Error::InvalidParam {
                field: "sites",
                reason: format!("site {j} is outside the lattice"),
            })
        })
        .collect::<Result<_>>()?;
    let small = params.small_atom.is_some();
    let len = t_grid.len();
    let mut alpha_g = Vec::with_capacity(len);
    let mut alpha_s = Vec::with_capacity(len);
    let mut sites = vec![Vec::with_capacity(len); site_idx.len()];
    let mut norm = Vec::with_capacity(len);
    let mut edge = Vec::with_capacity(len);
    let mut energy = Vec::with_capacity(len);
    let h = build_hamiltonian(params)?;
    let edges: Vec<usize> = (0..EDGE_SITES.min(n))
        .chain(n.saturating_sub(EDGE_SITES)..n)
        .collect();
    propagate(params, initial, t_grid, |_, psi| {
        alpha_g.push(psi[n]);
        if small {
            alpha_s.push(psi[n + 1]);
        }
        for (col, &i) in sites.iter_mut().zip(&site_idx) {
            col.push(psi[i].norm_sqr());
        }
        if spec.invariants {
            norm.push(psi.iter().map(|a| a.norm_sqr()).sum::<f64>());
            edge.push(edges.iter().map(|&i| psi[i].norm_sqr()).sum::<f64>());
            energy.push(h.expectation(psi));
        }
    })?;
    let mut ts = TimeSeries::new(t_grid.to_vec());
    if spec.populations {
        ts.push("p_e", alpha_g.iter().map(|a| a.norm_sqr()).collect())?;
        if small {
            ts.push("p_tau", alpha_s.iter().map(|a| a.norm_sqr()).collect())?;
        }
    }
    if spec.amplitudes {
        ts.push_complex("alpha_g", &alpha_g)?;
        if small {
            ts.push_complex("alpha_s", &alpha_s)?;
        }
    }
    for (j, col) in spec.sites.iter().zip(sites) {
        ts.push(format!("site_{j}"), col)?;
    }
    if spec.invariants {
        ts.push("norm", norm)?;
        ts.push("energy", energy)?;
        ts.push("edge_weight", edge)?;
    }
    Ok(ts)
}

/// `|beta_j(t)|^2` on every lattice site.
pub fn snapshot_heatmap(
    params: &SystemParams,
    initial: &SingleExcitationState,
    t_grid: &[f64],
) -> Result<Heatmap> {
    let n = params.n_sites;
    let mut values = Vec::with_capacity(t_grid.len());
    propagate(params, initial, t_grid, |_, psi| {
        values.push(psi[..n].iter().map(|a| a.norm_sqr()).collect())
    })?;
    Ok(Heatmap {
        times: t_grid.to_vec(),
        sites: (0..n).map(|i| params.site_label(i)).collect(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timeseries::uniform_grid;

    #[test]
    fn decoupled_atom_stays_excited() {
        let p = SystemParams::resonant(4, 0.0).sized_for_horizon(10.0);
        let psi = SingleExcitationState::giant_excited(&p);
        let ts = evolve(
            &p,
            &psi,
            &uniform_grid(10.0, 0.5),
            &ObservableSpec::default(),
        )
        .unwrap();
        assert!(ts
            .column("p_e")
            .unwrap()
            .iter()
            .all(|&v| (v - 1.0).abs() < 1e-14));
    }

    #[test]
    fn free_photon_matches_bessel() {
        // No atom coupling: beta_j(t) = i^j J_j(2 xi t) from a photon at site 0.
        let p = SystemParams::resonant(4, 0.0).sized_for_horizon(6.0);
        let psi = SingleExcitationState::photon_at(&p, 0).unwrap();
        let s = evolve_state(&p, &psi, 6.0).unwrap();
        for j in 0..8 {
            let want = crate::i_pow(j) * crate::special::bessel_j(j as u32, 12.0).unwrap();
            assert!((s.site(j) - want).norm() < 1e-12, "site {j}");
        }
    }

    #[test]
    fn two_level_exchange() {
        // A single site with an atom: closed two-level Rabi problem.
        let h = Hamiltonian::from_parts(
            1,
            0.0,
            1.0,
            vec![crate::lattice::AtomLevel {
                energy: 0.0,
                couplings: vec![(0, 0.3)],
            }],
        );
        let mut p = Propagator::new(h, vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
        p.advance_to(7.0).unwrap();
        assert!((p.psi[1].re - (0.3f64 * 7.0).cos()).abs() < 1e-13);
        assert!((p.psi[0].im + (0.3f64 * 7.0).sin()).abs() < 1e-13);
    }

    #[test]
    fn horizon_is_enforced() {
        let p = SystemParams::resonant(4, 0.1).centered(60);
        let psi = SingleExcitationState::giant_excited(&p);
        assert!(matches!(
            evolve(&p, &psi, &[0.0, 30.0], &ObservableSpec::default()),
            Err(Error::LightCone { .. })
        ));
    }

    #[test]
    fn heatmap_starts_from_initial_distribution() {
        let p = SystemParams::resonant(4, 0.1).sized_for_horizon(5.0);
        let psi = SingleExcitationState::photon_at(&p, 2).unwrap();
        let hm = snapshot_heatmap(&p, &psi, &[0.0, 1.0, 5.0]).unwrap();
        assert_eq!(hm.at(0, 2), Some(1.0));
        assert_eq!(hm.at(0, 3), Some(0.0));
        assert_eq!(hm.sites.len(), p.n_sites);
    }
}
