//! Dispersion relation and the single-excitation Hamiltonian.
//!
//! Basis ordering is fixed as `[site 0 .. site n_sites-1, giant atom,
//! small atom]`, where array site `i` is physical site
//! `i - origin_offset`. Serialized state vectors follow the same order.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::C64;

/// `omega_k = omega_c - 2 xi cos k`.
pub fn dispersion(params: &SystemParams, k: f64) -> f64 {
    params.omega_c - 2.0 * params.xi * k.cos()
}

/// An atomic level coupled to a handful of lattice sites.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomLevel {
    pub energy: f64,
    /// `(array index, coupling)` pairs.
    pub couplings: Vec<(usize, f64)>,
}

/// Real symmetric single-excitation Hamiltonian: an open tight-binding
/// chain bordered by one or two atomic levels.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    n_sites: usize,
    onsite: f64,
    hopping: f64,
    atoms: Vec<AtomLevel>,
}

pub fn build_hamiltonian(params: &SystemParams) -> Result<Hamiltonian> {
    params.validate()?;
    let leg0 = params.site_index(0);
    let leg1 = params.site_index(params.separation as i64);
    let (Some(leg0), Some(leg1)) = (leg0, leg1) else {
        return Err(Error::InvalidParam {
            field: "n_sites",
            reason: "lattice does not contain both legs".into(),
        });
    };
    let mut atoms = vec![AtomLevel {
        energy: params.omega,
        couplings: vec![(leg0, params.g), (leg1, params.g)],
    }];
    if let Some(s) = params.small_atom {
        let site = params
            .site_index(s.site as i64)
            .expect("validated small-atom site");
        atoms.push(AtomLevel {
            energy: params.omega,
            couplings: vec![(site, s.g_s)],
        });
    }
    Ok(Hamiltonian {
        n_sites: params.n_sites,
        onsite: params.omega_c,
        hopping: params.xi,
        atoms,
    })
}

impl Hamiltonian {
    /// Bare chain with explicit atomic levels; used by tests and the
    /// eigensolvers.
    pub fn from_parts(n_sites: usize, onsite: f64, hopping: f64, atoms: Vec<AtomLevel>) -> Self {
        Hamiltonian {
            n_sites,
            onsite,
            hopping,
            atoms,
        }
    }

    pub fn dim(&self) -> usize {
        self.n_sites + self.atoms.len()
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn onsite(&self) -> f64 {
        self.onsite
    }

    pub fn hopping(&self) -> f64 {
        self.hopping
    }

    pub fn atoms(&self) -> &[AtomLevel] {
        &self.atoms
    }

    /// Basis index of atom `a` (0 = giant, 1 = small).
    pub fn atom_index(&self, a: usize) -> usize {
        self.n_sites + a
    }

    /// `y = H x`.
    pub fn apply(&self, x: &[C64], y: &mut [C64]) {
        let n = self.n_sites;
        debug_assert_eq!(x.len(), self.dim());
        debug_assert_eq!(y.len(), self.dim());
        let t = -self.hopping;
        for i in 0..n {
            let mut acc = x[i] * self.onsite;
            if i > 0 {
                acc += x[i - 1] * t;
            }
            if i + 1 < n {
                acc += x[i + 1] * t;
            }
            y[i] = acc;
        }
        for (a, atom) in self.atoms.iter().enumerate() {
            let ia = n + a;
            let mut acc = x[ia] * atom.energy;
            for &(s, c) in &atom.couplings {
                acc += x[s] * c;
                y[s] += x[ia] * c;
            }
            y[ia] = acc;
        }
    }

    pub fn apply_real(&self, x: &[f64]) -> Vec<f64> {
        let xc: Vec<C64> = x.iter().map(|&v| C64::new(v, 0.0)).collect();
        let mut y = vec![C64::new(0.0, 0.0); self.dim()];
        self.apply(&xc, &mut y);
        y.into_iter().map(|v| v.re).collect()
    }

    /// `<x|H|x>`.
    pub fn expectation(&self, x: &[C64]) -> f64 {
        let mut y = vec![C64::new(0.0, 0.0); self.dim()];
        self.apply(x, &mut y);
        x.iter().zip(&y).map(|(a, b)| (a.conj() * b).re).sum()
    }

    /// `|| H v - E v ||`.
    pub fn residual(&self, v: &[C64], energy: f64) -> f64 {
        let mut y = vec![C64::new(0.0, 0.0); self.dim()];
        self.apply(v, &mut y);
        y.iter()
            .zip(v)
            .map(|(a, b)| (a - b * energy).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Gershgorin bound on the spectral radius.
    pub fn norm_bound(&self) -> f64 {
        let coupled: Vec<f64> = {
            let mut extra = vec![0.0; self.n_sites];
            for atom in &self.atoms {
                for &(s, c) in &atom.couplings {
                    extra[s] += c.abs();
                }
            }
            extra
        };
        let chain = coupled
            .iter()
            .map(|e| self.onsite.abs() + 2.0 * self.hopping.abs() + e)
            .fold(0.0, f64::max);
        self.atoms
            .iter()
            .map(|a| a.energy.abs() + a.couplings.iter().map(|c| c.1.abs()).sum::<f64>())
            .fold(chain, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut h = DMatrix::zeros(d, d);
        for i in 0..self.n_sites {
            h[(i, i)] = self.onsite;
            if i + 1 < self.n_sites {
                h[(i, i + 1)] = -self.hopping;
                h[(i + 1, i)] = -self.hopping;
            }
        }
        for (a, atom) in self.atoms.iter().enumerate() {
            let ia = self.n_sites + a;
            h[(ia, ia)] = atom.energy;
            for &(s, c) in &atom.couplings {
                h[(ia, s)] += c;
                h[(s, ia)] += c;
            }
        }
        h
    }
}

/// Single-excitation state: giant-atom amplitude, optional small-atom
/// amplitude and one amplitude per lattice site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleExcitationState {
    pub atom_g: C64,
    pub atom_s: Option<C64>,
    pub sites: Vec<C64>,
    /// Array index of physical site 0.
    pub origin: usize,
}

impl SingleExcitationState {
    fn empty(params: &SystemParams) -> Self {
        SingleExcitationState {
            atom_g: C64::new(0.0, 0.0),
            atom_s: params.small_atom.map(|_| C64::new(0.0, 0.0)),
            sites: vec![C64::new(0.0, 0.0); params.n_sites],
            origin: params.origin_offset,
        }
    }

    /// `sigma_+ |g, vac>` (and the small atom in its ground state).
    pub fn giant_excited(params: &SystemParams) -> Self {
        let mut s = Self::empty(params);
        s.atom_g = C64::new(1.0, 0.0);
        s
    }

    /// `tau_+ |G>`.
    pub fn small_excited(params: &SystemParams) -> Result<Self> {
        params.small_atom_or_err("small_excited")?;
        let mut s = Self::empty(params);
        s.atom_s = Some(C64::new(1.0, 0.0));
        Ok(s)
    }

    /// A single photon on physical site `j`.
    pub fn photon_at(params: &SystemParams, j: i64) -> Result<Self> {
        let idx = params.site_index(j).ok_or(Error::InvalidParam {
            field: "site",
            reason: format!("site {j} is outside the lattice"),
        })?;
        let mut s = Self::empty(params);
        s.sites[idx] = C64::new(1.0, 0.0);
        Ok(s)
    }

    /// Inverse of [`SingleExcitationState::to_vector`].
    pub fn from_vector(params: &SystemParams, v: &[C64]) -> Result<Self> {
        let n = params.n_sites;
        let expect = n + 1 + usize::from(params.small_atom.is_some());
        if v.len() != expect {
            return Err(Error::InvalidParam {
                field: "state",
                reason: format!(
                    "vector length {} does not match basis dimension {expect}",
                    v.len()
                ),
            });
        }
        Ok(SingleExcitationState {
            atom_g: v[n],
            atom_s: params.small_atom.map(|_| v[n + 1]),
            sites: v[..n].to_vec(),
            origin: params.origin_offset,
        })
    }

    pub fn to_vector(&self) -> Vec<C64> {
        let mut v = self.sites.clone();
        v.push(self.atom_g);
        if let Some(s) = self.atom_s {
            v.push(s);
        }
        v
    }

    pub fn norm_sqr(&self) -> f64 {
        self.atom_g.norm_sqr()
            + self.atom_s.map_or(0.0, |a| a.norm_sqr())
            + self.sites.iter().map(|a| a.norm_sqr()).sum::<f64>()
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm_sqr().sqrt();
        if n > 0.0 {
            self.atom_g /= n;
            if let Some(s) = self.atom_s.as_mut() {
                *s /= n;
            }
            self.sites.iter_mut().for_each(|a| *a /= n);
        }
        self
    }

    /// Amplitude on physical site `j` (zero outside the lattice).
    pub fn site(&self, j: i64) -> C64 {
        let idx = self.origin as i64 + j;
        if idx < 0 {
            return C64::new(0.0, 0.0);
        }
        self.sites
            .get(idx as usize)
            .copied()
            .unwrap_or(C64::new(0.0, 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn dispersion_band_points() {
        let p = SystemParams::resonant(4, 0.1);
        assert_eq!(dispersion(&p, 0.0), -2.0);
        assert!(dispersion(&p, PI / 2.0).abs() < 1e-15);
        assert_eq!(dispersion(&p, PI), 2.0);
    }

    #[test]
    fn hand_assembled_small_case() {
        let p = SystemParams::resonant(1, 0.5).with_lattice(3, 0);
        let h = build_hamiltonian(&p).unwrap().to_dense();
        #[rustfmt::skip]
        let expect = DMatrix::from_row_slice(4, 4, &[
            0.0, -1.0, 0.0, 0.5,
            -1.0, 0.0, -1.0, 0.5,
            0.0, -1.0, 0.0, 0.0,
            0.5, 0.5, 0.0, 0.0,
        ]);
        assert_eq!(h, expect);
    }

    #[test]
    fn decoupled_limit_is_block_diagonal() {
        let p = SystemParams::resonant(4, 0.0).centered(30);
        let h = build_hamiltonian(&p).unwrap().to_dense();
        let ia = p.n_sites;
        for i in 0..p.n_sites {
            assert_eq!(h[(ia, i)], 0.0);
            assert_eq!(h[(i, ia)], 0.0);
        }
        assert_eq!(h[(ia, ia)], p.omega);
    }

    #[test]
    fn dense_is_symmetric_and_matches_apply() {
        let p = SystemParams::resonant(4, 0.3)
            .with_small_atom(0.2, 2)
            .centered(17);
        let h = build_hamiltonian(&p).unwrap();
        let d = h.to_dense();
        assert_eq!(d, d.transpose());
        let x: Vec<C64> = (0..h.dim())
            .map(|i| C64::new((i as f64).sin(), (0.3 * i as f64).cos()))
            .collect();
        let mut y = vec![C64::new(0.0, 0.0); h.dim()];
        h.apply(&x, &mut y);
        for i in 0..h.dim() {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..h.dim() {
                acc += x[j] * d[(i, j)];
            }
            assert!((acc - y[i]).norm() < 1e-14);
        }
        assert_eq!(d[(p.n_sites + 1, p.site_index(2).unwrap())], 0.2);
    }

    #[test]
    fn state_vector_round_trip() {
        let p = SystemParams::resonant(4, 0.1)
            .with_small_atom(0.1, 2)
            .centered(12);
        let s = SingleExcitationState::small_excited(&p).unwrap();
        let v = s.to_vector();
        assert_eq!(v.len(), 14);
        assert_eq!(v[13], C64::new(1.0, 0.0));
        assert_eq!(SingleExcitationState::from_vector(&p, &v).unwrap(), s);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-15);
    }
}
