//! Eigensolvers for the bordered chain Hamiltonian.
//!
//! `H = [[T, C], [C^T, W]]` with `T` the open tight-binding chain, `C` the
//! sparse atom-site couplings and `W` the diagonal atomic energies. For a
//! shift `s` with `T - s` nonsingular, Haynsworth inertia additivity gives
//!
//! ```text
//! #eig(H) < s  =  #neg(T - s) + #neg(S(s)),   S(s) = W - s - C^T (T - s)^{-1} C
//! ```
//!
//! so eigenvalues outside the band are found by bisection in `O(N_c)` per
//! step, and the eigenvector follows from `x = -(T - E)^{-1} C a` with
//! `S(E) a = 0`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::lattice::Hamiltonian;
use crate::roots::bisect_count;

/// LDL^T pivots of `T - s`, with exact zeros nudged off zero.
fn pivots(h: &Hamiltonian, s: f64) -> Vec<f64> {
    let a = h.onsite() - s;
    let b2 = h.hopping() * h.hopping();
    let mut d = Vec::with_capacity(h.n_sites());
    let mut prev = a;
    d.push(nudge(prev));
    for _ in 1..h.n_sites() {
        prev = a - b2 / d[d.len() - 1];
        d.push(nudge(prev));
    }
    d
}

fn nudge(v: f64) -> f64 {
    if v == 0.0 {
        f64::EPSILON * f64::EPSILON
    } else {
        v
    }
}

/// Solves `(T - s) x = r` from the pivots of `T - s`.
fn solve_shifted(h: &Hamiltonian, d: &[f64], r: &[f64]) -> Vec<f64> {
    let n = d.len();
    let b = -h.hopping();
    let mut y = r.to_vec();
    for i in 1..n {
        y[i] -= b / d[i - 1] * y[i - 1];
    }
    for i in 0..n {
        y[i] /= d[i];
    }
    for i in (0..n.saturating_sub(1)).rev() {
        y[i] -= b / d[i] * y[i + 1];
    }
    y
}

fn coupling_column(h: &Hamiltonian, a: usize) -> Vec<f64> {
    let mut c = vec![0.0; h.n_sites()];
    for &(s, g) in &h.atoms()[a].couplings {
        c[s] += g;
    }
    c
}

/// Schur complement `S(s)` and the columns `(T - s)^{-1} C`.
fn schur(h: &Hamiltonian, s: f64, d: &[f64]) -> (DMatrix<f64>, Vec<Vec<f64>>) {
    let p = h.atoms().len();
    let w: Vec<Vec<f64>> = (0..p)
        .map(|a| solve_shifted(h, d, &coupling_column(h, a)))
        .collect();
    let mut m = DMatrix::zeros(p, p);
    for a in 0..p {
        for b in 0..p {
            let cw: f64 = h.atoms()[a]
                .couplings
                .iter()
                .map(|&(site, g)| g * w[b][site])
                .sum();
            m[(a, b)] = -cw;
        }
        m[(a, a)] += h.atoms()[a].energy - s;
    }
    (m, w)
}

/// Number of eigenvalues of `h` strictly below `s`.
pub fn count_below(h: &Hamiltonian, s: f64) -> usize {
    let d = pivots(h, s);
    let chain = d.iter().filter(|&&v| v < 0.0).count();
    if h.atoms().is_empty() {
        return chain;
    }
    let (m, _) = schur(h, s, &d);
    let atoms = SymmetricEigen::new(m)
        .eigenvalues
        .iter()
        .filter(|&&v| v < 0.0)
        .count();
    chain + atoms
}

/// An eigenpair with the vector in the Hamiltonian's basis order.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub energy: f64,
    pub vector: Vec<f64>,
}

/// The largest (`upper`) or smallest eigenpair when it lies outside the
/// band `[onsite - 2 xi, onsite + 2 xi]`.
pub fn out_of_band(h: &Hamiltonian, upper: bool) -> Result<EigenPair> {
    let dim = h.dim();
    let edge = 2.0 * h.hopping().abs();
    let bound = h.norm_bound() + 1.0;
    let tol = 4.0 * f64::EPSILON * bound;
    let energy = if upper {
        let lo = h.onsite() + edge;
        if count_below(h, lo) >= dim {
            return Err(Error::NoBoundState("no eigenvalue above the band"));
        }
        bisect_count(|s| count_below(h, s), dim - 1, lo, bound, tol)
    } else {
        let hi = h.onsite() - edge;
        if count_below(h, hi) == 0 {
            return Err(Error::NoBoundState("no eigenvalue below the band"));
        }
        bisect_count(|s| count_below(h, s), 0, -bound, hi, tol)
    };
    Ok(EigenPair {
        energy,
        vector: bordered_vector(h, energy),
    })
}

/// Normalised eigenvector for an eigenvalue `e` outside the band.
fn bordered_vector(h: &Hamiltonian, e: f64) -> Vec<f64> {
    let d = pivots(h, e);
    let (m, w) = schur(h, e, &d);
    let eig = SymmetricEigen::new(m);
    let k = (0..eig.eigenvalues.len())
        .min_by(|&i, &j| {
            eig.eigenvalues[i]
                .abs()
                .total_cmp(&eig.eigenvalues[j].abs())
        })
        .expect("at least one atom");
    let a = eig.eigenvectors.column(k);
    let n = h.n_sites();
    let mut v = vec![0.0; h.dim()];
    for (b, wb) in w.iter().enumerate() {
        for i in 0..n {
            v[i] -= wb[i] * a[b];
        }
        v[n + b] = a[b];
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    v
}

/// Full spectrum in ascending order with matching eigenvector columns.
pub fn dense_eigen(h: &Hamiltonian) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(h.to_dense());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(h.dim(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

/// Eigenvalues only, ascending.
pub fn dense_spectrum(h: &Hamiltonian) -> Vec<f64> {
    let mut v: Vec<f64> = h
        .to_dense()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Confined eigenvector near `target`.
#[derive(Debug, Clone)]
pub struct Confined {
    pub energy: f64,
    pub vector: DVector<f64>,
    /// Weight on the excluded basis indices.
    pub leakage: f64,
}

/// Among eigenvectors with `|E - target| < window`, the combination with the
/// least weight on `outside` (basis indices). Degenerate clusters are
/// resolved by minimising that weight within the cluster.
pub fn confined_near(
    vals: &[f64],
    vecs: &DMatrix<f64>,
    target: f64,
    window: f64,
    outside: &[usize],
) -> Option<Confined> {
    let cluster: Vec<usize> = (0..vals.len())
        .filter(|&i| (vals[i] - target).abs() < window)
        .collect();
    if cluster.is_empty() {
        return None;
    }
    let k = cluster.len();
    let mut w = DMatrix::zeros(k, k);
    for (a, &i) in cluster.iter().enumerate() {
        for (b, &j) in cluster.iter().enumerate() {
            w[(a, b)] = outside
                .iter()
                .map(|&r| vecs[(r, i)] * vecs[(r, j)])
                .sum::<f64>();
        }
    }
    let eig = SymmetricEigen::new(w);
    let best = (0..k).min_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]))?;
    let u = eig.eigenvectors.column(best);
    let mut v = DVector::zeros(vecs.nrows());
    let mut energy = 0.0;
    for (a, &i) in cluster.iter().enumerate() {
        v += vecs.column(i) * u[a];
        energy += vals[i] * u[a] * u[a];
    }
    let norm = v.norm();
    v /= norm;
    let leakage = outside.iter().map(|&r| v[r] * v[r]).sum();
    Some(Confined {
        energy,
        vector: v,
        leakage,
    })
}
