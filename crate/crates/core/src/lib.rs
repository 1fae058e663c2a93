//! Bound states, emission dynamics and magic-cavity QED of a two-leg giant
//! atom coupled to a coupled-resonator waveguide (CRW).
//!
//! The waveguide is a tight-binding chain with on-site frequency `omega_c`
//! and hopping `xi`; the giant atom (frequency `omega`) couples with strength
//! `g` to the physical sites `0` and `N`. An optional small atom couples with
//! strength `g_s` to site `M` (`0 < M < N`). All energies are measured in
//! units of `xi` and times in units of `1/xi`.
//!
//! The crate is organised by method:
//!
//! - [`params`] and [`lattice`]: physical parameters, dispersion and the
//!   single-excitation Hamiltonian on a truncated lattice.
//! - [`spectral`]: bound states outside the continuum (BOC) from the
//!   transcendental self-energy equation, bound states in the continuum (BIC),
//!   and the BIC–BOC beating predictor.
//! - [`dynamics`]: exact unitary evolution on the truncated lattice, the
//!   oracle every approximate solver is judged against.
//! - [`markovian`]: Lindblad master equations for the single giant atom and
//!   the driven giant + small atom model, dark states and steady states.
//! - [`nonmarkov`]: Weisskopf–Wigner amplitude dynamics with Bessel memory
//!   kernels.
//! - [`special`]: integer-order Bessel functions and their running integrals.

pub mod dynamics;
pub mod eigen;
pub mod error;
pub mod lattice;
pub mod markovian;
pub mod nonmarkov;
pub mod ode;
pub mod params;
pub mod quad;
pub mod roots;
pub mod special;
pub mod spectral;
pub mod timeseries;

pub use num_complex::Complex64 as C64;

pub use error::{Error, Result};
pub use lattice::{build_hamiltonian, dispersion, Hamiltonian, SingleExcitationState};
pub use params::{Drive, SmallAtom, SystemParams};
pub use spectral::{BoundKind, BoundState, OverlapSet};
pub use timeseries::{Heatmap, TimeSeries};

/// `i^n` for any integer `n`, exact in floating point.
pub fn i_pow(n: i64) -> C64 {
    match n.rem_euclid(4) {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn i_pow_cycles() {
        assert_eq!(i_pow(0), C64::new(1.0, 0.0));
        assert_eq!(i_pow(5), C64::new(0.0, 1.0));
        assert_eq!(i_pow(-1), C64::new(0.0, -1.0));
        assert_eq!(i_pow(-6), C64::new(-1.0, 0.0));
    }
}
