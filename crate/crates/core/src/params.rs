//! Physical parameters and lattice sizing.
//!
//! Energies are in units of the hopping `xi`, times in units of `1/xi`.
//! Physical site `j` (legs at `0` and `N`) lives at array index
//! `origin_offset + j` of a chain of `n_sites` resonators with open ends.
//!
//! The flat key/value schema used by config files is:
//!
//! | key             | field                    | units / type        |
//! |-----------------|--------------------------|---------------------|
//! | `omega_c`       | resonator frequency      | xi                  |
//! | `omega`         | atomic frequency         | xi                  |
//! | `xi`            | hopping                  | energy unit, > 0    |
//! | `g`             | giant-atom coupling      | xi                  |
//! | `n`             | leg separation N         | integer >= 1        |
//! | `g_s`           | small-atom coupling      | xi                  |
//! | `m`             | small-atom site M        | integer, 0 < M < N  |
//! | `eta`           | drive amplitude          | xi                  |
//! | `delta`         | drive detuning           | xi                  |
//! | `n_sites`       | lattice length N_c       | integer > N         |
//! | `origin_offset` | array index of site 0    | integer             |

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sites kept beyond the light cone on each side by the minimal sizing rule.
pub const MIN_BUFFER_PER_SIDE: usize = 20;

/// Tolerance on `|omega - omega_c|` for the resonant case.
pub const RESONANCE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmallAtom {
    pub g_s: f64,
    /// Physical site `M` the small atom couples to.
    pub site: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Drive {
    pub eta: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub omega_c: f64,
    pub omega: f64,
    pub xi: f64,
    pub g: f64,
    /// Leg separation `N`; the legs sit on physical sites `0` and `N`.
    pub separation: usize,
    pub small_atom: Option<SmallAtom>,
    pub drive: Option<Drive>,
    pub n_sites: usize,
    pub origin_offset: usize,
}

impl SystemParams {
    /// Resonant giant atom (`omega = omega_c = 0`, `xi = 1`) on a lattice
    /// sized for a horizon of `50 / xi`.
    pub fn resonant(separation: usize, g: f64) -> Self {
        let mut p = SystemParams {
            omega_c: 0.0,
            omega: 0.0,
            xi: 1.0,
            g,
            separation,
            small_atom: None,
            drive: None,
            n_sites: 0,
            origin_offset: 0,
        };
        p.resize_for_horizon(50.0);
        p
    }

    pub fn with_small_atom(mut self, g_s: f64, site: usize) -> Self {
        self.small_atom = Some(SmallAtom { g_s, site });
        self
    }

    pub fn with_drive(mut self, eta: f64, delta: f64) -> Self {
        self.drive = Some(Drive { eta, delta });
        self
    }

    pub fn with_coupling(mut self, g: f64) -> Self {
        self.g = g;
        self
    }

    /// Explicit lattice length and position of physical site 0.
    pub fn with_lattice(mut self, n_sites: usize, origin_offset: usize) -> Self {
        self.n_sites = n_sites;
        self.origin_offset = origin_offset;
        self
    }

    /// Lattice of `n_sites` with the legs centred.
    pub fn centered(mut self, n_sites: usize) -> Self {
        self.n_sites = n_sites;
        self.origin_offset = n_sites.saturating_sub(self.separation) / 2;
        self
    }

    /// Auto-size the lattice so the light cone of a run up to `horizon`
    /// never reaches the outermost sites.
    pub fn sized_for_horizon(mut self, horizon: f64) -> Self {
        self.resize_for_horizon(horizon);
        self
    }

    fn resize_for_horizon(&mut self, horizon: f64) {
        let side = self.light_cone_reach(horizon) + horizon_buffer(self.xi, horizon);
        self.n_sites = self.separation + 1 + 2 * side;
        self.origin_offset = side;
    }

    /// Number of sites a wavefront travels in time `horizon` at the maximal
    /// group velocity `2 xi`.
    pub fn light_cone_reach(&self, horizon: f64) -> usize {
        (2.0 * self.xi * horizon.max(0.0)).ceil() as usize
    }

    /// Minimal lattice length for `horizon`: `N + 2 ceil(2 xi T) + 40`.
    pub fn required_sites(&self, horizon: f64) -> usize {
        self.separation + 2 * self.light_cone_reach(horizon) + 2 * MIN_BUFFER_PER_SIDE
    }

    /// Rejects lattices where either side of the legs is closer to the edge
    /// than the light cone plus the minimal buffer.
    pub fn check_horizon(&self, horizon: f64) -> Result<()> {
        let required = self.light_cone_reach(horizon) + MIN_BUFFER_PER_SIDE;
        let left = self.origin_offset;
        let right = self
            .n_sites
            .saturating_sub(self.origin_offset + self.separation + 1);
        let available = left.min(right);
        if available < required || self.n_sites < self.required_sites(horizon) {
            return Err(Error::LightCone {
                horizon,
                required,
                available,
            });
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("omega_c", self.omega_c),
            ("omega", self.omega),
            ("xi", self.xi),
            ("g", self.g),
        ];
        for (field, v) in finite {
            if !v.is_finite() {
                return Err(Error::InvalidParam {
                    field,
                    reason: format!("{v} is not finite"),
                });
            }
        }
        if self.xi <= 0.0 {
            return Err(invalid("xi", format!("must be positive, got {}", self.xi)));
        }
        if self.g < 0.0 {
            return Err(invalid(
                "g",
                format!("must be non-negative, got {}", self.g),
            ));
        }
        if self.separation < 1 {
            return Err(invalid("n", "leg separation must be at least 1".into()));
        }
        if self.n_sites <= self.separation {
            return Err(invalid(
                "n_sites",
                format!(
                    "must exceed the leg separation {}, got {}",
                    self.separation, self.n_sites
                ),
            ));
        }
        if self.origin_offset + self.separation >= self.n_sites {
            return Err(invalid(
                "origin_offset",
                format!(
                    "legs at indices {} and {} do not fit in {} sites",
                    self.origin_offset,
                    self.origin_offset + self.separation,
                    self.n_sites
                ),
            ));
        }
        if let Some(s) = self.small_atom {
            if !(s.g_s.is_finite() && s.g_s >= 0.0) {
                return Err(invalid(
                    "g_s",
                    format!("must be finite and non-negative, got {}", s.g_s),
                ));
            }
            if s.site == 0 || s.site >= self.separation {
                return Err(invalid(
                    "m",
                    format!(
                        "small atom must sit strictly between the legs (0 < M < {}), got {}",
                        self.separation, s.site
                    ),
                ));
            }
        }
        if let Some(d) = self.drive {
            if !(d.eta.is_finite() && d.delta.is_finite()) {
                return Err(invalid("eta", "drive parameters must be finite".into()));
            }
        }
        Ok(())
    }

    pub fn is_resonant(&self) -> bool {
        (self.omega - self.omega_c).abs() <= RESONANCE_TOL * self.xi
    }

    /// Wavenumber `K` of the band mode resonant with the atom,
    /// `omega = omega_c - 2 xi cos K`, if the atom lies inside the band.
    pub fn resonant_wavenumber(&self) -> Option<f64> {
        let c = (self.omega_c - self.omega) / (2.0 * self.xi);
        (c.abs() <= 1.0).then(|| c.acos())
    }

    /// Array index of physical site `j`.
    pub fn site_index(&self, j: i64) -> Option<usize> {
        let idx = self.origin_offset as i64 + j;
        (0..self.n_sites as i64)
            .contains(&idx)
            .then_some(idx as usize)
    }

    /// Physical label of array index `idx`.
    pub fn site_label(&self, idx: usize) -> i64 {
        idx as i64 - self.origin_offset as i64
    }

    pub fn small_atom_or_err(&self, what: &'static str) -> Result<SmallAtom> {
        self.small_atom.ok_or(Error::MissingSmallAtom(what))
    }

    /// Build parameters from flat `key = value` pairs. Keys not in the
    /// schema are rejected. Without `n_sites` the lattice is auto-sized for
    /// `horizon`; an explicit `n_sites` without `origin_offset` is centred.
    pub fn from_pairs<I, K, V>(pairs: I, horizon: f64) -> Result<Self>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        let mut p = SystemParams::resonant(6, 0.1);
        let (mut g_s, mut m, mut eta, mut delta) = (None, None, None, None);
        let (mut n_sites, mut offset) = (None, None);
        for (k, v) in pairs {
            let (k, v) = (k.as_ref(), v.as_ref().trim());
            match k {
                "omega_c" => p.omega_c = parse_f64("omega_c", v)?,
                "omega" => p.omega = parse_f64("omega", v)?,
                "xi" => p.xi = parse_f64("xi", v)?,
                "g" => p.g = parse_f64("g", v)?,
                "n" => p.separation = parse_usize("n", v)?,
                "g_s" => g_s = Some(parse_f64("g_s", v)?),
                "m" => m = Some(parse_usize("m", v)?),
                "eta" => eta = Some(parse_f64("eta", v)?),
                "delta" => delta = Some(parse_f64("delta", v)?),
                "n_sites" => n_sites = Some(parse_usize("n_sites", v)?),
                "origin_offset" => offset = Some(parse_usize("origin_offset", v)?),
                other => return Err(Error::UnknownParam(other.to_string())),
            }
        }
        p.small_atom = match (g_s, m) {
            (Some(g_s), Some(site)) => Some(SmallAtom { g_s, site }),
            (None, None) => None,
            (Some(_), None) => return Err(invalid("m", "`g_s` given without `m`".into())),
            (None, Some(_)) => return Err(invalid("g_s", "`m` given without `g_s`".into())),
        };
        p.drive = match (eta, delta) {
            (None, None) => None,
            (eta, delta) => Some(Drive {
                eta: eta.unwrap_or(0.0),
                delta: delta.unwrap_or(0.0),
            }),
        };
        match (n_sites, offset) {
            (None, None) => p.resize_for_horizon(horizon),
            (Some(n), None) => p = p.centered(n),
            (Some(n), Some(o)) => p = p.with_lattice(n, o),
            (None, Some(_)) => {
                return Err(invalid(
                    "origin_offset",
                    "`origin_offset` requires `n_sites`".into(),
                ))
            }
        }
        p.validate()?;
        Ok(p)
    }

    /// Flat key/value view, the inverse of [`SystemParams::from_pairs`].
    /// Floats use the shortest representation that round-trips exactly.
    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        let mut out = vec![
            ("omega_c", self.omega_c.to_string()),
            ("omega", self.omega.to_string()),
            ("xi", self.xi.to_string()),
            ("g", self.g.to_string()),
            ("n", self.separation.to_string()),
        ];
        if let Some(s) = self.small_atom {
            out.push(("g_s", s.g_s.to_string()));
            out.push(("m", s.site.to_string()));
        }
        if let Some(d) = self.drive {
            out.push(("eta", d.eta.to_string()));
            out.push(("delta", d.delta.to_string()));
        }
        out.push(("n_sites", self.n_sites.to_string()));
        out.push(("origin_offset", self.origin_offset.to_string()));
        out
    }
}

/// Extra sites per side beyond the light cone used by auto-sizing. The
/// wavefront of the hopping chain has an Airy tail of width
/// `~ (xi t)^(1/3)`, so the buffer grows slowly with the horizon.
pub fn horizon_buffer(xi: f64, horizon: f64) -> usize {
    MIN_BUFFER_PER_SIDE + (6.0 * (xi * horizon.max(0.0)).cbrt()).ceil() as usize
}

fn invalid(field: &'static str, reason: String) -> Error {
    Error::InvalidParam { field, reason }
}

pub(crate) fn parse_f64(field: &'static str, v: &str) -> Result<f64> {
    v.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| invalid(field, format!("expected a finite number, got `{v}`")))
}

pub(crate) fn parse_usize(field: &'static str, v: &str) -> Result<usize> {
    v.parse::<usize>()
        .map_err(|_| invalid(field, format!("expected a non-negative integer, got `{v}`")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resonant_defaults_are_valid() {
        let p = SystemParams::resonant(6, 0.1);
        p.validate().unwrap();
        assert!(p.is_resonant());
        assert!((p.resonant_wavenumber().unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        p.check_horizon(50.0).unwrap();
    }

    #[test]
    fn light_cone_rule_rejects_short_lattices() {
        let p = SystemParams::resonant(4, 0.1).centered(100);
        assert!(matches!(
            p.check_horizon(50.0),
            Err(Error::LightCone { .. })
        ));
        let p = p.sized_for_horizon(50.0);
        assert!(p.n_sites >= p.required_sites(50.0));
        p.check_horizon(50.0).unwrap();
    }

    #[test]
    fn invariants_are_enforced() {
        let base = SystemParams::resonant(4, 0.1);
        assert!(base.clone().with_coupling(-0.1).validate().is_err());
        assert!(base.clone().with_small_atom(0.1, 0).validate().is_err());
        assert!(base.clone().with_small_atom(0.1, 4).validate().is_err());
        assert!(base.clone().with_small_atom(0.1, 2).validate().is_ok());
        assert!(base.clone().with_lattice(4, 0).validate().is_err());
        let mut bad = base.clone();
        bad.xi = 0.0;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn flat_pairs_round_trip() {
        let p = SystemParams::resonant(4, 0.1)
            .with_small_atom(0.1, 2)
            .with_drive(1e-3, -0.0125)
            .with_lattice(301, 148);
        let back = SystemParams::from_pairs(p.to_pairs(), 0.0).unwrap();
        assert_eq!(p, back);
    }

    #[test]
    fn flat_pairs_reject_bad_input() {
        assert!(matches!(
            SystemParams::from_pairs([("bogus", "1")], 10.0),
            Err(Error::UnknownParam(_))
        ));
        assert!(SystemParams::from_pairs([("g_s", "0.1")], 10.0).is_err());
        assert!(SystemParams::from_pairs([("n", "six")], 10.0).is_err());
        assert!(SystemParams::from_pairs([("g", "nan")], 10.0).is_err());
    }

    #[test]
    fn site_mapping() {
        let p = SystemParams::resonant(6, 0.1).with_lattice(20, 5);
        assert_eq!(p.site_index(0), Some(5));
        assert_eq!(p.site_index(-5), Some(0));
        assert_eq!(p.site_index(-6), None);
        assert_eq!(p.site_index(14), Some(19));
        assert_eq!(p.site_index(15), None);
        assert_eq!(p.site_label(11), 6);
    }
}
