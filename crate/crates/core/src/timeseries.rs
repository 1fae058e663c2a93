//! Time-indexed observable tables and their CSV form.
//!
//! Every number is written as `{:.14e}` (15 significant digits) so output
//! is byte-stable across runs.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

/// Slack allowed above 1 for population columns.
pub const POPULATION_SLACK: f64 = 1e-9;

pub fn fmt_num(v: f64) -> String {
    format!("{v:.14e}")
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub columns: Vec<(String, Vec<f64>)>,
    /// Diagnostics raised while producing the series.
    pub warnings: Vec<String>,
}

impl TimeSeries {
    pub fn new(times: Vec<f64>) -> Self {
        TimeSeries {
            times,
            columns: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn push(&mut self, name: impl Into<String>, values: Vec<f64>) -> Result<()> {
        let name = name.into();
        if values.len() != self.times.len() {
            return Err(Error::InvalidParam {
                field: "column",
                reason: format!(
                    "column `{name}` has {} rows, grid has {}",
                    values.len(),
                    self.times.len()
                ),
            });
        }
        if self.column(&name).is_some() {
            return Err(Error::InvalidParam {
                field: "column",
                reason: format!("duplicate column `{name}`"),
            });
        }
        self.columns.push((name, values));
        Ok(())
    }

    /// Adds `<name>_re` and `<name>_im`.
    pub fn push_complex(&mut self, name: &str, values: &[C64]) -> Result<()> {
        self.push(format!("{name}_re"), values.iter().map(|v| v.re).collect())?;
        self.push(format!("{name}_im"), values.iter().map(|v| v.im).collect())
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|(n, _)| n.as_str())
    }

    /// Appends every column of `other`, which must share the time grid.
    pub fn merge(&mut self, other: TimeSeries, prefix: &str) -> Result<()> {
        if other.times != self.times {
            return Err(Error::BadGrid(
                "merged series use different time grids".into(),
            ));
        }
        for (n, v) in other.columns {
            self.push(format!("{prefix}{n}"), v)?;
        }
        self.warnings.extend(other.warnings);
        Ok(())
    }

    /// Checks that the named population columns lie in `[0, 1 + 1e-9]`.
    pub fn check_populations<'a>(&self, names: impl IntoIterator<Item = &'a str>) -> Result<()> {
        for name in names {
            let col = self
                .column(name)
                .ok_or_else(|| Error::Unsupported(format!("no column `{name}`")))?;
            if let Some(&v) = col
                .iter()
                .find(|&&v| !(-POPULATION_SLACK..=1.0 + POPULATION_SLACK).contains(&v))
            {
                return Err(Error::Disagreement {
                    what: "population bound",
                    diff: v,
                    tolerance: POPULATION_SLACK,
                });
            }
        }
        Ok(())
    }

    /// Header `t,<columns...>` then one row per time.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let mut header = String::from("t");
        for name in self.names() {
            header.push(',');
            header.push_str(name);
        }
        writeln!(w, "{header}")?;
        for (i, t) in self.times.iter().enumerate() {
            let mut line = fmt_num(*t);
            for (_, col) in &self.columns {
                line.push(',');
                line.push_str(&fmt_num(col[i]));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

/// Site-by-time photon populations `|beta_j(t)|^2`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Heatmap {
    pub times: Vec<f64>,
    /// Physical site labels.
    pub sites: Vec<i64>,
    /// `values[t][s]`.
    pub values: Vec<Vec<f64>>,
}

impl Heatmap {
    pub fn at(&self, time_index: usize, site: i64) -> Option<f64> {
        let s = self.sites.iter().position(|&j| j == site)?;
        self.values.get(time_index).map(|row| row[s])
    }

    /// Long format: `t,j,population`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,j,population")?;
        for (t, row) in self.times.iter().zip(&self.values) {
            for (j, v) in self.sites.iter().zip(row) {
                writeln!(w, "{},{j},{}", fmt_num(*t), fmt_num(*v))?;
            }
        }
        Ok(())
    }
}

/// Checks a time grid is finite, starts at `t >= 0` and is strictly
/// ascending.
pub fn check_grid(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::BadGrid("non-finite time".into()));
    }
    if times.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::BadGrid("negative time".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::BadGrid("times must be strictly ascending".into()));
    }
    Ok(())
}

/// `n + 1` equally spaced points on `[0, t_max]`; `t_max = 0` gives the
/// empty grid.
pub fn uniform_grid(t_max: f64, step: f64) -> Vec<f64> {
    if t_max <= 0.0 {
        return Vec::new();
    }
    let n = (t_max / step).round().max(1.0) as usize;
    (0..=n).map(|i| t_max * i as f64 / n as f64).collect()
}

/// Angular frequency in `[w_lo, w_hi]` maximising the Hann-windowed
/// Fourier amplitude of `values - mean(values)`.
pub fn dominant_frequency(times: &[f64], values: &[f64], w_lo: f64, w_hi: f64) -> f64 {
    let n = times.len();
    assert!(
        n >= 3 && values.len() == n && w_hi > w_lo,
        "dominant_frequency needs a grid and a band"
    );
    let mean = values.iter().sum::<f64>() / n as f64;
    let (t0, span) = (times[0], times[n - 1] - times[0]);
    let windowed: Vec<f64> = times
        .iter()
        .zip(values)
        .map(|(&t, &v)| (v - mean) * (std::f64::consts::PI * (t - t0) / span).sin().powi(2))
        .collect();
    let amp = |w: f64| {
        let s: C64 = times
            .iter()
            .zip(&windowed)
            .map(|(&t, &v)| C64::from_polar(v, -w * t))
            .sum();
        s.norm()
    };
    let scan = 4000;
    let step = (w_hi - w_lo) / scan as f64;
    let best = (0..=scan)
        .map(|k| w_lo + k as f64 * step)
        .max_by(|a, b| amp(*a).total_cmp(&amp(*b)))
        .expect("non-empty scan");
    // Golden-section refinement inside the neighbouring scan cells.
    let (mut a, mut b) = ((best - step).max(w_lo), (best + step).min(w_hi));
    let r = 0.5 * (5f64.sqrt() - 1.0);
    while b - a > 1e-12 * best.abs().max(1.0) {
        let (c, d) = (b - r * (b - a), a + r * (b - a));
        if amp(c) > amp(d) {
            b = d;
        } else {
            a = c;
        }
    }
    0.5 * (a + b)
}
