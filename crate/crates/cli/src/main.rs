//! `gaqed`: spectra, bound states, emission dynamics and magic-cavity runs
//! of a two-leg giant atom, written as CSV plus a JSON manifest.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

const SCHEMA: &str = "\
Configuration is a flat TOML file of `key = value` pairs (or a manifest.json
from an earlier run). `--set key=value` overrides the file. Physics keys,
energies in units of xi and times in units of 1/xi:

  omega_c, omega, xi, g     cavity and atom frequencies, hopping, coupling
  n                         leg separation N (legs at sites 0 and N)
  g_s, m                    small atom coupling and site (0 < m < n)
  eta, delta                drive amplitude and detuning
  n_sites, origin_offset    lattice length and array index of site 0
                            (auto-sized for the run horizon when omitted)";

#[derive(Parser)]
#[command(name = "gaqed", version, about = "Giant-atom waveguide QED toolkit", after_help = SCHEMA)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Flat TOML config or a previous run's manifest.json.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override one key (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Lattice spectrum and bound-state branches against g.
    #[command(after_help = "\
Run keys: g_min = 0, g_max = 0.5, g_points = 101 (defaults n = 6, n_sites = 201).

spectrum.csv  g,index,energy           full lattice spectrum per g
branches.csv  g,e_upper,e_lower[,e_bic] self-energy BOC roots (NaN where a branch
                                       does not exist) and the confined eigenvalue
                                       when a BIC exists")]
    Spectrum(Common),
    /// BIC and BOC profiles.
    #[command(after_help = "\
Run keys: margin = 10 sites on either side of the legs (defaults n = 6,
g = 0.15, n_sites = 2001).

bound_states.csv  kind,energy,c_atom_g_re,c_atom_g_im,site,d_re,d_im,c_atom_s_re,c_atom_s_im
                  one row per state and site; kind is BOC_upper, BOC_lower or BIC")]
    BoundStates(Common),
    /// Single giant atom: exact, Markovian and Weisskopf-Wigner evolution.
    #[command(after_help = "\
Run keys: t_max = 50, dt = 0.02, sites = [1, 2, 3], heatmap_dt = 0.5,
continuum_threshold = 0.5 (defaults n = 6, g = 0.1).

exact.csv             t,p_e,alpha_g_re,alpha_g_im,site_<j>...,norm,energy,edge_weight
markov.csv            t,p_e,p_e_analytic,rho_eg_re,rho_eg_im,rho_eg_analytic_re,rho_eg_analytic_im
nonmarkov.csv         t,alpha_re,alpha_im,p_e,d_re,d_im,beta_<j>_re,beta_<j>_im...,site_<j>...
heatmap.csv           t,j,population
bound_prediction.csv  t,p_e_beat,p_e_bound,beat_residual,site_<j>...  (when a BIC exists)")]
    Dynamics(Common),
    /// Giant atom plus small atom: Rabi scan and time evolution.
    #[command(after_help = "\
Requires g_s and m. Run keys: t_max = 200, dt = 0.02, initial = giant|small,
form = literal|appendix|single_jump|paper_jump, delta_half_width = 0.05,
delta_points = 201. The scan uses eta (default 1e-3); time evolution is undriven.

rabi_scan.csv        delta,p_g,p_s,unique
magic_exact.csv      t,p_e,p_tau,norm,energy,edge_weight
magic_markov.csv     t,p_g,p_s,coh_gs_re,coh_gs_im,min_eig
magic_nonmarkov.csv  t,alpha_g_re,alpha_g_im,alpha_s_re,alpha_s_im,p_g,p_s
dark_state.csv       quantity,value  (when the single-jump form applies)")]
    Magic(Common),
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
    Io(String),
}

impl From<gaqed_core::Error> for CliError {
    fn from(e: gaqed_core::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, common) = match &cli.command {
        Command::Spectrum(c) => ("spectrum", c),
        Command::BoundStates(c) => ("bound-states", c),
        Command::Dynamics(c) => ("dynamics", c),
        Command::Magic(c) => ("magic", c),
    };
    match commands::run(name, common.config.as_deref(), &common.set, &common.out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Numerical(m) => eprintln!("numerical failure: {m}"),
                CliError::Config(m) | CliError::Io(m) => eprintln!("error: {m}"),
            }
            ExitCode::from(e.code())
        }
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use gaqed_core::Error;

    #[test]
    fn core_errors_map_to_exit_codes() {
        let numerical = [
            Error::NormDrift {
                drift: 1e-6,
                tolerance: 1e-9,
            },
            Error::Disagreement {
                what: "x",
                diff: 1.0,
                tolerance: 0.1,
            },
            Error::NoConvergence("x"),
        ];
        for e in numerical {
            assert_eq!(CliError::from(e).code(), 3);
        }
        let config = [
            Error::MissingSmallAtom("magic"),
            Error::UnknownParam("foo".into()),
            Error::LightCone {
                horizon: 1.0,
                required: 2,
                available: 1,
            },
        ];
        for e in config {
            assert_eq!(CliError::from(e).code(), 2);
        }
    }
}
