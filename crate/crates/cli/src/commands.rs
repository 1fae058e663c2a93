use std::path::Path;
use std::time::Instant;

use gaqed_core::dynamics::{evolve, snapshot_heatmap, ObservableSpec};
use gaqed_core::markovian::{
    dark_state, detuning_grid, evolve_magic, evolve_single_ga, rabi_scan, AtomsDensityMatrix,
    MasterForm,
};
use gaqed_core::nonmarkov::{alpha_single, beta_profile, magic_amplitudes, MagicInitial};
use gaqed_core::spectral::{
    bic_boc_oscillation, bic_exists_single, bic_magic_cavity, bic_profile,
    bic_projection_population, boc_states, spectrum_vs_g, write_bound_states_csv,
};
use gaqed_core::timeseries::{fmt_num, uniform_grid};
use gaqed_core::{Error, SingleExcitationState};

use crate::config::Config;
use crate::output::{Artifacts, Manifest};
use crate::CliError;

const DEFAULT_ETA: f64 = 1e-3;
/// Minimal lattice for the bound-state prediction.
const BOUND_SITES: usize = 2001;

pub fn run(name: &str, config: Option<&Path>, sets: &[String], out: &Path) -> Result<(), CliError> {
    let start = Instant::now();
    let defaults: &[(&str, &str)] = match name {
        "spectrum" => &[("n", "6"), ("n_sites", "201")],
        "bound-states" => &[("n", "6"), ("g", "0.15"), ("n_sites", "2001")],
        _ => &[("n", "6"), ("g", "0.1")],
    };
    let mut cfg = Config::with_defaults(defaults);
    if let Some(path) = config {
        cfg.load_file(path)?;
    }
    cfg.apply_sets(sets)?;
    let mut art = Artifacts::default();
    let params = match name {
        "spectrum" => spectrum(cfg, &mut art)?,
        "bound-states" => bound_states(cfg, &mut art)?,
        "dynamics" => dynamics(cfg, &mut art)?,
        "magic" => magic(cfg, &mut art)?,
        other => unreachable!("unknown command {other}"),
    };
    for n in &art.notes {
        eprintln!("note: {n}");
    }
    let manifest = Manifest::new(name, params, &art, start.elapsed());
    art.write_all(out, &manifest)
}

type Resolved = std::collections::BTreeMap<String, String>;

fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..points)
            .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
            .collect(),
    }
}

fn spectrum(mut cfg: Config, art: &mut Artifacts) -> Result<Resolved, CliError> {
    let g_min = cfg.take_f64("g_min", 0.0)?;
    let g_max = cfg.take_f64("g_max", 0.5)?;
    let points: usize = cfg.take("g_points", 101)?;
    let (p, resolved) = cfg.into_params(0.0)?;
    let table = spectrum_vs_g(&p, &linspace(g_min, g_max, points))?;
    if table.bic.is_none() {
        art.note("no BIC branch for this leg separation");
    }
    art.add("spectrum.csv", |w| table.write_spectrum_csv(w))?;
    art.add("branches.csv", |w| table.write_branches_csv(w))?;
    Ok(resolved)
}

fn bound_states(mut cfg: Config, art: &mut Artifacts) -> Result<Resolved, CliError> {
    let margin: i64 = cfg.take("margin", 10)?;
    let (p, resolved) = cfg.into_params(0.0)?;
    let mut states = Vec::new();
    match boc_states(&p) {
        Ok((up, lo)) => states.extend([up, lo]),
        Err(Error::NoBoundState(why)) => art.note(format!("no BOC: {why}")),
        Err(e) => return Err(e.into()),
    }
    let bic = if p.small_atom.is_some() {
        bic_magic_cavity(&p)?
    } else if bic_exists_single(&p)? {
        Some(bic_profile(&p)?)
    } else {
        None
    };
    match bic {
        Some(s) => states.push(s),
        None => {
            println!("no BIC: the confinement condition fails for these legs");
            art.note("no BIC");
        }
    }
    let n = p.separation as i64;
    art.add("bound_states.csv", |w| {
        write_bound_states_csv(&states, -margin, n + margin, w)
    })?;
    Ok(resolved)
}

fn dynamics(mut cfg: Config, art: &mut Artifacts) -> Result<Resolved, CliError> {
    let t_max = cfg.take_f64("t_max", 50.0)?;
    let dt = cfg.take_f64("dt", 0.02)?;
    let sites = cfg.take_list("sites", &[1, 2, 3])?;
    let heat_dt = cfg.take_f64("heatmap_dt", 0.5)?;
    let threshold = cfg.take_f64("continuum_threshold", 0.5)?;
    if dt <= 0.0 || heat_dt <= 0.0 {
        return Err(CliError::Config(
            "`dt` and `heatmap_dt` must be positive".into(),
        ));
    }
    let (p, resolved) = cfg.into_params(t_max)?;
    if p.small_atom.is_some() {
        return Err(CliError::Config(
            "`dynamics` covers the single giant atom; use `magic` with a small atom".into(),
        ));
    }
    let grid = uniform_grid(t_max, dt);
    let psi = SingleExcitationState::giant_excited(&p);
    let spec = ObservableSpec {
        populations: true,
        amplitudes: true,
        sites: sites.clone(),
        invariants: true,
    };
    let exact = evolve(&p, &psi, &grid, &spec)?;
    art.add("exact.csv", |w| exact.write_csv(w))?;
    if p.is_resonant() {
        let markov = evolve_single_ga(&p, &AtomsDensityMatrix::single_excited(), &grid)?;
        art.add("markov.csv", |w| markov.write_csv(w))?;
        let mut ww = alpha_single(&p, &grid)?;
        ww.merge(beta_profile(&p, &grid, &sites)?, "")?;
        art.add("nonmarkov.csv", |w| ww.write_csv(w))?;
    } else {
        art.note("off resonance: Markovian and Weisskopf-Wigner runs skipped");
    }
    let heat = snapshot_heatmap(&p, &psi, &uniform_grid(t_max, heat_dt))?;
    art.add("heatmap.csv", |w| heat.write_csv(w))?;
    if p.is_resonant() && p.g > 0.0 && bic_exists_single(&p)? {
        // Bound states live on the infinite waveguide, not on the light-cone lattice.
        let bp = if p.n_sites >= BOUND_SITES {
            p.clone()
        } else {
            p.clone().centered(BOUND_SITES)
        };
        let psi = SingleExcitationState::giant_excited(&bp);
        let bound = bic_boc_oscillation(&bp, &psi, &grid, &sites, threshold)?;
        for warning in &bound.warnings {
            art.note(warning.clone());
        }
        art.add("bound_prediction.csv", |w| bound.write_csv(w))?;
    }
    Ok(resolved)
}

fn master_form(name: &str) -> Result<MasterForm, CliError> {
    MasterForm::ALL
        .into_iter()
        .find(|f| f.name() == name)
        .ok_or_else(|| {
            CliError::Config(format!(
                "unknown form `{name}` (literal, appendix, single_jump, paper_jump)"
            ))
        })
}

fn magic(mut cfg: Config, art: &mut Artifacts) -> Result<Resolved, CliError> {
    let t_max = cfg.take_f64("t_max", 200.0)?;
    let dt = cfg.take_f64("dt", 0.02)?;
    let initial: String = cfg.take("initial", "giant".to_string())?;
    let form = master_form(&cfg.take("form", "literal".to_string())?)?;
    let half_width = cfg.take_f64("delta_half_width", 0.05)?;
    let points: usize = cfg.take("delta_points", 201)?;
    if dt <= 0.0 {
        return Err(CliError::Config("`dt` must be positive".into()));
    }
    let (p, resolved) = cfg.into_params(t_max)?;
    p.small_atom_or_err("magic")?;
    let eta = p.drive.map_or(DEFAULT_ETA, |d| d.eta);
    let scan = rabi_scan(
        &p.clone().with_drive(eta, 0.0),
        &detuning_grid(half_width, points),
        form,
    )?;
    let ambiguous = scan.unique.iter().filter(|u| !**u).count();
    if ambiguous > 0 {
        art.note(format!(
            "steady state is not unique at {ambiguous} of {} detunings",
            scan.delta.len()
        ));
    }
    art.add("rabi_scan.csv", |w| scan.write_csv(w))?;

    let mut free = p.clone();
    free.drive = None;
    let grid = uniform_grid(t_max, dt);
    let (psi, rho0, init) = match initial.as_str() {
        "giant" => (
            SingleExcitationState::giant_excited(&free),
            AtomsDensityMatrix::giant_excited(),
            MagicInitial::Giant,
        ),
        "small" => (
            SingleExcitationState::small_excited(&free)?,
            AtomsDensityMatrix::small_excited(),
            MagicInitial::Small,
        ),
        other => {
            return Err(CliError::Config(format!(
                "`initial` must be giant or small, got `{other}`"
            )))
        }
    };
    let exact = evolve(&free, &psi, &grid, &ObservableSpec::default())?;
    art.add("magic_exact.csv", |w| exact.write_csv(w))?;
    let markov = evolve_magic(&free, &rho0, &grid, form)?;
    for warning in &markov.warnings {
        art.note(warning.clone());
    }
    art.add("magic_markov.csv", |w| markov.write_csv(w))?;
    let nm = magic_amplitudes(&free, &grid, init)?;
    art.add("magic_nonmarkov.csv", |w| nm.write_csv(w))?;

    if let Ok(dark) = dark_state(&free) {
        let projection = match bic_projection_population(&free) {
            Ok(v) => Some(v),
            Err(Error::NoBoundState(_)) => None,
            Err(e) => return Err(e.into()),
        };
        art.add("dark_state.csv", |w| {
            use std::io::Write;
            writeln!(w, "quantity,value")?;
            writeln!(w, "c_g,{}", fmt_num(dark.c_g))?;
            writeln!(w, "c_s,{}", fmt_num(dark.c_s))?;
            writeln!(w, "plateau,{}", fmt_num(dark.plateau))?;
            if let Some(v) = projection {
                writeln!(w, "bic_projection,{}", fmt_num(v))?;
            }
            Ok(())
        })?;
    }
    Ok(resolved)
}
