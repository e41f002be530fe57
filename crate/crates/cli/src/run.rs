//! Subcommand dispatch. Each command reads a validated config, runs one
//! engine and writes its result files plus `manifest.json` into the output
//! directory. Everything except the wall time in the manifest depends only
//! on the config and the seed.

use std::path::{Path, PathBuf};
use std::time::Instant;

use kgfluct_core::automaton::EnsembleSample;
use kgfluct_core::effective_action::{
    delta_s_max_power, fluctuation_mass_squared, one_loop_density, one_loop_phi4_coefficient, one_loop_phi4_density,
    one_loop_subtracted, one_loop_sum, saddle_consistency, solve_mirror_series, tree_level_delta_s,
    ReferenceCoefficients, SaddleReport,
};
use kgfluct_core::observables::{
    band_limit_defect, commutator_apply_with_tolerance, expect_classical, expect_product_complex, expected_commutator,
    identity_report, IdentityReport, OperatorKernel, OperatorKind,
};
use kgfluct_core::schroedinger::{evolve_psi, HamiltonianSpec};
use kgfluct_core::spectral::{fourier_zeta_to_pi_checked, selection_rule_violation};
use kgfluct_core::transport::{evolve_q_step, TransportOptions, TransportReport};
use kgfluct_core::{
    energy, evolve_q, fourier_pi_to_zeta, make_gaussian_q, run_automaton_observed, sample_initial,
    ClassicalWaveFunction, ComplexWaveFunction, Ensemble, FieldConfiguration, FieldObservable, FieldObservableKind,
    ModelParams, WaveFunction,
};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::{Engine, ExperimentConfig, ObservableConfig, TransportMode};
use crate::error::{CliError, CliResult};
use crate::io::{
    write_complex_wavefunction, write_ensemble_csv, write_json, write_rows, write_snapshot, write_wavefunction_csv,
    DiagnosticRow, ObservableRow,
};

/// The subcommands that run an experiment from a config.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    EvolveLiouville,
    EvolveSchroedinger,
    RunEnsemble,
    CheckOperators,
    SaddlePoint,
    OneLoop,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::EvolveLiouville => "evolve-liouville",
            Command::EvolveSchroedinger => "evolve-schroedinger",
            Command::RunEnsemble => "run-ensemble",
            Command::CheckOperators => "check-operators",
            Command::SaddlePoint => "saddle-point",
            Command::OneLoop => "one-loop",
        }
    }

    /// The command a config's engine runs by default.
    pub fn for_engine(engine: Engine) -> Self {
        match engine {
            Engine::GridLiouville => Command::EvolveLiouville,
            Engine::Schroedinger => Command::EvolveSchroedinger,
            Engine::Ensemble => Command::RunEnsemble,
            Engine::EffectiveAction => Command::SaddlePoint,
        }
    }

    fn accepts(&self, engine: Engine) -> bool {
        match self {
            Command::EvolveLiouville => engine == Engine::GridLiouville,
            Command::EvolveSchroedinger => engine == Engine::Schroedinger,
            Command::RunEnsemble => engine == Engine::Ensemble,
            Command::CheckOperators => engine.is_grid(),
            Command::SaddlePoint | Command::OneLoop => engine == Engine::EffectiveAction,
        }
    }
}

/// Files written by a run, relative to the output directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunSummary {
    pub output_dir: PathBuf,
    pub files: Vec<String>,
}

struct Outputs {
    dir: PathBuf,
    files: Vec<String>,
}

impl Outputs {
    fn path(&mut self, name: &str) -> PathBuf {
        self.files.push(name.to_string());
        self.dir.join(name)
    }
}

/// Runs `command` for `cfg`, writing results under `cfg.output`.
pub fn run_experiment(cfg: &ExperimentConfig, command: Command) -> CliResult<RunSummary> {
    if !command.accepts(cfg.engine) {
        return Err(CliError::Usage(format!(
            "command {} cannot run a config with engine {}",
            command.name(),
            cfg.engine.name()
        )));
    }
    let started = Instant::now();
    let mut out = Outputs {
        dir: PathBuf::from(&cfg.output),
        files: Vec::new(),
    };
    let params = cfg.params();
    params.validate()?;
    match command {
        Command::EvolveLiouville => evolve_liouville(cfg, &params, &mut out)?,
        Command::EvolveSchroedinger => evolve_schroedinger(cfg, &params, &mut out)?,
        Command::RunEnsemble => run_ensemble(cfg, &params, &mut out)?,
        Command::CheckOperators => check_operators(cfg, &mut out)?,
        Command::SaddlePoint => saddle_point(cfg, &params, &mut out)?,
        Command::OneLoop => one_loop(cfg, &params, &mut out)?,
    }
    write_manifest(&out.dir, cfg, command, &out.files, started.elapsed().as_secs_f64())?;
    out.files.push("manifest.json".into());
    Ok(RunSummary {
        output_dir: out.dir,
        files: out.files,
    })
}

pub fn write_manifest(dir: &Path, cfg: &ExperimentConfig, command: Command, files: &[String], wall_time: f64) -> CliResult<()> {
    let manifest = json!({
        "command": command.name(),
        "config": cfg,
        "seed": cfg.seed,
        "versions": {
            "kgfluct": env!("CARGO_PKG_VERSION"),
            "kgfluct-core": kgfluct_core::VERSION,
        },
        "files": files,
        "wall_time_seconds": wall_time,
    });
    write_json(&dir.join("manifest.json"), &manifest)
}

// ---------------------------------------------------------------------------
// grid engines

fn initial_q(cfg: &ExperimentConfig) -> CliResult<ClassicalWaveFunction> {
    let grid = cfg.grid.as_ref().expect("validated").build()?;
    let spec = cfg.initial.expect("validated");
    Ok(make_gaussian_q(&grid, spec)?)
}

/// The sampled block counts `0, k, 2k, ..., n_steps`.
fn marks(n_steps: u64, every: u64) -> Vec<u64> {
    let mut m: Vec<u64> = (0..=n_steps).step_by(every.max(1) as usize).collect();
    if m.last() != Some(&n_steps) {
        m.push(n_steps);
    }
    m
}

/// Observables of a grid state. Classical ones use `q`, the fluctuating
/// field ones use `psi`.
fn grid_observable(o: &ObservableConfig, q: &ClassicalWaveFunction, psi: &ComplexWaveFunction) -> CliResult<f64> {
    let x = o.site;
    let k = |kind| OperatorKernel::new(kind, x);
    let quantum = |ops: &[OperatorKernel]| -> CliResult<f64> { Ok(expect_product_complex(psi, ops)?.re) };
    Ok(match o.name.as_str() {
        "sigma" => expect_classical(q, |s, _| s[x]),
        "pi" => expect_classical(q, |_, p| p[x]),
        "sigma_squared" => expect_classical(q, |s, _| s[x] * s[x]),
        "pi_squared" => expect_classical(q, |_, p| p[x] * p[x]),
        "sigma_pi" => expect_classical(q, |s, p| s[x] * p[x]),
        "phi" => quantum(&[k(OperatorKind::PhiHat)])?,
        "chi" => quantum(&[k(OperatorKind::ChiHat)])?,
        "zeta_squared" => quantum(&[k(OperatorKind::ZetaHat), k(OperatorKind::ZetaHat)])?,
        "var_phi" => {
            let phi = k(OperatorKind::PhiHat);
            let mean = quantum(&[phi])?;
            quantum(&[phi, phi])? - mean * mean
        }
        other => return Err(CliError::Usage(format!("unknown grid observable {other}"))),
    })
}

fn default_grid_observables(sites: usize) -> Vec<ObservableConfig> {
    (0..sites)
        .flat_map(|site| {
            ["sigma", "sigma_squared", "pi_squared"].map(|name| ObservableConfig {
                name: name.into(),
                site,
            })
        })
        .collect()
}

/// Expected lattice energy of a grid state.
fn grid_energy(q: &ClassicalWaveFunction, params: &ModelParams) -> f64 {
    let lattice = kgfluct_core::transport::grid_lattice(&q.grid);
    expect_classical(q, |s, p| {
        let c = FieldConfiguration {
            sigma: s.to_vec(),
            pi: p.to_vec(),
            time: 0.0,
        };
        energy(&c, &lattice, params)
    })
}

fn record_observables(
    rows: &mut Vec<ObservableRow>,
    obs: &[ObservableConfig],
    time: f64,
    q: &ClassicalWaveFunction,
    psi: &ComplexWaveFunction,
) -> CliResult<()> {
    for o in obs {
        rows.push(ObservableRow {
            time,
            observable_name: o.name.clone(),
            site: o.site,
            value: grid_observable(o, q, psi)?,
        });
    }
    Ok(())
}

fn diag(rows: &mut Vec<DiagnosticRow>, time: f64, quantity: &str, value: f64) {
    rows.push(DiagnosticRow {
        time,
        quantity: quantity.into(),
        value,
    });
}

fn evolve_liouville(cfg: &ExperimentConfig, params: &ModelParams, out: &mut Outputs) -> CliResult<()> {
    let q0 = initial_q(cfg)?;
    let obs = if cfg.observables.is_empty() {
        default_grid_observables(q0.grid.sites())
    } else {
        cfg.observables.clone()
    };
    let opts = TransportOptions {
        leak_tolerance: cfg.tolerances.leak,
    };
    let block = 2.0 * params.lattice_spacing;
    let mut obs_rows = Vec::new();
    let mut diag_rows = Vec::new();
    let mut state = q0.clone();
    let mut done = 0;
    for &mark in &marks(cfg.n_steps, cfg.sample_every) {
        let report = match cfg.transport_mode {
            TransportMode::Characteristics => {
                let (q, r) = evolve_q(&q0, params, mark, &opts)?;
                state = q;
                r
            }
            TransportMode::Stepwise => {
                let mut last = TransportReport {
                    norm_sq: 1.0,
                    defect: 0.0,
                    leaked_mass: 0.0,
                };
                for _ in done..mark {
                    let (q, r) = evolve_q_step(&state, params, &opts)?;
                    state = q;
                    last = r;
                }
                last
            }
        };
        done = mark;
        let time = block * mark as f64;
        let psi = fourier_pi_to_zeta(&state);
        record_observables(&mut obs_rows, &obs, time, &state, &psi)?;
        diag(&mut diag_rows, time, "norm_defect", report.defect);
        diag(&mut diag_rows, time, "leaked_mass", report.leaked_mass);
        diag(&mut diag_rows, time, "energy", grid_energy(&state, params));
    }
    write_rows(&out.path("observables.csv"), &obs_rows)?;
    write_rows(&out.path("diagnostics.csv"), &diag_rows)?;
    let g = &state.grid;
    let real: Vec<Complex64> = state.values.iter().map(|&v| v.into()).collect();
    write_wavefunction_csv(&out.path("q_final.csv"), &real, g.sites(), g.sigma.count, g.pi.count)?;
    Ok(())
}

fn evolve_schroedinger(cfg: &ExperimentConfig, params: &ModelParams, out: &mut Outputs) -> CliResult<()> {
    let q0 = initial_q(cfg)?;
    let obs = if cfg.observables.is_empty() {
        default_grid_observables(q0.grid.sites())
    } else {
        cfg.observables.clone()
    };
    let spec = HamiltonianSpec::new(*params, cfg.splitting);
    let block = 2.0 * params.lattice_spacing;
    let mut psi = fourier_pi_to_zeta(&q0);
    let mut obs_rows = Vec::new();
    let mut diag_rows = Vec::new();
    let mut done = 0;
    for &mark in &marks(cfg.n_steps, cfg.sample_every) {
        psi = evolve_psi(&psi, &spec, block, mark - done)?;
        done = mark;
        let time = block * mark as f64;
        let (q, _) = fourier_zeta_to_pi_checked(&psi, cfg.tolerances.selection_rule)?;
        record_observables(&mut obs_rows, &obs, time, &q, &psi)?;
        diag(&mut diag_rows, time, "norm_defect", psi.norm_sq() - 1.0);
        diag(&mut diag_rows, time, "selection_rule_violation", selection_rule_violation(&psi));
        diag(&mut diag_rows, time, "energy", grid_energy(&q, params));
    }
    write_rows(&out.path("observables.csv"), &obs_rows)?;
    write_rows(&out.path("diagnostics.csv"), &diag_rows)?;
    write_complex_wavefunction(&out.path("psi_final.csv"), &psi)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// ensemble engine

fn initial_ensemble(cfg: &ExperimentConfig) -> CliResult<Ensemble> {
    let ec = cfg.ensemble.as_ref().expect("validated");
    match &ec.initial_snapshot {
        Some(path) => {
            let ens = crate::io::read_snapshot(Path::new(path))?;
            if ens.lattice != cfg.model.lattice() {
                return Err(CliError::Usage(format!(
                    "snapshot lattice {:?} differs from model.lattice_dims {:?}",
                    ens.lattice.dims(),
                    cfg.model.lattice_dims
                )));
            }
            Ok(ens)
        }
        None => Ok(sample_initial(
            cfg.initial.expect("validated"),
            &cfg.model.lattice(),
            ec.members,
            cfg.seed,
        )?),
    }
}

fn run_ensemble(cfg: &ExperimentConfig, params: &ModelParams, out: &mut Outputs) -> CliResult<()> {
    let ens = initial_ensemble(cfg)?;
    let observables: Vec<FieldObservable> = if cfg.observables.is_empty() {
        [FieldObservableKind::Sigma, FieldObservableKind::SigmaSquared, FieldObservableKind::Energy]
            .map(|k| FieldObservable::new(k, 0))
            .to_vec()
    } else {
        cfg.observables
            .iter()
            .map(|o| FieldObservable::new(FieldObservableKind::from_name(&o.name).expect("validated"), o.site))
            .collect()
    };
    let (last, samples): (Ensemble, Vec<EnsembleSample>) =
        run_automaton_observed(&ens, params, cfg.n_steps, cfg.sample_every, &observables)?;
    write_ensemble_csv(&out.path("ensemble.csv"), &samples)?;
    if cfg.ensemble.as_ref().is_some_and(|e| e.snapshot) {
        write_snapshot(&out.path("snapshot.bin"), &last)?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// operator checks

#[derive(Serialize)]
struct CommutatorCheck {
    a: &'static str,
    site_a: usize,
    b: &'static str,
    site_b: usize,
    expected: [f64; 2],
    defect: f64,
    passed: bool,
}

#[derive(Serialize)]
struct HermiticityCheck {
    operator: &'static str,
    site: usize,
    expectation: f64,
    imaginary_residue: f64,
    passed: bool,
}

#[derive(Serialize)]
struct OperatorReport {
    band_limit_defect: f64,
    selection_rule_violation: f64,
    commutators: Vec<CommutatorCheck>,
    hermiticity: Vec<HermiticityCheck>,
    identities: Vec<IdentityReport>,
    failures: usize,
}

fn check_operators(cfg: &ExperimentConfig, out: &mut Outputs) -> CliResult<()> {
    let q = initial_q(cfg)?;
    let psi = fourier_pi_to_zeta(&q);
    let tol = &cfg.tolerances;
    let sites = q.grid.sites();
    let mut commutators = Vec::new();
    let mut hermiticity = Vec::new();
    for sa in 0..sites {
        for &a in &OperatorKind::ALL {
            let ka = OperatorKernel::new(a, sa);
            let z = expect_product_complex(&psi, &[ka])?;
            hermiticity.push(HermiticityCheck {
                operator: a.name(),
                site: sa,
                expectation: z.re,
                imaginary_residue: z.im.abs(),
                passed: z.im.abs() <= tol.hermitian,
            });
            for sb in 0..sites {
                for &b in &OperatorKind::ALL {
                    let kb = OperatorKernel::new(b, sb);
                    let c = expected_commutator(ka, kb);
                    let comm = commutator_apply_with_tolerance(ka, kb, &psi, tol.band_limit)?;
                    let defect = comm
                        .values
                        .iter()
                        .zip(&psi.values)
                        .map(|(x, p)| (x - c * p).norm())
                        .fold(0.0, f64::max);
                    let limit = if c == Complex64::new(0.0, 0.0) { tol.commuting } else { tol.commutator };
                    commutators.push(CommutatorCheck {
                        a: a.name(),
                        site_a: sa,
                        b: b.name(),
                        site_b: sb,
                        expected: [c.re, c.im],
                        defect,
                        passed: defect <= limit,
                    });
                }
            }
        }
    }
    let identities = (0..sites).map(|s| identity_report(&q, s)).collect::<Result<Vec<_>, _>>()?;
    let failures = commutators.iter().filter(|c| !c.passed).count() + hermiticity.iter().filter(|h| !h.passed).count();
    let report = OperatorReport {
        band_limit_defect: band_limit_defect(&psi),
        selection_rule_violation: selection_rule_violation(&psi),
        commutators,
        hermiticity,
        identities,
        failures,
    };
    write_json(&out.path("operators.json"), &report)
}

// ---------------------------------------------------------------------------
// effective action

fn coefficient_map(entries: impl IntoIterator<Item = (u32, f64)>) -> Map<String, Value> {
    entries.into_iter().map(|(p, v)| (p.to_string(), json!(v))).collect()
}

fn relative(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        (a - b).abs()
    } else {
        ((a - b) / b).abs()
    }
}

fn saddle_point(cfg: &ExperimentConfig, params: &ModelParams, out: &mut Outputs) -> CliResult<()> {
    let ea = cfg.effective_action.as_ref().expect("validated");
    let k = ea.truncation_order;
    let mirror = solve_mirror_series(params, k)?;
    let delta_s = tree_level_delta_s(&mirror.chi, params, k)?;
    let reference = ReferenceCoefficients::new(params);
    let c = |s: &kgfluct_core::effective_action::PowerSeries, p: u32| s.coefficient_f64(p);
    let mut deviations = Map::new();
    deviations.insert("chi.3".into(), json!(relative(c(&mirror.chi, 3), reference.chi_phi3)));
    deviations.insert("delta_s.6".into(), json!(relative(c(&delta_s, 6), reference.delta_s_phi6)));
    if mirror.chi.max_power() >= 7 {
        deviations.insert("chi.7".into(), json!(relative(c(&mirror.chi, 7), reference.chi_phi7_printed)));
    }
    if delta_s.max_power() >= 10 {
        deviations.insert("delta_s.10".into(), json!(relative(c(&delta_s, 10), reference.delta_s_phi10_printed)));
    }
    let checks: Vec<SaddleReport> = ea
        .phi_values
        .iter()
        .map(|&phi| saddle_consistency(params, phi, k))
        .collect::<Result<_, _>>()?;
    let doc = json!({
        "coefficients": {
            "chi": mirror.chi,
            "delta_s": delta_s,
        },
        "paper_reference_values": reference,
        "deviations": deviations,
        "truncation_order": k,
        "fixed_point_passes": mirror.passes,
        "delta_s_max_power": delta_s_max_power(k),
        "saddle_checks": checks,
    });
    write_json(&out.path("saddle_point.json"), &doc)
}

fn one_loop(cfg: &ExperimentConfig, params: &ModelParams, out: &mut Outputs) -> CliResult<()> {
    let ea = cfg.effective_action.as_ref().expect("validated");
    let dims = &ea.lattice_dims;
    let disp = ea.dispersion;
    let c4 = one_loop_phi4_coefficient(params, dims, disp)?;
    let c4_density = one_loop_phi4_density(params, dims, disp)?;
    let (l, m2, eps) = (params.coupling, params.mass_squared, params.lattice_spacing);
    // the scale lambda^2 / (m^2 eps^2) quoted for the finite phi^4 term
    let scale = l * l / (m2 * eps * eps);
    let mut values = Vec::new();
    for &phi in &ea.phi_values {
        let direct = one_loop_subtracted(params, phi, dims, disp)?;
        let approx = c4 * phi.powi(4);
        values.push(json!({
            "phi": phi,
            "fluctuation_mass_squared": fluctuation_mass_squared(params, phi),
            "per_site": one_loop_sum(params, phi, dims, disp)?,
            "density": one_loop_density(params, phi, dims, disp)?,
            "subtracted_per_site": direct,
            "phi4_approximation": approx,
            "phi4_relative_deviation": relative(approx, direct),
        }));
    }
    let doc = json!({
        "coefficients": coefficient_map([(4, c4)]),
        "coefficients_per_volume": coefficient_map([(4, c4_density)]),
        "paper_reference_values": {
            "phi4_scale_lambda2_over_m2_eps2": scale,
        },
        "deviations": {
            "phi4_density_over_scale": if scale > 0.0 { c4_density / scale } else { 0.0 },
        },
        "lattice_dims": dims,
        "dispersion": disp,
        "values": values,
    });
    write_json(&out.path("one_loop.json"), &doc)
}
