//! The desk-scale cross-check suite behind `kgfluct validate`.
//!
//! Every check compares an engine against an independent route or closed
//! form and records the deviation next to the config tolerance it is held
//! to. The suite finishes in well under a minute on a laptop.

use std::path::Path;

use kgfluct_core::automaton::trajectory;
use kgfluct_core::effective_action::{minkowski_action, saddle_consistency, SpacetimeField};
use kgfluct_core::observables::{
    commutator_defect, expect_classical, expect_quantum_product, identity_report, monomial, OperatorKernel, OperatorKind,
};
use kgfluct_core::schroedinger::{evolve_psi, HamiltonianSpec, Splitting};
use kgfluct_core::spectral::selection_rule_violation;
use kgfluct_core::transport::TransportOptions;
use kgfluct_core::{
    evolve_q, fourier_pi_to_zeta, make_gaussian_q, Axis, FieldConfiguration, Lattice, ModelParams, PhaseGrid,
    SiteGaussian,
};
use num_complex::Complex64;
use serde::Serialize;

use crate::config::Tolerances;
use crate::error::{CliError, CliResult};
use crate::io::write_json;

/// One line of the validation report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn at_most(name: &str, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            passed: value <= tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    pub failed: usize,
}

fn grid(n: usize, half: f64) -> kgfluct_core::Result<PhaseGrid> {
    let a = Axis::spanning(0.0, half, n)?;
    PhaseGrid::new(a, a, 1)
}

fn rule_equivalence() -> kgfluct_core::Result<f64> {
    let g = grid(97, 9.0)?;
    let mut worst: f64 = 0.0;
    for (ms, mp, ws, wp) in [(0.3, -0.2, 1.0, 0.8), (-0.5, 0.4, 0.7, 1.2), (0.0, 0.0, 1.1, 1.0)] {
        let q = make_gaussian_q(&g, SiteGaussian::new(ms, mp, ws, wp)?)?;
        let psi = fourier_pi_to_zeta(&q);
        for a in 0..=4usize {
            for b in 0..=(4 - a) {
                let quantum = expect_quantum_product(&psi, &monomial(0, a, b))?;
                let classical = expect_classical(&q, |s, p| s[0].powi(a as i32) * p[0].powi(b as i32));
                worst = worst.max((quantum - classical).abs());
            }
        }
    }
    Ok(worst)
}

fn identities(tol: &Tolerances) -> kgfluct_core::Result<f64> {
    let g = grid(161, 10.0)?;
    let q0 = make_gaussian_q(&g, SiteGaussian::new(0.5, 0.0, 0.8, 0.8)?)?;
    let params = ModelParams::new(1.0, 0.5, 0, 0.01)?;
    let opts = TransportOptions {
        leak_tolerance: tol.leak.max(1e-7),
    };
    let (q1, _) = evolve_q(&q0, &params, 100, &opts)?;
    let mut worst: f64 = 0.0;
    for q in [&q0, &q1] {
        let r = identity_report(q, 0)?;
        worst = worst.max(r.roughness_gap).max(r.dispersion_gap).max(r.mean_gap);
    }
    Ok(worst)
}

fn selection_rule() -> kgfluct_core::Result<f64> {
    let g = grid(97, 9.0)?;
    let q0 = make_gaussian_q(&g, SiteGaussian::new(0.5, 0.0, 1.0, 1.0)?)?;
    let params = ModelParams::new(1.0, 0.5, 0, 0.01)?;
    let spec = HamiltonianSpec::new(params, Splitting::Strang);
    let psi = evolve_psi(&fourier_pi_to_zeta(&q0), &spec, 0.02, 200)?;
    Ok(selection_rule_violation(&psi))
}

/// Deviations of `[sigma, pi]`, `[phi, pi]` and `[phi, p]` from their
/// c-numbers `0`, `i/2` and `i`.
fn commutators() -> kgfluct_core::Result<(f64, f64)> {
    let g = grid(97, 10.0)?;
    let q = make_gaussian_q(&g, SiteGaussian::new(0.2, -0.1, 1.0, 1.0)?)?;
    let psi = fourier_pi_to_zeta(&q);
    let k = |kind| OperatorKernel::new(kind, 0);
    let i = Complex64::new(0.0, 1.0);
    let commuting = commutator_defect(k(OperatorKind::SigmaHat), k(OperatorKind::PiHat), &psi, 0.0.into())?;
    let phi_pi = commutator_defect(k(OperatorKind::PhiHat), k(OperatorKind::PiHat), &psi, 0.5 * i)?;
    let phi_p = commutator_defect(k(OperatorKind::PhiHat), k(OperatorKind::PHat), &psi, i)?;
    Ok((commuting, phi_pi.max(phi_p)))
}

/// Relative gap between grid moments and the exact linear propagation of
/// the Gaussian moments for the free single-site field.
fn free_theory(tol: &Tolerances) -> kgfluct_core::Result<f64> {
    let g = grid(161, 10.0)?;
    let spec = SiteGaussian::new(0.7, -0.3, 1.0, 0.9)?;
    let q0 = make_gaussian_q(&g, spec)?;
    let eps = 0.01;
    let params = ModelParams::new(1.0, 0.0, 0, eps)?;
    let n = 200;
    let opts = TransportOptions {
        leak_tolerance: tol.leak.max(1e-7),
    };
    let (q, _) = evolve_q(&q0, &params, n, &opts)?;
    // block matrix of the free leapfrog with m = 1
    let e2 = eps * eps;
    let block = [[1.0 - 2.0 * e2, 2.0 * eps], [-2.0 * eps * (1.0 - e2), 1.0 - 2.0 * e2]];
    let mut m = [[1.0, 0.0], [0.0, 1.0]];
    for _ in 0..n {
        m = [
            [
                block[0][0] * m[0][0] + block[0][1] * m[1][0],
                block[0][0] * m[0][1] + block[0][1] * m[1][1],
            ],
            [
                block[1][0] * m[0][0] + block[1][1] * m[1][0],
                block[1][0] * m[0][1] + block[1][1] * m[1][1],
            ],
        ];
    }
    let mean = [
        m[0][0] * spec.mean_sigma + m[0][1] * spec.mean_pi,
        m[1][0] * spec.mean_sigma + m[1][1] * spec.mean_pi,
    ];
    let (vs, vp) = (spec.width_sigma.powi(2), spec.width_pi.powi(2));
    let cov = |a: usize, b: usize| m[a][0] * m[b][0] * vs + m[a][1] * m[b][1] * vp;
    let second = [
        cov(0, 0) + mean[0] * mean[0],
        cov(1, 1) + mean[1] * mean[1],
        cov(0, 1) + mean[0] * mean[1],
    ];
    let got_mean = [expect_classical(&q, |s, _| s[0]), expect_classical(&q, |_, p| p[0])];
    let got_second = [
        expect_classical(&q, |s, _| s[0] * s[0]),
        expect_classical(&q, |_, p| p[0] * p[0]),
        expect_classical(&q, |s, p| s[0] * p[0]),
    ];
    // means are compared on the scale of the spread so zero crossings do not blow up
    let scale = cov(0, 0).min(cov(1, 1)).sqrt();
    let mut worst: f64 = 0.0;
    for (g, e) in got_mean.iter().zip(&mean) {
        worst = worst.max((g - e).abs() / e.abs().max(scale));
    }
    for (g, e) in got_second.iter().zip(&second) {
        worst = worst.max((g - e).abs() / e.abs().max(scale * scale));
    }
    Ok(worst)
}

fn reversibility() -> kgfluct_core::Result<f64> {
    let lattice = Lattice::new(vec![16]);
    let params = ModelParams::new(1.0, 0.5, 1, 0.05)?.with_laplacian_prefactor(0.2)?;
    let start = FieldConfiguration {
        sigma: (0..16).map(|i| (0.4 * i as f64).sin()).collect(),
        pi: (0..16).map(|i| (0.7 * i as f64).cos()).collect(),
        time: 0.0,
    };
    let n = 2000;
    let fwd = trajectory(&start, &lattice, &params, n)?;
    let back = trajectory(&fwd.last().expect("non-empty").time_reversed(), &lattice, &params, n)?;
    let end = back.last().expect("non-empty").time_reversed();
    Ok(end
        .sigma
        .iter()
        .zip(&start.sigma)
        .chain(end.pi.iter().zip(&start.pi))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

fn saddle() -> kgfluct_core::Result<f64> {
    let params = ModelParams::new(1.0, 1.0, 0, 0.1)?;
    let mut worst: f64 = 0.0;
    for phi in [0.1, 0.2, 0.3] {
        worst = worst.max(saddle_consistency(&params, phi, 5)?.relative_deviation);
    }
    Ok(worst)
}

fn antisymmetry() -> kgfluct_core::Result<f64> {
    let params = ModelParams::new(1.0, 0.8, 1, 0.25)?;
    let phi = SpacetimeField::new(vec![3], 2, vec![0.3, -1.1, 0.25, 0.9, 2.0, -0.4])?;
    let chi = SpacetimeField::new(vec![3], 2, vec![-0.7, 0.2, 1.3, 0.1, -0.5, 0.6])?;
    let a = minkowski_action(&phi, &chi, &params)?.total;
    let b = minkowski_action(&chi, &phi, &params)?.total;
    Ok((a + b).abs())
}

/// Runs every check; never fails on a tolerance, only on engine errors.
pub fn run_checks(tol: &Tolerances) -> CliResult<ValidationReport> {
    let (commuting, canonical) = commutators()?;
    let checks = vec![
        Check::at_most("rule_equivalence", rule_equivalence()?, tol.rule_equivalence),
        Check::at_most("statistical_identities", identities(tol)?, tol.identity),
        Check::at_most("selection_rule", selection_rule()?, tol.selection_rule),
        Check::at_most("commuting_operators", commuting, tol.commuting),
        Check::at_most("canonical_commutators", canonical, tol.commutator),
        Check::at_most("free_theory_moments", free_theory(tol)?, tol.free_theory_relative),
        Check::at_most("automaton_reversibility", reversibility()?, tol.reversibility),
        Check::at_most("saddle_point_series", saddle()?, tol.saddle_relative),
        Check::at_most("action_antisymmetry", antisymmetry()?, 0.0),
    ];
    let failed = checks.iter().filter(|c| !c.passed).count();
    Ok(ValidationReport { checks, failed })
}

/// Runs the suite and writes `validate.json`. Callers turn a non-zero
/// `failed` count into [`CliError::ToleranceViolation`].
pub fn validate(tol: &Tolerances, output: &Path) -> CliResult<ValidationReport> {
    let report = run_checks(tol)?;
    write_json(&output.join("validate.json"), &report)?;
    Ok(report)
}

impl ValidationReport {
    pub fn into_result(self) -> CliResult<Self> {
        if self.failed > 0 {
            Err(CliError::ToleranceViolation { failed: self.failed })
        } else {
            Ok(self)
        }
    }
}
