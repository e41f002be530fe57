//! Direct evolution of `psi(sigma, zeta)` under
//! `i d/dt psi = H psi`, `H = -sum_x [d/dsigma_x d/dzeta_x + zeta_x F_x(sigma)]`.
//!
//! The kinetic part is diagonal after transforming zeta back to pi and sigma
//! to its wavenumber `k`, where it multiplies by `k pi`. The potential part
//! is diagonal in `(sigma, zeta)`. Both factors of the split step are
//! therefore exact unitary phases.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{map_lines, ConjugateTransform, Spectral1d};
use crate::model::ModelParams;
use crate::observables::{apply, OperatorKernel, OperatorKind};
use crate::phase_space::{ClassicalWaveFunction, ComplexWaveFunction, PhaseGrid, MAX_GRID_SITES};
use crate::spectral::{fourier_pi_to_zeta, selection_rule_violation};
use crate::transport::{evolve_q, force_into, grid_lattice, TransportOptions, TransportReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Splitting {
    /// `T(dt/2) V(dt) T(dt/2)`, second order
    #[default]
    Strang,
    /// `V(dt) T(dt)`, first order
    Lie,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianSpec {
    pub params: ModelParams,
    #[serde(default)]
    pub splitting: Splitting,
}

impl HamiltonianSpec {
    pub fn new(params: ModelParams, splitting: Splitting) -> Self {
        Self { params, splitting }
    }
}

fn check(grid: &PhaseGrid, params: &ModelParams) -> Result<()> {
    params.validate()?;
    grid_lattice(grid).check_params(params)
}

/// Multiplies by `exp(i tau sum_x zeta_x F_x(sigma))`.
fn potential_phase(grid: &PhaseGrid, params: &ModelParams, data: &mut [Complex64], tau: f64) {
    let lattice = grid_lattice(grid);
    let s = grid.sites();
    let mut sigma = [0.0; MAX_GRID_SITES];
    let mut zeta = [0.0; MAX_GRID_SITES];
    let mut f = [0.0; MAX_GRID_SITES];
    for (i, v) in data.iter_mut().enumerate() {
        grid.conjugate_coords(i, &mut sigma[..s], &mut zeta[..s]);
        force_into(&sigma[..s], &lattice, params, &mut f[..s]);
        let phase: f64 = (0..s).map(|x| zeta[x] * f[x]).sum();
        *v *= Complex64::from_polar(1.0, tau * phase);
    }
}

/// Multiplies by `exp(-i tau sum_x k_x pi_x)` in the `(k, pi)` representation.
struct KineticPropagator {
    conj: ConjugateTransform,
    spec: Spectral1d,
}

impl KineticPropagator {
    fn new(grid: &PhaseGrid) -> Self {
        Self {
            conj: ConjugateTransform::new(&grid.pi),
            spec: Spectral1d::new(&grid.sigma),
        }
    }

    fn apply(&self, grid: &PhaseGrid, data: &mut [Complex64], tau: f64) {
        let shape = grid.shape();
        for site in 0..grid.sites() {
            map_lines(data, &shape, grid.pi_axis(site), |_, line| self.conj.to_momentum(line));
            let pi_axis = grid.pi_axis(site);
            map_lines(data, &shape, grid.sigma_axis(site), |start, line| {
                let mut idx = [0usize; 2 * MAX_GRID_SITES];
                grid.unravel(start, &mut idx[..shape.len()]);
                let pi = grid.pi.node(idx[pi_axis]);
                self.spec.apply(line, |k| Complex64::from_polar(1.0, -tau * k * pi));
            });
            map_lines(data, &shape, grid.pi_axis(site), |_, line| self.conj.to_conjugate(line));
        }
    }
}

/// `H psi`.
pub fn hamiltonian_apply(psi: &ComplexWaveFunction, spec: &HamiltonianSpec) -> Result<ComplexWaveFunction> {
    let grid = &psi.grid;
    check(grid, &spec.params)?;
    let mut out = psi.clone();
    out.values.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
    let sigma_spec = Spectral1d::new(&grid.sigma);
    let shape = grid.shape();
    // -d_sigma d_zeta = -i d_sigma pi_hat
    for site in 0..grid.sites() {
        let mut t = apply(psi, OperatorKernel::new(OperatorKind::PiHat, site))?.values;
        map_lines(&mut t, &shape, grid.sigma_axis(site), |_, line| sigma_spec.derivative(line));
        for (o, v) in out.values.iter_mut().zip(t) {
            *o += Complex64::new(0.0, -1.0) * v;
        }
    }
    let lattice = grid_lattice(grid);
    let s = grid.sites();
    let mut sigma = [0.0; MAX_GRID_SITES];
    let mut zeta = [0.0; MAX_GRID_SITES];
    let mut f = [0.0; MAX_GRID_SITES];
    for (i, o) in out.values.iter_mut().enumerate() {
        grid.conjugate_coords(i, &mut sigma[..s], &mut zeta[..s]);
        force_into(&sigma[..s], &lattice, &spec.params, &mut f[..s]);
        let pot: f64 = (0..s).map(|x| zeta[x] * f[x]).sum();
        *o -= psi.values[i] * pot;
    }
    Ok(out)
}

/// Split-step evolution by `n_steps` steps of `dt = 2 eps`.
pub fn evolve_psi(psi: &ComplexWaveFunction, spec: &HamiltonianSpec, dt: f64, n_steps: u64) -> Result<ComplexWaveFunction> {
    let grid = &psi.grid;
    check(grid, &spec.params)?;
    let block = 2.0 * spec.params.lattice_spacing;
    if !((dt - block).abs() <= 1e-12 * block) {
        return Err(Error::param("dt", format!("must equal 2 eps = {block}, got {dt}")));
    }
    let kinetic = KineticPropagator::new(grid);
    let mut out = psi.clone();
    let data = &mut out.values;
    match spec.splitting {
        Splitting::Strang => {
            if n_steps > 0 {
                kinetic.apply(grid, data, 0.5 * dt);
                for i in 0..n_steps {
                    potential_phase(grid, &spec.params, data, dt);
                    // consecutive half drifts merge into one full drift
                    let tau = if i + 1 == n_steps { 0.5 * dt } else { dt };
                    kinetic.apply(grid, data, tau);
                }
            }
        }
        Splitting::Lie => {
            for _ in 0..n_steps {
                potential_phase(grid, &spec.params, data, dt);
                kinetic.apply(grid, data, dt);
            }
        }
    }
    if data.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::Divergence {
            step: 2 * n_steps,
            member: None,
        });
    }
    out.time += dt * n_steps as f64;
    Ok(out)
}

/// Outcome of comparing the two routes from `q0` to `psi(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RouteReport {
    /// `max |psi_A - psi_B|`
    pub deviation: f64,
    pub n_blocks: u64,
    /// selection-rule violation of the transport route
    pub selection_rule_transport: f64,
    /// selection-rule violation of the Schroedinger route
    pub selection_rule_schroedinger: f64,
    pub transport: TransportReport,
}

/// Transports `q0` and Fourier-transforms (route A), and independently
/// transforms and evolves `psi` with Strang splitting (route B).
pub fn route_consistency(
    q0: &ClassicalWaveFunction,
    params: &ModelParams,
    t_final: f64,
    opts: &TransportOptions,
) -> Result<RouteReport> {
    let block = 2.0 * params.lattice_spacing;
    let n = (t_final / block).round();
    if !(t_final >= 0.0) || (n * block - t_final).abs() > 1e-9 * block.max(t_final) {
        return Err(Error::param("t_final", format!("must be a non-negative multiple of 2 eps = {block}")));
    }
    let n_blocks = n as u64;
    let (qa, transport) = evolve_q(q0, params, n_blocks, opts)?;
    let psi_a = fourier_pi_to_zeta(&qa);
    let spec = HamiltonianSpec::new(*params, Splitting::Strang);
    let psi_b = evolve_psi(&fourier_pi_to_zeta(q0), &spec, block, n_blocks)?;
    Ok(RouteReport {
        deviation: psi_a.max_abs_diff(&psi_b)?,
        n_blocks,
        selection_rule_transport: selection_rule_violation(&psi_a),
        selection_rule_schroedinger: selection_rule_violation(&psi_b),
        transport,
    })
}
