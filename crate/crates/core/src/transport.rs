//! The cellular-automaton update of a single field configuration and the
//! transport of the classical wave function along it.
//!
//! One block advances time by `2 eps` and consists of a `pi`-first substep
//! followed by a `sigma`-first substep:
//!
//! ```text
//! pi    <- pi + eps F(sigma),  sigma <- sigma + eps pi      (pi first)
//! sigma <- sigma + eps pi,     pi    <- pi + eps F(sigma)   (sigma first)
//! ```
//!
//! Each substep is a composition of two shears, so the block map has unit
//! Jacobian and `q` is transported without a density factor.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::automaton::FieldConfiguration;
use crate::error::{Error, Result};
use crate::fourier::{map_lines, Spectral1d};
use crate::model::{Lattice, ModelParams};
use crate::phase_space::{ClassicalWaveFunction, PhaseGrid, WaveFunction, MAX_GRID_SITES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubstepOrder {
    PiFirst,
    SigmaFirst,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Backward,
}

/// Which substep to apply and whether to apply it or its inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StepDirection {
    pub order: SubstepOrder,
    pub direction: Direction,
}

impl StepDirection {
    pub const fn forward(order: SubstepOrder) -> Self {
        Self {
            order,
            direction: Direction::Forward,
        }
    }

    pub const fn backward(order: SubstepOrder) -> Self {
        Self {
            order,
            direction: Direction::Backward,
        }
    }

    /// Order used by substep `index` of a run; consecutive substeps alternate.
    pub const fn alternating(index: u64) -> SubstepOrder {
        if index % 2 == 0 {
            SubstepOrder::PiFirst
        } else {
            SubstepOrder::SigmaFirst
        }
    }
}

/// Lattice force `F = c/eps^2 sum_k (s(x+k) + s(x-k) - 2 s(x)) - m^2 s - (lambda/2) s^3`.
pub fn force(sigma: &[f64], lattice: &Lattice, params: &ModelParams) -> Vec<f64> {
    let mut out = vec![0.0; sigma.len()];
    force_into(sigma, lattice, params, &mut out);
    out
}

pub fn force_into(sigma: &[f64], lattice: &Lattice, params: &ModelParams, out: &mut [f64]) {
    let d = lattice.spatial_dim();
    let hop = params.hopping();
    for x in 0..sigma.len() {
        let s = sigma[x];
        let mut lap = 0.0;
        for k in 0..d {
            lap += sigma[lattice.neighbour(x, k, true)] + sigma[lattice.neighbour(x, k, false)] - 2.0 * s;
        }
        out[x] = hop * lap + params.local_force(s);
    }
}

#[inline]
fn kick(sigma: &[f64], pi: &mut [f64], lattice: &Lattice, params: &ModelParams, dt: f64, scratch: &mut [f64]) {
    force_into(sigma, lattice, params, scratch);
    for (p, f) in pi.iter_mut().zip(scratch.iter()) {
        *p += dt * f;
    }
}

#[inline]
fn drift(sigma: &mut [f64], pi: &[f64], dt: f64) {
    for (s, p) in sigma.iter_mut().zip(pi) {
        *s += dt * p;
    }
}

/// In-place substep on raw field arrays. `scratch` must have the same
/// length as `sigma`.
pub fn substep(
    sigma: &mut [f64],
    pi: &mut [f64],
    lattice: &Lattice,
    params: &ModelParams,
    dir: StepDirection,
    scratch: &mut [f64],
) {
    let eps = params.lattice_spacing;
    match (dir.order, dir.direction) {
        (SubstepOrder::PiFirst, Direction::Forward) => {
            kick(sigma, pi, lattice, params, eps, scratch);
            drift(sigma, pi, eps);
        }
        (SubstepOrder::SigmaFirst, Direction::Forward) => {
            drift(sigma, pi, eps);
            kick(sigma, pi, lattice, params, eps, scratch);
        }
        (SubstepOrder::PiFirst, Direction::Backward) => {
            drift(sigma, pi, -eps);
            kick(sigma, pi, lattice, params, -eps, scratch);
        }
        (SubstepOrder::SigmaFirst, Direction::Backward) => {
            kick(sigma, pi, lattice, params, -eps, scratch);
            drift(sigma, pi, -eps);
        }
    }
}

/// One full `2 eps` block forward (`pi`-first then `sigma`-first).
pub fn block_forward(sigma: &mut [f64], pi: &mut [f64], lattice: &Lattice, params: &ModelParams, scratch: &mut [f64]) {
    substep(sigma, pi, lattice, params, StepDirection::forward(SubstepOrder::PiFirst), scratch);
    substep(sigma, pi, lattice, params, StepDirection::forward(SubstepOrder::SigmaFirst), scratch);
}

/// Exact inverse of [`block_forward`].
pub fn block_backward(sigma: &mut [f64], pi: &mut [f64], lattice: &Lattice, params: &ModelParams, scratch: &mut [f64]) {
    substep(sigma, pi, lattice, params, StepDirection::backward(SubstepOrder::SigmaFirst), scratch);
    substep(sigma, pi, lattice, params, StepDirection::backward(SubstepOrder::PiFirst), scratch);
}

fn all_finite(xs: &[f64]) -> bool {
    xs.iter().all(|v| v.is_finite())
}

/// Applies one substep to a configuration.
pub fn step_update(
    config: &FieldConfiguration,
    lattice: &Lattice,
    params: &ModelParams,
    dir: StepDirection,
) -> Result<FieldConfiguration> {
    config.check_shape(lattice)?;
    lattice.check_params(params)?;
    let mut next = config.clone();
    let mut scratch = vec![0.0; next.sigma.len()];
    substep(&mut next.sigma, &mut next.pi, lattice, params, dir, &mut scratch);
    let eps = params.lattice_spacing;
    next.time = match dir.direction {
        Direction::Forward => config.time + eps,
        Direction::Backward => config.time - eps,
    };
    if !(all_finite(&next.sigma) && all_finite(&next.pi)) {
        let step = (config.time / eps).round().max(0.0) as u64;
        return Err(Error::Divergence { step, member: None });
    }
    Ok(next)
}

/// Residuals of the two delta-function constraints of the block step
/// operator, evaluated between `before` and `after = block(before)`:
///
/// `sigma - sigma' - eps (pi + pi') + eps^2 (F(sigma) - F(sigma'))` and
/// `pi - pi' - eps (F(sigma) + F(sigma'))`; both are returned as max-norms.
pub fn step_operator_residual(
    before: &FieldConfiguration,
    after: &FieldConfiguration,
    lattice: &Lattice,
    params: &ModelParams,
) -> (f64, f64) {
    let eps = params.lattice_spacing;
    let f0 = force(&before.sigma, lattice, params);
    let f1 = force(&after.sigma, lattice, params);
    let mut rs: f64 = 0.0;
    let mut rp: f64 = 0.0;
    for x in 0..f0.len() {
        let a = after.sigma[x] - before.sigma[x] - eps * (after.pi[x] + before.pi[x]) + eps * eps * (f1[x] - f0[x]);
        let b = after.pi[x] - before.pi[x] - eps * (f1[x] + f0[x]);
        rs = rs.max(a.abs());
        rp = rp.max(b.abs());
    }
    (rs, rp)
}

/// The spatial lattice carried by a phase-space grid: one site is the
/// zero-dimensional model, two sites form a periodic ring of length two.
pub fn grid_lattice(grid: &PhaseGrid) -> Lattice {
    match grid.sites() {
        1 => Lattice::single_site(),
        n => Lattice::new(vec![n]),
    }
}

fn check_grid_params(grid: &PhaseGrid, params: &ModelParams) -> Result<Lattice> {
    let lattice = grid_lattice(grid);
    lattice.check_params(params)?;
    Ok(lattice)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransportOptions {
    /// Largest probability mass allowed to be carried off the grid.
    pub leak_tolerance: f64,
}

impl Default for TransportOptions {
    fn default() -> Self {
        Self { leak_tolerance: 1e-9 }
    }
}

/// Diagnostics of one transport call.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransportReport {
    /// squared norm of the interpolated state before renormalisation
    pub norm_sq: f64,
    /// `norm_sq - 1`
    pub defect: f64,
    /// probability mass whose image left the grid
    pub leaked_mass: f64,
}

/// Four-point Lagrange weights and first index for fractional position `p`.
#[inline]
fn cubic_stencil(p: f64) -> (i64, [f64; 4]) {
    let i0 = p.floor();
    let t = p - i0;
    let w = [
        -t * (t - 1.0) * (t - 2.0) / 6.0,
        (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
        -(t + 1.0) * t * (t - 2.0) / 2.0,
        (t + 1.0) * t * (t - 1.0) / 6.0,
    ];
    (i0 as i64 - 1, w)
}

/// Tensor-product cubic interpolation of `q` at a phase-space point; nodes
/// outside the grid count as zero.
fn interpolate(q: &ClassicalWaveFunction, sigma: &[f64], pi: &[f64]) -> f64 {
    let grid = &q.grid;
    let s = grid.sites();
    let n_axes = 2 * s;
    let shape = grid.shape();
    let mut first = [0i64; 2 * MAX_GRID_SITES];
    let mut weights = [[0.0; 4]; 2 * MAX_GRID_SITES];
    for a in 0..n_axes {
        let (axis, x) = if a < s { (&grid.sigma, sigma[a]) } else { (&grid.pi, pi[a - s]) };
        let p = axis.position(x);
        if p < -2.0 || p > axis.count as f64 + 1.0 {
            return 0.0;
        }
        let (i0, w) = cubic_stencil(p);
        first[a] = i0;
        weights[a] = w;
    }
    let mut total = 0.0;
    let combos = 4usize.pow(n_axes as u32);
    'outer: for c in 0..combos {
        let mut rem = c;
        let mut flat = 0usize;
        let mut w = 1.0;
        for a in 0..n_axes {
            let o = rem % 4;
            rem /= 4;
            let i = first[a] + o as i64;
            if i < 0 || i >= shape[a] as i64 {
                continue 'outer;
            }
            flat = flat * shape[a] + i as usize;
            w *= weights[a][o];
        }
        total += w * q.values[flat];
    }
    total
}

fn outside(grid: &PhaseGrid, sigma: &[f64], pi: &[f64]) -> bool {
    let out = |axis: &crate::phase_space::Axis, x: f64| {
        let h = 0.5 * axis.spacing;
        !(x >= axis.lower() - h && x <= axis.upper() + h)
    };
    sigma.iter().any(|&x| out(&grid.sigma, x)) || pi.iter().any(|&x| out(&grid.pi, x))
}

/// Transports `q` through `n_blocks` automaton blocks.
///
/// Every destination node is traced back through the exact inverse block
/// map and `q` is interpolated once at the preimage, so the only spatial
/// error is a single cubic interpolation regardless of `n_blocks`. The
/// result is renormalised; the report carries the norm defect and the mass
/// that the forward map carried outside the grid.
pub fn evolve_q(
    q: &ClassicalWaveFunction,
    params: &ModelParams,
    n_blocks: u64,
    opts: &TransportOptions,
) -> Result<(ClassicalWaveFunction, TransportReport)> {
    params.validate()?;
    let lattice = check_grid_params(&q.grid, params)?;
    params.check_stability(&lattice)?;
    let grid = &q.grid;
    let s = grid.sites();
    let measure = grid.measure();

    let values: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let mut sigma = [0.0; MAX_GRID_SITES];
            let mut pi = [0.0; MAX_GRID_SITES];
            let mut scratch = [0.0; MAX_GRID_SITES];
            grid.coords(i, &mut sigma[..s], &mut pi[..s]);
            for _ in 0..n_blocks {
                block_backward(&mut sigma[..s], &mut pi[..s], &lattice, params, &mut scratch[..s]);
            }
            // a preimage that blew up lies far outside the grid, where q vanishes
            if !(all_finite(&sigma[..s]) && all_finite(&pi[..s])) {
                return 0.0;
            }
            interpolate(q, &sigma[..s], &pi[..s])
        })
        .collect();

    let skip_below = opts.leak_tolerance * 1e-6 / grid.len() as f64;
    let leaked: f64 = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let mass = q.values[i] * q.values[i] * measure;
            if mass <= skip_below {
                return 0.0;
            }
            let mut sigma = [0.0; MAX_GRID_SITES];
            let mut pi = [0.0; MAX_GRID_SITES];
            let mut scratch = [0.0; MAX_GRID_SITES];
            grid.coords(i, &mut sigma[..s], &mut pi[..s]);
            for _ in 0..n_blocks {
                block_forward(&mut sigma[..s], &mut pi[..s], &lattice, params, &mut scratch[..s]);
                if outside(grid, &sigma[..s], &pi[..s]) {
                    return mass;
                }
            }
            0.0
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum();
    if leaked > opts.leak_tolerance {
        return Err(Error::BoundaryLeak {
            leaked,
            tolerance: opts.leak_tolerance,
        });
    }

    let evolved = ClassicalWaveFunction::new(
        grid.clone(),
        values,
        q.time + 2.0 * params.lattice_spacing * n_blocks as f64,
    )?;
    let (evolved, norm) = evolved.normalize()?;
    Ok((
        evolved,
        TransportReport {
            norm_sq: norm.norm_sq,
            defect: norm.defect,
            leaked_mass: leaked,
        },
    ))
}

/// One `2 eps` block of transport.
pub fn evolve_q_step(
    q: &ClassicalWaveFunction,
    params: &ModelParams,
    opts: &TransportOptions,
) -> Result<(ClassicalWaveFunction, TransportReport)> {
    evolve_q(q, params, 1, opts)
}

/// Block-by-block transport with one interpolation per block; returns the
/// final state and the per-block reports.
pub fn evolve_q_stepwise(
    q: &ClassicalWaveFunction,
    params: &ModelParams,
    n_blocks: u64,
    opts: &TransportOptions,
) -> Result<(ClassicalWaveFunction, Vec<TransportReport>)> {
    let mut state = q.clone();
    let mut reports = Vec::with_capacity(n_blocks as usize);
    for _ in 0..n_blocks {
        let (next, rep) = evolve_q_step(&state, params, opts)?;
        state = next;
        reports.push(rep);
    }
    Ok((state, reports))
}

/// Spectral derivative of `values` along grid axis `axis`.
pub(crate) fn grid_derivative(grid: &PhaseGrid, values: &[f64], axis: usize) -> Vec<f64> {
    let shape = grid.shape();
    let ax = if axis < grid.sites() { grid.sigma } else { grid.pi };
    let spec = Spectral1d::new(&ax);
    let mut data: Vec<Complex64> = values.iter().map(|&v| v.into()).collect();
    map_lines(&mut data, &shape, axis, |_, line| spec.derivative(line));
    data.into_iter().map(|c| c.re).collect()
}

/// `-L q` with `L = sum_x [pi_x d/dsigma_x + F_x(sigma) d/dpi_x]`, using
/// spectral derivatives on the periodic grid.
pub fn liouville_rhs(q: &ClassicalWaveFunction, params: &ModelParams) -> Result<Vec<f64>> {
    let lattice = check_grid_params(&q.grid, params)?;
    let grid = &q.grid;
    let s = grid.sites();
    let mut rhs = vec![0.0; grid.len()];
    for site in 0..s {
        let ds = grid_derivative(grid, &q.values, grid.sigma_axis(site));
        let dp = grid_derivative(grid, &q.values, grid.pi_axis(site));
        let mut sigma = [0.0; MAX_GRID_SITES];
        let mut pi = [0.0; MAX_GRID_SITES];
        let mut f = [0.0; MAX_GRID_SITES];
        for i in 0..grid.len() {
            grid.coords(i, &mut sigma[..s], &mut pi[..s]);
            force_into(&sigma[..s], &lattice, params, &mut f[..s]);
            rhs[i] -= pi[site] * ds[i] + f[site] * dp[i];
        }
    }
    Ok(rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::{make_gaussian_q, Axis, SiteGaussian};

    fn d0(m2: f64, lambda: f64, eps: f64) -> ModelParams {
        ModelParams::new(m2, lambda, 0, eps).unwrap()
    }

    fn cfg(sigma: Vec<f64>, pi: Vec<f64>) -> FieldConfiguration {
        FieldConfiguration { sigma, pi, time: 0.0 }
    }

    #[test]
    fn force_examples() {
        let l = Lattice::single_site();
        assert_eq!(force(&[0.0], &l, &d0(1.0, 0.5, 0.1)), vec![0.0]);
        assert_eq!(force(&[1.0], &l, &d0(1.0, 0.0, 0.1)), vec![-1.0]);
        assert_eq!(force(&[2.0], &l, &d0(1.0, 2.0, 0.1)), vec![-10.0]);
        // ring of three: laplacian of (1, 0, 0) at site 0 is -2, prefactor 1/(2 eps^2)
        let p = ModelParams::new(0.0, 0.0, 1, 0.5).unwrap();
        let f = force(&[1.0, 0.0, 0.0], &Lattice::new(vec![3]), &p);
        assert!((f[0] + 4.0).abs() < 1e-15 && (f[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn pi_first_substep_example() {
        let l = Lattice::single_site();
        let next = step_update(&cfg(vec![1.0], vec![0.0]), &l, &d0(1.0, 0.0, 0.01), StepDirection::forward(SubstepOrder::PiFirst))
            .unwrap();
        assert!((next.pi[0] + 0.01).abs() < 1e-15);
        assert!((next.sigma[0] - 0.9999).abs() < 1e-15);
        assert!((next.time - 0.01).abs() < 1e-15);
    }

    #[test]
    fn free_streaming() {
        let l = Lattice::single_site();
        let p = d0(0.0, 0.0, 0.1);
        for order in [SubstepOrder::PiFirst, SubstepOrder::SigmaFirst] {
            let next = step_update(&cfg(vec![0.3], vec![2.0]), &l, &p, StepDirection::forward(order)).unwrap();
            assert!((next.sigma[0] - 0.5).abs() < 1e-15);
            assert_eq!(next.pi[0], 2.0);
        }
    }

    #[test]
    fn backward_inverts_forward() {
        let l = Lattice::new(vec![5]);
        let p = ModelParams::new(1.0, 0.7, 1, 0.1).unwrap().with_laplacian_prefactor(0.2).unwrap();
        let c0 = cfg(vec![0.1, -0.4, 1.2, 0.0, 0.3], vec![0.5, 0.2, -0.1, 0.9, -1.0]);
        for order in [SubstepOrder::PiFirst, SubstepOrder::SigmaFirst] {
            let c1 = step_update(&c0, &l, &p, StepDirection::forward(order)).unwrap();
            let c2 = step_update(&c1, &l, &p, StepDirection::backward(order)).unwrap();
            for x in 0..5 {
                assert!((c2.sigma[x] - c0.sigma[x]).abs() < 1e-12);
                assert!((c2.pi[x] - c0.pi[x]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn divergence_is_reported() {
        let l = Lattice::single_site();
        let c = FieldConfiguration {
            sigma: vec![1e200],
            pi: vec![0.0],
            time: 0.3,
        };
        let err = step_update(&c, &l, &d0(1.0, 1.0, 0.1), StepDirection::forward(SubstepOrder::PiFirst)).unwrap_err();
        assert_eq!(err, Error::Divergence { step: 3, member: None });
    }

    #[test]
    fn block_satisfies_step_operator_constraints() {
        // the two-substep composition solves the printed delta-function arguments
        let l = Lattice::new(vec![4]);
        let p = ModelParams::new(0.8, 0.5, 1, 0.05).unwrap().with_laplacian_prefactor(0.1).unwrap();
        let c0 = cfg(vec![0.2, -0.1, 0.7, 0.4], vec![0.3, -0.6, 0.1, 0.0]);
        let mut c1 = c0.clone();
        let mut scratch = vec![0.0; 4];
        block_forward(&mut c1.sigma, &mut c1.pi, &l, &p, &mut scratch);
        let (rs, rp) = step_operator_residual(&c0, &c1, &l, &p);
        assert!(rs < 1e-15 && rp < 1e-15, "{rs} {rp}");
    }

    #[test]
    fn cubic_weights_reproduce_cubics() {
        for &p in &[0.0, 0.25, 0.5, 0.9] {
            let (i0, w) = cubic_stencil(3.0 + p);
            let f = |x: f64| 1.0 - 2.0 * x + 0.5 * x * x - 0.1 * x * x * x;
            let v: f64 = (0..4).map(|o| w[o] * f((i0 + o as i64) as f64)).sum();
            assert!((v - f(3.0 + p)).abs() < 1e-12);
        }
    }

    fn grid1(n: usize, half: f64) -> PhaseGrid {
        let a = Axis::spanning(0.0, half, n).unwrap();
        PhaseGrid::new(a, a, 1).unwrap()
    }

    #[test]
    fn free_streaming_moves_gaussian_centre() {
        let grid = grid1(161, 8.0);
        let q = make_gaussian_q(&grid, SiteGaussian::new(0.0, 1.0, 1.0, 0.6).unwrap()).unwrap();
        let p = d0(0.0, 0.0, 0.05);
        let (q1, rep) = evolve_q(&q, &p, 10, &TransportOptions::default()).unwrap();
        assert!(rep.defect.abs() < 1e-8);
        let mut s = [0.0];
        let mut pp = [0.0];
        let (mut ms, mut mp) = (0.0, 0.0);
        for i in 0..grid.len() {
            grid.coords(i, &mut s, &mut pp);
            let w = q1.values[i] * q1.values[i] * grid.measure();
            ms += s[0] * w;
            mp += pp[0] * w;
        }
        assert!((ms - 2.0 * 0.05 * 10.0).abs() < 1e-8, "{ms}");
        // pi is untouched by the flow but every row is interpolated in sigma
        assert!((mp - 1.0).abs() < 1e-7, "{mp}");
    }

    #[test]
    fn concentrated_state_follows_leapfrog_point() {
        let grid = grid1(81, 6.0);
        let p = d0(1.0, 0.0, 0.05);
        let mut q = ClassicalWaveFunction::zeros(grid.clone());
        let start = grid.ravel(&[50, 35]);
        q.values[start] = 1.0;
        let (q1, _) = evolve_q(&q, &p, 7, &TransportOptions { leak_tolerance: 1.0 }).unwrap();
        let (argmax, _) = q1
            .values
            .iter()
            .enumerate()
            .fold((0, 0.0), |(bi, bv), (i, &v)| if v.abs() > bv { (i, v.abs()) } else { (bi, bv) });
        let mut s = [grid.sigma.node(50)];
        let mut pp = [grid.pi.node(35)];
        let mut scratch = [0.0];
        for _ in 0..7 {
            block_forward(&mut s, &mut pp, &Lattice::single_site(), &p, &mut scratch);
        }
        let mut idx = [0; 2];
        grid.unravel(argmax, &mut idx);
        assert!((grid.sigma.node(idx[0]) - s[0]).abs() <= grid.sigma.spacing);
        assert!((grid.pi.node(idx[1]) - pp[0]).abs() <= grid.pi.spacing);
    }

    #[test]
    fn leaking_mass_is_an_error() {
        let grid = grid1(81, 7.0);
        let q = make_gaussian_q(&grid, SiteGaussian::new(0.0, 0.0, 1.0, 1.0).unwrap()).unwrap();
        let err = evolve_q(&q, &d0(0.0, 0.0, 0.1), 40, &TransportOptions::default()).unwrap_err();
        assert!(matches!(err, Error::BoundaryLeak { .. }));
    }

    #[test]
    fn liouville_rhs_vanishes_on_constant_and_is_skew() {
        let grid = grid1(41, 5.0);
        let p = d0(1.0, 0.3, 0.01);
        let c = ClassicalWaveFunction::new(grid.clone(), vec![0.7; grid.len()], 0.0).unwrap();
        assert!(liouville_rhs(&c, &p).unwrap().iter().all(|v| v.abs() < 1e-12));
        let q = make_gaussian_q(&grid1(81, 7.0), SiteGaussian::new(0.4, -0.2, 0.9, 0.8).unwrap()).unwrap();
        let r = liouville_rhs(&q, &p).unwrap();
        let dot: f64 = q.values.iter().zip(&r).map(|(a, b)| a * b).sum();
        assert!(dot.abs() < 1e-10);
    }

    #[test]
    fn liouville_rhs_commutes_with_phase_space_parity() {
        let grid = grid1(81, 7.0);
        let p = d0(1.0, 0.0, 0.01);
        let q = make_gaussian_q(&grid, SiteGaussian::new(0.5, 0.3, 0.9, 0.8).unwrap()).unwrap();
        let mut reflected = q.clone();
        reflected.values.reverse();
        let r = liouville_rhs(&q, &p).unwrap();
        let mut rr = liouville_rhs(&reflected, &p).unwrap();
        rr.reverse();
        for (a, b) in r.iter().zip(&rr) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
