//! Observables in both descriptions: functions on phase space averaged with
//! `q^2`, and operators acting on `psi(sigma, zeta)`.
//!
//! `sigma`, `zeta`, `phi = sigma + zeta/2` and `chi = sigma - zeta/2` act by
//! multiplication. `pi = -i d/dzeta` is applied exactly by transforming the
//! zeta axis back to momentum, multiplying and transforming again.
//! `p = -i d/dphi` at fixed `chi` is `-i (d/dsigma / 2 + d/dzeta)`; its sigma
//! part is a spectral derivative on the periodic sigma axis.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{map_lines, ConjugateTransform, Spectral1d};
use crate::phase_space::{ClassicalWaveFunction, ComplexWaveFunction, PhaseGrid, WaveFunction, MAX_GRID_SITES};
use crate::spectral::fourier_pi_to_zeta;
use crate::transport::grid_derivative;

/// Largest imaginary part tolerated in the expectation of a Hermitian operator.
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;
/// Largest edge weight of a state admitted to commutator checks.
pub const BAND_LIMIT_TOLERANCE: f64 = 1e-6;
/// Tolerance of the roughness and dispersion identities.
pub const IDENTITY_TOLERANCE: f64 = 1e-8;
/// Fraction of each axis, at each end, that counts as its edge.
const EDGE_FRACTION: f64 = 0.125;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    SigmaHat,
    PiHat,
    ZetaHat,
    PhiHat,
    ChiHat,
    PHat,
}

impl OperatorKind {
    pub const ALL: [OperatorKind; 6] = [
        OperatorKind::SigmaHat,
        OperatorKind::PiHat,
        OperatorKind::ZetaHat,
        OperatorKind::PhiHat,
        OperatorKind::ChiHat,
        OperatorKind::PHat,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::SigmaHat => "sigma_hat",
            Self::PiHat => "pi_hat",
            Self::ZetaHat => "zeta_hat",
            Self::PhiHat => "phi_hat",
            Self::ChiHat => "chi_hat",
            Self::PHat => "p_hat",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    fn is_multiplication(&self) -> bool {
        !matches!(self, Self::PiHat | Self::PHat)
    }
}

/// An operator acting on one site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OperatorKernel {
    pub kind: OperatorKind,
    pub site: usize,
}

impl OperatorKernel {
    pub fn new(kind: OperatorKind, site: usize) -> Self {
        Self { kind, site }
    }
}

fn check_site(grid: &PhaseGrid, site: usize) -> Result<()> {
    if site >= grid.sites() {
        return Err(Error::param("site", format!("site {site} outside a grid of {} sites", grid.sites())));
    }
    Ok(())
}

/// Multiplies `data` by `f(sigma_site, zeta_site)`.
fn multiply(grid: &PhaseGrid, data: &mut [Complex64], site: usize, f: impl Fn(f64, f64) -> f64) {
    let s = grid.sites();
    let mut sigma = [0.0; MAX_GRID_SITES];
    let mut zeta = [0.0; MAX_GRID_SITES];
    for (i, v) in data.iter_mut().enumerate() {
        grid.conjugate_coords(i, &mut sigma[..s], &mut zeta[..s]);
        *v *= f(sigma[site], zeta[site]);
    }
}

/// `pi_hat` on one site: back to momentum along the zeta axis, multiply by pi, forward again.
fn apply_pi(grid: &PhaseGrid, data: &mut [Complex64], site: usize) {
    let t = ConjugateTransform::new(&grid.pi);
    let pi = grid.pi;
    map_lines(data, &grid.shape(), grid.pi_axis(site), |_, line| {
        t.to_momentum(line);
        for (j, v) in line.iter_mut().enumerate() {
            *v *= pi.node(j);
        }
        t.to_conjugate(line);
    });
}

fn d_sigma(grid: &PhaseGrid, data: &mut [Complex64], site: usize) {
    let spec = Spectral1d::new(&grid.sigma);
    map_lines(data, &grid.shape(), grid.sigma_axis(site), |_, line| spec.derivative(line));
}

fn apply_raw(grid: &PhaseGrid, data: &mut Vec<Complex64>, op: OperatorKernel) {
    let site = op.site;
    match op.kind {
        OperatorKind::SigmaHat => multiply(grid, data, site, |s, _| s),
        OperatorKind::ZetaHat => multiply(grid, data, site, |_, z| z),
        OperatorKind::PhiHat => multiply(grid, data, site, |s, z| s + 0.5 * z),
        OperatorKind::ChiHat => multiply(grid, data, site, |s, z| s - 0.5 * z),
        OperatorKind::PiHat => apply_pi(grid, data, site),
        OperatorKind::PHat => {
            let mut ds = data.clone();
            d_sigma(grid, &mut ds, site);
            apply_pi(grid, data, site);
            let half_i = Complex64::new(0.0, -0.5);
            for (v, d) in data.iter_mut().zip(ds) {
                *v += half_i * d;
            }
        }
    }
}

/// `A psi`.
pub fn apply(psi: &ComplexWaveFunction, op: OperatorKernel) -> Result<ComplexWaveFunction> {
    check_site(&psi.grid, op.site)?;
    let mut out = psi.clone();
    apply_raw(&psi.grid, &mut out.values, op);
    Ok(out)
}

/// `A_1 A_2 .. A_n psi`; the last operator acts first.
pub fn apply_product(psi: &ComplexWaveFunction, ops: &[OperatorKernel]) -> Result<ComplexWaveFunction> {
    for op in ops {
        check_site(&psi.grid, op.site)?;
    }
    let mut out = psi.clone();
    for op in ops.iter().rev() {
        apply_raw(&psi.grid, &mut out.values, *op);
    }
    Ok(out)
}

/// `sum f(sigma, pi) q^2` with the discrete measure; `f` receives the
/// per-site coordinates.
pub fn expect_classical<F>(q: &ClassicalWaveFunction, f: F) -> f64
where
    F: Fn(&[f64], &[f64]) -> f64,
{
    let g = &q.grid;
    let s = g.sites();
    let mut sigma = [0.0; MAX_GRID_SITES];
    let mut pi = [0.0; MAX_GRID_SITES];
    let mut sum = 0.0;
    for (i, v) in q.values.iter().enumerate() {
        g.coords(i, &mut sigma[..s], &mut pi[..s]);
        sum += f(&sigma[..s], &pi[..s]) * v * v;
    }
    sum * g.measure()
}

/// `<psi| A_1 .. A_n |psi>` as a complex number.
pub fn expect_product_complex(psi: &ComplexWaveFunction, ops: &[OperatorKernel]) -> Result<Complex64> {
    let a = apply_product(psi, ops)?;
    psi.inner(&a)
}

/// Real expectation of a product of operators; fails if the imaginary part
/// exceeds [`HERMITIAN_TOLERANCE`].
pub fn expect_quantum_product(psi: &ComplexWaveFunction, ops: &[OperatorKernel]) -> Result<f64> {
    let z = expect_product_complex(psi, ops)?;
    if z.im.abs() > HERMITIAN_TOLERANCE {
        return Err(Error::NonHermitian { residue: z.im.abs() });
    }
    Ok(z.re)
}

/// `<psi| A |psi>` by the quantum rule.
pub fn expect_quantum(psi: &ComplexWaveFunction, op: OperatorKernel) -> Result<f64> {
    expect_quantum_product(psi, &[op])
}

/// `sigma^a pi^b` on one site as an operator product.
pub fn monomial(site: usize, sigma_power: usize, pi_power: usize) -> Vec<OperatorKernel> {
    let mut ops = vec![OperatorKernel::new(OperatorKind::SigmaHat, site); sigma_power];
    ops.extend(std::iter::repeat_n(OperatorKernel::new(OperatorKind::PiHat, site), pi_power));
    ops
}

/// Fraction of the total weight sitting in the outer [`EDGE_FRACTION`] of
/// axis `axis` at either end.
fn edge_weight(shape: &[usize], data: &[Complex64], axis: usize) -> f64 {
    let n = shape[axis];
    let band = ((n as f64 * EDGE_FRACTION).ceil() as usize).max(1);
    let stride: usize = shape[axis + 1..].iter().product();
    let mut edge = 0.0;
    let mut total = 0.0;
    for (i, v) in data.iter().enumerate() {
        let j = (i / stride) % n;
        let w = v.norm_sqr();
        total += w;
        if j < band || j >= n - band {
            edge += w;
        }
    }
    if total > 0.0 {
        edge / total
    } else {
        0.0
    }
}

/// Largest edge weight over every axis of `psi(sigma, zeta)` and of its
/// double-Fourier partner (sigma-frequency and pi). Spectral derivatives
/// and the canonical commutators are only meaningful when this is small.
pub fn band_limit_defect(psi: &ComplexWaveFunction) -> f64 {
    let g = &psi.grid;
    let shape = g.shape();
    let mut worst: f64 = 0.0;
    for a in 0..shape.len() {
        worst = worst.max(edge_weight(&shape, &psi.values, a));
    }
    // sigma -> frequency (centred), zeta -> pi
    let mut dual = psi.values.clone();
    let t = ConjugateTransform::new(&g.pi);
    let ts = ConjugateTransform::new(&g.sigma);
    for site in 0..g.sites() {
        map_lines(&mut dual, &shape, g.pi_axis(site), |_, line| t.to_momentum(line));
        map_lines(&mut dual, &shape, g.sigma_axis(site), |_, line| ts.to_conjugate(line));
    }
    for a in 0..shape.len() {
        worst = worst.max(edge_weight(&shape, &dual, a));
    }
    worst
}

/// `(AB - BA) psi` for band-limited states.
pub fn commutator_apply(a: OperatorKernel, b: OperatorKernel, psi: &ComplexWaveFunction) -> Result<ComplexWaveFunction> {
    commutator_apply_with_tolerance(a, b, psi, BAND_LIMIT_TOLERANCE)
}

pub fn commutator_apply_with_tolerance(
    a: OperatorKernel,
    b: OperatorKernel,
    psi: &ComplexWaveFunction,
    tolerance: f64,
) -> Result<ComplexWaveFunction> {
    let defect = band_limit_defect(psi);
    if !(defect <= tolerance) {
        return Err(Error::BandLimit { defect, tolerance });
    }
    let ab = apply_product(psi, &[a, b])?;
    let ba = apply_product(psi, &[b, a])?;
    let values = ab.values.iter().zip(&ba.values).map(|(x, y)| x - y).collect();
    ComplexWaveFunction::new(psi.grid.clone(), values, psi.time)
}

/// The c-number `c` with `[A, B] = c` implied by the operator definitions
/// (dimensionless lattice delta, so `c` does not depend on the grid).
pub fn expected_commutator(a: OperatorKernel, b: OperatorKernel) -> Complex64 {
    use OperatorKind::*;
    if a.site != b.site || (a.kind.is_multiplication() && b.kind.is_multiplication()) {
        return Complex64::new(0.0, 0.0);
    }
    // [x, pi] and [x, p] for a multiplication operator x = alpha sigma + beta zeta:
    // [sigma, pi] = 0, [zeta, pi] = i, [sigma, p] = i/2, [zeta, p] = i
    let coeffs = |k: OperatorKind| match k {
        SigmaHat => (1.0, 0.0),
        ZetaHat => (0.0, 1.0),
        PhiHat => (1.0, 0.5),
        ChiHat => (1.0, -0.5),
        PiHat | PHat => (0.0, 0.0),
    };
    let with = |x: OperatorKind, d: OperatorKind| {
        let (alpha, beta) = coeffs(x);
        let im = match d {
            PiHat => beta,
            PHat => 0.5 * alpha + beta,
            _ => 0.0,
        };
        Complex64::new(0.0, im)
    };
    match (a.kind.is_multiplication(), b.kind.is_multiplication()) {
        (true, false) => with(a.kind, b.kind),
        (false, true) => -with(b.kind, a.kind),
        // pi and p commute: both are derivatives
        _ => Complex64::new(0.0, 0.0),
    }
}

/// `max |[A, B] psi - c psi|` with `c` the expected c-number.
pub fn commutator_defect(a: OperatorKernel, b: OperatorKernel, psi: &ComplexWaveFunction, c: Complex64) -> Result<f64> {
    let comm = commutator_apply(a, b, psi)?;
    Ok(comm
        .values
        .iter()
        .zip(&psi.values)
        .map(|(x, p)| (x - c * p).norm())
        .fold(0.0, f64::max))
}

/// Fraction of `<zeta^2>` carried by the top octave of zeta frequencies.
fn roughness_tail(psi: &ComplexWaveFunction, site: usize) -> f64 {
    let g = &psi.grid;
    let s = g.sites();
    let zmax = g.zeta().upper();
    let mut sigma = [0.0; MAX_GRID_SITES];
    let mut zeta = [0.0; MAX_GRID_SITES];
    let (mut tail, mut total) = (0.0, 0.0);
    for (i, v) in psi.values.iter().enumerate() {
        g.conjugate_coords(i, &mut sigma[..s], &mut zeta[..s]);
        let w = zeta[site] * zeta[site] * v.norm_sqr();
        total += w;
        if zeta[site].abs() > 0.5 * zmax {
            tail += w;
        }
    }
    if total > 0.0 {
        tail / total
    } else {
        0.0
    }
}

/// Both routes to the roughness of `q` along `pi_site`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Roughness {
    /// `int (dq/dpi)^2`
    pub derivative_route: f64,
    /// `<zeta^2>` by the quantum rule
    pub fourier_route: f64,
    /// fraction of `<zeta^2>` above half the largest resolved `|zeta|`
    pub spectral_tail: f64,
}

pub fn roughness_routes(q: &ClassicalWaveFunction, site: usize) -> Result<Roughness> {
    check_site(&q.grid, site)?;
    let dq = grid_derivative(&q.grid, &q.values, q.grid.pi_axis(site));
    let derivative_route = dq.iter().map(|v| v * v).sum::<f64>() * q.grid.measure();
    let psi = fourier_pi_to_zeta(q);
    let zz = [OperatorKernel::new(OperatorKind::ZetaHat, site); 2];
    let fourier_route = expect_quantum_product(&psi, &zz)?;
    Ok(Roughness {
        derivative_route,
        fourier_route,
        spectral_tail: roughness_tail(&psi, site),
    })
}

/// `int (dq/dpi)^2`, cross-checked against `<zeta^2>`; under-resolved pi
/// grids are reported instead of returning a number.
pub fn zeta_roughness(q: &ClassicalWaveFunction, site: usize) -> Result<f64> {
    zeta_roughness_with_tolerance(q, site, IDENTITY_TOLERANCE)
}

pub fn zeta_roughness_with_tolerance(q: &ClassicalWaveFunction, site: usize, tolerance: f64) -> Result<f64> {
    let r = roughness_routes(q, site)?;
    let gap = (r.derivative_route - r.fourier_route).abs();
    if gap > tolerance {
        return Err(Error::Resolution(format!(
            "roughness routes differ by {gap:e} (derivative {}, fourier {})",
            r.derivative_route, r.fourier_route
        )));
    }
    if r.spectral_tail > tolerance {
        return Err(Error::Resolution(format!(
            "{:e} of the roughness sits in the top zeta octave",
            r.spectral_tail
        )));
    }
    Ok(r.derivative_route)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dispersion {
    pub var_phi: f64,
    pub var_sigma: f64,
    pub zeta_sq: f64,
}

/// `Var(phi)`, `Var(sigma)` and `<zeta^2>` on one site, checking
/// `Var(phi) = Var(sigma) + <zeta^2>/4`.
pub fn dispersion_decomposition(q: &ClassicalWaveFunction, site: usize) -> Result<Dispersion> {
    dispersion_decomposition_with_tolerance(q, site, IDENTITY_TOLERANCE)
}

pub fn dispersion_decomposition_with_tolerance(q: &ClassicalWaveFunction, site: usize, tolerance: f64) -> Result<Dispersion> {
    check_site(&q.grid, site)?;
    let psi = fourier_pi_to_zeta(q);
    let phi = OperatorKernel::new(OperatorKind::PhiHat, site);
    let zeta = OperatorKernel::new(OperatorKind::ZetaHat, site);
    let mean_phi = expect_quantum(&psi, phi)?;
    let var_phi = expect_quantum_product(&psi, &[phi, phi])? - mean_phi * mean_phi;
    let mean_sigma = expect_classical(q, |s, _| s[site]);
    let var_sigma = expect_classical(q, |s, _| (s[site] - mean_sigma).powi(2));
    let zeta_sq = expect_quantum_product(&psi, &[zeta, zeta])?;
    let deviation = (var_phi - var_sigma - 0.25 * zeta_sq).abs();
    if deviation > tolerance {
        return Err(Error::IdentityViolation {
            name: "var_phi = var_sigma + zeta_sq / 4",
            deviation,
        });
    }
    Ok(Dispersion {
        var_phi,
        var_sigma,
        zeta_sq,
    })
}

/// Deviations of the statistical-observable identities on one site.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    /// `|<zeta>|`
    pub zeta_mean: f64,
    /// `|int (dq/dpi)^2 - <zeta^2>|`
    pub roughness_gap: f64,
    /// `|Var(phi) - Var(sigma) - <zeta^2>/4|`
    pub dispersion_gap: f64,
    /// `max(|<phi> - <sigma>|, |<chi> - <sigma>|)`, `<sigma>` by the classical rule
    pub mean_gap: f64,
    /// imaginary residue of the normalised `psi` norm, for reference
    pub norm_defect: f64,
}

/// Evaluates every identity without enforcing tolerances.
pub fn identity_report(q: &ClassicalWaveFunction, site: usize) -> Result<IdentityReport> {
    check_site(&q.grid, site)?;
    let psi = fourier_pi_to_zeta(q);
    let k = |kind| OperatorKernel::new(kind, site);
    let zeta_mean = expect_product_complex(&psi, &[k(OperatorKind::ZetaHat)])?.norm();
    let r = roughness_routes(q, site)?;
    let phi = k(OperatorKind::PhiHat);
    let mean_phi = expect_product_complex(&psi, &[phi])?.re;
    let mean_chi = expect_product_complex(&psi, &[k(OperatorKind::ChiHat)])?.re;
    let var_phi = expect_product_complex(&psi, &[phi, phi])?.re - mean_phi * mean_phi;
    let mean_sigma = expect_classical(q, |s, _| s[site]);
    let var_sigma = expect_classical(q, |s, _| (s[site] - mean_sigma).powi(2));
    Ok(IdentityReport {
        zeta_mean,
        roughness_gap: (r.derivative_route - r.fourier_route).abs(),
        dispersion_gap: (var_phi - var_sigma - 0.25 * r.fourier_route).abs(),
        mean_gap: (mean_phi - mean_sigma).abs().max((mean_chi - mean_sigma).abs()),
        norm_defect: (psi.norm_sq() - 1.0).abs(),
    })
}
