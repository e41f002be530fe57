//! Phase-space grids and the two wave-function containers.
//!
//! A grid covers `sites` copies of the pair `(sigma, pi)`. Values are stored
//! row-major over the axes `[sigma_0, .., sigma_{s-1}, pi_0, .., pi_{s-1}]`.
//! The discrete measure per node is `(dsigma dpi / 2pi)^sites` for the real
//! wave function and `(dsigma dzeta)^sites` for the complex one, which makes
//! the `pi <-> zeta` transform exactly unitary.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distance between the Gaussian mean and the grid edge, in widths, below
/// which [`make_gaussian_q`] refuses to build the state.
pub const MIN_SUPPORT_WIDTHS: f64 = 6.0;

/// Deviation of the squared norm from one that still counts as unit norm.
pub const UNIT_NORM_SLACK: f64 = 1e-14;

/// Largest number of sites a full phase-space grid may carry.
pub const MAX_GRID_SITES: usize = 2;

/// Uniform, node-centred axis with an odd number of nodes
/// `x_j = center + (j - (count - 1)/2) spacing`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub center: f64,
    pub spacing: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(center: f64, spacing: f64, count: usize) -> Result<Self> {
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::param("spacing", "must be finite and > 0"));
        }
        if !center.is_finite() {
            return Err(Error::param("center", "must be finite"));
        }
        if count < 3 || count % 2 == 0 {
            return Err(Error::param("count", format!("must be odd and >= 3, got {count}")));
        }
        Ok(Self { center, spacing, count })
    }

    /// Axis of `count` nodes spanning `[-half_width, half_width]` around `center`.
    pub fn spanning(center: f64, half_width: f64, count: usize) -> Result<Self> {
        let spacing = 2.0 * half_width / (count.max(2) - 1) as f64;
        Self::new(center, spacing, count)
    }

    #[inline]
    fn half(&self) -> f64 {
        ((self.count - 1) / 2) as f64
    }

    #[inline]
    pub fn node(&self, j: usize) -> f64 {
        self.center + (j as f64 - self.half()) * self.spacing
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.count).map(|j| self.node(j)).collect()
    }

    pub fn lower(&self) -> f64 {
        self.node(0)
    }

    pub fn upper(&self) -> f64 {
        self.node(self.count - 1)
    }

    /// Fractional node index of coordinate `x`.
    #[inline]
    pub fn position(&self, x: f64) -> f64 {
        (x - self.center) / self.spacing + self.half()
    }

    /// The discrete-Fourier dual axis, centred at zero.
    pub fn dual(&self) -> Axis {
        Axis {
            center: 0.0,
            spacing: 2.0 * PI / (self.count as f64 * self.spacing),
            count: self.count,
        }
    }

    /// Index of the node mirrored through the axis centre.
    #[inline]
    pub fn mirror(&self, j: usize) -> usize {
        self.count - 1 - j
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub sigma: Axis,
    pub pi: Axis,
    sites: usize,
}

impl PhaseGrid {
    pub fn new(sigma: Axis, pi: Axis, sites: usize) -> Result<Self> {
        if sites == 0 {
            return Err(Error::param("sites", "must be at least 1"));
        }
        if sites > MAX_GRID_SITES {
            return Err(Error::Feasibility { sites });
        }
        Ok(Self { sigma, pi, sites })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn shape(&self) -> Vec<usize> {
        let mut s = vec![self.sigma.count; self.sites];
        s.extend(std::iter::repeat_n(self.pi.count, self.sites));
        s
    }

    pub fn len(&self) -> usize {
        self.shape().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn zeta(&self) -> Axis {
        self.pi.dual()
    }

    /// Weight of one node in sums over the real wave function.
    pub fn measure(&self) -> f64 {
        (self.sigma.spacing * self.pi.spacing / (2.0 * PI)).powi(self.sites as i32)
    }

    /// Weight of one node in sums over the complex wave function.
    pub fn conjugate_measure(&self) -> f64 {
        (self.sigma.spacing * self.zeta().spacing).powi(self.sites as i32)
    }

    #[inline]
    pub fn sigma_axis(&self, site: usize) -> usize {
        site
    }

    #[inline]
    pub fn pi_axis(&self, site: usize) -> usize {
        self.sites + site
    }

    /// Per-axis node indices of a flat index.
    pub fn unravel(&self, mut flat: usize, out: &mut [usize]) {
        let shape = self.shape();
        for a in (0..shape.len()).rev() {
            out[a] = flat % shape[a];
            flat /= shape[a];
        }
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        let shape = self.shape();
        idx.iter().zip(&shape).fold(0, |acc, (&i, &n)| acc * n + i)
    }

    /// Coordinates `(sigma, pi)` of node `flat`.
    pub fn coords(&self, flat: usize, sigma: &mut [f64], pi: &mut [f64]) {
        let mut idx = [0usize; 2 * MAX_GRID_SITES];
        let idx = &mut idx[..2 * self.sites];
        self.unravel(flat, idx);
        for s in 0..self.sites {
            sigma[s] = self.sigma.node(idx[s]);
            pi[s] = self.pi.node(idx[self.sites + s]);
        }
    }

    /// Coordinates `(sigma, zeta)` of node `flat` on the conjugate grid.
    pub fn conjugate_coords(&self, flat: usize, sigma: &mut [f64], zeta: &mut [f64]) {
        let z = self.zeta();
        let mut idx = [0usize; 2 * MAX_GRID_SITES];
        let idx = &mut idx[..2 * self.sites];
        self.unravel(flat, idx);
        for s in 0..self.sites {
            sigma[s] = self.sigma.node(idx[s]);
            zeta[s] = z.node(idx[self.sites + s]);
        }
    }

    /// Flat index of the node with every momentum-type index mirrored.
    pub fn mirror_momenta(&self, flat: usize) -> usize {
        let mut idx = [0usize; 2 * MAX_GRID_SITES];
        let idx = &mut idx[..2 * self.sites];
        self.unravel(flat, idx);
        for s in 0..self.sites {
            idx[self.sites + s] = self.pi.mirror(idx[self.sites + s]);
        }
        self.ravel(idx)
    }

    pub(crate) fn check_same(&self, other: &PhaseGrid) -> Result<()> {
        if self != other {
            return Err(Error::ShapeMismatch("wave functions live on different grids".into()));
        }
        Ok(())
    }
}

/// Outcome of a normalisation: the squared norm found before rescaling and
/// its deviation from one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormReport {
    pub norm_sq: f64,
    pub defect: f64,
}

/// Common surface of the two wave-function containers.
pub trait WaveFunction: Sized {
    fn grid(&self) -> &PhaseGrid;
    fn norm_sq(&self) -> f64;
    fn scale(&mut self, factor: f64);

    /// Rescales to unit discrete norm.
    fn normalize(mut self) -> Result<(Self, NormReport)> {
        let norm_sq = self.norm_sq();
        if !(norm_sq > 0.0) || !norm_sq.is_finite() {
            return Err(Error::ZeroNorm);
        }
        // already unit to round-off: leave the values bit-identical
        if (norm_sq - 1.0).abs() > UNIT_NORM_SLACK {
            self.scale(1.0 / norm_sq.sqrt());
        }
        Ok((
            self,
            NormReport {
                norm_sq,
                defect: norm_sq - 1.0,
            },
        ))
    }
}

pub fn normalize<W: WaveFunction>(w: W) -> Result<(W, NormReport)> {
    w.normalize()
}

/// Real classical wave function `q(sigma, pi)`; `q^2` is the probability density.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalWaveFunction {
    pub grid: PhaseGrid,
    pub values: Vec<f64>,
    pub time: f64,
}

impl ClassicalWaveFunction {
    pub fn new(grid: PhaseGrid, values: Vec<f64>, time: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values, time })
    }

    pub fn zeros(grid: PhaseGrid) -> Self {
        let n = grid.len();
        Self {
            grid,
            values: vec![0.0; n],
            time: 0.0,
        }
    }
}

impl WaveFunction for ClassicalWaveFunction {
    fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() * self.grid.measure()
    }

    fn scale(&mut self, factor: f64) {
        self.values.iter_mut().for_each(|v| *v *= factor);
    }
}

/// Complex wave function `psi(sigma, zeta)` on the conjugate grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexWaveFunction {
    /// The `(sigma, pi)` grid; the zeta axis is `grid.zeta()`.
    pub grid: PhaseGrid,
    pub values: Vec<Complex64>,
    pub time: f64,
}

impl ComplexWaveFunction {
    pub fn new(grid: PhaseGrid, values: Vec<Complex64>, time: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values, time })
    }

    /// Builds `psi` from a function of the conjugate coordinates.
    pub fn from_fn<F>(grid: PhaseGrid, time: f64, f: F) -> Self
    where
        F: Fn(&[f64], &[f64]) -> Complex64,
    {
        let s = grid.sites();
        let mut sigma = [0.0; MAX_GRID_SITES];
        let mut zeta = [0.0; MAX_GRID_SITES];
        let values = (0..grid.len())
            .map(|i| {
                grid.conjugate_coords(i, &mut sigma[..s], &mut zeta[..s]);
                f(&sigma[..s], &zeta[..s])
            })
            .collect();
        Self { grid, values, time }
    }

    /// `<a|b>` with the conjugate measure.
    pub fn inner(&self, other: &ComplexWaveFunction) -> Result<Complex64> {
        self.grid.check_same(&other.grid)?;
        let sum: Complex64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(sum * self.grid.conjugate_measure())
    }

    pub fn max_abs_diff(&self, other: &ComplexWaveFunction) -> Result<f64> {
        self.grid.check_same(&other.grid)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}

impl WaveFunction for ComplexWaveFunction {
    fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.conjugate_measure()
    }

    fn scale(&mut self, factor: f64) {
        self.values.iter_mut().for_each(|v| *v *= factor);
    }
}

/// Product-Gaussian parameters shared by all sites: `q^2` has means
/// `(mean_sigma, mean_pi)` and standard deviations `(width_sigma, width_pi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SiteGaussian {
    pub mean_sigma: f64,
    pub mean_pi: f64,
    pub width_sigma: f64,
    pub width_pi: f64,
}

impl SiteGaussian {
    pub fn new(mean_sigma: f64, mean_pi: f64, width_sigma: f64, width_pi: f64) -> Result<Self> {
        let g = Self {
            mean_sigma,
            mean_pi,
            width_sigma,
            width_pi,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.width_sigma.is_finite() && self.width_sigma > 0.0) {
            return Err(Error::param("width_sigma", "must be finite and > 0"));
        }
        if !(self.width_pi.is_finite() && self.width_pi > 0.0) {
            return Err(Error::param("width_pi", "must be finite and > 0"));
        }
        if !(self.mean_sigma.is_finite() && self.mean_pi.is_finite()) {
            return Err(Error::param("mean", "must be finite"));
        }
        Ok(())
    }

    /// Unnormalised `q` factor of one site.
    #[inline]
    pub fn amplitude(&self, sigma: f64, pi: f64) -> f64 {
        let ds = (sigma - self.mean_sigma) / self.width_sigma;
        let dp = (pi - self.mean_pi) / self.width_pi;
        (-0.25 * (ds * ds + dp * dp)).exp()
    }
}

/// Normalised product Gaussian `q`, identical on every site.
pub fn make_gaussian_q(grid: &PhaseGrid, g: SiteGaussian) -> Result<ClassicalWaveFunction> {
    g.validate()?;
    let check = |axis: &Axis, mean: f64, width: f64, name: &str| {
        let lo = mean - MIN_SUPPORT_WIDTHS * width;
        let hi = mean + MIN_SUPPORT_WIDTHS * width;
        if lo < axis.lower() || hi > axis.upper() {
            Err(Error::SupportTruncated(format!(
                "{name} axis [{}, {}] does not contain [{lo}, {hi}] ({MIN_SUPPORT_WIDTHS} widths)",
                axis.lower(),
                axis.upper()
            )))
        } else {
            Ok(())
        }
    };
    check(&grid.sigma, g.mean_sigma, g.width_sigma, "sigma")?;
    check(&grid.pi, g.mean_pi, g.width_pi, "pi")?;

    let s = grid.sites();
    let mut sigma = [0.0; MAX_GRID_SITES];
    let mut pi = [0.0; MAX_GRID_SITES];
    let values = (0..grid.len())
        .map(|i| {
            grid.coords(i, &mut sigma[..s], &mut pi[..s]);
            (0..s).map(|x| g.amplitude(sigma[x], pi[x])).product()
        })
        .collect();
    let q = ClassicalWaveFunction::new(grid.clone(), values, 0.0)?;
    Ok(q.normalize()?.0)
}

/// Pointwise probability `w = q^2`.
pub fn to_probability(q: &ClassicalWaveFunction) -> Vec<f64> {
    q.values.iter().map(|v| v * v).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, half: f64) -> PhaseGrid {
        let a = Axis::spanning(0.0, half, n).unwrap();
        PhaseGrid::new(a, a, 1).unwrap()
    }

    fn moment(q: &ClassicalWaveFunction, f: impl Fn(f64, f64) -> f64) -> f64 {
        let mut s = [0.0];
        let mut p = [0.0];
        (0..q.grid.len())
            .map(|i| {
                q.grid.coords(i, &mut s, &mut p);
                f(s[0], p[0]) * q.values[i] * q.values[i]
            })
            .sum::<f64>()
            * q.grid.measure()
    }

    #[test]
    fn axis_requires_odd_count() {
        assert!(Axis::new(0.0, 0.1, 64).is_err());
        assert!(Axis::new(0.0, 0.1, 1).is_err());
        let a = Axis::new(1.0, 0.5, 5).unwrap();
        assert_eq!(a.nodes(), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert_eq!(a.position(1.25), 2.5);
    }

    #[test]
    fn gaussian_moments_match_requested_widths() {
        let q = make_gaussian_q(&grid(129, 10.0), SiteGaussian::new(0.0, 0.0, 1.0, 1.0).unwrap()).unwrap();
        assert!((q.norm_sq() - 1.0).abs() < 1e-12);
        assert!(moment(&q, |s, _| s).abs() < 1e-14);
        assert!((moment(&q, |s, _| s * s) - 1.0).abs() < 1e-6);
        assert!((moment(&q, |_, p| p * p) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn probability_matches_gaussian_variances() {
        let g = SiteGaussian::new(0.5, -0.3, 0.8, 1.3).unwrap();
        let q = make_gaussian_q(&grid(161, 11.0), g).unwrap();
        let w = to_probability(&q);
        let total: f64 = w.iter().sum::<f64>() * q.grid.measure();
        assert!((total - 1.0).abs() < 1e-12);
        let var_s = moment(&q, |s, _| (s - 0.5) * (s - 0.5));
        let var_p = moment(&q, |_, p| (p + 0.3) * (p + 0.3));
        assert!((var_s - 0.64).abs() / 0.64 < 1e-6);
        assert!((var_p - 1.69).abs() / 1.69 < 1e-6);
    }

    #[test]
    fn sign_flip_leaves_probability_unchanged() {
        let q = make_gaussian_q(&grid(65, 8.0), SiteGaussian::new(0.0, 0.0, 1.0, 1.0).unwrap()).unwrap();
        let mut flipped = q.clone();
        flipped.scale(-1.0);
        assert_eq!(to_probability(&q), to_probability(&flipped));
    }

    #[test]
    fn narrow_grid_is_rejected() {
        let err = make_gaussian_q(&grid(65, 2.0), SiteGaussian::new(0.0, 0.0, 1.0, 1.0).unwrap());
        assert!(matches!(err, Err(Error::SupportTruncated(_))));
    }

    #[test]
    fn normalize_reports_norm_before_rescaling() {
        let q = make_gaussian_q(&grid(65, 8.0), SiteGaussian::new(0.0, 0.0, 1.0, 1.0).unwrap()).unwrap();
        let (same, rep) = q.clone().normalize().unwrap();
        assert!(rep.defect.abs() <= UNIT_NORM_SLACK);
        assert_eq!(same, q);

        let mut doubled = q.clone();
        doubled.scale(2.0);
        let (back, rep) = doubled.normalize().unwrap();
        assert!((rep.norm_sq - 4.0).abs() < 1e-12);
        assert!((rep.defect - 3.0).abs() < 1e-12);
        for (a, b) in back.values.iter().zip(&q.values) {
            assert!((a - b).abs() <= 1e-14 * b.abs());
        }

        let zero = ClassicalWaveFunction::zeros(q.grid.clone());
        assert_eq!(zero.normalize().unwrap_err(), Error::ZeroNorm);
    }

    #[test]
    fn two_site_grid_and_cap() {
        let a = Axis::spanning(0.0, 8.0, 21).unwrap();
        let g = PhaseGrid::new(a, a, 2).unwrap();
        assert_eq!(g.len(), 21usize.pow(4));
        assert_eq!(PhaseGrid::new(a, a, 3).unwrap_err(), Error::Feasibility { sites: 3 });
        let mut idx = [0; 4];
        g.unravel(12345, &mut idx);
        assert_eq!(g.ravel(&idx), 12345);
    }
}
