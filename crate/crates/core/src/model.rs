//! Model parameters and the periodic spatial lattice.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficient of the discrete Laplacian in units of `1/eps^2`.
///
/// The lattice force carries `1/(2 eps^2)` in front of the nearest-neighbour
/// sum, which is half of the usual second difference. With this value the
/// continuum limit is `(1/2) d^2 sigma`, i.e. a wave speed of `1/sqrt(2)`.
pub const DEFAULT_LAPLACIAN_PREFACTOR: f64 = 0.5;

/// Parameters of the quartic Klein-Gordon model on a space-time lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// `m^2`
    pub mass_squared: f64,
    /// quartic coupling `lambda`
    pub coupling: f64,
    /// number of spatial dimensions `D`; zero means a single degree of freedom
    pub spatial_dim: usize,
    /// shared space and time step `eps`
    pub lattice_spacing: f64,
    /// multiplies `1/eps^2` in the nearest-neighbour term of the force
    #[serde(default = "default_prefactor")]
    pub laplacian_prefactor: f64,
}

fn default_prefactor() -> f64 {
    DEFAULT_LAPLACIAN_PREFACTOR
}

impl ModelParams {
    pub fn new(mass_squared: f64, coupling: f64, spatial_dim: usize, lattice_spacing: f64) -> Result<Self> {
        let p = Self {
            mass_squared,
            coupling,
            spatial_dim,
            lattice_spacing,
            laplacian_prefactor: DEFAULT_LAPLACIAN_PREFACTOR,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_laplacian_prefactor(mut self, prefactor: f64) -> Result<Self> {
        self.laplacian_prefactor = prefactor;
        self.validate()?;
        Ok(self)
    }

    /// Same parameters with a different lattice spacing.
    pub fn with_spacing(mut self, eps: f64) -> Result<Self> {
        self.lattice_spacing = eps;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.mass_squared.is_finite() {
            return Err(Error::param("mass_squared", "must be finite"));
        }
        if !(self.coupling.is_finite() && self.coupling >= 0.0) {
            return Err(Error::param("coupling", "must be finite and >= 0"));
        }
        if !(self.lattice_spacing.is_finite() && self.lattice_spacing > 0.0) {
            return Err(Error::param("lattice_spacing", "must be finite and > 0"));
        }
        if !(self.laplacian_prefactor.is_finite() && self.laplacian_prefactor >= 0.0) {
            return Err(Error::param("laplacian_prefactor", "must be finite and >= 0"));
        }
        Ok(())
    }

    /// `c / eps^2`, the weight of each neighbour in the force.
    #[inline]
    pub fn hopping(&self) -> f64 {
        self.laplacian_prefactor / (self.lattice_spacing * self.lattice_spacing)
    }

    /// Local part of the force, `-m^2 s - (lambda/2) s^3`.
    #[inline]
    pub fn local_force(&self, s: f64) -> f64 {
        -self.mass_squared * s - 0.5 * self.coupling * s * s * s
    }

    /// Local potential whose negative derivative is [`Self::local_force`].
    #[inline]
    pub fn local_potential(&self, s: f64) -> f64 {
        let s2 = s * s;
        0.5 * self.mass_squared * s2 + 0.125 * self.coupling * s2 * s2
    }

    /// `eps^2 omega_max^2` for the linearised dynamics on `lattice`.
    ///
    /// One automaton block is a kick-drift-kick step of length `2 eps`, which
    /// is stable for the harmonic part iff `(2 eps)^2 omega^2 < 4`.
    pub fn stability_number(&self, lattice: &Lattice) -> f64 {
        let eps2 = self.lattice_spacing * self.lattice_spacing;
        let coupled_axes = lattice.dims().iter().filter(|&&n| n >= 2).count() as f64;
        let omega_sq = self.mass_squared.max(0.0) + 4.0 * coupled_axes * self.hopping();
        eps2 * omega_sq
    }

    /// Rejects time steps outside the harmonic stability region. For
    /// `coupling > 0` stability also depends on the field amplitude, which
    /// this check cannot see.
    pub fn check_stability(&self, lattice: &Lattice) -> Result<()> {
        let value = self.stability_number(lattice);
        if value < 1.0 {
            Ok(())
        } else {
            Err(Error::Unstable {
                value,
                prefactor: self.laplacian_prefactor,
                spatial_dim: self.spatial_dim,
            })
        }
    }
}

/// A periodic hypercubic lattice; `dims` has one entry per spatial axis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<usize>", into = "Vec<usize>")]
pub struct Lattice {
    dims: Vec<usize>,
    /// `neighbours[x * 2D + 2k]` is `x + e_k`, `[.. + 1]` is `x - e_k`
    neighbours: Vec<usize>,
}

impl From<Vec<usize>> for Lattice {
    fn from(dims: Vec<usize>) -> Self {
        Lattice::new(dims)
    }
}

impl From<Lattice> for Vec<usize> {
    fn from(l: Lattice) -> Self {
        l.dims
    }
}

impl Lattice {
    /// Builds the lattice; zero-length axes are treated as length one.
    pub fn new(dims: Vec<usize>) -> Self {
        let dims: Vec<usize> = dims.into_iter().map(|n| n.max(1)).collect();
        let sites: usize = dims.iter().product();
        let d = dims.len();
        let mut neighbours = vec![0; sites * 2 * d];
        let mut coord = vec![0usize; d];
        for x in 0..sites {
            // row-major, last axis fastest
            let mut rem = x;
            for k in (0..d).rev() {
                coord[k] = rem % dims[k];
                rem /= dims[k];
            }
            for k in 0..d {
                let stride: usize = dims[k + 1..].iter().product();
                let n = dims[k];
                let up = (coord[k] + 1) % n;
                let down = (coord[k] + n - 1) % n;
                neighbours[x * 2 * d + 2 * k] = x - coord[k] * stride + up * stride;
                neighbours[x * 2 * d + 2 * k + 1] = x - coord[k] * stride + down * stride;
            }
        }
        Self { dims, neighbours }
    }

    /// The zero-dimensional lattice with one site.
    pub fn single_site() -> Self {
        Self::new(Vec::new())
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn spatial_dim(&self) -> usize {
        self.dims.len()
    }

    pub fn sites(&self) -> usize {
        self.dims.iter().product()
    }

    #[inline]
    pub fn neighbour(&self, site: usize, axis: usize, forward: bool) -> usize {
        let d = self.dims.len();
        self.neighbours[site * 2 * d + 2 * axis + usize::from(!forward)]
    }

    /// Lattice distance between two sites along the periodic axes (max-norm
    /// of the per-axis periodic distances summed, i.e. the graph distance).
    pub fn distance(&self, a: usize, b: usize) -> usize {
        let mut ra = a;
        let mut rb = b;
        let mut dist = 0;
        for &n in self.dims.iter().rev() {
            let (ca, cb) = (ra % n, rb % n);
            ra /= n;
            rb /= n;
            let diff = ca.abs_diff(cb);
            dist += diff.min(n - diff);
        }
        dist
    }

    pub(crate) fn check_params(&self, params: &ModelParams) -> Result<()> {
        if params.spatial_dim != self.dims.len() {
            return Err(Error::ShapeMismatch(format!(
                "model has D = {} but lattice has {} axes",
                params.spatial_dim,
                self.dims.len()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neighbours_wrap_periodically() {
        let l = Lattice::new(vec![4, 3]);
        assert_eq!(l.sites(), 12);
        // site (0, 0): +x -> (1, 0) = 3, -x -> (3, 0) = 9, +y -> (0, 1) = 1, -y -> (0, 2) = 2
        assert_eq!(l.neighbour(0, 0, true), 3);
        assert_eq!(l.neighbour(0, 0, false), 9);
        assert_eq!(l.neighbour(0, 1, true), 1);
        assert_eq!(l.neighbour(0, 1, false), 2);
        assert_eq!(l.distance(0, 10), 1 + 1);
    }

    #[test]
    fn two_site_ring_sees_partner_twice() {
        let l = Lattice::new(vec![2]);
        assert_eq!(l.neighbour(0, 0, true), 1);
        assert_eq!(l.neighbour(0, 0, false), 1);
    }

    #[test]
    fn default_prefactor_is_unstable_for_any_spatial_dimension() {
        let p = ModelParams::new(1.0, 0.0, 1, 0.01).unwrap();
        let l = Lattice::new(vec![8]);
        assert!(matches!(p.check_stability(&l), Err(Error::Unstable { .. })));
        let p = p.with_laplacian_prefactor(0.2).unwrap();
        assert!(p.check_stability(&l).is_ok());
        let p0 = ModelParams::new(1.0, 0.0, 0, 0.99).unwrap();
        assert!(p0.check_stability(&Lattice::single_site()).is_ok());
        let p0 = p0.with_spacing(1.0).unwrap();
        assert!(p0.check_stability(&Lattice::single_site()).is_err());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(ModelParams::new(1.0, -0.1, 0, 0.1).is_err());
        assert!(ModelParams::new(1.0, 0.1, 0, 0.0).is_err());
        assert!(ModelParams::new(f64::NAN, 0.1, 0, 0.1).is_err());
    }
}
