use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Lattice, ModelParams};

/// A real field on `n_t` time slices of a periodic spatial lattice; index
/// `t * sites + x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpacetimeField {
    pub spatial_dims: Vec<usize>,
    pub n_t: usize,
    pub values: Vec<f64>,
}

impl SpacetimeField {
    pub fn new(spatial_dims: Vec<usize>, n_t: usize, values: Vec<f64>) -> Result<Self> {
        let sites: usize = spatial_dims.iter().product();
        if values.len() != sites * n_t || n_t == 0 {
            return Err(Error::ShapeMismatch(format!(
                "{} values for {n_t} slices of {sites} sites",
                values.len()
            )));
        }
        Ok(Self {
            spatial_dims,
            n_t,
            values,
        })
    }

    pub fn constant(spatial_dims: Vec<usize>, n_t: usize, c: f64) -> Self {
        let sites: usize = spatial_dims.iter().product();
        Self {
            spatial_dims,
            n_t,
            values: vec![c; sites * n_t],
        }
    }

    pub fn sites(&self) -> usize {
        self.spatial_dims.iter().product()
    }
}

/// The discrete Minkowski action split into its parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionValue {
    /// `kinetic + potential + interaction`
    pub total: f64,
    /// time-derivative terms of `S(phi) - S(chi)`
    pub kinetic: f64,
    /// gradient and local-potential terms of `S(phi) - S(chi)`
    pub potential: f64,
    /// `-S_int(phi, chi)`
    pub interaction: f64,
}

/// Kinetic and potential parts of the single-field action
/// `sum eps^(D+1) [ (dt phi)^2/2 - (c/2) sum_k (dk phi)^2 - V(phi) ]`
/// with `V = m^2 phi^2/2 + lambda phi^4/16` and forward differences.
fn single_field(f: &SpacetimeField, lattice: &Lattice, params: &ModelParams) -> (f64, f64) {
    let eps = params.lattice_spacing;
    let vol = eps.powi(lattice.spatial_dim() as i32 + 1);
    let sites = f.sites();
    let d = lattice.spatial_dim();
    let (m2, l, c) = (params.mass_squared, params.coupling, params.laplacian_prefactor);
    let mut kin = 0.0;
    let mut pot = 0.0;
    for t in 0..f.n_t {
        let slice = &f.values[t * sites..(t + 1) * sites];
        for x in 0..sites {
            let phi = slice[x];
            if t + 1 < f.n_t {
                let dt = (f.values[(t + 1) * sites + x] - phi) / eps;
                kin += 0.5 * dt * dt;
            }
            let mut grad = 0.0;
            for k in 0..d {
                let g = (slice[lattice.neighbour(x, k, true)] - phi) / eps;
                grad += g * g;
            }
            let p2 = phi * phi;
            pot -= 0.5 * c * grad + 0.5 * m2 * p2 + l * p2 * p2 / 16.0;
        }
    }
    (kin * vol, pot * vol)
}

#[inline]
fn cube(x: f64) -> f64 {
    x * x * x
}

/// `S_int = (lambda/8) sum eps^(D+1) (phi^3 chi - phi chi^3)`.
///
/// Each term is evaluated as `cube(a) * b - a * cube(b)`, so exchanging the
/// arguments negates every term, and hence the sum, exactly.
pub fn interaction_action(phi: &SpacetimeField, chi: &SpacetimeField, params: &ModelParams) -> f64 {
    let vol = params.lattice_spacing.powi(phi.spatial_dims.len() as i32 + 1);
    let sum: f64 = phi
        .values
        .iter()
        .zip(&chi.values)
        .map(|(&a, &b)| cube(a) * b - a * cube(b))
        .sum();
    params.coupling / 8.0 * (sum * vol)
}

/// `S_M = S(phi) - S(chi) - S_int(phi, chi)`, antisymmetric under the
/// exchange of its arguments to the last bit.
pub fn minkowski_action(phi: &SpacetimeField, chi: &SpacetimeField, params: &ModelParams) -> Result<ActionValue> {
    if phi.spatial_dims != chi.spatial_dims || phi.n_t != chi.n_t || phi.values.len() != chi.values.len() {
        return Err(Error::ShapeMismatch("phi and chi live on different lattices".into()));
    }
    params.validate()?;
    let lattice = Lattice::new(phi.spatial_dims.clone());
    lattice.check_params(params)?;
    let (kp, pp) = single_field(phi, &lattice, params);
    let (kc, pc) = single_field(chi, &lattice, params);
    let kinetic = kp - kc;
    let potential = pp - pc;
    // S_int(chi, phi) = -S_int(phi, chi) bit for bit, so negate once here
    let interaction = -interaction_action(phi, chi, params);
    Ok(ActionValue {
        total: (kinetic + potential) + interaction,
        kinetic,
        potential,
        interaction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_fields_give_zero_action() {
        let p = ModelParams::new(1.0, 0.4, 1, 0.5).unwrap();
        let f = SpacetimeField::new(vec![3], 2, vec![0.1, 0.5, -0.2, 0.3, 0.0, 0.7]).unwrap();
        assert_eq!(minkowski_action(&f, &f, &p).unwrap().total, 0.0);
    }

    #[test]
    fn constant_free_field() {
        let p = ModelParams::new(2.0, 0.0, 2, 0.5).unwrap();
        let phi = SpacetimeField::constant(vec![3, 4], 5, 0.7);
        let chi = SpacetimeField::constant(vec![3, 4], 5, 0.0);
        let s = minkowski_action(&phi, &chi, &p).unwrap();
        let volume = 60.0 * 0.5f64.powi(3);
        assert!((s.total + volume * 2.0 * 0.49 / 2.0).abs() < 1e-12);
        assert_eq!(s.kinetic, 0.0);
    }

    #[test]
    fn exchange_flips_sign_exactly() {
        let p = ModelParams::new(1.0, 0.9, 1, 0.3).unwrap();
        let phi = SpacetimeField::new(vec![2], 3, vec![0.3, -1.1, 0.25, 0.9, 2.0, -0.4]).unwrap();
        let chi = SpacetimeField::new(vec![2], 3, vec![-0.7, 0.2, 1.3, 0.1, -0.5, 0.6]).unwrap();
        let a = minkowski_action(&phi, &chi, &p).unwrap();
        let b = minkowski_action(&chi, &phi, &p).unwrap();
        assert_eq!(a.total, -b.total);
        assert_eq!(a.interaction, -b.interaction);
        assert_eq!(a.total, a.kinetic + a.potential + a.interaction);
    }

    #[test]
    fn mismatched_shapes_are_rejected() {
        let p = ModelParams::new(1.0, 0.0, 1, 0.3).unwrap();
        let a = SpacetimeField::constant(vec![2], 3, 0.0);
        let b = SpacetimeField::constant(vec![3], 2, 0.0);
        assert!(matches!(minkowski_action(&a, &b, &p), Err(Error::ShapeMismatch(_))));
    }
}
