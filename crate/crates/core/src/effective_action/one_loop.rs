use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Lattice momentum squared used in the one-loop sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dispersion {
    /// `sum (4/eps^2) sin^2(pi n / N)`
    #[default]
    Sine,
    /// `sum (2 pi n / (N eps))^2` with `n` in the centred range
    Linear,
}

impl Dispersion {
    fn axis_values(&self, n: usize, eps: f64) -> Vec<f64> {
        (0..n)
            .map(|j| match self {
                Dispersion::Sine => {
                    let s = (PI * j as f64 / n as f64).sin();
                    4.0 * s * s / (eps * eps)
                }
                Dispersion::Linear => {
                    let m = if 2 * j <= n { j as f64 } else { j as f64 - n as f64 };
                    let k = 2.0 * PI * m / (n as f64 * eps);
                    k * k
                }
            })
            .collect()
    }
}

/// `m^2 + 3 lambda^2 phi^4 / (32 m^2)`, the mass of the mirror fluctuations.
pub fn fluctuation_mass_squared(params: &ModelParams, phi: f64) -> f64 {
    let m2 = params.mass_squared;
    m2 + 3.0 * params.coupling * params.coupling * phi.powi(4) / (32.0 * m2)
}

/// `(1/V) sum_q f(q^2)` over the momenta of a periodic lattice with the given
/// per-axis counts. Rows of the first axis are summed in parallel and the
/// partial sums are added in order.
fn momentum_average<F>(dims: &[usize], eps: f64, dispersion: Dispersion, f: F) -> f64
where
    F: Fn(f64) -> f64 + Sync,
{
    if dims.is_empty() {
        return f(0.0);
    }
    let axes: Vec<Vec<f64>> = dims.iter().map(|&n| dispersion.axis_values(n.max(1), eps)).collect();
    let rest: usize = dims[1..].iter().map(|&n| n.max(1)).product();
    let partial: Vec<f64> = axes[0]
        .par_iter()
        .map(|&q0| {
            let mut sum = 0.0;
            for r in 0..rest {
                let mut q2 = q0;
                let mut rem = r;
                for axis in axes[1..].iter().rev() {
                    q2 += axis[rem % axis.len()];
                    rem /= axis.len();
                }
                sum += f(q2);
            }
            sum
        })
        .collect();
    let volume: usize = dims.iter().map(|&n| n.max(1)).product();
    partial.iter().sum::<f64>() / volume as f64
}

fn check(params: &ModelParams, phi: f64) -> Result<f64> {
    if !(params.mass_squared > 0.0) {
        return Err(Error::NonPositiveMass(params.mass_squared));
    }
    let mass = fluctuation_mass_squared(params, phi);
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::param("phi", format!("fluctuation mass {mass} must be positive")));
    }
    Ok(mass)
}

/// One-loop correction per lattice site,
/// `(1/V) sum_q (1/2) ln(q^2 + m^2 + 3 lambda^2 phi^4/(32 m^2))`.
/// `lattice_dims` lists all space-time axes.
pub fn one_loop_sum(params: &ModelParams, phi: f64, lattice_dims: &[usize], dispersion: Dispersion) -> Result<f64> {
    let mass = check(params, phi)?;
    Ok(momentum_average(lattice_dims, params.lattice_spacing, dispersion, |q2| {
        0.5 * (q2 + mass).ln()
    }))
}

/// One-loop correction per unit space-time volume, the per-site value
/// divided by `eps^d`.
pub fn one_loop_density(params: &ModelParams, phi: f64, lattice_dims: &[usize], dispersion: Dispersion) -> Result<f64> {
    let per_site = one_loop_sum(params, phi, lattice_dims, dispersion)?;
    Ok(per_site / params.lattice_spacing.powi(lattice_dims.len() as i32))
}

/// Coefficient of `phi^4` in the subtracted per-site correction,
/// `(3 lambda^2 / (64 m^2)) (1/V) sum_q 1/(q^2 + m^2)`.
pub fn one_loop_phi4_coefficient(params: &ModelParams, lattice_dims: &[usize], dispersion: Dispersion) -> Result<f64> {
    check(params, 0.0)?;
    let m2 = params.mass_squared;
    let prop = momentum_average(lattice_dims, params.lattice_spacing, dispersion, |q2| 1.0 / (q2 + m2));
    Ok(3.0 * params.coupling * params.coupling / (64.0 * m2) * prop)
}

/// `phi^4` coefficient per unit volume.
pub fn one_loop_phi4_density(params: &ModelParams, lattice_dims: &[usize], dispersion: Dispersion) -> Result<f64> {
    let c = one_loop_phi4_coefficient(params, lattice_dims, dispersion)?;
    Ok(c / params.lattice_spacing.powi(lattice_dims.len() as i32))
}

/// `Delta S1(phi) - Delta S1(0)` per site, summed directly.
pub fn one_loop_subtracted(params: &ModelParams, phi: f64, lattice_dims: &[usize], dispersion: Dispersion) -> Result<f64> {
    let m0 = check(params, 0.0)?;
    let m = check(params, phi)?;
    // ln(a + m) - ln(a + m0) = ln1p((m - m0)/(a + m0)) keeps small differences accurate
    let dm = m - m0;
    Ok(momentum_average(lattice_dims, params.lattice_spacing, dispersion, |q2| {
        0.5 * (dm / (q2 + m0)).ln_1p()
    }))
}
