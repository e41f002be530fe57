//! Changes of representation: `(sigma, pi) <-> (sigma, zeta)` and the
//! relabelling to fluctuating and mirror coordinates `phi = sigma + zeta/2`,
//! `chi = sigma - zeta/2`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier::{map_lines, ConjugateTransform};
use crate::phase_space::{ClassicalWaveFunction, ComplexWaveFunction, PhaseGrid, MAX_GRID_SITES};

/// Largest selection-rule violation accepted by [`fourier_zeta_to_pi`].
pub const SELECTION_RULE_TOLERANCE: f64 = 1e-8;

fn transform_pi_axes(grid: &PhaseGrid, data: &mut [Complex64], to_conjugate: bool) {
    let t = ConjugateTransform::new(&grid.pi);
    let shape = grid.shape();
    for site in 0..grid.sites() {
        if to_conjugate {
            map_lines(data, &shape, grid.pi_axis(site), |_, line| t.to_conjugate(line));
        } else {
            map_lines(data, &shape, grid.pi_axis(site), |_, line| t.to_momentum(line));
        }
    }
}

/// `psi(sigma, zeta) = sum_pi exp(i zeta pi) q(sigma, pi) dpi/2pi` on every site.
pub fn fourier_pi_to_zeta(q: &ClassicalWaveFunction) -> ComplexWaveFunction {
    let mut data: Vec<Complex64> = q.values.iter().map(|&v| v.into()).collect();
    transform_pi_axes(&q.grid, &mut data, true);
    ComplexWaveFunction {
        grid: q.grid.clone(),
        values: data,
        time: q.time,
    }
}

/// Inverse transform for an arbitrary complex state, without the reality check.
pub fn fourier_zeta_to_pi_complex(psi: &ComplexWaveFunction) -> Vec<Complex64> {
    let mut data = psi.values.clone();
    transform_pi_axes(&psi.grid, &mut data, false);
    data
}

/// Flat index of the node with every `zeta` index mirrored, `zeta -> -zeta`.
#[inline]
fn mirrored(grid: &PhaseGrid, flat: usize) -> usize {
    // the zeta axis has the pi axis' count and is centred at zero
    grid.mirror_momenta(flat)
}

/// `max |psi(sigma, -zeta) - conj(psi(sigma, zeta))|`.
pub fn selection_rule_violation(psi: &ComplexWaveFunction) -> f64 {
    let g = &psi.grid;
    (0..psi.values.len())
        .map(|i| (psi.values[mirrored(g, i)] - psi.values[i].conj()).norm())
        .fold(0.0, f64::max)
}

/// Inverse transform with a reality check.
///
/// Returns the real part of the reconstructed `q` and the largest imaginary
/// residue that was discarded.
pub fn fourier_zeta_to_pi_checked(psi: &ComplexWaveFunction, tolerance: f64) -> Result<(ClassicalWaveFunction, f64)> {
    let violation = selection_rule_violation(psi);
    if !(violation <= tolerance) {
        return Err(Error::SelectionRule { violation, tolerance });
    }
    let data = fourier_zeta_to_pi_complex(psi);
    let residue = data.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
    let q = ClassicalWaveFunction::new(psi.grid.clone(), data.into_iter().map(|c| c.re).collect(), psi.time)?;
    Ok((q, residue))
}

/// [`fourier_zeta_to_pi_checked`] at [`SELECTION_RULE_TOLERANCE`].
pub fn fourier_zeta_to_pi(psi: &ComplexWaveFunction) -> Result<(ClassicalWaveFunction, f64)> {
    fourier_zeta_to_pi_checked(psi, SELECTION_RULE_TOLERANCE)
}

/// `psi` addressed by `(phi, chi)` labels. The data stays on the `(sigma,
/// zeta)` nodes; the labels live on a half-spacing sublattice.
#[derive(Debug, Clone, PartialEq)]
pub struct MirrorView {
    psi: ComplexWaveFunction,
}

pub fn to_mirror_view(psi: ComplexWaveFunction) -> MirrorView {
    MirrorView { psi }
}

impl MirrorView {
    pub fn into_inner(self) -> ComplexWaveFunction {
        self.psi
    }

    pub fn values(&self) -> &[Complex64] {
        &self.psi.values
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.psi.grid
    }

    /// `(phi, chi)` of node `flat`, one pair per site.
    pub fn labels(&self, flat: usize, phi: &mut [f64], chi: &mut [f64]) {
        let s = self.psi.grid.sites();
        let mut sigma = [0.0; MAX_GRID_SITES];
        let mut zeta = [0.0; MAX_GRID_SITES];
        self.psi.grid.conjugate_coords(flat, &mut sigma[..s], &mut zeta[..s]);
        for x in 0..s {
            phi[x] = sigma[x] + 0.5 * zeta[x];
            chi[x] = sigma[x] - 0.5 * zeta[x];
        }
    }

    /// Index of the node whose labels are `(chi, phi)` when this one has `(phi, chi)`.
    pub fn exchanged(&self, flat: usize) -> usize {
        mirrored(&self.psi.grid, flat)
    }

    /// `max |psi(chi, phi) - conj(psi(phi, chi))|`.
    pub fn conjugation_defect(&self) -> f64 {
        selection_rule_violation(&self.psi)
    }
}

fn require_centred(grid: &PhaseGrid) -> Result<()> {
    if grid.pi.center != 0.0 {
        return Err(Error::param("pi.center", "time reversal needs a pi axis centred at zero"));
    }
    Ok(())
}

/// `q(sigma, pi) -> q(sigma, -pi)`.
pub fn time_reverse_q(q: &ClassicalWaveFunction) -> Result<ClassicalWaveFunction> {
    require_centred(&q.grid)?;
    let values = (0..q.values.len()).map(|i| q.values[q.grid.mirror_momenta(i)]).collect();
    ClassicalWaveFunction::new(q.grid.clone(), values, -q.time)
}

/// `psi(phi, chi) -> psi(chi, phi)`, i.e. `zeta -> -zeta`.
pub fn exchange_phi_chi(psi: &ComplexWaveFunction) -> ComplexWaveFunction {
    let values = (0..psi.values.len()).map(|i| psi.values[mirrored(&psi.grid, i)]).collect();
    ComplexWaveFunction {
        grid: psi.grid.clone(),
        values,
        time: -psi.time,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::{make_gaussian_q, Axis, SiteGaussian, WaveFunction};

    fn grid(sites: usize, n: usize) -> PhaseGrid {
        let a = Axis::spanning(0.0, 8.0, n).unwrap();
        PhaseGrid::new(a, a, sites).unwrap()
    }

    #[test]
    fn transform_is_unitary_and_invertible() {
        let g = grid(1, 65);
        let q = make_gaussian_q(&g, SiteGaussian::new(0.3, -0.4, 1.0, 0.9).unwrap()).unwrap();
        let psi = fourier_pi_to_zeta(&q);
        assert!((psi.norm_sq() - 1.0).abs() < 1e-12);
        assert!(selection_rule_violation(&psi) < 1e-12);
        let (back, residue) = fourier_zeta_to_pi(&psi).unwrap();
        assert!(residue < 1e-12);
        for (a, b) in back.values.iter().zip(&q.values) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn gaussian_pair_has_reciprocal_width() {
        // |psi|^2 in zeta has standard deviation 1/(2 s) when q^2 has s in pi
        let g = grid(1, 129);
        let s = 0.8;
        let q = make_gaussian_q(&g, SiteGaussian::new(0.0, 0.0, 1.0, s).unwrap()).unwrap();
        let psi = fourier_pi_to_zeta(&q);
        let mut sig = [0.0];
        let mut z = [0.0];
        let mut m2 = 0.0;
        for i in 0..g.len() {
            g.conjugate_coords(i, &mut sig, &mut z);
            m2 += z[0] * z[0] * psi.values[i].norm_sqr();
        }
        m2 *= g.conjugate_measure();
        let target = 1.0 / (2.0 * s);
        assert!((m2.sqrt() - target).abs() / target < 1e-8);
    }

    #[test]
    fn broken_selection_rule_is_rejected() {
        let g = grid(1, 33);
        let q = make_gaussian_q(&g, SiteGaussian::new(0.0, 0.0, 1.0, 1.0).unwrap()).unwrap();
        let mut psi = fourier_pi_to_zeta(&q);
        let mid = g.ravel(&[16, 20]);
        psi.values[mid] += Complex64::new(0.0, 1e-3);
        assert!(matches!(fourier_zeta_to_pi(&psi), Err(Error::SelectionRule { .. })));
    }

    #[test]
    fn mirror_view_labels_and_symmetry() {
        let g = grid(2, 21);
        let q = make_gaussian_q(&g, SiteGaussian::new(0.2, 0.1, 1.0, 1.0).unwrap()).unwrap();
        let view = to_mirror_view(fourier_pi_to_zeta(&q));
        let (mut phi, mut chi) = ([0.0; 2], [0.0; 2]);
        let diag = g.ravel(&[3, 7, 10, 10]);
        view.labels(diag, &mut phi, &mut chi);
        assert_eq!(phi, chi);
        assert_eq!(phi[0], g.sigma.node(3));
        let other = view.exchanged(g.ravel(&[3, 7, 2, 15]));
        view.labels(other, &mut phi, &mut chi);
        let (mut phi2, mut chi2) = ([0.0; 2], [0.0; 2]);
        view.labels(g.ravel(&[3, 7, 2, 15]), &mut phi2, &mut chi2);
        for x in 0..2 {
            assert!((phi[x] - chi2[x]).abs() < 1e-14 && (chi[x] - phi2[x]).abs() < 1e-14);
        }
        assert!(view.conjugation_defect() < 1e-12);
        let psi = view.clone().into_inner();
        assert_eq!(to_mirror_view(psi), view);
    }

    #[test]
    fn time_reversal_exchanges_phi_and_chi() {
        let g = grid(1, 65);
        let q = make_gaussian_q(&g, SiteGaussian::new(0.5, 0.7, 1.0, 0.8).unwrap()).unwrap();
        let a = fourier_pi_to_zeta(&time_reverse_q(&q).unwrap());
        let b = exchange_phi_chi(&fourier_pi_to_zeta(&q));
        assert!(a.max_abs_diff(&b).unwrap() < 1e-12);
    }
}
