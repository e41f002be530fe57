use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Truncated power series in `phi` with exact rational coefficients.
///
/// Powers above `max_power` are dropped by every operation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PowerSeries {
    coefficients: BTreeMap<u32, BigRational>,
    max_power: u32,
    /// number of `u = lambda phi^2 / (8 m^2)` orders kept
    pub truncation_order: u32,
}

impl PowerSeries {
    pub fn zero(max_power: u32, truncation_order: u32) -> Self {
        Self {
            coefficients: BTreeMap::new(),
            max_power,
            truncation_order,
        }
    }

    /// `c phi^power`.
    pub fn monomial(c: BigRational, power: u32, max_power: u32, truncation_order: u32) -> Self {
        let mut s = Self::zero(max_power, truncation_order);
        s.add_term(power, c);
        s
    }

    pub fn max_power(&self) -> u32 {
        self.max_power
    }

    fn add_term(&mut self, power: u32, c: BigRational) {
        if power > self.max_power || c.is_zero() {
            return;
        }
        let entry = self.coefficients.entry(power).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.coefficients.remove(&power);
        }
    }

    /// Nonzero coefficients in increasing power.
    pub fn terms(&self) -> impl Iterator<Item = (u32, &BigRational)> {
        self.coefficients.iter().map(|(p, c)| (*p, c))
    }

    pub fn coefficient(&self, power: u32) -> BigRational {
        self.coefficients.get(&power).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn coefficient_f64(&self, power: u32) -> f64 {
        self.coefficient(power).to_f64().unwrap_or(f64::NAN)
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn lowest_power(&self) -> Option<u32> {
        self.coefficients.keys().next().copied()
    }

    /// Every nonzero power is odd.
    pub fn is_odd(&self) -> bool {
        self.coefficients.keys().all(|p| p % 2 == 1)
    }

    pub fn is_even(&self) -> bool {
        self.coefficients.keys().all(|p| p % 2 == 0)
    }

    /// Horner evaluation in `f64`.
    pub fn evaluate(&self, phi: f64) -> f64 {
        let mut acc = 0.0;
        let mut last = self.max_power;
        for (&p, c) in self.coefficients.iter().rev() {
            acc *= phi.powi((last - p) as i32);
            acc += c.to_f64().unwrap_or(f64::NAN);
            last = p;
        }
        acc * phi.powi(last as i32)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.max_power = self.max_power.min(other.max_power);
        out.coefficients.retain(|p, _| *p <= out.max_power);
        for (p, c) in other.terms() {
            out.add_term(p, c.clone());
        }
        out
    }

    pub fn scale(&self, factor: &BigRational) -> Self {
        let mut out = Self::zero(self.max_power, self.truncation_order);
        for (p, c) in self.terms() {
            out.add_term(p, c * factor);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.max_power.min(other.max_power), self.truncation_order);
        for (p, a) in self.terms() {
            for (q, b) in other.terms() {
                out.add_term(p + q, a * b);
            }
        }
        out
    }

    /// Same coefficients with a larger or smaller truncation power.
    pub fn with_max_power(&self, max_power: u32) -> Self {
        let mut out = self.clone();
        out.max_power = max_power;
        out.coefficients.retain(|p, _| *p <= max_power);
        out
    }

    fn pow(&self, n: u32) -> Self {
        let mut out = Self::monomial(BigRational::one(), 0, self.max_power, self.truncation_order);
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }
}

impl Serialize for PowerSeries {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = s.serialize_map(Some(self.coefficients.len()))?;
        for (p, c) in &self.coefficients {
            map.serialize_entry(&p.to_string(), &c.to_f64())?;
        }
        map.end()
    }
}

/// Exact rational value of a finite float.
pub fn exact(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::param("value", format!("{x} is not finite")))
}

/// `p/q` as a rational.
pub fn ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

fn checked_mass(params: &ModelParams) -> Result<(BigRational, BigRational)> {
    if !(params.mass_squared > 0.0) {
        return Err(Error::NonPositiveMass(params.mass_squared));
    }
    Ok((exact(params.mass_squared)?, exact(params.coupling)?))
}

/// Power of `phi` up to which `chi` is kept for `truncation_order` orders.
pub fn mirror_max_power(truncation_order: u32) -> u32 {
    2 * truncation_order + 1
}

/// Power of `phi` up to which the tree-level correction is kept.
pub fn delta_s_max_power(truncation_order: u32) -> u32 {
    2 * truncation_order + 4
}

/// `m^2 chi - (lambda/8)(phi^3 - 3 chi^2 phi - 2 chi^3)` without truncation.
pub fn mirror_residual(chi: &PowerSeries, params: &ModelParams) -> Result<PowerSeries> {
    let (m2, lambda) = checked_mass(params)?;
    let big = 3 * chi.max_power() + 1;
    let chi = chi.with_max_power(big);
    let phi = PowerSeries::monomial(BigRational::one(), 1, big, chi.truncation_order);
    let phi3 = PowerSeries::monomial(BigRational::one(), 3, big, chi.truncation_order);
    let chi2 = chi.mul(&chi);
    let rhs = phi3
        .add(&chi2.mul(&phi).scale(&ratio(-3, 1)))
        .add(&chi2.mul(&chi).scale(&ratio(-2, 1)))
        .scale(&(lambda / ratio(8, 1)));
    Ok(chi.scale(&m2).add(&rhs.scale(&ratio(-1, 1))))
}

/// Result of the fixed-point iteration for the mirror field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MirrorSeries {
    pub chi: PowerSeries,
    /// passes that changed the series
    pub passes: u32,
}

/// Solves `m^2 chi = (lambda/8)(phi^3 - 3 chi^2 phi - 2 chi^3)` for constant
/// fields as a formal series in `phi`, keeping `truncation_order` orders in
/// `u = lambda phi^2/(8 m^2)` (powers up to `phi^(2K+1)`).
pub fn solve_mirror_series(params: &ModelParams, truncation_order: u32) -> Result<MirrorSeries> {
    let (m2, lambda) = checked_mass(params)?;
    if truncation_order == 0 {
        return Err(Error::param("truncation_order", "must be at least 1"));
    }
    let k = truncation_order;
    let max = mirror_max_power(k);
    let a = lambda / (ratio(8, 1) * m2);
    let phi = PowerSeries::monomial(BigRational::one(), 1, max, k);
    let phi3 = PowerSeries::monomial(BigRational::one(), 3, max, k);
    let mut chi = PowerSeries::zero(max, k);
    let mut passes = 0;
    // each pass fixes at least one more order, so K + 1 passes always suffice
    for _ in 0..=k {
        let chi2 = chi.mul(&chi);
        let next = phi3
            .add(&chi2.mul(&phi).scale(&ratio(-3, 1)))
            .add(&chi2.mul(&chi).scale(&ratio(-2, 1)))
            .scale(&a);
        if next == chi {
            return Ok(MirrorSeries { chi, passes });
        }
        chi = next;
        passes += 1;
    }
    Err(Error::Truncation(format!("fixed point not reached after {} passes", k + 1)))
}

/// `Delta S = -(lambda/16)(chi^4 + chi^3 phi + chi phi^3)` as a series up to
/// `phi^(2K+4)`.
pub fn tree_level_delta_s(chi: &PowerSeries, params: &ModelParams, truncation_order: u32) -> Result<PowerSeries> {
    let (_, lambda) = checked_mass(params)?;
    if chi.truncation_order != truncation_order || chi.max_power() != mirror_max_power(truncation_order) {
        return Err(Error::Truncation(format!(
            "mirror series has order {} (max power {}), requested {truncation_order}",
            chi.truncation_order,
            chi.max_power()
        )));
    }
    let max = delta_s_max_power(truncation_order);
    let chi = chi.with_max_power(max);
    let phi = PowerSeries::monomial(BigRational::one(), 1, max, truncation_order);
    let phi3 = PowerSeries::monomial(BigRational::one(), 3, max, truncation_order);
    let chi3 = chi.pow(3);
    let sum = chi3.mul(&chi).add(&chi3.mul(&phi)).add(&chi.mul(&phi3));
    Ok(sum.scale(&(-lambda / ratio(16, 1))))
}

/// Leading coefficients in closed form and the higher ones as printed in
/// the literature the model comes from, for side-by-side reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReferenceCoefficients {
    /// `lambda / (8 m^2)` for `phi^3` in `chi`
    pub chi_phi3: f64,
    /// `-9 lambda^3 / (512 m^6)` for `phi^7` in `chi`, as printed
    pub chi_phi7_printed: f64,
    /// `-lambda^2 / (128 m^2)` for `phi^6` in `Delta S`
    pub delta_s_phi6: f64,
    /// `lambda^4 / (1024 m^6)` for `phi^10` in `Delta S`, as printed
    pub delta_s_phi10_printed: f64,
}

impl ReferenceCoefficients {
    pub fn new(params: &ModelParams) -> Self {
        let (l, m2) = (params.coupling, params.mass_squared);
        Self {
            chi_phi3: l / (8.0 * m2),
            chi_phi7_printed: -9.0 * l.powi(3) / (512.0 * m2.powi(3)),
            delta_s_phi6: -l * l / (128.0 * m2),
            delta_s_phi10_printed: l.powi(4) / (1024.0 * m2.powi(3)),
        }
    }
}

/// Comparison of the tree-level series with direct stationarisation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SaddleReport {
    pub phi: f64,
    pub series_value: f64,
    pub numeric_value: f64,
    pub chi_series: f64,
    pub chi_numeric: f64,
    /// `|series - numeric| / |numeric|` (absolute when `numeric` is zero)
    pub relative_deviation: f64,
    /// `lambda phi^2 / m^2 <= 0.1`
    pub in_validity_region: bool,
}

/// `dS/dchi` for constant fields; zero at the saddle.
fn saddle_equation(params: &ModelParams, phi: f64, chi: f64) -> f64 {
    let (m2, l) = (params.mass_squared, params.coupling);
    m2 * chi + 0.25 * l * chi * chi * chi + 0.375 * l * phi * chi * chi - 0.125 * l * phi * phi * phi
}

/// `m^2 chi^2/2 + lambda chi^4/16 - (lambda/8)(phi^3 chi - phi chi^3)`,
/// the tree-level correction at a given `chi`.
pub fn saddle_value(params: &ModelParams, phi: f64, chi: f64) -> f64 {
    let (m2, l) = (params.mass_squared, params.coupling);
    0.5 * m2 * chi * chi + l * chi.powi(4) / 16.0 - 0.125 * l * (phi.powi(3) * chi - phi * chi.powi(3))
}

/// Root of the constant-field saddle equation by bracketing and bisection.
pub fn solve_saddle(params: &ModelParams, phi: f64) -> Result<f64> {
    if !(params.mass_squared > 0.0) {
        return Err(Error::NonPositiveMass(params.mass_squared));
    }
    if !phi.is_finite() {
        return Err(Error::param("phi", "must be finite"));
    }
    let g = |c: f64| saddle_equation(params, phi, c);
    let g0 = g(0.0);
    if g0 == 0.0 {
        return Ok(0.0);
    }
    // the root has the sign of phi; grow the bracket until g changes sign
    let dir = if g0 < 0.0 { 1.0 } else { -1.0 };
    let mut hi = dir * (params.coupling * phi.abs().powi(3) / (8.0 * params.mass_squared)).max(1e-300);
    let mut lo = 0.0;
    let mut tries = 0;
    while g(hi).signum() == g0.signum() {
        lo = hi;
        hi *= 2.0;
        tries += 1;
        if tries > 2000 || !hi.is_finite() {
            return Err(Error::RootFind(format!("no sign change of the saddle equation for phi = {phi}")));
        }
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if g(mid).signum() == g0.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let root = 0.5 * (lo + hi);
    let scale = params.mass_squared * root.abs() + params.coupling * phi.abs().powi(3);
    if !(g(root).abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE)) {
        return Err(Error::RootFind(format!("bisection stalled at chi = {root}")));
    }
    Ok(root)
}

/// Evaluates the series at `phi` and compares with direct stationarisation.
pub fn saddle_consistency(params: &ModelParams, phi: f64, truncation_order: u32) -> Result<SaddleReport> {
    let chi = solve_mirror_series(params, truncation_order)?.chi;
    let ds = tree_level_delta_s(&chi, params, truncation_order)?;
    let chi_numeric = solve_saddle(params, phi)?;
    let numeric_value = saddle_value(params, phi, chi_numeric);
    let series_value = ds.evaluate(phi);
    let diff = (series_value - numeric_value).abs();
    let relative_deviation = if numeric_value != 0.0 { diff / numeric_value.abs() } else { diff };
    Ok(SaddleReport {
        phi,
        series_value,
        numeric_value,
        chi_series: chi.evaluate(phi),
        chi_numeric,
        relative_deviation,
        in_validity_region: params.coupling * phi * phi / params.mass_squared <= 0.1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(lambda: f64) -> ModelParams {
        ModelParams::new(1.0, lambda, 0, 0.1).unwrap()
    }

    #[test]
    fn leading_mirror_coefficient() {
        let s = solve_mirror_series(&unit(1.0), 5).unwrap();
        assert_eq!(s.chi.coefficient(3), ratio(1, 8));
        assert!(s.chi.is_odd());
        assert!(s.passes <= 5, "{}", s.passes);
        let p = ModelParams::new(2.0, 0.5, 0, 0.1).unwrap();
        let s = solve_mirror_series(&p, 3).unwrap();
        assert_eq!(s.chi.coefficient(3), ratio(1, 32));
    }

    #[test]
    fn free_theory_has_no_mirror_field() {
        let s = solve_mirror_series(&unit(0.0), 4).unwrap();
        assert!(s.chi.is_zero());
        let ds = tree_level_delta_s(&s.chi, &unit(0.0), 4).unwrap();
        assert!(ds.is_zero());
    }

    #[test]
    fn nonpositive_mass_is_rejected() {
        let p = ModelParams::new(0.0, 1.0, 0, 0.1).unwrap();
        assert_eq!(solve_mirror_series(&p, 3).unwrap_err(), Error::NonPositiveMass(0.0));
    }

    #[test]
    fn residual_starts_above_truncation() {
        let k = 4;
        let p = ModelParams::new(1.5, 0.75, 0, 0.1).unwrap();
        let s = solve_mirror_series(&p, k).unwrap();
        let r = mirror_residual(&s.chi, &p).unwrap();
        assert!(r.lowest_power().unwrap() > mirror_max_power(k));
    }

    #[test]
    fn delta_s_leading_term_and_parity() {
        let s = solve_mirror_series(&unit(1.0), 5).unwrap();
        let ds = tree_level_delta_s(&s.chi, &unit(1.0), 5).unwrap();
        assert_eq!(ds.lowest_power(), Some(6));
        assert_eq!(ds.coefficient(6), ratio(-1, 128));
        assert!(ds.is_even());
        assert!(tree_level_delta_s(&s.chi, &unit(1.0), 4).is_err());
    }

    #[test]
    fn saddle_at_origin_and_inside_validity() {
        let r = saddle_consistency(&unit(1.0), 0.0, 5).unwrap();
        assert_eq!(r.chi_numeric, 0.0);
        assert_eq!(r.numeric_value, 0.0);
        let r = saddle_consistency(&unit(1.0), 0.2, 5).unwrap();
        assert!(r.in_validity_region);
        assert!(r.relative_deviation < 1e-6, "{r:?}");
        let r = saddle_consistency(&unit(1.0), -0.3, 5).unwrap();
        assert!(r.relative_deviation < 1e-6, "{r:?}");
    }

    #[test]
    fn evaluate_matches_term_sum() {
        let s = solve_mirror_series(&unit(1.0), 5).unwrap();
        let x: f64 = 0.7;
        let direct: f64 = s.chi.terms().map(|(p, c)| c.to_f64().unwrap() * x.powi(p as i32)).sum();
        assert!((s.chi.evaluate(x) - direct).abs() < 1e-15);
    }
}
