//! Ensemble engine: many field configurations on an arbitrary periodic
//! lattice, each advanced by the cellular-automaton update.
//!
//! Every member draws its initial values from its own ChaCha stream, so an
//! ensemble depends only on `(seed, n, spec)` and never on thread count.
//! Reductions are done over fixed-size chunks merged in member order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Lattice, ModelParams};
use crate::phase_space::SiteGaussian;
use crate::transport::{block_forward, substep, StepDirection, SubstepOrder};

/// Members per reduction chunk. Fixed so that results do not depend on the
/// rayon pool size.
const CHUNK: usize = 1024;

/// One classical microstate `(sigma(x), pi(x))` on a lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldConfiguration {
    pub sigma: Vec<f64>,
    pub pi: Vec<f64>,
    pub time: f64,
}

impl FieldConfiguration {
    pub fn zeros(sites: usize) -> Self {
        Self {
            sigma: vec![0.0; sites],
            pi: vec![0.0; sites],
            time: 0.0,
        }
    }

    pub fn check_shape(&self, lattice: &Lattice) -> Result<()> {
        let n = lattice.sites();
        if self.sigma.len() != n || self.pi.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "configuration has {}/{} values, lattice has {n} sites",
                self.sigma.len(),
                self.pi.len()
            )));
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.sigma.iter().chain(&self.pi).all(|v| v.is_finite())
    }

    /// `pi -> -pi`; running forward from the reversed state retraces the past.
    pub fn time_reversed(&self) -> Self {
        Self {
            sigma: self.sigma.clone(),
            pi: self.pi.iter().map(|p| -p).collect(),
            time: -self.time,
        }
    }
}

/// A seeded collection of configurations on a common lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub members: Vec<FieldConfiguration>,
    pub seed: u64,
    pub initial_spec: SiteGaussian,
    pub lattice: Lattice,
}

impl Ensemble {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Ensemble with every momentum negated.
    pub fn time_reversed(&self) -> Self {
        Self {
            members: self.members.iter().map(FieldConfiguration::time_reversed).collect(),
            ..self.clone()
        }
    }
}

/// The random stream of member `index`.
pub fn member_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Draws `n` independent configurations from the product Gaussian `q^2`.
pub fn sample_initial(spec: SiteGaussian, lattice: &Lattice, n: usize, seed: u64) -> Result<Ensemble> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::TooFewMembers(0));
    }
    let sites = lattice.sites();
    let members = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = member_rng(seed, i);
            let mut c = FieldConfiguration::zeros(sites);
            for s in c.sigma.iter_mut() {
                let z: f64 = StandardNormal.sample(&mut rng);
                *s = spec.mean_sigma + spec.width_sigma * z;
            }
            for p in c.pi.iter_mut() {
                let z: f64 = StandardNormal.sample(&mut rng);
                *p = spec.mean_pi + spec.width_pi * z;
            }
            c
        })
        .collect();
    Ok(Ensemble {
        members,
        seed,
        initial_spec: spec,
        lattice: lattice.clone(),
    })
}

fn substep_index(time: f64, eps: f64) -> u64 {
    (time / eps).round().max(0.0) as u64
}

/// Advances one member by `n_blocks` blocks, checking for non-finite values
/// after every substep.
fn advance(config: &mut FieldConfiguration, lattice: &Lattice, params: &ModelParams, n_blocks: u64) -> std::result::Result<(), u64> {
    let eps = params.lattice_spacing;
    let start = substep_index(config.time, eps);
    let mut scratch = vec![0.0; config.sigma.len()];
    for b in 0..n_blocks {
        for (k, order) in [SubstepOrder::PiFirst, SubstepOrder::SigmaFirst].into_iter().enumerate() {
            substep(
                &mut config.sigma,
                &mut config.pi,
                lattice,
                params,
                StepDirection::forward(order),
                &mut scratch,
            );
            if !config.is_finite() {
                return Err(start + 2 * b + k as u64 + 1);
            }
        }
    }
    config.time += 2.0 * eps * n_blocks as f64;
    Ok(())
}

fn prepare(ens: &Ensemble, params: &ModelParams) -> Result<()> {
    params.validate()?;
    ens.lattice.check_params(params)?;
    params.check_stability(&ens.lattice)?;
    for m in &ens.members {
        m.check_shape(&ens.lattice)?;
    }
    Ok(())
}

fn first_failure(results: Vec<std::result::Result<(), u64>>) -> Result<()> {
    for (member, r) in results.into_iter().enumerate() {
        if let Err(step) = r {
            return Err(Error::Divergence {
                step,
                member: Some(member),
            });
        }
    }
    Ok(())
}

/// Advances every member by `n_blocks` blocks of `2 eps`.
pub fn run_automaton(ens: &Ensemble, params: &ModelParams, n_blocks: u64) -> Result<Ensemble> {
    prepare(ens, params)?;
    let mut out = ens.clone();
    let lattice = &ens.lattice;
    let results: Vec<_> = out
        .members
        .par_iter_mut()
        .map(|m| advance(m, lattice, params, n_blocks))
        .collect();
    first_failure(results)?;
    Ok(out)
}

/// A polynomial probe of a single configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldObservableKind {
    Sigma,
    Pi,
    SigmaSquared,
    PiSquared,
    SigmaPi,
    /// total lattice energy; the site is ignored
    Energy,
}

impl FieldObservableKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Sigma => "sigma",
            Self::Pi => "pi",
            Self::SigmaSquared => "sigma_squared",
            Self::PiSquared => "pi_squared",
            Self::SigmaPi => "sigma_pi",
            Self::Energy => "energy",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sigma" => Self::Sigma,
            "pi" => Self::Pi,
            "sigma_squared" => Self::SigmaSquared,
            "pi_squared" => Self::PiSquared,
            "sigma_pi" => Self::SigmaPi,
            "energy" => Self::Energy,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldObservable {
    pub kind: FieldObservableKind,
    pub site: usize,
}

impl FieldObservable {
    pub fn new(kind: FieldObservableKind, site: usize) -> Self {
        Self { kind, site }
    }

    pub fn eval(&self, c: &FieldConfiguration, lattice: &Lattice, params: &ModelParams) -> f64 {
        let (s, p) = (c.sigma[self.site], c.pi[self.site]);
        match self.kind {
            FieldObservableKind::Sigma => s,
            FieldObservableKind::Pi => p,
            FieldObservableKind::SigmaSquared => s * s,
            FieldObservableKind::PiSquared => p * p,
            FieldObservableKind::SigmaPi => s * p,
            FieldObservableKind::Energy => energy(c, lattice, params),
        }
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub n: usize,
}

/// Streaming mean and variance (Welford), mergeable with Chan's rule.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Welford {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Welford) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        self.mean += d * other.n as f64 / n as f64;
        self.m2 += other.m2 + d * d * (self.n as f64 * other.n as f64) / n as f64;
        self.n = n;
    }

    pub fn estimate(&self) -> Result<Estimate> {
        if self.n < 2 {
            return Err(Error::TooFewMembers(self.n));
        }
        let var = self.m2 / (self.n - 1) as f64;
        Ok(Estimate {
            mean: self.mean,
            std_error: (var / self.n as f64).sqrt(),
            n: self.n,
        })
    }
}

/// Sample mean and standard error of `f` over the members.
pub fn ensemble_expect<F>(ens: &Ensemble, f: F) -> Result<Estimate>
where
    F: Fn(&FieldConfiguration) -> f64 + Sync,
{
    if ens.len() < 2 {
        return Err(Error::TooFewMembers(ens.len()));
    }
    let partial: Vec<Welford> = ens
        .members
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut w = Welford::default();
            chunk.iter().for_each(|c| w.push(f(c)));
            w
        })
        .collect();
    let mut total = Welford::default();
    partial.iter().for_each(|w| total.merge(w));
    total.estimate()
}

/// Estimates of every observable at one sampled time.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSample {
    pub time: f64,
    pub estimates: Vec<(FieldObservable, Estimate)>,
}

/// Runs the ensemble and accumulates the observables at block 0 and every
/// `sample_every` blocks, without storing histories.
pub fn run_automaton_observed(
    ens: &Ensemble,
    params: &ModelParams,
    n_blocks: u64,
    sample_every: u64,
    observables: &[FieldObservable],
) -> Result<(Ensemble, Vec<EnsembleSample>)> {
    prepare(ens, params)?;
    if ens.len() < 2 {
        return Err(Error::TooFewMembers(ens.len()));
    }
    let sites = ens.lattice.sites();
    for o in observables {
        if o.site >= sites {
            return Err(Error::param("observables.site", format!("site {} outside lattice of {sites}", o.site)));
        }
    }
    let every = sample_every.max(1);
    let mut marks: Vec<u64> = (0..=n_blocks).step_by(every as usize).collect();
    if *marks.last().unwrap() != n_blocks {
        marks.push(n_blocks);
    }
    let lattice = &ens.lattice;
    let n_obs = observables.len();

    let mut out = ens.clone();
    type ChunkResult = std::result::Result<Vec<Welford>, (usize, u64)>;
    let chunk_stats: Vec<ChunkResult> = out
        .members
        .par_chunks_mut(CHUNK)
        .enumerate()
        .map(|(ci, chunk)| {
            let mut acc = vec![Welford::default(); marks.len() * n_obs];
            for (j, member) in chunk.iter_mut().enumerate() {
                let mut done = 0;
                for (t, &mark) in marks.iter().enumerate() {
                    advance(member, lattice, params, mark - done).map_err(|s| (ci * CHUNK + j, s))?;
                    done = mark;
                    for (o, obs) in observables.iter().enumerate() {
                        acc[t * n_obs + o].push(obs.eval(member, lattice, params));
                    }
                }
            }
            Ok(acc)
        })
        .collect();

    let mut total = vec![Welford::default(); marks.len() * n_obs];
    for r in chunk_stats {
        match r {
            Ok(acc) => total.iter_mut().zip(&acc).for_each(|(t, a)| t.merge(a)),
            Err((member, step)) => {
                return Err(Error::Divergence {
                    step,
                    member: Some(member),
                })
            }
        }
    }
    let t0 = ens.members[0].time;
    let eps = params.lattice_spacing;
    let mut samples = Vec::with_capacity(marks.len());
    for (t, &mark) in marks.iter().enumerate() {
        let mut estimates = Vec::with_capacity(n_obs);
        for (o, obs) in observables.iter().enumerate() {
            estimates.push((*obs, total[t * n_obs + o].estimate()?));
        }
        samples.push(EnsembleSample {
            time: t0 + 2.0 * eps * mark as f64,
            estimates,
        });
    }
    Ok((out, samples))
}

/// Lattice energy
/// `sum_x [pi^2/2 + c/(2 eps^2) sum_k (s(x+k) - s(x))^2 + m^2 s^2/2 + lambda s^4/8]`,
/// whose negative gradient is the force.
pub fn energy(c: &FieldConfiguration, lattice: &Lattice, params: &ModelParams) -> f64 {
    let d = lattice.spatial_dim();
    let half_hop = 0.5 * params.hopping();
    let mut e = 0.0;
    for x in 0..c.sigma.len() {
        let s = c.sigma[x];
        let mut grad = 0.0;
        for k in 0..d {
            let g = c.sigma[lattice.neighbour(x, k, true)] - s;
            grad += g * g;
        }
        e += 0.5 * c.pi[x] * c.pi[x] + half_hop * grad + params.local_potential(s);
    }
    e
}

/// `E(t) - E(0)` along a history of configurations.
pub fn energy_drift(history: &[FieldConfiguration], lattice: &Lattice, params: &ModelParams) -> Vec<f64> {
    let Some(first) = history.first() else {
        return Vec::new();
    };
    let e0 = energy(first, lattice, params);
    history.iter().map(|c| energy(c, lattice, params) - e0).collect()
}

/// Block-by-block history of a single configuration, `n_blocks + 1` entries.
pub fn trajectory(
    start: &FieldConfiguration,
    lattice: &Lattice,
    params: &ModelParams,
    n_blocks: u64,
) -> Result<Vec<FieldConfiguration>> {
    params.check_stability(lattice)?;
    lattice.check_params(params)?;
    start.check_shape(lattice)?;
    let mut history = Vec::with_capacity(n_blocks as usize + 1);
    let mut c = start.clone();
    let mut scratch = vec![0.0; c.sigma.len()];
    history.push(c.clone());
    for b in 0..n_blocks {
        block_forward(&mut c.sigma, &mut c.pi, lattice, params, &mut scratch);
        c.time += 2.0 * params.lattice_spacing;
        if !c.is_finite() {
            return Err(Error::Divergence {
                step: 2 * (b + 1),
                member: None,
            });
        }
        history.push(c.clone());
    }
    Ok(history)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> SiteGaussian {
        SiteGaussian::new(0.0, 0.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn sampling_is_reproducible() {
        let l = Lattice::new(vec![3]);
        let a = sample_initial(spec(), &l, 50, 7).unwrap();
        let b = sample_initial(spec(), &l, 50, 7).unwrap();
        assert_eq!(a, b);
        let c = sample_initial(spec(), &l, 50, 8).unwrap();
        assert_ne!(a.members, c.members);
        let one = sample_initial(spec(), &l, 1, 7).unwrap();
        assert_eq!(one.members[0], a.members[0]);
    }

    #[test]
    fn sample_variance_matches_width() {
        let l = Lattice::single_site();
        let ens = sample_initial(spec(), &l, 100_000, 3).unwrap();
        let mean = ensemble_expect(&ens, |c| c.sigma[0]).unwrap();
        assert!(mean.mean.abs() < 5.0 * mean.std_error);
        let var = ensemble_expect(&ens, |c| c.sigma[0] * c.sigma[0]).unwrap();
        assert!((var.mean - 1.0).abs() < 0.02);
    }

    #[test]
    fn harmonic_means_follow_leapfrog_matrix() {
        let l = Lattice::single_site();
        let p = ModelParams::new(1.0, 0.0, 0, 0.05).unwrap();
        let s = SiteGaussian::new(1.0, 0.5, 0.3, 0.3).unwrap();
        let ens = sample_initial(s, &l, 200, 11).unwrap();
        let n = 37;
        let out = run_automaton(&ens, &p, n).unwrap();
        // oracle: 2x2 block matrix applied n times to the sample means
        let h = p.lattice_spacing;
        let m = [[1.0 - 2.0 * h * h, 2.0 * h], [-2.0 * h * (1.0 - h * h), 1.0 - 2.0 * h * h]];
        let mean = |e: &Ensemble, f: fn(&FieldConfiguration) -> f64| e.members.iter().map(f).sum::<f64>() / e.len() as f64;
        let (mut s0, mut p0) = (mean(&ens, |c| c.sigma[0]), mean(&ens, |c| c.pi[0]));
        for _ in 0..n {
            (s0, p0) = (m[0][0] * s0 + m[0][1] * p0, m[1][0] * s0 + m[1][1] * p0);
        }
        assert!((mean(&out, |c| c.sigma[0]) - s0).abs() < 1e-12);
        assert!((mean(&out, |c| c.pi[0]) - p0).abs() < 1e-12);
    }

    #[test]
    fn reversal_restores_initial_ensemble() {
        let l = Lattice::new(vec![4]);
        let p = ModelParams::new(1.0, 0.3, 1, 0.05).unwrap().with_laplacian_prefactor(0.2).unwrap();
        let ens = sample_initial(spec(), &l, 20, 1).unwrap();
        let fwd = run_automaton(&ens, &p, 200).unwrap();
        let back = run_automaton(&fwd.time_reversed(), &p, 200).unwrap().time_reversed();
        for (a, b) in back.members.iter().zip(&ens.members) {
            for x in 0..4 {
                assert!((a.sigma[x] - b.sigma[x]).abs() < 1e-10);
                assert!((a.pi[x] - b.pi[x]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn divergence_names_lowest_member() {
        let l = Lattice::single_site();
        let p = ModelParams::new(1.0, 1.0, 0, 0.5).unwrap();
        let mut ens = sample_initial(spec(), &l, 6, 1).unwrap();
        ens.members[4].sigma[0] = 1e80;
        ens.members[2].sigma[0] = 1e80;
        match run_automaton(&ens, &p, 5).unwrap_err() {
            Error::Divergence { member, .. } => assert_eq!(member, Some(2)),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn vacuum_has_zero_energy() {
        let l = Lattice::new(vec![5]);
        let p = ModelParams::new(1.0, 0.5, 1, 0.1).unwrap().with_laplacian_prefactor(0.2).unwrap();
        let hist = trajectory(&FieldConfiguration::zeros(5), &l, &p, 50).unwrap();
        assert!(energy_drift(&hist, &l, &p).iter().all(|&e| e == 0.0));
    }

    #[test]
    fn welford_merge_matches_single_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37 % 101) as f64).sin()).collect();
        let mut one = Welford::default();
        xs.iter().for_each(|&x| one.push(x));
        let mut merged = Welford::default();
        for c in xs.chunks(77) {
            let mut w = Welford::default();
            c.iter().for_each(|&x| w.push(x));
            merged.merge(&w);
        }
        let (a, b) = (one.estimate().unwrap(), merged.estimate().unwrap());
        assert!((a.mean - b.mean).abs() < 1e-14);
        assert!((a.std_error - b.std_error).abs() < 1e-14);
    }

    #[test]
    fn observed_run_matches_plain_run() {
        let l = Lattice::single_site();
        let p = ModelParams::new(1.0, 0.5, 0, 0.05).unwrap();
        let ens = sample_initial(spec(), &l, 3000, 5).unwrap();
        let obs = [FieldObservable::new(FieldObservableKind::Sigma, 0)];
        let (end, samples) = run_automaton_observed(&ens, &p, 10, 4, &obs).unwrap();
        assert_eq!(samples.len(), 4);
        assert_eq!(end, run_automaton(&ens, &p, 10).unwrap());
        let direct = ensemble_expect(&end, |c| c.sigma[0]).unwrap();
        assert_eq!(samples[3].estimates[0].1, direct);
        assert!((samples[3].time - 1.0).abs() < 1e-12);
    }
}
