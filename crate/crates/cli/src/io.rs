//! Result files: CSV time series, JSON documents, wave-function dumps and
//! the binary ensemble snapshot.
//!
//! Snapshot layout, all little-endian:
//!
//! ```text
//! magic    8 bytes   "KGSNAP01"
//! D        u32
//! dims     u64 x D
//! n        u64       number of members
//! seed     u64
//! time     f64
//! spec     f64 x 4   mean_sigma, mean_pi, width_sigma, width_pi
//! members  n x (sigma f64 x sites, then pi f64 x sites), sites row-major
//! ```

use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use kgfluct_core::automaton::EnsembleSample;
use kgfluct_core::{ComplexWaveFunction, Ensemble, FieldConfiguration, Lattice, SiteGaussian};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{CliError, CliResult};

pub const SNAPSHOT_MAGIC: &[u8; 8] = b"KGSNAP01";

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

/// Writes `value` as pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n").map_err(|e| CliError::io(path, e))?;
    w.flush().map_err(|e| CliError::io(path, e))
}

/// One row of `observables.csv`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservableRow {
    pub time: f64,
    pub observable_name: String,
    pub site: usize,
    pub value: f64,
}

/// One row of `diagnostics.csv`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticRow {
    pub time: f64,
    pub quantity: String,
    pub value: f64,
}

#[derive(Serialize)]
struct EnsembleRow<'a> {
    time: f64,
    site: usize,
    observable: &'a str,
    mean: f64,
    std_error: f64,
    n: usize,
}

pub fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// `time, site, observable, mean, std_error, n` for every sample.
pub fn write_ensemble_csv(path: &Path, samples: &[EnsembleSample]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    for s in samples {
        for (obs, est) in &s.estimates {
            w.serialize(EnsembleRow {
                time: s.time,
                site: obs.site,
                observable: obs.kind.name(),
                mean: est.mean,
                std_error: est.std_error,
                n: est.n,
            })?;
        }
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

#[derive(Serialize)]
struct WaveRow {
    sigma_index: usize,
    pi_or_zeta_index: usize,
    re: f64,
    im: f64,
}

/// Dumps a wave function as `sigma_index, pi_or_zeta_index, re, im`. With
/// two sites the per-site indices are flattened row-major.
pub fn write_wavefunction_csv(path: &Path, values: &[Complex64], sites: usize, count_sigma: usize, count_pi: usize) -> CliResult<()> {
    let sigma_len = count_sigma.pow(sites as u32);
    let pi_len = count_pi.pow(sites as u32);
    if values.len() != sigma_len * pi_len {
        return Err(CliError::Usage(format!(
            "wave function of {} values does not fit {sites} sites",
            values.len()
        )));
    }
    let mut w = csv::Writer::from_writer(create(path)?);
    for (flat, v) in values.iter().enumerate() {
        w.serialize(WaveRow {
            sigma_index: flat / pi_len,
            pi_or_zeta_index: flat % pi_len,
            re: v.re,
            im: v.im,
        })?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_complex_wavefunction(path: &Path, psi: &ComplexWaveFunction) -> CliResult<()> {
    let g = &psi.grid;
    write_wavefunction_csv(path, &psi.values, g.sites(), g.sigma.count, g.pi.count)
}

pub fn write_snapshot(path: &Path, ens: &Ensemble) -> CliResult<()> {
    let mut buf = Vec::new();
    buf.extend_from_slice(SNAPSHOT_MAGIC);
    let dims = ens.lattice.dims();
    buf.extend_from_slice(&(dims.len() as u32).to_le_bytes());
    for &d in dims {
        buf.extend_from_slice(&(d as u64).to_le_bytes());
    }
    buf.extend_from_slice(&(ens.len() as u64).to_le_bytes());
    buf.extend_from_slice(&ens.seed.to_le_bytes());
    let time = ens.members.first().map_or(0.0, |m| m.time);
    buf.extend_from_slice(&time.to_le_bytes());
    let g = &ens.initial_spec;
    for x in [g.mean_sigma, g.mean_pi, g.width_sigma, g.width_pi] {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    for m in &ens.members {
        for x in m.sigma.iter().chain(&m.pi) {
            buf.extend_from_slice(&x.to_le_bytes());
        }
    }
    let mut w = create(path)?;
    w.write_all(&buf).map_err(|e| CliError::io(path, e))?;
    w.flush().map_err(|e| CliError::io(path, e))
}

struct Cursor<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Cursor<'a> {
    fn take<const N: usize>(&mut self) -> Option<[u8; N]> {
        let out = self.bytes.get(self.at..self.at + N)?.try_into().ok()?;
        self.at += N;
        Some(out)
    }

    fn u32(&mut self) -> Option<u32> {
        self.take().map(u32::from_le_bytes)
    }

    fn u64(&mut self) -> Option<u64> {
        self.take().map(u64::from_le_bytes)
    }

    fn f64(&mut self) -> Option<f64> {
        self.take().map(f64::from_le_bytes)
    }
}

pub fn read_snapshot(path: &Path) -> CliResult<Ensemble> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| CliError::io(path, e))?;
    let bad = |reason: &str| CliError::Snapshot {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    };
    let mut c = Cursor { bytes: &bytes, at: 0 };
    if c.take::<8>().as_ref() != Some(SNAPSHOT_MAGIC) {
        return Err(bad("bad magic"));
    }
    let truncated = || bad("truncated header");
    let d = c.u32().ok_or_else(truncated)? as usize;
    if d > 8 {
        return Err(bad("implausible dimension"));
    }
    let mut dims = Vec::with_capacity(d);
    for _ in 0..d {
        dims.push(c.u64().ok_or_else(truncated)? as usize);
    }
    let n = c.u64().ok_or_else(truncated)? as usize;
    let seed = c.u64().ok_or_else(truncated)?;
    let time = c.f64().ok_or_else(truncated)?;
    let mut spec = [0.0; 4];
    for s in spec.iter_mut() {
        *s = c.f64().ok_or_else(truncated)?;
    }
    let lattice = Lattice::new(dims);
    let sites = lattice.sites();
    let expected = c.at as u128 + n as u128 * sites as u128 * 16;
    if bytes.len() as u128 != expected {
        return Err(bad(&format!("expected {expected} bytes, found {}", bytes.len())));
    }
    let mut members = Vec::with_capacity(n);
    for _ in 0..n {
        let mut m = FieldConfiguration::zeros(sites);
        m.time = time;
        for x in m.sigma.iter_mut().chain(m.pi.iter_mut()) {
            *x = c.f64().expect("length checked");
        }
        members.push(m);
    }
    Ok(Ensemble {
        members,
        seed,
        initial_spec: SiteGaussian {
            mean_sigma: spec[0],
            mean_pi: spec[1],
            width_sigma: spec[2],
            width_pi: spec[3],
        },
        lattice,
    })
}
