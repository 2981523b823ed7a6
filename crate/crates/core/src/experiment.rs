//! Monte-Carlo harness and the results file format.

use std::fs::{File, OpenOptions};
use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::code::{classify_residual, syndrome, Outcome};
use crate::decoder::{DecodeStatus, Decoder, DecoderConfig};
use crate::error::{Error, Result};
use crate::lattice::LatticeShape;
use crate::noise::{NoiseModel, RngStream};

pub const CSV_HEADER: [&str; 11] = [
    "L",
    "p",
    "noise",
    "samples",
    "failures",
    "heralded_failures",
    "logical_failures",
    "mean_iterations",
    "p_fail",
    "std_error",
    "seed",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Lattice exponents `N`, `L = 2^N`.
    pub exponents: Vec<u32>,
    pub rates: Vec<f64>,
    pub noise: NoiseModel,
    pub samples: u64,
    pub seed: u64,
    /// Decoder weight rate; the sampling rate of each cell when `None`.
    pub weight_p: Option<f64>,
    pub max_iterations: usize,
    pub jobs: usize,
}

impl RunConfig {
    pub fn new(exponents: Vec<u32>, rates: Vec<f64>, noise: NoiseModel, samples: u64, seed: u64) -> Self {
        Self {
            exponents,
            rates,
            noise,
            samples,
            seed,
            weight_p: None,
            max_iterations: DecoderConfig::DEFAULT_MAX_ITERATIONS,
            jobs: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::Config("samples must be at least 1".into()));
        }
        if self.jobs == 0 {
            return Err(Error::Config("jobs must be at least 1".into()));
        }
        if let Some(p) = self.rates.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::Config(format!("error rate {p} outside [0, 1]")));
        }
        for &n in &self.exponents {
            LatticeShape::from_exponent(n)?;
        }
        Ok(())
    }
}

/// Aggregated outcome of one `(L, p, noise)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleStats {
    pub width: u32,
    pub p: f64,
    pub noise: NoiseModel,
    pub samples: u64,
    pub failures: u64,
    pub heralded_failures: u64,
    pub logical_failures: u64,
    pub mean_iterations: f64,
    pub p_fail: f64,
    pub std_error: f64,
    pub seed: u64,
}

impl SampleStats {
    pub fn from_counts(width: u32, p: f64, noise: NoiseModel, seed: u64, tally: Tally) -> Self {
        let samples = tally.samples;
        let failures = tally.heralded + tally.logical;
        let (p_fail, mean_iterations) = if samples == 0 {
            (0.0, 0.0)
        } else {
            (
                failures as f64 / samples as f64,
                tally.iterations as f64 / samples as f64,
            )
        };
        Self {
            width,
            p,
            noise,
            samples,
            failures,
            heralded_failures: tally.heralded,
            logical_failures: tally.logical,
            mean_iterations,
            p_fail,
            std_error: standard_error(p_fail, samples),
            seed,
        }
    }

    pub fn successes(&self) -> u64 {
        self.samples - self.failures
    }

    /// Fraction of failures that were heralded, if any failed.
    pub fn heralded_ratio(&self) -> Option<f64> {
        (self.failures > 0).then(|| self.heralded_failures as f64 / self.failures as f64)
    }
}

/// `sqrt((1 − p_fail)·p_fail/η)`.
pub fn standard_error(p_fail: f64, samples: u64) -> f64 {
    if samples == 0 {
        return 0.0;
    }
    ((1.0 - p_fail) * p_fail / samples as f64).sqrt()
}

/// Integer outcome counts; merging is commutative and associative.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tally {
    pub samples: u64,
    pub heralded: u64,
    pub logical: u64,
    pub iterations: u64,
}

impl Tally {
    pub fn merge(self, other: Tally) -> Tally {
        Tally {
            samples: self.samples + other.samples,
            heralded: self.heralded + other.heralded,
            logical: self.logical + other.logical,
            iterations: self.iterations + other.iterations,
        }
    }
}

/// How one sample ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleOutcome {
    Success,
    Heralded,
    Logical,
}

/// Draws, decodes and classifies sample `index`.
pub fn run_sample(
    decoder: &Decoder,
    noise: NoiseModel,
    p: f64,
    seed: u64,
    index: u64,
) -> Result<(SampleOutcome, usize)> {
    let error = noise.sample(decoder.shape(), p, RngStream::new(seed, index));
    let result = decoder.decode(&syndrome(&error))?;
    let outcome = match result.status {
        DecodeStatus::HeraldedFailure => SampleOutcome::Heralded,
        DecodeStatus::Converged => match classify_residual(&error, &result.total_correction)? {
            Outcome::Success => SampleOutcome::Success,
            Outcome::LogicalFailure => SampleOutcome::Logical,
        },
    };
    Ok((outcome, result.iterations_used))
}

/// Runs samples `range` of one cell on the current rayon pool.
pub fn run_cell_range(
    decoder: &Decoder,
    noise: NoiseModel,
    p: f64,
    seed: u64,
    range: std::ops::Range<u64>,
) -> Result<Tally> {
    range
        .into_par_iter()
        .map(|i| {
            let (outcome, iterations) = run_sample(decoder, noise, p, seed, i)?;
            Ok(Tally {
                samples: 1,
                heralded: (outcome == SampleOutcome::Heralded) as u64,
                logical: (outcome == SampleOutcome::Logical) as u64,
                iterations: iterations as u64,
            })
        })
        .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))
}

/// One decoder per lattice size and rate, samples spread over `jobs` threads.
pub fn run_batch(cfg: &RunConfig) -> Result<Vec<SampleStats>> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let mut out = Vec::with_capacity(cfg.exponents.len() * cfg.rates.len());
    for &n in &cfg.exponents {
        let shape = LatticeShape::from_exponent(n)?;
        for &p in &cfg.rates {
            let mut dcfg = DecoderConfig::new(cfg.weight_p.unwrap_or(p));
            dcfg.max_iterations = cfg.max_iterations;
            let decoder = Decoder::new(shape, dcfg)?;
            let tally = pool.install(|| run_cell_range(&decoder, cfg.noise, p, cfg.seed, 0..cfg.samples))?;
            let stats = SampleStats::from_counts(shape.width(), p, cfg.noise, cfg.seed, tally);
            log::info!(
                "L={} p={} {}: {}/{} failed ({} heralded), {:.2} iterations",
                stats.width,
                p,
                cfg.noise,
                stats.failures,
                stats.samples,
                stats.heralded_failures,
                stats.mean_iterations
            );
            out.push(stats);
        }
    }
    Ok(out)
}

/// Formats like C's `%.17g`: shortest layout, 17 significant digits,
/// enough to round-trip every `f64`.
pub fn format_g17(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific layout");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = mantissa.strip_prefix('-').map_or(("", mantissa), |m| ("-", m));
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    if (-4..17).contains(&exp) {
        let s = if exp >= 0 {
            let (int, frac) = digits.split_at(exp as usize + 1);
            format!("{int}.{frac}")
        } else {
            format!("0.{}{}", "0".repeat((-exp - 1) as usize), digits)
        };
        let s = s.trim_end_matches('0').trim_end_matches('.');
        format!("{sign}{s}")
    } else {
        let (lead, rest) = digits.split_at(1);
        let rest = rest.trim_end_matches('0');
        let body = if rest.is_empty() {
            lead.to_string()
        } else {
            format!("{lead}.{rest}")
        };
        let esign = if exp < 0 { '-' } else { '+' };
        format!("{sign}{body}e{esign}{:02}", exp.abs())
    }
}

fn record(s: &SampleStats) -> [String; 11] {
    [
        s.width.to_string(),
        format_g17(s.p),
        s.noise.to_string(),
        s.samples.to_string(),
        s.failures.to_string(),
        s.heralded_failures.to_string(),
        s.logical_failures.to_string(),
        format_g17(s.mean_iterations),
        format_g17(s.p_fail),
        format_g17(s.std_error),
        s.seed.to_string(),
    ]
}

/// Appends rows to `path`, writing the header first if the file is new or empty.
pub fn write_results(stats: &[SampleStats], path: &Path) -> Result<()> {
    let mut file = OpenOptions::new().create(true).append(true).open(path)?;
    let fresh = file.metadata()?.len() == 0;
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        if fresh {
            w.write_record(CSV_HEADER)?;
        }
        for s in stats {
            w.write_record(record(s))?;
        }
        w.flush()?;
    }
    file.write_all(&buf)?;
    Ok(())
}

pub fn read_results(path: &Path) -> Result<Vec<SampleStats>> {
    let mut text = String::new();
    File::open(path)?.read_to_string(&mut text)?;
    parse_results(&text)
}

pub fn parse_results(text: &str) -> Result<Vec<SampleStats>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = rdr.headers()?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::Malformed(format!(
            "unexpected header {:?}",
            header.iter().collect::<Vec<_>>()
        )));
    }
    let mut out = Vec::new();
    for (line, row) in rdr.records().enumerate() {
        let row = row?;
        let field = |i: usize| row.get(i).unwrap_or("");
        let bad = |i: usize| Error::Malformed(format!("row {}: bad {} value {:?}", line + 1, CSV_HEADER[i], field(i)));
        let int = |i: usize| field(i).parse::<u64>().map_err(|_| bad(i));
        let real = |i: usize| field(i).parse::<f64>().map_err(|_| bad(i));
        let width = u32::try_from(int(0)?).map_err(|_| bad(0))?;
        LatticeShape::new(width).map_err(|_| bad(0))?;
        let stats = SampleStats {
            width,
            p: real(1)?,
            noise: field(2).parse().map_err(|_| bad(2))?,
            samples: int(3)?,
            failures: int(4)?,
            heralded_failures: int(5)?,
            logical_failures: int(6)?,
            mean_iterations: real(7)?,
            p_fail: real(8)?,
            std_error: real(9)?,
            seed: int(10)?,
        };
        if stats.failures != stats.heralded_failures + stats.logical_failures || stats.failures > stats.samples {
            return Err(Error::Malformed(format!("row {}: inconsistent counts", line + 1)));
        }
        out.push(stats);
    }
    Ok(out)
}
