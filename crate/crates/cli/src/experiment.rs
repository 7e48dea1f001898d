//! Monte Carlo statistics of Haar-random `d ⊗ d` pure states.

use gme_core::haar::{haar_e2_probability_d4, haar_egd_cdf, haar_psucc_full_density, integrate};
use gme_core::measures::{distill_probability, k_gme_from_spectrum};
use gme_core::{sample_haar_pure, schmidt_spectrum, DimsLayout, QError, Result};
use rayon::prelude::*;
use std::io::Write;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n_samples: usize,
    pub d: usize,
    pub seed: u64,
    /// Orders `k` whose histograms are emitted.
    pub ks: Vec<usize>,
    /// Target dimensions `m` of the distillation columns.
    pub ms: Vec<usize>,
    pub bins: usize,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(QError::ParameterOutOfRange(m));
        if self.n_samples == 0 {
            return bad("n_samples must be at least 1".into());
        }
        if self.d < 2 {
            return bad(format!("d must be at least 2, got {}", self.d));
        }
        if self.bins == 0 {
            return bad("bins must be at least 1".into());
        }
        if let Some(k) = self.ks.iter().find(|&&k| k < 2 || k > self.d) {
            return bad(format!("k = {k} outside 2..={}", self.d));
        }
        if let Some(m) = self.ms.iter().find(|&&m| m < 2 || m > self.d) {
            return bad(format!("m = {m} outside 2..={}", self.d));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub index: usize,
    /// `E^{(2)}, …, E^{(d)}`.
    pub gme: Vec<f64>,
    pub psucc: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistogramRow {
    pub quantity: String,
    pub bin_left: f64,
    pub bin_right: f64,
    pub empirical_density: f64,
    pub analytic_density: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub samples: Vec<Sample>,
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<Experiment> {
    config.validate()?;
    let layout = DimsLayout::new(vec![config.d, config.d])?;
    let samples = (0..config.n_samples)
        .into_par_iter()
        .map(|index| {
            let psi = sample_haar_pure(&layout, config.seed.wrapping_add(index as u64));
            let spec = schmidt_spectrum(&psi, &[0])?;
            let gme = (2..=config.d).map(|k| k_gme_from_spectrum(&spec, k)).collect();
            let psucc = config
                .ms
                .iter()
                .map(|&m| distill_probability(&psi, m, &[0]).map(|r| r.optimal_probability))
                .collect::<Result<_>>()?;
            Ok(Sample { index, gme, psucc })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Experiment { config: config.clone(), samples })
}

/// Shortest representation that parses back to the same double.
fn num(x: f64) -> String {
    serde_json::to_string(&x).expect("finite doubles serialize")
}

fn histogram(
    quantity: String,
    values: &[f64],
    (lo, hi): (f64, f64),
    bins: usize,
    probability: Option<&dyn Fn(f64, f64) -> f64>,
) -> Vec<HistogramRow> {
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in values {
        let i = ((v - lo) / width).floor().max(0.0) as usize;
        counts[i.min(bins - 1)] += 1;
    }
    let total = values.len() as f64;
    counts
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let (a, b) = (lo + i as f64 * width, lo + (i + 1) as f64 * width);
            HistogramRow {
                quantity: quantity.clone(),
                bin_left: a,
                bin_right: b,
                empirical_density: c as f64 / (total * width),
                analytic_density: probability.map(|p| p(a, b) / width),
            }
        })
        .collect()
}

impl Experiment {
    pub fn column(&self, k: usize) -> Vec<f64> {
        self.samples.iter().map(|s| s.gme[k - 2]).collect()
    }

    pub fn psucc_column(&self, m: usize) -> Option<Vec<f64>> {
        let j = self.config.ms.iter().position(|&x| x == m)?;
        Some(self.samples.iter().map(|s| s.psucc[j]).collect())
    }

    /// Mean of `E^{(d)}` and its standard error.
    pub fn mean_smallest(&self) -> (f64, f64) {
        let v = self.column(self.config.d);
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let var = if v.len() > 1 { v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
        (mean, (var / n).sqrt())
    }

    pub fn histograms(&self) -> Vec<HistogramRow> {
        let d = self.config.d;
        let df = d as f64;
        let bins = self.config.bins;
        let mut rows = Vec::new();
        for &k in &self.config.ks {
            let hi = (d - k + 1) as f64 / df;
            let smallest = move |a: f64, b: f64| haar_egd_cdf(d, a) - haar_egd_cdf(d, b);
            let probability: Option<&dyn Fn(f64, f64) -> f64> = if k == d {
                Some(&smallest)
            } else if k == 2 && d == 4 {
                Some(&haar_e2_probability_d4)
            } else {
                None
            };
            rows.extend(histogram(format!("E{k}"), &self.column(k), (0.0, hi), bins, probability));
        }
        for &m in &self.config.ms {
            let full = move |a: f64, b: f64| integrate(|x| haar_psucc_full_density(d, x), a, b, 8);
            let probability: Option<&dyn Fn(f64, f64) -> f64> = if m == d { Some(&full) } else { None };
            let values = self.psucc_column(m).unwrap();
            rows.extend(histogram(format!("psucc_{m}"), &values, (0.0, 1.0), bins, probability));
        }
        rows
    }

    pub fn write_samples<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        let mut header = vec!["sample_index".to_string()];
        header.extend((2..=self.config.d).map(|k| format!("E{k}")));
        header.extend(self.config.ms.iter().map(|m| format!("psucc_{m}")));
        w.write_record(&header)?;
        for s in &self.samples {
            let mut rec = vec![s.index.to_string()];
            rec.extend(s.gme.iter().chain(&s.psucc).map(|&x| num(x)));
            w.write_record(&rec)?;
        }
        w.flush()
    }

    pub fn write_histograms<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(["quantity", "bin_left", "bin_right", "empirical_density", "analytic_density"])?;
        for r in self.histograms() {
            w.write_record([
                r.quantity,
                num(r.bin_left),
                num(r.bin_right),
                num(r.empirical_density),
                r.analytic_density.map(num).unwrap_or_default(),
            ])?;
        }
        w.flush()
    }
}
