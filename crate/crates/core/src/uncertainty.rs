//! Monte Carlo propagation of covariance-matrix measurement errors through the
//! PPT and van Loock–Furusawa criteria.
//!
//! Each sample perturbs every independent entry with Gaussian noise of the given
//! standard deviation and rescales the whole matrix by `1/c`, `c ~ N(1, s)`, for
//! the shot-noise calibration error. Sample `k` is drawn from a ChaCha20 stream
//! selected by `k`, so any sample can be regenerated alone from `(seed, k)`.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::criteria::{partial_transpose, ppt_from_spectrum, vlf_inequalities, PptResult};
use crate::error::{Error, Result};
use crate::gaussian::{
    symplectic_eigenvalues, symplectic_eigenvalues_direct, CovarianceMatrix, SymplecticSpectrum,
    PHYSICAL_TOL,
};

pub const DEFAULT_SAMPLES: usize = 10_000;
pub const DEFAULT_SHOT_NOISE_REL: f64 = 0.006;
pub const HISTOGRAM_BINS: usize = 64;
pub const RNG_ALGORITHM: &str = "ChaCha20 (rand_chacha), stream = draw index";

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorModel {
    pub entry_std: DMatrix<f64>,
    pub shot_noise_rel: f64,
    pub n_samples: usize,
    pub seed: u64,
}

impl ErrorModel {
    /// Zero per-entry error, paper-default shot-noise error and sample count.
    pub fn new(dim: usize, seed: u64) -> Self {
        Self {
            entry_std: DMatrix::zeros(dim, dim),
            shot_noise_rel: DEFAULT_SHOT_NOISE_REL,
            n_samples: DEFAULT_SAMPLES,
            seed,
        }
    }

    pub fn uniform(dim: usize, std: f64, seed: u64) -> Self {
        Self {
            entry_std: DMatrix::from_element(dim, dim, std),
            ..Self::new(dim, seed)
        }
    }

    pub fn with_shot_noise(mut self, rel: f64) -> Self {
        self.shot_noise_rel = rel;
        self
    }

    pub fn with_samples(mut self, n: usize) -> Self {
        self.n_samples = n;
        self
    }

    pub fn validate(&self, cm: &CovarianceMatrix) -> Result<()> {
        let n = cm.dim();
        if self.entry_std.shape() != (n, n) {
            return Err(Error::Dimension(format!(
                "error matrix is {}x{}, state is {}x{}",
                self.entry_std.nrows(),
                self.entry_std.ncols(),
                n,
                n
            )));
        }
        for i in 0..n {
            for j in 0..n {
                let s = self.entry_std[(i, j)];
                if !s.is_finite() || s < 0.0 {
                    return Err(Error::Input(format!(
                        "errors[{}][{}] must be finite and nonnegative, got {}",
                        i, j, s
                    )));
                }
                if (s - self.entry_std[(j, i)]).abs() > 1e-12 * s.abs().max(1.0) {
                    return Err(Error::Input(format!(
                        "error matrix is not symmetric at ({}, {})",
                        i, j
                    )));
                }
            }
        }
        if !self.shot_noise_rel.is_finite() || self.shot_noise_rel < 0.0 {
            return Err(Error::Input(format!(
                "shot_noise_rel must be nonnegative, got {}",
                self.shot_noise_rel
            )));
        }
        if self.n_samples == 0 {
            return Err(Error::Input("n_samples must be positive".into()));
        }
        Ok(())
    }
}

/// Draws sample `draw_index` of the perturbed covariance matrix.
pub fn sample_covariance(cm: &CovarianceMatrix, em: &ErrorModel, draw_index: u64) -> Result<CovarianceMatrix> {
    em.validate(cm)?;
    let mut rng = ChaCha20Rng::seed_from_u64(em.seed);
    rng.set_stream(draw_index);

    let n = cm.dim();
    let mut m = cm.entries().clone();
    for i in 0..n {
        for j in i..n {
            let z: f64 = StandardNormal.sample(&mut rng);
            let v = m[(i, j)] + em.entry_std[(i, j)] * z;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    let z: f64 = StandardNormal.sample(&mut rng);
    let c = 1.0 + em.shot_noise_rel * z;
    if c <= 0.0 {
        return Err(Error::Numerical(format!(
            "shot-noise calibration draw {} is non-positive",
            c
        )));
    }
    CovarianceMatrix::new(m / c)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    /// Fixed-bin histogram over the observed range of `values`.
    pub fn from_values(values: &[f64], bins: usize) -> Self {
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let width = (hi - lo) / bins as f64;
        let edges = (0..=bins)
            .map(|i| if i == bins { hi } else { lo + width * i as f64 })
            .collect();
        let mut counts = vec![0u64; bins];
        for &v in values {
            let idx = if width > 0.0 {
                (((v - lo) / width) as usize).min(bins - 1)
            } else {
                0
            };
            counts[idx] += 1;
        }
        Self { edges, counts }
    }

    /// Single peak after centered 3-bin smoothing. Walking outward from the
    /// highest bin, a rise of more than three Poisson standard deviations above
    /// the lowest point passed so far counts as a second mode.
    pub fn is_unimodal(&self) -> bool {
        let s = smooth3(&self.counts);
        let Some(top) = (0..s.len()).max_by(|&a, &b| s[a].total_cmp(&s[b])) else {
            return true;
        };
        monotone_tail(s[top..].iter()) && monotone_tail(s[..=top].iter().rev())
    }
}

fn smooth3(counts: &[u64]) -> Vec<f64> {
    let n = counts.len();
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(1);
            let hi = (i + 1).min(n - 1);
            let window = &counts[lo..=hi];
            window.iter().sum::<u64>() as f64 / window.len() as f64
        })
        .collect()
}

fn monotone_tail<'a>(values: impl Iterator<Item = &'a f64>) -> bool {
    let mut valley = f64::INFINITY;
    for &v in values {
        valley = valley.min(v);
        if v - valley > 3.0 * (valley + 1.0).sqrt() {
            return false;
        }
    }
    true
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
}

impl Summary {
    /// Mean and sample standard deviation, accumulated in index order.
    pub fn from_values(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let rough = values.iter().sum::<f64>() / n;
        let mean = rough + values.iter().map(|v| v - rough).sum::<f64>() / n;
        let var = if values.len() > 1 {
            values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Self {
            mean,
            std: var.sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeStatistics {
    pub mode: usize,
    pub nu_min: Summary,
    pub histogram: Histogram,
    pub unimodal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VlfStatistics {
    pub v: [Summary; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McReport {
    pub seed: u64,
    pub rng: String,
    pub n_samples: usize,
    pub shot_noise_rel: f64,
    pub modes: Vec<ModeStatistics>,
    pub unphysical_fraction: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vlf: Option<VlfStatistics>,
}

struct SampleOutcome {
    nu_min: Vec<f64>,
    unphysical: bool,
    vlf: Option<[f64; 3]>,
}

// Positive-definite matrices take the Cholesky path; anything else falls back to
// the direct eigenvalues of iΩσ.
fn spectrum_any(cm: &CovarianceMatrix) -> Result<(SymplecticSpectrum, bool)> {
    match symplectic_eigenvalues(cm) {
        Ok(s) => Ok((s, true)),
        Err(Error::NotPositiveDefinite { .. }) => Ok((symplectic_eigenvalues_direct(cm)?, false)),
        Err(e) => Err(e),
    }
}

fn ppt_any(cm: &CovarianceMatrix, mode: usize) -> Result<PptResult> {
    let (spectrum, _) = spectrum_any(&partial_transpose(cm, mode)?)?;
    Ok(ppt_from_spectrum(mode, spectrum))
}

fn evaluate_sample(sample: &CovarianceMatrix) -> Result<SampleOutcome> {
    let (own, pd) = spectrum_any(sample)?;
    let unphysical = !pd || own.min() < 1.0 - PHYSICAL_TOL;
    let nu_min = (0..sample.n_modes())
        .map(|k| ppt_any(sample, k).map(|r| r.nu_min))
        .collect::<Result<Vec<_>>>()?;
    let vlf = if sample.n_modes() == 3 {
        Some(vlf_inequalities(sample)?.v)
    } else {
        None
    };
    Ok(SampleOutcome {
        nu_min,
        unphysical,
        vlf,
    })
}

/// Runs every criterion on `em.n_samples` perturbed matrices and aggregates the results.
///
/// Samples are evaluated in parallel but reduced in draw order, so the report is
/// identical for any thread count.
pub fn monte_carlo(cm: &CovarianceMatrix, em: &ErrorModel) -> Result<McReport> {
    em.validate(cm)?;
    let outcomes = (0..em.n_samples as u64)
        .into_par_iter()
        .map(|k| sample_covariance(cm, em, k).and_then(|s| evaluate_sample(&s)))
        .collect::<Result<Vec<_>>>()?;

    let n_modes = cm.n_modes();
    let modes = (0..n_modes)
        .map(|k| {
            let values: Vec<f64> = outcomes.iter().map(|o| o.nu_min[k]).collect();
            let histogram = Histogram::from_values(&values, HISTOGRAM_BINS);
            ModeStatistics {
                mode: k,
                nu_min: Summary::from_values(&values),
                unimodal: histogram.is_unimodal(),
                histogram,
            }
        })
        .collect();

    let unphysical = outcomes.iter().filter(|o| o.unphysical).count();
    let vlf = if n_modes == 3 {
        let per = |i: usize| {
            let vals: Vec<f64> = outcomes.iter().map(|o| o.vlf.expect("three modes")[i]).collect();
            Summary::from_values(&vals)
        };
        Some(VlfStatistics {
            v: [per(0), per(1), per(2)],
        })
    } else {
        None
    };

    Ok(McReport {
        seed: em.seed,
        rng: RNG_ALGORITHM.to_string(),
        n_samples: em.n_samples,
        shot_noise_rel: em.shot_noise_rel,
        modes,
        unphysical_fraction: unphysical as f64 / em.n_samples as f64,
        vlf,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{pump_twin_triplet, vacuum, TripletParams};

    fn state() -> CovarianceMatrix {
        pump_twin_triplet(&TripletParams::new(0.5, 0.3).with_noise([0.1, 0.05, 0.05])).unwrap()
    }

    #[test]
    fn defaults_follow_published_procedure() {
        let em = ErrorModel::new(6, 1);
        assert_eq!(em.n_samples, 10_000);
        assert_eq!(em.shot_noise_rel, 0.006);
        assert_eq!(em.entry_std, DMatrix::zeros(6, 6));
    }

    #[test]
    fn zero_error_sample_is_exact() {
        let cm = state();
        let em = ErrorModel::new(6, 3).with_shot_noise(0.0);
        assert_eq!(sample_covariance(&cm, &em, 17).unwrap(), cm);
    }

    #[test]
    fn samples_are_deterministic_and_symmetric() {
        let cm = state();
        let em = ErrorModel::uniform(6, 0.02, 9);
        let a = sample_covariance(&cm, &em, 5).unwrap();
        let b = sample_covariance(&cm, &em, 5).unwrap();
        let c = sample_covariance(&cm, &em, 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.entries(), &a.entries().transpose());
    }

    #[test]
    fn shot_noise_only_is_global_scale() {
        let cm = state();
        let em = ErrorModel::new(6, 11);
        let s = sample_covariance(&cm, &em, 0).unwrap();
        let ratio = cm.get(0, 0) / s.get(0, 0);
        for i in 0..6 {
            for j in 0..6 {
                if cm.get(i, j) != 0.0 {
                    assert!((cm.get(i, j) / s.get(i, j) - ratio).abs() < 1e-12);
                }
            }
        }
        // ν(σ/c) = ν(σ)/c
        let nu = symplectic_eigenvalues(&cm).unwrap();
        let nu_s = symplectic_eigenvalues(&s).unwrap();
        for (a, b) in nu.values().iter().zip(nu_s.values()) {
            assert!((a / ratio - b).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_error_report_collapses() {
        let cm = state();
        let em = ErrorModel::new(6, 1).with_shot_noise(0.0).with_samples(50);
        let rep = monte_carlo(&cm, &em).unwrap();
        assert_eq!(rep.unphysical_fraction, 0.0);
        for m in &rep.modes {
            assert_eq!(m.nu_min.std, 0.0);
            assert!(m.unimodal);
        }
        let vlf = vlf_inequalities(&cm).unwrap();
        for i in 0..3 {
            assert!((rep.vlf.as_ref().unwrap().v[i].mean - vlf.v[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn unphysical_samples_flow_through() {
        // vacuum with large errors: many samples are unphysical or indefinite
        let em = ErrorModel::uniform(6, 0.5, 2).with_samples(200);
        let rep = monte_carlo(&vacuum(3).unwrap(), &em).unwrap();
        assert!(rep.unphysical_fraction > 0.0);
        assert_eq!(rep.modes.len(), 3);
        assert!(rep.modes.iter().all(|m| m.histogram.counts.iter().sum::<u64>() == 200));
    }

    #[test]
    fn histogram_and_peaks() {
        let h = Histogram::from_values(&[0.0, 1.0, 1.0, 2.0], 4);
        assert_eq!(h.edges.len(), 5);
        assert_eq!(h.counts, vec![1, 0, 2, 1]);
        assert!(monotone_tail([9.0, 5.0, 6.0, 1.0].iter()));
        assert!(!monotone_tail([90.0, 0.0, 40.0].iter()));
        let flat = Histogram::from_values(&[5.0; 10], 64);
        assert_eq!(flat.counts[0], 10);
        assert!(flat.is_unimodal());
    }

    #[test]
    fn rejects_bad_error_model() {
        let cm = vacuum(1).unwrap();
        let mut em = ErrorModel::new(2, 0);
        em.entry_std[(0, 1)] = 0.1;
        assert!(monte_carlo(&cm, &em).is_err());
        let em = ErrorModel::new(4, 0);
        assert!(matches!(monte_carlo(&cm, &em), Err(Error::Dimension(_))));
        let em = ErrorModel::new(2, 0).with_shot_noise(-0.1);
        assert!(monte_carlo(&cm, &em).is_err());
    }
}
