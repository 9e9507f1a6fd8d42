//! Gaussianity check on demodulated photocurrent samples: central moments up to
//! order 10 compared with the values Wick's theorem predicts from the variance.

use serde::Serialize;

use crate::error::{Error, Result};

pub const MIN_SAMPLES: usize = 1000;
pub const MAX_ORDER: usize = 10;
pub const DEFAULT_BLOCKS: usize = 50;
pub const DEFAULT_Z_THRESHOLD: f64 = 4.0;

fn check_input(samples: &[f64], kmax: usize) -> Result<()> {
    if samples.len() < MIN_SAMPLES {
        return Err(Error::SampleSize {
            needed: MIN_SAMPLES,
            got: samples.len(),
        });
    }
    if kmax > MAX_ORDER {
        return Err(Error::Range(format!(
            "moment order is limited to {}, got {}",
            MAX_ORDER, kmax
        )));
    }
    if let Some(i) = samples.iter().position(|x| !x.is_finite()) {
        return Err(Error::Input(format!("sample {} is not finite", i)));
    }
    Ok(())
}

/// Central moments `m_k = (1/n) Σ (x_i − x̄)^k` for `k = 0..=kmax`, two-pass.
pub fn central_moments(samples: &[f64], kmax: usize) -> Result<Vec<f64>> {
    check_input(samples, kmax)?;
    let sums = PowerSums::accumulate(samples, mean(samples), kmax);
    Ok(sums.central_moments())
}

// Mean with one refinement pass, so constant input yields its value exactly.
fn mean(samples: &[f64]) -> f64 {
    let n = samples.len() as f64;
    let m = samples.iter().sum::<f64>() / n;
    m + samples.iter().map(|x| x - m).sum::<f64>() / n
}

/// `Σ (x − shift)^j` for `j = 0..=kmax`, plus the count in slot 0.
#[derive(Debug, Clone)]
struct PowerSums {
    sums: Vec<f64>,
}

impl PowerSums {
    fn accumulate(samples: &[f64], shift: f64, kmax: usize) -> Self {
        let mut sums = vec![0.0; kmax + 1];
        for &x in samples {
            let d = x - shift;
            let mut p = 1.0;
            for s in sums.iter_mut() {
                *s += p;
                p *= d;
            }
        }
        Self { sums }
    }

    fn minus(&self, other: &PowerSums) -> Self {
        Self {
            sums: self.sums.iter().zip(&other.sums).map(|(a, b)| a - b).collect(),
        }
    }

    // Re-centers the shifted power sums on their own mean by binomial expansion.
    fn central_moments(&self) -> Vec<f64> {
        let n = self.sums[0];
        let kmax = self.sums.len() - 1;
        let raw: Vec<f64> = self.sums.iter().map(|s| s / n).collect();
        let delta = if kmax >= 1 { raw[1] } else { 0.0 };
        (0..=kmax)
            .map(|k| {
                let mut acc = 0.0;
                let mut binom = 1.0;
                for j in 0..=k {
                    acc += binom * raw[j] * (-delta).powi((k - j) as i32);
                    binom = binom * (k - j) as f64 / (j + 1) as f64;
                }
                acc
            })
            .collect()
    }
}

/// Wick prediction for the `k`-th central moment of a Gaussian with variance `m2`.
pub fn gaussian_moment(k: usize, m2: f64) -> f64 {
    if k % 2 == 1 {
        0.0
    } else {
        double_factorial(k.saturating_sub(1)) * m2.powi((k / 2) as i32)
    }
}

fn double_factorial(n: usize) -> f64 {
    (1..=n).rev().step_by(2).map(|v| v as f64).product()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderResult {
    pub order: usize,
    pub moment: f64,
    pub gaussian: f64,
    pub std_error: f64,
    pub z: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentReport {
    pub n_samples: usize,
    pub blocks: usize,
    pub z_threshold: f64,
    pub m2: f64,
    pub orders: Vec<OrderResult>,
    pub pass: bool,
}

impl MomentReport {
    pub fn order(&self, k: usize) -> Option<&OrderResult> {
        self.orders.iter().find(|o| o.order == k)
    }
}

pub fn gaussianity_test(samples: &[f64], kmax: usize, z_threshold: f64) -> Result<MomentReport> {
    gaussianity_test_with_blocks(samples, kmax, z_threshold, DEFAULT_BLOCKS)
}

/// Per-order z-scores `(m_k − g_k)/se_k`, with `se_k` the delete-one-block jackknife
/// standard error of `m_k` over `blocks` contiguous blocks.
pub fn gaussianity_test_with_blocks(
    samples: &[f64],
    kmax: usize,
    z_threshold: f64,
    blocks: usize,
) -> Result<MomentReport> {
    check_input(samples, kmax)?;
    if blocks < 2 || blocks > samples.len() {
        return Err(Error::Range(format!(
            "jackknife needs between 2 and {} blocks, got {}",
            samples.len(),
            blocks
        )));
    }
    let n = samples.len();
    let shift = mean(samples);
    let block_sums: Vec<PowerSums> = (0..blocks)
        .map(|b| {
            let lo = b * n / blocks;
            let hi = (b + 1) * n / blocks;
            PowerSums::accumulate(&samples[lo..hi], shift, kmax)
        })
        .collect();
    let mut total = PowerSums {
        sums: vec![0.0; kmax + 1],
    };
    for bs in &block_sums {
        for (t, s) in total.sums.iter_mut().zip(&bs.sums) {
            *t += s;
        }
    }
    let full = total.central_moments();
    let leave_out: Vec<Vec<f64>> = block_sums
        .iter()
        .map(|bs| total.minus(bs).central_moments())
        .collect();

    let m2 = if kmax >= 2 {
        full[2]
    } else {
        central_moments(samples, 2)?[2]
    };
    let b = blocks as f64;
    let orders: Vec<OrderResult> = (3..=kmax)
        .map(|k| {
            let jk_mean = leave_out.iter().map(|m| m[k]).sum::<f64>() / b;
            let var = (b - 1.0) / b * leave_out.iter().map(|m| (m[k] - jk_mean).powi(2)).sum::<f64>();
            let se = var.sqrt();
            let g = gaussian_moment(k, m2);
            let diff = full[k] - g;
            let z = if se > 0.0 {
                diff / se
            } else if diff == 0.0 {
                0.0
            } else {
                diff.signum() * f64::INFINITY
            };
            OrderResult {
                order: k,
                moment: full[k],
                gaussian: g,
                std_error: se,
                z,
                pass: z.abs() < z_threshold,
            }
        })
        .collect();
    let pass = orders.iter().all(|o| o.pass);
    Ok(MomentReport {
        n_samples: n,
        blocks,
        z_threshold,
        m2,
        orders,
        pass,
    })
}
