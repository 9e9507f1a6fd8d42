//! Linear loss (vacuum-admixing beamsplitter) on covariance matrices, loss sweeps,
//! and the finite-loss disentanglement threshold.

use rayon::prelude::*;
use serde::Serialize;

use crate::criteria::ppt_test;
use crate::error::{Error, Result};
use crate::gaussian::CovarianceMatrix;

/// Points in the pre-scan that brackets the threshold.
pub const THRESHOLD_PRESCAN_POINTS: usize = 64;

/// Bisection stops once the bracket is narrower than this.
pub const THRESHOLD_TOL: f64 = 1e-6;

/// Intensity transmittance per mode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LossProfile {
    transmittance: Vec<f64>,
}

impl LossProfile {
    pub fn new(transmittance: Vec<f64>) -> Result<Self> {
        if let Some((i, t)) = transmittance
            .iter()
            .enumerate()
            .find(|(_, t)| !(0.0..=1.0).contains(*t))
        {
            return Err(Error::Range(format!(
                "transmittance of mode {} must lie in [0, 1], got {}",
                i, t
            )));
        }
        Ok(Self { transmittance })
    }

    /// Transmittance `t` on `lossy_modes`, 1 elsewhere.
    pub fn on_modes(n_modes: usize, lossy_modes: &[usize], t: f64) -> Result<Self> {
        let mut tr = vec![1.0; n_modes];
        for &m in lossy_modes {
            if m >= n_modes {
                return Err(Error::ModeIndex { mode: m, n_modes });
            }
            tr[m] = t;
        }
        Self::new(tr)
    }

    pub fn transmittance(&self) -> &[f64] {
        &self.transmittance
    }
}

/// `σ' = XσXᵀ + (I − X²)` with `X = diag(√T_i)` on both quadratures of each mode.
pub fn apply_loss(cm: &CovarianceMatrix, profile: &LossProfile) -> Result<CovarianceMatrix> {
    let n = cm.n_modes();
    if profile.transmittance.len() != n {
        return Err(Error::Dimension(format!(
            "loss profile has {} entries, state has {} modes",
            profile.transmittance.len(),
            n
        )));
    }
    let amp: Vec<f64> = profile.transmittance.iter().map(|t| t.sqrt()).collect();
    let mut m = cm.entries().clone();
    for a in 0..cm.dim() {
        for b in 0..cm.dim() {
            let (i, j) = (a / 2, b / 2);
            m[(a, b)] = if i == j {
                // diagonal block: affine in T
                let t = profile.transmittance[i];
                let vac = if a == b { 1.0 - t } else { 0.0 };
                t * m[(a, b)] + vac
            } else {
                amp[i] * amp[j] * m[(a, b)]
            };
        }
    }
    CovarianceMatrix::new(m)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCurve {
    pub grid: Vec<f64>,
    /// For each grid point, `ν̃_min` after transposing each mode in turn.
    pub nu_min_per_mode: Vec<Vec<f64>>,
}

impl SweepCurve {
    /// CSV with header `T,nu0,nu1,...`, values at 9 significant digits.
    pub fn to_csv(&self) -> String {
        let n = self.nu_min_per_mode.first().map_or(0, Vec::len);
        let mut out = String::from("T");
        for k in 0..n {
            out.push_str(&format!(",nu{}", k));
        }
        out.push('\n');
        for (t, row) in self.grid.iter().zip(&self.nu_min_per_mode) {
            out.push_str(&sig9(*t));
            for v in row {
                out.push(',');
                out.push_str(&sig9(*v));
            }
            out.push('\n');
        }
        out
    }
}

fn sig9(x: f64) -> String {
    format!("{:.8e}", x)
}

/// Smallest symplectic eigenvalue after transposing `transposed_mode`, with equal
/// transmittance `t` on every mode in `lossy_modes`.
pub fn nu_after_loss(
    cm: &CovarianceMatrix,
    transposed_mode: usize,
    lossy_modes: &[usize],
    t: f64,
) -> Result<f64> {
    let profile = LossProfile::on_modes(cm.n_modes(), lossy_modes, t)?;
    Ok(ppt_test(&apply_loss(cm, &profile)?, transposed_mode)?.nu_min)
}

/// Applies equal loss to `lossy_modes` at every grid point and records `ν̃_min` for
/// every transposed mode. Grid points run in parallel; results keep grid order.
pub fn loss_sweep(cm: &CovarianceMatrix, lossy_modes: &[usize], grid: &[f64]) -> Result<SweepCurve> {
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Range("sweep grid must be strictly increasing".into()));
    }
    let rows: Result<Vec<Vec<f64>>> = grid
        .par_iter()
        .map(|&t| {
            let profile = LossProfile::on_modes(cm.n_modes(), lossy_modes, t)?;
            let lossy = apply_loss(cm, &profile)?;
            (0..cm.n_modes())
                .map(|k| ppt_test(&lossy, k).map(|r| r.nu_min))
                .collect()
        })
        .collect();
    Ok(SweepCurve {
        grid: grid.to_vec(),
        nu_min_per_mode: rows?,
    })
}

/// `n` equally spaced transmittances from 0 to 1 inclusive.
pub fn uniform_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![1.0],
        _ => (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Threshold {
    /// Largest transmittance at which the cut becomes separable, if any.
    pub t_star: Option<f64>,
    /// The cut was already PPT without loss; `t_star` is then 1.
    pub separable_without_loss: bool,
    pub nu_at_full_transmission: f64,
}

/// Largest `T* ∈ (0, 1)` where `ν̃_min(T*) = 1`.
///
/// A 64-point pre-scan over `(0, 1]` locates the largest grid point at which the cut
/// is separable; bisection then narrows the bracket to [`THRESHOLD_TOL`]. Returns
/// `t_star = None` when the pre-scan stays entangled all the way down.
pub fn disentanglement_threshold(
    cm: &CovarianceMatrix,
    transposed_mode: usize,
    lossy_modes: &[usize],
) -> Result<Threshold> {
    cm.check_mode(transposed_mode)?;
    let nu = |t: f64| nu_after_loss(cm, transposed_mode, lossy_modes, t);
    let nu_full = nu(1.0)?;
    if nu_full >= 1.0 {
        return Ok(Threshold {
            t_star: Some(1.0),
            separable_without_loss: true,
            nu_at_full_transmission: nu_full,
        });
    }

    let steps = THRESHOLD_PRESCAN_POINTS;
    let mut bracket = None;
    for j in (1..steps).rev() {
        let t = j as f64 / steps as f64;
        if nu(t)? >= 1.0 {
            bracket = Some((t, (j + 1) as f64 / steps as f64));
            break;
        }
    }
    let Some((mut lo, mut hi)) = bracket else {
        return Ok(Threshold {
            t_star: None,
            separable_without_loss: false,
            nu_at_full_transmission: nu_full,
        });
    };

    // invariant: nu(lo) >= 1 > nu(hi)
    while hi - lo >= THRESHOLD_TOL {
        let mid = 0.5 * (lo + hi);
        if nu(mid)? >= 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Threshold {
        t_star: Some(0.5 * (lo + hi)),
        separable_without_loss: false,
        nu_at_full_transmission: nu_full,
    })
}
