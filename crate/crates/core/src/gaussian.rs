//! Covariance-matrix data model for Gaussian states and the symplectic spectrum.
//!
//! Quadratures are interleaved per mode: row/column `2i` is the amplitude
//! quadrature `p_i` and `2i + 1` the phase quadrature `q_i`. Mode 0 is the pump
//! by convention. Everything is normalized so the vacuum covariance matrix is
//! the identity.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Physicality tolerance on the smallest symplectic eigenvalue.
pub const PHYSICAL_TOL: f64 = 1e-9;

/// Relative tolerance for the symmetry check.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Relative tolerance used when pairing the doubly degenerate eigenvalues of `M Mᵀ`.
pub const PAIRING_TOL: f64 = 1e-7;

/// Index of the amplitude quadrature `p` of `mode`.
pub fn p_index(mode: usize) -> usize {
    2 * mode
}

/// Index of the phase quadrature `q` of `mode`.
pub fn q_index(mode: usize) -> usize {
    2 * mode + 1
}

/// A 2N×2N quadrature covariance matrix in SQL units.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    n_modes: usize,
    entries: DMatrix<f64>,
}

impl CovarianceMatrix {
    /// Wraps a matrix after checking it is square, of even nonzero size and finite.
    ///
    /// Symmetry and positivity are not enforced here; see [`validate_covariance`].
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = entries.shape();
        if rows != cols {
            return Err(Error::Dimension(format!(
                "covariance matrix must be square, got {}x{}",
                rows, cols
            )));
        }
        if rows == 0 || rows % 2 != 0 {
            return Err(Error::Dimension(format!(
                "covariance matrix size must be even and nonzero, got {}",
                rows
            )));
        }
        for j in 0..cols {
            for i in 0..rows {
                if !entries[(i, j)].is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(Self {
            n_modes: rows / 2,
            entries,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::Dimension(format!(
                "row {} has {} entries, expected {}",
                i,
                r.len(),
                n
            )));
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    /// Vacuum state of `n_modes` modes (the identity).
    pub fn identity(n_modes: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::Dimension("a state needs at least one mode".into()));
        }
        Self::new(DMatrix::identity(2 * n_modes, 2 * n_modes))
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn dim(&self) -> usize {
        2 * self.n_modes
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<f64> {
        self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[(row, col)]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.entries[(i, j)]).collect())
            .collect()
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.dim();
        for i in 0..n {
            for j in (i + 1)..n {
                let a = self.entries[(i, j)];
                let b = self.entries[(j, i)];
                if (a - b).abs() > SYMMETRY_TOL * a.abs().max(1.0) {
                    return false;
                }
            }
        }
        true
    }

    pub fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.n_modes {
            return Err(Error::ModeIndex {
                mode,
                n_modes: self.n_modes,
            });
        }
        Ok(())
    }
}

/// Descriptive metadata about a state. Never read by the numerics.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StateMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_pump: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none", rename = "temperature_C")]
    pub temperature_c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none", rename = "analysis_frequency_MHz")]
    pub analysis_frequency_mhz: Option<f64>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub label: String,
}

impl StateMeta {
    pub fn validate(&self) -> Result<()> {
        if let Some(s) = self.sigma_pump {
            if !(s > 0.0) || !s.is_finite() {
                return Err(Error::Input(format!(
                    "meta.sigma_pump must be positive, got {}",
                    s
                )));
            }
        }
        Ok(())
    }
}

/// Symplectic eigenvalues, one per mode, sorted ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SymplecticSpectrum {
    values: Vec<f64>,
}

impl SymplecticSpectrum {
    pub fn from_unsorted(mut values: Vec<f64>) -> Self {
        values.sort_by(f64::total_cmp);
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Coefficients of a linear form `u = Σ c_a x_a` over the ordered quadratures.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadCombination {
    coeffs: Vec<f64>,
}

impl QuadCombination {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn zeros(n_modes: usize) -> Self {
        Self {
            coeffs: vec![0.0; 2 * n_modes],
        }
    }

    /// Adds `c` to the coefficient of quadrature index `idx`.
    pub fn with(mut self, idx: usize, c: f64) -> Self {
        self.coeffs[idx] += c;
        self
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidationReport {
    pub symmetric: bool,
    pub positive_definite: bool,
    pub physical: bool,
    pub nu_min: f64,
}

/// Block-diagonal symplectic form with 2×2 blocks `[[0, 1], [-1, 0]]`.
pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    omega
}

/// Flags symmetry, positive definiteness and physicality without rejecting the input.
///
/// `nu_min` comes from the Cholesky/Jacobi path when the matrix is positive
/// definite, otherwise from the direct eigenvalues of `iΩσ`.
pub fn validate_covariance(cm: &CovarianceMatrix) -> Result<ValidationReport> {
    let symmetric = cm.is_symmetric();
    let sym = symmetrized(cm.entries());
    let positive_definite = linalg::cholesky(&sym).is_ok();
    let nu_min = if positive_definite {
        spectrum_via_cholesky(&sym, cm.n_modes())
            .or_else(|_| spectrum_direct(&sym))?
            .min()
    } else {
        spectrum_direct(&sym)?.min()
    };
    Ok(ValidationReport {
        symmetric,
        positive_definite,
        physical: positive_definite && nu_min >= 1.0 - PHYSICAL_TOL,
        nu_min,
    })
}

/// Symplectic eigenvalues via `σ = LLᵀ`, `M = LᵀΩL`, and a Jacobi solve of `MMᵀ`.
pub fn symplectic_eigenvalues(cm: &CovarianceMatrix) -> Result<SymplecticSpectrum> {
    spectrum_via_cholesky(cm.entries(), cm.n_modes())
}

/// Symplectic eigenvalues as the moduli of the eigenvalues of `iΩσ`, from a general
/// nonsymmetric eigensolver. Works for any real input, including indefinite ones.
pub fn symplectic_eigenvalues_direct(cm: &CovarianceMatrix) -> Result<SymplecticSpectrum> {
    spectrum_direct(cm.entries())
}

/// Variance `uᵀσu` of a linear combination of quadratures.
pub fn combination_variance(cm: &CovarianceMatrix, u: &QuadCombination) -> Result<f64> {
    covariance_of(cm, u, u)
}

/// Covariance `uᵀσw` between two linear combinations.
pub fn covariance_of(cm: &CovarianceMatrix, u: &QuadCombination, w: &QuadCombination) -> Result<f64> {
    let n = cm.dim();
    for c in [u, w] {
        if c.coeffs.len() != n {
            return Err(Error::Dimension(format!(
                "combination has {} coefficients, state has {} quadratures",
                c.coeffs.len(),
                n
            )));
        }
    }
    let mut total = 0.0;
    for (a, &ua) in u.coeffs.iter().enumerate() {
        if ua == 0.0 {
            continue;
        }
        for (b, &wb) in w.coeffs.iter().enumerate() {
            if wb != 0.0 {
                total += ua * cm.entries[(a, b)] * wb;
            }
        }
    }
    Ok(total)
}

fn symmetrized(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn spectrum_via_cholesky(sigma: &DMatrix<f64>, n_modes: usize) -> Result<SymplecticSpectrum> {
    let l = linalg::cholesky(sigma)?;
    let omega = symplectic_form(n_modes);
    let m = l.transpose() * omega * &l;
    let mmt = &m * m.transpose();
    let mmt = symmetrized(&mmt);
    let squares = linalg::symmetric_eigenvalues(&mmt)?;

    let mut values = Vec::with_capacity(n_modes);
    for pair in squares.chunks_exact(2) {
        let (a, b) = (pair[0].max(0.0), pair[1].max(0.0));
        if (a - b).abs() > PAIRING_TOL * b.max(f64::MIN_POSITIVE) {
            return Err(Error::Numerical(format!(
                "eigenvalues of MMᵀ not pairwise degenerate: {:e} vs {:e}",
                a, b
            )));
        }
        values.push((0.5 * (a + b)).sqrt());
    }
    Ok(SymplecticSpectrum::from_unsorted(values))
}

fn spectrum_direct(sigma: &DMatrix<f64>) -> Result<SymplecticSpectrum> {
    let n_modes = sigma.nrows() / 2;
    let omega_sigma = symplectic_form(n_modes) * sigma;
    let eig = omega_sigma.complex_eigenvalues();
    let mut moduli: Vec<f64> = eig.iter().map(|z| z.norm()).collect();
    if moduli.iter().any(|m| !m.is_finite()) {
        return Err(Error::Numerical("direct eigensolve produced non-finite values".into()));
    }
    moduli.sort_by(f64::total_cmp);
    let values = moduli
        .chunks_exact(2)
        .map(|pair| 0.5 * (pair[0] + pair[1]))
        .collect();
    Ok(SymplecticSpectrum::from_unsorted(values))
}

/// Congruence `S σ Sᵀ`.
pub fn congruence(cm: &CovarianceMatrix, s: &DMatrix<f64>) -> Result<CovarianceMatrix> {
    if s.nrows() != cm.dim() || s.ncols() != cm.dim() {
        return Err(Error::Dimension(format!(
            "transformation is {}x{}, state is {}x{}",
            s.nrows(),
            s.ncols(),
            cm.dim(),
            cm.dim()
        )));
    }
    CovarianceMatrix::new(symmetrized(&(s * cm.entries() * s.transpose())))
}

/// Unit coefficient vector selecting quadrature `idx`.
pub fn basis(n_modes: usize, idx: usize) -> QuadCombination {
    QuadCombination::zeros(n_modes).with(idx, 1.0)
}
