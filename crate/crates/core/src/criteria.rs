//! Entanglement decisions: partial transposition, per-mode PPT tests, the
//! three van Loock–Furusawa inequalities and the tripartite classification.

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::gaussian::{
    combination_variance, covariance_of, p_index, q_index, symplectic_eigenvalues, CovarianceMatrix,
    QuadCombination, SymplecticSpectrum,
};

/// Values closer than this to a bound count as not violating it.
pub const DECISION_TOL: f64 = 1e-9;

/// Bound of each van Loock–Furusawa inequality in SQL units.
pub const VLF_BOUND: f64 = 2.0;

/// Which α symbol each inequality carries: `V0 ↔ α0`, `V1 ↔ α2`, `V2 ↔ α1`.
pub const VLF_ALPHA_SYMBOL: [usize; 3] = [0, 2, 1];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PptResult {
    #[serde(rename = "mode")]
    pub transposed_mode: usize,
    pub nu_min: f64,
    pub spectrum: SymplecticSpectrum,
    pub npt: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VlfResult {
    pub v: [f64; 3],
    /// Minimizing α for each inequality, in inequality order (see [`VLF_ALPHA_SYMBOL`]).
    pub alpha: [f64; 3],
    pub violated: [bool; 3],
}

impl VlfResult {
    pub fn violation_count(&self) -> usize {
        self.violated.iter().filter(|&&v| v).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TripartiteClass {
    FullyInseparable,
    /// Exactly this mode is separable from the other two.
    PartiallySeparableOneMode(usize),
    TwoModesPpt,
    AllPpt,
}

impl TripartiteClass {
    pub fn from_npt_flags(npt: [bool; 3]) -> Self {
        let ppt: Vec<usize> = (0..3).filter(|&k| !npt[k]).collect();
        match ppt.len() {
            0 => TripartiteClass::FullyInseparable,
            1 => TripartiteClass::PartiallySeparableOneMode(ppt[0]),
            2 => TripartiteClass::TwoModesPpt,
            _ => TripartiteClass::AllPpt,
        }
    }

    pub fn label(&self) -> String {
        match self {
            TripartiteClass::FullyInseparable => "fully_inseparable".into(),
            TripartiteClass::PartiallySeparableOneMode(k) => format!("partial:{}", k),
            TripartiteClass::TwoModesPpt => "two_modes_ppt".into(),
            TripartiteClass::AllPpt => "all_ppt".into(),
        }
    }
}

impl Serialize for TripartiteClass {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassReport {
    pub npt_flags: [bool; 3],
    #[serde(rename = "class")]
    pub klass: TripartiteClass,
    /// Set when every cut is PPT: the pattern cannot exclude bound entanglement.
    pub ppt_pattern_only: bool,
    pub ppt: Vec<PptResult>,
}

/// `ΛσΛ` with `Λ` flipping the sign of the phase quadrature of `mode`.
pub fn partial_transpose(cm: &CovarianceMatrix, mode: usize) -> Result<CovarianceMatrix> {
    cm.check_mode(mode)?;
    let flip = q_index(mode);
    let mut m = cm.entries().clone();
    for k in 0..cm.dim() {
        if k != flip {
            m[(flip, k)] = -m[(flip, k)];
            m[(k, flip)] = -m[(k, flip)];
        }
    }
    CovarianceMatrix::new(m)
}

pub fn ppt_test(cm: &CovarianceMatrix, mode: usize) -> Result<PptResult> {
    let transposed = partial_transpose(cm, mode)?;
    let spectrum = symplectic_eigenvalues(&transposed)?;
    Ok(ppt_from_spectrum(mode, spectrum))
}

pub(crate) fn ppt_from_spectrum(mode: usize, spectrum: SymplecticSpectrum) -> PptResult {
    let nu_min = spectrum.min();
    PptResult {
        transposed_mode: mode,
        nu_min,
        spectrum,
        npt: nu_min < 1.0 - DECISION_TOL,
    }
}

/// PPT test across every `(mode | rest)` cut.
pub fn ppt_all(cm: &CovarianceMatrix) -> Result<Vec<PptResult>> {
    (0..cm.n_modes()).map(|k| ppt_test(cm, k)).collect()
}

fn require_three_modes(cm: &CovarianceMatrix) -> Result<()> {
    if cm.n_modes() != 3 {
        return Err(Error::Arity {
            expected: 3,
            got: cm.n_modes(),
        });
    }
    Ok(())
}

/// One inequality: `½Δ²(a) + ½ min_β Δ²(b − β x)` with `a`, `b` integer-coefficient
/// forms and `x` the single quadrature carrying the free parameter.
///
/// Keeping the `1/√2` outside the forms makes the vacuum value exactly 2. The
/// returned α is `β/√2`, the parameter multiplying `x` inside the `1/√2`-normalized
/// combination.
fn vlf_term(
    cm: &CovarianceMatrix,
    a: &QuadCombination,
    b: &QuadCombination,
    x: &QuadCombination,
) -> Result<(f64, f64)> {
    let var_a = combination_variance(cm, a)?;
    let var_x = combination_variance(cm, x)?;
    let beta = if var_x == 0.0 {
        0.0
    } else {
        covariance_of(cm, b, x)? / var_x
    };
    let residual = QuadCombination::new(
        b.coeffs()
            .iter()
            .zip(x.coeffs())
            .map(|(bi, xi)| bi - beta * xi)
            .collect(),
    );
    let var_b = combination_variance(cm, &residual)?;
    Ok((0.5 * (var_a + var_b), beta * std::f64::consts::FRAC_1_SQRT_2))
}

/// Evaluates `V0, V1, V2` with each α at its closed-form minimum.
///
/// ```text
/// V0 = Δ²((p1 − p2)/√2) + Δ²((q1 + q2)/√2 − α0 q0)
/// V1 = Δ²((p0 + p1)/√2) + Δ²((q0 − q1)/√2 − α2 q2)
/// V2 = Δ²((p0 + p2)/√2) + Δ²((q0 − q2)/√2 − α1 q1)
/// ```
pub fn vlf_inequalities(cm: &CovarianceMatrix) -> Result<VlfResult> {
    require_three_modes(cm)?;
    let z = || QuadCombination::zeros(3);
    let (p0, p1, p2) = (p_index(0), p_index(1), p_index(2));
    let (q0, q1, q2) = (q_index(0), q_index(1), q_index(2));

    let terms = [
        (
            z().with(p1, 1.0).with(p2, -1.0),
            z().with(q1, 1.0).with(q2, 1.0),
            z().with(q0, 1.0),
        ),
        (
            z().with(p0, 1.0).with(p1, 1.0),
            z().with(q0, 1.0).with(q1, -1.0),
            z().with(q2, 1.0),
        ),
        (
            z().with(p0, 1.0).with(p2, 1.0),
            z().with(q0, 1.0).with(q2, -1.0),
            z().with(q1, 1.0),
        ),
    ];

    let mut v = [0.0; 3];
    let mut alpha = [0.0; 3];
    for (k, (a, b, x)) in terms.iter().enumerate() {
        let (value, a_star) = vlf_term(cm, a, b, x)?;
        v[k] = value;
        alpha[k] = a_star;
    }
    Ok(VlfResult {
        v,
        alpha,
        violated: v.map(|x| x < VLF_BOUND - DECISION_TOL),
    })
}

/// Evaluates one inequality at a caller-chosen α, for cross-checks of the optimum.
pub fn vlf_at_alpha(cm: &CovarianceMatrix, which: usize, alpha: f64) -> Result<f64> {
    require_three_modes(cm)?;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let z = || QuadCombination::zeros(3);
    let (p0, p1, p2) = (p_index(0), p_index(1), p_index(2));
    let (q0, q1, q2) = (q_index(0), q_index(1), q_index(2));
    let (a, b) = match which {
        0 => (
            z().with(p1, h).with(p2, -h),
            z().with(q1, h).with(q2, h).with(q0, -alpha),
        ),
        1 => (
            z().with(p0, h).with(p1, h),
            z().with(q0, h).with(q1, -h).with(q2, -alpha),
        ),
        2 => (
            z().with(p0, h).with(p2, h),
            z().with(q0, h).with(q2, -h).with(q1, -alpha),
        ),
        _ => {
            return Err(Error::ModeIndex {
                mode: which,
                n_modes: 3,
            })
        }
    };
    Ok(combination_variance(cm, &a)? + combination_variance(cm, &b)?)
}

pub fn classify_tripartite(cm: &CovarianceMatrix) -> Result<ClassReport> {
    require_three_modes(cm)?;
    let ppt = ppt_all(cm)?;
    let npt_flags = [ppt[0].npt, ppt[1].npt, ppt[2].npt];
    let klass = TripartiteClass::from_npt_flags(npt_flags);
    Ok(ClassReport {
        npt_flags,
        klass,
        ppt_pattern_only: klass == TripartiteClass::AllPpt,
        ppt,
    })
}
