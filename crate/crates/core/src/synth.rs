//! Synthetic Gaussian states used as fixtures: vacuum, thermal, two-mode squeezed
//! vacuum, and a three-mode pump/twin family built from symplectic operations.
//!
//! None of these model a physical OPO; they are stand-ins with the same
//! qualitative correlation pattern (twins: correlated `p`, anticorrelated `q`;
//! pump: `p` anticorrelated and `q` correlated with the twin sum).

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{congruence, validate_covariance, CovarianceMatrix};

/// Symplectic matrices acting on `n_modes` modes in the interleaved `p,q` ordering.
pub mod ops {
    use nalgebra::DMatrix;

    /// Phase-insensitive mixing of modes `i` and `j`:
    /// `a_i → cos θ a_i + sin θ a_j`, `a_j → −sin θ a_i + cos θ a_j`.
    pub fn beamsplitter(n_modes: usize, i: usize, j: usize, theta: f64) -> DMatrix<f64> {
        let (c, s) = (theta.cos(), theta.sin());
        let mut m = DMatrix::identity(2 * n_modes, 2 * n_modes);
        for k in 0..2 {
            m[(2 * i + k, 2 * i + k)] = c;
            m[(2 * i + k, 2 * j + k)] = s;
            m[(2 * j + k, 2 * i + k)] = -s;
            m[(2 * j + k, 2 * j + k)] = c;
        }
        m
    }

    /// Two-mode squeezer whose off-diagonal block is `sign · sinh r · diag(1, −1)`.
    ///
    /// With `sign = +1` the pair ends up with correlated `p` and anticorrelated `q`.
    pub fn two_mode_squeezer(n_modes: usize, i: usize, j: usize, r: f64, sign: f64) -> DMatrix<f64> {
        let (c, s) = (r.cosh(), sign * r.sinh());
        let mut m = DMatrix::identity(2 * n_modes, 2 * n_modes);
        for (k, z) in [(0, 1.0), (1, -1.0)] {
            m[(2 * i + k, 2 * i + k)] = c;
            m[(2 * j + k, 2 * j + k)] = c;
            m[(2 * i + k, 2 * j + k)] = s * z;
            m[(2 * j + k, 2 * i + k)] = s * z;
        }
        m
    }

    /// Single-mode squeezer: `p → e^{−r} p`, `q → e^{r} q`.
    pub fn single_mode_squeezer(n_modes: usize, i: usize, r: f64) -> DMatrix<f64> {
        let mut m = DMatrix::identity(2 * n_modes, 2 * n_modes);
        m[(2 * i, 2 * i)] = (-r).exp();
        m[(2 * i + 1, 2 * i + 1)] = r.exp();
        m
    }

    /// Phase-space rotation of one mode by `phi`.
    pub fn phase_rotation(n_modes: usize, i: usize, phi: f64) -> DMatrix<f64> {
        let (c, s) = (phi.cos(), phi.sin());
        let mut m = DMatrix::identity(2 * n_modes, 2 * n_modes);
        m[(2 * i, 2 * i)] = c;
        m[(2 * i, 2 * i + 1)] = s;
        m[(2 * i + 1, 2 * i)] = -s;
        m[(2 * i + 1, 2 * i + 1)] = c;
        m
    }
}

/// Parameters of the three-mode pump/twin fixture family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TripletParams {
    /// Two-mode squeezing between the twins (modes 1 and 2).
    pub r_twin: f64,
    /// Squeezing between the pump and the twin-sum mode.
    pub r_pump: f64,
    /// Added thermal noise per mode, SQL units.
    pub n_th: [f64; 3],
    /// Offset of the twin mixing angle from 50:50, radians.
    pub asymmetry: f64,
}

impl TripletParams {
    pub fn new(r_twin: f64, r_pump: f64) -> Self {
        Self {
            r_twin,
            r_pump,
            n_th: [0.0; 3],
            asymmetry: 0.0,
        }
    }

    pub fn with_noise(mut self, n_th: [f64; 3]) -> Self {
        self.n_th = n_th;
        self
    }

    pub fn with_asymmetry(mut self, asymmetry: f64) -> Self {
        self.asymmetry = asymmetry;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.r_twin, self.r_pump, self.asymmetry]
            .iter()
            .chain(self.n_th.iter())
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::Range("triplet parameters must be finite".into()));
        }
        if self.r_twin < 0.0 || self.r_pump < 0.0 {
            return Err(Error::Range(format!(
                "squeezing parameters must be nonnegative, got r_twin={}, r_pump={}",
                self.r_twin, self.r_pump
            )));
        }
        if let Some(n) = self.n_th.iter().find(|&&n| n < 0.0) {
            return Err(Error::Range(format!("n_th must be nonnegative, got {}", n)));
        }
        Ok(())
    }
}

/// Sudden-death fixture: the pump separates from lossy twins at an interior transmittance.
pub const SUDDEN_DEATH_FIXTURE: TripletParams = TripletParams {
    r_twin: 0.8,
    r_pump: 0.1,
    n_th: [0.1, 0.0, 0.0],
    asymmetry: 0.0,
};

/// Robust fixture: all three bipartitions stay entangled down to total loss of the twins.
pub const ROBUST_FIXTURE: TripletParams = TripletParams {
    r_twin: 0.8,
    r_pump: 0.3,
    n_th: [0.1, 0.0, 0.0],
    asymmetry: 0.0,
};

pub fn vacuum(n: usize) -> Result<CovarianceMatrix> {
    CovarianceMatrix::identity(n)
}

/// Thermal state `v·I` on `n` modes; `v ≥ 1`.
pub fn thermal(n: usize, v: f64) -> Result<CovarianceMatrix> {
    if n == 0 {
        return Err(Error::Dimension("a state needs at least one mode".into()));
    }
    if !(v >= 1.0) || !v.is_finite() {
        return Err(Error::Range(format!(
            "thermal variance must be at least 1, got {}",
            v
        )));
    }
    CovarianceMatrix::new(DMatrix::identity(2 * n, 2 * n) * v)
}

/// Two-mode squeezed vacuum: diagonal blocks `cosh 2r · I`, off-diagonal blocks
/// `sinh 2r · diag(1, −1)`.
pub fn two_mode_squeezed(r: f64) -> Result<CovarianceMatrix> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::Range(format!(
            "squeezing must be nonnegative, got {}",
            r
        )));
    }
    let (c, s) = ((2.0 * r).cosh(), (2.0 * r).sinh());
    let mut m = DMatrix::identity(4, 4) * c;
    m[(0, 2)] = s;
    m[(2, 0)] = s;
    m[(1, 3)] = -s;
    m[(3, 1)] = -s;
    CovarianceMatrix::new(m)
}

/// Three-mode pump/twin state.
///
/// Starting from vacuum: two-mode squeeze the twins, rotate them into sum and
/// difference modes, two-mode squeeze the pump with the sum mode (pump `p`
/// anticorrelated, `q` correlated), rotate back, then add thermal noise.
pub fn pump_twin_triplet(params: &TripletParams) -> Result<CovarianceMatrix> {
    params.validate()?;
    let theta = std::f64::consts::FRAC_PI_4 + params.asymmetry;
    let mut state = vacuum(3)?;
    state = congruence(&state, &ops::two_mode_squeezer(3, 1, 2, params.r_twin, 1.0))?;
    if params.r_pump != 0.0 {
        let mix = ops::beamsplitter(3, 1, 2, theta);
        state = congruence(&state, &mix)?;
        state = congruence(&state, &ops::two_mode_squeezer(3, 0, 1, params.r_pump, -1.0))?;
        state = congruence(&state, &mix.transpose())?;
    }
    let mut m = state.into_entries();
    for (k, n) in params.n_th.iter().enumerate() {
        m[(2 * k, 2 * k)] += n;
        m[(2 * k + 1, 2 * k + 1)] += n;
    }
    let cm = CovarianceMatrix::new(m)?;
    let report = validate_covariance(&cm)?;
    if !report.physical {
        return Err(Error::Numerical(format!(
            "triplet construction produced an unphysical state (nu_min = {})",
            report.nu_min
        )));
    }
    Ok(cm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{symplectic_eigenvalues, symplectic_form};

    fn is_symplectic(s: &DMatrix<f64>, n: usize) -> bool {
        let omega = symplectic_form(n);
        (s * &omega * s.transpose() - omega).abs().max() < 1e-12
    }

    #[test]
    fn generators_are_symplectic() {
        assert!(is_symplectic(&ops::beamsplitter(3, 0, 2, 0.37), 3));
        assert!(is_symplectic(&ops::two_mode_squeezer(3, 1, 2, 0.4, 1.0), 3));
        assert!(is_symplectic(&ops::two_mode_squeezer(3, 0, 1, 0.4, -1.0), 3));
        assert!(is_symplectic(&ops::single_mode_squeezer(2, 1, -0.8), 2));
        assert!(is_symplectic(&ops::phase_rotation(2, 0, 1.1), 2));
    }

    #[test]
    fn vacuum_shapes() {
        assert_eq!(vacuum(1).unwrap().entries(), &DMatrix::identity(2, 2));
        assert_eq!(vacuum(3).unwrap().entries(), &DMatrix::identity(6, 6));
        assert!(vacuum(0).is_err());
        let spec = symplectic_eigenvalues(&vacuum(4).unwrap()).unwrap();
        assert!(spec.values().iter().all(|&v| (v - 1.0).abs() < 1e-14));
    }

    #[test]
    fn tmsv_matches_squeezer_on_vacuum() {
        let direct = two_mode_squeezed(0.5).unwrap();
        let built = congruence(&vacuum(2).unwrap(), &ops::two_mode_squeezer(2, 0, 1, 0.5, 1.0)).unwrap();
        assert!((direct.entries() - built.entries()).abs().max() < 1e-14);
        assert_eq!(two_mode_squeezed(0.0).unwrap().entries(), &DMatrix::identity(4, 4));
        assert!(two_mode_squeezed(-0.1).is_err());
    }

    #[test]
    fn triplet_without_pump_coupling_is_block_diagonal() {
        let cm = pump_twin_triplet(&TripletParams::new(0.7, 0.0).with_noise([0.2, 0.1, 0.3])).unwrap();
        for a in 0..2 {
            for b in 2..6 {
                assert_eq!(cm.get(a, b), 0.0);
                assert_eq!(cm.get(b, a), 0.0);
            }
        }
    }

    #[test]
    fn noiseless_triplet_is_pure() {
        for &(rt, rp) in &[(0.5, 0.3), (1.0, 0.6), (0.2, 0.9)] {
            let cm = pump_twin_triplet(&TripletParams::new(rt, rp)).unwrap();
            for v in symplectic_eigenvalues(&cm).unwrap().values() {
                assert!((v - 1.0).abs() < 1e-9, "{} {} -> {}", rt, rp, v);
            }
        }
    }

    #[test]
    fn triplet_pump_sign_convention() {
        let cm = pump_twin_triplet(&TripletParams::new(0.5, 0.3)).unwrap();
        // pump amplitude anticorrelated with the twin sum, phase correlated
        assert!(cm.get(0, 2) + cm.get(0, 4) < 0.0);
        assert!(cm.get(1, 3) + cm.get(1, 5) > 0.0);
        // twins: correlated amplitude, anticorrelated phase
        assert!(cm.get(2, 4) > 0.0);
        assert!(cm.get(3, 5) < 0.0);
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(pump_twin_triplet(&TripletParams::new(-0.1, 0.0)).is_err());
        assert!(pump_twin_triplet(&TripletParams::new(0.1, 0.1).with_noise([0.0, -1.0, 0.0])).is_err());
        assert!(thermal(1, 0.5).is_err());
    }
}
