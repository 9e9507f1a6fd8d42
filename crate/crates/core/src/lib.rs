//! Entanglement analysis of multimode Gaussian continuous-variable states.
//!
//! States are quadrature covariance matrices in SQL units (vacuum = identity)
//! with interleaved `p, q` ordering. The crate provides:
//!
//! * [`gaussian`]: the covariance model, physicality checks and symplectic spectra;
//! * [`criteria`]: partial transposition, PPT tests, the van Loock–Furusawa
//!   inequalities and tripartite classification;
//! * [`channels`]: linear loss, loss sweeps and finite-loss disentanglement thresholds;
//! * [`uncertainty`]: Monte Carlo error bars for all criteria;
//! * [`gaussianity`]: moment-based Gaussianity checks of sample streams;
//! * [`synth`]: synthetic fixture states;
//! * [`cli`]: the `cvent` command-line front end.

pub mod channels;
pub mod cli;
pub mod criteria;
pub mod error;
pub mod gaussian;
pub mod gaussianity;
pub mod io;
pub mod linalg;
pub mod synth;
pub mod uncertainty;

pub use channels::{apply_loss, disentanglement_threshold, loss_sweep, LossProfile, SweepCurve, Threshold};
pub use criteria::{
    classify_tripartite, partial_transpose, ppt_test, vlf_inequalities, ClassReport, PptResult,
    TripartiteClass, VlfResult,
};
pub use error::{Error, Result};
pub use gaussian::{
    combination_variance, symplectic_eigenvalues, symplectic_eigenvalues_direct, validate_covariance,
    CovarianceMatrix, QuadCombination, StateMeta, SymplecticSpectrum, ValidationReport,
};
pub use gaussianity::{central_moments, gaussianity_test, MomentReport};
pub use synth::{pump_twin_triplet, two_mode_squeezed, vacuum, TripletParams};
pub use uncertainty::{monte_carlo, sample_covariance, ErrorModel, McReport};
