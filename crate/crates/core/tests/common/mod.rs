//! Shared test helpers: random physical states and independent oracles that do not
//! go through the library's Cholesky/Jacobi path.
#![allow(dead_code)]

use cvent::synth::{ops, TripletParams};
use cvent::CovarianceMatrix;
use nalgebra::{DMatrix, Matrix6};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random symplectic matrix built from a chain of elementary Gaussian operations.
pub fn random_symplectic(rng: &mut ChaCha8Rng, n: usize, max_squeeze: f64) -> DMatrix<f64> {
    let mut s = DMatrix::identity(2 * n, 2 * n);
    for _ in 0..(3 * n + 2) {
        let i = rng.random_range(0..n);
        let op = match rng.random_range(0..4) {
            0 => ops::phase_rotation(n, i, rng.random_range(0.0..std::f64::consts::TAU)),
            1 => ops::single_mode_squeezer(n, i, rng.random_range(-max_squeeze..max_squeeze)),
            2 if n > 1 => {
                let j = (i + rng.random_range(1..n)) % n;
                ops::beamsplitter(n, i, j, rng.random_range(0.0..std::f64::consts::PI))
            }
            3 if n > 1 => {
                let j = (i + rng.random_range(1..n)) % n;
                let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                ops::two_mode_squeezer(n, i, j, rng.random_range(0.0..max_squeeze), sign)
            }
            _ => ops::phase_rotation(n, i, rng.random_range(0.0..1.0)),
        };
        s = op * s;
    }
    s
}

/// `S · diag(ν) · Sᵀ` with random symplectic `S` and symplectic eigenvalues `ν ∈ [1, 3]`.
pub fn random_physical(rng: &mut ChaCha8Rng, n: usize, max_squeeze: f64) -> (CovarianceMatrix, Vec<f64>) {
    let nus: Vec<f64> = (0..n).map(|_| 1.0 + 2.0 * rng.random::<f64>()).collect();
    let d = DMatrix::from_fn(2 * n, 2 * n, |i, j| if i == j { nus[i / 2] } else { 0.0 });
    let s = random_symplectic(rng, n, max_squeeze);
    let m = &s * d * s.transpose();
    let m = (&m + m.transpose()) * 0.5;
    (CovarianceMatrix::new(m).unwrap(), nus)
}

/// Symplectic form built independently of the library.
pub fn omega(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        if i / 2 != j / 2 {
            0.0
        } else if i % 2 == 0 && j == i + 1 {
            1.0
        } else if i % 2 == 1 && j + 1 == i {
            -1.0
        } else {
            0.0
        }
    })
}

/// Moduli of the eigenvalues of `iΩσ` from a general eigensolver, one per pair.
pub fn oracle_spectrum(sigma: &DMatrix<f64>) -> Vec<f64> {
    let n = sigma.nrows() / 2;
    let eig = (omega(n) * sigma).complex_eigenvalues();
    let mut moduli: Vec<f64> = eig.iter().map(|z| z.norm()).collect();
    moduli.sort_by(f64::total_cmp);
    moduli.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect()
}

pub fn oracle_nu_min(sigma: &DMatrix<f64>) -> f64 {
    oracle_spectrum(sigma)[0]
}

/// `ΛσΛ` by explicit congruence.
pub fn oracle_transpose(sigma: &DMatrix<f64>, mode: usize) -> DMatrix<f64> {
    let mut lambda = DMatrix::identity(sigma.nrows(), sigma.ncols());
    lambda[(2 * mode + 1, 2 * mode + 1)] = -1.0;
    &lambda * sigma * &lambda
}

/// Loss by symplectic dilation: mix each mode with its own vacuum ancilla on a
/// beamsplitter of transmittance `T_i`, then discard the ancillas.
pub fn oracle_loss_dilation(sigma: &DMatrix<f64>, t: &[f64]) -> DMatrix<f64> {
    let n = sigma.nrows() / 2;
    let big = 4 * n;
    let mut joint = DMatrix::identity(big, big);
    joint.view_mut((0, 0), (2 * n, 2 * n)).copy_from(sigma);
    let mut s = DMatrix::identity(big, big);
    for (i, &ti) in t.iter().enumerate() {
        let (c, sn) = (ti.sqrt(), (1.0 - ti).sqrt());
        let a = n + i;
        for k in 0..2 {
            let (x, y) = (2 * i + k, 2 * a + k);
            s[(x, x)] = c;
            s[(x, y)] = sn;
            s[(y, x)] = -sn;
            s[(y, y)] = c;
        }
    }
    let out = &s * joint * s.transpose();
    out.view((0, 0), (2 * n, 2 * n)).into_owned()
}

/// Smallest symplectic eigenvalue of a 6×6 matrix from the characteristic
/// polynomial of `−(Ωσ)²`, whose roots are the squared symplectic eigenvalues.
pub fn oracle_nu_min_3mode(sigma: &Matrix6<f64>) -> f64 {
    let mut om = Matrix6::zeros();
    for k in 0..3 {
        om[(2 * k, 2 * k + 1)] = 1.0;
        om[(2 * k + 1, 2 * k)] = -1.0;
    }
    let a = om * sigma;
    let b = -(a * a);
    let b2 = b * b;
    let p1 = b.trace() / 2.0;
    let p2 = b2.trace() / 2.0;
    let p3 = (b2 * b).trace() / 2.0;
    let e1 = p1;
    let e2 = (e1 * p1 - p2) / 2.0;
    let e3 = (e2 * p1 - e1 * p2 + p3) / 3.0;
    // x³ − e1 x² + e2 x − e3, depressed with x = t + e1/3
    let p = e2 - e1 * e1 / 3.0;
    let q = -2.0 * e1.powi(3) / 27.0 + e1 * e2 / 3.0 - e3;
    let roots: Vec<f64> = if p.abs() < 1e-300 {
        vec![e1 / 3.0 - q.cbrt(); 3]
    } else {
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        (0..3)
            .map(|k| m * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos() + e1 / 3.0)
            .collect()
    };
    roots.into_iter().fold(f64::INFINITY, f64::min).max(0.0).sqrt()
}

/// Lossy, transposed 6×6 matrix computed directly from the definition.
pub fn oracle_lossy_transposed(sigma: &DMatrix<f64>, t: &[f64; 3], mode: usize) -> Matrix6<f64> {
    let mut m = Matrix6::zeros();
    for a in 0..6 {
        for b in 0..6 {
            let (i, j) = (a / 2, b / 2);
            let mut v = (t[i] * t[j]).sqrt() * sigma[(a, b)];
            if a == b {
                v += 1.0 - t[i];
            }
            let sign_a = if a == 2 * mode + 1 { -1.0 } else { 1.0 };
            let sign_b = if b == 2 * mode + 1 { -1.0 } else { 1.0 };
            m[(a, b)] = sign_a * sign_b * v;
        }
    }
    m
}

/// Largest point of an `n`-point uniform grid on `(0, 1)` where the cut is separable
/// (`ν̃ ≥ 1`), scanning downward from `T = 1`.
pub fn oracle_grid_threshold(sigma: &DMatrix<f64>, mode: usize, lossy: &[usize], n: usize) -> Option<f64> {
    for j in (1..n).rev() {
        let t_val = j as f64 / n as f64;
        let mut t = [1.0; 3];
        for &m in lossy {
            t[m] = t_val;
        }
        if oracle_nu_min_3mode(&oracle_lossy_transposed(sigma, &t, mode)) >= 1.0 {
            return Some(t_val);
        }
    }
    None
}

/// Mix of near-pure random states and noisy triplets, so both criteria fire often.
pub fn consistency_state(r: &mut ChaCha8Rng, i: usize) -> CovarianceMatrix {
    if i % 2 == 0 {
        let nus: Vec<f64> = (0..3).map(|_| 1.0 + 0.3 * r.random::<f64>()).collect();
        let d = DMatrix::from_fn(6, 6, |a, b| if a == b { nus[a / 2] } else { 0.0 });
        let s = random_symplectic(r, 3, 0.9);
        let m = &s * d * s.transpose();
        CovarianceMatrix::new((&m + m.transpose()) * 0.5).unwrap()
    } else {
        let p = TripletParams::new(r.random_range(0.0..1.2), r.random_range(0.0..0.8))
            .with_noise([r.random_range(0.0..0.5), r.random_range(0.0..0.5), r.random_range(0.0..0.5)])
            .with_asymmetry(r.random_range(-0.3..0.3));
        cvent::synth::pump_twin_triplet(&p).unwrap()
    }
}

const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

// (u, x) with V(α) = uᵀσu + ... expanded by hand: first term fixed, second term u_b − α x.
fn vlf_vectors(which: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut a = vec![0.0; 6];
    let mut b = vec![0.0; 6];
    let mut x = vec![0.0; 6];
    match which {
        0 => {
            a[2] = H;
            a[4] = -H;
            b[3] = H;
            b[5] = H;
            x[1] = 1.0;
        }
        1 => {
            a[0] = H;
            a[2] = H;
            b[1] = H;
            b[3] = -H;
            x[5] = 1.0;
        }
        _ => {
            a[0] = H;
            a[4] = H;
            b[1] = H;
            b[5] = -H;
            x[3] = 1.0;
        }
    }
    (a, b, x)
}

fn quad(sigma: &DMatrix<f64>, u: &[f64], w: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..6 {
        for j in 0..6 {
            s += u[i] * sigma[(i, j)] * w[j];
        }
    }
    s
}

/// Brute-force minimum over α ∈ [−10, 10] in steps of 1e−4.
pub fn oracle_vlf_grid_min(sigma: &DMatrix<f64>, which: usize) -> f64 {
    let (a, b, x) = vlf_vectors(which);
    let c0 = quad(sigma, &a, &a) + quad(sigma, &b, &b);
    let c1 = -2.0 * quad(sigma, &b, &x);
    let c2 = quad(sigma, &x, &x);
    (0..=200_000)
        .map(|i| {
            let alpha = -10.0 + i as f64 * 1e-4;
            c0 + c1 * alpha + c2 * alpha * alpha
        })
        .fold(f64::INFINITY, f64::min)
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}
