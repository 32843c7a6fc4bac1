//! Seeded random generators for test tuples.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{c64, max_eigenvalue, Mat, Vector, C64};
use crate::tuples::OperatorTuple;

pub type SeededRng = ChaCha8Rng;

/// Default gap between `‖Σ T_i T_i*‖^{1/2}` and 1 for sampled row contractions.
pub const DEFAULT_MARGIN: f64 = 0.05;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard complex Gaussian (`E|z|² = 1`).
pub fn gaussian(rng: &mut impl Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c64(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> Mat {
    Mat::from_fn(rows, cols, |_, _| gaussian(rng))
}

pub fn gaussian_vector(rng: &mut impl Rng, len: usize) -> Vector {
    Vector::from_fn(len, |_, _| gaussian(rng))
}

/// Scales `T` by `1/(‖row‖ + margin)` where `‖row‖ = ‖Σ T_i T_i*‖^{1/2}`.
pub fn into_row_contraction(t: &OperatorTuple, margin: f64) -> OperatorTuple {
    let row = max_eigenvalue(&t.row_gram()).max(0.0).sqrt();
    t.scaled(1.0 / (row + margin))
}

pub fn random_tuple(rng: &mut impl Rng, n: usize, dim: usize) -> OperatorTuple {
    OperatorTuple::new((0..n).map(|_| gaussian_matrix(rng, dim, dim)).collect()).expect("square")
}

pub fn random_row_contraction(rng: &mut impl Rng, n: usize, dim: usize, margin: f64) -> OperatorTuple {
    into_row_contraction(&random_tuple(rng, n, dim), margin)
}

fn polynomial(a: &Mat, coeffs: &[C64]) -> Mat {
    let d = a.nrows();
    let mut acc = Mat::zeros(d, d);
    for &c in coeffs.iter().rev() {
        acc = &acc * a + Mat::identity(d, d) * c;
    }
    acc
}

/// Commuting tuple `T_i = p_i(A)` for one random `A` and random quadratics `p_i`.
pub fn random_commuting(rng: &mut impl Rng, n: usize, dim: usize, margin: f64) -> OperatorTuple {
    let a = gaussian_matrix(rng, dim, dim);
    let matrices = (0..n)
        .map(|_| {
            let coeffs: Vec<C64> = (0..3).map(|_| gaussian(rng)).collect();
            polynomial(&a, &coeffs)
        })
        .collect();
    into_row_contraction(&OperatorTuple::new(matrices).expect("square"), margin)
}

/// Commuting tuple of polynomials without constant term in a strictly upper
/// triangular matrix, so that every word of length `dim` vanishes.
pub fn random_nilpotent_commuting(rng: &mut impl Rng, n: usize, dim: usize, margin: f64) -> OperatorTuple {
    let a = Mat::from_fn(dim, dim, |i, j| if j > i { gaussian(rng) } else { c64(0.0, 0.0) });
    let matrices = (0..n)
        .map(|_| {
            let mut coeffs: Vec<C64> = (0..dim.max(2)).map(|_| gaussian(rng)).collect();
            coeffs[0] = c64(0.0, 0.0);
            polynomial(&a, &coeffs)
        })
        .collect();
    into_row_contraction(&OperatorTuple::new(matrices).expect("square"), margin)
}

/// Uniform point on the unit sphere of ℂⁿ.
pub fn random_sphere_point(rng: &mut impl Rng, n: usize) -> Vec<C64> {
    let v = gaussian_vector(rng, n);
    let norm = v.norm();
    v.iter().map(|z| z / norm).collect()
}

/// Haar-distributed unitary from the QR factorization of a Gaussian matrix.
pub fn haar_unitary(rng: &mut impl Rng, dim: usize) -> Mat {
    let g = gaussian_matrix(rng, dim, dim);
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let mut u = q;
    for k in 0..dim {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c64(1.0, 0.0) };
        let col = u.column(k) * phase;
        u.set_column(k, &col);
    }
    u
}

/// `U diag(points) U*` in every coordinate.
pub fn spherical_from_points(points: &[Vec<C64>], u: &Mat) -> OperatorTuple {
    crate::tuples::diagonal_tuple(points)
        .expect("consistent points")
        .conjugate(u)
        .expect("square")
}

/// A spherical unitary with `dim` random joint eigenvalues and a Haar eigenbasis.
pub fn random_spherical_unitary(rng: &mut impl Rng, n: usize, dim: usize) -> (OperatorTuple, Vec<Vec<C64>>, Mat) {
    let points: Vec<Vec<C64>> = (0..dim).map(|_| random_sphere_point(rng, n)).collect();
    let u = haar_unitary(rng, dim);
    (spherical_from_points(&points, &u), points, u)
}

/// PSD block matrix `[[A, B*], [B, C]] = X* X` with `X` of random rank.
pub fn random_psd_blocks(rng: &mut impl Rng, a_dim: usize, c_dim: usize) -> (Mat, Mat, Mat) {
    let total = a_dim + c_dim;
    let rank = rng.random_range(0..=total);
    let mut x = gaussian_matrix(rng, rank, total);
    // Occasionally kill the A-block directions to exercise rank-deficient A.
    if a_dim > 0 && rng.random_bool(0.3) {
        let keep = rng.random_range(0..a_dim);
        for col in keep..a_dim {
            x.column_mut(col).fill(c64(0.0, 0.0));
        }
    }
    let m = x.ad_mul(&x);
    let a = m.view((0, 0), (a_dim, a_dim)).into_owned();
    let b = m.view((a_dim, 0), (c_dim, a_dim)).into_owned();
    let c = m.view((a_dim, a_dim), (c_dim, c_dim)).into_owned();
    (a, b, c)
}
