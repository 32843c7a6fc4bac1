//! Operator tuples and their pointwise predicates.

use crate::error::{Error, Result};
use crate::fock::MultiIndex;
use crate::linalg::{self, identity, max_eigenvalue, op_norm, psd_range, psd_sqrt, Mat, Vector, C64};

/// `n` square complex matrices of a common size.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorTuple {
    matrices: Vec<Mat>,
}

impl OperatorTuple {
    pub fn new(matrices: Vec<Mat>) -> Result<Self> {
        let first = matrices
            .first()
            .ok_or_else(|| Error::Shape("a tuple needs at least one operator".into()))?;
        let d = first.nrows();
        for (i, m) in matrices.iter().enumerate() {
            if m.nrows() != d || m.ncols() != d {
                return Err(Error::Shape(format!(
                    "operator {} is {}x{}, expected {d}x{d}",
                    i + 1,
                    m.nrows(),
                    m.ncols()
                )));
            }
            if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::Shape(format!("operator {} has non-finite entries", i + 1)));
            }
        }
        Ok(Self { matrices })
    }

    /// A tuple of 1×1 matrices.
    pub fn from_scalars(values: &[C64]) -> Result<Self> {
        Self::new(values.iter().map(|&z| Mat::from_element(1, 1, z)).collect())
    }

    pub fn zero(n: usize, dim: usize) -> Result<Self> {
        Self::new(vec![Mat::zeros(dim, dim); n])
    }

    pub fn n(&self) -> usize {
        self.matrices.len()
    }

    pub fn dim(&self) -> usize {
        self.matrices[0].nrows()
    }

    pub fn matrix(&self, i: usize) -> &Mat {
        &self.matrices[i]
    }

    pub fn matrices(&self) -> &[Mat] {
        &self.matrices
    }

    pub fn into_matrices(self) -> Vec<Mat> {
        self.matrices
    }

    /// `Σ T_i T_i*`.
    pub fn row_gram(&self) -> Mat {
        self.phi(&identity(self.dim()))
    }

    /// `Φ(X) = Σ T_i X T_i*`.
    pub fn phi(&self, x: &Mat) -> Mat {
        let mut acc = Mat::zeros(self.dim(), self.dim());
        for t in &self.matrices {
            acc += t * x * t.adjoint();
        }
        acc
    }

    /// `λ_max(Σ T_i T_i* − I)`; nonpositive for row contractions.
    pub fn row_excess(&self) -> f64 {
        if self.dim() == 0 {
            return f64::NEG_INFINITY;
        }
        max_eigenvalue(&(self.row_gram() - identity(self.dim())))
    }

    pub fn is_row_contraction(&self, tol: f64) -> bool {
        self.row_excess() <= tol
    }

    /// `‖Σ T_i T_i* − I‖`.
    pub fn cuntz_row_residual(&self) -> f64 {
        op_norm(&(self.row_gram() - identity(self.dim())))
    }

    pub fn defect(&self, tol: f64, rank_tol: f64) -> Result<DefectData> {
        let excess = self.row_excess();
        if excess > tol {
            return Err(Error::NotRowContraction { excess });
        }
        let delta_sq = identity(self.dim()) - self.row_gram();
        let delta = psd_sqrt(&delta_sq, tol)?;
        let (frame, values) = psd_range(&delta_sq, rank_tol);
        Ok(DefectData {
            delta,
            defect_rank: frame.ncols(),
            defect_frame: frame,
            squared_eigenvalues: values,
        })
    }

    /// Largest `‖T_iT_j − T_jT_i‖` over pairs.
    pub fn commutator_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n() {
            for j in (i + 1)..self.n() {
                let c = &self.matrices[i] * &self.matrices[j] - &self.matrices[j] * &self.matrices[i];
                worst = worst.max(op_norm(&c));
            }
        }
        worst
    }

    pub fn is_commuting(&self, tol: f64) -> bool {
        self.commutator_residual() <= tol
    }

    pub fn apply_word(&self, word: &MultiIndex) -> Result<Mat> {
        word.check(self.n())?;
        let mut acc = identity(self.dim());
        for &l in word.letters() {
            acc *= &self.matrices[l];
        }
        Ok(acc)
    }

    /// `s_m = ‖Φ^m(I)‖` for `m = 0..=m_max`, reported as a running minimum.
    pub fn decay_sequence(&self, m_max: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(m_max + 1);
        let mut x = identity(self.dim());
        let mut prev = f64::INFINITY;
        for m in 0..=m_max {
            if m > 0 {
                x = self.phi(&x);
            }
            let s = max_eigenvalue(&x).max(0.0).min(prev);
            out.push(s);
            prev = s;
        }
        out
    }

    pub fn is_pure(&self, m_max: usize, tol: f64) -> (bool, Vec<f64>) {
        let decay = self.decay_sequence(m_max);
        (decay[m_max] <= tol, decay)
    }

    /// Residuals entering the spherical-unitary test.
    pub fn spherical_residual(&self) -> SphericalResidual {
        let mut normality: f64 = 0.0;
        let mut fuglede: f64 = 0.0;
        for i in 0..self.n() {
            let ti = &self.matrices[i];
            normality = normality.max(op_norm(&(ti * ti.adjoint() - ti.adjoint() * ti)));
            for j in 0..self.n() {
                let tj = &self.matrices[j];
                fuglede = fuglede.max(op_norm(&(ti * tj.adjoint() - tj.adjoint() * ti)));
            }
        }
        SphericalResidual {
            commutator: self.commutator_residual(),
            normality,
            fuglede,
            row_sum: self.cuntz_row_residual(),
        }
    }

    pub fn is_spherical_unitary(&self, tol: f64) -> bool {
        self.spherical_residual().max() <= tol
    }

    pub fn direct_sum(&self, other: &OperatorTuple) -> Result<OperatorTuple> {
        if self.n() != other.n() {
            return Err(Error::Shape(format!(
                "direct sum of a {}-tuple with a {}-tuple",
                self.n(),
                other.n()
            )));
        }
        OperatorTuple::new(
            self.matrices
                .iter()
                .zip(&other.matrices)
                .map(|(a, b)| linalg::direct_sum(a, b))
                .collect(),
        )
    }

    /// `(T_1 ⊗ I_k, …, T_n ⊗ I_k)`.
    pub fn tensor_with_identity(&self, k: usize) -> Result<OperatorTuple> {
        if k == 0 {
            return Err(Error::InvalidParameter("tensor factor dimension must be positive".into()));
        }
        let id = identity(k);
        OperatorTuple::new(self.matrices.iter().map(|t| t.kronecker(&id)).collect())
    }

    /// `(U T_i U*)`.
    pub fn conjugate(&self, u: &Mat) -> Result<OperatorTuple> {
        OperatorTuple::new(self.matrices.iter().map(|t| u * t * u.adjoint()).collect())
    }

    pub fn scaled(&self, r: f64) -> OperatorTuple {
        OperatorTuple {
            matrices: self.matrices.iter().map(|t| t.scale(r)).collect(),
        }
    }

    /// `F* T_i F` for a frame `F` with orthonormal columns.
    pub fn compress_to(&self, frame: &Mat) -> Result<OperatorTuple> {
        if frame.nrows() != self.dim() {
            return Err(Error::Shape(format!(
                "frame has {} rows, tuple acts on dim {}",
                frame.nrows(),
                self.dim()
            )));
        }
        OperatorTuple::new(self.matrices.iter().map(|t| frame.ad_mul(&(t * frame))).collect())
    }

    /// Largest distance between corresponding operators.
    pub fn distance(&self, other: &OperatorTuple) -> f64 {
        self.matrices
            .iter()
            .zip(&other.matrices)
            .map(|(a, b)| op_norm(&(a - b)))
            .fold(0.0, f64::max)
    }
}

/// `Δ_T = (I − Σ T_i T_i*)^{1/2}` with its range.
#[derive(Debug, Clone)]
pub struct DefectData {
    pub delta: Mat,
    pub defect_rank: usize,
    pub defect_frame: Mat,
    /// Nonzero eigenvalues of `Δ²` matching the columns of `defect_frame`.
    pub squared_eigenvalues: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalResidual {
    pub commutator: f64,
    pub normality: f64,
    pub fuglede: f64,
    pub row_sum: f64,
}

impl SphericalResidual {
    pub fn max(&self) -> f64 {
        self.commutator.max(self.normality).max(self.fuglede).max(self.row_sum)
    }
}

/// Matrix-free access to a tuple acting on a finite-dimensional space.
pub trait TupleAction: Sync {
    fn arity(&self) -> usize;
    fn dim(&self) -> usize;
    fn apply(&self, i: usize, x: &Vector) -> Vector;
    fn apply_adjoint(&self, i: usize, x: &Vector) -> Vector;

    fn apply_mat(&self, i: usize, x: &Mat) -> Mat {
        let mut out = Mat::zeros(self.dim(), x.ncols());
        for k in 0..x.ncols() {
            out.set_column(k, &self.apply(i, &x.column(k).into_owned()));
        }
        out
    }

    fn apply_adjoint_mat(&self, i: usize, x: &Mat) -> Mat {
        let mut out = Mat::zeros(self.dim(), x.ncols());
        for k in 0..x.ncols() {
            out.set_column(k, &self.apply_adjoint(i, &x.column(k).into_owned()));
        }
        out
    }

    /// Applies `R^α = R_{α₁}⋯R_{α_m}` to `x`.
    fn apply_word(&self, word: &MultiIndex, x: &Vector) -> Vector {
        word.letters().iter().rev().fold(x.clone(), |acc, &l| self.apply(l, &acc))
    }

    /// Applies `(R^α)* = R_{α_m}*⋯R_{α₁}*` to `x`.
    fn apply_word_adjoint(&self, word: &MultiIndex, x: &Vector) -> Vector {
        word.letters().iter().fold(x.clone(), |acc, &l| self.apply_adjoint(l, &acc))
    }

    /// Dense matrix of `R_i`; intended for small spaces.
    fn to_dense(&self, i: usize) -> Mat {
        self.apply_mat(i, &identity(self.dim()))
    }
}

impl TupleAction for OperatorTuple {
    fn arity(&self) -> usize {
        self.n()
    }

    fn dim(&self) -> usize {
        OperatorTuple::dim(self)
    }

    fn apply(&self, i: usize, x: &Vector) -> Vector {
        &self.matrices[i] * x
    }

    fn apply_adjoint(&self, i: usize, x: &Vector) -> Vector {
        self.matrices[i].ad_mul(x)
    }

    fn apply_mat(&self, i: usize, x: &Mat) -> Mat {
        &self.matrices[i] * x
    }

    fn apply_adjoint_mat(&self, i: usize, x: &Mat) -> Mat {
        self.matrices[i].ad_mul(x)
    }

    fn to_dense(&self, i: usize) -> Mat {
        self.matrices[i].clone()
    }
}

/// The §4-style noncommuting pair `R₁ = [[0,1],[0,0]]`, `R₂ = [[0,0],[1,0]]`.
pub fn flip_pair() -> OperatorTuple {
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    OperatorTuple::new(vec![
        Mat::from_row_slice(2, 2, &[zero, one, zero, zero]),
        Mat::from_row_slice(2, 2, &[zero, zero, one, zero]),
    ])
    .expect("2x2 pair")
}

/// Diagonal tuple whose `k`-th diagonal entries are the coordinates of `points[k]`.
pub fn diagonal_tuple(points: &[Vec<C64>]) -> Result<OperatorTuple> {
    let n = points
        .first()
        .map(|p| p.len())
        .ok_or_else(|| Error::Shape("at least one point is required".into()))?;
    if points.iter().any(|p| p.len() != n) {
        return Err(Error::Shape("points have different lengths".into()));
    }
    OperatorTuple::new(
        (0..n)
            .map(|i| Mat::from_diagonal(&Vector::from_iterator(points.len(), points.iter().map(|p| p[i]))))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, max_abs};

    #[test]
    fn row_contraction_examples() {
        assert!(OperatorTuple::zero(2, 3).unwrap().is_row_contraction(1e-10));
        let ones = OperatorTuple::from_scalars(&[c64(1.0, 0.0), c64(1.0, 0.0)]).unwrap();
        assert!(!ones.is_row_contraction(1e-10));
        let r = flip_pair();
        assert!(r.is_row_contraction(1e-10));
        assert!(r.cuntz_row_residual() < 1e-15);
    }

    #[test]
    fn defect_examples() {
        let d = OperatorTuple::zero(2, 3).unwrap().defect(1e-10, 1e-9).unwrap();
        assert_eq!(d.defect_rank, 3);
        assert!(max_abs(&(d.delta - identity(3))) < 1e-15);
        assert_eq!(flip_pair().defect(1e-10, 1e-9).unwrap().defect_rank, 0);
        let unit = OperatorTuple::from_scalars(&[c64(0.6, 0.0), c64(0.8, 0.0)]).unwrap();
        let d = unit.defect(1e-10, 1e-9).unwrap();
        assert_eq!(d.defect_rank, 0);
        assert!(d.delta[(0, 0)].norm() < 1e-15);
        let ones = OperatorTuple::from_scalars(&[c64(1.0, 0.0), c64(1.0, 0.0)]).unwrap();
        assert!(matches!(ones.defect(1e-10, 1e-9), Err(Error::NotRowContraction { .. })));
    }

    #[test]
    fn commuting_examples() {
        let single = OperatorTuple::new(vec![Mat::from_fn(3, 3, |i, j| c64((i + 2 * j) as f64, 1.0))]).unwrap();
        assert!(single.is_commuting(1e-12));
        assert!(!flip_pair().is_commuting(1e-10));
        let diag = diagonal_tuple(&[vec![c64(0.1, 0.0), c64(0.2, 0.3)], vec![c64(0.5, 0.0), c64(-0.1, 0.0)]]).unwrap();
        assert!(diag.is_commuting(1e-14));
    }

    #[test]
    fn words() {
        let r = flip_pair();
        assert_eq!(r.apply_word(&MultiIndex::empty()).unwrap(), identity(2));
        let w12 = r.apply_word(&MultiIndex::new(vec![0, 1])).unwrap();
        let w21 = r.apply_word(&MultiIndex::new(vec![1, 0])).unwrap();
        // R₁R₂ = diag(1, 0), R₂R₁ = diag(0, 1)
        assert_eq!(w12[(0, 0)], c64(1.0, 0.0));
        assert_eq!(w21[(1, 1)], c64(1.0, 0.0));
        assert_ne!(w12, w21);
        assert!(matches!(
            r.apply_word(&MultiIndex::new(vec![2])),
            Err(Error::LetterOutOfRange { letter: 3, n: 2 })
        ));
    }

    #[test]
    fn purity_examples() {
        let half = OperatorTuple::from_scalars(&[c64(0.5, 0.0), c64(0.5, 0.0)]).unwrap();
        let (pure, decay) = half.is_pure(40, 1e-10);
        assert!(pure);
        for (m, s) in decay.iter().enumerate() {
            assert!((s - 0.5f64.powi(m as i32)).abs() < 1e-15);
        }
        let (pure, decay) = flip_pair().is_pure(40, 1e-10);
        assert!(!pure);
        assert!(decay.iter().all(|s| (s - 1.0).abs() < 1e-12));
        let (pure, decay) = OperatorTuple::zero(2, 2).unwrap().is_pure(5, 1e-10);
        assert!(pure);
        assert_eq!(decay[1], 0.0);
    }

    #[test]
    fn spherical_examples() {
        let w = OperatorTuple::from_scalars(&[c64(0.6, 0.0), c64(0.0, 0.8)]).unwrap();
        assert!(w.is_spherical_unitary(1e-10));
        assert!(!flip_pair().is_spherical_unitary(1e-10));
        let d = diagonal_tuple(&[vec![c64(1.0, 0.0), c64(0.0, 0.0)], vec![c64(0.6, 0.0), c64(0.0, -0.8)]]).unwrap();
        assert!(d.is_spherical_unitary(1e-10));
    }

    #[test]
    fn sums_and_tensors() {
        let z1 = OperatorTuple::zero(2, 1).unwrap();
        assert_eq!(z1.direct_sum(&z1).unwrap(), OperatorTuple::zero(2, 2).unwrap());
        let r = flip_pair();
        assert_eq!(r.tensor_with_identity(1).unwrap(), r);
        assert_eq!(r.tensor_with_identity(3).unwrap().dim(), 6);
        assert_eq!(r.direct_sum(&OperatorTuple::zero(2, 3).unwrap()).unwrap().dim(), 5);
        assert!(r.direct_sum(&OperatorTuple::zero(3, 1).unwrap()).is_err());
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(OperatorTuple::new(vec![]).is_err());
        assert!(OperatorTuple::new(vec![Mat::zeros(2, 2), Mat::zeros(3, 3)]).is_err());
        assert!(OperatorTuple::new(vec![Mat::zeros(2, 3)]).is_err());
    }
}
