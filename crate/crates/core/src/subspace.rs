//! Subspaces carried as orthonormal frames.

use crate::error::{Error, Result};
use crate::linalg::{self, identity, kernel, max_principal_sine, op_norm, orthonormalize, Mat, Vector};

#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    ambient_dim: usize,
    frame: Mat,
    tol: f64,
}

impl Subspace {
    /// Wraps a frame, checking that its columns are orthonormal to `tol`.
    pub fn new(frame: Mat, tol: f64) -> Result<Self> {
        let k = frame.ncols();
        let err = op_norm(&(frame.ad_mul(&frame) - identity(k)));
        if err > tol.max(1e-12) * 10.0 {
            return Err(Error::Shape(format!("frame columns are not orthonormal (error {err:.3e})")));
        }
        Ok(Self {
            ambient_dim: frame.nrows(),
            frame,
            tol,
        })
    }

    /// Orthonormal frame for the column span of `spanning`.
    pub fn span(spanning: &Mat, rank_tol: f64) -> Self {
        Self {
            ambient_dim: spanning.nrows(),
            frame: orthonormalize(spanning, rank_tol),
            tol: rank_tol,
        }
    }

    pub fn zero(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            frame: Mat::zeros(ambient_dim, 0),
            tol: 0.0,
        }
    }

    pub fn full(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            frame: identity(ambient_dim),
            tol: 0.0,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.frame.ncols()
    }

    pub fn frame(&self) -> &Mat {
        &self.frame
    }

    pub fn into_frame(self) -> Mat {
        self.frame
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn projector(&self) -> Mat {
        &self.frame * self.frame.adjoint()
    }

    pub fn project(&self, v: &Vector) -> Vector {
        &self.frame * self.frame.ad_mul(v)
    }

    /// `‖(I − P) x‖₂` for the columns of `x`, as an operator norm.
    pub fn residual_of(&self, x: &Mat) -> f64 {
        op_norm(&(x - &self.frame * self.frame.ad_mul(x)))
    }

    /// Sine of the largest angle from `other` into `self`.
    pub fn containment_sine(&self, other: &Subspace) -> f64 {
        if other.dim() == 0 {
            return 0.0;
        }
        self.residual_of(&other.frame).min(1.0)
    }

    pub fn contains(&self, other: &Subspace, angle_tol: f64) -> bool {
        self.containment_sine(other) <= angle_tol
    }

    /// Largest principal angle in radians; `π/2` when dimensions differ.
    pub fn max_angle(&self, other: &Subspace) -> f64 {
        if self.dim() != other.dim() || self.ambient_dim != other.ambient_dim {
            return std::f64::consts::FRAC_PI_2;
        }
        max_principal_sine(&self.frame, &other.frame).asin()
    }

    pub fn same_as(&self, other: &Subspace, angle_tol: f64) -> bool {
        self.dim() == other.dim() && self.max_angle(other) <= angle_tol
    }

    pub fn complement(&self, rank_tol: f64) -> Subspace {
        Subspace {
            ambient_dim: self.ambient_dim,
            frame: linalg::complement(&self.frame, rank_tol),
            tol: rank_tol,
        }
    }

    /// Vectors of `self` lying in `other` up to sine `angle_tol`.
    pub fn intersection(&self, other: &Subspace, angle_tol: f64) -> Subspace {
        if self.dim() == 0 || other.dim() == 0 {
            return Subspace::zero(self.ambient_dim);
        }
        let residual = &self.frame - &other.frame * other.frame.ad_mul(&self.frame);
        let null = kernel(&residual, angle_tol);
        let frame = orthonormalize(&(&self.frame * null.frame), angle_tol);
        Subspace {
            ambient_dim: self.ambient_dim,
            frame,
            tol: angle_tol,
        }
    }

    /// Intersection with the coordinate subspace spanned by the first `k` basis vectors.
    pub fn intersect_leading(&self, k: usize, angle_tol: f64) -> Subspace {
        let k = k.min(self.ambient_dim);
        if self.dim() == 0 || k == 0 {
            return Subspace::zero(self.ambient_dim);
        }
        if k == self.ambient_dim {
            return self.clone();
        }
        let outside = self.frame.rows(k, self.ambient_dim - k).into_owned();
        let null = kernel(&outside, angle_tol);
        let frame = orthonormalize(&(&self.frame * null.frame), angle_tol);
        Subspace {
            ambient_dim: self.ambient_dim,
            frame,
            tol: angle_tol,
        }
    }

    /// `self ⊕ other` inside the direct sum of the ambient spaces.
    pub fn direct_sum(&self, other: &Subspace) -> Subspace {
        Subspace {
            ambient_dim: self.ambient_dim + other.ambient_dim,
            frame: linalg::direct_sum(&self.frame, &other.frame),
            tol: self.tol.max(other.tol),
        }
    }

    /// `self ⊗ ℂ^k`.
    pub fn tensor_identity(&self, k: usize) -> Subspace {
        Subspace {
            ambient_dim: self.ambient_dim * k,
            frame: self.frame.kronecker(&identity(k)),
            tol: self.tol,
        }
    }

    /// Image under an isometry `v` (columns orthonormal).
    pub fn mapped(&self, v: &Mat) -> Subspace {
        Subspace {
            ambient_dim: v.nrows(),
            frame: v * &self.frame,
            tol: self.tol,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c64;

    fn e(n: usize, k: usize) -> Mat {
        let mut m = Mat::zeros(n, 1);
        m[(k, 0)] = c64(1.0, 0.0);
        m
    }

    #[test]
    fn basic_relations() {
        let a = Subspace::span(&e(3, 0), 1e-9);
        let full = Subspace::full(3);
        assert!(full.contains(&a, 1e-12));
        assert!(!a.contains(&full, 1e-12));
        assert_eq!(a.complement(1e-9).dim(), 2);
        assert_eq!(a.max_angle(&Subspace::span(&e(3, 1), 1e-9)), std::f64::consts::FRAC_PI_2);
    }

    #[test]
    fn intersection_of_planes() {
        let mut p = Mat::zeros(3, 2);
        p[(0, 0)] = c64(1.0, 0.0);
        p[(1, 1)] = c64(1.0, 0.0);
        let mut q = Mat::zeros(3, 2);
        q[(1, 0)] = c64(1.0, 0.0);
        q[(2, 1)] = c64(1.0, 0.0);
        let i = Subspace::span(&p, 1e-9).intersection(&Subspace::span(&q, 1e-9), 1e-9);
        assert_eq!(i.dim(), 1);
        assert!(i.same_as(&Subspace::span(&e(3, 1), 1e-9), 1e-12));
    }

    #[test]
    fn sums_and_tensors() {
        let a = Subspace::span(&e(2, 0), 1e-9);
        assert_eq!(a.direct_sum(&Subspace::full(3)).dim(), 4);
        assert_eq!(a.tensor_identity(3).dim(), 3);
        assert_eq!(a.tensor_identity(3).ambient_dim(), 6);
    }

    #[test]
    fn rejects_non_orthonormal() {
        let m = Mat::from_element(2, 1, c64(1.0, 0.0));
        assert!(Subspace::new(m, 1e-10).is_err());
    }
}
