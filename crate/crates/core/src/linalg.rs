//! Dense complex linear algebra helpers shared by every module.
//!
//! Rank decisions go through [`rank_threshold`] so that every module agrees on
//! what "numerically zero" means.

use faer::diag::Diag;
use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::evd::{self_adjoint_evd, self_adjoint_evd_scratch, ComputeEigenvectors, SelfAdjointEvdParams};
use faer::linalg::svd::{svd, svd_scratch, ComputeSvdVectors, SvdParams};
use faer::{Par, Spec};
use nalgebra::{DMatrix, DMatrixView, DVector, SymmetricEigen, QR, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Mat = DMatrix<C64>;
pub type Vector = DVector<C64>;

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Absolute cut-off below which a singular value or PSD eigenvalue counts as zero.
///
/// The threshold is `rank_tol` relative to the largest value, floored at an
/// absolute `rank_tol` so that a numerically vanishing matrix has rank zero.
pub fn rank_threshold(largest: f64, rank_tol: f64) -> f64 {
    rank_tol * largest.max(1.0)
}

pub fn numerical_rank(values: &[f64], rank_tol: f64) -> usize {
    let largest = values.iter().cloned().fold(0.0, f64::max);
    let thr = rank_threshold(largest, rank_tol);
    values.iter().filter(|&&v| v > thr).count()
}

/// True when some value sits within a factor of ten of the rank threshold.
pub fn near_threshold(values: &[f64], rank_tol: f64) -> bool {
    let largest = values.iter().cloned().fold(0.0, f64::max);
    let thr = rank_threshold(largest, rank_tol);
    values.iter().any(|&v| v > thr / 10.0 && v < thr * 10.0)
}

pub(crate) fn to_faer(m: &Mat) -> faer::Mat<C64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

pub(crate) fn from_faer(m: faer::MatRef<'_, C64>) -> Mat {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Square factor with the same Gram matrix as `m`, via a thin QR when `m` is tall.
fn gram_factor(m: &Mat) -> faer::Mat<C64> {
    let f = to_faer(m);
    if m.nrows() > m.ncols() {
        f.qr().thin_R().to_owned()
    } else {
        f
    }
}

/// `a · b` through an optimized GEMM; faster than the generic product for large operands.
pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    from_faer((to_faer(a) * to_faer(b)).as_ref())
}

// The divide-and-conquer drivers lose accuracy on the heavily clustered
// spectra that shift-type operators produce, so both decompositions run the
// implicit QR iteration at every size.

/// Singular values (descending) and optionally the right singular vectors of a square matrix.
fn faer_svd(a: faer::MatRef<'_, C64>, vectors: bool) -> Option<(Vec<f64>, Option<faer::Mat<C64>>)> {
    let n = a.nrows();
    let mut params: Spec<SvdParams, C64> = Spec::default();
    params.recursion_threshold = usize::MAX;
    let compute_v = if vectors { ComputeSvdVectors::Full } else { ComputeSvdVectors::No };
    let mut s = Diag::<C64>::zeros(n);
    let mut v = vectors.then(|| faer::Mat::<C64>::zeros(n, n));
    let mut buf = MemBuffer::new(svd_scratch::<C64>(n, n, ComputeSvdVectors::No, compute_v, Par::Seq, params));
    svd(
        a,
        s.as_mut(),
        None,
        v.as_mut().map(|v| v.as_mut()),
        Par::Seq,
        MemStack::new(&mut buf),
        params,
    )
    .ok()?;
    Some((s.column_vector().iter().map(|x| x.re).collect(), v))
}

/// Ascending eigenvalues and eigenvectors of a Hermitian matrix.
fn faer_eigh(a: faer::MatRef<'_, C64>) -> Option<(Vec<f64>, faer::Mat<C64>)> {
    let n = a.nrows();
    let mut params: Spec<SelfAdjointEvdParams, C64> = Spec::default();
    params.recursion_threshold = usize::MAX;
    let mut s = Diag::<C64>::zeros(n);
    let mut u = faer::Mat::<C64>::zeros(n, n);
    let mut buf = MemBuffer::new(self_adjoint_evd_scratch::<C64>(n, ComputeEigenvectors::Yes, Par::Seq, params));
    self_adjoint_evd(a, s.as_mut(), Some(u.as_mut()), Par::Seq, MemStack::new(&mut buf), params).ok()?;
    Some((s.column_vector().iter().map(|x| x.re).collect(), u))
}

pub fn identity(n: usize) -> Mat {
    Mat::identity(n, n)
}

pub fn hermitian_part(h: &Mat) -> Mat {
    (h + h.adjoint()).scale(0.5)
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues in ascending order.
pub fn hermitian_eigen(h: &Mat) -> (Vec<f64>, Mat) {
    let n = h.nrows();
    if n == 0 {
        return (Vec::new(), Mat::zeros(0, 0));
    }
    let herm = hermitian_part(h);
    if let Some((values, vectors)) = faer_eigh(to_faer(&herm).as_ref()) {
        return (values, from_faer(vectors.as_ref()));
    }
    let eig = SymmetricEigen::new(herm);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = Mat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn max_eigenvalue(h: &Mat) -> f64 {
    hermitian_eigen(h).0.last().copied().unwrap_or(0.0)
}

/// Largest singular value; zero for empty matrices.
pub fn op_norm(m: &Mat) -> f64 {
    // Exactly-zero rows and columns do not change the norm; residual matrices have many.
    let rows: Vec<usize> = (0..m.nrows()).filter(|&i| m.row(i).iter().any(|z| *z != C64::ZERO)).collect();
    let cols: Vec<usize> = (0..m.ncols()).filter(|&j| m.column(j).iter().any(|z| *z != C64::ZERO)).collect();
    if rows.is_empty() || cols.is_empty() {
        return 0.0;
    }
    if rows.len() == m.nrows() && cols.len() == m.ncols() {
        return singular_values(m).first().copied().unwrap_or(0.0);
    }
    let packed = Mat::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])]);
    singular_values(&packed).first().copied().unwrap_or(0.0)
}

pub fn vec_norm(v: &Vector) -> f64 {
    v.norm()
}

/// Singular values in descending order.
pub fn singular_values(m: &Mat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let square = if m.ncols() > m.nrows() { gram_factor(&m.adjoint()) } else { gram_factor(m) };
    if let Some((s, _)) = faer_svd(square.as_ref(), false) {
        return s;
    }
    let thin = if m.nrows() >= m.ncols() {
        QR::new(m.clone()).r()
    } else {
        QR::new(m.adjoint()).r()
    };
    let mut s: Vec<f64> = thin.singular_values().iter().cloned().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// PSD square root of a Hermitian matrix.
///
/// Eigenvalues in `[-tol, tol]` are treated as zero; anything below `-tol`
/// (relative to the spectral scale) is rejected.
pub fn psd_sqrt(h: &Mat, tol: f64) -> Result<Mat> {
    let (values, vectors) = hermitian_eigen(h);
    let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let floor = tol * scale;
    let mut roots = Vec::with_capacity(values.len());
    for &v in &values {
        if v < -floor {
            return Err(Error::NotPositive { eigenvalue: v, tol: floor });
        }
        roots.push(if v <= floor { 0.0 } else { v.sqrt() });
    }
    Ok(from_eigen(&vectors, &roots))
}

/// `U diag(values) U*`.
pub fn from_eigen(vectors: &Mat, values: &[f64]) -> Mat {
    let mut scaled = vectors.clone();
    for (k, &v) in values.iter().enumerate() {
        scaled.column_mut(k).scale_mut(v);
    }
    scaled * vectors.adjoint()
}

/// Orthonormal frame of the range of a PSD matrix together with its eigenvalues.
pub fn psd_range(h: &Mat, rank_tol: f64) -> (Mat, Vec<f64>) {
    let (values, vectors) = hermitian_eigen(h);
    let largest = values.iter().cloned().fold(0.0, f64::max);
    let thr = rank_threshold(largest, rank_tol);
    let keep: Vec<usize> = (0..values.len()).rev().filter(|&k| values[k] > thr).collect();
    let mut frame = Mat::zeros(h.nrows(), keep.len());
    let mut kept = Vec::with_capacity(keep.len());
    for (dst, &k) in keep.iter().enumerate() {
        frame.set_column(dst, &vectors.column(k));
        kept.push(values[k]);
    }
    (frame, kept)
}

/// Null space of `m` from its singular value decomposition.
#[derive(Debug, Clone)]
pub struct Kernel {
    pub frame: Mat,
    pub singular_values: Vec<f64>,
    pub near_threshold: bool,
}

pub fn kernel(m: &Mat, rank_tol: f64) -> Kernel {
    let cols = m.ncols();
    if cols == 0 {
        return Kernel {
            frame: Mat::zeros(0, 0),
            singular_values: Vec::new(),
            near_threshold: false,
        };
    }
    if m.nrows() == 0 {
        return Kernel {
            frame: identity(cols),
            singular_values: Vec::new(),
            near_threshold: false,
        };
    }
    let (values, right) = right_singular(m);
    let largest = values.iter().cloned().fold(0.0, f64::max);
    let thr = rank_threshold(largest, rank_tol);
    let null: Vec<usize> = (0..values.len()).filter(|&k| values[k] <= thr).collect();
    let mut frame = Mat::zeros(cols, null.len());
    for (dst, &k) in null.iter().enumerate() {
        frame.set_column(dst, &right.column(k));
    }
    let mut sorted = values.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));
    Kernel {
        frame,
        near_threshold: near_threshold(&sorted, rank_tol),
        singular_values: sorted,
    }
}

/// Singular values of `m` (padded with zeros to `ncols`) and the matching right
/// singular vectors as columns.
fn right_singular(m: &Mat) -> (Vec<f64>, Mat) {
    let cols = m.ncols();
    let square = gram_factor(m);
    let square = if square.nrows() < cols {
        let mut padded = faer::Mat::<C64>::zeros(cols, cols);
        padded.as_mut().get_mut(..square.nrows(), ..).copy_from(&square);
        padded
    } else {
        square
    };
    if let Some((values, Some(v))) = faer_svd(square.as_ref(), true) {
        return (values, from_faer(v.as_ref()));
    }
    let dense = from_faer(square.as_ref());
    let svd = SVD::new(dense, false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    (svd.singular_values.iter().cloned().collect(), v_t.adjoint())
}

/// Incrementally built orthonormal frame (twice-iterated classical Gram–Schmidt).
#[derive(Debug, Clone)]
pub struct FrameBuilder {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
    drop_tol: f64,
}

impl FrameBuilder {
    pub fn new(rows: usize, drop_tol: f64) -> Self {
        Self {
            rows,
            cols: 0,
            data: Vec::new(),
            drop_tol,
        }
    }

    pub fn from_frame(frame: &Mat, drop_tol: f64) -> Self {
        Self {
            rows: frame.nrows(),
            cols: frame.ncols(),
            data: frame.as_slice().to_vec(),
            drop_tol,
        }
    }

    pub fn len(&self) -> usize {
        self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.cols == 0
    }

    pub fn view(&self) -> DMatrixView<'_, C64> {
        DMatrixView::from_slice(&self.data, self.rows, self.cols)
    }

    pub fn column(&self, k: usize) -> Vector {
        Vector::from_column_slice(&self.data[k * self.rows..(k + 1) * self.rows])
    }

    /// Removes the components of `v` along the current frame (two passes).
    pub fn project_out(&self, v: &mut Vector) {
        if self.cols == 0 {
            return;
        }
        let q = self.view();
        for _ in 0..2 {
            let coeffs = q.ad_mul(&*v);
            *v -= &q * coeffs;
        }
    }

    /// Adds the normalized residual of `v` if it is not numerically inside the span.
    pub fn push(&mut self, v: &Vector) -> bool {
        let scale = v.norm().max(1.0);
        let mut w = v.clone();
        self.project_out(&mut w);
        let r = w.norm();
        if r <= self.drop_tol * scale {
            return false;
        }
        w.unscale_mut(r);
        self.data.extend_from_slice(w.as_slice());
        self.cols += 1;
        true
    }

    pub fn push_columns(&mut self, m: &Mat) -> usize {
        let mut added = 0;
        for k in 0..m.ncols() {
            if self.push(&m.column(k).into_owned()) {
                added += 1;
            }
        }
        added
    }

    pub fn into_mat(self) -> Mat {
        Mat::from_vec(self.rows, self.cols, self.data)
    }

    pub fn to_mat(&self) -> Mat {
        Mat::from_column_slice(self.rows, self.cols, &self.data)
    }
}

/// Orthonormal basis for the column span of `m`.
pub fn orthonormalize(m: &Mat, drop_tol: f64) -> Mat {
    let mut fb = FrameBuilder::new(m.nrows(), drop_tol);
    fb.push_columns(m);
    fb.into_mat()
}

/// Orthonormal basis of the orthogonal complement of the span of an orthonormal frame.
pub fn complement(frame: &Mat, rank_tol: f64) -> Mat {
    let n = frame.nrows();
    if frame.ncols() == 0 {
        return identity(n);
    }
    if frame.ncols() >= n {
        return Mat::zeros(n, 0);
    }
    let projector = identity(n) - frame * frame.adjoint();
    psd_range(&projector, rank_tol.max(1e-6)).0
}

/// Block-diagonal sum.
pub fn direct_sum(a: &Mat, b: &Mat) -> Mat {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut out = Mat::zeros(ra + rb, ca + cb);
    out.view_mut((0, 0), (ra, ca)).copy_from(a);
    out.view_mut((ra, ca), (rb, cb)).copy_from(b);
    out
}

/// Sine of the largest principal angle between two equal-dimensional subspaces.
///
/// Both arguments are orthonormal frames. Mismatched dimensions give 1.
pub fn max_principal_sine(a: &Mat, b: &Mat) -> f64 {
    if a.ncols() != b.ncols() {
        return 1.0;
    }
    if a.ncols() == 0 {
        return 0.0;
    }
    let residual_b = b - a * a.ad_mul(b);
    let residual_a = a - b * b.ad_mul(a);
    op_norm(&residual_b).max(op_norm(&residual_a)).min(1.0)
}

/// Principal angles (radians, ascending) between the spans of two orthonormal frames.
pub fn principal_angles(a: &Mat, b: &Mat) -> Vec<f64> {
    if a.ncols() == 0 || b.ncols() == 0 {
        return Vec::new();
    }
    let k = a.ncols().min(b.ncols());
    let cosines = singular_values(&a.ad_mul(b));
    // sines from the residual are accurate for small angles
    let (small, big) = if a.ncols() >= b.ncols() { (b, a) } else { (a, b) };
    let residual = small - big * big.ad_mul(small);
    let mut sines = singular_values(&residual);
    sines.reverse();
    (0..k)
        .map(|i| {
            let c = cosines.get(i).copied().unwrap_or(0.0).min(1.0);
            let s = sines.get(i).copied().unwrap_or(0.0).min(1.0);
            s.atan2(c)
        })
        .collect()
}

/// `max |a_ij - b_ij|`-free operator-norm distance.
pub fn dist(a: &Mat, b: &Mat) -> f64 {
    op_norm(&(a - b))
}

pub fn max_abs(m: &Mat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
