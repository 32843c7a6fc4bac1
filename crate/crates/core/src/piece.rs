//! Maximal commuting pieces.
//!
//! `L^c(R)` is computed as the largest subspace on which every
//! `(R_i*R_j* − R_j*R_i*)(R^α)*` vanishes (the adjoint-kernel side) and
//! cross-checked against the orthogonal complement of the smallest
//! `R`-invariant subspace containing all commutator ranges (the closure side).

use crate::error::{Error, Result};
use crate::linalg::{from_faer, kernel, max_abs, op_norm, to_faer, FrameBuilder, Mat, C64};
use crate::subspace::Subspace;
use crate::tuples::{OperatorTuple, TupleAction};
use crate::Tolerances;

/// Smallest `R`-invariant subspace containing the ranges of all `R_iR_j − R_jR_i`.
pub fn commutator_closure<A: TupleAction + ?Sized>(r: &A, rank_tol: f64) -> Subspace {
    let d = r.dim();
    let n = r.arity();
    let mut fb = FrameBuilder::new(d, rank_tol);
    let dense: Vec<Mat> = (0..n).map(|i| r.to_dense(i)).collect();
    'seed: for i in 0..n {
        for j in (i + 1)..n {
            let c = &dense[i] * &dense[j] - &dense[j] * &dense[i];
            fb.push_columns(&c);
            if fb.len() == d {
                break 'seed;
            }
        }
    }
    let mut next = 0;
    while next < fb.len() && fb.len() < d {
        let q = fb.column(next);
        next += 1;
        for l in 0..n {
            fb.push(&(&dense[l] * &q));
        }
    }
    Subspace::span(&fb.into_mat(), rank_tol)
}

/// Result of the adjoint-kernel iteration.
#[derive(Debug, Clone)]
pub struct AdjointKernel {
    pub subspace: Subspace,
    pub iterations: usize,
    /// Some singular value fell within a factor of ten of the rank threshold.
    pub unstable: bool,
}

/// Joint kernel of `(R_i*R_j* − R_j*R_i*)(R^α)*` over all words `α`.
///
/// Starts from the kernel of the stacked adjoint commutators and repeatedly
/// keeps only the vectors whose images under every `R_l*` stay inside the
/// current subspace, until the dimension stabilizes.
pub fn adjoint_kernel(r: &OperatorTuple, rank_tol: f64) -> AdjointKernel {
    let d = r.dim();
    let n = r.n();
    if d == 0 {
        return AdjointKernel {
            subspace: Subspace::zero(0),
            iterations: 0,
            unstable: false,
        };
    }
    let adj: Vec<faer::Mat<C64>> = r.matrices().iter().map(|t| to_faer(&t.adjoint())).collect();
    let pairs = n * (n - 1) / 2;
    let mut stack = faer::Mat::<C64>::zeros(pairs * d, d);
    let mut row = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            let c = &adj[i] * &adj[j] - &adj[j] * &adj[i];
            stack.as_mut().get_mut(row..row + d, ..).copy_from(&c);
            row += d;
        }
    }
    let first = kernel(&from_faer(stack.as_ref()), rank_tol);
    let mut unstable = first.near_threshold;
    let mut q = to_faer(&first.frame);
    let mut iterations = 1;
    while q.ncols() > 0 && iterations <= d {
        let k = q.ncols();
        let mut s = faer::Mat::<C64>::zeros(n * d, k);
        for (l, a) in adj.iter().enumerate() {
            let w = a * &q;
            let outside = &w - &q * (q.adjoint() * &w);
            s.as_mut().get_mut(l * d..(l + 1) * d, ..).copy_from(&outside);
        }
        let ker = kernel(&from_faer(s.as_ref()), rank_tol);
        unstable |= ker.near_threshold;
        iterations += 1;
        if ker.frame.ncols() == k {
            break;
        }
        q = &q * to_faer(&ker.frame);
    }
    let q = from_faer(q.as_ref());
    let frame = if q.ncols() == 0 { Mat::zeros(d, 0) } else { q };
    AdjointKernel {
        subspace: Subspace::span(&frame, rank_tol),
        iterations,
        unstable,
    }
}

/// `max_i ‖(I − P) R_i* F‖` for the frame `F` of a candidate co-invariant subspace.
pub fn coinvariance_residual<A: TupleAction + ?Sized>(r: &A, s: &Subspace) -> f64 {
    if s.dim() == 0 {
        return 0.0;
    }
    (0..r.arity())
        .map(|i| s.residual_of(&r.apply_adjoint_mat(i, s.frame())))
        .fold(0.0, f64::max)
}

/// Compression `P R_i |_s` in the coordinates of the frame of `s`.
pub fn compress(r: &OperatorTuple, s: &Subspace, tol: f64) -> Result<OperatorTuple> {
    if s.ambient_dim() != r.dim() {
        return Err(Error::Shape(format!(
            "subspace lives in dim {}, tuple acts on dim {}",
            s.ambient_dim(),
            r.dim()
        )));
    }
    let residual = coinvariance_residual(r, s);
    if residual > tol {
        return Err(Error::NotCoInvariant { residual });
    }
    r.compress_to(s.frame())
}

/// Options for [`maximal_commuting_piece_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PieceOptions {
    /// Compare against the commutator-closure characterization.
    pub cross_check: bool,
}

impl Default for PieceOptions {
    fn default() -> Self {
        Self { cross_check: true }
    }
}

#[derive(Debug, Clone)]
pub struct PieceResult {
    /// `L^c(R)`.
    pub subspace: Subspace,
    /// Compression of `R` to `L^c(R)`.
    pub piece: OperatorTuple,
    /// Largest commutator norm of the piece.
    pub residual: f64,
    pub coinvariance_residual: f64,
    /// Dimension of the commutator closure, when the cross-check ran.
    pub closure_dim: Option<usize>,
    /// `‖K* L‖` between closure and kernel frames, when the cross-check ran.
    pub duality_residual: Option<f64>,
    pub iterations: usize,
    pub warnings: Vec<String>,
}

pub fn maximal_commuting_piece(r: &OperatorTuple, tol: &Tolerances) -> Result<PieceResult> {
    maximal_commuting_piece_with(r, tol, PieceOptions::default())
}

pub fn maximal_commuting_piece_with(r: &OperatorTuple, tol: &Tolerances, options: PieceOptions) -> Result<PieceResult> {
    let ak = adjoint_kernel(r, tol.rank_tol);
    let mut warnings = Vec::new();
    if ak.unstable {
        warnings.push(format!(
            "singular values within a factor of 10 of the rank threshold {:.1e}; the piece dimension may depend on rank_tol",
            tol.rank_tol
        ));
    }
    let (closure_dim, duality_residual) = if options.cross_check {
        let k = commutator_closure(r, tol.rank_tol);
        let overlap = if k.dim() == 0 || ak.subspace.dim() == 0 {
            0.0
        } else {
            op_norm(&k.frame().ad_mul(ak.subspace.frame()))
        };
        if k.dim() + ak.subspace.dim() != r.dim() || overlap > tol.angle_tol {
            return Err(Error::CharacterizationMismatch(format!(
                "adjoint kernel has dim {}, commutator closure has dim {} in ambient dim {}, overlap {:.3e}",
                ak.subspace.dim(),
                k.dim(),
                r.dim(),
                overlap
            )));
        }
        (Some(k.dim()), Some(overlap))
    } else {
        (None, None)
    };
    let coinvariance = coinvariance_residual(r, &ak.subspace);
    let piece = compress(r, &ak.subspace, tol.angle_tol.max(tol.tol))?;
    let residual = if piece.dim() == 0 { 0.0 } else { piece.commutator_residual() };
    Ok(PieceResult {
        subspace: ak.subspace,
        piece,
        residual,
        coinvariance_residual: coinvariance,
        closure_dim,
        duality_residual,
        iterations: ak.iterations,
        warnings,
    })
}

/// Outcome of comparing `H^c(T)` with `L^c(R) ∩ H` for a dilation `R` of `T`.
#[derive(Debug, Clone)]
pub struct IntersectionReport {
    pub hc_dim: usize,
    pub intersection_dim: usize,
    pub piece_dim: usize,
    pub max_angle: f64,
    pub holds: bool,
}

/// Checks `A(H^c(T)) = L^c(R) ∩ A(H)` for a dilation `R` with embedding `A`.
pub fn piece_intersection_check(
    t: &OperatorTuple,
    dil: &crate::dilate::DilationResult,
    tol: &Tolerances,
) -> Result<IntersectionReport> {
    let hc = maximal_commuting_piece(t, tol)?;
    let lc = dil.commuting_piece(tol)?;
    let embedded_h = Subspace::span(&dil.embed, tol.rank_tol);
    let embedded_hc = Subspace::span(&(&dil.embed * hc.subspace.frame()), tol.rank_tol);
    let intersection = lc.subspace.intersection(&embedded_h, tol.angle_tol);
    let max_angle = intersection.max_angle(&embedded_hc);
    Ok(IntersectionReport {
        hc_dim: hc.subspace.dim(),
        intersection_dim: intersection.dim(),
        piece_dim: lc.subspace.dim(),
        max_angle,
        holds: intersection.dim() == embedded_hc.dim() && max_angle <= tol.angle_tol,
    })
}

/// Largest entry of `F*F − I`; used to audit frames in reports.
pub fn frame_defect(s: &Subspace) -> f64 {
    let k = s.dim();
    max_abs(&(s.frame().ad_mul(s.frame()) - Mat::identity(k, k)))
}
