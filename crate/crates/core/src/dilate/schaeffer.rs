//! The Schäffer model of the minimal isometric dilation and Cuntz-state representations.

use super::{DilationKind, DilationResult, FockDilation, FockFactor};
use crate::error::{Error, Result};
use crate::fock::{MultiIndex, TruncatedFock};
use crate::linalg::{c64, from_eigen, hermitian_eigen, identity, op_norm, rank_threshold, Mat, Vector, C64};
use crate::tuples::{OperatorTuple, TupleAction};
use crate::Tolerances;

/// `D² = [δ_ij I − T_i* T_j]` on `ℂⁿ ⊗ H`, its square root and the range of `D`.
#[derive(Debug, Clone)]
pub struct SchaefferDefect {
    pub d2: Mat,
    pub d: Mat,
    /// Orthonormal frame of `range(D)` (`nd × r`).
    pub frame: Mat,
    pub rank: usize,
}

impl SchaefferDefect {
    /// `‖D² − D‖`; zero exactly when `D` is a projection.
    pub fn projection_residual(&self) -> f64 {
        op_norm(&(&self.d2 - &self.d))
    }

    /// `D (h_1, …, h_n)` by direct matrix application.
    pub fn apply(&self, h: &[Vector]) -> Vector {
        &self.d * stack(h)
    }
}

fn stack(h: &[Vector]) -> Vector {
    let d = h.first().map(|v| v.len()).unwrap_or(0);
    let mut out = Vector::zeros(h.len() * d);
    for (i, v) in h.iter().enumerate() {
        out.rows_mut(i * d, d).copy_from(v);
    }
    out
}

pub fn schaeffer_defect(t: &OperatorTuple, tol: &Tolerances) -> Result<SchaefferDefect> {
    let excess = t.row_excess();
    if excess > tol.tol {
        return Err(Error::NotRowContraction { excess });
    }
    let (n, d) = (t.n(), t.dim());
    let mut d2 = identity(n * d);
    for i in 0..n {
        for j in 0..n {
            let block = t.matrix(i).ad_mul(t.matrix(j));
            let mut target = d2.view_mut((i * d, j * d), (d, d));
            target -= block;
        }
    }
    let (values, vectors) = hermitian_eigen(&d2);
    let largest = values.last().copied().unwrap_or(0.0);
    let scale = largest.abs().max(1.0);
    if let Some(&lowest) = values.first() {
        if lowest < -tol.tol * scale {
            return Err(Error::NotPositive {
                eigenvalue: lowest,
                tol: tol.tol * scale,
            });
        }
    }
    let thr = rank_threshold(largest, tol.rank_tol);
    let keep: Vec<usize> = (0..values.len()).rev().filter(|&k| values[k] > thr).collect();
    let mut frame = Mat::zeros(n * d, keep.len());
    let mut roots = vec![0.0; values.len()];
    for (dst, &k) in keep.iter().enumerate() {
        frame.set_column(dst, &vectors.column(k));
        roots[k] = values[k].sqrt();
    }
    let root = from_eigen(&vectors, &roots);
    Ok(SchaefferDefect {
        d2,
        d: root,
        rank: keep.len(),
        frame,
    })
}

/// `h_ij = T_j* h_i − T_i* h_j`.
pub fn h_matrix(t: &OperatorTuple, h: &[Vector]) -> Vec<Vec<Vector>> {
    let n = t.n();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| t.matrix(j).ad_mul(&h[i]) - t.matrix(i).ad_mul(&h[j]))
                .collect()
        })
        .collect()
}

/// `D(h_1, …, h_n) = Σ_{i,j} e_i ⊗ T_j h_ij`, valid for spherical unitaries.
pub fn schaeffer_defect_action(t: &OperatorTuple, h: &[Vector], tol: &Tolerances) -> Result<Vector> {
    if h.len() != t.n() || h.iter().any(|v| v.len() != t.dim()) {
        return Err(Error::Shape(format!(
            "expected {} vectors of length {}",
            t.n(),
            t.dim()
        )));
    }
    let residual = t.spherical_residual().max();
    if residual > tol.tol {
        return Err(Error::Hypothesis(format!(
            "the h_ij formula needs a commuting tuple with sum T_i T_i^* = I (residual {residual:.3e})"
        )));
    }
    let hij = h_matrix(t, h);
    let out: Vec<Vector> = (0..t.n())
        .map(|i| {
            (0..t.n()).fold(Vector::zeros(t.dim()), |acc, j| acc + t.matrix(j) * &hij[i][j])
        })
        .collect();
    Ok(stack(&out))
}

/// `Ṽ_i (h ⊕ x) = T_i h ⊕ D(e_i ⊗ h) ⊕ e_i ⊗ x` on `H ⊕ (Γ ⊗ 𝒟)`, truncated at degree `M`.
pub fn schaeffer_dilation(t: &OperatorTuple, degree: usize, tol: &Tolerances) -> Result<DilationResult> {
    let defect = schaeffer_defect(t, tol)?;
    let space = TruncatedFock::new(t.n(), degree)?;
    let d = t.dim();
    let coupling: Vec<Mat> = (0..t.n())
        .map(|i| defect.frame.ad_mul(&defect.d.columns(i * d, d)))
        .collect();
    let dilation = FockDilation::new(t.matrices().to_vec(), coupling, FockFactor::Full(space), defect.rank)?;
    let mut embed = Mat::zeros(dilation.dim(), d);
    embed.view_mut((0, 0), (d, d)).copy_from(&identity(d));
    Ok(DilationResult {
        kind: DilationKind::Schaeffer,
        original: t.clone(),
        dilation,
        embed,
        defect_rank: defect.rank,
        defect_frame: defect.frame,
        safe_degree: degree - 1,
        tail_bound: 0.0,
    })
}

/// `W^w` on `ℂ ⊕ (Γ ⊗ ℂⁿ_w)`: the Schäffer dilation of the one-dimensional tuple `w`.
pub fn cuntz_state_rep(w: &[C64], degree: usize, tol: &Tolerances) -> Result<DilationResult> {
    let norm_sq: f64 = w.iter().map(|z| z.norm_sqr()).sum();
    if (norm_sq - 1.0).abs() > tol.tol {
        return Err(Error::NotOnSphere { norm_sq });
    }
    let t = OperatorTuple::from_scalars(w)?;
    let mut dil = schaeffer_dilation(&t, degree, tol)?;
    dil.kind = DilationKind::CuntzState;
    Ok(dil)
}

/// `⟨e, R^α (R^β)* e⟩` for the first embedded basis vector `e`.
pub fn vacuum_moment(dil: &DilationResult, alpha: &MultiIndex, beta: &MultiIndex) -> C64 {
    let e = dil.embed.column(0).into_owned();
    let a = dil.dilation.apply_word_adjoint(alpha, &e);
    let b = dil.dilation.apply_word_adjoint(beta, &e);
    a.dotc(&b)
}

/// `w^α · conj(w)^β`.
pub fn point_moment(w: &[C64], alpha: &MultiIndex, beta: &MultiIndex) -> C64 {
    let a = alpha.letters().iter().fold(c64(1.0, 0.0), |acc, &l| acc * w[l]);
    let b = beta.letters().iter().fold(c64(1.0, 0.0), |acc, &l| acc * w[l].conj());
    a * b
}
