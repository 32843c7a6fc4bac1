//! Fock-space dilations of pure tuples and the Poisson transform.

use serde::{Deserialize, Serialize};

use super::{DilationKind, DilationResult, FockDilation, FockFactor, MAX_AMBIENT_DIM};
use crate::error::{Error, Result};
use crate::fock::{symmetric_basis, words_up_to, SymmetricBasis, TruncatedFock};
use crate::linalg::{c64, identity, op_norm, psd_sqrt, Mat};
use crate::tuples::OperatorTuple;
use crate::Tolerances;

/// `Σ_{m ≤ M} Φ^m(Δ²)`, which equals `A*A` for the embedding truncated at degree `M`.
pub fn embedding_gram(t: &OperatorTuple, degree: usize) -> Mat {
    let mut term = identity(t.dim()) - t.row_gram();
    let mut acc = term.clone();
    for _ in 0..degree {
        term = t.phi(&term);
        acc += &term;
    }
    acc
}

fn check_pure(t: &OperatorTuple, degree: usize, tol: f64) -> Result<f64> {
    let tail_bound = t.decay_sequence(degree + 1)[degree + 1];
    if tail_bound > tol {
        return Err(Error::NotPure {
            degree,
            tail_bound,
            tol,
        });
    }
    Ok(tail_bound)
}

/// `(T^α)*` for every word of length `≤ M`, indexed like the truncated Fock basis.
fn adjoint_words(t: &OperatorTuple, space: &TruncatedFock) -> Vec<Mat> {
    let mut out: Vec<Mat> = Vec::with_capacity(space.dim());
    out.push(identity(t.dim()));
    for idx in 1..space.dim() {
        // e^{(l, β)}: (T_l T^β)* = (T^β)* T_l*
        let (l, rest) = space.parent(idx).expect("non-vacuum");
        out.push(&out[rest] * t.matrix(l).adjoint());
    }
    out
}

/// `A h = Σ_{|α| ≤ M} e^α ⊗ Δ_T (T^α)* h`, written in defect-frame coordinates.
pub fn pure_embedding(t: &OperatorTuple, degree: usize, tol: &Tolerances) -> Result<DilationResult> {
    let tail_bound = check_pure(t, degree, tol.tol)?;
    let defect = t.defect(tol.tol, tol.rank_tol)?;
    if defect.defect_rank == 0 {
        return Err(Error::Hypothesis("defect operator vanishes; a pure tuple on a nonzero space has nonzero defect".into()));
    }
    let space = TruncatedFock::new(t.n(), degree)?;
    let r = defect.defect_rank;
    let ambient = space.dim().saturating_mul(r);
    if ambient > MAX_AMBIENT_DIM {
        return Err(Error::TooLarge {
            dim: ambient,
            limit: MAX_AMBIENT_DIM,
        });
    }
    let g = defect.defect_frame.ad_mul(&defect.delta);
    let words = adjoint_words(t, &space);
    let d = t.dim();
    let mut embed = Mat::zeros(ambient, d);
    for (idx, w) in words.iter().enumerate() {
        embed.view_mut((idx * r, 0), (r, d)).copy_from(&(&g * w));
    }
    let dilation = FockDilation::shift(FockFactor::Full(space.clone()), r)?;
    Ok(DilationResult {
        kind: DilationKind::PureFullFock,
        original: t.clone(),
        dilation,
        embed,
        defect_frame: defect.defect_frame,
        defect_rank: r,
        safe_degree: degree - 1,
        tail_bound,
    })
}

/// `Σ_μ e_μ ⊗ √(#μ) G (T^μ)* Q` over the symmetric basis vectors `e_μ`, where
/// `#μ` counts the words with letter multiset `μ`.
///
/// For a commuting tuple this is the pure embedding projected to `Γ_s ⊗ ℂ^r`;
/// for a general tuple it is that projection restricted to a co-invariant
/// subspace `span(Q)` on which the compression commutes.
pub(crate) fn symmetric_embedding(t: &OperatorTuple, q: &Mat, sym: &SymmetricBasis, g: &Mat) -> Result<Mat> {
    let r = g.nrows();
    let mut out = Mat::zeros(sym.dim() * r, q.ncols());
    for (s, v) in sym.vectors().iter().enumerate() {
        let w = t.apply_word(&v.multiset)?;
        let weight = c64((v.support.len() as f64).sqrt(), 0.0);
        let block = g * w.ad_mul(q) * weight;
        out.view_mut((s * r, 0), (r, q.ncols())).copy_from(&block);
    }
    Ok(out)
}

/// Standard commuting dilation `(S ⊗ I)` of a commuting pure tuple.
///
/// Built directly on `Γ_s ⊗ 𝒟`: for commuting `T` the pure embedding has
/// the same component along every word of a multiset, so it lies in the
/// symmetric part, which [`symmetric_leakage`] confirms on the full space.
pub fn standard_commuting_dilation_pure(t: &OperatorTuple, degree: usize, tol: &Tolerances) -> Result<DilationResult> {
    let residual = t.commutator_residual();
    if residual > tol.tol {
        return Err(Error::NotCommuting { residual });
    }
    let tail_bound = check_pure(t, degree, tol.tol)?;
    let defect = t.defect(tol.tol, tol.rank_tol)?;
    if defect.defect_rank == 0 {
        return Err(Error::Hypothesis("defect operator vanishes; a pure tuple on a nonzero space has nonzero defect".into()));
    }
    let space = TruncatedFock::new(t.n(), degree)?;
    let r = defect.defect_rank;
    let fock = FockFactor::symmetric(&space);
    let ambient = fock.dim().saturating_mul(r);
    if ambient > MAX_AMBIENT_DIM {
        return Err(Error::TooLarge {
            dim: ambient,
            limit: MAX_AMBIENT_DIM,
        });
    }
    let g = defect.defect_frame.ad_mul(&defect.delta);
    let embed = match &fock {
        FockFactor::Symmetric { basis, .. } => symmetric_embedding(t, &identity(t.dim()), basis, &g)?,
        FockFactor::Full(_) => unreachable!("built as a symmetric factor"),
    };
    let dilation = FockDilation::shift(fock, r)?;
    Ok(DilationResult {
        kind: DilationKind::PureSymmetricFock,
        original: t.clone(),
        dilation,
        embed,
        defect_frame: defect.defect_frame,
        defect_rank: r,
        safe_degree: degree - 1,
        tail_bound,
    })
}

/// `‖(I − P_{Γ_s ⊗ 𝒟}) A‖` for a pure embedding.
pub fn symmetric_leakage(full: &DilationResult) -> f64 {
    let space = full.fock();
    let sym = symmetric_basis(space);
    let r = full.defect_rank;
    let d = full.original.dim();
    let mut leak = full.embed.clone();
    for v in sym.vectors() {
        let mut avg = Mat::zeros(r, d);
        for &idx in &v.support {
            avg += full.embed.view((idx * r, 0), (r, d));
        }
        avg /= crate::linalg::c64(v.support.len() as f64, 0.0);
        for &idx in &v.support {
            let mut block = leak.view_mut((idx * r, 0), (r, d));
            block -= &avg;
        }
    }
    op_norm(&leak)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoissonReport {
    pub r: f64,
    pub degree: usize,
    pub word_len: usize,
    /// `‖ψ_r(I) − I‖`.
    pub identity_deviation: f64,
    /// `max ‖ψ_r(V^α (V^β)*) − r^{|α|+|β|} T^α (T^β)*‖` over the checked words.
    pub max_deviation: f64,
    /// `‖Φ_r^{M+1−word_len}(I)‖`, which bounds every checked deviation.
    pub tail_bound: f64,
    pub pairs_checked: usize,
}

/// Compresses `V^α (V^β)* ⊗ I` through `A_r`, the degree-`M` embedding of `rT`.
///
/// `A_r* (V^α (V^β)* ⊗ I) A_r = (rT)^α G_k ((rT)^β)*` with
/// `G_k = Σ_{m ≤ k} Φ_r^m(Δ_r²)` and `k = M − max(|α|, |β|)`: only the Fock
/// components that survive both annihilations contribute.
pub fn poisson_check(t: &OperatorTuple, r: f64, degree: usize, word_len: usize) -> Result<PoissonReport> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::InvalidParameter(format!("r = {r} is outside (0, 1)")));
    }
    if word_len > degree {
        return Err(Error::InvalidParameter(format!(
            "word length {word_len} exceeds truncation degree {degree}"
        )));
    }
    let excess = t.row_excess();
    if excess > 1e-10 {
        return Err(Error::NotRowContraction { excess });
    }
    let rt = t.scaled(r);
    let d = t.dim();
    let delta_sq = {
        let delta = psd_sqrt(&(identity(d) - rt.row_gram()), 1e-12)?;
        &delta * &delta
    };
    // partial sums G_k for k = 0..=M
    let mut grams = Vec::with_capacity(degree + 1);
    let mut term = delta_sq;
    let mut acc = term.clone();
    grams.push(acc.clone());
    for _ in 0..degree {
        term = rt.phi(&term);
        acc += &term;
        grams.push(acc.clone());
    }
    let words = words_up_to(t.n(), word_len)?;
    let rt_words: Vec<Mat> = words.iter().map(|w| rt.apply_word(w)).collect::<Result<_>>()?;
    let t_words: Vec<Mat> = words.iter().map(|w| t.apply_word(w)).collect::<Result<_>>()?;
    let mut max_deviation: f64 = 0.0;
    let mut pairs = 0;
    for (a, wa) in words.iter().enumerate() {
        for (b, wb) in words.iter().enumerate() {
            let k = degree - wa.len().max(wb.len());
            let psi = &rt_words[a] * &grams[k] * rt_words[b].adjoint();
            let target = (&t_words[a] * t_words[b].adjoint()) * crate::linalg::c64(r.powi((wa.len() + wb.len()) as i32), 0.0);
            max_deviation = max_deviation.max(op_norm(&(psi - target)));
            pairs += 1;
        }
    }
    let identity_deviation = op_norm(&(&grams[degree] - identity(d)));
    let tail_bound = rt.decay_sequence(degree + 1 - word_len)[degree + 1 - word_len];
    Ok(PoissonReport {
        r,
        degree,
        word_len,
        identity_deviation,
        max_deviation,
        tail_bound,
        pairs_checked: pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dilate::FockDilation;
    use crate::linalg::max_abs;
    use crate::sample;
    use crate::tuples::TupleAction;

    fn loose() -> Tolerances {
        Tolerances::default().with_tol(1e-6)
    }

    #[test]
    fn half_pair_gram_closed_form() {
        let t = OperatorTuple::from_scalars(&[c64(0.5, 0.0), c64(0.5, 0.0)]).unwrap();
        let g = embedding_gram(&t, 30);
        assert!((g[(0, 0)].re - (1.0 - 0.5f64.powi(31))).abs() < 1e-15);
    }

    #[test]
    fn half_pair_dense_embedding_small_degree() {
        let t = OperatorTuple::from_scalars(&[c64(0.5, 0.0), c64(0.5, 0.0)]).unwrap();
        let tol = Tolerances::default().with_tol(1e-2);
        let dil = pure_embedding(&t, 6, &tol).unwrap();
        let norm_sq = dil.embed.norm_squared();
        assert!((norm_sq - (1.0 - 0.5f64.powi(7))).abs() < 1e-14);
    }

    #[test]
    fn zero_tuple_embeds_into_vacuum() {
        let t = OperatorTuple::zero(2, 2).unwrap();
        let dil = pure_embedding(&t, 3, &Tolerances::default()).unwrap();
        let top = dil.embed.rows(0, 2).into_owned();
        assert!(max_abs(&(top.ad_mul(&top) - identity(2))) < 1e-15);
        assert!(max_abs(&dil.embed.rows(2, dil.embed.nrows() - 2).into_owned()) == 0.0);
        let inv = dil.invariants(2).unwrap();
        assert!(inv.isometry < 1e-15 && inv.adjoint < 1e-15 && inv.moment < 1e-15);
    }

    #[test]
    fn non_pure_names_tail_bound() {
        let err = pure_embedding(&crate::tuples::flip_pair(), 4, &Tolerances::default()).unwrap_err();
        assert!(matches!(err, Error::NotPure { .. }));
        assert!(err.to_string().contains("tail_bound"));
    }

    #[test]
    fn nilpotent_commuting_embedding_is_exact() {
        let t = sample::random_nilpotent_commuting(&mut sample::rng(5), 2, 3, 0.05);
        let full = pure_embedding(&t, 4, &Tolerances::default()).unwrap();
        assert!(symmetric_leakage(&full) < 1e-12);
        let inv = full.invariants(3).unwrap();
        assert!(inv.isometry < 1e-12 && inv.adjoint < 1e-12 && inv.moment < 1e-12);
        let sym = standard_commuting_dilation_pure(&t, 4, &Tolerances::default()).unwrap();
        let inv = sym.invariants(3).unwrap();
        assert!(inv.isometry < 1e-12 && inv.adjoint < 1e-12 && inv.moment < 1e-12);
    }

    #[test]
    fn compression_reproduces_tuple() {
        let t = sample::random_commuting(&mut sample::rng(8), 2, 2, 0.6).scaled(0.4);
        let dil = pure_embedding(&t, 12, &loose()).unwrap();
        for i in 0..2 {
            let c = dil.embed.ad_mul(&dil.dilation.apply_mat(i, &dil.embed));
            assert!(op_norm(&(c - t.matrix(i))) <= 10.0 * dil.tail_bound + 1e-12);
        }
    }

    #[test]
    fn poisson_recursion_matches_dense_embedding() {
        let t = sample::random_row_contraction(&mut sample::rng(9), 2, 2, 0.05);
        let r = 0.5;
        let degree = 6;
        let report = poisson_check(&t, r, degree, 2).unwrap();
        let dil = pure_embedding(&t.scaled(r), degree, &Tolerances::default().with_tol(1e-3)).unwrap();
        let shift: &FockDilation = &dil.dilation;
        let words = words_up_to(2, 2).unwrap();
        let mut worst: f64 = 0.0;
        for a in &words {
            for b in &words {
                let xa = dil.embed.clone();
                let xa = a.letters().iter().fold(xa, |acc, &l| shift.apply_adjoint_mat(l, &acc));
                let xb = b.letters().iter().fold(dil.embed.clone(), |acc, &l| shift.apply_adjoint_mat(l, &acc));
                let psi = xa.ad_mul(&xb);
                let target = t.apply_word(a).unwrap() * t.apply_word(b).unwrap().adjoint()
                    * c64(r.powi((a.len() + b.len()) as i32), 0.0);
                worst = worst.max(op_norm(&(psi - target)));
            }
        }
        assert!((worst - report.max_deviation).abs() < 1e-13);
    }

    #[test]
    fn poisson_first_order() {
        let t = sample::random_row_contraction(&mut sample::rng(10), 2, 3, 0.05);
        let report = poisson_check(&t, 0.3, 30, 1).unwrap();
        assert!(report.max_deviation < 1e-12);
        assert!(report.identity_deviation < 1e-12);
        assert!(poisson_check(&t, 1.0, 30, 1).is_err());
    }
}
