//! The chain `x̃_m` used to show that a spherical unitary is its own dilation's commuting piece.
//!
//! With `h_ij = T_j* h_i − T_i* h_j` and `D(e_j ⊗ g)` written in defect
//! coordinates as `J_j g`,
//!
//! ```text
//! x̃_0 = D(h),   x̃_m = Σ e_{i₁}⊗…⊗e_{i_{m−1}}⊗e_i ⊗ D(e_j ⊗ T_{i₁}*…T_{i_{m−1}}* h_ij)
//! ```
//!
//! Each `x̃_m` has norm one, `Σ_{i<j} [Ṽ_i, Ṽ_j] h_ij = x̃_0 + x̃_1`, and for `m ≥ 2`
//!
//! ```text
//! Σ_{i₁…i_{m−1}} Ṽ_{i₁}…Ṽ_{i_{m−1}} Σ_{i,j} [Ṽ_i, Ṽ_j] T_{i₁}*…T_{i_{m−2}}* T_j* h_{i_{m−1} i} = x̃_{m−1} − x̃_m.
//! ```

use super::CheckReport;
use crate::dilate::{h_matrix, schaeffer_defect, schaeffer_dilation, FockDilation};
use crate::error::{Error, Result};
use crate::fock::{MultiIndex, TruncatedFock};
use crate::linalg::{c64, rank_threshold, vec_norm, Vector};
use crate::tuples::{OperatorTuple, TupleAction};
use crate::Tolerances;

/// Embeds a base vector into `H ⊕ (Γ ⊗ 𝒟)`.
fn embed_base(dil: &FockDilation, h: &Vector) -> Vector {
    let mut out = Vector::zeros(dil.dim());
    out.rows_mut(0, h.len()).copy_from(h);
    out
}

/// `(Ṽ_iṼ_j − Ṽ_jṼ_i) x`.
fn commutator(dil: &FockDilation, i: usize, j: usize, x: &Vector) -> Vector {
    dil.apply(i, &dil.apply(j, x)) - dil.apply(j, &dil.apply(i, x))
}

/// `T_{u₁}* ⋯ T_{u_k}* g`.
fn adjoint_product(t: &OperatorTuple, word: &[usize], g: &Vector) -> Vector {
    word.iter().rev().fold(g.clone(), |acc, &l| t.matrix(l).ad_mul(&acc))
}

/// Chain vectors `x̃_0..=x̃_M` in the ambient coordinates of the dilation.
fn chain_vectors(t: &OperatorTuple, dil: &FockDilation, space: &TruncatedFock, h: &[Vector], hij: &[Vec<Vector>]) -> Result<Vec<Vector>> {
    let b = dil.base_dim();
    let r = dil.defect_dim();
    let coupling = dil.coupling();
    let defect_coords = |g: &[Vector]| -> Vector {
        g.iter()
            .enumerate()
            .fold(Vector::zeros(r), |acc, (j, v)| acc + &coupling[j] * v)
    };
    let mut out = Vec::with_capacity(space.degree() + 1);
    let mut x0 = Vector::zeros(dil.dim());
    x0.rows_mut(b, r).copy_from(&defect_coords(h));
    out.push(x0);
    for m in 1..=space.degree() {
        let mut x = Vector::zeros(dil.dim());
        for idx in space.offset(m - 1)..space.offset(m) {
            let prefix = space.word(idx);
            for (i, row) in hij.iter().enumerate() {
                let g: Vec<Vector> = row.iter().map(|v| adjoint_product(t, prefix.letters(), v)).collect();
                let word = prefix.concat(&MultiIndex::new(vec![i]));
                let pos = space.index(&word)?;
                x.rows_mut(b + pos * r, r).copy_from(&defect_coords(&g));
            }
        }
        out.push(x);
    }
    Ok(out)
}

/// Verifies the chain norms and both telescoping identities for `(T, h)`.
///
/// `h` is rescaled so that `‖D(h)‖ = 1`. Requires a spherical unitary; a
/// single operator has no commutators and yields a vacuous report.
pub fn proof_chain_check(
    t: &OperatorTuple,
    h: &[Vector],
    degree: usize,
    norm_tol: f64,
    identity_tol: f64,
    tol: &Tolerances,
) -> Result<CheckReport> {
    let n = t.n();
    let d = t.dim();
    if h.len() != n || h.iter().any(|v| v.len() != d) {
        return Err(Error::Shape(format!("expected {n} vectors of length {d}")));
    }
    if degree < 2 {
        return Err(Error::InvalidParameter(format!("degree must be at least 2, got {degree}")));
    }
    let mut report = CheckReport::new("chain");
    report
        .input("n", n)
        .input("dim", d)
        .input("degree", degree)
        .tolerance("norm", norm_tol)
        .tolerance("identity", identity_tol);
    if n == 1 {
        report.note("vacuous: with one operator every h_ij vanishes and the defect is zero");
        return Ok(report);
    }
    let spherical = t.spherical_residual().max();
    if spherical > tol.tol {
        return Err(Error::Hypothesis(format!(
            "the chain needs a spherical unitary (residual {spherical:.3e})"
        )));
    }
    let defect = schaeffer_defect(t, tol)?;
    let raw = vec_norm(&defect.apply(h));
    if raw <= rank_threshold(0.0, tol.rank_tol) {
        return Err(Error::Hypothesis("D(h) vanishes, so it cannot be normalized".into()));
    }
    let scale = c64(1.0 / raw, 0.0);
    let h: Vec<Vector> = h.iter().map(|v| v * scale).collect();
    report.residual("input_defect_norm", raw);

    let result = schaeffer_dilation(t, degree, tol)?;
    let dil = &result.dilation;
    let space = result.fock().clone();
    let hij = h_matrix(t, &h);
    let x = chain_vectors(t, dil, &space, &h, &hij)?;

    let mut worst_norm: f64 = 0.0;
    for (m, xm) in x.iter().enumerate() {
        let dev = (vec_norm(xm) - 1.0).abs();
        report.residual(&format!("norm_deviation_m{m}"), dev);
        if m >= 1 {
            worst_norm = worst_norm.max(dev);
        }
    }
    report.assert_le("max_m |‖x_m‖ − 1|", worst_norm, norm_tol);

    let mut lhs = Vector::zeros(dil.dim());
    for i in 0..n {
        for j in (i + 1)..n {
            lhs += commutator(dil, i, j, &embed_base(dil, &hij[i][j]));
        }
    }
    let first = vec_norm(&(lhs - &x[0] - &x[1]));
    report.residual("identity_m1", first);
    let mut worst_identity = first;

    for m in 2..=degree {
        let mut lhs = Vector::zeros(dil.dim());
        for idx in space.offset(m - 1)..space.offset(m) {
            let word = space.word(idx);
            let letters = word.letters();
            let (&last, head) = letters.split_last().expect("word of length m - 1 ≥ 1");
            let mut inner = Vector::zeros(dil.dim());
            for i in 0..n {
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    let g = t.matrix(j).ad_mul(&hij[last][i]);
                    let g = adjoint_product(t, head, &g);
                    inner += commutator(dil, i, j, &embed_base(dil, &g));
                }
            }
            lhs += dil.apply_word(&word, &inner);
        }
        let res = vec_norm(&(lhs - &x[m - 1] + &x[m]));
        report.residual(&format!("identity_m{m}"), res);
        worst_identity = worst_identity.max(res);
    }
    report.assert_le("telescoping identities", worst_identity, identity_tol);
    Ok(report)
}
