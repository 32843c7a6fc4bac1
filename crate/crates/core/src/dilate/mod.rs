//! Concrete dilations on truncated Fock spaces.
//!
//! Every dilation here acts on `B ⊕ (F ⊗ ℂ^r)` where `B` is an optional base
//! copy of the original space, `F` is a truncated full or symmetric Fock
//! space and `r` the dimension of a defect space. Fock coordinates are laid
//! out as `fock_index * r + k`. The tuple is
//!
//! ```text
//! R_l (h ⊕ x) = T_l h ⊕ (ω ⊗ J_l h + (V_l ⊗ I) x)
//! ```
//!
//! with `J_l: B → ℂ^r` a coupling into the vacuum block.

mod pure;
mod schaeffer;

pub use pure::{embedding_gram, poisson_check, pure_embedding, standard_commuting_dilation_pure, PoissonReport};
pub use pure::symmetric_leakage;
pub(crate) use pure::symmetric_embedding;
pub use schaeffer::{
    cuntz_state_rep, h_matrix, point_moment, schaeffer_defect, schaeffer_defect_action, schaeffer_dilation,
    vacuum_moment, SchaefferDefect,
};

use nalgebra::DMatrixView;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{symmetric_basis, symmetric_shift, words_up_to, MultiIndex, SymmetricBasis, TruncatedFock};
use crate::linalg::{identity, op_norm, FrameBuilder, Mat, Vector, C64};
use crate::piece::{maximal_commuting_piece_with, PieceOptions};
use crate::subspace::Subspace;
use crate::tuples::{OperatorTuple, TupleAction};
use crate::Tolerances;

/// Largest ambient dimension a dilation may have.
pub const MAX_AMBIENT_DIM: usize = 1 << 18;

/// Largest reduced dimension for which the commutator-closure cross-check runs.
pub const CLOSURE_CHECK_LIMIT: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DilationKind {
    PureFullFock,
    PureSymmetricFock,
    Schaeffer,
    CuntzState,
}

/// The Fock factor of the ambient space.
#[derive(Debug, Clone)]
pub enum FockFactor {
    Full(TruncatedFock),
    Symmetric {
        basis: SymmetricBasis,
        shift_t: Vec<Mat>,
        shift_conj: Vec<Mat>,
    },
}

impl FockFactor {
    pub fn symmetric(space: &TruncatedFock) -> Self {
        let basis = symmetric_basis(space);
        let shift = symmetric_shift(&basis);
        FockFactor::Symmetric {
            shift_t: shift.matrices().iter().map(|s| s.transpose()).collect(),
            shift_conj: shift.matrices().iter().map(|s| s.map(|z| z.conj())).collect(),
            basis,
        }
    }

    pub fn space(&self) -> &TruncatedFock {
        match self {
            FockFactor::Full(space) => space,
            FockFactor::Symmetric { basis, .. } => basis.parent(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            FockFactor::Full(space) => space.dim(),
            FockFactor::Symmetric { basis, .. } => basis.dim(),
        }
    }

    /// Number of Fock basis vectors of degree at most `m`.
    pub fn dim_up_to(&self, m: usize) -> usize {
        match self {
            FockFactor::Full(space) => space.dim_up_to(m),
            FockFactor::Symmetric { basis, .. } => basis.dim_up_to(m),
        }
    }

    fn apply(&self, l: usize, x: &[C64], r: usize, out: &mut [C64], adjoint: bool) {
        match self {
            FockFactor::Full(space) => {
                if adjoint {
                    space.annihilate_blocked(l, x, r, out)
                } else {
                    space.create_blocked(l, x, r, out)
                }
            }
            FockFactor::Symmetric { shift_t, shift_conj, basis } => {
                let f = basis.dim();
                let xm = DMatrixView::from_slice(x, r, f);
                let y = if adjoint { xm * &shift_conj[l] } else { xm * &shift_t[l] };
                out.copy_from_slice(y.as_slice());
            }
        }
    }
}

/// `B ⊕ (F ⊗ ℂ^r)` with the tuple described in the module docs.
#[derive(Debug, Clone)]
pub struct FockDilation {
    n: usize,
    base: Vec<Mat>,
    coupling: Vec<Mat>,
    fock: FockFactor,
    r: usize,
}

impl FockDilation {
    pub fn new(base: Vec<Mat>, coupling: Vec<Mat>, fock: FockFactor, r: usize) -> Result<Self> {
        let n = fock.space().n();
        if base.len() != n || coupling.len() != n {
            return Err(Error::Shape(format!(
                "expected {n} base operators and couplings, got {} and {}",
                base.len(),
                coupling.len()
            )));
        }
        let b = base[0].nrows();
        for (t, j) in base.iter().zip(&coupling) {
            if t.shape() != (b, b) || j.shape() != (r, b) {
                return Err(Error::Shape("inconsistent base or coupling blocks".into()));
            }
        }
        let dim = b + fock.dim() * r;
        if dim > MAX_AMBIENT_DIM {
            return Err(Error::TooLarge {
                dim,
                limit: MAX_AMBIENT_DIM,
            });
        }
        Ok(Self {
            n,
            base,
            coupling,
            fock,
            r,
        })
    }

    /// `V_l ⊗ I_r` (or `S_l ⊗ I_r`) with no base part.
    pub fn shift(fock: FockFactor, r: usize) -> Result<Self> {
        let n = fock.space().n();
        Self::new(vec![Mat::zeros(0, 0); n], vec![Mat::zeros(r, 0); n], fock, r)
    }

    pub fn base_dim(&self) -> usize {
        self.base[0].nrows()
    }

    pub fn defect_dim(&self) -> usize {
        self.r
    }

    pub fn fock(&self) -> &FockFactor {
        &self.fock
    }

    pub fn base(&self) -> &[Mat] {
        &self.base
    }

    pub fn coupling(&self) -> &[Mat] {
        &self.coupling
    }

    /// Dense copy of the whole tuple.
    pub fn to_tuple(&self) -> Result<OperatorTuple> {
        OperatorTuple::new((0..self.n).map(|i| self.to_dense(i)).collect())
    }

    /// Orthonormal frame of `B ⊕ (Γ_s ⊗ ℂ^r)`, the smallest co-invariant
    /// subspace that can contain the commuting piece, as a map from reduced
    /// coordinates.
    fn reduced_basis(&self) -> Option<SymmetricBasis> {
        match &self.fock {
            FockFactor::Full(space) => Some(symmetric_basis(space)),
            FockFactor::Symmetric { .. } => None,
        }
    }

    /// Lifts columns in reduced coordinates back to the ambient space.
    fn lift(&self, sym: Option<&SymmetricBasis>, y: &Mat) -> Mat {
        let Some(sym) = sym else {
            return y.clone();
        };
        let b = self.base_dim();
        let r = self.r;
        let mut out = Mat::zeros(self.dim(), y.ncols());
        for c in 0..y.ncols() {
            for k in 0..b {
                out[(k, c)] = y[(k, c)];
            }
            for (s, v) in sym.vectors().iter().enumerate() {
                for &idx in &v.support {
                    for k in 0..r {
                        out[(b + idx * r + k, c)] = y[(b + s * r + k, c)] * v.coefficient;
                    }
                }
            }
        }
        out
    }

    /// The compression to `B ⊕ (Γ_s ⊗ ℂ^r)`, dense.
    fn reduced_tuple(&self, sym: Option<&SymmetricBasis>) -> Result<OperatorTuple> {
        let Some(sym) = sym else {
            return self.to_tuple();
        };
        let b = self.base_dim();
        let r = self.r;
        let u = b + sym.dim() * r;
        let shift = symmetric_shift(sym);
        let id_r = identity(r);
        let matrices = (0..self.n)
            .map(|l| {
                let mut m = Mat::zeros(u, u);
                m.view_mut((0, 0), (b, b)).copy_from(&self.base[l]);
                m.view_mut((b, 0), (r, b)).copy_from(&self.coupling[l]);
                m.view_mut((b, b), (u - b, u - b)).copy_from(&shift.matrix(l).kronecker(&id_r));
                m
            })
            .collect();
        OperatorTuple::new(matrices)
    }

    /// Maximal commuting piece, computed on `B ⊕ (Γ_s ⊗ ℂ^r)`.
    ///
    /// Every vector of the commuting piece has a permutation-symmetric Fock
    /// part, and that subspace is co-invariant, so the adjoint-kernel
    /// iteration can run on the reduced tuple without loss.
    pub fn commuting_piece(&self, tol: &Tolerances) -> Result<DilationPiece> {
        let sym = self.reduced_basis();
        let reduced = self.reduced_tuple(sym.as_ref())?;
        let cross_check = reduced.dim() <= CLOSURE_CHECK_LIMIT;
        let result = maximal_commuting_piece_with(&reduced, tol, PieceOptions { cross_check })?;
        let mut warnings = result.warnings.clone();
        if !cross_check {
            warnings.push(format!(
                "closure cross-check skipped: reduced dimension {} exceeds {}",
                reduced.dim(),
                CLOSURE_CHECK_LIMIT
            ));
        }
        let frame = self.lift(sym.as_ref(), result.subspace.frame());
        Ok(DilationPiece {
            subspace: Subspace::new(frame, tol.tol.max(1e-12))?,
            piece: result.piece,
            residual: result.residual,
            reduced_dim: reduced.dim(),
            closure_dim: result.closure_dim,
            duality_residual: result.duality_residual,
            warnings,
        })
    }
}

impl TupleAction for FockDilation {
    fn arity(&self) -> usize {
        self.n
    }

    fn dim(&self) -> usize {
        self.base_dim() + self.fock.dim() * self.r
    }

    fn apply(&self, l: usize, x: &Vector) -> Vector {
        let b = self.base_dim();
        let mut out = Vector::zeros(self.dim());
        let xs = x.as_slice();
        {
            let o = out.as_mut_slice();
            self.fock.apply(l, &xs[b..], self.r, &mut o[b..], false);
        }
        if b > 0 {
            let h = x.rows(0, b);
            out.rows_mut(0, b).copy_from(&(&self.base[l] * h));
            let j = &self.coupling[l] * h;
            let mut vac = out.rows_mut(b, self.r);
            vac += j;
        }
        out
    }

    fn apply_adjoint(&self, l: usize, x: &Vector) -> Vector {
        let b = self.base_dim();
        let mut out = Vector::zeros(self.dim());
        let xs = x.as_slice();
        {
            let o = out.as_mut_slice();
            self.fock.apply(l, &xs[b..], self.r, &mut o[b..], true);
        }
        if b > 0 {
            let h = x.rows(0, b);
            let vac = x.rows(b, self.r);
            let v = self.base[l].ad_mul(&h) + self.coupling[l].ad_mul(&vac);
            out.rows_mut(0, b).copy_from(&v);
        }
        out
    }
}

/// Maximal commuting piece of a Fock dilation, in ambient coordinates.
#[derive(Debug, Clone)]
pub struct DilationPiece {
    pub subspace: Subspace,
    pub piece: OperatorTuple,
    pub residual: f64,
    pub reduced_dim: usize,
    pub closure_dim: Option<usize>,
    pub duality_residual: Option<f64>,
    pub warnings: Vec<String>,
}

/// A dilation together with the embedding of the original space.
#[derive(Debug, Clone)]
pub struct DilationResult {
    pub kind: DilationKind,
    pub original: OperatorTuple,
    pub dilation: FockDilation,
    /// Isometry from the original space into the ambient space (`ambient × d`).
    pub embed: Mat,
    /// Orthonormal frame of the defect space in its natural home
    /// (`d × r` for pure embeddings, `nd × r` for the Schäffer model).
    pub defect_frame: Mat,
    pub defect_rank: usize,
    /// Largest word length on which truncation does not affect the identities.
    pub safe_degree: usize,
    /// `‖Φ^{M+1}(I)‖` for pure embeddings, zero otherwise.
    pub tail_bound: f64,
}

/// Measured residuals of the three dilation invariants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DilationInvariants {
    /// `‖E*E − I‖`.
    pub isometry: f64,
    /// `max_i ‖R_i* E − E T_i*‖`.
    pub adjoint: f64,
    /// `max ‖E* R^α (R^β)* E − T^α (T^β)*‖` over `|α|, |β| ≤ moment_degree`.
    pub moment: f64,
    pub moment_degree: usize,
}

impl DilationResult {
    pub fn ambient_dim(&self) -> usize {
        self.dilation.dim()
    }

    pub fn fock(&self) -> &TruncatedFock {
        self.dilation.fock().space()
    }

    pub fn commuting_piece(&self, tol: &Tolerances) -> Result<DilationPiece> {
        self.dilation.commuting_piece(tol)
    }

    /// `(R^α)* E` for every word up to `max_len`, in graded order.
    pub fn adjoint_orbit(&self, max_len: usize) -> Result<Vec<(MultiIndex, Mat)>> {
        let n = self.original.n();
        let words = words_up_to(n, max_len)?;
        let mut out: Vec<(MultiIndex, Mat)> = Vec::with_capacity(words.len());
        let (mut level_start, mut prev_start) = (0usize, 0usize);
        for (idx, w) in words.into_iter().enumerate() {
            if idx > 0 && w.len() != out[idx - 1].0.len() {
                prev_start = level_start;
                level_start = idx;
            }
            let m = match w.letters().last() {
                None => self.embed.clone(),
                Some(&last) => {
                    // (R^{(α, l)})* = R_l* (R^α)*, and α sits at rank / n of the previous level
                    let prefix = prev_start + (idx - level_start) / n;
                    self.dilation.apply_adjoint_mat(last, &out[prefix].1)
                }
            };
            out.push((w, m));
        }
        Ok(out)
    }

    pub fn invariants(&self, moment_degree: usize) -> Result<DilationInvariants> {
        let d = self.original.dim();
        let isometry = op_norm(&(self.embed.ad_mul(&self.embed) - identity(d)));
        let mut adjoint: f64 = 0.0;
        for i in 0..self.original.n() {
            let lhs = self.dilation.apply_adjoint_mat(i, &self.embed);
            let rhs = &self.embed * self.original.matrix(i).adjoint();
            adjoint = adjoint.max(op_norm(&(lhs - rhs)));
        }
        let orbit = self.adjoint_orbit(moment_degree)?;
        let t_words: Vec<Mat> = orbit
            .iter()
            .map(|(w, _)| self.original.apply_word(w))
            .collect::<Result<_>>()?;
        let mut moment: f64 = 0.0;
        for (a, (_, xa)) in orbit.iter().enumerate() {
            for (b, (_, xb)) in orbit.iter().enumerate() {
                let lhs = xa.ad_mul(xb);
                let rhs = &t_words[a] * t_words[b].adjoint();
                moment = moment.max(op_norm(&(lhs - rhs)));
            }
        }
        Ok(DilationInvariants {
            isometry,
            adjoint,
            moment,
            moment_degree,
        })
    }

    /// Coordinate frame of `B ⊕ (F_{≤ safe_degree} ⊗ ℂ^r)`, on which the
    /// truncated tuple obeys the same relations as the untruncated one.
    pub fn window_frame(&self) -> Mat {
        let dil = &self.dilation;
        let k = dil.base_dim() + dil.fock().dim_up_to(self.safe_degree) * dil.defect_dim();
        Mat::identity(self.ambient_dim(), k)
    }

    /// Dimension of `span{R^α E h : |α| ≤ max_len}`.
    pub fn orbit_dim(&self, max_len: usize, rank_tol: f64) -> usize {
        forward_orbit(&self.dilation, &self.embed, max_len, rank_tol).ncols()
    }
}

/// Orthonormal frame of `span{R^α x : x ∈ span(start), |α| ≤ max_len}`.
pub fn forward_orbit<A: TupleAction + ?Sized>(r: &A, start: &Mat, max_len: usize, rank_tol: f64) -> Mat {
    let mut fb = FrameBuilder::new(r.dim(), rank_tol);
    fb.push_columns(start);
    let mut level_start = 0;
    for _ in 0..max_len {
        let level_end = fb.len();
        if level_start == level_end || fb.len() == r.dim() {
            break;
        }
        for k in level_start..level_end {
            let q = fb.column(k);
            for l in 0..r.arity() {
                fb.push(&r.apply(l, &q));
            }
        }
        level_start = level_end;
    }
    fb.into_mat()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::creation_tuple;
    use crate::linalg::max_abs;

    #[test]
    fn shift_matches_dense_creation_tuple() {
        let space = TruncatedFock::new(2, 3).unwrap();
        let shift = FockDilation::shift(FockFactor::Full(space.clone()), 2).unwrap();
        let dense = creation_tuple(&space).tensor_with_identity(2).unwrap();
        for l in 0..2 {
            assert!(max_abs(&(shift.to_dense(l) - dense.matrix(l))) < 1e-15);
            let adj = shift.apply_adjoint_mat(l, &identity(shift.dim()));
            assert!(max_abs(&(adj - dense.matrix(l).adjoint())) < 1e-15);
        }
    }

    #[test]
    fn symmetric_shift_matches_tensor() {
        let space = TruncatedFock::new(3, 3).unwrap();
        let shift = FockDilation::shift(FockFactor::symmetric(&space), 2).unwrap();
        let dense = symmetric_shift(&symmetric_basis(&space)).tensor_with_identity(2).unwrap();
        for l in 0..3 {
            assert!(max_abs(&(shift.to_dense(l) - dense.matrix(l))) < 1e-14);
            let adj = shift.apply_adjoint_mat(l, &identity(shift.dim()));
            assert!(max_abs(&(adj - dense.matrix(l).adjoint())) < 1e-14);
        }
    }

    #[test]
    fn graded_piece_of_shift_is_symmetric_part() {
        let space = TruncatedFock::new(2, 3).unwrap();
        let shift = FockDilation::shift(FockFactor::Full(space.clone()), 2).unwrap();
        let piece = shift.commuting_piece(&Tolerances::default()).unwrap();
        let sym = Subspace::span(&symmetric_basis(&space).frame(), 1e-9).tensor_identity(2);
        assert!(piece.subspace.same_as(&sym, 1e-8));
    }

    #[test]
    fn forward_orbit_of_vacuum_fills_space() {
        let space = TruncatedFock::new(2, 3).unwrap();
        let shift = FockDilation::shift(FockFactor::Full(space.clone()), 1).unwrap();
        let vac = space.basis_vector(0);
        let start = Mat::from_column_slice(space.dim(), 1, vac.as_slice());
        assert_eq!(forward_orbit(&shift, &start, 3, 1e-9).ncols(), 15);
        assert_eq!(forward_orbit(&shift, &start, 2, 1e-9).ncols(), 7);
    }
}
