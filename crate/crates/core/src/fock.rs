//! Truncated full and symmetric Fock spaces over ℂⁿ.
//!
//! Basis vectors `e^α` are ordered by degree, vacuum first, and
//! lexicographically within a degree. Letters are stored zero-based; the
//! `Display` impl prints them one-based.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c64, Mat, Vector, C64};
use crate::tuples::OperatorTuple;

/// A word `α = (α₁, …, α_m)` over the alphabet `{0, …, n−1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
pub struct MultiIndex {
    letters: Vec<usize>,
}

impl MultiIndex {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(letters: Vec<usize>) -> Self {
        Self { letters }
    }

    /// Builds a word from one-based letters, checking them against `n`.
    pub fn from_one_based(letters: &[usize], n: usize) -> Result<Self> {
        let mut out = Vec::with_capacity(letters.len());
        for &l in letters {
            if l == 0 || l > n {
                return Err(Error::LetterOutOfRange { letter: l, n });
            }
            out.push(l - 1);
        }
        Ok(Self { letters: out })
    }

    pub fn letters(&self) -> &[usize] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn check(&self, n: usize) -> Result<()> {
        match self.letters.iter().find(|&&l| l >= n) {
            Some(&l) => Err(Error::LetterOutOfRange { letter: l + 1, n }),
            None => Ok(()),
        }
    }

    /// `(i, α)`: the word with `letter` prepended.
    pub fn prepend(&self, letter: usize) -> Self {
        let mut letters = Vec::with_capacity(self.len() + 1);
        letters.push(letter);
        letters.extend_from_slice(&self.letters);
        Self { letters }
    }

    pub fn concat(&self, other: &MultiIndex) -> Self {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Self { letters }
    }

    pub fn reversed(&self) -> Self {
        Self {
            letters: self.letters.iter().rev().copied().collect(),
        }
    }

    pub fn sorted(&self) -> Self {
        let mut letters = self.letters.clone();
        letters.sort_unstable();
        Self { letters }
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, l) in self.letters.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", l + 1)?;
        }
        write!(f, ")")
    }
}

/// All `n^m` words of length `m` in lexicographic order.
pub fn enumerate_indices(n: usize, m: usize) -> Result<Vec<MultiIndex>> {
    if n == 0 {
        return Err(Error::InvalidParameter("letter count must be at least 1".into()));
    }
    let count = n.checked_pow(m as u32).ok_or(Error::TooLarge { dim: usize::MAX, limit: usize::MAX })?;
    Ok((0..count).map(|rank| word_of_rank(n, m, rank)).collect())
}

fn word_of_rank(n: usize, m: usize, mut rank: usize) -> MultiIndex {
    let mut letters = vec![0; m];
    for slot in letters.iter_mut().rev() {
        *slot = rank % n;
        rank /= n;
    }
    MultiIndex { letters }
}

/// Words of length `0..=max_len`, graded.
pub fn words_up_to(n: usize, max_len: usize) -> Result<Vec<MultiIndex>> {
    let mut out = Vec::new();
    for m in 0..=max_len {
        out.extend(enumerate_indices(n, m)?);
    }
    Ok(out)
}

pub fn binomial(n: usize, k: usize) -> usize {
    let k = k.min(n.saturating_sub(k));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// Γ(ℂⁿ) cut at total degree `M`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncatedFock {
    n: usize,
    degree: usize,
    offsets: Vec<usize>,
}

impl TruncatedFock {
    pub fn new(n: usize, degree: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("letter count must be at least 1".into()));
        }
        if degree == 0 {
            return Err(Error::InvalidParameter("truncation degree must be at least 1".into()));
        }
        let mut offsets = Vec::with_capacity(degree + 2);
        let mut acc = 0usize;
        let mut block = 1usize;
        for _ in 0..=degree {
            offsets.push(acc);
            acc = acc
                .checked_add(block)
                .ok_or(Error::TooLarge { dim: usize::MAX, limit: usize::MAX })?;
            block = block.saturating_mul(n);
        }
        offsets.push(acc);
        Ok(Self { n, degree, offsets })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Truncation degree `M`.
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.offsets[self.degree + 1]
    }

    pub fn offset(&self, m: usize) -> usize {
        self.offsets[m]
    }

    pub fn degree_dim(&self, m: usize) -> usize {
        self.offsets[m + 1] - self.offsets[m]
    }

    /// Dimension of the span of degrees `0..=m`.
    pub fn dim_up_to(&self, m: usize) -> usize {
        self.offsets[m.min(self.degree) + 1]
    }

    pub fn degree_of(&self, idx: usize) -> usize {
        match self.offsets.binary_search(&idx) {
            Ok(m) => m,
            Err(m) => m - 1,
        }
    }

    pub fn index(&self, word: &MultiIndex) -> Result<usize> {
        word.check(self.n)?;
        if word.len() > self.degree {
            return Err(Error::InvalidParameter(format!(
                "word of length {} exceeds truncation degree {}",
                word.len(),
                self.degree
            )));
        }
        let rank = word.letters().iter().fold(0usize, |acc, &l| acc * self.n + l);
        Ok(self.offsets[word.len()] + rank)
    }

    pub fn word(&self, idx: usize) -> MultiIndex {
        let m = self.degree_of(idx);
        word_of_rank(self.n, m, idx - self.offsets[m])
    }

    /// Index of `e_letter ⊗ e^α`, or `None` when `e^α` sits at the top degree.
    #[inline]
    pub fn child(&self, letter: usize, idx: usize) -> Option<usize> {
        let m = self.degree_of(idx);
        if m >= self.degree {
            return None;
        }
        let rank = idx - self.offsets[m];
        Some(self.offsets[m + 1] + letter * self.degree_dim(m) + rank)
    }

    /// Splits `e_l ⊗ e^β` into `(l, index of e^β)`; `None` for the vacuum.
    #[inline]
    pub fn parent(&self, idx: usize) -> Option<(usize, usize)> {
        let m = self.degree_of(idx);
        if m == 0 {
            return None;
        }
        let rank = idx - self.offsets[m];
        let block = self.degree_dim(m - 1);
        Some((rank / block, self.offsets[m - 1] + rank % block))
    }

    /// `(V_l ⊗ I_r) x` for a vector laid out as `fock_index * r + k`.
    pub fn create_blocked(&self, letter: usize, x: &[C64], r: usize, out: &mut [C64]) {
        out.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        for m in 0..self.degree {
            let src = self.offsets[m] * r;
            let len = self.degree_dim(m) * r;
            let dst = (self.offsets[m + 1] + letter * self.degree_dim(m)) * r;
            out[dst..dst + len].copy_from_slice(&x[src..src + len]);
        }
    }

    /// `(V_l ⊗ I_r)* x` for a vector laid out as `fock_index * r + k`.
    pub fn annihilate_blocked(&self, letter: usize, x: &[C64], r: usize, out: &mut [C64]) {
        out.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        for m in 0..self.degree {
            let dst = self.offsets[m] * r;
            let len = self.degree_dim(m) * r;
            let src = (self.offsets[m + 1] + letter * self.degree_dim(m)) * r;
            out[dst..dst + len].copy_from_slice(&x[src..src + len]);
        }
    }

    pub fn basis_vector(&self, idx: usize) -> Vector {
        let mut v = Vector::zeros(self.dim());
        v[idx] = c64(1.0, 0.0);
        v
    }

    /// Orthogonal projection onto degree `m`, as a diagonal 0/1 matrix.
    pub fn degree_projection(&self, m: usize) -> Mat {
        let mut p = Mat::zeros(self.dim(), self.dim());
        for idx in self.offsets[m]..self.offsets[m + 1] {
            p[(idx, idx)] = c64(1.0, 0.0);
        }
        p
    }

    /// Projection onto degrees `0..=m`.
    pub fn window_projection(&self, m: usize) -> Mat {
        let mut p = Mat::zeros(self.dim(), self.dim());
        for idx in 0..self.dim_up_to(m) {
            p[(idx, idx)] = c64(1.0, 0.0);
        }
        p
    }

    /// Permutes tensor factors `k` and `k+1` in every degree where both exist.
    pub fn swap_factors(&self, k: usize, x: &Vector) -> Vector {
        let mut out = x.clone();
        for m in (k + 2)..=self.degree {
            for rank in 0..self.degree_dim(m) {
                let mut word = word_of_rank(self.n, m, rank);
                word.letters.swap(k, k + 1);
                let target = self.offsets[m] + word.letters.iter().fold(0usize, |acc, &l| acc * self.n + l);
                out[target] = x[self.offsets[m] + rank];
            }
        }
        out
    }
}

/// Left creation tuple `V_i e^α = e^{(i, α)}`, with top-degree vectors sent to 0.
pub fn creation_tuple(space: &TruncatedFock) -> OperatorTuple {
    let dim = space.dim();
    let matrices = (0..space.n())
        .map(|l| {
            let mut v = Mat::zeros(dim, dim);
            for idx in 0..space.dim_up_to(space.degree() - 1) {
                let target = space.child(l, idx).expect("below top degree");
                v[(target, idx)] = c64(1.0, 0.0);
            }
            v
        })
        .collect();
    OperatorTuple::new(matrices).expect("creation operators share a shape")
}

/// One symmetric basis vector: the normalized sum of `e^α` over all rearrangements α.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetricVector {
    pub multiset: MultiIndex,
    pub degree: usize,
    pub support: Vec<usize>,
    pub coefficient: f64,
}

/// Orthonormal frame of Γ_s(ℂⁿ) inside a truncated full Fock space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetricBasis {
    parent: TruncatedFock,
    vectors: Vec<SymmetricVector>,
    offsets: Vec<usize>,
    /// For every full Fock index, the symmetric vector whose support contains it.
    owner: Vec<usize>,
}

impl SymmetricBasis {
    pub fn new(parent: &TruncatedFock) -> Self {
        let n = parent.n();
        let mut vectors = Vec::new();
        let mut offsets = Vec::with_capacity(parent.degree() + 2);
        let mut owner = vec![0usize; parent.dim()];
        for m in 0..=parent.degree() {
            offsets.push(vectors.len());
            let mut by_multiset: std::collections::BTreeMap<MultiIndex, Vec<usize>> = Default::default();
            for rank in 0..parent.degree_dim(m) {
                let word = word_of_rank(n, m, rank);
                by_multiset.entry(word.sorted()).or_default().push(parent.offset(m) + rank);
            }
            for (multiset, support) in by_multiset {
                let coefficient = 1.0 / (support.len() as f64).sqrt();
                for &idx in &support {
                    owner[idx] = vectors.len();
                }
                vectors.push(SymmetricVector {
                    multiset,
                    degree: m,
                    support,
                    coefficient,
                });
            }
        }
        offsets.push(vectors.len());
        Self {
            parent: parent.clone(),
            vectors,
            offsets,
            owner,
        }
    }

    pub fn parent(&self) -> &TruncatedFock {
        &self.parent
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn degree_dim(&self, m: usize) -> usize {
        self.offsets[m + 1] - self.offsets[m]
    }

    pub fn dim_up_to(&self, m: usize) -> usize {
        self.offsets[m.min(self.parent.degree()) + 1]
    }

    pub fn offset(&self, m: usize) -> usize {
        self.offsets[m]
    }

    pub fn vectors(&self) -> &[SymmetricVector] {
        &self.vectors
    }

    /// Symmetric vector containing the full Fock basis index `idx`.
    pub fn owner(&self, idx: usize) -> usize {
        self.owner[idx]
    }

    /// Frame as a `dim × sym_dim` matrix with orthonormal columns.
    pub fn frame(&self) -> Mat {
        let mut f = Mat::zeros(self.parent.dim(), self.dim());
        for (k, v) in self.vectors.iter().enumerate() {
            for &idx in &v.support {
                f[(idx, k)] = c64(v.coefficient, 0.0);
            }
        }
        f
    }

    /// Frame restricted to degrees `0..=m`.
    pub fn window_frame(&self, m: usize) -> Mat {
        self.frame().columns(0, self.dim_up_to(m)).into_owned()
    }

    pub fn expected_degree_dim(n: usize, m: usize) -> usize {
        binomial(n + m - 1, m)
    }
}

pub fn symmetric_basis(space: &TruncatedFock) -> SymmetricBasis {
    SymmetricBasis::new(space)
}

/// `S_i = P V_i P` written in symmetric frame coordinates.
pub fn compressed_tuple(v: &OperatorTuple, sym: &SymmetricBasis) -> Result<OperatorTuple> {
    if v.dim() != sym.parent().dim() || v.n() != sym.parent().n() {
        return Err(Error::Shape(format!(
            "tuple of {} operators on dim {} does not match Fock space with n = {} and dim {}",
            v.n(),
            v.dim(),
            sym.parent().n(),
            sym.parent().dim()
        )));
    }
    let f = sym.frame();
    let matrices = v.matrices().iter().map(|vi| f.ad_mul(&(vi * &f))).collect();
    OperatorTuple::new(matrices)
}

/// The symmetric shift built directly, without forming the full creation tuple.
pub fn symmetric_shift(sym: &SymmetricBasis) -> OperatorTuple {
    let space = sym.parent();
    let d = sym.dim();
    let matrices = (0..space.n())
        .map(|l| {
            let mut s = Mat::zeros(d, d);
            for (col, v) in sym.vectors().iter().enumerate() {
                if v.degree >= space.degree() {
                    continue;
                }
                for &idx in &v.support {
                    let target = space.child(l, idx).expect("below top degree");
                    let row = sym.owner(target);
                    s[(row, col)] += c64(v.coefficient * sym.vectors()[row].coefficient, 0.0);
                }
            }
            s
        })
        .collect();
    OperatorTuple::new(matrices).expect("symmetric shift shares a shape")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{identity, max_abs};

    #[test]
    fn enumerate_examples() {
        assert_eq!(enumerate_indices(2, 0).unwrap(), vec![MultiIndex::empty()]);
        let words: Vec<String> = enumerate_indices(2, 2).unwrap().iter().map(|w| w.to_string()).collect();
        assert_eq!(words, ["(1,1)", "(1,2)", "(2,1)", "(2,2)"]);
        assert_eq!(enumerate_indices(3, 2).unwrap().len(), 9);
        assert!(enumerate_indices(0, 2).is_err());
    }

    #[test]
    fn index_round_trip() {
        let space = TruncatedFock::new(3, 3).unwrap();
        assert_eq!(space.dim(), 1 + 3 + 9 + 27);
        for idx in 0..space.dim() {
            assert_eq!(space.index(&space.word(idx)).unwrap(), idx);
        }
        assert_eq!(space.index(&MultiIndex::empty()).unwrap(), 0);
    }

    #[test]
    fn child_matches_prepend() {
        let space = TruncatedFock::new(2, 3).unwrap();
        for idx in 0..space.dim_up_to(2) {
            for l in 0..2 {
                let expected = space.index(&space.word(idx).prepend(l)).unwrap();
                assert_eq!(space.child(l, idx), Some(expected));
                assert_eq!(space.parent(expected), Some((l, idx)));
            }
        }
        assert_eq!(space.child(0, space.dim() - 1), None);
    }

    #[test]
    fn creation_dimensions_and_relations() {
        let space = TruncatedFock::new(2, 3).unwrap();
        let v = creation_tuple(&space);
        assert_eq!(v.dim(), 15);
        let window = space.dim_up_to(2);
        for i in 0..2 {
            for j in 0..2 {
                let g = v.matrix(i).ad_mul(v.matrix(j));
                let block = g.view((0, 0), (window, window)).into_owned();
                let expected = if i == j { identity(window) } else { Mat::zeros(window, window) };
                assert!(max_abs(&(block - expected)) < 1e-15);
            }
        }
        let sum = v.row_gram();
        let mut expected = identity(space.dim());
        expected[(0, 0)] = c64(0.0, 0.0);
        assert!(max_abs(&(sum - expected)) < 1e-15);
    }

    #[test]
    fn symmetric_counts() {
        let space = TruncatedFock::new(2, 3).unwrap();
        let sym = symmetric_basis(&space);
        assert_eq!(sym.dim(), 10);
        for m in 0..=3 {
            assert_eq!(sym.degree_dim(m), SymmetricBasis::expected_degree_dim(2, m));
        }
        let f = sym.frame();
        assert!(max_abs(&(f.ad_mul(&f) - identity(10))) < 1e-12);
    }

    #[test]
    fn degree_two_frame() {
        let space = TruncatedFock::new(2, 3).unwrap();
        let sym = symmetric_basis(&space);
        let deg2: Vec<_> = sym.vectors().iter().filter(|v| v.degree == 2).collect();
        assert_eq!(deg2.len(), 3);
        assert_eq!(deg2[0].support, vec![space.index(&MultiIndex::new(vec![0, 0])).unwrap()]);
        assert_eq!(deg2[1].support.len(), 2);
        assert!((deg2[1].coefficient - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        let f = sym.frame();
        for k in 0..sym.dim() {
            let col = f.column(k).into_owned();
            assert!((space.swap_factors(0, &col) - &col).norm() < 1e-12);
        }
    }

    #[test]
    fn compression_matches_direct_shift() {
        let space = TruncatedFock::new(2, 3).unwrap();
        let sym = symmetric_basis(&space);
        let s = compressed_tuple(&creation_tuple(&space), &sym).unwrap();
        assert_eq!(s.dim(), 10);
        let direct = symmetric_shift(&sym);
        for i in 0..2 {
            assert!(max_abs(&(s.matrix(i) - direct.matrix(i))) < 1e-14);
        }
    }

    #[test]
    fn symmetric_shift_commutes_below_top() {
        let space = TruncatedFock::new(3, 4).unwrap();
        let sym = symmetric_basis(&space);
        let s = symmetric_shift(&sym);
        let window = sym.dim_up_to(2);
        for i in 0..3 {
            for j in 0..3 {
                let c = s.matrix(i) * s.matrix(j) - s.matrix(j) * s.matrix(i);
                assert!(max_abs(&c.columns(0, window).into_owned()) < 1e-12);
            }
        }
        let sum = s.row_gram();
        for k in sym.offset(1)..sym.dim_up_to(3) {
            for l in sym.offset(1)..sym.dim_up_to(3) {
                let expected = if k == l { 1.0 } else { 0.0 };
                assert!((sum[(k, l)] - c64(expected, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(4, 0), 1);
        assert_eq!(binomial(7, 7), 1);
    }
}
