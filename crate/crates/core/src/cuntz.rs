//! Tuples satisfying the Cuntz relations: spherical decomposition and joint spectral atoms.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dilate::{forward_orbit, DilationResult};
use crate::error::{Error, Result};
use crate::linalg::{c64, hermitian_eigen, identity, op_norm, FrameBuilder, Mat, C64};
use crate::piece::{maximal_commuting_piece_with, PieceOptions};
use crate::sample;
use crate::subspace::Subspace;
use crate::tuples::{OperatorTuple, TupleAction};
use crate::Tolerances;

/// Default Euclidean distance below which two joint eigenvalues are merged.
pub const DEFAULT_MERGE_TOL: f64 = 1e-7;

/// Joint eigenvalues closer than this in the random combination trigger a redraw.
const MIN_GAP: f64 = 1e-6;

/// Eigenvalues of the random combination closer than this belong to one cluster.
const CLUSTER_TOL: f64 = 1e-9;

const MAX_REDRAWS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub point: Vec<C64>,
    pub multiplicity: usize,
}

/// Joint spectrum of a finite-dimensional spherical unitary, with multiplicities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphericalAtoms {
    pub n: usize,
    pub atoms: Vec<Atom>,
    pub merge_tol: f64,
    /// `max_i ‖Z_i − U diag(w_i) U*‖` for the recovered joint eigenbasis.
    pub reconstruction_residual: f64,
}

impl SphericalAtoms {
    pub fn total_multiplicity(&self) -> usize {
        self.atoms.iter().map(|a| a.multiplicity).sum()
    }
}

fn point_distance(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

fn point_order(a: &[C64], b: &[C64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        let o = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        if o != std::cmp::Ordering::Equal {
            return o;
        }
    }
    std::cmp::Ordering::Equal
}

/// A joint eigenspace: frame plus the common eigenvalues.
struct JointBlock {
    frame: Mat,
    point: Vec<C64>,
}

fn hermitian_family(z: &OperatorTuple) -> Vec<Mat> {
    let i = c64(0.0, 1.0);
    z.matrices()
        .iter()
        .flat_map(|m| [m + m.adjoint(), (m - m.adjoint()) * i])
        .collect()
}

/// Splits `span(q)` into joint eigenspaces of the commuting normal family `z`.
fn split(z: &OperatorTuple, family: &[Mat], q: &Mat, rng: &mut sample::SeededRng, tol: f64, out: &mut Vec<JointBlock>) -> Result<()> {
    let k = q.ncols();
    let compressed: Vec<Mat> = z.matrices().iter().map(|m| q.ad_mul(&(m * q))).collect();
    let scalar_point: Vec<C64> = compressed.iter().map(|m| m.trace() / c64(k as f64, 0.0)).collect();
    let is_scalar = compressed
        .iter()
        .zip(&scalar_point)
        .all(|(m, &w)| op_norm(&(m - identity(k) * w)) <= tol);
    if is_scalar {
        out.push(JointBlock {
            frame: q.clone(),
            point: scalar_point,
        });
        return Ok(());
    }
    for _ in 0..=MAX_REDRAWS {
        let coeffs: Vec<f64> = (0..family.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut h = Mat::zeros(k, k);
        for (c, f) in coeffs.iter().zip(family) {
            h += q.ad_mul(&(f * q)) * c64(*c, 0.0);
        }
        let (values, vectors) = hermitian_eigen(&h);
        let mut clusters: Vec<(usize, usize)> = Vec::new();
        let mut start = 0;
        let mut ambiguous = false;
        for idx in 1..=values.len() {
            if idx == values.len() || values[idx] - values[idx - 1] > CLUSTER_TOL {
                if idx < values.len() && values[idx] - values[idx - 1] < MIN_GAP {
                    ambiguous = true;
                }
                clusters.push((start, idx));
                start = idx;
            }
        }
        if ambiguous {
            continue;
        }
        if clusters.len() == 1 {
            // the combination did not separate anything; draw again
            continue;
        }
        for (a, b) in clusters {
            let sub = q * vectors.columns(a, b - a);
            split(z, family, &sub, rng, tol, out)?;
        }
        return Ok(());
    }
    Err(Error::Diagonalization(format!(
        "no separating combination found after {MAX_REDRAWS} redraws on a block of dimension {k}"
    )))
}

/// Joint spectral atoms of a spherical unitary.
///
/// Diagonalizes a random real combination of the Hermitian family
/// `{Z_i + Z_i*, i(Z_i − Z_i*)}`, refining any cluster on which the `Z_i`
/// are not yet scalar, and merges points closer than `merge_tol`.
pub fn spectral_atoms(z: &OperatorTuple, tol: &Tolerances, merge_tol: f64, seed: u64) -> Result<SphericalAtoms> {
    let residual = z.spherical_residual().max();
    if residual > tol.tol {
        return Err(Error::NotSphericalUnitary { residual });
    }
    let d = z.dim();
    let family = hermitian_family(z);
    let mut rng = sample::rng(seed);
    let mut blocks = Vec::new();
    if d > 0 {
        split(z, &family, &identity(d), &mut rng, merge_tol, &mut blocks)?;
    }
    let mut u = Mat::zeros(d, d);
    let mut diag: Vec<Vec<C64>> = vec![Vec::with_capacity(d); z.n()];
    let mut col = 0;
    for b in &blocks {
        let m = b.frame.ncols();
        u.view_mut((0, col), (d, m)).copy_from(&b.frame);
        for (i, coords) in diag.iter_mut().enumerate() {
            coords.extend(std::iter::repeat_n(b.point[i], m));
        }
        col += m;
    }
    let mut reconstruction: f64 = 0.0;
    for (i, coords) in diag.iter().enumerate() {
        let dm = Mat::from_diagonal(&crate::linalg::Vector::from_column_slice(coords));
        reconstruction = reconstruction.max(op_norm(&(z.matrix(i) - &u * dm * u.adjoint())));
    }
    if reconstruction > tol.tol.max(10.0 * merge_tol) {
        return Err(Error::Diagonalization(format!(
            "reconstruction residual {reconstruction:.3e} exceeds tolerance"
        )));
    }
    let mut atoms: Vec<Atom> = Vec::new();
    for b in blocks {
        match atoms.iter_mut().find(|a| point_distance(&a.point, &b.point) <= merge_tol) {
            Some(a) => a.multiplicity += b.frame.ncols(),
            None => atoms.push(Atom {
                point: b.point,
                multiplicity: b.frame.ncols(),
            }),
        }
    }
    atoms.sort_by(|a, b| point_order(&a.point, &b.point));
    Ok(SphericalAtoms {
        n: z.n(),
        atoms,
        merge_tol,
        reconstruction_residual: reconstruction,
    })
}

/// Multiset equality of atoms up to `tol`.
///
/// Atoms are matched greedily in sorted order; an atom of `a` with zero or
/// several candidates in `b` makes the answer `false`.
pub fn equivalent_spherical(a: &SphericalAtoms, b: &SphericalAtoms, tol: f64) -> bool {
    if a.n != b.n || a.atoms.len() != b.atoms.len() {
        return false;
    }
    let mut used = vec![false; b.atoms.len()];
    for atom in &a.atoms {
        let candidates: Vec<usize> = (0..b.atoms.len())
            .filter(|&k| !used[k] && point_distance(&atom.point, &b.atoms[k].point) <= tol)
            .collect();
        if candidates.len() != 1 {
            return false;
        }
        let k = candidates[0];
        if b.atoms[k].multiplicity != atom.multiplicity {
            return false;
        }
        used[k] = true;
    }
    true
}

/// `π = π⁰ ⊕ π¹`, exact on the safe window.
#[derive(Debug, Clone)]
pub struct SphericalDecomposition {
    /// `L⁰`: word orbit of the commuting piece.
    pub spherical_part: Subspace,
    /// `L¹ = (L⁰)^⊥`.
    pub residual_part: Subspace,
    /// `L^c(W)`.
    pub piece_subspace: Subspace,
    /// Compression of `W` to `L^c(W)`.
    pub piece: OperatorTuple,
    pub safe_degree: usize,
    /// Largest violation of the Cuntz relations on the window.
    pub cuntz_residual: f64,
    /// Largest `‖(I − P⁰) W_i* P⁰‖` or `‖(I − P⁰) W_i P⁰‖` on the window.
    pub reducing_residual: f64,
    /// Whether the piece is a spherical unitary to `tol`.
    pub piece_is_spherical: bool,
    pub warnings: Vec<String>,
}

/// `max ‖(W_i*W_j − δ_ij) Q‖` and `‖(Σ W_iW_i* − I) Q‖` over a window frame `Q`.
pub fn cuntz_residual<A: TupleAction + ?Sized>(w: &A, window: &Mat) -> f64 {
    let n = w.arity();
    let images: Vec<Mat> = (0..n).map(|j| w.apply_mat(j, window)).collect();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for (j, img) in images.iter().enumerate() {
            let mut g = w.apply_adjoint_mat(i, img);
            if i == j {
                g -= window;
            }
            worst = worst.max(op_norm(&g));
        }
    }
    let mut sum = -window.clone();
    for (i, _) in images.iter().enumerate() {
        sum += w.apply_mat(i, &w.apply_adjoint_mat(i, window));
    }
    worst.max(op_norm(&sum))
}

fn complete_to_basis(frame: &Mat, rank_tol: f64) -> Mat {
    let dim = frame.nrows();
    let mut fb = FrameBuilder::from_frame(frame, rank_tol);
    let start = fb.len();
    for k in 0..dim {
        if fb.len() == dim {
            break;
        }
        let mut e = crate::linalg::Vector::zeros(dim);
        e[k] = c64(1.0, 0.0);
        fb.push(&e);
    }
    let all = fb.into_mat();
    all.columns(start, all.ncols() - start).into_owned()
}

fn decompose<A: TupleAction + ?Sized>(
    w: &A,
    window: &Mat,
    lc: Subspace,
    piece: OperatorTuple,
    safe_degree: usize,
    tol: &Tolerances,
    mut warnings: Vec<String>,
) -> Result<SphericalDecomposition> {
    let residual = cuntz_residual(w, window);
    if residual > tol.tol {
        return Err(Error::CuntzViolation { residual });
    }
    let l0 = forward_orbit(w, lc.frame(), safe_degree, tol.rank_tol);
    let inner = forward_orbit(w, lc.frame(), safe_degree.saturating_sub(1), tol.rank_tol);
    let l0 = Subspace::new(l0, tol.tol.max(1e-12))?;
    let mut reducing: f64 = 0.0;
    for i in 0..w.arity() {
        if l0.dim() > 0 {
            reducing = reducing.max(l0.residual_of(&w.apply_adjoint_mat(i, l0.frame())));
        }
        if inner.ncols() > 0 {
            reducing = reducing.max(l0.residual_of(&w.apply_mat(i, &inner)));
        }
    }
    if reducing > tol.angle_tol {
        warnings.push(format!("orbit of the piece is not reducing to {:.1e} (residual {reducing:.3e})", tol.angle_tol));
    }
    let l1 = Subspace::new(complete_to_basis(l0.frame(), tol.rank_tol), tol.tol.max(1e-12))?;
    let piece_is_spherical = piece.dim() > 0 && piece.is_spherical_unitary(tol.tol.max(tol.angle_tol));
    Ok(SphericalDecomposition {
        spherical_part: l0,
        residual_part: l1,
        piece_subspace: lc,
        piece,
        safe_degree,
        cuntz_residual: residual,
        reducing_residual: reducing,
        piece_is_spherical,
        warnings,
    })
}

/// Decomposes a dense tuple that satisfies the Cuntz relations on `window`.
pub fn spherical_decomposition(w: &OperatorTuple, window: &Subspace, safe_degree: usize, tol: &Tolerances) -> Result<SphericalDecomposition> {
    let cross_check = w.dim() <= crate::dilate::CLOSURE_CHECK_LIMIT;
    let p = maximal_commuting_piece_with(w, tol, PieceOptions { cross_check })?;
    decompose(w, window.frame(), p.subspace, p.piece, safe_degree, tol, p.warnings)
}

/// Decomposes a Schäffer or Cuntz-state dilation on its safe window.
pub fn spherical_decomposition_of(dil: &DilationResult, tol: &Tolerances) -> Result<SphericalDecomposition> {
    let p = dil.commuting_piece(tol)?;
    let window = dil.window_frame();
    decompose(&dil.dilation, &window, p.subspace, p.piece, dil.safe_degree, tol, p.warnings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dilate::{cuntz_state_rep, schaeffer_dilation};
    use crate::tuples::{diagonal_tuple, flip_pair};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn single_point() {
        let w = vec![c64(0.6, 0.0), c64(0.0, 0.8)];
        let z = OperatorTuple::from_scalars(&w).unwrap();
        let atoms = spectral_atoms(&z, &tol(), DEFAULT_MERGE_TOL, 0).unwrap();
        assert_eq!(atoms.atoms.len(), 1);
        assert_eq!(atoms.atoms[0].multiplicity, 1);
        assert!(point_distance(&atoms.atoms[0].point, &w) < 1e-12);
    }

    #[test]
    fn repeated_point_merges() {
        let w = vec![c64(1.0, 0.0), c64(0.0, 0.0)];
        let v = vec![c64(0.0, 0.0), c64(0.0, 1.0)];
        let z = diagonal_tuple(&[w.clone(), w.clone(), v.clone()]).unwrap();
        let atoms = spectral_atoms(&z, &tol(), DEFAULT_MERGE_TOL, 3).unwrap();
        assert_eq!(atoms.atoms.len(), 2);
        let mults: Vec<usize> = atoms.atoms.iter().map(|a| a.multiplicity).collect();
        assert_eq!(mults.iter().sum::<usize>(), 3);
        assert!(mults.contains(&2));
    }

    #[test]
    fn equivalence_rules() {
        let w = vec![c64(1.0, 0.0), c64(0.0, 0.0)];
        let v = vec![c64(0.0, 0.0), c64(1.0, 0.0)];
        let a = spectral_atoms(&diagonal_tuple(&[w.clone(), v.clone()]).unwrap(), &tol(), DEFAULT_MERGE_TOL, 0).unwrap();
        let b = spectral_atoms(&diagonal_tuple(&[v.clone(), w.clone()]).unwrap(), &tol(), DEFAULT_MERGE_TOL, 1).unwrap();
        let c = spectral_atoms(&diagonal_tuple(&[w.clone(), w.clone()]).unwrap(), &tol(), DEFAULT_MERGE_TOL, 0).unwrap();
        assert!(equivalent_spherical(&a, &a, 1e-8));
        assert!(equivalent_spherical(&a, &b, 1e-8));
        assert!(!equivalent_spherical(&a, &c, 1e-8));
    }

    #[test]
    fn rejects_non_spherical() {
        assert!(matches!(
            spectral_atoms(&flip_pair(), &tol(), DEFAULT_MERGE_TOL, 0),
            Err(Error::NotSphericalUnitary { .. })
        ));
    }

    #[test]
    fn cuntz_state_is_spherical() {
        let dil = cuntz_state_rep(&[c64(0.6, 0.0), c64(0.0, 0.8)], 4, &tol()).unwrap();
        let dec = spherical_decomposition_of(&dil, &tol()).unwrap();
        assert_eq!(dec.piece_subspace.dim(), 1);
        // orbit of the vacuum of H under words of length ≤ 3
        assert!(dec.spherical_part.dim() > 1);
        assert_eq!(dec.spherical_part.dim() + dec.residual_part.dim(), dil.ambient_dim());
        assert!(dec.piece_is_spherical);
        assert!(dec.reducing_residual < 1e-8);
    }

    #[test]
    fn flip_dilation_has_no_spherical_part() {
        let dil = schaeffer_dilation(&flip_pair(), 4, &tol()).unwrap();
        let dec = spherical_decomposition_of(&dil, &tol()).unwrap();
        assert_eq!(dec.piece_subspace.dim(), 0);
        assert_eq!(dec.spherical_part.dim(), 0);
        assert_eq!(dec.residual_part.dim(), dil.ambient_dim());
    }
}
