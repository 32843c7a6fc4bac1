use rand::Rng;

use super::{bounds, CheckReport};
use crate::cuntz::cuntz_residual;
use crate::dilate::{schaeffer_dilation, standard_commuting_dilation_pure, symmetric_embedding};
use crate::error::{Error, Result};
use crate::fock::{creation_tuple, symmetric_basis, symmetric_shift, words_up_to, MultiIndex, SymmetricBasis, TruncatedFock};
use crate::linalg::{identity, numerical_rank, op_norm, singular_values, Mat};
use crate::parallel::Execution;
use crate::piece::maximal_commuting_piece;
use crate::sample;
use crate::subspace::Subspace;
use crate::tuples::{flip_pair, OperatorTuple};
use crate::Tolerances;

/// The commuting piece of the truncated creation tuple, restricted to degrees
/// `≤ M − 1`, against the symmetric Fock frame.
pub fn check_prop6(n: usize, degree: usize, angle_tol: f64, tol: &Tolerances) -> CheckReport {
    let name = format!("prop6/n{n}-m{degree}");
    let mut report = CheckReport::new(name.clone());
    report
        .input("n", n)
        .input("degree", degree)
        .tolerance("angle", angle_tol)
        .tolerance("rank_tol", tol.rank_tol);
    if n < 2 || degree < 2 {
        return CheckReport::from_error(name, &Error::InvalidParameter("need n ≥ 2 and M ≥ 2".into()));
    }
    let space = match TruncatedFock::new(n, degree) {
        Ok(s) => s,
        Err(e) => return CheckReport::from_error(name, &e),
    };
    let v = creation_tuple(&space);
    let piece = match maximal_commuting_piece(&v, tol) {
        Ok(p) => p,
        Err(e) => return CheckReport::from_error(name, &e),
    };
    let window = space.dim_up_to(degree - 1);
    let windowed = piece.subspace.intersect_leading(window, tol.angle_tol);
    let sym = symmetric_basis(&space);
    let sym_window = Subspace::span(&sym.window_frame(degree - 1), tol.rank_tol);
    let expected: usize = (0..degree).map(|m| SymmetricBasis::expected_degree_dim(n, m)).sum();
    let angle = windowed.max_angle(&sym_window);
    report
        .residual("piece_dim", piece.subspace.dim() as f64)
        .residual("window_piece_dim", windowed.dim() as f64)
        .residual("symmetric_window_dim", sym_window.dim() as f64)
        .residual("max_angle", angle);
    if let Some(overlap) = piece.duality_residual {
        report.residual("duality_residual", overlap);
    }
    report.assert_count("windowed piece dimension", windowed.dim(), expected);
    report.assert_count("symmetric window dimension", sym_window.dim(), expected);
    report.assert_le("max principal angle", angle, angle_tol);
    report
}

/// The commuting piece of the Schäffer dilation of a spherical unitary, on the
/// degree `≤ M − 1` window, against the embedded original space.
pub fn check_thm15(z: &OperatorTuple, degree: usize, angle_tol: f64, tol: &Tolerances) -> CheckReport {
    let mut report = CheckReport::new("thm15");
    report
        .input("n", z.n())
        .input("dim", z.dim())
        .input("degree", degree)
        .tolerance("angle", angle_tol)
        .tolerance("cuntz", bounds::CUNTZ_WINDOW)
        .tolerance("tol", tol.tol);
    let spherical = z.spherical_residual().max();
    report.residual("spherical_residual", spherical);
    if !report.assert_le("input is a spherical unitary", spherical, tol.tol) {
        return report;
    }
    let dil = match schaeffer_dilation(z, degree, tol) {
        Ok(d) => d,
        Err(e) => return CheckReport::from_error("thm15", &e),
    };
    let piece = match dil.commuting_piece(tol) {
        Ok(p) => p,
        Err(e) => return CheckReport::from_error("thm15", &e),
    };
    let window = dil.window_frame().ncols();
    let windowed = piece.subspace.intersect_leading(window, tol.angle_tol);
    let embedded = Subspace::span(&dil.embed, tol.rank_tol);
    let angle = windowed.max_angle(&embedded);
    let cuntz = cuntz_residual(&dil.dilation, &dil.window_frame());
    report
        .residual("ambient_dim", dil.ambient_dim() as f64)
        .residual("reduced_dim", piece.reduced_dim as f64)
        .residual("piece_dim", piece.subspace.dim() as f64)
        .residual("window_piece_dim", windowed.dim() as f64)
        .residual("max_angle", angle)
        .residual("cuntz_window_residual", cuntz);
    for w in &piece.warnings {
        report.note(w.clone());
    }
    report.assert_count("windowed piece dimension", windowed.dim(), z.dim());
    report.assert_le("max principal angle", angle, angle_tol);
    report.assert_le("Cuntz relations on the window", cuntz, bounds::CUNTZ_WINDOW.max(10.0 * f64::EPSILON * z.dim() as f64));
    report
}

/// [`check_thm15`] over `count` seeded spherical unitaries (dims 1–6, `n ∈ {2, 3}`).
pub fn check_thm15_batch(
    count: usize,
    seed: u64,
    degree: usize,
    angle_tol: f64,
    tol: &Tolerances,
    exec: Execution,
) -> CheckReport {
    let mut rng = sample::rng(seed);
    let cases: Vec<OperatorTuple> = (0..count)
        .map(|_| {
            let n = rng.random_range(2..=3);
            let dim = rng.random_range(1..=6);
            sample::random_spherical_unitary(&mut rng, n, dim).0
        })
        .collect();
    let results = exec.map(&cases, |z| check_thm15(z, degree, angle_tol, tol));
    let mut report = CheckReport::new("thm15/random-spherical");
    report
        .input("cases", count)
        .input("degree", degree)
        .input("seed", seed)
        .tolerance("angle", angle_tol)
        .tolerance("cuntz", bounds::CUNTZ_WINDOW);
    let mut worst_angle: f64 = 0.0;
    let mut worst_cuntz: f64 = 0.0;
    let mut failed = 0;
    for (k, (z, sub)) in cases.iter().zip(&results).enumerate() {
        worst_angle = worst_angle.max(sub.residuals.get("max_angle").copied().unwrap_or(f64::INFINITY));
        worst_cuntz = worst_cuntz.max(sub.residuals.get("cuntz_window_residual").copied().unwrap_or(f64::INFINITY));
        if !sub.pass {
            failed += 1;
            report.note(format!(
                "case {k} (n = {}, dim = {}) failed: {} {}",
                z.n(),
                z.dim(),
                sub.failures().join(", "),
                sub.notes.join("; ")
            ));
        }
    }
    report.residual("max_angle", worst_angle).residual("max_cuntz_window_residual", worst_cuntz);
    report.assert_count("failed cases", failed, 0);
    report
}

/// The noncommuting flip pair: its Schäffer dilation has no commuting piece
/// and satisfies the Cuntz relations on the window.
pub fn check_trivial_piece(degree: usize, tol: &Tolerances) -> CheckReport {
    let name = "thm15/flip-pair";
    let mut report = CheckReport::new(name);
    report.input("degree", degree).tolerance("cuntz", bounds::CUNTZ_WINDOW);
    let dil = match schaeffer_dilation(&flip_pair(), degree, tol) {
        Ok(d) => d,
        Err(e) => return CheckReport::from_error(name, &e),
    };
    let piece = match dil.commuting_piece(tol) {
        Ok(p) => p,
        Err(e) => return CheckReport::from_error(name, &e),
    };
    let cuntz = cuntz_residual(&dil.dilation, &dil.window_frame());
    report
        .residual("ambient_dim", dil.ambient_dim() as f64)
        .residual("defect_rank", dil.defect_rank as f64)
        .residual("cuntz_window_residual", cuntz);
    report.assert_count("commuting piece dimension", piece.subspace.dim(), 0);
    report.assert_le("Cuntz relations on the window", cuntz, bounds::CUNTZ_WINDOW);
    report
}

/// Outcome of [`check_thm9`].
#[derive(Debug, Clone)]
pub struct Thm9Outcome {
    pub report: CheckReport,
    /// `span Δ_T H = span Δ_T H^c`.
    pub defect_criterion: bool,
    /// The `S ⊗ I` piece of the dilation of `T` is the standard commuting dilation of `T^c`.
    pub piece_criterion: bool,
    /// `rank Δ_T`, `rank Δ_{T^c}`, and the defect ranks of `V ⊗ I` and `S ⊗ I`.
    pub ranks: [usize; 4],
}

/// Multisets of length `≤ k` as nondecreasing words.
fn multisets(n: usize, k: usize) -> Result<Vec<MultiIndex>> {
    Ok(words_up_to(n, k)?
        .into_iter()
        .filter(|w| w.letters().windows(2).all(|p| p[0] <= p[1]))
        .collect())
}

/// `[(S^α ⊗ I) A]` over the given multisets, stacked as columns.
fn orbit(shift: &OperatorTuple, r: usize, embed: &Mat, words: &[MultiIndex]) -> Result<Mat> {
    let k = embed.ncols();
    let dense: Vec<Mat> = shift.matrices().iter().map(|s| s.kronecker(&identity(r))).collect();
    let mut out = Mat::zeros(embed.nrows(), words.len() * k);
    for (c, w) in words.iter().enumerate() {
        let x = w.letters().iter().rev().fold(embed.clone(), |acc, &l| &dense[l] * acc);
        out.view_mut((0, c * k), (embed.nrows(), k)).copy_from(&x);
    }
    Ok(out)
}

/// Defect-space criterion for when the commuting piece of the minimal
/// isometric dilation of a pure tuple is the standard commuting dilation of
/// its commuting piece, evaluated on both sides.
pub fn check_thm9(t: &OperatorTuple, degree: usize, moment_degree: usize, tol: &Tolerances) -> Result<Thm9Outcome> {
    let decay = t.decay_sequence(degree + 1);
    let tail = decay[degree + 1];
    if tail > tol.tol {
        return Err(Error::NotPure {
            degree,
            tail_bound: tail,
            tol: tol.tol,
        });
    }
    let mut report = CheckReport::new("thm9");
    report
        .input("n", t.n())
        .input("dim", t.dim())
        .input("degree", degree)
        .input("moment_degree", moment_degree)
        .tolerance("angle", tol.angle_tol)
        .tolerance("rank_tol", tol.rank_tol)
        .residual("tail_bound", tail);

    let hc = maximal_commuting_piece(t, tol)?;
    let q = hc.subspace.frame().clone();
    let k = q.ncols();
    let defect = t.defect(tol.tol, tol.rank_tol)?;
    let r_t = defect.defect_rank;

    // (a) span Δ_T H against span Δ_T H^c
    let full = Subspace::span(&defect.delta, tol.rank_tol);
    let restricted = Subspace::span(&(&defect.delta * &q), tol.rank_tol);
    let angle = full.max_angle(&restricted);
    let defect_criterion = full.dim() == restricted.dim() && angle <= tol.angle_tol;
    report
        .residual("hc_dim", k as f64)
        .residual("defect_span_dim", full.dim() as f64)
        .residual("restricted_defect_span_dim", restricted.dim() as f64)
        .residual("defect_span_angle", angle);

    // (b) the S ⊗ I piece of V ⊗ I against the standard dilation of T^c
    let (piece_criterion, r_c) = if k == 0 {
        report.note("the commuting piece is zero, so it cannot carry a dilation with nonzero defect");
        (false, 0)
    } else {
        let tc = &hc.piece;
        let std = standard_commuting_dilation_pure(tc, degree, tol)?;
        let r_c = std.defect_rank;
        let space = TruncatedFock::new(t.n(), degree)?;
        let sym = symmetric_basis(&space);
        let shift = symmetric_shift(&sym);
        let coupling = defect.defect_frame.ad_mul(&defect.delta);
        let a_t = symmetric_embedding(t, &q, &sym, &coupling)?;
        let words = multisets(t.n(), moment_degree)?;
        let orbit_t = orbit(&shift, r_t, &a_t, &words)?;
        let orbit_c = orbit(&shift, r_c, &std.embed, &words)?;
        let gram_gap = op_norm(&(orbit_t.ad_mul(&orbit_t) - orbit_c.ad_mul(&orbit_c)));
        let gram_bound = 10.0 * tail.max(std.tail_bound) + 1e-12;
        let all = multisets(t.n(), degree)?;
        let span_rank = numerical_rank(&singular_values(&orbit(&shift, r_t, &a_t, &all)?), tol.rank_tol);
        let target = sym.dim() * r_t;
        report
            .residual("gram_gap", gram_gap)
            .residual("gram_bound", gram_bound)
            .residual("orbit_rank", span_rank as f64)
            .residual("piece_ambient_dim", target as f64)
            .residual("standard_ambient_dim", (sym.dim() * r_c) as f64);
        (gram_gap <= gram_bound && span_rank == target && r_t == r_c, r_c)
    };
    let ranks = [r_t, r_c, r_t, r_t];
    report
        .residual("rank_defect_t", ranks[0] as f64)
        .residual("rank_defect_tc", ranks[1] as f64)
        .residual("rank_defect_dilation", ranks[2] as f64)
        .residual("rank_defect_piece", ranks[3] as f64)
        .residual("defect_criterion", if defect_criterion { 1.0 } else { 0.0 })
        .residual("piece_criterion", if piece_criterion { 1.0 } else { 0.0 });
    report.assert_true("criterion and piece identification agree", defect_criterion == piece_criterion);
    report.assert_true("equal finite defect ranks force the criterion", r_t != r_c || defect_criterion);
    Ok(Thm9Outcome {
        report,
        defect_criterion,
        piece_criterion,
        ranks,
    })
}

/// `rank A = rank [A; B]` for random PSD blocks `[[A, B*], [B, C]]`.
pub fn check_lemma10(trials: usize, dims: (usize, usize), seed: u64, rank_tol: f64, exec: Execution) -> CheckReport {
    let mut rng = sample::rng(seed);
    let cases: Vec<(Mat, Mat)> = (0..trials)
        .map(|_| {
            let a = rng.random_range(1..=dims.0.max(1));
            let c = rng.random_range(1..=dims.1.max(1));
            let (a_block, b_block, _) = sample::random_psd_blocks(&mut rng, a, c);
            (a_block, b_block)
        })
        .collect();
    let ranks = exec.map(&cases, |(a, b)| {
        let sa = singular_values(a);
        let mut stacked = Mat::zeros(a.nrows() + b.nrows(), a.ncols());
        stacked.view_mut((0, 0), a.shape()).copy_from(a);
        stacked.view_mut((a.nrows(), 0), b.shape()).copy_from(b);
        let ss = singular_values(&stacked);
        (numerical_rank(&sa, rank_tol), numerical_rank(&ss, rank_tol), sa, ss)
    });
    let mut report = CheckReport::new("lemma10/random-psd-blocks");
    report
        .input("trials", trials)
        .input("max_block_dims", [dims.0, dims.1])
        .input("seed", seed)
        .tolerance("rank_tol", rank_tol);
    let mut violations = 0;
    for (k, (ra, rs, sa, ss)) in ranks.iter().enumerate() {
        if ra != rs {
            violations += 1;
            let gap = |s: &[f64], r: usize| (s.get(r.wrapping_sub(1)).copied(), s.get(r).copied());
            report.note(format!(
                "trial {k}: rank A = {ra}, rank [A; B] = {rs}; singular values around the cut {:?} / {:?}",
                gap(sa, *ra),
                gap(ss, *rs)
            ));
        }
    }
    report.residual("violations", violations as f64);
    report.assert_count("violations", violations, 0);
    report
}

fn padded_flip(n: usize) -> OperatorTuple {
    let mut m = flip_pair().into_matrices();
    m.resize(n, Mat::zeros(2, 2));
    OperatorTuple::new(m).expect("square blocks")
}

/// A tuple of dimension `≤ 4` from a mix of commuting, generic, flip-type and
/// conjugated mixtures.
fn corollary5_tuple(rng: &mut sample::SeededRng, n: usize) -> OperatorTuple {
    match rng.random_range(0..4) {
        0 => {
            let dim = rng.random_range(1..=4);
            sample::random_commuting(rng, n, dim, sample::DEFAULT_MARGIN)
        }
        1 => {
            let dim = rng.random_range(1..=4);
            sample::random_row_contraction(rng, n, dim, sample::DEFAULT_MARGIN)
        }
        2 => padded_flip(n),
        _ => {
            let dim = rng.random_range(1..=2);
            let c = sample::random_commuting(rng, n, dim, sample::DEFAULT_MARGIN);
            let mixed = c.direct_sum(&padded_flip(n)).expect("same arity");
            let u = sample::haar_unitary(rng, mixed.dim());
            mixed.conjugate(&u).expect("square unitary")
        }
    }
}

fn corollary5_case(r: &OperatorTuple, t: &OperatorTuple, tol: &Tolerances) -> Result<(usize, usize, f64, usize, usize, f64)> {
    let pr = maximal_commuting_piece(r, tol)?;
    let pt = maximal_commuting_piece(t, tol)?;
    let sum = maximal_commuting_piece(&r.direct_sum(t)?, tol)?;
    let expected_sum = pr.subspace.direct_sum(&pt.subspace);
    let tensor = maximal_commuting_piece(&r.tensor_with_identity(2)?, tol)?;
    let expected_tensor = pr.subspace.tensor_identity(2);
    Ok((
        sum.subspace.dim(),
        expected_sum.dim(),
        sum.subspace.max_angle(&expected_sum),
        tensor.subspace.dim(),
        expected_tensor.dim(),
        tensor.subspace.max_angle(&expected_tensor),
    ))
}

/// Commuting pieces of direct sums and of `R ⊗ I_2` factor blockwise.
pub fn check_corollary5(seed: u64, trials: usize, angle_tol: f64, tol: &Tolerances, exec: Execution) -> CheckReport {
    let mut rng = sample::rng(seed);
    let cases: Vec<(OperatorTuple, OperatorTuple)> = (0..trials)
        .map(|_| {
            let n = rng.random_range(2..=3);
            (corollary5_tuple(&mut rng, n), corollary5_tuple(&mut rng, n))
        })
        .collect();
    let results = exec.map(&cases, |(r, t)| corollary5_case(r, t, tol));
    let mut report = CheckReport::new("corollary5/random-pairs");
    report
        .input("trials", trials)
        .input("seed", seed)
        .tolerance("angle", angle_tol)
        .tolerance("rank_tol", tol.rank_tol);
    let mut worst: f64 = 0.0;
    let mut mismatches = 0;
    let mut errors = 0;
    for (k, res) in results.iter().enumerate() {
        match res {
            Ok((sd, se, sa, td, te, ta)) => {
                worst = worst.max(*sa).max(*ta);
                if sd != se || td != te {
                    mismatches += 1;
                    report.note(format!("trial {k}: sum dims {sd} vs {se}, tensor dims {td} vs {te}"));
                }
            }
            Err(e) => {
                errors += 1;
                report.note(format!("trial {k}: {e}"));
            }
        }
    }
    report.residual("max_angle", worst);
    report.assert_count("construction errors", errors, 0);
    report.assert_count("dimension mismatches", mismatches, 0);
    report.assert_le("max principal angle", worst, angle_tol);
    report
}
