use dilation_core::linalg::c64;
use dilation_core::piece::{adjoint_kernel, coinvariance_residual, commutator_closure, maximal_commuting_piece};
use dilation_core::tuples::flip_pair;
use dilation_core::{sample, Mat, OperatorTuple, Subspace, Tolerances};
use proptest::prelude::*;
use rand::Rng;

/// Generic, commuting, or a direct sum of both, small enough for the dense path.
fn tuple() -> impl Strategy<Value = OperatorTuple> {
    (any::<u64>(), 0usize..3, 2usize..=3).prop_map(|(seed, kind, n)| {
        let mut rng = sample::rng(seed);
        let dim = rng.random_range(1..=3);
        match kind {
            0 => sample::random_row_contraction(&mut rng, n, dim, 0.05),
            1 => sample::random_commuting(&mut rng, n, dim, 0.05),
            _ => {
                let c = sample::random_commuting(&mut rng, n, dim, 0.05);
                let mut flip = flip_pair().scaled(0.5).into_matrices();
                flip.resize(n, Mat::zeros(2, 2));
                c.direct_sum(&OperatorTuple::new(flip).unwrap()).unwrap()
            }
        }
    })
}

fn tol() -> Tolerances {
    Tolerances::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn closure_and_adjoint_kernel_are_complementary(t in tuple()) {
        let k = commutator_closure(&t, 1e-9);
        let l = adjoint_kernel(&t, 1e-9).subspace;
        prop_assert_eq!(k.dim() + l.dim(), t.dim());
        if k.dim() > 0 && l.dim() > 0 {
            let overlap = dilation_core::linalg::op_norm(&(k.frame().adjoint() * l.frame()));
            prop_assert!(overlap <= 1e-8);
        }
    }

    #[test]
    fn piece_is_coinvariant_and_commuting(t in tuple()) {
        let p = maximal_commuting_piece(&t, &tol()).unwrap();
        prop_assert!(coinvariance_residual(&t, &p.subspace) <= 1e-10);
        prop_assert!(p.residual <= 1e-10);
    }

    #[test]
    fn known_commuting_block_lies_in_the_piece(t in tuple(), seed in any::<u64>()) {
        // T ⊕ C with C commuting: the C coordinates are co-invariant with commuting compression
        let mut rng = sample::rng(seed);
        let c = sample::random_commuting(&mut rng, t.n(), 2, 0.05);
        let sum = t.direct_sum(&c).unwrap();
        let p = maximal_commuting_piece(&sum, &tol()).unwrap();
        let block = Subspace::new(Mat::from_fn(sum.dim(), 2, |i, j| {
            if i == t.dim() + j { c64(1.0, 0.0) } else { c64(0.0, 0.0) }
        }), 1e-12).unwrap();
        prop_assert!(p.subspace.contains(&block, 1e-8));
    }

    #[test]
    fn direct_sums_split(a in tuple(), seed in any::<u64>()) {
        let b = sample::random_row_contraction(&mut sample::rng(seed), a.n(), 2, 0.05);
        let pa = maximal_commuting_piece(&a, &tol()).unwrap().subspace;
        let pb = maximal_commuting_piece(&b, &tol()).unwrap().subspace;
        let ps = maximal_commuting_piece(&a.direct_sum(&b).unwrap(), &tol()).unwrap().subspace;
        let expected = pa.direct_sum(&pb);
        prop_assert_eq!(ps.dim(), expected.dim());
        prop_assert!(ps.max_angle(&expected) <= 1e-8);
    }

    #[test]
    fn ampliation_tensors(t in tuple(), k in 1usize..=3) {
        let p = maximal_commuting_piece(&t, &tol()).unwrap().subspace;
        let pk = maximal_commuting_piece(&t.tensor_with_identity(k).unwrap(), &tol()).unwrap().subspace;
        let expected = p.tensor_identity(k);
        prop_assert_eq!(pk.dim(), expected.dim());
        prop_assert!(pk.max_angle(&expected) <= 1e-8);
    }
}
