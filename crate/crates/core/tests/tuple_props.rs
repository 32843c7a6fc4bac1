use dilation_core::linalg::{identity, op_norm};
use dilation_core::{sample, OperatorTuple};
use proptest::prelude::*;

fn row_contraction() -> impl Strategy<Value = OperatorTuple> {
    (any::<u64>(), 1usize..=3, 1usize..=4, 0.0f64..0.5)
        .prop_map(|(seed, n, dim, margin)| sample::random_row_contraction(&mut sample::rng(seed), n, dim, margin))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn defect_squares_to_the_row_complement(t in row_contraction()) {
        let d = t.defect(1e-10, 1e-9).unwrap();
        let target = identity(t.dim()) - t.row_gram();
        prop_assert!(op_norm(&(&d.delta * &d.delta - target)) <= 1e-9);
        prop_assert!(op_norm(&(&d.delta - d.delta.adjoint())) <= 1e-12);
        let f = &d.defect_frame;
        prop_assert!(op_norm(&(f.adjoint() * f - identity(d.defect_rank))) <= 1e-10);
    }

    #[test]
    fn decay_sequence_is_nonincreasing(t in row_contraction()) {
        let s = t.decay_sequence(12);
        prop_assert!((s[0] - 1.0).abs() <= 1e-12);
        for w in s.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12, "{:?}", s);
        }
    }

    #[test]
    fn spherical_unitaries_satisfy_fuglede(seed in any::<u64>(), n in 2usize..=3, dim in 1usize..=5) {
        let (z, _, _) = sample::random_spherical_unitary(&mut sample::rng(seed), n, dim);
        for i in 0..n {
            for j in 0..n {
                let c = z.matrix(i) * z.matrix(j).adjoint() - z.matrix(j).adjoint() * z.matrix(i);
                prop_assert!(op_norm(&c) <= 1e-10);
            }
        }
        prop_assert!(z.is_spherical_unitary(1e-10));
    }

    #[test]
    fn conjugation_preserves_row_gram_spectrum(t in row_contraction(), seed in any::<u64>()) {
        let u = sample::haar_unitary(&mut sample::rng(seed), t.dim());
        let c = t.conjugate(&u).unwrap();
        prop_assert!((t.row_excess() - c.row_excess()).abs() <= 1e-10);
    }
}
