use dilation_core::fock::{binomial, creation_tuple, enumerate_indices, symmetric_basis, MultiIndex, SymmetricBasis, TruncatedFock};
use dilation_core::linalg::{identity, max_abs};
use dilation_core::tuples::TupleAction;
use proptest::prelude::*;

fn space() -> impl Strategy<Value = TruncatedFock> {
    (2usize..=3, 1usize..=4).prop_map(|(n, m)| TruncatedFock::new(n, m).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn index_table_is_a_graded_bijection(space in space()) {
        prop_assert_eq!(space.index(&MultiIndex::empty()).unwrap(), 0);
        let mut last_degree = 0;
        for idx in 0..space.dim() {
            let w = space.word(idx);
            prop_assert_eq!(space.index(&w).unwrap(), idx);
            prop_assert!(w.len() >= last_degree);
            last_degree = w.len();
        }
        let expected: usize = (0..=space.degree()).map(|m| space.n().pow(m as u32)).sum();
        prop_assert_eq!(space.dim(), expected);
    }

    #[test]
    fn creation_operators_are_exact_below_the_top(space in space()) {
        let v = creation_tuple(&space);
        let below = space.window_projection(space.degree() - 1);
        for i in 0..space.n() {
            for j in 0..space.n() {
                let g = v.matrix(i).adjoint() * v.matrix(j) * &below;
                let target = if i == j { below.clone() } else { below.scale(0.0) };
                prop_assert!(max_abs(&(g - target)) == 0.0);
            }
        }
        // every V_i raises the degree by exactly one
        for idx in 0..space.dim() {
            let e = space.basis_vector(idx);
            for i in 0..space.n() {
                let img = v.apply(i, &e);
                match space.child(i, idx) {
                    Some(c) => prop_assert_eq!(img, space.basis_vector(c)),
                    None => prop_assert!(img.iter().all(|z| z.norm() == 0.0)),
                }
            }
        }
    }

    #[test]
    fn symmetric_frame_is_orthonormal_and_permutation_fixed(space in space()) {
        let sym: SymmetricBasis = symmetric_basis(&space);
        let f = sym.frame();
        prop_assert!(max_abs(&(f.adjoint() * &f - identity(f.ncols()))) <= 1e-12);
        for m in 0..=space.degree() {
            prop_assert_eq!(sym.degree_dim(m), binomial(space.n() + m - 1, m));
        }
        for c in 0..f.ncols() {
            let col = f.column(c).into_owned();
            for k in 0..space.degree().saturating_sub(1) {
                prop_assert!((space.swap_factors(k, &col) - &col).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn enumeration_counts(n in 1usize..=4, m in 0usize..=4) {
        let words = enumerate_indices(n, m).unwrap();
        prop_assert_eq!(words.len(), n.pow(m as u32));
        prop_assert!(words.iter().all(|w| w.len() == m && w.letters().iter().all(|&l| l < n)));
    }
}
