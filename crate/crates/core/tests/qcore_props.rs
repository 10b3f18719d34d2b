use proptest::prelude::*;
use qthermo::qcore::{
    fock_operators, gibbs_state, hermitian_eigen, von_neumann_entropy, ComplexMatrix, DensityMatrix, FockTruncation, C64,
};

fn hermitian(n: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n * n).prop_map(move |v| {
        let m = ComplexMatrix::from_vec(n, v.into_iter().map(|(re, im)| C64::new(re, im)).collect()).unwrap();
        m.hermitian_part()
    })
}

fn sized_hermitian() -> impl Strategy<Value = ComplexMatrix> {
    (2usize..10).prop_flat_map(hermitian)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn gibbs_states_are_valid(h in sized_hermitian(), log_t in (1e-3f64).ln()..(1e9f64).ln()) {
        let rho = gibbs_state(&h, log_t.exp()).unwrap();
        // re-validating through the strict constructor checks every invariant
        prop_assert!(DensityMatrix::new(rho.matrix().clone()).is_ok());
    }

    #[test]
    fn eigenvalues_sum_to_trace(h in sized_hermitian()) {
        let eig = hermitian_eigen(&h).unwrap();
        let sum: f64 = eig.values.iter().sum();
        let tr = h.trace().re;
        prop_assert!((sum - tr).abs() <= 1e-9 * tr.abs().max(1.0));
        prop_assert!(eig.reconstruct().sub_max_abs(&h) < 1e-10);
    }

    #[test]
    fn entropy_is_unitarily_invariant(h in hermitian(6), g in hermitian(6), t in 0.1..5.0f64) {
        let rho = gibbs_state(&h, t).unwrap();
        let u = hermitian_eigen(&g).unwrap().vectors;
        let rotated = DensityMatrix::new(&(&u * rho.matrix()) * &u.adjoint()).unwrap();
        let s0 = von_neumann_entropy(&rho).unwrap();
        let s1 = von_neumann_entropy(&rotated).unwrap();
        prop_assert!((s0 - s1).abs() <= 1e-9);
    }
}

trait MaxAbsDiff {
    fn sub_max_abs(&self, other: &ComplexMatrix) -> f64;
}

impl MaxAbsDiff for ComplexMatrix {
    fn sub_max_abs(&self, other: &ComplexMatrix) -> f64 {
        (self - other).max_abs()
    }
}

#[test]
fn truncated_commutator_entrywise() {
    for d in [2, 5, 30, 64] {
        let ops = fock_operators(FockTruncation::new(d).unwrap());
        let c = &(&ops.a * &ops.a_dag) - &(&ops.a_dag * &ops.a);
        for i in 0..d {
            for j in 0..d {
                let want = match (i == j, i == d - 1) {
                    (true, true) => 1.0 - d as f64,
                    (true, false) => 1.0,
                    _ => 0.0,
                };
                // (√k)² rounds, so equality holds to the last bit only
                assert!((c[(i, j)] - C64::new(want, 0.0)).norm() <= 1e-12 * d as f64, "d={d} ({i},{j})");
            }
        }
    }
}
