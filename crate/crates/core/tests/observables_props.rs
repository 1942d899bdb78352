use onsager_skeleton::linalg::{kron, matexp_hermitian, DenseOperator, C64};
use onsager_skeleton::observables::{
    disorder_finite_l, disorder_thermo, disorder_transfer, disorder_transfer_by_sums, energy_density_integral,
};
use proptest::prelude::*;

fn hermitian(dim: usize) -> impl Strategy<Value = DenseOperator> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim * dim).prop_map(move |v| {
        let m = DenseOperator::from_fn(dim, |i, j| C64::new(v[i * dim + j].0, v[i * dim + j].1));
        let mut h = m.clone();
        h.axpy(C64::new(1.0, 0.0), &m.adjoint());
        h
    })
}

fn even_n() -> impl Strategy<Value = usize> {
    prop::sample::select(vec![2usize, 4, 6, 8])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transfer_routes_agree(n in even_n(), a in -0.95f64..0.95) {
        let closed = disorder_transfer(n, a).unwrap();
        let sums = disorder_transfer_by_sums(n, a).unwrap();
        let scale = closed.t.frobenius_norm().max(closed.b.frobenius_norm());
        let mut dt = closed.t.clone();
        dt.axpy(C64::new(-1.0, 0.0), &sums.t);
        let mut db = closed.b.clone();
        db.axpy(C64::new(-1.0, 0.0), &sums.b);
        prop_assert!(dt.frobenius_norm() <= 1e-12 * scale);
        prop_assert!(db.frobenius_norm() <= 1e-12 * scale);
    }

    #[test]
    fn thermo_value_is_n_independent(n in even_n(), a in -0.95f64..0.95) {
        let got = disorder_thermo(n, a).unwrap();
        prop_assert!((got - (1.0 - a * a).sqrt()).abs() <= 1e-12);
    }

    #[test]
    fn finite_l_error_within_rate(n in even_n(), a in 0.1f64..0.9, l in 4usize..24) {
        let pair = disorder_transfer(n, a).unwrap();
        let dev = (disorder_finite_l(n, a, l).unwrap() - disorder_thermo(n, a).unwrap()).abs();
        // the prefactor is |v_1ᵀBv_1|/λ_0 summed over the subleading modes, below N
        prop_assert!(dev <= n as f64 * pair.rate().powi(l as i32) + 1e-13, "deviation {dev:e}");
    }

    #[test]
    fn fixed_point_energy_integral(n in 2usize..=8) {
        let want = -(n as f64 - 1.0) / (2.0 * n as f64);
        prop_assert!((energy_density_integral(&[1.0], n).unwrap() - want).abs() <= 1e-9);
    }

    #[test]
    fn matexp_pairs_and_unitarity(h in hermitian(4), s in -2.0f64..2.0) {
        let fwd = matexp_hermitian(&h, C64::new(s, 0.0)).unwrap();
        let back = matexp_hermitian(&h, C64::new(-s, 0.0)).unwrap();
        let mut d = fwd.matmul(&back);
        d.axpy(C64::new(-1.0, 0.0), &DenseOperator::identity(4));
        prop_assert!(d.frobenius_norm() <= 1e-10 * fwd.frobenius_norm().max(1.0) * back.frobenius_norm().max(1.0));
        let u = matexp_hermitian(&h, C64::new(0.0, s)).unwrap();
        let mut e = u.adjoint().matmul(&u);
        e.axpy(C64::new(-1.0, 0.0), &DenseOperator::identity(4));
        prop_assert!(e.frobenius_norm() <= 1e-10);
    }

    #[test]
    fn kron_associates(a in hermitian(2), b in hermitian(3), c in hermitian(2)) {
        let left = kron(&kron(&a, &b).unwrap(), &c).unwrap();
        let right = kron(&a, &kron(&b, &c).unwrap()).unwrap();
        let mut d = left.clone();
        d.axpy(C64::new(-1.0, 0.0), &right);
        prop_assert!(d.frobenius_norm() <= 1e-14 * left.frobenius_norm().max(1.0));
    }
}
