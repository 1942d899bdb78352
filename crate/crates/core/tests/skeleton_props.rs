use std::f64::consts::PI;

use onsager_skeleton::clock::ClockChain;
use onsager_skeleton::laurent::schur_cohn_bk;
use onsager_skeleton::linalg::C64;
use onsager_skeleton::skeleton::{charge_of, excited_state, fixed_point_state, skeleton_eigenstate, SkeletonSpec};
use proptest::prelude::*;

const SIZES: [(usize, usize); 4] = [(2, 4), (2, 6), (3, 3), (3, 6)];

fn layer_coeffs() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 1..=3)
        .prop_map(|rest| {
            let mut s = vec![1.0];
            s.extend(rest);
            s
        })
        .prop_filter("b_k away from the unit circle", |s| {
            schur_cohn_bk(s).and_then(|b| b.values()).is_ok_and(|b| b.iter().all(|x| x.abs() <= 0.95))
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn skeleton_state_is_charged_eigenstate(
        size in 0..SIZES.len(),
        s in layer_coeffs(),
        p in -2i64..4,
        minus in any::<bool>(),
        branch_seed in 0usize..6,
    ) {
        let (n, l) = SIZES[size];
        let sign = if minus { -1 } else { 1 };
        let branch = if p.rem_euclid(2) == 1 { branch_seed % n } else { 0 };
        let chain = ClockChain::new(n, l).unwrap();
        let spec = SkeletonSpec::new(chain.clone(), sign, p, s).unwrap();
        let base = fixed_point_state(&chain, p, sign, branch).unwrap();
        let pair = skeleton_eigenstate(&spec, &base).unwrap();
        prop_assert!(pair.residual <= 1e-8, "residual {:e}", pair.residual);
        prop_assert!(charge_of(&chain, &pair.state, 1e-9).unwrap().is_some());
    }

    #[test]
    fn sign_flip_keeps_energy(size in 0..SIZES.len(), s in layer_coeffs(), p in 0i64..4) {
        let (n, l) = SIZES[size];
        let chain = ClockChain::new(n, l).unwrap();
        let energy = |sign: i8| {
            let spec = SkeletonSpec::new(chain.clone(), sign, p, s.clone()).unwrap();
            skeleton_eigenstate(&spec, &fixed_point_state(&chain, p, sign, 0).unwrap()).unwrap().eigenvalue
        };
        let (plus, minus) = (energy(1), energy(-1));
        prop_assert!((plus - minus).abs() <= 1e-9 * plus.abs().max(1.0), "{plus} vs {minus}");
    }

    #[test]
    fn excitations_carry_momentum(size in 0..SIZES.len(), s in layer_coeffs(), half_p in -1i64..2, m in 0usize..6) {
        let (n, l) = SIZES[size];
        let chain = ClockChain::new(n, l).unwrap();
        let spec = SkeletonSpec::new(chain.clone(), 1, 2 * half_p, s).unwrap();
        let ex = excited_state(&spec, m % l).unwrap();
        prop_assert!(ex.residual <= 1e-8, "residual {:e}", ex.residual);
        let t = ex.state.inner(&chain.apply_translation(1, &ex.state).unwrap());
        let want = C64::from_polar(1.0, 2.0 * PI * (m % l) as f64 / l as f64);
        prop_assert!((t - want).norm() <= 1e-9);
    }
}
