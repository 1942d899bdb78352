use onsager_skeleton::laurent::{
    factor_square, poly_roots, r_alpha, schur_cohn_bk, sqrt_truncate, LaurentPoly, SquareFactorization,
};
use proptest::prelude::*;

fn coeffs(max_d: usize) -> impl Strategy<Value = Vec<f64>> {
    (0..=max_d).prop_flat_map(|d| {
        (0.2f64..2.0, prop::collection::vec(-1.5f64..1.5, d)).prop_map(|(s0, rest)| {
            let mut s = vec![s0];
            s.extend(rest);
            if let Some(last) = s.last_mut() {
                if last.abs() < 0.05 {
                    *last = 0.05f64.copysign(*last);
                }
            }
            s
        })
    })
}

/// Monic real polynomial from its roots, constant term first.
fn from_roots(real: &[f64], pairs: &[(f64, f64)]) -> Vec<f64> {
    let mut c = vec![1.0];
    let mut times = |q: &[f64]| {
        let mut next = vec![0.0; c.len() + q.len() - 1];
        for (i, &x) in c.iter().enumerate() {
            for (j, &y) in q.iter().enumerate() {
                next[i + j] += x * y;
            }
        }
        c = next;
    };
    for &r in real {
        times(&[-r, 1.0]);
    }
    for &(m, t) in pairs {
        times(&[m * m, -2.0 * m * t.cos(), 1.0]);
    }
    c
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn factor_square_inverts_reconstruct(s in coeffs(4), p in -4i64..5, minus in any::<bool>()) {
        let sf = SquareFactorization { sign: if minus { -1 } else { 1 }, p, s };
        let f = sf.reconstruct().unwrap();
        let back = factor_square(&f).expect("square detected");
        prop_assert_eq!(back.sign, sf.sign);
        prop_assert_eq!(back.p, sf.p);
        prop_assert_eq!(back.s.len(), sf.s.len());
        for (x, y) in back.s.iter().zip(&sf.s) {
            prop_assert!((x - y).abs() <= 1e-10 * sf.s[0].abs().max(1.0), "{x} vs {y}");
        }
    }

    #[test]
    fn bk_is_scale_invariant(s in coeffs(5), c in prop_oneof![-3.0f64..-0.1, 0.1f64..3.0]) {
        let a = schur_cohn_bk(&s).unwrap();
        let scaled: Vec<f64> = s.iter().map(|x| c * x).collect();
        let b = schur_cohn_bk(&scaled).unwrap();
        prop_assert_eq!(a.b.len(), b.b.len());
        for (x, y) in a.b.iter().zip(&b.b) {
            match (x, y) {
                (Some(x), Some(y)) => prop_assert!((x - y).abs() <= 1e-10 * x.abs().max(1.0)),
                (None, None) => {}
                _ => prop_assert!(false, "recursion stopped differently: {:?} vs {:?}", a.b, b.b),
            }
        }
    }

    #[test]
    fn outside_roots_give_subunit_bk(
        real in prop::collection::vec(prop_oneof![-4.0f64..-1.1, 1.1f64..4.0], 0..=3),
        pairs in prop::collection::vec((1.1f64..3.0, 0.1f64..3.0), 0..=1),
    ) {
        prop_assume!(!real.is_empty() || !pairs.is_empty());
        let s = from_roots(&real, &pairs);
        let bk = schur_cohn_bk(&s).unwrap();
        let b = bk.values().unwrap();
        prop_assert!(b.iter().all(|x| x.abs() < 1.0), "b = {b:?}");
        let roots = poly_roots(&s).unwrap();
        prop_assert!(roots.iter().all(|z| z.norm() > 1.0));
    }

    #[test]
    fn r_alpha_sum_rules(s in coeffs(4)) {
        let r = r_alpha(&s).unwrap();
        let d = s.len() as i64 - 1;
        let norm2: f64 = s.iter().map(|x| x * x).sum();
        prop_assert!((r.get(0) - norm2).abs() <= 1e-10 * norm2.max(1.0));
        for alpha in 1..=d {
            let want: f64 = 2.0 * (alpha as usize..s.len()).map(|l| s[l] * s[l - alpha as usize]).sum::<f64>();
            let got = r.get(alpha) + r.get(-alpha);
            prop_assert!((got - want).abs() <= 1e-9 * norm2.max(1.0), "alpha={alpha}: {got} vs {want}");
        }
    }

    #[test]
    fn sqrt_truncation_converges(lambda in prop_oneof![-0.8f64..-0.1, 0.1f64..0.8]) {
        let f = LaurentPoly::new(0, vec![1.0, lambda]).unwrap();
        let ratio = lambda.abs().sqrt();
        let mut prev = sqrt_truncate(&f, 1).unwrap();
        for d in 2..=8usize {
            let next = sqrt_truncate(&f, d).unwrap();
            // both series indexed from −D, so shift by one slot
            let change = (0..next.g.len())
                .map(|i| {
                    let old = i.checked_sub(1).and_then(|j| prev.g.get(j)).copied().unwrap_or(0.0);
                    (next.g[i] - old).abs()
                })
                .fold(0f64, f64::max);
            prop_assert!(change <= 2.0 * ratio.powi(d as i32), "D={d}: change {change:e}");
            prev = next;
        }
    }
}
