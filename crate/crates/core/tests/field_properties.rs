use chinpaint::{implicit_solve, laplacian, ScalarField, SpectralPlan};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn implicit_solve_inverts_the_operator(
        w in 4usize..24,
        h in 4usize..24,
        seed in prop::collection::vec(-1.0f64..1.0, 24 * 24),
        a in 0.01f64..10.0,
        eps in 0.05f64..3.0,
        c1 in 0.0f64..10.0,
        c2 in 0.0f64..10.0,
    ) {
        let u = ScalarField::new(w, h, seed[..w * h].to_vec()).unwrap();
        let plan = SpectralPlan::for_field(&u).unwrap();
        // apply (a + εΔ² − c1Δ + c2) with the discrete Laplacian, then solve
        let lu = laplacian(&u, &plan).unwrap();
        let llu = laplacian(&lu, &plan).unwrap();
        let rhs: Vec<f64> = (0..w * h)
            .map(|k| a * u.values()[k] + eps * llu.values()[k] - c1 * lu.values()[k] + c2 * u.values()[k])
            .collect();
        let back = implicit_solve(&ScalarField::new(w, h, rhs).unwrap(), a, eps, c1, c2, &plan).unwrap();
        let scale = u.max_abs().max(1e-300);
        for (x, y) in back.values().iter().zip(u.values()) {
            prop_assert!((x - y).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn laplacian_has_zero_mean(
        seed in prop::collection::vec(-1.0f64..1.0, 16 * 12),
    ) {
        let u = ScalarField::new(16, 12, seed).unwrap();
        let plan = SpectralPlan::for_field(&u).unwrap();
        let l = laplacian(&u, &plan).unwrap();
        let total: f64 = l.values().iter().sum();
        let scale: f64 = l.values().iter().map(|v| v.abs()).sum();
        prop_assert!(total.abs() <= 1e-12 * scale.max(1.0));
    }
}

/// Second-order finite differences with mirrored ghost cells against the
/// spectral Laplacian of a smooth Neumann field: agreement improves as h².
#[test]
fn spectral_laplacian_matches_finite_differences() {
    let err = |n: usize| {
        let h = 1.0 / n as f64;
        let f = |x: f64, y: f64| {
            (std::f64::consts::PI * x).cos() * (2.0 * std::f64::consts::PI * y).cos()
                + (std::f64::consts::PI * y).cos()
        };
        let u = ScalarField::from_fn(n, n, h, f).unwrap();
        let plan = SpectralPlan::for_field(&u).unwrap();
        let l = laplacian(&u, &plan).unwrap();
        let at = |i: isize, j: isize| {
            let c = |k: isize| {
                if k < 0 {
                    -k - 1
                } else if k >= n as isize {
                    2 * n as isize - k - 1
                } else {
                    k
                }
            };
            u.get(c(i) as usize, c(j) as usize)
        };
        let mut worst: f64 = 0.0;
        for j in 0..n as isize {
            for i in 0..n as isize {
                let fd = (at(i + 1, j) + at(i - 1, j) + at(i, j + 1) + at(i, j - 1)
                    - 4.0 * at(i, j))
                    / (h * h);
                worst = worst.max((fd - l.get(i as usize, j as usize)).abs());
            }
        }
        worst
    };
    let (e32, e64) = (err(32), err(64));
    assert!(e64 < 0.3 * e32, "{e32} {e64}");
    assert!(e64 < 0.05);
}
