use chinpaint::gpc::{
    evaluate_expansion, project, quadrature, weighted_l2_error, PolynomialFamily,
};
use proptest::prelude::*;

fn families() -> Vec<PolynomialFamily> {
    vec![
        PolynomialFamily::hermite(1.0, 8).unwrap(),
        PolynomialFamily::hermite(0.4, 8).unwrap(),
        PolynomialFamily::legendre(-1.0, 1.0, 8).unwrap(),
        PolynomialFamily::legendre(0.0, 3.0, 8).unwrap(),
    ]
}

/// Checked on the normalised basis `Φₙ/√γₙ`: the raw degree-8 Hermite
/// polynomials have norms near 200, so an absolute bound on them would sit
/// below double precision.
#[test]
fn orthogonal_up_to_degree_eight() {
    for fam in families() {
        let rule = quadrature(&fam, 12).unwrap();
        let unit = |n: usize, z: f64| fam.eval(n, z).unwrap() / fam.norm_factor(n).unwrap().sqrt();
        for m in 0..=8 {
            for n in 0..=8 {
                let e = rule.integrate(|z| unit(m, z) * unit(n, z));
                let expect = if m == n { 1.0 } else { 0.0 };
                assert!((e - expect).abs() <= 1e-12, "{fam:?} {m} {n}: {e}");
            }
        }
    }
}

#[test]
fn analytic_functions_converge_monotonically() {
    for fam in families() {
        let oracle = quadrature(&fam, 64).unwrap();
        let f = |z: f64| (0.5 * z).sin() + (0.3 * z).exp();
        let mut last = f64::INFINITY;
        for n in 0..=8 {
            let fam = fam.with_max_degree(n);
            let c = project(f, &fam, n).unwrap();
            let e = weighted_l2_error(f, &c, &fam, &oracle);
            assert!(e < last, "{fam:?} N={n}");
            last = e;
        }
    }
}

proptest! {
    #[test]
    fn projection_is_the_best_approximation(
        coeffs in prop::collection::vec(-2.0f64..2.0, 6),
        hermite in any::<bool>(),
        which in 0usize..4,
        sign in prop::sample::select(vec![-1.0f64, 1.0]),
    ) {
        // f is a degree-5 polynomial, projected at N = 3
        let n = 3;
        let fam = if hermite {
            PolynomialFamily::hermite(0.8, n).unwrap()
        } else {
            PolynomialFamily::legendre(-1.0, 2.0, n).unwrap()
        };
        let f = |z: f64| coeffs.iter().rev().fold(0.0, |acc, c| acc * z + c);
        let oracle = quadrature(&fam, 10).unwrap();
        let best = project(f, &fam, n).unwrap();
        let base = weighted_l2_error(f, &best, &fam, &oracle);
        let mut moved = best.clone();
        moved[which] += sign * 0.01;
        let err = weighted_l2_error(f, &moved, &fam, &oracle);
        prop_assert!(err >= base, "{err} < {base}");
        // error is exactly ‖residual‖² + γ δ²
        let gamma = fam.norm_factor(which).unwrap();
        prop_assert!((err * err - base * base - gamma * 1e-4).abs() < 1e-9 * (1.0 + base * base));
        let z = 0.37;
        prop_assert!((evaluate_expansion(&moved, &fam, z) - evaluate_expansion(&best, &fam, z)).abs() > 0.0);
    }
}
