//! Property tests for the algebraic invariants that hold across whole
//! parameter regions rather than at hand-picked points.

use diskflow::holomap::{integrate_reciprocal_segment, HoloMap, QUAD_ORDER};
use diskflow::spectrum::{classify_lambda, Valence};
use diskflow::stock;
use num_complex::Complex64;
use proptest::prelude::*;

fn disk_point(r_max: f64) -> impl Strategy<Value = Complex64> {
    (0.0..r_max, 0.0..std::f64::consts::TAU)
        .prop_map(|(r, theta)| Complex64::from_polar(r, theta))
}

fn exponent() -> impl Strategy<Value = Complex64> {
    (-1.0..1.5, -1.0..1.0).prop_map(|(re, im)| Complex64::new(re, im))
}

proptest! {
    // principal powers with a common positive-real-part base are additive
    // in the exponent
    #[test]
    fn power_addition_law(z in disk_point(0.8), a in exponent(), b in exponent()) {
        let m = stock::cayley();
        let left = HoloMap::power(m.clone(), a) * HoloMap::power(m.clone(), b);
        let right = HoloMap::power(m, a + b);
        let lv = left.eval(z).unwrap();
        let rv = right.eval(z).unwrap();
        prop_assert!((lv - rv).norm() < 1e-12, "{lv} vs {rv} at {z}");
    }

    // the reciprocal path integral of a zero-free field is path-independent:
    // straight segment vs a two-leg polyline through (z/2) e^{i theta}
    #[test]
    fn path_independence(z in disk_point(0.8), theta in -0.5f64..0.5) {
        let fields = [
            stock::z_minus_one(),
            -(stock::one_minus_z() * stock::one_minus_z()),
            (HoloMap::identity() * HoloMap::identity() - HoloMap::constant(1.0))
                * HoloMap::constant(0.5),
        ];
        let origin = Complex64::new(0.0, 0.0);
        for f in &fields {
            let direct = integrate_reciprocal_segment(f, origin, z, QUAD_ORDER).unwrap();
            let mid = z * 0.5 * Complex64::from_polar(1.0, theta);
            let legs = integrate_reciprocal_segment(f, origin, mid, QUAD_ORDER).unwrap()
                + integrate_reciprocal_segment(f, mid, z, QUAD_ORDER).unwrap();
            prop_assert!((direct - legs).norm() < 1e-9);
        }
    }

    // classify_lambda returns the minimal k under the set formula: lambda
    // lies inside the k-scaled region and outside the (k-1)-scaled one
    #[test]
    fn classification_minimality(
        re in prop::num::f64::NORMAL.prop_filter("off axis", |x| x.abs() > 1e-3 && x.abs() < 100.0),
        im in -100.0f64..100.0,
        beta in 0.1f64..10.0,
    ) {
        let lambda = Complex64::new(re, im);
        let ratio = lambda.norm_sqr() / (2.0 * beta * re.abs());
        // keep k in a floating-point-resolvable range and off cell boundaries
        prop_assume!(ratio < 1e4);
        prop_assume!((ratio - ratio.round()).abs() > 1e-6 * ratio.max(1.0));
        let inside = |k: f64| {
            k > 0.0
                && ((lambda - Complex64::new(k * beta, 0.0)).norm() <= k * beta * (1.0 + 1e-12)
                    || (lambda + Complex64::new(k * beta, 0.0)).norm() <= k * beta * (1.0 + 1e-12))
        };
        match classify_lambda(lambda, beta).k {
            Valence::Finite(k) => {
                prop_assert!(inside(k as f64), "lambda {lambda} not in {k} Omega");
                prop_assert!(
                    k == 1 || !inside((k - 1) as f64),
                    "lambda {lambda} already in {} Omega",
                    k - 1
                );
            }
            Valence::Infinite => prop_assert!(re.abs() <= 1e-12),
        }
    }
}
