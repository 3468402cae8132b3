//! Semigroup generators on the disk in Berkson-Porta form
//! f(z) = (z - tau)(1 - z conj(tau)) p(z), with p of nonnegative real part.

use num_complex::Complex64;

use crate::caratheodory::{certify_positive, CaratheodoryFn};
use crate::error::CoreError;
use crate::holomap::{radial_limit, DiskGrid, HoloMap};
use crate::Result;

const LIMIT_TOL: f64 = 1e-6;

/// A generator with its null point and Berkson-Porta datum.
#[derive(Clone, Debug)]
pub struct Generator {
    tau: Complex64,
    p: CaratheodoryFn,
    f: HoloMap,
}

impl Generator {
    pub fn tau(&self) -> Complex64 {
        self.tau
    }

    pub fn p(&self) -> &CaratheodoryFn {
        &self.p
    }

    pub fn f(&self) -> &HoloMap {
        &self.f
    }

    /// True when Re p vanishes identically on the certification grid, the
    /// elliptic-automorphism edge case this module does not otherwise detect.
    pub fn elliptic_automorphism_warning(&self) -> Result<bool> {
        for &z in &DiskGrid::certification().points {
            if self.p.eval(z)?.re.abs() > 1e-9 {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// The Berkson-Porta monomial (z - tau)(1 - z conj(tau)).
pub fn bp_prefactor(tau: Complex64) -> HoloMap {
    (HoloMap::identity() - HoloMap::constant(tau))
        * (HoloMap::constant(1.0) - HoloMap::identity() * HoloMap::constant(tau.conj()))
}

/// Build the generator f = (z - tau)(1 - z conj(tau)) p(z).
pub fn assemble(tau: Complex64, p: CaratheodoryFn) -> Generator {
    assert!(tau.norm() <= 1.0 + 1e-12, "null point must lie in the closed disk");
    let f = bp_prefactor(tau) * p.map().clone();
    Generator { tau, p, f }
}

/// Recover p from f and a null point: p = f / [(z - tau)(1 - z conj(tau))],
/// certified positive. Fails with `NotPositive` exactly when f is not a
/// generator with Denjoy-Wolff point tau.
pub fn decompose(f: &HoloMap, tau: Complex64) -> Result<CaratheodoryFn> {
    let quotient = f.clone() / bp_prefactor(tau);
    certify_positive(&quotient, &DiskGrid::certification())
}

/// The derivative of f at its null point.
///
/// For |tau| = 1 this is the angular derivative beta, validated to be a
/// nonnegative real within 1e-8; for interior tau it is the complex number
/// (1 - |tau|^2) p(tau).
pub fn null_point_derivative(g: &Generator) -> Result<Complex64> {
    if (g.tau.norm() - 1.0).abs() < 1e-12 {
        let ratio = g.f.clone() / (HoloMap::identity() - HoloMap::constant(g.tau));
        let (beta, _) = radial_limit(&ratio, g.tau, LIMIT_TOL)?;
        if beta.im.abs() > 1e-8 || beta.re < -1e-8 {
            return Err(CoreError::NotNonnegativeReal { value: beta });
        }
        Ok(Complex64::new(beta.re.max(0.0), 0.0))
    } else {
        let scale = 1.0 - g.tau.norm_sqr();
        Ok(g.p.eval(g.tau)? * scale)
    }
}

/// Outcome of testing f for membership in the class of generators vanishing
/// angularly at 1 with strictly positive angular derivative.
#[derive(Clone, Debug)]
pub enum G1Verdict {
    Member { beta: f64, p: CaratheodoryFn },
    /// The Berkson-Porta quotient at tau = 1 is not of positive real part.
    NotBerksonPorta { min_re: f64, at: Complex64 },
    /// Valid generator but the angular derivative is not strictly positive.
    DegenerateBeta { beta: f64 },
}

impl G1Verdict {
    pub fn is_member(&self) -> bool {
        matches!(self, G1Verdict::Member { .. })
    }

    pub fn beta(&self) -> Option<f64> {
        match self {
            G1Verdict::Member { beta, .. } => Some(*beta),
            G1Verdict::DegenerateBeta { beta } => Some(*beta),
            G1Verdict::NotBerksonPorta { .. } => None,
        }
    }
}

/// Decide membership in G+[1] by decomposing at tau = 1 and taking the
/// angular derivative.
pub fn check_g_plus_one(f: &HoloMap) -> Result<G1Verdict> {
    let p = match decompose(f, Complex64::new(1.0, 0.0)) {
        Ok(p) => p,
        Err(CoreError::NotPositive { min_re, at }) => {
            return Ok(G1Verdict::NotBerksonPorta { min_re, at })
        }
        Err(e) => return Err(e),
    };
    let ratio = f.clone() / (HoloMap::identity() - HoloMap::constant(1.0));
    let (beta, _) = radial_limit(&ratio, Complex64::new(1.0, 0.0), LIMIT_TOL)?;
    if beta.im.abs() > 1e-8 {
        return Err(CoreError::NotNonnegativeReal { value: beta });
    }
    if beta.re <= 1e-10 {
        return Ok(G1Verdict::DegenerateBeta { beta: beta.re.max(0.0) });
    }
    Ok(G1Verdict::Member { beta: beta.re, p })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::caratheodory::{charge, ChargeMethod};
    use crate::stock;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn certified(m: HoloMap) -> CaratheodoryFn {
        certify_positive(&m, &DiskGrid::certification()).unwrap()
    }

    #[test]
    fn assemble_cancels_to_linear_generator() {
        // tau = 1, p = 1/(1-z): f = (z-1)(1-z)/(1-z) = z - 1 pointwise
        let g = assemble(c(1.0, 0.0), certified(stock::half_plane()));
        let z = c(0.3, 0.4);
        let expected = stock::z_minus_one().eval(z).unwrap();
        assert!((g.f().eval(z).unwrap() - expected).norm() < 1e-14);
    }

    #[test]
    fn assemble_interior_identity() {
        let g = assemble(c(0.0, 0.0), certified(HoloMap::constant(1.0)));
        let z = c(0.5, -0.2);
        assert!((g.f().eval(z).unwrap() - z).norm() < 1e-15);
        // interior null point is an exact zero of f
        assert_eq!(g.f().eval(g.tau()).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn assemble_parabolic_square() {
        // tau = 1, p = 1: f = -(1-z)^2
        let g = assemble(c(1.0, 0.0), certified(HoloMap::constant(1.0)));
        let z = c(0.4, 0.1);
        let expected = -(stock::one_minus_z() * stock::one_minus_z())
            .eval(z)
            .unwrap();
        assert!((g.f().eval(z).unwrap() - expected).norm() < 1e-14);
    }

    #[test]
    fn decompose_inverts_assemble() {
        let taus = [c(0.0, 0.0), c(0.5, 0.0), c(0.0, 0.5), c(1.0, 0.0)];
        let ps = [HoloMap::constant(1.0), stock::half_plane(), stock::cayley()];
        let grid = DiskGrid::certification();
        for &tau in &taus {
            for p in &ps {
                let g = assemble(tau, certified(p.clone()));
                let q = decompose(g.f(), tau).unwrap();
                for &z in grid.points.iter().step_by(11) {
                    let a = p.eval(z).unwrap();
                    let b = q.eval(z).unwrap();
                    assert!((a - b).norm() < 1e-11, "tau={tau} z={z}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn decompose_of_linear_generator() {
        let p = decompose(&stock::z_minus_one(), c(1.0, 0.0)).unwrap();
        let z = c(0.2, 0.6);
        let expected = stock::half_plane().eval(z).unwrap();
        assert!((p.eval(z).unwrap() - expected).norm() < 1e-12);
    }

    #[test]
    fn decompose_rejects_wrong_null_point() {
        // f = -(1-z)^2 against tau = 0: p = -(1-z)^2/z has Re p(0.5) = -0.5
        let f = -(stock::one_minus_z() * stock::one_minus_z());
        match decompose(&f, c(0.0, 0.0)) {
            Err(CoreError::NotPositive { min_re, .. }) => assert!(min_re < -0.4),
            other => panic!("expected NotPositive, got {other:?}"),
        }
        let quotient = f / HoloMap::identity();
        let direct = quotient.eval(c(0.5, 0.0)).unwrap();
        assert!((direct - c(-0.5, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn boundary_derivative_of_stock_generators() {
        let g = assemble(c(1.0, 0.0), certified(stock::half_plane()));
        let beta = null_point_derivative(&g).unwrap();
        assert!((beta - c(1.0, 0.0)).norm() < 1e-9);

        let parabolic = assemble(c(1.0, 0.0), certified(HoloMap::constant(1.0)));
        let beta0 = null_point_derivative(&parabolic).unwrap();
        assert!(beta0.norm() < 1e-10);
    }

    #[test]
    fn interior_derivative() {
        let g = assemble(c(0.5, 0.0), certified(HoloMap::constant(1.0)));
        let d = null_point_derivative(&g).unwrap();
        assert!((d - c(0.75, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn g_plus_one_membership() {
        match check_g_plus_one(&stock::z_minus_one()).unwrap() {
            G1Verdict::Member { beta, .. } => assert!((beta - 1.0).abs() < 1e-8),
            other => panic!("z - 1 should be a member, got {other:?}"),
        }

        let parabolic = -(stock::one_minus_z() * stock::one_minus_z());
        match check_g_plus_one(&parabolic).unwrap() {
            G1Verdict::DegenerateBeta { beta } => assert!(beta.abs() < 1e-8),
            other => panic!("-(1-z)^2 has beta = 0, got {other:?}"),
        }

        match check_g_plus_one(&HoloMap::identity()).unwrap() {
            G1Verdict::NotBerksonPorta { .. } => {}
            other => panic!("z is not in G+[1], got {other:?}"),
        }
    }

    #[test]
    fn real_cone_property() {
        let tau = c(0.5, 0.0);
        let f1 = assemble(tau, certified(HoloMap::constant(1.0))).f().clone();
        let f2 = assemble(tau, certified(stock::cayley())).f().clone();
        let combo = HoloMap::constant(2.0) * f1 + HoloMap::constant(3.0) * f2;
        decompose(&combo, tau).unwrap();
    }

    #[test]
    fn boundary_beta_equals_charge() {
        for p in [HoloMap::constant(1.0), stock::half_plane(), stock::cayley()] {
            let cp = certified(p);
            let expected = charge(&cp, c(1.0, 0.0), ChargeMethod::RadialLimit)
                .unwrap()
                .delta;
            let g = assemble(c(1.0, 0.0), cp);
            let beta = null_point_derivative(&g).unwrap().re;
            assert!((beta - expected).abs() < 1e-6, "{beta} vs {expected}");
        }
    }

    #[test]
    fn no_elliptic_warning_for_stock_inputs() {
        let g = assemble(c(0.5, 0.0), certified(stock::half_plane()));
        assert!(!g.elliptic_automorphism_warning().unwrap());
    }
}
