//! The Caratheodory class P of holomorphic functions with nonnegative real
//! part: sampling-based positivity certification, boundary charges, and
//! conformality data at the boundary point 1.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::CoreError;
use crate::holomap::{radial_limit, DiskGrid, HoloMap};
use crate::Result;

/// Certification threshold: the grid minimum of Re may dip this far below 0.
pub const POSITIVITY_TOL: f64 = 1e-9;

/// Tolerance used for the radial limits taken in this module.
const LIMIT_TOL: f64 = 1e-6;

/// Record of the sampling that certified positivity.
#[derive(Clone, Debug)]
pub struct PositivityCertificate {
    pub min_re: f64,
    pub argmin: Complex64,
    pub n_points: usize,
    pub r_max: f64,
}

/// A map certified (by sampling) to have nonnegative real part on the disk.
#[derive(Clone, Debug)]
pub struct CaratheodoryFn {
    map: HoloMap,
    certificate: PositivityCertificate,
}

impl CaratheodoryFn {
    pub fn map(&self) -> &HoloMap {
        &self.map
    }

    pub fn certificate(&self) -> &PositivityCertificate {
        &self.certificate
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        self.map.eval(z)
    }
}

/// Wrap m after checking min Re over the grid against the -1e-9 threshold.
pub fn certify_positive(m: &HoloMap, grid: &DiskGrid) -> Result<CaratheodoryFn> {
    let evaluated: Result<Vec<(f64, Complex64)>> = grid
        .points
        .par_iter()
        .map(|&z| Ok((m.eval(z)?.re, z)))
        .collect();
    let (min_re, argmin) = evaluated?
        .into_iter()
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("non-empty grid");
    if min_re < -POSITIVITY_TOL {
        return Err(CoreError::NotPositive { min_re, at: argmin });
    }
    Ok(CaratheodoryFn {
        map: m.clone(),
        certificate: PositivityCertificate {
            min_re,
            argmin,
            n_points: grid.points.len(),
            r_max: grid.r_max,
        },
    })
}

/// How a boundary charge was computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChargeMethod {
    /// Radial limit of (1 - z conj(tau)) p(z) at tau.
    RadialLimit,
    /// Twice the grid infimum of Re p(z) |tau - z|^2 / (1 - |z|^2); a
    /// one-sided over-estimate of the true infimum.
    InfForm,
}

/// The mass delta_p(tau) of the Herglotz measure of p at a boundary point.
#[derive(Clone, Debug)]
pub struct ChargeReport {
    pub tau: Complex64,
    pub delta: f64,
    pub method: ChargeMethod,
    pub error_estimate: f64,
}

fn clamp_delta(tau: Complex64, value: Complex64, tol: f64) -> Result<f64> {
    if value.im.abs() > 1e-8 * (1.0 + value.re.abs()) {
        return Err(CoreError::NotNonnegativeReal { value });
    }
    let delta = value.re;
    if delta < -tol {
        return Err(CoreError::NotNonnegativeReal { value });
    }
    let _ = tau;
    Ok(delta.max(0.0))
}

/// Charge of p at the unimodular point tau.
pub fn charge(p: &CaratheodoryFn, tau: Complex64, method: ChargeMethod) -> Result<ChargeReport> {
    assert!(
        (tau.norm() - 1.0).abs() < 1e-12,
        "charge is defined at boundary points only"
    );
    match method {
        ChargeMethod::RadialLimit => {
            let weighted = (HoloMap::constant(1.0)
                - HoloMap::identity() * HoloMap::constant(tau.conj()))
                * p.map.clone();
            let (value, err) = radial_limit(&weighted, tau, LIMIT_TOL)?;
            Ok(ChargeReport {
                tau,
                delta: clamp_delta(tau, value, POSITIVITY_TOL)?,
                method,
                error_estimate: err,
            })
        }
        ChargeMethod::InfForm => {
            // Rotate the boundary-concentrated grid so it crowds tau, then
            // take the running minimum of the Julia quotient.
            let grid = DiskGrid::boundary_concentrated(64);
            let mut ring_minima = Vec::with_capacity(grid.n_radial);
            let mut min = f64::INFINITY;
            for ring in grid.points.chunks(grid.n_angular) {
                let mut ring_min = f64::INFINITY;
                for &w in ring {
                    let z = tau * w;
                    let quotient = (tau - z).norm_sqr() / (1.0 - z.norm_sqr());
                    ring_min = ring_min.min(p.eval(z)?.re * quotient);
                }
                ring_minima.push(ring_min);
                min = min.min(ring_min);
            }
            let n = ring_minima.len();
            let error_estimate = (ring_minima[n - 1] - ring_minima[n - 2]).abs();
            Ok(ChargeReport {
                tau,
                delta: clamp_delta(tau, Complex64::new(2.0 * min, 0.0), POSITIVITY_TOL)?,
                method,
                error_estimate,
            })
        }
    }
}

/// q = 1/p, again of class P. When p has charge beta > 0 at 1, q vanishes at
/// 1 with angular derivative -1/beta.
pub fn reciprocal(p: &CaratheodoryFn) -> Result<CaratheodoryFn> {
    if p.certificate.min_re <= POSITIVITY_TOL {
        // Re p can touch 0, so guard against zeros by direct sampling.
        let grid = DiskGrid::certification();
        for &z in &grid.points {
            if p.eval(z)?.norm() < 1e-12 {
                return Err(CoreError::ZeroEncountered { at: z });
            }
        }
    }
    certify_positive(&HoloMap::recip(p.map.clone()), &DiskGrid::certification())
}

/// Boundary value and angular slope of q at 1.
#[derive(Clone, Debug)]
pub struct Conformality {
    pub value: Complex64,
    pub slope: Complex64,
    pub conformal: bool,
}

/// Radial value q(1) and slope lim q(z)/(z-1); conformal iff the slope is
/// finite and nonzero.
pub fn conformality_at_one(q: &CaratheodoryFn) -> Result<Conformality> {
    conformality_at_one_map(&q.map)
}

/// `conformality_at_one` for a bare map.
pub fn conformality_at_one_map(q: &HoloMap) -> Result<Conformality> {
    let (value, _) = radial_limit(q, Complex64::new(1.0, 0.0), LIMIT_TOL)?;
    let ratio = q.clone() / (HoloMap::identity() - HoloMap::constant(1.0));
    let (slope, _) = radial_limit(&ratio, Complex64::new(1.0, 0.0), LIMIT_TOL)?;
    Ok(Conformality {
        value,
        slope,
        conformal: slope.norm() > 1e-9,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stock;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn one() -> Complex64 {
        c(1.0, 0.0)
    }

    #[test]
    fn certify_half_plane_map() {
        let grid = DiskGrid::polar(48, 128, 0.99);
        let p = certify_positive(&stock::half_plane(), &grid).unwrap();
        // image is {Re w > 1/2}: the grid minimum sits just above 0.5
        let min = p.certificate().min_re;
        assert!((0.5..0.51).contains(&min), "min Re = {min}");
    }

    #[test]
    fn certify_one_minus_z() {
        certify_positive(&stock::one_minus_z(), &DiskGrid::certification()).unwrap();
    }

    #[test]
    fn certify_rejects_negative_constant() {
        match certify_positive(&HoloMap::constant(-1.0), &DiskGrid::certification()) {
            Err(CoreError::NotPositive { min_re, .. }) => assert!((min_re + 1.0).abs() < 1e-15),
            other => panic!("expected NotPositive, got {other:?}"),
        }
    }

    #[test]
    fn charge_of_stock_functions() {
        let grid = DiskGrid::certification();
        let cases = [
            (stock::half_plane(), 1.0),
            (stock::cayley(), 2.0),
            (HoloMap::constant(1.0), 0.0),
        ];
        for (m, expected) in cases {
            let p = certify_positive(&m, &grid).unwrap();
            let radial = charge(&p, one(), ChargeMethod::RadialLimit).unwrap();
            assert!(
                (radial.delta - expected).abs() < 1e-8,
                "radial charge {} vs {expected}",
                radial.delta
            );
            let inf = charge(&p, one(), ChargeMethod::InfForm).unwrap();
            assert!(
                (inf.delta - expected).abs() < 1e-2,
                "inf-form charge {} vs {expected}",
                inf.delta
            );
        }
    }

    #[test]
    fn reciprocal_of_half_plane_map() {
        let grid = DiskGrid::certification();
        let p = certify_positive(&stock::half_plane(), &grid).unwrap();
        let q = reciprocal(&p).unwrap();
        let z = c(0.3, -0.2);
        let expected = stock::one_minus_z().eval(z).unwrap();
        assert!((q.eval(z).unwrap() - expected).norm() < 1e-14);
        // q'(1) = -1/beta with beta = 1
        let conf = conformality_at_one(&q).unwrap();
        assert!((conf.slope - c(-1.0, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn reciprocal_of_cayley() {
        let p = certify_positive(&stock::cayley(), &DiskGrid::certification()).unwrap();
        let q = reciprocal(&p).unwrap();
        let conf = conformality_at_one(&q).unwrap();
        assert!((conf.value).norm() < 1e-8);
        assert!((conf.slope - c(-0.5, 0.0)).norm() < 1e-8, "{:?}", conf.slope);
    }

    #[test]
    fn reciprocal_is_involution() {
        let grid = DiskGrid::certification();
        for m in [stock::half_plane(), stock::cayley(), HoloMap::constant(1.0)] {
            let p = certify_positive(&m, &grid).unwrap();
            let back = reciprocal(&reciprocal(&p).unwrap()).unwrap();
            for &z in grid.points.iter().step_by(7) {
                let a = p.eval(z).unwrap();
                let b = back.eval(z).unwrap();
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn conformality_flags_flat_contact() {
        // (1-z)^2 meets the boundary with zero angular slope
        let sq = stock::one_minus_z() * stock::one_minus_z();
        let conf = conformality_at_one_map(&sq).unwrap();
        assert!(conf.value.norm() < 1e-9);
        assert!(conf.slope.norm() < 1e-9);
        assert!(!conf.conformal);
    }

    #[test]
    fn conformality_of_linear_map() {
        let q = certify_positive(&stock::one_minus_z(), &DiskGrid::certification()).unwrap();
        let conf = conformality_at_one(&q).unwrap();
        assert!(conf.value.norm() < 1e-12);
        assert!((conf.slope - c(-1.0, 0.0)).norm() < 1e-10);
        assert!(conf.conformal);
    }
}
