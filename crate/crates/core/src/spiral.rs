//! Spirallike/starlike machinery: the Koenigs-type solution
//! h = exp[mu * integral of 1/f], the univalence regions Omega+-, the
//! perturbation formula moving the null point inside the disk, the starlike
//! factorization, and Robertson-type positivity checks.

use num_complex::Complex64;

use crate::approx::build_q_tau_from_q;
use crate::caratheodory::{certify_positive, charge, ChargeMethod};
use crate::error::CoreError;
use crate::generators::bp_prefactor;
use crate::holomap::{radial_limit, DiskGrid, HoloMap};
use crate::stock::one_minus_z;
use crate::Result;

const LIMIT_TOL: f64 = 1e-6;

/// A solution h of lambda h = h' f, normalized h(0) = 1, with the generator
/// it solves against and its null point.
#[derive(Clone, Debug)]
pub struct SpirallikeFn {
    h: HoloMap,
    lambda: Complex64,
    f: HoloMap,
    tau: Complex64,
}

impl SpirallikeFn {
    pub fn h(&self) -> &HoloMap {
        &self.h
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    pub fn f(&self) -> &HoloMap {
        &self.f
    }

    pub fn tau(&self) -> Complex64 {
        self.tau
    }

    /// Wrap an externally constructed solution, validating the differential
    /// equation on the standard grid and the null point when interior.
    pub fn from_parts(
        h: HoloMap,
        lambda: Complex64,
        f: HoloMap,
        tau: Complex64,
    ) -> Result<SpirallikeFn> {
        let residual = ode_residual(&h, &f, lambda, &DiskGrid::standard())?;
        if residual > 1e-8 {
            return Err(CoreError::Internal(format!(
                "ODE residual {residual:.3e} too large for a spirallike solution"
            )));
        }
        if tau.norm() < 1.0 {
            let at_tau = h.eval(tau)?;
            if at_tau.norm() > 1e-9 {
                return Err(CoreError::Internal(format!(
                    "h(tau) = {at_tau} should vanish at the interior null point"
                )));
            }
        }
        Ok(SpirallikeFn { h, lambda, f, tau })
    }
}

/// h(z) = exp[mu * integral_0^z dzeta / f(zeta)], the canonical solution of
/// mu h = h' f with h(0) = 1.
///
/// The derivative of the integral node is 1/f, so the differential equation
/// holds structurally. f must be zero-free on the paths actually used;
/// a pole on a path surfaces as `ZeroOnPath`.
pub fn koenigs(f: &HoloMap, mu: Complex64) -> Result<SpirallikeFn> {
    if mu.norm() == 0.0 {
        return Err(CoreError::NotAdmissible {
            reason: "mu = 0 gives the constant solution".into(),
        });
    }
    let f0 = f.eval(Complex64::new(0.0, 0.0))?;
    if f0.norm() < 1e-12 {
        return Err(CoreError::ZeroOnPath {
            at: Complex64::new(0.0, 0.0),
            magnitude: f0.norm(),
        });
    }
    let h = HoloMap::exp_of(HoloMap::constant(mu) * HoloMap::recip_integral(f.clone()));
    Ok(SpirallikeFn {
        h,
        lambda: mu,
        f: f.clone(),
        tau: Complex64::new(1.0, 0.0),
    })
}

/// Which univalence disk a parameter lies in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OmegaRegion {
    Plus,
    Minus,
    /// No univalent solution of lambda h = h' f exists.
    Outside,
}

#[derive(Clone, Copy, Debug)]
pub struct OmegaVerdict {
    pub region: OmegaRegion,
    pub beta: f64,
}

/// Classify lambda against the closed disks |w -+ beta| <= beta (origin
/// excluded).
pub fn omega_classify(lambda: Complex64, beta: f64) -> Result<OmegaVerdict> {
    assert!(beta > 0.0, "beta must be positive");
    if lambda.norm() == 0.0 {
        return Err(CoreError::InvalidLambda);
    }
    let b = Complex64::new(beta, 0.0);
    let region = if (lambda - b).norm() <= beta + 1e-12 {
        OmegaRegion::Plus
    } else if (lambda + b).norm() <= beta + 1e-12 {
        OmegaRegion::Minus
    } else {
        OmegaRegion::Outside
    };
    Ok(OmegaVerdict { region, beta })
}

/// Perturbation formula: move the null point of h from the boundary to an
/// interior tau,
/// h_tau(z) = [h]^(mu/lambda) (z - tau)(1 - z conj(tau))^(mu/conj(mu))
///            / -(1-z)^(1 + mu/conj(mu)),
/// normalized h_tau(tau) = 0 and h_tau(0) = tau.
///
/// The fractional power of h is taken as exp(mu * integral 1/f) directly,
/// which sidesteps every branch ambiguity.
pub fn perturb(h: &SpirallikeFn, mu: Complex64, tau: Complex64) -> Result<SpirallikeFn> {
    assert!(tau.norm() < 1.0, "tau must be interior");
    let ratio = h.f.clone() / (HoloMap::identity() - HoloMap::constant(1.0));
    let (beta, _) = radial_limit(&ratio, Complex64::new(1.0, 0.0), LIMIT_TOL)?;
    let verdict = omega_classify(mu, beta.re)?;
    if verdict.region != OmegaRegion::Plus {
        return Err(CoreError::NotAdmissible {
            reason: format!("mu = {mu} lies outside Omega+ for beta = {}", beta.re),
        });
    }

    let power_factor = koenigs(&h.f, mu)?.h;
    let e = mu / mu.conj();
    let h_tau = power_factor
        * (HoloMap::identity() - HoloMap::constant(tau))
        * HoloMap::power(
            HoloMap::constant(1.0) - HoloMap::identity() * HoloMap::constant(tau.conj()),
            e,
        )
        * HoloMap::constant(-1.0)
        * HoloMap::power(one_minus_z(), -Complex64::new(1.0, 0.0) - e);

    let at_zero = h_tau.eval(Complex64::new(0.0, 0.0))?;
    if (at_zero - tau).norm() > 1e-10 {
        return Err(CoreError::Internal(format!(
            "normalization broken: h_tau(0) = {at_zero}, expected {tau}"
        )));
    }
    let at_tau = h_tau.eval(tau)?;
    if at_tau.norm() > 1e-10 {
        return Err(CoreError::Internal(format!(
            "normalization broken: h_tau(tau) = {at_tau}, expected 0"
        )));
    }

    // The generator this member solves against: (z - tau)(1 - z conj(tau))/q_tau.
    let q = certify_positive(
        &(-(one_minus_z() * one_minus_z()) / h.f.clone()),
        &DiskGrid::certification(),
    )?;
    let q_tau = build_q_tau_from_q(&q, mu.inv(), tau)?;
    let f_tau = bp_prefactor(tau) / q_tau;

    Ok(SpirallikeFn {
        h: h_tau,
        lambda: mu,
        f: f_tau,
        tau,
    })
}

/// Factor a boundary-starlike solution (normalized f'(1) = 1) as
/// h = (1-z)^(2 lambda) [h_*(z)/z]^lambda with h_* = z h^(1/lambda) / (1-z)^2
/// starlike with respect to the origin.
///
/// Returns h_* and the boundary infimum 2 inf Re(z h_*'/h_*) |1-z|^2/(1-|z|^2),
/// which equals 1 for this normalization.
pub fn factorize(h: &SpirallikeFn) -> Result<(HoloMap, f64)> {
    let ratio = h.f.clone() / (HoloMap::identity() - HoloMap::constant(1.0));
    let (beta, _) = radial_limit(&ratio, Complex64::new(1.0, 0.0), LIMIT_TOL)?;
    if (beta - Complex64::new(1.0, 0.0)).norm() > 1e-6 {
        return Err(CoreError::NotAdmissible {
            reason: format!("factorization requires f'(1) = 1, got {beta}"),
        });
    }
    // h^(1/lambda) = exp(integral 1/f), branch-free.
    let root = koenigs(&h.f, Complex64::new(1.0, 0.0))?.h;
    let h_star = HoloMap::identity() * root / (one_minus_z() * one_minus_z());

    let q0 = HoloMap::identity() * h_star.derivative_map() / h_star.clone();
    let q0 = certify_positive(&q0, &DiskGrid::certification())?;
    let inf_value = charge(&q0, Complex64::new(1.0, 0.0), ChargeMethod::InfForm)?.delta;
    Ok((h_star, inf_value))
}

/// Rebuild (1-z)^(2 lambda) [h_*/z]^lambda from a factorization.
pub fn rebuild_from_factor(h_star: &HoloMap, lambda: Complex64) -> HoloMap {
    let inner = HoloMap::removable_div(h_star.clone(), Complex64::new(0.0, 0.0));
    HoloMap::power(one_minus_z(), lambda * 2.0) * HoloMap::power(inner, lambda)
}

/// Minimum over the grid of
/// Re[(2 beta/lambda) z h'/h + (1+z)/(1-z) + (2 beta/lambda) z w'/w],
/// the (weighted) Robertson quantity; nonnegative exactly on the spirallike
/// class.
pub fn robertson_residual(
    h: &HoloMap,
    lambda: Complex64,
    w: Option<&HoloMap>,
    beta: f64,
    grid: &DiskGrid,
) -> Result<f64> {
    let scale = Complex64::new(2.0 * beta, 0.0) / lambda;
    let mut min = f64::INFINITY;
    for &z in &grid.points {
        let (hv, hd) = h.eval_d(z)?;
        if hv.norm() < 1e-13 {
            return Err(CoreError::SingularPoint {
                at: z,
                what: "h in logarithmic derivative",
                magnitude: hv.norm(),
            });
        }
        let mut value = scale * z * hd / hv + (1.0 + z) / (1.0 - z);
        if let Some(w) = w {
            let (wv, wd) = w.eval_d(z)?;
            if wv.norm() < 1e-13 {
                return Err(CoreError::SingularPoint {
                    at: z,
                    what: "weight in logarithmic derivative",
                    magnitude: wv.norm(),
                });
            }
            value += scale * z * wd / wv;
        }
        min = min.min(value.re);
    }
    Ok(min)
}

/// sup over the grid of |mu h - h' f|.
pub fn ode_residual(h: &HoloMap, f: &HoloMap, mu: Complex64, grid: &DiskGrid) -> Result<f64> {
    let mut sup: f64 = 0.0;
    for &z in &grid.points {
        let (hv, hd) = h.eval_d(z)?;
        let fv = f.eval(z)?;
        sup = sup.max((mu * hv - hd * fv).norm());
    }
    Ok(sup)
}
