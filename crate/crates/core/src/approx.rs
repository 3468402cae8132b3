//! Approximant families with prescribed interpolation data: from a
//! positive-real-part function q vanishing at 1, build the auxiliary
//! function r and the family q_tau with q_tau(tau) = gamma (1 - |tau|^2);
//! dually p_tau with p_tau(tau) = mu / (1 - |tau|^2), and the generator
//! family f_tau with f_tau'(tau) = mu.

use num_complex::Complex64;

use crate::caratheodory::{
    certify_positive, charge, conformality_at_one, reciprocal, CaratheodoryFn, ChargeMethod,
};
use crate::error::CoreError;
use crate::generators::{assemble, bp_prefactor, check_g_plus_one, Generator, G1Verdict};
use crate::holomap::{DiskGrid, HoloMap};
use crate::Result;

/// Admissibility slack on the closed parameter regions.
pub const ADMISSIBLE_TOL: f64 = 1e-12;

/// Interpolation parameter together with its admissibility record.
#[derive(Clone, Debug)]
pub struct ApproxConfig {
    pub gamma: Complex64,
    /// alpha = -q'(1) > 0.
    pub alpha: f64,
    /// Re gamma >= alpha/2, up to the closed-boundary slack.
    pub admissible: bool,
}

impl ApproxConfig {
    /// Measure alpha = -q'(1) from q and record whether gamma is admissible.
    pub fn new(q: &CaratheodoryFn, gamma: Complex64) -> Result<ApproxConfig> {
        let conf = conformality_at_one(q)?;
        if conf.value.norm() > 1e-6 {
            return Err(CoreError::NotAdmissible {
                reason: format!("q(1) = {} is not 0", conf.value),
            });
        }
        let alpha = -conf.slope.re;
        if !conf.conformal || alpha <= 0.0 || conf.slope.im.abs() > 1e-6 {
            return Err(CoreError::NotAdmissible {
                reason: format!("q is not conformal at 1 with negative real slope: q'(1) = {}", conf.slope),
            });
        }
        Ok(ApproxConfig {
            gamma,
            alpha,
            admissible: gamma.re >= alpha / 2.0 - ADMISSIBLE_TOL,
        })
    }
}

fn r_numerator(q: &HoloMap, gamma: Complex64) -> HoloMap {
    let z = HoloMap::identity;
    z() * q.clone() + HoloMap::constant(gamma) * z() * z()
        - HoloMap::constant(gamma.conj())
        - HoloMap::constant(Complex64::new(0.0, 2.0 * gamma.im)) * z()
}

fn build_r_unchecked(q: &CaratheodoryFn, gamma: Complex64) -> Result<CaratheodoryFn> {
    let den = -(crate::stock::one_minus_z() * crate::stock::one_minus_z());
    let r = r_numerator(q.map(), gamma) / den;
    certify_positive(&r, &DiskGrid::certification())
}

/// r(z) = [z q(z) + gamma z^2 - conj(gamma) - 2i z Im gamma] / -(1-z)^2,
/// positive exactly when Re gamma >= alpha/2. Note r(0) = conj(gamma).
pub fn build_r(q: &CaratheodoryFn, gamma: Complex64) -> Result<CaratheodoryFn> {
    let config = ApproxConfig::new(q, gamma)?;
    if !config.admissible {
        return Err(CoreError::NotAdmissible {
            reason: format!(
                "Re gamma = {} below alpha/2 = {}",
                gamma.re,
                config.alpha / 2.0
            ),
        });
    }
    build_r_unchecked(q, gamma)
}

/// q_tau(z) = (1/z)[(z - tau)(1 - z conj(tau)) r(z) + conj(gamma) tau
///            - gamma conj(tau) z^2 + 2i z Im gamma].
///
/// The bracket vanishes at z = 0 (its constant term is
/// -tau r(0) + conj(gamma) tau = 0), so the division is removable and
/// evaluation at 0 falls back to the bracket's derivative.
pub fn build_q_tau(r: &CaratheodoryFn, gamma: Complex64, tau: Complex64) -> Result<HoloMap> {
    assert!(tau.norm() < 1.0, "tau must be interior");
    let z = HoloMap::identity;
    let bracket = bp_prefactor(tau) * r.map().clone()
        + HoloMap::constant(gamma.conj() * tau)
        - HoloMap::constant(gamma * tau.conj()) * z() * z()
        + HoloMap::constant(Complex64::new(0.0, 2.0 * gamma.im)) * z();
    let q_tau = HoloMap::removable_div(bracket, Complex64::new(0.0, 0.0));

    if let Err(CoreError::NotPositive { min_re, at }) =
        certify_positive(&q_tau, &DiskGrid::certification())
    {
        return Err(CoreError::Internal(format!(
            "q_tau lost positivity (min Re {min_re} at {at}); inputs violate the construction"
        )));
    }
    let interpolated = q_tau.eval(tau)?;
    let expected = gamma * (1.0 - tau.norm_sqr());
    if (interpolated - expected).norm() > 1e-10 {
        return Err(CoreError::Internal(format!(
            "interpolation contract broken: q_tau(tau) = {interpolated}, expected {expected}"
        )));
    }
    Ok(q_tau)
}

/// The composed pipeline q -> r -> q_tau for callers that have already
/// established admissibility of gamma (for example via the dual condition
/// on mu = 1/gamma).
pub fn build_q_tau_from_q(
    q: &CaratheodoryFn,
    gamma: Complex64,
    tau: Complex64,
) -> Result<HoloMap> {
    let r = build_r_unchecked(q, gamma)?;
    build_q_tau(&r, gamma, tau)
}

/// Check |mu - beta| <= beta, mu != 0 (the dual admissibility region).
fn check_mu(mu: Complex64, beta: f64) -> Result<()> {
    if mu.norm() <= ADMISSIBLE_TOL {
        return Err(CoreError::NotAdmissible {
            reason: "mu = 0 is excluded".into(),
        });
    }
    if (mu - Complex64::new(beta, 0.0)).norm() > beta + ADMISSIBLE_TOL {
        return Err(CoreError::NotAdmissible {
            reason: format!("|mu - beta| = {} exceeds beta = {beta}", (mu - beta).norm()),
        });
    }
    Ok(())
}

/// p_tau = 1/q_tau for q = 1/p and gamma = 1/mu; interpolates
/// p_tau(tau) = mu / (1 - |tau|^2). Requires the charge beta of p at 1 to be
/// positive and |mu - beta| <= beta, mu != 0.
pub fn build_p_tau(p: &CaratheodoryFn, mu: Complex64, tau: Complex64) -> Result<HoloMap> {
    let beta = charge(p, Complex64::new(1.0, 0.0), ChargeMethod::RadialLimit)?.delta;
    if beta <= 0.0 {
        return Err(CoreError::NotAdmissible {
            reason: format!("charge of p at 1 is {beta}, not positive"),
        });
    }
    check_mu(mu, beta)?;
    let gamma = mu.inv();
    let q = reciprocal(p)?;
    let r = build_r_unchecked(&q, gamma)?;
    let q_tau = build_q_tau(&r, gamma, tau)?;
    let p_tau = HoloMap::recip(q_tau);

    let interpolated = p_tau.eval(tau)?;
    let expected = mu / (1.0 - tau.norm_sqr());
    if (interpolated - expected).norm() > 1e-9 * (1.0 + expected.norm()) {
        return Err(CoreError::Internal(format!(
            "interpolation contract broken: p_tau(tau) = {interpolated}, expected {expected}"
        )));
    }
    Ok(p_tau)
}

/// Perturbed generator f_tau = (z - tau)(1 - z conj(tau)) p_tau(z) for
/// f in G+[1]; interpolates f_tau'(tau) = mu.
pub fn build_f_tau(f: &HoloMap, mu: Complex64, tau: Complex64) -> Result<Generator> {
    let (beta, p) = match check_g_plus_one(f)? {
        G1Verdict::Member { beta, p } => (beta, p),
        G1Verdict::NotBerksonPorta { min_re, at } => {
            return Err(CoreError::NotPositive { min_re, at })
        }
        G1Verdict::DegenerateBeta { beta } => {
            return Err(CoreError::NotAdmissible {
                reason: format!("angular derivative beta = {beta} is not strictly positive"),
            })
        }
    };
    check_mu(mu, beta)?;
    let p_tau = build_p_tau(&p, mu, tau)?;
    let p_tau = certify_positive(&p_tau, &DiskGrid::certification())?;
    Ok(assemble(tau, p_tau))
}

/// One row of a convergence experiment: sup over a compact of the distance
/// between the family member at tau and the target.
#[derive(Clone, Debug)]
pub struct ConvergenceRow {
    pub tau: Complex64,
    pub compact_r: f64,
    pub sup_err: f64,
}

#[derive(Clone, Debug, Default)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    /// Errors on each compact, in the tau order the table was built with.
    pub fn errors_on(&self, compact_r: f64) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|row| row.compact_r == compact_r)
            .map(|row| row.sup_err)
            .collect()
    }

    /// True when, on every compact, the tail of the error sequence is
    /// non-increasing and ends strictly below its start.
    pub fn is_eventually_decreasing(&self) -> bool {
        let mut radii: Vec<f64> = self.rows.iter().map(|r| r.compact_r).collect();
        radii.dedup();
        radii.iter().all(|&r| {
            let errs = self.errors_on(r);
            errs.len() >= 2
                && errs.last().unwrap() < errs.first().unwrap()
                && errs.windows(2).rev().take(errs.len() / 2).all(|w| w[1] <= w[0] * (1.0 + 1e-9))
        })
    }
}

/// A tau-indexed approximant family with its limiting target.
#[derive(Clone, Debug)]
pub enum ApproximantFamily {
    /// q_tau family from (q, gamma).
    Q {
        q: CaratheodoryFn,
        r: CaratheodoryFn,
        gamma: Complex64,
    },
    /// p_tau family from (p, mu).
    P { p: CaratheodoryFn, mu: Complex64 },
    /// f_tau generator family from (f, mu).
    F { f: HoloMap, mu: Complex64 },
}

impl ApproximantFamily {
    pub fn q_family(q: CaratheodoryFn, gamma: Complex64) -> Result<Self> {
        let r = build_r(&q, gamma)?;
        Ok(ApproximantFamily::Q { q, r, gamma })
    }

    pub fn p_family(p: CaratheodoryFn, mu: Complex64) -> Result<Self> {
        Ok(ApproximantFamily::P { p, mu })
    }

    pub fn f_family(f: HoloMap, mu: Complex64) -> Result<Self> {
        Ok(ApproximantFamily::F { f, mu })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ApproximantFamily::Q { .. } => "q-family",
            ApproximantFamily::P { .. } => "p-family",
            ApproximantFamily::F { .. } => "f-family",
        }
    }

    /// The tau -> 1 limit this family converges to.
    pub fn target(&self) -> HoloMap {
        match self {
            ApproximantFamily::Q { q, .. } => q.map().clone(),
            ApproximantFamily::P { p, .. } => p.map().clone(),
            ApproximantFamily::F { f, .. } => f.clone(),
        }
    }

    /// The member at an interior tau.
    pub fn member(&self, tau: Complex64) -> Result<HoloMap> {
        match self {
            ApproximantFamily::Q { r, gamma, .. } => build_q_tau(r, *gamma, tau),
            ApproximantFamily::P { p, mu } => build_p_tau(p, *mu, tau),
            ApproximantFamily::F { f, mu } => Ok(build_f_tau(f, *mu, tau)?.f().clone()),
        }
    }
}

/// Tabulate sup |member(tau) - target| over each compact, for each tau.
pub fn convergence_report(
    family: &ApproximantFamily,
    target: &HoloMap,
    taus: &[Complex64],
    compacts: &[DiskGrid],
) -> Result<ConvergenceTable> {
    let mut table = ConvergenceTable::default();
    for &tau in taus {
        let member = family.member(tau)?;
        for compact in compacts {
            table.rows.push(ConvergenceRow {
                tau,
                compact_r: compact.r_max,
                sup_err: compact.sup_diff(&member, target)?,
            });
        }
    }
    Ok(table)
}
