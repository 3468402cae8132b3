//! Point spectrum of (weighted) composition-operator generators over the
//! disk: the k-valence cells sigma^(k), eigenfunction construction through
//! the Koenigs solution, numerical valence certification by argument
//! counting, and the Bshouty-Lyzzaik self-map pipeline.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::caratheodory::certify_positive;
use crate::error::CoreError;
use crate::generators::{check_g_plus_one, G1Verdict};
use crate::holomap::{radial_limit, ContourSamples, DiskGrid, HoloMap};
use crate::spiral::koenigs;
use crate::stock::one_minus_z;
use crate::Result;

const LIMIT_TOL: f64 = 1e-6;

/// Valence of an eigenfunction: finite k or infinite.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Valence {
    Finite(u32),
    Infinite,
}

/// An eigenvalue classified into its valence cell sigma^(k).
#[derive(Clone, Copy, Debug)]
pub struct ValenceCell {
    pub lambda: Complex64,
    pub beta: f64,
    pub k: Valence,
}

/// Place lambda into sigma^(k) = (k Omega+ u k Omega-) minus the (k-1)
/// scaled regions; the imaginary axis (lambda = 0 included) is the
/// infinite-valence cell.
pub fn classify_lambda(lambda: Complex64, beta: f64) -> ValenceCell {
    assert!(beta > 0.0, "beta must be positive");
    if lambda.re.abs() <= 1e-12 {
        return ValenceCell {
            lambda,
            beta,
            k: Valence::Infinite,
        };
    }
    // lambda is in k Omega(sign of Re lambda) iff |lambda|^2 <= 2 k beta |Re lambda|,
    // so the minimal k is the rounded-up ratio, inclusively on the boundary.
    let ratio = lambda.norm_sqr() / (2.0 * beta * lambda.re.abs());
    let rounded = ratio.round();
    let k = if (ratio - rounded).abs() <= 1e-12 * ratio.max(1.0) {
        rounded.max(1.0)
    } else {
        ratio.ceil()
    };
    ValenceCell {
        lambda,
        beta,
        k: Valence::Finite(k as u32),
    }
}

/// Eigenvalue problem h' f + h f w'/w = lambda h for the weighted
/// composition semigroup; `w = None` is the unweighted case.
#[derive(Clone, Debug)]
pub struct WeightedEigenproblem {
    pub f: HoloMap,
    pub w: Option<HoloMap>,
    pub lambda: Complex64,
}

/// Solve the eigenvalue problem: w h = a (h*)^(lambda/beta) with h* the
/// Koenigs eigenfunction of beta; the power is taken as exp(lambda
/// integral 1/f), branch-free, and a = 1 normalizes w h to 1 at the origin
/// (or the coefficient of z when w is singular there).
pub fn eigenfunction(prob: &WeightedEigenproblem) -> Result<HoloMap> {
    if prob.lambda.norm() == 0.0 {
        return Err(CoreError::InvalidLambda);
    }
    let beta = match check_g_plus_one(&prob.f)? {
        G1Verdict::Member { beta, .. } => beta,
        other => {
            return Err(CoreError::NotAdmissible {
                reason: format!("f is not in G+[1]: {other:?}"),
            })
        }
    };
    let powered = koenigs(&prob.f, prob.lambda)?.h().clone();
    let h = match &prob.w {
        None => powered,
        Some(w) => powered / w.clone(),
    };

    // Residual of the defining equation on the standard grid.
    let mut sup: f64 = 0.0;
    for &z in &DiskGrid::standard().points {
        let (hv, hd) = h.eval_d(z)?;
        let fv = prob.f.eval(z)?;
        let mut lhs = hd * fv;
        if let Some(w) = &prob.w {
            let (wv, wd) = w.eval_d(z)?;
            lhs += hv * fv * wd / wv;
        }
        sup = sup.max((lhs - prob.lambda * hv).norm());
    }
    if sup > 1e-8 {
        return Err(CoreError::Internal(format!(
            "eigenfunction residual {sup:.3e} exceeds 1e-8 (beta = {beta})"
        )));
    }
    Ok(h)
}

/// Lower-bound valence of h on |z| < r: the maximum preimage count over
/// `n_targets` sampled values (log-spaced moduli spanning the contour image,
/// seed-jittered uniform arguments, contour-root collisions skipped).
/// Unresolved winding numbers retry on finer contours before giving up.
pub fn measure_valence_seeded(h: &HoloMap, r: f64, n_targets: usize, seed: u64) -> Result<usize> {
    assert!((0.0..1.0).contains(&r));
    let mut levels: [(usize, Option<ContourSamples>); 3] =
        [(4096, None), (16384, None), (65536, None)];
    levels[0].1 = Some(ContourSamples::new(h, r, levels[0].0)?);

    let (lo, hi) = {
        let base = levels[0].1.as_ref().unwrap();
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for &(v, _) in base.values() {
            lo = lo.min(v.norm());
            hi = hi.max(v.norm());
        }
        (lo * 1.3, hi / 1.3)
    };
    if !(lo.is_finite() && hi > lo && lo > 0.0) {
        return Err(CoreError::Internal(format!(
            "degenerate image moduli range [{lo}, {hi}]"
        )));
    }

    let n_arg = 16.min(n_targets.max(1));
    let n_mod = n_targets.div_ceil(n_arg);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = None;
    for i in 0..n_mod {
        let modulus = if n_mod == 1 {
            (lo * hi).sqrt()
        } else {
            lo * (hi / lo).powf(i as f64 / (n_mod - 1) as f64)
        };
        for j in 0..n_arg {
            let jitter: f64 = rng.gen::<f64>();
            let arg = 2.0 * std::f64::consts::PI * (j as f64 + jitter) / n_arg as f64;
            let w0 = Complex64::from_polar(modulus, arg);
            'levels: for (nodes, slot) in levels.iter_mut() {
                if slot.is_none() {
                    *slot = Some(ContourSamples::new(h, r, *nodes)?);
                }
                match slot.as_ref().unwrap().count(w0) {
                    Ok(count) => {
                        best = Some(best.map_or(count, |b: usize| b.max(count)));
                        break 'levels;
                    }
                    // unresolved winding: refine the contour and retry
                    Err(CoreError::Unresolved { .. }) => continue 'levels,
                    // target collides with the contour image: skip it
                    Err(CoreError::RootOnContour { .. }) => break 'levels,
                    Err(e) => return Err(e),
                }
            }
        }
    }
    best.ok_or_else(|| CoreError::Internal("no valence target could be resolved".into()))
}

/// `measure_valence_seeded` with the default seed.
pub fn measure_valence(h: &HoloMap, r: f64, n_targets: usize) -> Result<usize> {
    measure_valence_seeded(h, r, n_targets, 0)
}

/// Output of the Bshouty-Lyzzaik construction.
#[derive(Clone, Debug)]
pub struct BshoutyLyzzaik {
    pub h: HoloMap,
    pub alpha: f64,
    pub k_predicted: u32,
}

/// From a self-map omega of the disk with boundary fixed point 1 and
/// positive multiplier alpha, build p = (alpha/2)(1+omega)/(1-omega), the
/// generator f = -(1-z)^2 p, and the solution h of
/// -(1-z)^2 h'/h = 4 (1-omega)/(1+omega); h is k-valent for the unique
/// integer with k-1 < alpha <= k.
pub fn bshouty_lyzzaik(omega: &HoloMap) -> Result<BshoutyLyzzaik> {
    // self-map certificate
    let grid = DiskGrid::certification();
    for &z in &grid.points {
        let v = omega.eval(z)?;
        if v.norm() >= 1.0 {
            return Err(CoreError::NotAdmissible {
                reason: format!("omega is not a self-map: |omega({z})| = {}", v.norm()),
            });
        }
    }
    let (at_one, _) = radial_limit(omega, Complex64::new(1.0, 0.0), LIMIT_TOL)?;
    if (at_one - Complex64::new(1.0, 0.0)).norm() > 1e-6 {
        return Err(CoreError::NotAdmissible {
            reason: format!("omega(1) = {at_one}, need the boundary fixed point 1"),
        });
    }
    let multiplier =
        (HoloMap::constant(1.0) - omega.clone()) / (HoloMap::constant(1.0) - HoloMap::identity());
    let (alpha, _) = radial_limit(&multiplier, Complex64::new(1.0, 0.0), LIMIT_TOL)?;
    if alpha.im.abs() > 1e-8 || alpha.re <= 0.0 {
        return Err(CoreError::NotAdmissible {
            reason: format!("multiplier alpha = {alpha} is not a positive real"),
        });
    }
    let alpha = alpha.re;

    let p = HoloMap::constant(alpha / 2.0) * (HoloMap::constant(1.0) + omega.clone())
        / (HoloMap::constant(1.0) - omega.clone());
    let p = certify_positive(&p, &grid)?;
    let f = -(one_minus_z() * one_minus_z()) * p.map().clone();
    let h = koenigs(&f, Complex64::new(2.0 * alpha, 0.0))?.h().clone();

    let k_predicted = (alpha - 1e-9).ceil().max(1.0) as u32;
    Ok(BshoutyLyzzaik {
        h,
        alpha,
        k_predicted,
    })
}

/// One cell of the valence map over a rectangle of the lambda plane;
/// k = -1 encodes infinite valence.
#[derive(Clone, Copy, Debug)]
pub struct SigmaCell {
    pub re: f64,
    pub im: f64,
    pub k: i64,
}

/// Sample classify_lambda over the rectangle [re0, re1] x [im0, im1] with
/// the given step.
pub fn sigma_map(beta: f64, re0: f64, re1: f64, im0: f64, im1: f64, step: f64) -> Vec<SigmaCell> {
    assert!(step > 0.0 && re1 >= re0 && im1 >= im0);
    let n_re = ((re1 - re0) / step).round() as usize;
    let n_im = ((im1 - im0) / step).round() as usize;
    (0..=n_im)
        .into_par_iter()
        .flat_map_iter(|iy| {
            let im = im0 + iy as f64 * step;
            (0..=n_re).map(move |ix| {
                let re = re0 + ix as f64 * step;
                let cell = classify_lambda(Complex64::new(re, im), beta);
                let k = match cell.k {
                    Valence::Finite(k) => k as i64,
                    Valence::Infinite => -1,
                };
                SigmaCell { re, im, k }
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stock;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn classification_of_reference_points() {
        let cases = [
            (c(2.0, 0.0), Valence::Finite(1)),
            (c(3.0, 0.0), Valence::Finite(2)),
            (c(5.0, 0.0), Valence::Finite(3)),
            (c(-2.0, 0.0), Valence::Finite(1)),
            (c(0.0, 1.0), Valence::Infinite),
            (c(0.0, 0.0), Valence::Infinite),
        ];
        for (lambda, expected) in cases {
            let cell = classify_lambda(lambda, 1.0);
            assert_eq!(cell.k, expected, "lambda = {lambda}");
        }
    }

    #[test]
    fn classification_boundary_inclusive() {
        // |lambda - k beta| = k beta exactly
        assert_eq!(classify_lambda(c(4.0, 0.0), 2.0).k, Valence::Finite(1));
        assert_eq!(classify_lambda(c(1.0, 1.0), 1.0).k, Valence::Finite(1));
        // just beyond the first disk
        assert_eq!(
            classify_lambda(c(1.0, 1.000001), 1.0).k,
            Valence::Finite(2)
        );
    }

    #[test]
    fn unweighted_eigenfunctions() {
        let prob = WeightedEigenproblem {
            f: stock::z_minus_one(),
            w: None,
            lambda: c(1.0, 0.0),
        };
        let h = eigenfunction(&prob).unwrap();
        let z = c(0.3, 0.4);
        assert!((h.eval(z).unwrap() - stock::one_minus_z().eval(z).unwrap()).norm() < 1e-10);

        let prob2 = WeightedEigenproblem {
            lambda: c(2.0, 0.0),
            ..prob
        };
        let h2 = eigenfunction(&prob2).unwrap();
        let sq = stock::one_minus_z() * stock::one_minus_z();
        assert!((h2.eval(z).unwrap() - sq.eval(z).unwrap()).norm() < 1e-10);
    }

    #[test]
    fn weighted_eigenfunction_example() {
        // w = (1-z)^2/z, lambda = beta = 1: h = z h*/(1-z)^2 = z/(1-z)
        let w = (stock::one_minus_z() * stock::one_minus_z()) / HoloMap::identity();
        let prob = WeightedEigenproblem {
            f: stock::z_minus_one(),
            w: Some(w),
            lambda: c(1.0, 0.0),
        };
        let h = eigenfunction(&prob).unwrap();
        let expected = HoloMap::identity() / stock::one_minus_z();
        let z = c(0.4, -0.2);
        assert!((h.eval(z).unwrap() - expected.eval(z).unwrap()).norm() < 1e-10);
    }

    #[test]
    fn power_weight_eigenfunction() {
        // w = (1-z)^delta only shifts the exponent: h = (1-z)^(lambda - delta)
        let delta = c(0.5, 0.3);
        let lambda = c(2.0, 0.0);
        let prob = WeightedEigenproblem {
            f: stock::z_minus_one(),
            w: Some(HoloMap::power(stock::one_minus_z(), delta)),
            lambda,
        };
        let h = eigenfunction(&prob).unwrap();
        let expected = HoloMap::power(stock::one_minus_z(), lambda - delta);
        for &z in DiskGrid::compact(0.8).points.iter().step_by(5) {
            let a = h.eval(z).unwrap();
            let b = expected.eval(z).unwrap();
            assert!((a - b).norm() < 1e-10, "at {z}: {a} vs {b}");
        }
    }

    #[test]
    fn zero_lambda_rejected() {
        let prob = WeightedEigenproblem {
            f: stock::z_minus_one(),
            w: None,
            lambda: c(0.0, 0.0),
        };
        match eigenfunction(&prob) {
            Err(CoreError::InvalidLambda) => {}
            other => panic!("expected InvalidLambda, got {other:?}"),
        }
    }

    #[test]
    fn eigenspace_is_one_dimensional() {
        // two routes to the same eigenvalue: direct, and squaring lambda/2
        let direct = eigenfunction(&WeightedEigenproblem {
            f: stock::z_minus_one(),
            w: None,
            lambda: c(1.6, 0.0),
        })
        .unwrap();
        let half = eigenfunction(&WeightedEigenproblem {
            f: stock::z_minus_one(),
            w: None,
            lambda: c(0.8, 0.0),
        })
        .unwrap();
        let squared = half.clone() * half;
        let z0 = c(0.3, 0.1);
        let scale = direct.eval(z0).unwrap() / squared.eval(z0).unwrap();
        for &z in DiskGrid::compact(0.8).points.iter().step_by(5) {
            let a = direct.eval(z).unwrap();
            let b = squared.eval(z).unwrap() * scale;
            assert!((a - b).norm() < 1e-10, "at {z}");
        }
    }

    #[test]
    fn measured_valence_of_powers() {
        let square = stock::one_minus_z() * stock::one_minus_z();
        assert_eq!(measure_valence(&square, 0.99, 64).unwrap(), 1);
        let cube = HoloMap::power(stock::one_minus_z(), 3.0);
        assert_eq!(measure_valence(&cube, 0.99, 64).unwrap(), 2);
    }

    #[test]
    fn bshouty_lyzzaik_linear() {
        let result = bshouty_lyzzaik(&stock::bshouty_omega(1)).unwrap();
        assert!((result.alpha - 1.0).abs() < 1e-8);
        assert_eq!(result.k_predicted, 1);
        // closed form ((1-z)/(1+z))^2
        let expected = HoloMap::power(
            stock::one_minus_z() / (HoloMap::constant(1.0) + HoloMap::identity()),
            2.0,
        );
        for &z in DiskGrid::compact(0.5).points.iter().step_by(5) {
            let a = result.h.eval(z).unwrap();
            let b = expected.eval(z).unwrap();
            assert!((a - b).norm() < 1e-9, "at {z}: {a} vs {b}");
        }
    }

    #[test]
    fn bshouty_lyzzaik_square() {
        let result = bshouty_lyzzaik(&stock::bshouty_omega(2)).unwrap();
        assert!((result.alpha - 2.0).abs() < 1e-8);
        assert_eq!(result.k_predicted, 2);
    }

    #[test]
    fn bshouty_lyzzaik_rejects_constant() {
        match bshouty_lyzzaik(&HoloMap::constant(0.0)) {
            Err(CoreError::NotAdmissible { .. }) => {}
            other => panic!("expected NotAdmissible, got {other:?}"),
        }
    }

    #[test]
    fn sigma_map_reference_cell() {
        let cells = sigma_map(1.0, -4.0, 4.0, -4.0, 4.0, 0.5);
        let at = cells
            .iter()
            .find(|c| (c.re - 2.0).abs() < 1e-12 && c.im.abs() < 1e-12)
            .unwrap();
        assert_eq!(at.k, 1);
        let on_axis = cells
            .iter()
            .find(|c| c.re.abs() < 1e-12 && (c.im - 1.0).abs() < 1e-12)
            .unwrap();
        assert_eq!(on_axis.k, -1);
    }
}
