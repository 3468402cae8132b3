//! Immutable expression trees for holomorphic maps on the unit disk.
//!
//! A [`HoloMap`] is a shared, immutable tree of arithmetic nodes with exact
//! pointwise evaluation and an exact structural derivative (chain, product
//! and quotient rules; the derivative of the reciprocal path integral node
//! is `1/f`). Boundary values are taken as radial limits with Richardson
//! extrapolation, and preimages are counted with the argument principle on
//! circles.
//!
//! Trees are never rewritten in place; constructors fold constants and
//! nothing else.

use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::CoreError;
use crate::Result;

/// Denominators and logarithm arguments below this magnitude are singular.
pub const SINGULAR_TOL: f64 = 1e-13;
/// Contour points closer than this (in value space) to a root are rejected.
pub const CONTOUR_ROOT_TOL: f64 = 1e-8;
/// Quadrature nodes where |f| falls below this abort the path integral.
pub const PATH_ZERO_TOL: f64 = 1e-12;
/// Absolute tolerance for the adaptive segment quadrature.
pub const QUAD_TOL: f64 = 1e-11;
/// Maximum bisection depth for the adaptive segment quadrature.
pub const QUAD_MAX_DEPTH: usize = 20;
/// Gauss-Legendre points per quadrature panel.
pub const QUAD_ORDER: usize = 16;
/// Initial offset for radial-limit extrapolation.
pub const RADIAL_EPS0: f64 = 0.1;
/// Number of halvings in the radial-limit extrapolation ladder.
pub const RADIAL_HALVINGS: usize = 8;
/// Window around the removable point inside which the difference quotient
/// is replaced by the derivative of the numerator.
const REMOVABLE_WINDOW: f64 = 1e-8;

#[derive(Debug)]
enum Node {
    Const(Complex64),
    /// The identity map z.
    Identity,
    Sum(HoloMap, HoloMap),
    Product(HoloMap, HoloMap),
    Quotient(HoloMap, HoloMap),
    /// outer applied after inner.
    Compose(HoloMap, HoloMap),
    /// Principal power base^exponent = exp(exponent * Log base).
    Power(HoloMap, Complex64),
    Exp(HoloMap),
    /// Principal logarithm.
    Log(HoloMap),
    /// z -> integral of 1/f over the straight segment [0, z].
    RecipIntegral(HoloMap),
    /// num(z)/(z - at) where num(at) = 0 analytically, so the quotient
    /// extends holomorphically; evaluation at `at` uses num'(at).
    RemovableDiv(HoloMap, Complex64),
}

/// A holomorphic map on the unit disk as an immutable expression tree.
#[derive(Clone, Debug)]
pub struct HoloMap {
    node: Arc<Node>,
}

fn finite(v: Complex64, at: Complex64) -> Result<Complex64> {
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(CoreError::NonFinite { at })
    }
}

/// Principal logarithm with the branch-cut check on the non-positive reals.
fn checked_log(v: Complex64, at: Complex64) -> Result<Complex64> {
    if v.re <= 0.0 && v.im.abs() <= SINGULAR_TOL {
        return Err(CoreError::BranchCut { at, base: v });
    }
    Ok(v.ln())
}

impl HoloMap {
    fn new(node: Node) -> Self {
        HoloMap { node: Arc::new(node) }
    }

    pub fn constant(c: impl Into<Complex64>) -> Self {
        HoloMap::new(Node::Const(c.into()))
    }

    /// The identity map z.
    pub fn identity() -> Self {
        HoloMap::new(Node::Identity)
    }

    fn as_const(&self) -> Option<Complex64> {
        match *self.node {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn sum(a: HoloMap, b: HoloMap) -> Self {
        if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
            return HoloMap::constant(x + y);
        }
        HoloMap::new(Node::Sum(a, b))
    }

    pub fn product(a: HoloMap, b: HoloMap) -> Self {
        if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
            return HoloMap::constant(x * y);
        }
        HoloMap::new(Node::Product(a, b))
    }

    pub fn quotient(num: HoloMap, den: HoloMap) -> Self {
        if let (Some(x), Some(y)) = (num.as_const(), den.as_const()) {
            if y.norm() > SINGULAR_TOL {
                return HoloMap::constant(x / y);
            }
        }
        HoloMap::new(Node::Quotient(num, den))
    }

    /// outer(inner(z)).
    pub fn compose(outer: HoloMap, inner: HoloMap) -> Self {
        HoloMap::new(Node::Compose(outer, inner))
    }

    /// Principal power `base^exponent`. Raises `BranchCut` at evaluation
    /// when the base value lands on the non-positive real axis.
    pub fn power(base: HoloMap, exponent: impl Into<Complex64>) -> Self {
        let exponent = exponent.into();
        if exponent == Complex64::new(0.0, 0.0) {
            return HoloMap::constant(1.0);
        }
        if exponent == Complex64::new(1.0, 0.0) {
            return base;
        }
        HoloMap::new(Node::Power(base, exponent))
    }

    pub fn exp_of(m: HoloMap) -> Self {
        HoloMap::new(Node::Exp(m))
    }

    /// Principal logarithm of m.
    pub fn log_of(m: HoloMap) -> Self {
        HoloMap::new(Node::Log(m))
    }

    /// z -> integral of 1/f over the straight segment from 0 to z.
    pub fn recip_integral(f: HoloMap) -> Self {
        HoloMap::new(Node::RecipIntegral(f))
    }

    /// num(z)/(z - at) for a numerator vanishing at `at`; the singularity is
    /// removable and evaluation at `at` returns num'(at).
    pub fn removable_div(num: HoloMap, at: impl Into<Complex64>) -> Self {
        HoloMap::new(Node::RemovableDiv(num, at.into()))
    }

    /// 1/m.
    pub fn recip(m: HoloMap) -> Self {
        HoloMap::quotient(HoloMap::constant(1.0), m)
    }

    /// Value of the map at z. Evaluation is exact arithmetic on the tree;
    /// quotients and logarithms at a vanishing denominator/argument raise
    /// `SingularPoint`/`BranchCut` instead of returning garbage.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        let v = match &*self.node {
            Node::Const(c) => *c,
            Node::Identity => z,
            Node::Sum(a, b) => a.eval(z)? + b.eval(z)?,
            Node::Product(a, b) => a.eval(z)? * b.eval(z)?,
            Node::Quotient(n, d) => {
                let dv = d.eval(z)?;
                if dv.norm() < SINGULAR_TOL {
                    return Err(CoreError::SingularPoint {
                        at: z,
                        what: "denominator",
                        magnitude: dv.norm(),
                    });
                }
                n.eval(z)? / dv
            }
            Node::Compose(outer, inner) => outer.eval(inner.eval(z)?)?,
            Node::Power(base, a) => (*a * checked_log(base.eval(z)?, z)?).exp(),
            Node::Exp(u) => u.eval(z)?.exp(),
            Node::Log(u) => checked_log(u.eval(z)?, z)?,
            Node::RecipIntegral(f) => segment_integral_reciprocal(f, z, QUAD_ORDER)?,
            Node::RemovableDiv(num, at) => {
                let w = z - at;
                if w.norm() <= REMOVABLE_WINDOW {
                    num.eval_d(*at)?.1
                } else {
                    num.eval(z)? / w
                }
            }
        };
        finite(v, z)
    }

    /// Value and exact structural derivative at z.
    pub fn eval_d(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        let zero = Complex64::new(0.0, 0.0);
        let (v, d) = match &*self.node {
            Node::Const(c) => (*c, zero),
            Node::Identity => (z, Complex64::new(1.0, 0.0)),
            Node::Sum(a, b) => {
                let (va, da) = a.eval_d(z)?;
                let (vb, db) = b.eval_d(z)?;
                (va + vb, da + db)
            }
            Node::Product(a, b) => {
                let (va, da) = a.eval_d(z)?;
                let (vb, db) = b.eval_d(z)?;
                (va * vb, da * vb + va * db)
            }
            Node::Quotient(n, dnm) => {
                let (vd, dd) = dnm.eval_d(z)?;
                if vd.norm() < SINGULAR_TOL {
                    return Err(CoreError::SingularPoint {
                        at: z,
                        what: "denominator",
                        magnitude: vd.norm(),
                    });
                }
                let (vn, dn) = n.eval_d(z)?;
                (vn / vd, (dn * vd - vn * dd) / (vd * vd))
            }
            Node::Compose(outer, inner) => {
                let (vi, di) = inner.eval_d(z)?;
                let (vo, douter) = outer.eval_d(vi)?;
                (vo, douter * di)
            }
            Node::Power(base, a) => {
                let (vb, db) = base.eval_d(z)?;
                let v = (*a * checked_log(vb, z)?).exp();
                (v, *a * v * db / vb)
            }
            Node::Exp(u) => {
                let (vu, du) = u.eval_d(z)?;
                let v = vu.exp();
                (v, v * du)
            }
            Node::Log(u) => {
                let (vu, du) = u.eval_d(z)?;
                (checked_log(vu, z)?, du / vu)
            }
            Node::RecipIntegral(f) => {
                let fv = f.eval(z)?;
                if fv.norm() < SINGULAR_TOL {
                    return Err(CoreError::SingularPoint {
                        at: z,
                        what: "integrand denominator",
                        magnitude: fv.norm(),
                    });
                }
                (segment_integral_reciprocal(f, z, QUAD_ORDER)?, fv.inv())
            }
            Node::RemovableDiv(num, at) => {
                let w = z - at;
                if w.norm() <= REMOVABLE_WINDOW {
                    // Value is num'(at); the second derivative needed for the
                    // slope comes from a centered difference of the exact
                    // first derivative.
                    let h = 1e-5;
                    let v = num.eval_d(*at)?.1;
                    let dp = num.eval_d(at + Complex64::new(h, 0.0))?.1;
                    let dm = num.eval_d(at - Complex64::new(h, 0.0))?.1;
                    (v, (dp - dm) / (4.0 * h))
                } else {
                    let (vn, dn) = num.eval_d(z)?;
                    (vn / w, (dn * w - vn) / (w * w))
                }
            }
        };
        Ok((finite(v, z)?, d))
    }

    /// Exact structural derivative value at z.
    pub fn derivative(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.eval_d(z)?.1)
    }

    /// The derivative as a new expression tree.
    pub fn derivative_map(&self) -> HoloMap {
        let one = HoloMap::constant(1.0);
        match &*self.node {
            Node::Const(_) => HoloMap::constant(0.0),
            Node::Identity => one,
            Node::Sum(a, b) => HoloMap::sum(a.derivative_map(), b.derivative_map()),
            Node::Product(a, b) => HoloMap::sum(
                HoloMap::product(a.derivative_map(), b.clone()),
                HoloMap::product(a.clone(), b.derivative_map()),
            ),
            Node::Quotient(n, d) => HoloMap::quotient(
                HoloMap::sum(
                    HoloMap::product(n.derivative_map(), d.clone()),
                    -HoloMap::product(n.clone(), d.derivative_map()),
                ),
                HoloMap::product(d.clone(), d.clone()),
            ),
            Node::Compose(outer, inner) => HoloMap::product(
                HoloMap::compose(outer.derivative_map(), inner.clone()),
                inner.derivative_map(),
            ),
            Node::Power(base, a) => HoloMap::product(
                HoloMap::constant(*a),
                HoloMap::product(
                    HoloMap::power(base.clone(), *a - Complex64::new(1.0, 0.0)),
                    base.derivative_map(),
                ),
            ),
            Node::Exp(u) => HoloMap::product(HoloMap::exp_of(u.clone()), u.derivative_map()),
            Node::Log(u) => HoloMap::quotient(u.derivative_map(), u.clone()),
            Node::RecipIntegral(f) => HoloMap::recip(f.clone()),
            Node::RemovableDiv(num, at) => {
                // (num/(z-a))' = [num'(z-a) - num] / (z-a)^2, and the bracket
                // has a double zero at `a`, so divide out twice.
                let shifted = HoloMap::identity() - HoloMap::constant(*at);
                let bracket = HoloMap::sum(
                    HoloMap::product(num.derivative_map(), shifted),
                    -num.clone(),
                );
                HoloMap::removable_div(HoloMap::removable_div(bracket, *at), *at)
            }
        }
    }
}

impl From<Complex64> for HoloMap {
    fn from(c: Complex64) -> Self {
        HoloMap::constant(c)
    }
}

impl From<f64> for HoloMap {
    fn from(x: f64) -> Self {
        HoloMap::constant(x)
    }
}

impl Add for HoloMap {
    type Output = HoloMap;
    fn add(self, rhs: HoloMap) -> HoloMap {
        HoloMap::sum(self, rhs)
    }
}

impl Sub for HoloMap {
    type Output = HoloMap;
    fn sub(self, rhs: HoloMap) -> HoloMap {
        HoloMap::sum(self, -rhs)
    }
}

impl Mul for HoloMap {
    type Output = HoloMap;
    fn mul(self, rhs: HoloMap) -> HoloMap {
        HoloMap::product(self, rhs)
    }
}

impl Div for HoloMap {
    type Output = HoloMap;
    fn div(self, rhs: HoloMap) -> HoloMap {
        HoloMap::quotient(self, rhs)
    }
}

impl Neg for HoloMap {
    type Output = HoloMap;
    fn neg(self) -> HoloMap {
        HoloMap::product(HoloMap::constant(-1.0), self)
    }
}

/// Radial limit of m at a unimodular boundary point with Richardson
/// acceleration along `(1 - eps_k) tau`, `eps_k = eps0 / 2^k`.
///
/// Returns the extrapolated value and an error estimate. Raises
/// `NoFiniteLimit` when the extrapolants grow without bound or fail to
/// contract below `tol * (1 + |limit|)`.
pub fn radial_limit(m: &HoloMap, tau: Complex64, tol: f64) -> Result<(Complex64, f64)> {
    let n = RADIAL_HALVINGS + 1;
    let mut diag: Vec<Complex64> = Vec::with_capacity(n);
    let mut row: Vec<Complex64> = Vec::with_capacity(n);
    let mut best: Option<(Complex64, f64)> = None;

    for k in 0..n {
        let eps = RADIAL_EPS0 / (1u64 << k) as f64;
        let sample = m.eval(tau * (1.0 - eps))?;
        if sample.norm() > 1e14 {
            return Err(CoreError::NoFiniteLimit {
                tau,
                residual: sample.norm(),
                tol,
            });
        }
        // Richardson update: eliminate one power of eps per column.
        let mut value = sample;
        let mut new_row = Vec::with_capacity(k + 1);
        new_row.push(value);
        for (j, prev) in row.iter().enumerate() {
            let factor = (1u64 << (j + 1)) as f64;
            value = value + (value - prev) / (factor - 1.0);
            new_row.push(value);
        }
        row = new_row;
        diag.push(value);
        if k > 0 {
            let err = (diag[k] - diag[k - 1]).norm();
            if best.is_none_or(|(_, e)| err <= e) {
                best = Some((value, err));
            }
        }
    }

    let (value, err) = best.expect("at least two extrapolation levels");
    if err > tol * (1.0 + value.norm()) {
        return Err(CoreError::NoFiniteLimit {
            tau,
            residual: err,
            tol,
        });
    }
    Ok((value, err))
}

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// Legendre recurrence.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut rule = vec![(0.0, 0.0); n];
    let half = n.div_ceil(2);
    for i in 0..half {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        loop {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                let w = 2.0 / ((1.0 - x * x) * dp * dp);
                rule[i] = (-x, w);
                rule[n - 1 - i] = (x, w);
                break;
            }
        }
    }
    rule
}

/// Integral of 1/f over the straight segment from `from` to `to`, by
/// adaptive Gauss-Legendre bisection.
pub fn integrate_reciprocal_segment(
    f: &HoloMap,
    from: Complex64,
    to: Complex64,
    order: usize,
) -> Result<Complex64> {
    let dir = to - from;
    if dir.norm() == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let rule = gauss_legendre(order);
    let panel = |s0: f64, s1: f64| -> Result<Complex64> {
        let mid = 0.5 * (s0 + s1);
        let halfwidth = 0.5 * (s1 - s0);
        let mut acc = Complex64::new(0.0, 0.0);
        for &(x, w) in &rule {
            let zeta = from + dir * (mid + halfwidth * x);
            let fv = f.eval(zeta)?;
            if fv.norm() < PATH_ZERO_TOL {
                return Err(CoreError::ZeroOnPath {
                    at: zeta,
                    magnitude: fv.norm(),
                });
            }
            acc += fv.inv() * w;
        }
        Ok(acc * halfwidth * dir)
    };

    fn refine(
        panel: &dyn Fn(f64, f64) -> Result<Complex64>,
        s0: f64,
        s1: f64,
        coarse: Complex64,
        tol: f64,
        depth: usize,
    ) -> Result<Complex64> {
        let sm = 0.5 * (s0 + s1);
        let left = panel(s0, sm)?;
        let right = panel(sm, s1)?;
        let fine = left + right;
        let err = (fine - coarse).norm();
        // the rounding floor keeps deep refinements near off-path poles from
        // chasing noise below machine precision
        if err <= tol.max(1e-15 * fine.norm()) {
            return Ok(fine);
        }
        if depth >= QUAD_MAX_DEPTH {
            return Err(CoreError::NonConvergent { error: err, depth });
        }
        Ok(refine(panel, s0, sm, left, 0.5 * tol, depth + 1)?
            + refine(panel, sm, s1, right, 0.5 * tol, depth + 1)?)
    }

    let coarse = panel(0.0, 1.0)?;
    refine(&panel, 0.0, 1.0, coarse, QUAD_TOL, 0)
}

/// Integral of 1/f over the straight segment [0, z].
///
/// Path independence inside the disk holds whenever f is zero-free there;
/// a near-zero of f at a quadrature node raises `ZeroOnPath`.
pub fn segment_integral_reciprocal(f: &HoloMap, z: Complex64, order: usize) -> Result<Complex64> {
    integrate_reciprocal_segment(f, Complex64::new(0.0, 0.0), z, order)
}

/// Cached samples of (m, m') on the circle |z| = r, reusable across many
/// target values in argument-principle counting.
pub struct ContourSamples {
    /// (m(z_j), m'(z_j) * z_j) at the uniform angular nodes.
    samples: Vec<(Complex64, Complex64)>,
}

impl ContourSamples {
    pub fn new(m: &HoloMap, r: f64, nodes: usize) -> Result<Self> {
        let samples: Result<Vec<(Complex64, Complex64)>> = (0..nodes)
            .into_par_iter()
            .map(|j| {
                let theta = 2.0 * std::f64::consts::PI * j as f64 / nodes as f64;
                let z = Complex64::from_polar(r, theta);
                let (v, d) = m.eval_d(z)?;
                Ok((v, d * z))
            })
            .collect();
        Ok(ContourSamples { samples: samples? })
    }

    /// The cached (m(z_j), m'(z_j) z_j) pairs.
    pub fn values(&self) -> &[(Complex64, Complex64)] {
        &self.samples
    }

    /// Number of preimages of w0 enclosed by the sampled circle.
    pub fn count(&self, w0: Complex64) -> Result<usize> {
        let mut min_mod = f64::INFINITY;
        let mut acc = Complex64::new(0.0, 0.0);
        for &(v, dz) in &self.samples {
            let den = v - w0;
            min_mod = min_mod.min(den.norm());
            acc += dz / den;
        }
        if min_mod < CONTOUR_ROOT_TOL {
            return Err(CoreError::RootOnContour {
                min_modulus: min_mod,
            });
        }
        let winding = acc / self.samples.len() as f64;
        let k = winding.re.round();
        let residual = (winding - Complex64::new(k, 0.0)).norm();
        if residual >= 0.1 || k < 0.0 {
            return Err(CoreError::Unresolved { residual });
        }
        Ok(k as usize)
    }
}

/// Number of solutions of m(z) = w0 in |z| < r, counted with multiplicity
/// by the argument principle on |z| = r with `nodes` trapezoid points.
pub fn count_preimages(m: &HoloMap, w0: Complex64, r: f64, nodes: usize) -> Result<usize> {
    ContourSamples::new(m, r, nodes)?.count(w0)
}

/// A finite polar sampling of the open disk, the working surrogate for
/// "uniformly on compact subsets".
#[derive(Clone, Debug)]
pub struct DiskGrid {
    pub points: Vec<Complex64>,
    pub n_radial: usize,
    pub n_angular: usize,
    pub r_max: f64,
}

impl DiskGrid {
    /// Polar grid with radii `r_max * (i+1)/n_radial` and uniform angles.
    pub fn polar(n_radial: usize, n_angular: usize, r_max: f64) -> Self {
        assert!(r_max < 1.0, "grid must stay inside the unit disk");
        let mut points = Vec::with_capacity(n_radial * n_angular);
        for i in 0..n_radial {
            let r = r_max * (i + 1) as f64 / n_radial as f64;
            for j in 0..n_angular {
                let theta = 2.0 * std::f64::consts::PI * j as f64 / n_angular as f64;
                points.push(Complex64::from_polar(r, theta));
            }
        }
        DiskGrid {
            points,
            n_radial,
            n_angular,
            r_max,
        }
    }

    /// The grid used for derivative and residual checks: 21 x 64, r <= 0.95.
    pub fn standard() -> Self {
        DiskGrid::polar(21, 64, 0.95)
    }

    /// The positivity-certification grid: 48 x 128, r <= 0.995.
    pub fn certification() -> Self {
        DiskGrid::polar(48, 128, 0.995)
    }

    /// Radii 1 - 2^-k, k = 1..=10, times uniform angles; used for
    /// boundary-sensitive infima.
    pub fn boundary_concentrated(n_angular: usize) -> Self {
        let mut points = Vec::new();
        for k in 1..=10u32 {
            let r = 1.0 - 0.5f64.powi(k as i32);
            for j in 0..n_angular {
                let theta = 2.0 * std::f64::consts::PI * j as f64 / n_angular as f64;
                points.push(Complex64::from_polar(r, theta));
            }
        }
        DiskGrid {
            points,
            n_radial: 10,
            n_angular,
            r_max: 1.0 - 0.5f64.powi(10),
        }
    }

    /// Coarse polar sampling of |z| <= r for sup-norm comparisons.
    pub fn compact(r: f64) -> Self {
        DiskGrid::polar(8, 24, r)
    }

    /// sup over the grid of |a - b|.
    pub fn sup_diff(&self, a: &HoloMap, b: &HoloMap) -> Result<f64> {
        let mut sup: f64 = 0.0;
        for &z in &self.points {
            sup = sup.max((a.eval(z)? - b.eval(z)?).norm());
        }
        Ok(sup)
    }

    /// min over the grid of Re m.
    pub fn min_re(&self, m: &HoloMap) -> Result<(f64, Complex64)> {
        let mut min = f64::INFINITY;
        let mut argmin = Complex64::new(0.0, 0.0);
        for &z in &self.points {
            let re = m.eval(z)?.re;
            if re < min {
                min = re;
                argmin = z;
            }
        }
        Ok((min, argmin))
    }
}
