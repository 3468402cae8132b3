//! One-parameter semigroups of self-maps of the disk: direct integration of
//! dz/dt = -f(z), the Schroeder functional form F_t = h^{-1}(e^{-mu t} h(z)),
//! generator recovery, the Julia-type horocycle bound, and the stability
//! experiment for perturbed generators.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::approx::build_f_tau;
use crate::error::CoreError;
use crate::holomap::{DiskGrid, HoloMap};
use crate::spiral::SpirallikeFn;
use crate::Result;

/// Default absolute and relative integrator tolerance.
pub const FLOW_TOL: f64 = 1e-10;
/// Largest accepted step; keeps the dense interpolation honest.
const H_MAX: f64 = 0.25;
/// Trial values this close to the unit circle are rejected and the step halved.
const DISK_GUARD: f64 = 1e-12;

#[derive(Clone, Copy, Debug)]
struct Step {
    t0: f64,
    h: f64,
    y0: Complex64,
    y1: Complex64,
    d0: Complex64,
    d1: Complex64,
}

impl Step {
    /// Cubic Hermite interpolation inside the step.
    fn interpolate(&self, t: f64) -> Complex64 {
        let theta = ((t - self.t0) / self.h).clamp(0.0, 1.0);
        let t2 = theta * theta;
        let t3 = t2 * theta;
        self.y0 * (2.0 * t3 - 3.0 * t2 + 1.0)
            + self.d0 * (self.h * (t3 - 2.0 * t2 + theta))
            + self.y1 * (-2.0 * t3 + 3.0 * t2)
            + self.d1 * (self.h * (t3 - t2))
    }
}

/// A numerically integrated flow line t -> F_t(z0), with dense output.
#[derive(Clone, Debug)]
pub struct Trajectory {
    z0: Complex64,
    t_end: f64,
    steps: Vec<Step>,
}

impl Trajectory {
    pub fn start(&self) -> Complex64 {
        self.z0
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn endpoint(&self) -> Complex64 {
        self.steps.last().map_or(self.z0, |s| s.y1)
    }

    /// Value at any t in [0, t_end], by Hermite interpolation of the
    /// enclosing accepted step.
    pub fn sample(&self, t: f64) -> Complex64 {
        if t <= 0.0 || self.steps.is_empty() {
            return self.z0;
        }
        if t >= self.t_end {
            return self.endpoint();
        }
        let idx = self
            .steps
            .partition_point(|s| s.t0 + s.h < t)
            .min(self.steps.len() - 1);
        self.steps[idx].interpolate(t)
    }

    /// The accepted integration nodes, including the initial point.
    pub fn nodes(&self) -> Vec<(f64, Complex64)> {
        let mut out = vec![(0.0, self.z0)];
        out.extend(self.steps.iter().map(|s| (s.t0 + s.h, s.y1)));
        out
    }
}

// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const ERR: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Solve dz/dt = -f(z), z(0) = z0 on [0, t_end] with an embedded adaptive
/// Runge-Kutta 5(4) pair at absolute/relative tolerance `tol`.
///
/// Any trial value reaching the unit circle is rejected and the step halved;
/// persistent rejection (the field points outward, so f is not a generator)
/// raises `StepFailure`.
pub fn integrate_flow(f: &HoloMap, z0: Complex64, t_end: f64, tol: f64) -> Result<Trajectory> {
    assert!(z0.norm() < 1.0, "starting point must be interior");
    assert!(t_end >= 0.0, "negative time is out of scope");
    let rhs = |z: Complex64| -> Result<Complex64> { Ok(-f.eval(z)?) };

    let mut traj = Trajectory {
        z0,
        t_end,
        steps: Vec::new(),
    };
    if t_end == 0.0 {
        return Ok(traj);
    }

    let mut t = 0.0;
    let mut y = z0;
    let mut d = rhs(y)?;
    let mut h = (t_end / 100.0).clamp(1e-8, H_MAX);
    let h_min = 1e-13 * t_end.max(1.0);

    while t < t_end {
        // remaining horizon below the step floor is rounding residue
        if t_end - t <= h_min {
            break;
        }
        if h < h_min {
            return Err(CoreError::StepFailure { t });
        }
        h = h.min(t_end - t);

        // FSAL stages; any evaluation failure or disk exit rejects the step.
        let mut k = [Complex64::new(0.0, 0.0); 7];
        k[0] = d;
        let mut failed = false;
        for stage in 0..6 {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, kj) in k.iter().enumerate().take(stage + 1) {
                acc += A[stage][j] * kj;
            }
            let z_trial = y + acc * h;
            if stage == 5 && z_trial.norm() >= 1.0 - DISK_GUARD {
                failed = true;
                break;
            }
            match rhs(z_trial) {
                Ok(v) => k[stage + 1] = v,
                Err(_) => {
                    failed = true;
                    break;
                }
            }
        }
        if failed {
            h *= 0.5;
            continue;
        }

        let mut y1 = y;
        for (j, kj) in k.iter().enumerate().take(6) {
            y1 += A[5][j] * kj * h;
        }
        let mut err = Complex64::new(0.0, 0.0);
        for (j, kj) in k.iter().enumerate() {
            err += ERR[j] * kj * h;
        }
        let scale = tol + tol * y.norm().max(y1.norm());
        let err_norm = err.norm() / scale;

        if err_norm <= 1.0 && y1.norm() < 1.0 - DISK_GUARD {
            let d1 = k[6];
            traj.steps.push(Step {
                t0: t,
                h,
                y0: y,
                y1,
                d0: d,
                d1,
            });
            t += h;
            y = y1;
            d = d1;
            let grow = if err_norm == 0.0 {
                5.0
            } else {
                (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0)
            };
            h = (h * grow).min(H_MAX);
        } else {
            let shrink = if err_norm > 1.0 {
                (0.9 * err_norm.powf(-0.2)).clamp(0.1, 0.5)
            } else {
                0.5
            };
            h *= shrink;
        }
    }
    Ok(traj)
}

/// Endpoint F_t(z), integrating with default tolerance.
pub fn flow_endpoint(f: &HoloMap, z: Complex64, t: f64) -> Result<Complex64> {
    Ok(integrate_flow(f, z, t, FLOW_TOL)?.endpoint())
}

/// Evaluate the semigroup through the Schroeder equation: solve
/// h(zeta) = e^{-mu t} h(z) by damped Newton iteration seeded from the
/// integrated endpoint. The residual of the returned zeta is below 1e-11.
pub fn schroder_flow(h: &SpirallikeFn, mu: Complex64, z: Complex64, t: f64) -> Result<Complex64> {
    assert!(z.norm() < 1.0 && t >= 0.0);
    if t == 0.0 {
        return Ok(z);
    }
    let target = (-(mu * t)).exp() * h.h().eval(z)?;
    let mut zeta = flow_endpoint(h.f(), z, t)?;
    let mut residual = (h.h().eval(zeta)? - target).norm();

    for iteration in 0..50 {
        if residual < 1e-11 {
            return Ok(zeta);
        }
        let (value, slope) = h.h().eval_d(zeta)?;
        if slope.norm() < 1e-14 {
            return Err(CoreError::NewtonDiverged {
                residual,
                iterations: iteration,
            });
        }
        let full_step = (value - target) / slope;
        // halve the step until the residual actually decreases
        let mut damping = 1.0;
        loop {
            let trial = zeta - full_step * damping;
            let ok = trial.norm() < 1.0
                && h
                    .h()
                    .eval(trial)
                    .is_ok_and(|v| (v - target).norm() < residual);
            if ok {
                zeta = trial;
                residual = (h.h().eval(zeta)? - target).norm();
                break;
            }
            damping *= 0.5;
            if damping < 1e-8 {
                return Err(CoreError::NewtonDiverged {
                    residual,
                    iterations: iteration,
                });
            }
        }
    }
    if residual < 1e-11 {
        Ok(zeta)
    } else {
        Err(CoreError::NewtonDiverged {
            residual,
            iterations: 50,
        })
    }
}

/// One grid point of the finite-time generator recovery (z - F_t(z))/t.
#[derive(Clone, Debug)]
pub struct RecoveryRow {
    pub z: Complex64,
    pub recovered: Complex64,
    pub exact: Complex64,
    pub error: f64,
}

/// Difference quotients (z - F_t(z))/t against f on the grid; the error is
/// O(t), so halving t roughly halves it.
pub fn generator_recovery(f: &HoloMap, grid: &DiskGrid, t: f64) -> Result<Vec<RecoveryRow>> {
    assert!(t > 0.0 && t <= 0.1, "recovery wants a short horizon");
    grid.points
        .par_iter()
        .map(|&z| {
            let endpoint = flow_endpoint(f, z, t)?;
            let recovered = (z - endpoint) / t;
            let exact = f.eval(z)?;
            Ok(RecoveryRow {
                z,
                recovered,
                exact,
                error: (recovered - exact).norm(),
            })
        })
        .collect()
}

/// The Julia quotient
/// [|F_t(z)-tau|^2/(1-|F_t(z)|^2)] / [e^{-t gamma} |z-tau|^2/(1-|z|^2)];
/// at gamma equal to the angular derivative this never exceeds 1.
pub fn julia_ratio(
    f: &HoloMap,
    tau: Complex64,
    gamma: f64,
    z: Complex64,
    t: f64,
) -> Result<f64> {
    assert!((tau.norm() - 1.0).abs() < 1e-12, "tau must be unimodular");
    let ft = flow_endpoint(f, z, t)?;
    let lhs = (ft - tau).norm_sqr() / (1.0 - ft.norm_sqr());
    let rhs = (-t * gamma).exp() * (z - tau).norm_sqr() / (1.0 - z.norm_sqr());
    Ok(lhs / rhs)
}

/// One row of the perturbed-flow stability experiment.
#[derive(Clone, Debug)]
pub struct StabilityRow {
    pub tau: Complex64,
    pub sup_err: f64,
}

/// For each tau, sup over grid x [0, T] (16 time samples) of
/// |F_t^(tau)(z) - F_t(z)| where F^(tau) flows under the interpolating
/// generator f_tau with f_tau'(tau) = mu.
pub fn stability_table(
    f: &HoloMap,
    mu: Complex64,
    taus: &[Complex64],
    t_end: f64,
    grid: &DiskGrid,
) -> Result<Vec<StabilityRow>> {
    if mu.norm() < 1e-6 {
        return Err(CoreError::NotAdmissible {
            reason: "stability experiment needs mu bounded away from 0".into(),
        });
    }
    let times: Vec<f64> = (0..16).map(|i| t_end * (i + 1) as f64 / 16.0).collect();
    let mut rows = Vec::with_capacity(taus.len());
    for &tau in taus {
        let f_tau = build_f_tau(f, mu, tau)?;
        let sup = grid
            .points
            .par_iter()
            .map(|&z| -> Result<f64> {
                let base = integrate_flow(f, z, t_end, FLOW_TOL)?;
                let perturbed = integrate_flow(f_tau.f(), z, t_end, FLOW_TOL)?;
                let mut sup: f64 = 0.0;
                for &t in &times {
                    sup = sup.max((base.sample(t) - perturbed.sample(t)).norm());
                }
                Ok(sup)
            })
            .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))?;
        rows.push(StabilityRow { tau, sup_err: sup });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spiral::koenigs;
    use crate::stock;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn linear_flow_closed_form() {
        // f = z - 1: F_t(z) = 1 + (z - 1) e^{-t}
        let traj = integrate_flow(&stock::z_minus_one(), c(0.0, 0.0), 1.0, FLOW_TOL).unwrap();
        let expected = 1.0 - (-1.0f64).exp();
        assert!(
            (traj.endpoint() - c(expected, 0.0)).norm() < 1e-9,
            "{} vs {expected}",
            traj.endpoint()
        );
    }

    #[test]
    fn zero_horizon_returns_start() {
        let traj = integrate_flow(&stock::z_minus_one(), c(0.3, 0.1), 0.0, FLOW_TOL).unwrap();
        assert_eq!(traj.endpoint(), c(0.3, 0.1));
    }

    #[test]
    fn dilation_flow_closed_form() {
        // f = z: F_t(z) = z e^{-t}
        let traj = integrate_flow(&HoloMap::identity(), c(0.5, 0.0), 1.0, FLOW_TOL).unwrap();
        let expected = 0.5 * (-1.0f64).exp();
        assert!((traj.endpoint() - c(expected, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn samples_stay_inside_disk() {
        let traj = integrate_flow(&stock::z_minus_one(), c(-0.9, 0.05), 5.0, FLOW_TOL).unwrap();
        for (_, z) in traj.nodes() {
            assert!(z.norm() < 1.0);
        }
    }

    #[test]
    fn dense_output_matches_closed_form() {
        let traj = integrate_flow(&stock::z_minus_one(), c(0.2, 0.3), 2.0, FLOW_TOL).unwrap();
        for i in 0..=20 {
            let t = 2.0 * i as f64 / 20.0;
            let expected = c(1.0, 0.0) + (c(0.2, 0.3) - c(1.0, 0.0)) * (-t).exp();
            assert!(
                (traj.sample(t) - expected).norm() < 1e-5,
                "t = {t}: {} vs {expected}",
                traj.sample(t)
            );
        }
    }

    #[test]
    fn non_generator_steps_fail() {
        // dz/dt = -(-z) = z pushes outward; the flow must exit and fail
        let outward = -HoloMap::identity();
        match integrate_flow(&outward, c(0.5, 0.0), 2.0, FLOW_TOL) {
            Err(CoreError::StepFailure { .. }) => {}
            other => panic!("expected StepFailure, got {other:?}"),
        }
    }

    #[test]
    fn semigroup_law() {
        let grid = DiskGrid::polar(4, 8, 0.8);
        for f in [stock::z_minus_one(), HoloMap::identity()] {
            for &z in grid.points.iter().step_by(3) {
                for (s, t) in [(0.1, 0.5), (0.5, 1.0)] {
                    let direct = flow_endpoint(&f, z, s + t).unwrap();
                    let mid = flow_endpoint(&f, z, s).unwrap();
                    let composed = flow_endpoint(&f, mid, t).unwrap();
                    assert!(
                        (direct - composed).norm() < 1e-6,
                        "f at z={z} s={s} t={t}: {direct} vs {composed}"
                    );
                }
            }
        }
    }

    #[test]
    fn denjoy_wolff_attraction() {
        let grid = DiskGrid::polar(3, 8, 0.8);
        for &z in &grid.points {
            let ft = flow_endpoint(&stock::z_minus_one(), z, 10.0).unwrap();
            assert!((ft - c(1.0, 0.0)).norm() < 5e-5 * (z - c(1.0, 0.0)).norm());
        }
    }

    #[test]
    fn schroder_matches_closed_form() {
        let h = koenigs(&stock::z_minus_one(), c(1.0, 0.0)).unwrap();
        let v = schroder_flow(&h, c(1.0, 0.0), c(0.0, 0.0), 1.0).unwrap();
        let expected = 1.0 - (-1.0f64).exp();
        assert!((v - c(expected, 0.0)).norm() < 1e-10, "{v}");
        // t = 0 is the identity
        assert_eq!(
            schroder_flow(&h, c(1.0, 0.0), c(0.2, 0.1), 0.0).unwrap(),
            c(0.2, 0.1)
        );
    }

    #[test]
    fn schroder_consistent_with_integration() {
        let h = koenigs(&stock::z_minus_one(), c(1.0, 0.0)).unwrap();
        let grid = DiskGrid::polar(3, 6, 0.8);
        for &z in grid.points.iter().step_by(2) {
            for t in [0.5, 1.0, 2.0] {
                let a = schroder_flow(&h, c(1.0, 0.0), z, t).unwrap();
                let b = flow_endpoint(&stock::z_minus_one(), z, t).unwrap();
                assert!((a - b).norm() < 1e-8, "z={z} t={t}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn schroder_residual_invariant() {
        let mu = c(1.0, 0.0);
        let h = koenigs(&stock::z_minus_one(), mu).unwrap();
        for &z in DiskGrid::polar(3, 6, 0.8).points.iter().step_by(3) {
            for t in [0.5, 1.5] {
                let ft = schroder_flow(&h, mu, z, t).unwrap();
                let lhs = h.h().eval(ft).unwrap();
                let rhs = (-(mu * t)).exp() * h.h().eval(z).unwrap();
                assert!((lhs - rhs).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn generator_recovery_first_order() {
        let grid = DiskGrid::polar(3, 8, 0.7);
        let coarse = generator_recovery(&stock::z_minus_one(), &grid, 0.01).unwrap();
        let fine = generator_recovery(&stock::z_minus_one(), &grid, 0.005).unwrap();
        for (a, b) in coarse.iter().zip(&fine) {
            assert!(a.error < 0.01);
            let ratio = b.error / a.error;
            assert!((0.4..0.6).contains(&ratio), "ratio {ratio}");
        }
        let at_half = generator_recovery(&HoloMap::identity(), &grid, 0.01).unwrap();
        assert!(at_half.iter().all(|row| row.error < 0.01));
    }

    #[test]
    fn julia_quotient_bounded() {
        let tau = c(1.0, 0.0);
        for &z in DiskGrid::polar(3, 8, 0.8).points.iter().step_by(2) {
            let ratio = julia_ratio(&stock::z_minus_one(), tau, 1.0, z, 1.0).unwrap();
            assert!(ratio <= 1.0 + 1e-8, "ratio {ratio} at z = {z}");
            // weaker bound with gamma = 0 still holds
            let weak = julia_ratio(&stock::z_minus_one(), tau, 0.0, z, 1.0).unwrap();
            assert!(weak <= 1.0 + 1e-8);
        }
        // t = 0 makes both sides equal
        let unit = julia_ratio(&stock::z_minus_one(), tau, 0.7, c(0.3, 0.2), 0.0).unwrap();
        assert!((unit - 1.0).abs() < 1e-12);
    }

    #[test]
    fn stability_of_perturbed_flows() {
        let taus = [c(0.9, 0.0), c(0.99, 0.0)];
        let grid = DiskGrid::polar(3, 8, 0.5);
        let rows =
            stability_table(&stock::z_minus_one(), c(1.0, 0.0), &taus, 2.0, &grid).unwrap();
        assert!(rows[1].sup_err < rows[0].sup_err, "{rows:?}");
        assert!(rows[1].sup_err < 0.05, "{rows:?}");
    }

    #[test]
    fn stability_with_zero_horizon() {
        let rows = stability_table(
            &stock::z_minus_one(),
            c(1.0, 0.0),
            &[c(0.9, 0.0)],
            0.0,
            &DiskGrid::polar(2, 4, 0.5),
        )
        .unwrap();
        assert_eq!(rows[0].sup_err, 0.0);
    }
}
