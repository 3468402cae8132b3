//! Named library of the maps used by the experiments and the CLI.

use num_complex::Complex64;

use crate::holomap::HoloMap;

pub fn identity() -> HoloMap {
    HoloMap::identity()
}

/// 1 - z.
pub fn one_minus_z() -> HoloMap {
    HoloMap::constant(1.0) - HoloMap::identity()
}

/// z - 1, the basic boundary-null-point generator.
pub fn z_minus_one() -> HoloMap {
    HoloMap::identity() - HoloMap::constant(1.0)
}

/// The Cayley map (1+z)/(1-z), onto the right half-plane.
pub fn cayley() -> HoloMap {
    (HoloMap::constant(1.0) + HoloMap::identity()) / one_minus_z()
}

/// 1/(1-z), onto the half-plane Re w > 1/2.
pub fn half_plane() -> HoloMap {
    HoloMap::recip(one_minus_z())
}

/// The unstable perturbation of z - 1: (z - tau)(1 - z tau)/(1 - z), tau real.
pub fn example1_bad_generator(tau: f64) -> HoloMap {
    let t = HoloMap::constant(tau);
    (HoloMap::identity() - t.clone()) * (HoloMap::constant(1.0) - HoloMap::identity() * t)
        / one_minus_z()
}

/// Closed form of the Koenigs function of the unstable family:
/// (tau - z)(1 - z tau)^(1/tau) / tau.
pub fn example1_bad_koenigs(tau: f64) -> HoloMap {
    let t = HoloMap::constant(tau);
    (t.clone() - HoloMap::identity())
        * HoloMap::power(
            HoloMap::constant(1.0) - HoloMap::identity() * t,
            1.0 / tau,
        )
        / HoloMap::constant(tau)
}

/// The tame perturbation of z - 1: simply z - tau.
pub fn example1_good_generator(tau: f64) -> HoloMap {
    HoloMap::identity() - HoloMap::constant(tau)
}

/// Closed form of the approximants of the positive-real-part example:
/// conj(tau)(1-z) + |1-tau|^2/(1-z).
pub fn example2_q_tau_closed(tau: Complex64) -> HoloMap {
    let a = (Complex64::new(1.0, 0.0) - tau).norm_sqr();
    HoloMap::constant(tau.conj()) * one_minus_z() + HoloMap::constant(a) / one_minus_z()
}

/// (1-z)^0.8, starlike with respect to the boundary point 1.
pub fn example3_h() -> HoloMap {
    HoloMap::power(one_minus_z(), 0.8)
}

/// Closed form of the perturbed starlike family:
/// (tau - z)(1 - z conj(tau)) / (1-z)^1.2.
pub fn example3_h_tau_closed(tau: Complex64) -> HoloMap {
    (HoloMap::constant(tau) - HoloMap::identity())
        * (HoloMap::constant(1.0) - HoloMap::identity() * HoloMap::constant(tau.conj()))
        / HoloMap::power(one_minus_z(), 1.2)
}

/// Self-maps with boundary fixed point 1 feeding the valence pipeline.
pub fn bshouty_omega(power: u32) -> HoloMap {
    let mut m = HoloMap::identity();
    for _ in 1..power {
        m = m * HoloMap::identity();
    }
    m
}

/// Look up a parameter-free stock map by its CLI selector name.
pub fn by_name(name: &str) -> Option<HoloMap> {
    match name {
        "identity" => Some(identity()),
        "one-minus-z" => Some(one_minus_z()),
        "z-minus-one" => Some(z_minus_one()),
        "cayley" => Some(cayley()),
        "half-plane" => Some(half_plane()),
        "example3-h" => Some(example3_h()),
        "bshouty-omega-z" => Some(bshouty_omega(1)),
        "bshouty-omega-z2" => Some(bshouty_omega(2)),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cayley_is_positive_real_part() {
        let m = cayley();
        let v = m.eval(Complex64::new(0.3, 0.4)).unwrap();
        assert!(v.re > 0.0);
    }

    #[test]
    fn example2_closed_form_at_tau_zero() {
        // at tau = 0 the closed form collapses to 1/(1-z)
        let m = example2_q_tau_closed(Complex64::new(0.0, 0.0));
        let z = Complex64::new(0.2, 0.1);
        let expected = half_plane().eval(z).unwrap();
        assert!((m.eval(z).unwrap() - expected).norm() < 1e-14);
    }
}
