//! Gaussian density and distribution, the Mills ratio `U(z) = Φ(−z)/φ(z)`,
//! and the function `D(z) = φ(z)/z − Φ(−z)` with its inverse.
//!
//! Everything that feeds deep-tail computations also has a log-domain form,
//! since option prices far out of the money underflow long before the
//! quantities of interest become meaningless.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{domain, Error, Result};
use crate::numeric::brent;

pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Above this point the Mills ratio is evaluated by continued fraction.
pub const MILLS_CF_SWITCH: f64 = 30.0;
/// Internal switch for the cancellation-free `1 − zU(z)` used by `D`.
const TAIL_CF_SWITCH: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussPoint {
    pub z: f64,
    pub pdf: f64,
    pub cdf: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MillsValue {
    pub z: f64,
    pub u: f64,
    pub u_prime: f64,
}

fn finite(z: f64) -> Result<()> {
    if z.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("non-finite argument {z}")))
    }
}

pub fn gauss_pdf(z: f64) -> Result<f64> {
    finite(z)?;
    Ok(INV_SQRT_2PI * (-0.5 * z * z).exp())
}

pub fn gauss_cdf(z: f64) -> Result<f64> {
    finite(z)?;
    Ok(norm_cdf(z))
}

pub fn gauss_point(z: f64) -> Result<GaussPoint> {
    Ok(GaussPoint {
        z,
        pdf: gauss_pdf(z)?,
        cdf: gauss_cdf(z)?,
    })
}

#[inline]
pub(crate) fn norm_pdf(z: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

#[inline]
pub(crate) fn ln_norm_pdf(z: f64) -> f64 {
    -0.5 * z * z - LN_SQRT_2PI
}

#[inline]
pub(crate) fn norm_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

/// `log Φ(z)`, accurate for arbitrarily negative `z`.
pub fn ln_norm_cdf(z: f64) -> f64 {
    if z < -5.0 {
        mills(-z).ln() + ln_norm_pdf(z)
    } else if z > 5.0 {
        (-norm_cdf(-z)).ln_1p()
    } else {
        norm_cdf(z).ln()
    }
}

/// Backward evaluation of `S(z) = 1/(z + 2/(z + 3/(z + …)))`, so that
/// `U(z) = 1/(z + S(z))` and `1 − zU(z) = S(z)·U(z)`.
fn mills_tail_fraction(z: f64) -> f64 {
    let terms = if z >= MILLS_CF_SWITCH { 60 } else { 400 };
    let mut t = 0.0;
    for n in (2..=terms).rev() {
        t = n as f64 / (z + t);
    }
    1.0 / (z + t)
}

/// Mills ratio `U(z)` as a plain number.
pub(crate) fn mills(z: f64) -> f64 {
    if z > MILLS_CF_SWITCH {
        1.0 / (z + mills_tail_fraction(z))
    } else {
        let p = norm_pdf(z);
        if p == 0.0 {
            f64::INFINITY
        } else {
            norm_cdf(-z) / p
        }
    }
}

/// `1 − zU(z) = −U′(z)`, free of cancellation for large `z`.
pub(crate) fn neg_u_prime(z: f64) -> f64 {
    if z >= TAIL_CF_SWITCH {
        let s = mills_tail_fraction(z);
        s / (z + s)
    } else {
        1.0 - z * mills(z)
    }
}

pub fn mills_ratio(z: f64) -> Result<MillsValue> {
    finite(z)?;
    let u = mills(z);
    Ok(MillsValue {
        z,
        u,
        u_prime: z * u - 1.0,
    })
}

/// `U″(z) = (1 + z²)U(z) − z`.
pub fn u_second(z: f64) -> Result<f64> {
    finite(z)?;
    Ok((1.0 + z * z) * mills(z) - z)
}

/// `D(z) = φ(z)/z − Φ(−z)` for `z > 0`.
pub fn d_fn(z: f64) -> Result<f64> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(domain(format!("D requires z > 0, got {z}")));
    }
    Ok(ln_d(z).exp())
}

/// `log D(z)`; usable where `D` itself underflows.
pub fn ln_d(z: f64) -> f64 {
    if z >= TAIL_CF_SWITCH {
        ln_norm_pdf(z) + neg_u_prime(z).ln() - z.ln()
    } else {
        (norm_pdf(z) / z - norm_cdf(-z)).ln()
    }
}

/// Inverse of `D` on `(0, ∞)`.
pub fn d_inv(y: f64) -> Result<f64> {
    if !(y > 0.0) || !y.is_finite() {
        return Err(domain(format!("D⁻¹ requires y > 0, got {y}")));
    }
    d_inv_ln(y.ln())
}

/// Inverse of `D` taking `log y`, so that targets below the smallest
/// double can still be inverted.
pub fn d_inv_ln(ln_y: f64) -> Result<f64> {
    if !ln_y.is_finite() {
        return Err(domain(format!("D⁻¹ requires finite log y, got {ln_y}")));
    }
    let seed = if ln_y < (0.05f64).ln() {
        (-2.0 * ln_y).sqrt()
    } else {
        INV_SQRT_2PI * (-ln_y).exp()
    };
    // solve in log z so that tiny roots keep full relative accuracy
    let g = |z: f64| ln_d(z) - ln_y;
    let gs = |s: f64| g(s.exp());
    let mut lo = (seed / 10.0).max(1e-300).ln();
    let mut hi = (10.0 * seed).ln();
    let mut guard = 0;
    while gs(lo) < 0.0 {
        lo -= 10.0;
        guard += 1;
        if guard > 400 || lo.exp() == 0.0 {
            return Err(Error::Numerical(format!(
                "D⁻¹ lower bracket failed for log y = {ln_y}"
            )));
        }
    }
    guard = 0;
    while gs(hi) > 0.0 {
        hi += 2.0;
        guard += 1;
        if guard > 400 || !hi.exp().is_finite() {
            return Err(Error::Numerical(format!(
                "D⁻¹ upper bracket failed for log y = {ln_y}"
            )));
        }
    }
    let mut z = brent(gs, lo, hi, 1e-15, 300)?.exp();
    // Newton polish on log D: (log D)' = −φ(z)/(z² D(z))
    for _ in 0..3 {
        let r = g(z);
        if r == 0.0 {
            break;
        }
        let slope = -(ln_norm_pdf(z) - 2.0 * z.ln() - ln_d(z)).exp();
        let step = r / slope;
        let next = z - step;
        if next > 0.0 && next.is_finite() && g(next).abs() < r.abs() {
            z = next;
        } else {
            break;
        }
    }
    Ok(z)
}

/// `√(π/2)`, the value of `U(0)`.
pub fn mills_at_zero() -> f64 {
    (PI / 2.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // frozen with a 50-digit mpmath evaluation
    #[test]
    fn frozen_values() {
        assert!((gauss_pdf(1.0).unwrap() - 0.241_970_724_519_143_35).abs() < 1e-16);
        assert!((gauss_cdf(1.0).unwrap() - 0.841_344_746_068_542_95).abs() < 1e-15);
        assert!((mills_ratio(1.0).unwrap().u - 0.655_679_542_418_798_5).abs() < 1e-15);
        assert!((d_fn(1.0).unwrap() - 0.083_315_470_587_686_30).abs() < 1e-15);
        let tail = gauss_cdf(-8.0).unwrap();
        assert!((tail / 6.220_960_574_271_785e-16 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trivial_values() {
        assert!((gauss_pdf(0.0).unwrap() - INV_SQRT_2PI).abs() < 1e-17);
        assert_eq!(gauss_cdf(0.0).unwrap(), 0.5);
        assert!((mills_ratio(0.0).unwrap().u - mills_at_zero()).abs() < 1e-15);
        assert!(gauss_pdf(f64::NAN).is_err());
        assert!(d_fn(0.0).is_err());
        assert!(d_inv(-1.0).is_err());
    }

    #[test]
    fn continued_fraction_agrees_with_erfc_branch_at_switch() {
        for &z in &[8.0, 12.0, 20.0, 29.0, 30.0] {
            let direct = norm_cdf(-z) / norm_pdf(z);
            let cf = 1.0 / (z + mills_tail_fraction(z));
            assert!(
                (direct / cf - 1.0).abs() < 1e-13,
                "z = {z}: {direct} vs {cf}"
            );
        }
    }

    #[test]
    fn mills_derivative_asymptotics() {
        let z = 1e4;
        let m = mills_ratio(z).unwrap();
        assert!((m.u_prime * z * z + 1.0).abs() < 1e-6);
        assert!((neg_u_prime(z) * z * z - 1.0).abs() < 1e-7);
    }

    #[test]
    fn d_limits() {
        let z = 1e-9;
        assert!((z * d_fn(z).unwrap() / INV_SQRT_2PI - 1.0).abs() < 1e-8);
        let z = 40.0;
        let r = (ln_d(z) + LN_SQRT_2PI + 3.0 * z.ln() + 0.5 * z * z).exp();
        assert!((r - 1.0).abs() < 3.0 / (z * z));
    }

    #[test]
    fn d_inverse_examples() {
        for &z0 in &[0.1, 1.0, 5.0] {
            let z = d_inv(d_fn(z0).unwrap()).unwrap();
            assert!((z / z0 - 1.0).abs() < 1e-10);
        }
        // D(z) ~ φ(z)/z³, so z² ≈ −2 log y − 6 log z − log 2π
        let y: f64 = 1e-12;
        let z = d_inv(y).unwrap();
        let approx = (-2.0 * y.ln() - 6.0 * z.ln() - (2.0 * PI).ln()).sqrt();
        assert!((z / approx - 1.0).abs() < 3.0 / (z * z));
        let y = 1e6;
        let z = d_inv(y).unwrap();
        assert!((z * y * (2.0 * PI).sqrt() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn d_inverse_extreme_range() {
        for k in -300..=300 {
            let y = 10f64.powi(k);
            let z = d_inv(y).unwrap();
            let back = ln_d(z);
            assert!((back - y.ln()).abs() < 1e-12, "y = 1e{k}: z = {z}");
        }
    }

    #[test]
    fn numerical_derivative_matches_u_prime() {
        let mut z = -5.0;
        while z <= 30.0 {
            let h = 1e-5;
            let num = (mills(z + h) - mills(z - h)) / (2.0 * h);
            let m = mills_ratio(z).unwrap();
            assert!(
                (num - m.u_prime).abs() < 1e-6 * m.u_prime.abs().max(1e-3),
                "z = {z}"
            );
            z += 0.25;
        }
    }

    proptest! {
        #[test]
        fn mills_bounds_hold(z in 1e-6f64..50.0) {
            let u = mills(z);
            prop_assert!(z / (z * z + 1.0) < u);
            prop_assert!(u < (z * z + 2.0) / (z * z * z + 3.0 * z));
        }

        #[test]
        fn ode_identity_exact(z in -20.0f64..200.0) {
            let m = mills_ratio(z).unwrap();
            prop_assert_eq!(m.u_prime, z * m.u - 1.0);
        }

        #[test]
        fn mills_convex(z1 in -5.0f64..40.0, d1 in 0.01f64..3.0, d2 in 0.01f64..3.0) {
            let (z2, z3) = (z1 + d1, z1 + d1 + d2);
            let w = d1 / (d1 + d2);
            let interp = (1.0 - w) * mills(z1) + w * mills(z3);
            prop_assert!(mills(z2) <= interp * (1.0 + 1e-14));
        }

        #[test]
        fn d_decreasing(z in 1e-3f64..35.0, dz in 1e-3f64..1.0) {
            prop_assert!(ln_d(z + dz) < ln_d(z));
        }

        #[test]
        fn cdf_symmetry(z in -30.0f64..30.0) {
            prop_assert!((norm_cdf(z) + norm_cdf(-z) - 1.0).abs() < 1e-15);
        }

        #[test]
        fn ln_cdf_consistent(z in -37.0f64..8.0) {
            let a = ln_norm_cdf(z);
            let b = norm_cdf(z).ln();
            prop_assert!((a - b).abs() < 1e-12 * b.abs().max(1.0));
        }
    }
}
