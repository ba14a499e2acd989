//! Call prices by Fourier inversion along a shifted contour, and a second,
//! Fourier-free route that integrates the tail probability.
//!
//! With `ξ = u + ib` the call is `c = R(b) + (1/π)∫_0^∞ Re I(u) du`, where
//! `I = φ(−ξ)e^{(1+iξ)κ}/(iξ(1+iξ))` and the residue term `R` is `0` for
//! `b > 1`, `1` for `0 < b < 1` and `1 − e^κ` for `b < 0`. Far from the money
//! the shift is put at the saddle point of `|I(0)|`, so the integral carries
//! the whole (possibly astronomically small) price and is evaluated in logs.

use num_complex::Complex64;

use super::{check_t, PriceMethod, PriceResult};
use crate::error::{domain, Error, Result};
use crate::models::{ln_cf, ln_mgf, ln_tail_at, mgf_strip, ModelSpec, Side};
use crate::numeric::{golden_min, integrate_to_inf};

use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Damping {
    /// `b = 1/2`.
    Lewis,
    Fixed(f64),
    /// Saddle-point shift away from the money, `b = 1/2` near it.
    Auto,
}

/// Relative quadrature error above which the Fourier price is rejected.
pub const FOURIER_MAX_REL_ERR: f64 = 1e-6;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `log |I(0)|` for shift `b`; `+∞` outside the strip.
fn ln_peak(m: &ModelSpec, kappa: f64, t: f64, b: f64) -> f64 {
    let v = ln_mgf(m, b, t) + (1.0 - b) * kappa - (b * (b - 1.0)).abs().ln();
    if v.is_finite() {
        v
    } else {
        f64::INFINITY
    }
}

/// Shift minimizing `|I(0)|` on the call side (`b > 1`) or put side (`b < 0`);
/// `None` if the strip leaves no room.
pub fn saddle_damping(m: &ModelSpec, kappa: f64, t: f64, call_side: bool) -> Result<Option<f64>> {
    let (lo, hi) = mgf_strip(m, t)?;
    let lo_s = (1e-3f64).ln();
    if call_side {
        let cap = if hi.is_finite() {
            1.0 + 0.9 * (hi - 1.0)
        } else {
            1e6
        };
        if cap <= 1.0 + 1e-3 {
            return Ok(None);
        }
        let s = golden_min(
            |s: f64| ln_peak(m, kappa, t, 1.0 + s.exp()),
            lo_s,
            (cap - 1.0).ln(),
            200,
        );
        Ok(Some(1.0 + s.exp()))
    } else {
        let floor = if lo.is_finite() { 0.9 * lo } else { -1e6 };
        if floor >= -1e-3 {
            return Ok(None);
        }
        let s = golden_min(
            |s: f64| ln_peak(m, kappa, t, -s.exp()),
            lo_s,
            (-floor).ln(),
            200,
        );
        Ok(Some(-s.exp()))
    }
}

/// `(log|I(0)|, ∫_0^∞ Re I/|I(0)| du, abs. error of the integral)`.
fn contour_integral(m: &ModelSpec, kappa: f64, t: f64, b: f64) -> Result<(f64, f64, f64)> {
    let n = ln_peak(m, kappa, t, b);
    if !n.is_finite() {
        return Err(domain(format!(
            "damping {b} outside the strip of analyticity"
        )));
    }
    let f = |u: f64| {
        let xi = Complex64::new(u, b);
        let ixi = I * xi;
        let z = ln_cf(m, -xi, t) + (1.0 + ixi) * kappa - (ixi * (1.0 + ixi)).ln() - n;
        let v = z.exp().re;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    // the integrand near u = 0 is Gaussian with variance 1/N''(b)
    let pole = b.abs().min((b - 1.0).abs());
    let h = 1e-2 * pole.min(b.abs().max(1.0));
    let curv = (ln_peak(m, kappa, t, b + h) - 2.0 * n + ln_peak(m, kappa, t, b - h)) / (h * h);
    let h0 = if curv.is_finite() && curv > 0.0 {
        1.0 / curv.sqrt()
    } else {
        pole
    };
    let q = integrate_to_inf(f, 0.0, h0, 1e-16 * h0, 1e-13);
    Ok((n, q.value, q.abs_err))
}

pub fn fourier_call(m: &ModelSpec, kappa: f64, t: f64) -> Result<PriceResult> {
    fourier_call_with(m, kappa, t, Damping::Auto)
}

/// Saddle shifts closer than this to the pole are replaced by `b = 1/2`.
const SADDLE_MIN_GAP: f64 = 0.05;

pub fn fourier_call_with(
    m: &ModelSpec,
    kappa: f64,
    t: f64,
    damping: Damping,
) -> Result<PriceResult> {
    check_t(t)?;
    if !kappa.is_finite() {
        return Err(domain("κ must be finite"));
    }
    let b = match damping {
        Damping::Lewis => 0.5,
        Damping::Fixed(b) => {
            if b == 0.0 || b == 1.0 || !b.is_finite() {
                return Err(domain(format!("damping {b} sits on a pole")));
            }
            let (lo, hi) = mgf_strip(m, t)?;
            if !(b > lo && b < hi) {
                return Err(domain(format!(
                    "damping {b} outside the moment strip ({lo}, {hi})"
                )));
            }
            b
        }
        Damping::Auto => {
            let s = saddle_damping(m, kappa, t, kappa >= 0.0)?;
            match s {
                Some(b) if kappa >= 0.0 && b - 1.0 >= SADDLE_MIN_GAP => b,
                Some(b) if kappa < 0.0 && -b >= SADDLE_MIN_GAP => b,
                _ => 0.5,
            }
        }
    };
    let (n, j, err) = contour_integral(m, kappa, t, b)?;
    let ln_scale = n - PI.ln();
    let em1 = kappa.exp_m1();
    let abs_err = (ln_scale + err.ln()).exp();
    // which price the integral delivers directly, in logs where possible
    let (ln_otm, rel) = if !(0.0..=1.0).contains(&b) {
        if !(j > 0.0) {
            return Err(Error::Accuracy {
                message: "contour integral not positive".into(),
                achieved: err,
            });
        }
        let ln_direct = ln_scale + j.ln();
        let rel = err / j;
        let direct_is_call = b > 1.0;
        let otm_is_call = kappa >= 0.0;
        if direct_is_call == otm_is_call {
            (ln_direct, rel)
        } else {
            // the in-the-money leg came out; parity gives the other
            let d = ln_direct.exp();
            let other = if direct_is_call { d + em1 } else { d - em1 };
            (other.ln(), abs_err / other)
        }
    } else {
        let x = (ln_scale).exp() * j;
        let otm = if kappa >= 0.0 {
            1.0 + x
        } else {
            kappa.exp() + x
        };
        if !(otm > 0.0) {
            return Err(Error::Accuracy {
                message: format!("price at κ = {kappa} below the resolution of damping {b}"),
                achieved: abs_err,
            });
        }
        (otm.ln(), (abs_err + 4.0 * f64::EPSILON) / otm)
    };
    if !(rel <= FOURIER_MAX_REL_ERR) {
        return Err(Error::Accuracy {
            message: format!("Fourier quadrature at κ = {kappa}, t = {t}"),
            achieved: rel,
        });
    }
    Ok(PriceResult::from_otm(
        kappa,
        t,
        ln_otm,
        PriceMethod::Fourier,
        rel,
    ))
}

/// Out-of-the-money price as `∫_κ^∞ e^x P(X_t > x) dx` (call, `κ ≥ 0`) or
/// `∫_{−∞}^κ e^x P(X_t ≤ x) dx` (put, `κ < 0`), evaluated in logs.
pub fn tail_integral_price(m: &ModelSpec, kappa: f64, t: f64) -> Result<PriceResult> {
    check_t(t)?;
    if !kappa.is_finite() {
        return Err(domain("κ must be finite"));
    }
    let (side, dir) = if kappa >= 0.0 {
        (Side::Right, 1.0)
    } else {
        (Side::Left, -1.0)
    };
    let (g0, rel0, _) = ln_tail_at(m, side, kappa, t)?;
    let h = 1e-4;
    let (g1, _, _) = ln_tail_at(m, side, kappa + dir * h, t)?;
    // log-slope of the integrand in the direction of integration
    let slope = dir * 1.0 + (g1 - g0) / h;
    let h0 = if slope < -1e-3 {
        (1.0 / -slope).min(1.0)
    } else {
        1.0
    };
    let f = |s: f64| match ln_tail_at(m, side, kappa + dir * s, t) {
        Ok((g, _, _)) => (dir * s + g - g0).exp(),
        Err(_) => f64::NAN,
    };
    let q = integrate_to_inf(f, 0.0, h0, 0.0, 1e-12);
    if !q.value.is_finite() || q.value <= 0.0 {
        return Err(Error::Numerical(format!(
            "tail integral failed at κ = {kappa}"
        )));
    }
    let ln_otm = kappa + g0 + q.value.ln();
    Ok(PriceResult::from_otm(
        kappa,
        t,
        ln_otm,
        PriceMethod::TailIntegral,
        rel0 + q.abs_err / q.value,
    ))
}
