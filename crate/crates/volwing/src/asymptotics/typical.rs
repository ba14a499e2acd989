//! Typical deviations: `σ_imp(±κ, t) ≈ C_±(a)·γ_t/√t` for `κ ≈ a·γ_t`, with
//! `C_±` computed from the small-time limit law `Y` of `X_t/γ_t`.

use std::f64::consts::PI;

use super::{AsymptoticQuote, FormulaId};
use crate::error::{domain, Error, Result};
use crate::models::stable::{ln_left_tail, ln_right_tail, StableTail};
use crate::models::{scaling_data, LimitLaw, ModelSpec, Side};
use crate::numeric::integrate_to_inf;
use crate::specfun::{d_inv_ln, ln_norm_cdf};

type TailFn = fn(f64, f64) -> Result<StableTail>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TypicalCoeff {
    pub a: f64,
    pub c_plus: f64,
    pub c_minus: f64,
    pub limit_law: LimitLaw,
}

/// `log P(Y > y)` (right) or `log P(Y ≤ −y)` (left) for the limit law.
fn ln_tail(law: &LimitLaw, side: Side, y: f64) -> Result<f64> {
    match *law {
        LimitLaw::Gaussian { sigma } => Ok(ln_norm_cdf(-y / sigma)),
        LimitLaw::SkewedStable { alpha, scale } => {
            let y = y / scale;
            let (near, far): (TailFn, TailFn) = match side {
                Side::Right => (ln_right_tail, ln_left_tail),
                Side::Left => (ln_left_tail, ln_right_tail),
            };
            if y >= 0.0 {
                Ok(near(y, alpha)?.ln_value)
            } else {
                Ok((-far(-y, alpha)?.ln_value.exp()).ln_1p())
            }
        }
    }
}

/// `log E[(Y − a)^+]` (right) or `log E[(Y + a)^−]` (left) for `a ≥ 0`, as the
/// integral of the tail from `a` to `∞` with the tail at `a` factored out.
pub fn ln_expected_excess(law: &LimitLaw, a: f64, side: Side) -> Result<f64> {
    if !(a >= 0.0) || !a.is_finite() {
        return Err(domain(format!("a must be ≥ 0, got {a}")));
    }
    let scale = match *law {
        LimitLaw::Gaussian { sigma } => sigma,
        LimitLaw::SkewedStable { scale, .. } => scale,
    };
    if !(scale > 0.0) {
        return Err(domain("degenerate limit law"));
    }
    let g0 = ln_tail(law, side, a)?;
    let h = 1e-4 * scale;
    let slope = (g0 - ln_tail(law, side, a + h)?) / h;
    let h0 = if slope > 0.0 {
        (1.0 / slope).min(scale)
    } else {
        scale
    };
    let f = |s: f64| match ln_tail(law, side, a + s) {
        Ok(g) => (g - g0).exp(),
        Err(_) => f64::NAN,
    };
    let q = integrate_to_inf(f, 0.0, h0, 0.0, 1e-13);
    if !q.value.is_finite() || q.value <= 0.0 {
        return Err(Error::Numerical(format!(
            "expected excess integral failed at a = {a}"
        )));
    }
    Ok(g0 + q.value.ln())
}

/// `C_±(a)`: `a/D⁻¹(E[(Y ∓ a)^±]/a)` for `a > 0`, `√(2π)E[Y^±]` for `a = 0`.
pub fn typical_constant(law: &LimitLaw, a: f64, side: Side) -> Result<f64> {
    let ln_e = ln_expected_excess(law, a, side)?;
    if a == 0.0 {
        return Ok((2.0 * PI).sqrt() * ln_e.exp());
    }
    Ok(a / d_inv_ln(ln_e - a.ln())?)
}

pub fn typical_coeff(law: &LimitLaw, a: f64) -> Result<TypicalCoeff> {
    Ok(TypicalCoeff {
        a,
        c_plus: typical_constant(law, a, Side::Right)?,
        c_minus: typical_constant(law, a, Side::Left)?,
        limit_law: *law,
    })
}

/// `σ_imp(±κ, t)` with `κ = a·γ_t` from the model's limit law.
pub fn typical_vol(m: &ModelSpec, a: f64, t: f64, side: Side) -> Result<AsymptoticQuote> {
    if !(t > 0.0) {
        return Err(domain("t must be positive"));
    }
    let sd = scaling_data(m);
    let c = typical_constant(&sd.limit_law, a, side)?;
    let g = sd.gamma.gamma(t);
    Ok(AsymptoticQuote::new(
        c * g / t.sqrt(),
        FormulaId::Typical,
        "t → 0 with κ/γ_t → a",
        a * g,
        t,
        Some(c),
    ))
}
