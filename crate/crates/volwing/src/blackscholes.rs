//! Normalized Black&Scholes prices in log-strike `κ` and total volatility
//! `v = σ√t`, their inverse, and the universal price-to-volatility maps.
//!
//! Spot is 1 and rates are zero, so a call pays `(e^X − e^κ)⁺`. The out-of-
//! the-money price is available in log form, which is what the inverter works
//! on: deep OTM prices underflow long before the implied volatility becomes
//! ill-determined.

use crate::asymptotics::{AsymptoticQuote, FormulaId};
use crate::error::{domain, regime, Error, Result};
use crate::numeric::{brent, integrate};
use crate::specfun::{d_inv_ln, ln_norm_pdf, mills, neg_u_prime, norm_cdf};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BsInputs {
    pub kappa: f64,
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
}

impl BsInputs {
    pub fn new(kappa: f64, v: f64) -> Result<Self> {
        if !(v > 0.0) || !kappa.is_finite() || !v.is_finite() {
            return Err(domain(format!(
                "need finite κ and v > 0, got κ={kappa}, v={v}"
            )));
        }
        let d1 = -kappa / v + 0.5 * v;
        Ok(BsInputs {
            kappa,
            v,
            d1,
            d2: d1 - v,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptionPrice {
    pub call: f64,
    pub put: f64,
    pub kappa: f64,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolQuote {
    pub sigma: f64,
    pub total_vol: f64,
    pub kappa: f64,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BsRegime {
    D1ToMinusInfinity,
    VToZero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PriceBranch {
    Otm,
    SmallStrike,
    Atm,
}

fn check_v(v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(domain(format!(
            "total volatility must be finite and ≥ 0, got {v}"
        )))
    }
}

/// `log C(k, v)` for `k ≥ 0`, `v > 0`.
///
/// Uses `C = φ(d1)·(U(−d1) − U(−d1 + v))` throughout; the difference of Mills
/// ratios is integrated as `∫ (1 − sU(s)) ds` when it would otherwise cancel.
fn ln_otm_call(k: f64, v: f64) -> f64 {
    let z = k / v - 0.5 * v;
    let pref = ln_norm_pdf(z);
    if v <= 1.0 || (z > 8.0 && v <= 0.5 * z) {
        let q = integrate(neg_u_prime, z, z + v, 0.0, 1e-15, 64);
        pref + q.value.ln()
    } else if z > 8.0 {
        pref + (mills(z) - mills(z + v)).ln()
    } else {
        (norm_cdf(-z) - k.exp() * norm_cdf(-z - v)).ln()
    }
}

/// Normalized call price `C(κ, v)`.
pub fn bs_call_price(kappa: f64, v: f64) -> Result<f64> {
    check_v(v)?;
    if !kappa.is_finite() {
        return Err(domain("κ must be finite"));
    }
    if v == 0.0 {
        return Ok((-kappa.exp_m1()).max(0.0));
    }
    if kappa >= 0.0 {
        Ok(ln_otm_call(kappa, v).exp())
    } else {
        let e = kappa.exp();
        Ok(-kappa.exp_m1() + e * ln_otm_call(-kappa, v).exp())
    }
}

/// Normalized put price `P(κ, v) = e^κ C(−κ, v)`.
pub fn bs_put_price(kappa: f64, v: f64) -> Result<f64> {
    let c = bs_call_price(-kappa, v)?;
    Ok(kappa.exp() * c)
}

pub fn bs_option_price(kappa: f64, t: f64, sigma: f64) -> Result<OptionPrice> {
    if !(t > 0.0) {
        return Err(domain("maturity must be positive"));
    }
    let v = sigma * t.sqrt();
    Ok(OptionPrice {
        call: bs_call_price(kappa, v)?,
        put: bs_put_price(kappa, v)?,
        kappa,
        t,
    })
}

/// Log of the out-of-the-money price: the call for `κ ≥ 0`, the put for `κ < 0`.
pub fn bs_ln_otm_price(kappa: f64, v: f64) -> Result<f64> {
    check_v(v)?;
    if v == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    if kappa >= 0.0 {
        Ok(ln_otm_call(kappa, v))
    } else {
        Ok(kappa + ln_otm_call(-kappa, v))
    }
}

/// Log of the call price for any `κ`.
pub fn bs_ln_call_price(kappa: f64, v: f64) -> Result<f64> {
    if kappa >= 0.0 {
        bs_ln_otm_price(kappa, v)
    } else {
        Ok(bs_call_price(kappa, v)?.ln())
    }
}

/// Sharp equivalents of the call price as it vanishes.
pub fn bs_call_asymptotic(kappa: f64, v: f64, regime_kind: BsRegime) -> Result<f64> {
    Ok(bs_ln_call_asymptotic(kappa, v, regime_kind)?.exp())
}

/// Log of [`bs_call_asymptotic`], for comparisons where both sides underflow.
pub fn bs_ln_call_asymptotic(kappa: f64, v: f64, regime_kind: BsRegime) -> Result<f64> {
    if !(kappa >= 0.0) || !(v > 0.0) {
        return Err(domain(format!(
            "need κ ≥ 0 and v > 0, got κ={kappa}, v={v}"
        )));
    }
    let d1 = -kappa / v + 0.5 * v;
    match regime_kind {
        BsRegime::D1ToMinusInfinity => {
            if d1 >= 0.0 {
                return Err(regime(format!("d1 = {d1} is not negative")));
            }
            Ok(ln_norm_pdf(d1) + v.ln() - (-d1).ln() - (-d1 + v).ln())
        }
        BsRegime::VToZero => Ok(neg_u_prime(-d1).ln() + ln_norm_pdf(d1) + v.ln()),
    }
}

/// Total implied volatility `V(κ, c)` from a call price.
pub fn bs_invert_vol(kappa: f64, c: f64) -> Result<f64> {
    if !kappa.is_finite() || !c.is_finite() {
        return Err(domain("non-finite input"));
    }
    let intrinsic = (-kappa.exp_m1()).max(0.0);
    if c < intrinsic || c >= 1.0 {
        return Err(domain(format!(
            "call price {c} outside [{intrinsic}, 1) for κ = {kappa}"
        )));
    }
    if kappa >= 0.0 {
        if c == 0.0 {
            return Ok(0.0);
        }
        invert_otm(kappa, c.ln())
    } else {
        let p = c - intrinsic;
        if p <= 0.0 {
            return Ok(0.0);
        }
        invert_otm(-kappa, p.ln() - kappa)
    }
}

/// Total implied volatility from the log of the OTM price (call for `κ ≥ 0`,
/// put for `κ < 0`).
pub fn bs_invert_vol_ln_otm(kappa: f64, ln_price: f64) -> Result<f64> {
    if !kappa.is_finite() || ln_price.is_nan() {
        return Err(domain("non-finite input"));
    }
    if ln_price == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    if kappa >= 0.0 {
        invert_otm(kappa, ln_price)
    } else {
        invert_otm(-kappa, ln_price - kappa)
    }
}

/// Solves `log C(k, v) = target` for `v`, `k ≥ 0`.
fn invert_otm(k: f64, target: f64) -> Result<f64> {
    if !(target < 0.0) {
        return Err(domain(format!("log price {target} must be negative")));
    }
    let h = |v: f64| ln_otm_call(k, v) - target;
    let ell = -target;
    let seed = if k > 0.0 {
        (2.0 * k) / ((2.0 * (ell + k)).sqrt() + (2.0 * ell).sqrt())
    } else {
        (2.0 * std::f64::consts::PI).sqrt() * target.exp()
    };
    let seed = seed.max(1e-300);
    let mut lo = seed * 0.5;
    let mut hi = seed * 2.0;
    let mut guard = 0;
    while h(lo) > 0.0 {
        lo *= 0.5;
        guard += 1;
        if guard > 2000 || lo == 0.0 {
            return Err(Error::Numerical(format!(
                "vol bracket (low) failed, κ={k}, log c={target}"
            )));
        }
    }
    guard = 0;
    while h(hi) < 0.0 {
        hi *= 2.0;
        guard += 1;
        if hi > 1e4 || guard > 2000 {
            return Err(domain(format!("price e^{target} not attainable for κ={k}")));
        }
    }
    let mut v = brent(h, lo, hi, 1e-16 * lo, 400)?;
    // Newton polish on log C: ∂ log C/∂v = φ(d1)/C
    for _ in 0..3 {
        let r = h(v);
        if r == 0.0 {
            break;
        }
        let d1 = -k / v + 0.5 * v;
        let slope = (ln_norm_pdf(d1) - (r + target)).exp();
        let next = v - r / slope;
        if next > 0.0 && next.is_finite() && h(next).abs() < r.abs() {
            v = next;
        } else {
            break;
        }
    }
    if h(v).abs() > 1e-12 * target.abs().max(1.0) {
        return Err(Error::Accuracy {
            message: format!("price residual after inversion at κ={k}"),
            achieved: h(v).abs(),
        });
    }
    Ok(v)
}

pub fn implied_vol(kappa: f64, t: f64, call: f64) -> Result<VolQuote> {
    if !(t > 0.0) {
        return Err(domain("maturity must be positive"));
    }
    let v = bs_invert_vol(kappa, call)?;
    Ok(VolQuote {
        sigma: v / t.sqrt(),
        total_vol: v,
        kappa,
        t,
    })
}

/// Implied volatility from a put price, converted by parity.
pub fn implied_vol_from_put(kappa: f64, t: f64, put: f64) -> Result<VolQuote> {
    implied_vol(kappa, t, put - kappa.exp_m1())
}

/// Implied volatility from the log of the OTM price.
pub fn implied_vol_ln_otm(kappa: f64, t: f64, ln_price: f64) -> Result<VolQuote> {
    if !(t > 0.0) {
        return Err(domain("maturity must be positive"));
    }
    let v = bs_invert_vol_ln_otm(kappa, ln_price)?;
    Ok(VolQuote {
        sigma: v / t.sqrt(),
        total_vol: v,
        kappa,
        t,
    })
}

/// `√(x+1) − √x` without cancellation.
pub(crate) fn sqrt_gap_plus(x: f64) -> f64 {
    1.0 / ((x + 1.0).sqrt() + x.sqrt())
}

/// `√x − √(x−1)` without cancellation; `x ≥ 1`.
pub(crate) fn sqrt_gap_minus(x: f64) -> f64 {
    1.0 / (x.sqrt() + (x - 1.0).sqrt())
}

/// Price-to-volatility asymptotics. `price` is the OTM price: the call for
/// `κ > 0`, the put for `κ < 0`, the call for `κ = 0`.
pub fn price_to_vol_asymptotic(
    kappa: f64,
    t: f64,
    price: f64,
    branch: PriceBranch,
) -> Result<AsymptoticQuote> {
    if !(price > 0.0) {
        return Err(domain(format!("price must be positive, got {price}")));
    }
    price_to_vol_asymptotic_ln(kappa, t, price.ln(), branch)
}

/// As [`price_to_vol_asymptotic`], taking the log of the OTM price.
pub fn price_to_vol_asymptotic_ln(
    kappa: f64,
    t: f64,
    ln_price: f64,
    branch: PriceBranch,
) -> Result<AsymptoticQuote> {
    if !(t > 0.0) || !kappa.is_finite() || !ln_price.is_finite() {
        return Err(domain(format!(
            "bad inputs κ={kappa}, t={t}, log price={ln_price}"
        )));
    }
    let (value, formula, cond) = match branch {
        PriceBranch::Otm => {
            if kappa == 0.0 {
                return Err(regime("out-of-the-money branch needs κ ≠ 0"));
            }
            let ell = -ln_price;
            let k = kappa.abs();
            let x = ell / k;
            if kappa > 0.0 {
                if !(ell > 0.0) {
                    return Err(regime("call price must be below 1"));
                }
                (
                    sqrt_gap_plus(x) * (2.0 * k / t).sqrt(),
                    FormulaId::PriceOtm,
                    "c(κ,t) → 0, κ > 0",
                )
            } else {
                if x < 1.0 {
                    return Err(regime(format!(
                        "put branch needs −log p ≥ |κ|, got ratio {x}"
                    )));
                }
                (
                    sqrt_gap_minus(x) * (2.0 * k / t).sqrt(),
                    FormulaId::PriceOtm,
                    "p(κ,t) → 0, κ < 0",
                )
            }
        }
        PriceBranch::SmallStrike => {
            if kappa == 0.0 {
                return Err(regime("small-strike branch needs κ ≠ 0"));
            }
            let k = kappa.abs();
            let z = d_inv_ln(ln_price - k.ln())?;
            (
                k / (z * t.sqrt()),
                FormulaId::PriceSmallStrike,
                "κ → 0 with price/|κ| → a ∈ [0, ∞]",
            )
        }
        PriceBranch::Atm => {
            if kappa != 0.0 {
                return Err(regime("at-the-money branch needs κ = 0"));
            }
            (
                (2.0 * std::f64::consts::PI).sqrt() * ln_price.exp() / t.sqrt(),
                FormulaId::PriceAtm,
                "κ = 0, c(0,t) → 0",
            )
        }
    };
    Ok(AsymptoticQuote::new(
        value,
        formula,
        cond,
        kappa,
        t,
        Some(ln_price),
    ))
}
