//! Closed-form smile asymptotics for the Carr-Wu, Merton and Heston models.

use std::f64::consts::PI;

use super::typical::typical_constant;
use super::{AsymptoticQuote, FormulaId};
use crate::blackscholes::{sqrt_gap_minus, sqrt_gap_plus};
use crate::error::{domain, regime, Result};
use crate::models::heston::{heston_explosion_moment, heston_rate_function};
use crate::models::{CarrWu, Heston, LimitLaw, Merton, Side};

/// Default separation ratio for "κ ≫ scale" decisions.
pub const DEFAULT_BRANCH_RATIO: f64 = 10.0;

/// `B_α = (ασ)^{(α/2)/(α−1)} / (√(2(α−1))·|cos(πα/2)|^{(1/2)/(α−1)})`, `√2σ` at `α = 2`.
pub fn carrwu_b(m: &CarrWu) -> f64 {
    let a = m.alpha;
    if a == 2.0 {
        return 2f64.sqrt() * m.sigma;
    }
    let c = (PI * a / 2.0).cos().abs();
    (a * m.sigma).powf(0.5 * a / (a - 1.0)) / ((2.0 * (a - 1.0)).sqrt() * c.powf(0.5 / (a - 1.0)))
}

/// Carr-Wu smile. The atypical branches are used when `κ/t^{1/α} ≥ ratio`,
/// the typical branch otherwise.
pub fn carrwu_smile(m: &CarrWu, kappa: f64, t: f64, side: Side) -> Result<AsymptoticQuote> {
    carrwu_smile_with(m, kappa, t, side, DEFAULT_BRANCH_RATIO)
}

pub fn carrwu_smile_with(
    m: &CarrWu,
    kappa: f64,
    t: f64,
    side: Side,
    ratio: f64,
) -> Result<AsymptoticQuote> {
    if !(kappa >= 0.0) || !(t > 0.0) {
        return Err(domain(format!(
            "need κ ≥ 0 and t > 0, got κ = {kappa}, t = {t}"
        )));
    }
    let a = m.alpha;
    let scaled = kappa / t.powf(1.0 / a);
    if a == 2.0 {
        // exactly Black-Scholes with volatility √2σ
        let id = match side {
            Side::Right => FormulaId::CwRight,
            Side::Left => FormulaId::CwLeft,
        };
        return Ok(AsymptoticQuote::new(
            carrwu_b(m),
            id,
            "α = 2: flat smile √2σ",
            kappa,
            t,
            Some(scaled),
        ));
    }
    if scaled < ratio {
        let law = LimitLaw::SkewedStable {
            alpha: a,
            scale: m.sigma,
        };
        let c = typical_constant(&law, scaled, side)?;
        let cond = format!("t → 0 with κ/t^(1/α) → a (κ/t^(1/α) = {scaled:.4} < {ratio})");
        return Ok(AsymptoticQuote::new(
            c * t.powf((2.0 - a) / (2.0 * a)),
            FormulaId::CwTypical,
            &cond,
            kappa,
            t,
            Some(scaled),
        ));
    }
    match side {
        Side::Right => {
            let v = carrwu_b(m) * (kappa / t).powf(-(2.0 - a) / (2.0 * (a - 1.0)));
            let cond = format!(
                "κ ≫ t^(1/α) with t → 0, or κ → ∞ at fixed t (κ/t^(1/α) = {scaled:.4} ≥ {ratio})"
            );
            Ok(AsymptoticQuote::new(
                v,
                FormulaId::CwRight,
                &cond,
                kappa,
                t,
                Some(scaled),
            ))
        }
        Side::Left => {
            let l = (a * kappa.ln() - t.ln()) / kappa;
            if !(l > 0.0) {
                return Err(regime(format!(
                    "left branch needs κ^α > t, got κ = {kappa}, t = {t}"
                )));
            }
            let v = sqrt_gap_plus(l) * (2.0 * kappa / t).sqrt();
            let cond = format!(
                "κ ≫ t^(1/α) with t → 0, or κ → ∞ at fixed t (κ/t^(1/α) = {scaled:.4} ≥ {ratio})"
            );
            Ok(AsymptoticQuote::new(
                v,
                FormulaId::CwLeft,
                &cond,
                kappa,
                t,
                Some(scaled),
            ))
        }
    }
}

/// `f(a) = min_{n ≥ 1} (n + a²/(2nδ²))`.
pub fn merton_f(a: f64, delta: f64) -> f64 {
    let x = a * a / (2.0 * delta * delta);
    let r = x.sqrt();
    let lo = (r.floor() as u64).max(1) as f64;
    let hi = (r.ceil() as u64).max(1) as f64;
    (lo + x / lo).min(hi + x / hi)
}

/// `k̄₁(t) = √(t log(1/t))`.
pub fn merton_k1(t: f64) -> Result<f64> {
    if !(t > 0.0 && t < 1.0) {
        return Err(domain(format!("needs 0 < t < 1, got {t}")));
    }
    Ok((t * (1.0 / t).ln()).sqrt())
}

/// `k̄₂(t) = √(log(1/t))`.
pub fn merton_k2(t: f64) -> Result<f64> {
    if !(t > 0.0 && t < 1.0) {
        return Err(domain(format!("needs 0 < t < 1, got {t}")));
    }
    Ok((1.0 / t).ln().sqrt())
}

/// Leading-order `log P(X_t > κ)` for Merton's model: `−f(κ/k̄₂)·log(1/t)`
/// when `κ/k̄₂(t) < ratio`, `−(κ/δ)√(2 log(κ/t))` otherwise.
pub fn merton_tail_logasym(m: &Merton, kappa: f64, t: f64) -> Result<f64> {
    merton_tail_logasym_with(m, kappa, t, DEFAULT_BRANCH_RATIO)
}

pub fn merton_tail_logasym_with(m: &Merton, kappa: f64, t: f64, ratio: f64) -> Result<f64> {
    if !(kappa > 0.0) {
        return Err(domain("κ must be positive"));
    }
    let k2 = merton_k2(t)?;
    let a = kappa / k2;
    if a < ratio {
        Ok(-merton_f(a, m.delta) * (1.0 / t).ln())
    } else {
        Ok(-(kappa / m.delta) * (2.0 * (kappa / t).ln()).sqrt())
    }
}

fn merton_high(m: &Merton, kappa: f64, t: f64) -> f64 {
    (m.delta * kappa / (2.0 * t * (2.0 * (kappa / t).ln()).sqrt())).sqrt()
}

pub fn merton_smile(m: &Merton, kappa: f64, t: f64) -> Result<AsymptoticQuote> {
    merton_smile_with(m, kappa, t, DEFAULT_BRANCH_RATIO)
}

/// Merton smile for `κ ≥ 0`. With `a = κ/k̄₂(t)`: the far-strike branch when
/// `a ≥ ratio` (or `t ≥ 1`), otherwise `max{σ, κ/√(2t f(a) log(κ/t))}`,
/// tagged flat / low (`a < 1/ratio`) / mid.
pub fn merton_smile_with(m: &Merton, kappa: f64, t: f64, ratio: f64) -> Result<AsymptoticQuote> {
    if !(kappa >= 0.0) || !(t > 0.0) {
        return Err(domain(format!(
            "need κ ≥ 0 and t > 0, got κ = {kappa}, t = {t}"
        )));
    }
    if t >= 1.0 {
        if kappa <= t {
            return Err(regime(
                "at t ≥ 1 only the far-strike branch applies and it needs κ > t",
            ));
        }
        return Ok(AsymptoticQuote::new(
            merton_high(m, kappa, t),
            FormulaId::MertonHigh,
            "κ → ∞ at fixed t",
            kappa,
            t,
            None,
        ));
    }
    let k2 = merton_k2(t)?;
    let a = kappa / k2;
    if a >= ratio {
        let cond = format!("κ ≫ k̄₂(t) (κ/k̄₂ = {a:.4} ≥ {ratio})");
        return Ok(AsymptoticQuote::new(
            merton_high(m, kappa, t),
            FormulaId::MertonHigh,
            &cond,
            kappa,
            t,
            Some(a),
        ));
    }
    // below σk̄₁ the max-form is not used: log(κ/t) → 0 as κ → t⁺ would blow it up
    let flat_edge = m.sigma * merton_k1(t)?;
    let lg = (kappa / t).ln();
    let jump = if kappa > flat_edge && lg > 0.0 {
        kappa / (2.0 * t * merton_f(a, m.delta) * lg).sqrt()
    } else {
        0.0
    };
    let (value, id, cond) = if m.sigma >= jump {
        (
            m.sigma,
            FormulaId::MertonFlat,
            format!("t → 0, κ ≤ σ k̄₁(t) (κ/k̄₂ = {a:.4})"),
        )
    } else if a < 1.0 / ratio {
        (
            jump,
            FormulaId::MertonLow,
            format!("t → 0, σ k̄₁(t) ≤ κ ≪ k̄₂(t) (κ/k̄₂ = {a:.4} < 1/{ratio})"),
        )
    } else {
        (
            jump,
            FormulaId::MertonMid,
            format!("t → 0, κ ~ a k̄₂(t) (a = {a:.4})"),
        )
    };
    Ok(AsymptoticQuote::new(value, id, &cond, kappa, t, Some(a)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HestonBranch {
    FixedT,
    SmallT,
    Conjecture,
}

/// `√(2κ/t)(√p − √(p−1))` for an explosion moment `p > 1`.
pub fn heston_fixed_t_value(kappa: f64, t: f64, p_star: f64) -> f64 {
    sqrt_gap_minus(p_star) * (2.0 * kappa / t).sqrt()
}

/// `κ/√(2Λ*)` for a rate-function value `Λ*(κ)`.
pub fn heston_small_t_value(kappa: f64, rate: f64) -> f64 {
    kappa / (2.0 * rate).sqrt()
}

/// `√κ/√(2C)`.
pub fn heston_conjecture_value(kappa: f64, c: f64) -> f64 {
    (kappa / (2.0 * c)).sqrt()
}

pub fn heston_smile(
    m: &Heston,
    kappa: f64,
    t: f64,
    branch: HestonBranch,
) -> Result<AsymptoticQuote> {
    if !(kappa > 0.0) || !(t > 0.0) {
        return Err(domain(format!(
            "need κ > 0 and t > 0, got κ = {kappa}, t = {t}"
        )));
    }
    match branch {
        HestonBranch::FixedT => {
            let p = heston_explosion_moment(m, t)?;
            if !p.is_finite() {
                return Err(regime(
                    "no moment explosion (ρ = −1): the fixed-t branch does not apply",
                ));
            }
            Ok(AsymptoticQuote::new(
                heston_fixed_t_value(kappa, t, p),
                FormulaId::HestonFixedT,
                "κ → ∞ at fixed t",
                kappa,
                t,
                Some(p),
            ))
        }
        HestonBranch::SmallT => {
            let r = heston_rate_function(m, kappa)?;
            if !r.is_finite() {
                return Err(regime("rate function infinite at this κ"));
            }
            Ok(AsymptoticQuote::new(
                heston_small_t_value(kappa, r),
                FormulaId::HestonSmallT,
                "t → 0 at fixed κ",
                kappa,
                t,
                Some(r),
            ))
        }
        HestonBranch::Conjecture => {
            let c = m.explosion_constant();
            if !c.is_finite() {
                return Err(regime("no moment explosion (ρ = −1)"));
            }
            Ok(AsymptoticQuote::new(
                heston_conjecture_value(kappa, c),
                FormulaId::HestonConjecture,
                "conjectural: t → 0 and κ → ∞ jointly",
                kappa,
                t,
                Some(c),
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::tail_to_vol_right;
    use crate::models::stable::right_tail_rate;

    #[test]
    fn carrwu_constant() {
        // frozen: 0.3^1.5/(√2/2) at 30 digits
        let m = CarrWu::new(0.2, 1.5).unwrap();
        assert!((carrwu_b(&m) - 0.232_379_000_772_445_0).abs() < 1e-12);
        let near = CarrWu::new(0.2, 1.999).unwrap();
        assert!((carrwu_b(&near) / (2f64.sqrt() * 0.2) - 1.0).abs() < 1e-2);
    }

    #[test]
    fn carrwu_right_is_special_tail_form() {
        let m = CarrWu::new(0.2, 1.5).unwrap();
        // κ/t^(1/α) ≈ 43, beyond the typical branch
        let (k, t): (f64, f64) = (2.0, 0.01);
        let q = 1.5 / 0.5;
        let ln_tail = -right_tail_rate(1.5) * (k / (0.2 * t.powf(1.0 / 1.5))).powf(q);
        let a = carrwu_smile(&m, k, t, Side::Right).unwrap().value;
        let b = tail_to_vol_right(k, t, ln_tail, true).unwrap().value;
        assert!((a / b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn carrwu_left_far_limit() {
        // κ → ∞ at fixed t: the left branch approaches √(2κ/t)
        let m = CarrWu::new(0.2, 1.5).unwrap();
        let t = 1e-2;
        let errs: Vec<f64> = [1e3, 1e5, 1e7]
            .iter()
            .map(|&k| {
                1.0 - carrwu_smile(&m, k, t, Side::Left).unwrap().value / (2.0 * k / t).sqrt()
            })
            .collect();
        assert!(
            errs[2] < errs[1] && errs[1] < errs[0] && errs[2] < 1e-2 && errs[2] > 0.0,
            "{errs:?}"
        );
    }

    #[test]
    fn merton_f_values() {
        assert_eq!(merton_f(0.0, 0.3), 1.0);
        let d = 0.3;
        let a = 2f64.sqrt() * d;
        assert!((merton_f(a, d) - 2.0).abs() < 1e-12);
        // brute-force oracle
        for i in 0..200 {
            let a = 0.037 * i as f64;
            let x = a * a / (2.0 * d * d);
            let brute = (1..10_000)
                .map(|n| n as f64 + x / n as f64)
                .fold(f64::INFINITY, f64::min);
            assert!((merton_f(a, d) - brute).abs() < 1e-12 * brute);
        }
        let big = 1e6;
        assert!((merton_f(big, d) / big * d / 2f64.sqrt() - 1.0).abs() < 1e-5);
    }

    #[test]
    fn merton_scales() {
        let t = (-1f64).exp();
        assert!((merton_k1(t).unwrap() - (-0.5f64).exp()).abs() < 1e-15);
        assert!((merton_k2(t).unwrap() - 1.0).abs() < 1e-15);
        assert!(merton_k2(1.0).is_err());
    }

    #[test]
    fn merton_smile_branches() {
        let m = Merton::new(0.2, 0.01, 0.1, 0.3).unwrap();
        let t = 1e-3;
        let k1 = merton_k1(t).unwrap();
        let q = merton_smile(&m, 0.5 * 0.2 * k1, t).unwrap();
        assert_eq!(q.formula, FormulaId::MertonFlat);
        assert_eq!(q.value, 0.2);
        let k2 = merton_k2(t).unwrap();
        assert_eq!(
            merton_smile(&m, k2, t).unwrap().formula,
            FormulaId::MertonMid
        );
        assert_eq!(
            merton_smile(&m, 20.0 * k2, t).unwrap().formula,
            FormulaId::MertonHigh
        );
        // continuity of the max form above σk̄₁
        let mut k = 1.0001 * 0.2 * k1;
        let mut prev = merton_smile(&m, k, t).unwrap().value;
        while k < 5.0 * k2 {
            k *= 1.001;
            let v = merton_smile(&m, k, t).unwrap().value;
            assert!((v - prev).abs() < 1e-2 * prev, "κ = {k}");
            prev = v;
        }
        // the seam at σk̄₁ closes as t → 0
        let gaps: Vec<f64> = [1e-3, 1e-6, 1e-12]
            .iter()
            .map(|&t| {
                let edge = 0.2 * merton_k1(t).unwrap();
                merton_smile(&m, edge * (1.0 + 1e-9), t).unwrap().value / 0.2 - 1.0
            })
            .collect();
        assert!(
            gaps[2] < gaps[1] && gaps[1] < gaps[0] && gaps[2] < 0.02,
            "{gaps:?}"
        );
    }

    #[test]
    fn heston_matching_limits() {
        let m = Heston::new(1.5, 0.04, 0.4, 0.04, 1.0).unwrap();
        let c = m.explosion_constant();
        let k = 3.0;
        let conj = heston_smile(&m, k, 0.1, HestonBranch::Conjecture).unwrap();
        assert!(conj.is_conjectural());
        assert!((conj.value - (k * 0.4).sqrt() / 2.0).abs() < 1e-14);
        let t = 1e-12;
        let a = heston_fixed_t_value(k, t, c / t);
        assert!((a / conj.value - 1.0).abs() < 1e-6);
        let b = heston_small_t_value(k, c * k);
        assert!((b / conj.value - 1.0).abs() < 1e-14);
    }
}
