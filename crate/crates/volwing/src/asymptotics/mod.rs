//! Asymptotic implied-volatility formulas. The generic ones turn a tail
//! probability (or the law of the small-time limit) into a volatility; the
//! model-specific ones are closed forms. Every value carries the identifier of
//! the formula that produced it and the regime in which it is meaningful.

mod smiles;
mod typical;

pub use smiles::*;
pub use typical::*;

use std::fmt;
use std::str::FromStr;

use crate::blackscholes::{sqrt_gap_minus, sqrt_gap_plus};
use crate::error::{domain, regime, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FormulaId {
    RightTailGeneral,
    RightTailSpecial,
    LeftTailGeneral,
    LeftTailSpecial,
    PriceOtm,
    PriceSmallStrike,
    PriceAtm,
    Typical,
    CwRight,
    CwLeft,
    CwTypical,
    MertonFlat,
    MertonLow,
    MertonMid,
    MertonHigh,
    HestonFixedT,
    HestonSmallT,
    HestonConjecture,
}

impl FormulaId {
    pub const ALL: [FormulaId; 18] = [
        FormulaId::RightTailGeneral,
        FormulaId::RightTailSpecial,
        FormulaId::LeftTailGeneral,
        FormulaId::LeftTailSpecial,
        FormulaId::PriceOtm,
        FormulaId::PriceSmallStrike,
        FormulaId::PriceAtm,
        FormulaId::Typical,
        FormulaId::CwRight,
        FormulaId::CwLeft,
        FormulaId::CwTypical,
        FormulaId::MertonFlat,
        FormulaId::MertonLow,
        FormulaId::MertonMid,
        FormulaId::MertonHigh,
        FormulaId::HestonFixedT,
        FormulaId::HestonSmallT,
        FormulaId::HestonConjecture,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            FormulaId::RightTailGeneral => "right-tail-general",
            FormulaId::RightTailSpecial => "right-tail-special",
            FormulaId::LeftTailGeneral => "left-tail-general",
            FormulaId::LeftTailSpecial => "left-tail-special",
            FormulaId::PriceOtm => "price-otm",
            FormulaId::PriceSmallStrike => "price-small-strike",
            FormulaId::PriceAtm => "price-atm",
            FormulaId::Typical => "typical",
            FormulaId::CwRight => "cw-right",
            FormulaId::CwLeft => "cw-left",
            FormulaId::CwTypical => "cw-typical",
            FormulaId::MertonFlat => "merton-flat",
            FormulaId::MertonLow => "merton-low",
            FormulaId::MertonMid => "merton-mid",
            FormulaId::MertonHigh => "merton-high",
            FormulaId::HestonFixedT => "heston-fixed-t",
            FormulaId::HestonSmallT => "heston-small-t",
            FormulaId::HestonConjecture => "heston-conjecture",
        }
    }
}

impl fmt::Display for FormulaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FormulaId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        FormulaId::ALL
            .iter()
            .find(|f| f.as_str() == s)
            .copied()
            .ok_or_else(|| domain(format!("unknown formula '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticQuote {
    pub value: f64,
    pub formula: FormulaId,
    /// Condition on the family of `(κ, t)` under which the value is the
    /// leading-order asymptotic, plus any thresholds used to pick the branch.
    pub regime: String,
    pub kappa: f64,
    pub t: f64,
    pub aux: Option<f64>,
}

impl AsymptoticQuote {
    pub fn new(
        value: f64,
        formula: FormulaId,
        cond: &str,
        kappa: f64,
        t: f64,
        aux: Option<f64>,
    ) -> Self {
        AsymptoticQuote {
            value,
            formula,
            regime: cond.to_string(),
            kappa,
            t,
            aux,
        }
    }

    pub fn is_conjectural(&self) -> bool {
        self.formula == FormulaId::HestonConjecture
    }
}

fn check_kt(kappa: f64, t: f64) -> Result<()> {
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(domain(format!("κ must be positive, got {kappa}")));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(domain(format!("t must be positive, got {t}")));
    }
    Ok(())
}

/// Implied volatility at `κ > 0` from `log P(X_t > κ)`.
///
/// General form `(√(L/κ) − √(L/κ − 1))·√(2κ/t)` with `L = −log_tail`, which
/// needs `L ≥ κ`; special form `κ/√(2tL)` for `L/κ → ∞`.
pub fn tail_to_vol_right(
    kappa: f64,
    t: f64,
    log_tail: f64,
    special: bool,
) -> Result<AsymptoticQuote> {
    check_kt(kappa, t)?;
    if !(log_tail < 0.0) {
        return Err(domain(format!("log tail must be negative, got {log_tail}")));
    }
    let l = -log_tail;
    if special {
        let v = kappa / (2.0 * t * l).sqrt();
        return Ok(AsymptoticQuote::new(
            v,
            FormulaId::RightTailSpecial,
            "−log P(X_t > κ)/κ → ∞",
            kappa,
            t,
            Some(log_tail),
        ));
    }
    let x = l / kappa;
    if x < 1.0 {
        return Err(regime(format!(
            "right general form needs −log P/κ ≥ 1, got {x}"
        )));
    }
    Ok(AsymptoticQuote::new(
        sqrt_gap_minus(x) * (2.0 * kappa / t).sqrt(),
        FormulaId::RightTailGeneral,
        "P(X_t > κ) → 0 with regular decay, −log P/κ ≥ 1",
        kappa,
        t,
        Some(log_tail),
    ))
}

/// Implied volatility at `−κ < 0` from `log P(X_t ≤ −κ)`.
pub fn tail_to_vol_left(
    kappa: f64,
    t: f64,
    log_tail: f64,
    special: bool,
) -> Result<AsymptoticQuote> {
    check_kt(kappa, t)?;
    if !(log_tail < 0.0) {
        return Err(domain(format!("log tail must be negative, got {log_tail}")));
    }
    let l = -log_tail;
    if special {
        return Ok(AsymptoticQuote::new(
            kappa / (2.0 * t * l).sqrt(),
            FormulaId::LeftTailSpecial,
            "−log P(X_t ≤ −κ)/κ → ∞",
            kappa,
            t,
            Some(log_tail),
        ));
    }
    Ok(AsymptoticQuote::new(
        sqrt_gap_plus(l / kappa) * (2.0 * kappa / t).sqrt(),
        FormulaId::LeftTailGeneral,
        "P(X_t ≤ −κ) → 0 with regular decay",
        kappa,
        t,
        Some(log_tail),
    ))
}
