//! Merton prices as a Poisson mixture of Black-Scholes prices.

use super::{check_t, PriceMethod, PriceResult};
use crate::blackscholes::bs_ln_call_price;
use crate::error::{domain, Result};
use crate::models::{ln_mgf, ln_poisson_remainder, Merton, ModelSpec};
use crate::numeric::log_sum_exp;

/// Conditionally on `n` jumps, `e^{X_t} = F_n·e^{Z}` with
/// `Z ~ N(−s_n²/2, s_n²)`, so the call is `Σ w_n F_n C_BS(κ − log F_n, s_n)`.
/// The mixture is truncated after `big_m` jumps; the dropped mass is bounded
/// by `E[e^{X_t}]·(eλ′t/M)^M` with `λ′ = λe^{α_j + δ²/2}`.
///
/// The out-of-the-money leg is summed directly (puts via
/// `P_BS(k, v) = e^k C_BS(−k, v)`), so deep prices keep relative accuracy.
pub fn merton_series_price(m: &Merton, kappa: f64, t: f64, big_m: usize) -> Result<PriceResult> {
    check_t(t)?;
    if big_m == 0 {
        return Err(domain("truncation order must be at least 1"));
    }
    if !kappa.is_finite() {
        return Err(domain("κ must be finite"));
    }
    let lt = m.lambda * t;
    let mut terms = Vec::with_capacity(big_m + 1);
    let mut ln_w = -lt;
    for n in 0..=big_m {
        if n > 0 {
            ln_w += lt.ln() - (n as f64).ln();
        }
        let (mean, var) = m.conditional(n, t);
        let ln_f = mean + 0.5 * var;
        let s = var.sqrt();
        let k = kappa - ln_f;
        let ln_leg = if kappa >= 0.0 {
            bs_ln_call_price(k, s)?
        } else {
            k + bs_ln_call_price(-k, s)?
        };
        terms.push(ln_w + ln_f + ln_leg);
    }
    let ln_otm = log_sum_exp(&terms);
    let lam_prime_t = lt * (m.alpha_j + 0.5 * m.delta * m.delta).exp();
    let ln_mean = ln_mgf(&ModelSpec::Merton(*m), 1.0, t);
    let ln_rem = ln_mean + ln_poisson_remainder(lam_prime_t, big_m).min(0.0);
    // the put leg is bounded by e^κ instead of the forward
    let ln_rem = if kappa < 0.0 {
        ln_rem.min(kappa + ln_poisson_remainder(lt, big_m).min(0.0))
    } else {
        ln_rem
    };
    let rel = (ln_rem - ln_otm).exp() + 1e-13;
    Ok(PriceResult::from_otm(
        kappa,
        t,
        ln_otm,
        PriceMethod::ClosedSum,
        rel,
    ))
}

/// Series price with `M` grown until the remainder is below `1e-13` of the price.
pub fn merton_series_price_auto(m: &Merton, kappa: f64, t: f64) -> Result<PriceResult> {
    let mut big_m =
        ((std::f64::consts::E * std::f64::consts::E * m.lambda * t).ceil() as usize).max(8);
    loop {
        let p = merton_series_price(m, kappa, t, big_m)?;
        if p.rel_error_bound < 2e-13 || big_m >= 1 << 14 {
            return Ok(p);
        }
        big_m *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blackscholes::bs_call_price;

    #[test]
    fn vanishing_intensity_is_black_scholes() {
        let m = Merton::new(0.2, 1e-300, 0.1, 0.3).unwrap();
        for &k in &[-0.3, 0.0, 0.2] {
            let p = merton_series_price(&m, k, 0.5, 4).unwrap();
            let want = bs_call_price(k, 0.2 * 0.5f64.sqrt()).unwrap();
            assert!((p.price - want).abs() < 1e-12);
        }
    }

    #[test]
    fn doubling_m_within_bound() {
        let m = Merton::new(0.2, 0.8, -0.05, 0.25).unwrap();
        for &k in &[-0.5, 0.1, 0.6] {
            for &big_m in &[1usize, 2, 3, 5] {
                let a = merton_series_price(&m, k, 1.0, big_m).unwrap();
                let b = merton_series_price(&m, k, 1.0, 2 * big_m).unwrap();
                assert!(
                    (a.price - b.price).abs() <= a.abs_error_bound,
                    "κ={k} M={big_m}"
                );
            }
        }
    }
}
