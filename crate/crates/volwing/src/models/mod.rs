//! Risk-neutral models for the log-return `X_t = log(S_t/S_0)`: characteristic
//! functions, moment generating functions, tail probabilities and the
//! small-time scaling data used by the generic asymptotic formulas.

pub mod heston;
pub mod stable;

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::numeric::{golden_min, integrate_to_inf, log_sum_exp};
use crate::specfun::ln_norm_cdf;

use self::heston::{explosion_time_raw, heston_explosion_moment, heston_negative_explosion_moment};
use self::stable::{ln_left_tail, ln_right_tail, StableTailMethod};

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(domain(format!(
            "{name} must be positive and finite, got {x}"
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlackScholes {
    pub sigma: f64,
}

impl BlackScholes {
    pub fn new(sigma: f64) -> Result<Self> {
        positive("sigma", sigma)?;
        Ok(Self { sigma })
    }
}

/// Finite-moment log-stable model: `X_t = μt + σ t^{1/α} Y` with `Y` the
/// standard β = −1 stable law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarrWu {
    pub sigma: f64,
    pub alpha: f64,
}

impl CarrWu {
    pub fn new(sigma: f64, alpha: f64) -> Result<Self> {
        positive("sigma", sigma)?;
        if !(alpha > 1.0 && alpha <= 2.0) {
            return Err(domain(format!("alpha must lie in (1, 2], got {alpha}")));
        }
        Ok(Self { sigma, alpha })
    }

    /// Risk-neutral drift `σ^α / cos(πα/2)`, negative for `α < 2`.
    pub fn mu(&self) -> f64 {
        self.sigma.powf(self.alpha) / (PI * self.alpha / 2.0).cos()
    }

    /// `σ t^{1/α}`.
    pub fn scale(&self, t: f64) -> f64 {
        self.sigma * t.powf(1.0 / self.alpha)
    }
}

/// Gaussian jump diffusion with jump intensity `lambda`, jump sizes
/// `N(alpha_j, delta²)` and drift `mu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merton {
    pub sigma: f64,
    pub lambda: f64,
    pub alpha_j: f64,
    pub delta: f64,
    pub mu: f64,
}

impl Merton {
    /// Drift fixed by `E[e^{X_t}] = 1`.
    pub fn new(sigma: f64, lambda: f64, alpha_j: f64, delta: f64) -> Result<Self> {
        positive("sigma", sigma)?;
        positive("lambda", lambda)?;
        positive("delta", delta)?;
        if !alpha_j.is_finite() {
            return Err(domain("jump mean must be finite"));
        }
        let mu = Self::risk_neutral_mu(sigma, lambda, alpha_j, delta);
        Ok(Self {
            sigma,
            lambda,
            alpha_j,
            delta,
            mu,
        })
    }

    pub fn risk_neutral_mu(sigma: f64, lambda: f64, alpha_j: f64, delta: f64) -> f64 {
        -0.5 * sigma * sigma - lambda * (alpha_j + 0.5 * delta * delta).exp_m1()
    }

    /// Replaces the drift; the model is then no longer a martingale in general.
    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = mu;
        self
    }

    pub fn is_risk_neutral(&self) -> bool {
        let rn = Self::risk_neutral_mu(self.sigma, self.lambda, self.alpha_j, self.delta);
        (self.mu - rn).abs() <= 1e-14 * rn.abs().max(1.0)
    }

    /// Mean and variance of `X_t` given `n` jumps.
    pub fn conditional(&self, n: usize, t: f64) -> (f64, f64) {
        let n = n as f64;
        (
            self.mu * t + n * self.alpha_j,
            self.sigma * self.sigma * t + n * self.delta * self.delta,
        )
    }
}

/// Heston stochastic volatility with mean reversion `lambda`, long-run
/// variance `theta`, vol of vol `eta`, initial variance `v0` and
/// correlation `rho`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Heston {
    pub lambda: f64,
    pub theta: f64,
    pub eta: f64,
    pub v0: f64,
    pub rho: f64,
}

impl Heston {
    pub fn new(lambda: f64, theta: f64, eta: f64, v0: f64, rho: f64) -> Result<Self> {
        positive("lambda", lambda)?;
        positive("theta", theta)?;
        positive("eta", eta)?;
        positive("v0", v0)?;
        if !(-1.0..=1.0).contains(&rho) {
            return Err(domain(format!("rho must lie in [-1, 1], got {rho}")));
        }
        Ok(Self {
            lambda,
            theta,
            eta,
            v0,
            rho,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelSpec {
    BlackScholes(BlackScholes),
    CarrWu(CarrWu),
    Merton(Merton),
    Heston(Heston),
}

impl ModelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::BlackScholes(_) => "black-scholes",
            ModelSpec::CarrWu(_) => "carr-wu",
            ModelSpec::Merton(_) => "merton",
            ModelSpec::Heston(_) => "heston",
        }
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelSpec::BlackScholes(m) => write!(f, "black-scholes(sigma={})", m.sigma),
            ModelSpec::CarrWu(m) => write!(f, "carr-wu(sigma={}, alpha={})", m.sigma, m.alpha),
            ModelSpec::Merton(m) => write!(
                f,
                "merton(sigma={}, lambda={}, alpha_j={}, delta={}, mu={})",
                m.sigma, m.lambda, m.alpha_j, m.delta, m.mu
            ),
            ModelSpec::Heston(m) => write!(
                f,
                "heston(lambda={}, theta={}, eta={}, v0={}, rho={})",
                m.lambda, m.theta, m.eta, m.v0, m.rho
            ),
        }
    }
}

fn check_t(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(domain(format!(
            "maturity must be positive and finite, got {t}"
        )))
    }
}

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `log E[exp(i w X_t)]` for complex `w` inside the strip of analyticity.
///
/// Carr-Wu uses the principal branch of `(iw)^α`, which is the analytic
/// continuation for `Re(iw) ≥ 0`. Heston uses the formulation with
/// `g = (b − d)/(b + d)` and `e^{−dt}`, which stays on the principal branch
/// of the logarithm for the usual parameter ranges.
pub fn ln_cf(m: &ModelSpec, w: Complex64, t: f64) -> Complex64 {
    let iw = I * w;
    match m {
        ModelSpec::BlackScholes(b) => -0.5 * b.sigma * b.sigma * t * (w * w + iw),
        ModelSpec::CarrWu(c) => {
            let mu = c.mu();
            t * (iw * mu - mu * iw.powf(c.alpha))
        }
        ModelSpec::Merton(j) => {
            let jump = (iw * j.alpha_j + 0.5 * j.delta * j.delta * iw * iw).exp() - 1.0;
            t * (iw * j.mu + 0.5 * j.sigma * j.sigma * iw * iw + j.lambda * jump)
        }
        ModelSpec::Heston(h) => heston_ln_cf(h, w, t),
    }
}

fn heston_ln_cf(h: &Heston, w: Complex64, t: f64) -> Complex64 {
    let iw = I * w;
    let eta2 = h.eta * h.eta;
    let b = h.lambda - h.rho * h.eta * iw;
    let d = (b * b + eta2 * (iw - iw * iw)).sqrt();
    let g = (b - d) / (b + d);
    let e = (-d * t).exp();
    let dd = (b - d) / eta2 * (1.0 - e) / (1.0 - g * e);
    let cc = h.lambda * h.theta / eta2 * ((b - d) * t - 2.0 * ((1.0 - g * e) / (1.0 - g)).ln());
    cc + dd * h.v0
}

pub fn model_cf(m: &ModelSpec, u: f64, t: f64) -> Result<Complex64> {
    check_t(t)?;
    if !u.is_finite() {
        return Err(domain("cf argument must be finite"));
    }
    Ok(ln_cf(m, Complex64::new(u, 0.0), t).exp())
}

/// `log E[exp(z X_t)]`, `+∞` where the moment is infinite.
pub fn ln_mgf(m: &ModelSpec, z: f64, t: f64) -> f64 {
    match m {
        ModelSpec::BlackScholes(b) => 0.5 * b.sigma * b.sigma * t * (z * z - z),
        ModelSpec::CarrWu(c) => {
            if c.alpha == 2.0 {
                let mu = c.mu();
                t * mu * (z - z * z)
            } else if z < 0.0 {
                f64::INFINITY
            } else {
                let mu = c.mu();
                t * mu * (z - z.powf(c.alpha))
            }
        }
        ModelSpec::Merton(j) => {
            let jump = (z * j.alpha_j + 0.5 * z * z * j.delta * j.delta).exp_m1();
            t * (z * j.mu + 0.5 * z * z * j.sigma * j.sigma + j.lambda * jump)
        }
        ModelSpec::Heston(h) => heston_ln_mgf(h, z, t),
    }
}

/// Real-argument Heston mgf from the closed solution of the Riccati system,
/// written so that nothing overflows for large `t·√Δ`.
pub(crate) fn heston_ln_mgf(h: &Heston, p: f64, t: f64) -> f64 {
    if p == 0.0 {
        return 0.0;
    }
    let tstar = explosion_time_raw(h, p).unwrap_or(f64::INFINITY);
    if t >= tstar {
        return f64::INFINITY;
    }
    let chi = h.chi(p);
    let disc = h.disc(p);
    let q = p * p - p;
    let k = h.lambda * h.theta / (h.eta * h.eta);
    let (dd, ln_den) = if disc > 0.0 {
        let s = disc.sqrt();
        let x = 0.5 * s * t;
        let th = x.tanh();
        let den = 1.0 - chi / s * th;
        if den <= 0.0 {
            return f64::INFINITY;
        }
        // log cosh x = x + log((1 + e^{−2x})/2)
        let ln_cosh = x + (-2.0 * x).exp().ln_1p() - std::f64::consts::LN_2;
        (q * th / (s - chi * th), ln_cosh + den.ln())
    } else if disc < 0.0 {
        let om = (-disc).sqrt();
        let x = 0.5 * om * t;
        let den = om * x.cos() - chi * x.sin();
        if den <= 0.0 {
            return f64::INFINITY;
        }
        (q * x.sin() / den, (den / om).ln())
    } else {
        let den = 1.0 - 0.5 * chi * t;
        if den <= 0.0 {
            return f64::INFINITY;
        }
        (q * 0.5 * t / den, den.ln())
    };
    k * (-chi * t - 2.0 * ln_den) + dd * h.v0
}

pub fn model_mgf(m: &ModelSpec, z: f64, t: f64) -> Result<f64> {
    check_t(t)?;
    if !z.is_finite() {
        return Err(domain("mgf argument must be finite"));
    }
    Ok(ln_mgf(m, z, t).exp())
}

/// Open interval `(lo, hi)` of real `z` with `E[e^{zX_t}] < ∞`.
pub fn mgf_strip(m: &ModelSpec, t: f64) -> Result<(f64, f64)> {
    check_t(t)?;
    Ok(match m {
        ModelSpec::BlackScholes(_) | ModelSpec::Merton(_) => (f64::NEG_INFINITY, f64::INFINITY),
        ModelSpec::CarrWu(c) => {
            if c.alpha == 2.0 {
                (f64::NEG_INFINITY, f64::INFINITY)
            } else {
                (0.0, f64::INFINITY)
            }
        }
        ModelSpec::Heston(h) => (
            heston_negative_explosion_moment(h, t)?,
            heston_explosion_moment(h, t)?,
        ),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Right,
    Left,
}

impl Side {
    pub fn as_str(&self) -> &'static str {
        match self {
            Side::Right => "right",
            Side::Left => "left",
        }
    }
}

impl std::str::FromStr for Side {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "right" | "+" => Ok(Side::Right),
            "left" | "-" => Ok(Side::Left),
            _ => Err(domain(format!("unknown side '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailMethod {
    ClosedSum,
    Quadrature,
    Asymptotic,
    MonteCarlo,
}

impl TailMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            TailMethod::ClosedSum => "closed-sum",
            TailMethod::Quadrature => "quadrature",
            TailMethod::Asymptotic => "asymptotic",
            TailMethod::MonteCarlo => "monte-carlo",
        }
    }
}

/// `P(X_t > κ)` (right) or `P(X_t ≤ −κ)` (left).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailEstimate {
    pub value: f64,
    pub ln_value: f64,
    pub side: Side,
    pub method: TailMethod,
    pub abs_error_bound: f64,
}

impl TailEstimate {
    fn from_ln(ln_value: f64, side: Side, method: TailMethod, rel_err: f64) -> Self {
        let value = ln_value.exp();
        TailEstimate {
            value,
            ln_value,
            side,
            method,
            abs_error_bound: rel_err * value,
        }
    }
}

/// `(log P, relative error, method)` for `P(X_t > x)` (right) or
/// `P(X_t ≤ x)` (left) at any real `x`.
pub fn ln_tail_at(m: &ModelSpec, side: Side, x: f64, t: f64) -> Result<(f64, f64, TailMethod)> {
    check_t(t)?;
    if !x.is_finite() {
        return Err(domain("tail point must be finite"));
    }
    match m {
        ModelSpec::BlackScholes(b) => {
            let v = b.sigma * t.sqrt();
            let z = (x + 0.5 * v * v) / v;
            let z = match side {
                Side::Right => -z,
                Side::Left => z,
            };
            Ok((ln_norm_cdf(z), 1e-14, TailMethod::ClosedSum))
        }
        ModelSpec::CarrWu(c) => carrwu_ln_tail(c, side, x, t),
        ModelSpec::Merton(j) => {
            let k = match side {
                Side::Right => x,
                Side::Left => -x,
            };
            let (e, rel) = merton_tail(j, side, k, t)?;
            Ok((e.ln_value, rel, TailMethod::ClosedSum))
        }
        ModelSpec::Heston(h) => heston_ln_tail(h, side, x, t),
    }
}

/// Tail probability with an error bound; `Accuracy` if the bound exceeds
/// half the value.
pub fn model_tail(m: &ModelSpec, side: Side, kappa: f64, t: f64) -> Result<TailEstimate> {
    check_t(t)?;
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(domain(format!("tail needs κ > 0, got {kappa}")));
    }
    let x = match side {
        Side::Right => kappa,
        Side::Left => -kappa,
    };
    let (ln_v, rel, method) = ln_tail_at(m, side, x, t)?;
    let est = TailEstimate::from_ln(ln_v, side, method, rel);
    if !(rel <= 0.5) {
        return Err(Error::Accuracy {
            message: format!("{} tail at κ = {kappa}, t = {t}", m.name()),
            achieved: est.abs_error_bound,
        });
    }
    Ok(est)
}

fn carrwu_ln_tail(c: &CarrWu, side: Side, x: f64, t: f64) -> Result<(f64, f64, TailMethod)> {
    let y = (x - c.mu() * t) / c.scale(t);
    let tag = |m: StableTailMethod| match m {
        StableTailMethod::Asymptotic => TailMethod::Asymptotic,
        _ => TailMethod::Quadrature,
    };
    // the tail on the requested side when y lies on that side, else the complement
    let (direct, arg) = match side {
        Side::Right => (y >= 0.0, y),
        Side::Left => (y <= 0.0, -y),
    };
    let near = |a: f64| match side {
        Side::Right => ln_right_tail(a, c.alpha),
        Side::Left => ln_left_tail(a, c.alpha),
    };
    let far = |a: f64| match side {
        Side::Right => ln_left_tail(a, c.alpha),
        Side::Left => ln_right_tail(a, c.alpha),
    };
    if direct {
        let r = near(arg)?;
        Ok((r.ln_value, r.rel_err, tag(r.method)))
    } else {
        let r = far(-arg)?;
        let p = r.ln_value.exp();
        Ok((
            (-p).ln_1p(),
            r.rel_err * p / (1.0 - p),
            TailMethod::Quadrature,
        ))
    }
}

/// Chernoff bound on `P(N > M)` for `N ~ Poisson(λt)`, in log form:
/// `M·log(eλt/M)`. Meaningful for `M > λt`.
pub fn ln_poisson_remainder(lambda_t: f64, big_m: usize) -> f64 {
    let mm = big_m as f64;
    mm * (1.0 + lambda_t.ln() - mm.ln())
}

/// Merton tail as the Poisson–Gaussian mixture truncated after `big_m`
/// jumps. The error bound is the Chernoff remainder.
pub fn merton_tail_sum(
    m: &Merton,
    side: Side,
    kappa: f64,
    t: f64,
    big_m: usize,
) -> Result<TailEstimate> {
    check_t(t)?;
    if big_m == 0 {
        return Err(domain("truncation order must be at least 1"));
    }
    let lt = m.lambda * t;
    let mut terms = Vec::with_capacity(big_m + 1);
    let mut ln_w = -lt;
    for n in 0..=big_m {
        if n > 0 {
            ln_w += lt.ln() - (n as f64).ln();
        }
        let (mean, var) = m.conditional(n, t);
        let sd = var.sqrt();
        let z = match side {
            Side::Right => (mean - kappa) / sd,
            Side::Left => (-kappa - mean) / sd,
        };
        terms.push(ln_w + ln_norm_cdf(z));
    }
    let ln_value = log_sum_exp(&terms);
    let rem = ln_poisson_remainder(lt, big_m).exp().min(1.0);
    Ok(TailEstimate {
        value: ln_value.exp(),
        ln_value,
        side,
        method: TailMethod::ClosedSum,
        abs_error_bound: rem + 1e-14 * ln_value.exp(),
    })
}

/// Adaptive truncation: doubles `M` until the remainder is below `1e-13` of
/// the value. Returns the estimate and its relative error bound.
pub(crate) fn merton_tail(
    m: &Merton,
    side: Side,
    kappa: f64,
    t: f64,
) -> Result<(TailEstimate, f64)> {
    let lt = m.lambda * t;
    let mut big_m = ((std::f64::consts::E * std::f64::consts::E * lt).ceil() as usize).max(8);
    loop {
        let est = merton_tail_sum(m, side, kappa, t, big_m)?;
        let ln_rem = ln_poisson_remainder(lt, big_m);
        if ln_rem < est.ln_value + (1e-13f64).ln() || big_m >= 1 << 16 {
            // keep the bound in relative terms when the value underflows
            let rel = (ln_rem - est.ln_value).exp() + 1e-14;
            return Ok((
                TailEstimate {
                    abs_error_bound: rel * est.value,
                    ..est
                },
                rel,
            ));
        }
        big_m *= 2;
    }
}

/// `P(X_t > x)` (`b > 0`) or `−P(X_t ≤ x)` (`b < 0`) by a shifted-contour
/// Fourier integral, returned as `(log|value|, relative error)`.
pub(crate) fn contour_digital(m: &ModelSpec, x: f64, t: f64, b: f64) -> Result<(f64, f64)> {
    let ln_mb = ln_mgf(m, b, t);
    if !ln_mb.is_finite() {
        return Err(domain(format!("damping {b} outside the moment strip")));
    }
    let f = |u: f64| {
        let w = Complex64::new(-u, -b);
        let z = ln_cf(m, w, t) - ln_mb + I * u * x;
        let v = z.exp() * b / Complex64::new(b, -u);
        v.re
    };
    // width of the integrand from the curvature of log M at b
    let h = 1e-4 * b.abs().max(1.0);
    let curv = (ln_mgf(m, b + h, t) - 2.0 * ln_mb + ln_mgf(m, b - h, t)) / (h * h);
    let h0 = if curv.is_finite() && curv > 0.0 {
        1.0 / curv.sqrt()
    } else {
        1.0
    };
    let q = integrate_to_inf(f, 0.0, h0.min(b.abs().max(1e-3) * 4.0), 1e-300, 1e-12);
    if !(q.value > 0.0) {
        return Err(Error::Accuracy {
            message: "contour tail integral not positive".into(),
            achieved: q.abs_err,
        });
    }
    // value = e^{−bx} M(b) / (π b) · ∫ …
    let ln_v = -b * x + ln_mb - (PI * b.abs()).ln() + q.value.ln();
    Ok((ln_v, q.abs_err / q.value))
}

fn heston_ln_tail(h: &Heston, side: Side, x: f64, t: f64) -> Result<(f64, f64, TailMethod)> {
    let m = ModelSpec::Heston(*h);
    let (lo, hi) = mgf_strip(&m, t)?;
    // Chernoff-optimal damping, kept inside 90% of the strip
    let objective = |b: f64| {
        let v = ln_mgf(&m, b, t) - b * x;
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let b = match side {
        Side::Right => {
            let cap = if hi.is_finite() { 0.9 * hi } else { 1e4 };
            let s = golden_min(|s: f64| objective(s.exp()), (1e-3f64).ln(), cap.ln(), 200);
            s.exp()
        }
        Side::Left => {
            let cap = if lo.is_finite() { -0.9 * lo } else { 1e4 };
            let s = golden_min(|s: f64| objective(-s.exp()), (1e-3f64).ln(), cap.ln(), 200);
            -s.exp()
        }
    };
    let (ln_v, rel) = contour_digital(&m, x, t, b)?;
    Ok((ln_v, rel + 1e-13, TailMethod::Quadrature))
}

/// Small-time scaling `γ_t = t^exponent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaScaling {
    pub exponent: f64,
}

impl GammaScaling {
    pub fn gamma(&self, t: f64) -> f64 {
        t.powf(self.exponent)
    }
}

/// Limit in law of `X_t/γ_t` as `t → 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LimitLaw {
    Gaussian { sigma: f64 },
    SkewedStable { alpha: f64, scale: f64 },
}

/// Regular-decay index `I(ρ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RvIndex {
    Power(f64),
    Constant,
    /// `f(ρa)/f(a)` with Merton's rate function `f` for jump std `delta`.
    MertonRatio {
        a: f64,
        delta: f64,
    },
}

impl RvIndex {
    pub fn eval(&self, rho: f64) -> f64 {
        match *self {
            RvIndex::Power(p) => rho.powf(p),
            RvIndex::Constant => 1.0,
            RvIndex::MertonRatio { a, delta } => {
                crate::asymptotics::merton_f(rho * a, delta)
                    / crate::asymptotics::merton_f(a, delta)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingData {
    pub gamma: GammaScaling,
    pub limit_law: LimitLaw,
    pub rv_index_right: RvIndex,
    pub rv_index_left: RvIndex,
}

/// Scaling data for the generic formulas. For Merton the ratio index is
/// anchored at `a = 1`; use [`RvIndex::MertonRatio`] directly for other anchors.
pub fn scaling_data(m: &ModelSpec) -> ScalingData {
    match m {
        ModelSpec::BlackScholes(b) => ScalingData {
            gamma: GammaScaling { exponent: 0.5 },
            limit_law: LimitLaw::Gaussian { sigma: b.sigma },
            rv_index_right: RvIndex::Power(2.0),
            rv_index_left: RvIndex::Power(2.0),
        },
        ModelSpec::CarrWu(c) => ScalingData {
            gamma: GammaScaling {
                exponent: 1.0 / c.alpha,
            },
            limit_law: LimitLaw::SkewedStable {
                alpha: c.alpha,
                scale: c.sigma,
            },
            rv_index_right: RvIndex::Power(c.alpha / (c.alpha - 1.0)),
            rv_index_left: RvIndex::Constant,
        },
        ModelSpec::Merton(j) => ScalingData {
            gamma: GammaScaling { exponent: 0.5 },
            limit_law: LimitLaw::Gaussian { sigma: j.sigma },
            rv_index_right: RvIndex::MertonRatio {
                a: 1.0,
                delta: j.delta,
            },
            rv_index_left: RvIndex::MertonRatio {
                a: 1.0,
                delta: j.delta,
            },
        },
        // the limit law is Gaussian with variance v0
        ModelSpec::Heston(h) => ScalingData {
            gamma: GammaScaling { exponent: 0.5 },
            limit_law: LimitLaw::Gaussian { sigma: h.v0.sqrt() },
            rv_index_right: RvIndex::Power(1.0),
            rv_index_left: RvIndex::Power(1.0),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn models() -> Vec<ModelSpec> {
        vec![
            ModelSpec::BlackScholes(BlackScholes::new(0.2).unwrap()),
            ModelSpec::CarrWu(CarrWu::new(0.2, 1.5).unwrap()),
            ModelSpec::Merton(Merton::new(0.2, 0.01, 0.1, 0.3).unwrap()),
            ModelSpec::Merton(Merton::new(0.15, 2.0, -0.1, 0.2).unwrap()),
            ModelSpec::Heston(Heston::new(1.5, 0.04, 0.5, 0.04, -0.7).unwrap()),
            ModelSpec::Heston(Heston::new(2.0, 0.05, 0.8, 0.03, 0.4).unwrap()),
        ]
    }

    #[test]
    fn cf_normalization_and_martingale() {
        for m in models() {
            for &t in &[0.01, 0.1, 1.0] {
                let c = model_cf(&m, 0.0, t).unwrap();
                assert!((c - 1.0).norm() < 1e-15, "{m}");
                assert!(
                    (model_mgf(&m, 1.0, t).unwrap() - 1.0).abs() < 1e-10,
                    "{m} t={t}"
                );
                // cf at w = −i equals the mgf at 1
                let z = ln_cf(&m, Complex64::new(0.0, -1.0), t);
                assert!(z.norm() < 1e-10, "{m} t={t}: {z}");
            }
        }
    }

    #[test]
    fn black_scholes_cf() {
        let m = ModelSpec::BlackScholes(BlackScholes::new(0.3).unwrap());
        let (u, t) = (1.7, 0.4);
        let want = Complex64::new(-0.5 * 0.09 * t * u * u, -0.5 * 0.09 * t * u).exp();
        assert!((model_cf(&m, u, t).unwrap() - want).norm() < 1e-15);
    }

    #[test]
    fn carrwu_cf_standardizes_to_stable() {
        let c = CarrWu::new(0.2, 1.5).unwrap();
        let m = ModelSpec::CarrWu(c);
        let t = 0.3;
        for &v in &[-2.0, -0.5, 0.7, 3.0] {
            // E[exp(iv(X − μt)/s)] = cf_X(v/s)·exp(−ivμt/s)
            let s = c.scale(t);
            let lhs =
                model_cf(&m, v / s, t).unwrap() * Complex64::new(0.0, -v * c.mu() * t / s).exp();
            let rhs = stable::stable_cf(v, 1.5);
            assert!((lhs - rhs).norm() < 1e-13);
        }
        assert_eq!(model_mgf(&m, -0.5, 1.0).unwrap(), f64::INFINITY);
    }

    #[test]
    fn mgf_matches_cf_on_real_axis() {
        for m in models() {
            let (lo, hi) = mgf_strip(&m, 0.5).unwrap();
            for &z in &[-1.5, -0.3, 0.4, 1.8, 3.0] {
                if z <= lo || z >= hi {
                    continue;
                }
                let a = ln_mgf(&m, z, 0.5);
                let b = ln_cf(&m, Complex64::new(0.0, -z), 0.5);
                assert!(
                    (a - b.re).abs() < 1e-8 * a.abs().max(1.0) && b.im.abs() < 1e-8,
                    "{m} z={z}: {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn merton_mgf_direct() {
        // frozen: direct evaluation of the exponent at z = 2, t = 0.1
        let j = Merton::new(0.2, 0.01, 0.1, 0.3).unwrap();
        let m = ModelSpec::Merton(j);
        let z: f64 = 2.0;
        let t = 0.1;
        let expo =
            t * (z * j.mu + 0.5 * z * z * 0.04 + 0.01 * ((0.2f64 + 0.5 * 4.0 * 0.09).exp() - 1.0));
        assert!((model_mgf(&m, z, t).unwrap() / expo.exp() - 1.0).abs() < 1e-14);
        let mu = -0.02 - 0.01 * ((0.1f64 + 0.045).exp() - 1.0);
        assert!((j.mu - mu).abs() < 1e-16);
    }

    #[test]
    fn heston_mgf_explodes_at_p_star() {
        let h = Heston::new(1.5, 0.04, 0.5, 0.04, -0.7).unwrap();
        let t = 0.5;
        let p = heston_explosion_moment(&h, t).unwrap();
        assert!(heston_ln_mgf(&h, p * 0.999, t).is_finite());
        assert_eq!(heston_ln_mgf(&h, p * 1.001, t), f64::INFINITY);
        let q = heston_negative_explosion_moment(&h, t).unwrap();
        assert!(heston_ln_mgf(&h, q * 0.999, t).is_finite());
        assert_eq!(heston_ln_mgf(&h, q * 1.001, t), f64::INFINITY);
    }

    #[test]
    fn heston_mgf_branches_join() {
        // Δ changes sign as p varies; log M must be continuous across
        let h = Heston::new(1.0, 0.04, 1.0, 0.04, 0.0).unwrap();
        let t = 0.2;
        let mut prev = heston_ln_mgf(&h, 1.0001, t);
        let mut p = 1.0001;
        while p < 6.0 {
            p += 0.001;
            let v = heston_ln_mgf(&h, p, t);
            assert!((v - prev).abs() < 1e-2, "jump at p = {p}");
            prev = v;
        }
    }

    #[test]
    fn black_scholes_tails() {
        let m = ModelSpec::BlackScholes(BlackScholes::new(0.2).unwrap());
        let r = model_tail(&m, Side::Right, 0.1, 1.0).unwrap();
        assert!((r.value - crate::specfun::gauss_cdf(-(0.1 + 0.02) / 0.2).unwrap()).abs() < 1e-15);
        let l = model_tail(&m, Side::Left, 0.1, 1.0).unwrap();
        assert!((l.value - crate::specfun::gauss_cdf((-0.1 + 0.02) / 0.2).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn merton_truncation_respects_remainder() {
        let j = Merton::new(0.2, 0.01, 0.1, 0.3).unwrap();
        for &(k, t) in &[(0.5, 0.25), (1.0, 0.1), (2.0, 1.0)] {
            for &big_m in &[1usize, 2, 4, 8] {
                let a = merton_tail_sum(&j, Side::Right, k, t, big_m).unwrap();
                let b = merton_tail_sum(&j, Side::Right, k, t, 4 * big_m).unwrap();
                assert!(b.value >= a.value);
                assert!(b.value - a.value <= a.abs_error_bound, "M={big_m}");
            }
        }
    }

    #[test]
    fn heston_tail_agrees_with_merton_style_check() {
        // Heston with tiny vol of vol is close to Black-Scholes at vol √v0
        let h = Heston::new(1.0, 0.04, 1e-3, 0.04, 0.0).unwrap();
        let m = ModelSpec::Heston(h);
        let bs = ModelSpec::BlackScholes(BlackScholes::new(0.2).unwrap());
        for &k in &[0.1, 0.5, 1.0] {
            let a = model_tail(&m, Side::Right, k, 1.0).unwrap();
            let b = model_tail(&bs, Side::Right, k, 1.0).unwrap();
            assert!(
                (a.ln_value - b.ln_value).abs() < 1e-2 * b.ln_value.abs(),
                "κ={k}"
            );
            let a = model_tail(&m, Side::Left, k, 1.0).unwrap();
            let b = model_tail(&bs, Side::Left, k, 1.0).unwrap();
            assert!(
                (a.ln_value - b.ln_value).abs() < 1e-2 * b.ln_value.abs(),
                "κ={k}"
            );
        }
    }

    #[test]
    fn contour_digital_black_scholes_exact() {
        let m = ModelSpec::BlackScholes(BlackScholes::new(0.25).unwrap());
        for &(x, b) in &[(0.3, 2.0), (1.0, 10.0), (-0.4, -3.0)] {
            let (ln_v, rel) = contour_digital(&m, x, 0.5, b).unwrap();
            let v = 0.25 * 0.5f64.sqrt();
            let want = if b > 0.0 {
                ln_norm_cdf(-(x + 0.5 * v * v) / v)
            } else {
                ln_norm_cdf((x + 0.5 * v * v) / v)
            };
            assert!((ln_v - want).abs() < 1e-10, "x={x}: {ln_v} vs {want}");
            assert!(rel < 1e-8);
        }
    }

    #[test]
    fn tail_monotone_in_kappa_and_t() {
        // compared in log form: the Carr-Wu right tail underflows at small t
        for m in models() {
            let mut prev = 0.0;
            for &k in &[0.05, 0.1, 0.2, 0.4] {
                let v = model_tail(&m, Side::Right, k, 0.05).unwrap().ln_value;
                assert!(v < prev, "{m}");
                prev = v;
            }
            let mut prev = f64::NEG_INFINITY;
            for &t in &[0.01, 0.02, 0.05] {
                let v = model_tail(&m, Side::Right, 0.3, t).unwrap().ln_value;
                assert!(v > prev, "{m}");
                prev = v;
            }
        }
    }

    #[test]
    fn scaling_data_indices() {
        let c = scaling_data(&ModelSpec::CarrWu(CarrWu::new(0.2, 1.5).unwrap()));
        assert_eq!(c.gamma.exponent, 1.0 / 1.5);
        assert_eq!(c.rv_index_left.eval(3.0), 1.0);
        assert!((c.rv_index_right.eval(2.0) - 8.0).abs() < 1e-12);
        let b = scaling_data(&ModelSpec::BlackScholes(BlackScholes::new(0.2).unwrap()));
        assert_eq!(b.limit_law, LimitLaw::Gaussian { sigma: 0.2 });
        assert!((b.gamma.gamma(0.04) - 0.2).abs() < 1e-15);
        let j = scaling_data(&ModelSpec::Merton(
            Merton::new(0.2, 0.01, 0.1, 0.3).unwrap(),
        ));
        assert!((j.rv_index_right.eval(1.0) - 1.0).abs() < 1e-15);
        let mut prev = 1.0;
        for i in 1..40 {
            let v = j.rv_index_right.eval(1.0 + 0.25 * i as f64);
            assert!(v >= prev);
            prev = v;
        }
    }
}
