//! Heston moment explosion: explosion time `T*(p)`, explosion moment `p*(t)`,
//! the small-time constant `C(ρ, η)`, and the rate function `Λ` with its
//! Legendre transform.

use super::Heston;
use crate::error::{domain, Error, Result};
use crate::numeric::brent;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HestonExplosion {
    pub p: f64,
    pub t_star: f64,
    pub chi: f64,
    pub disc: f64,
    pub c_const: f64,
}

impl Heston {
    pub fn chi(&self, p: f64) -> f64 {
        self.rho * self.eta * p - self.lambda
    }

    pub fn disc(&self, p: f64) -> f64 {
        let chi = self.chi(p);
        chi * chi - self.eta * self.eta * (p * p - p)
    }

    /// `C(ρ, η)`, the limit of `p·T*(p)`; infinite for `ρ = −1`.
    pub fn explosion_constant(&self) -> f64 {
        let (rho, eta) = (self.rho, self.eta);
        if rho <= -1.0 {
            return f64::INFINITY;
        }
        if rho >= 1.0 {
            return 2.0 / eta;
        }
        let r = (1.0 - rho * rho).sqrt();
        // atan2 folds in the +π shift for ρ < 0 and the ρ = 0 limit
        2.0 / (eta * r) * r.atan2(rho)
    }
}

/// Explosion time for any `p` outside `[0, 1]`; `None` on the `χ = 0, Δ ≥ 0` boundary.
pub(crate) fn explosion_time_raw(m: &Heston, p: f64) -> Option<f64> {
    let chi = m.chi(p);
    let disc = m.disc(p);
    if disc >= 0.0 {
        if chi < 0.0 {
            Some(f64::INFINITY)
        } else if chi > 0.0 {
            let s = disc.sqrt();
            if s == 0.0 {
                Some(2.0 / chi)
            } else if s >= chi {
                Some(f64::INFINITY)
            } else {
                // (1/s)·log((χ+s)/(χ−s)) = 2·atanh(s/χ)/s
                Some(2.0 * (s / chi).atanh() / s)
            }
        } else {
            None
        }
    } else {
        let w = (-disc).sqrt();
        Some(2.0 * w.atan2(chi) / w)
    }
}

pub fn heston_explosion_time(m: &Heston, p: f64) -> Result<HestonExplosion> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(domain(format!(
            "explosion time needs finite p > 1, got {p}"
        )));
    }
    let chi = m.chi(p);
    let disc = m.disc(p);
    let t_star = if m.rho <= -1.0 {
        f64::INFINITY
    } else {
        explosion_time_raw(m, p)
            .ok_or_else(|| Error::Boundary(format!("χ(p) = 0 with Δ(p) = {disc} ≥ 0 at p = {p}")))?
    };
    Ok(HestonExplosion {
        p,
        t_star,
        chi,
        disc,
        c_const: m.explosion_constant(),
    })
}

/// `p*(t)`: the moment of order `p > 1` that explodes exactly at time `t`.
pub fn heston_explosion_moment(m: &Heston, t: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(domain(format!("maturity must be positive, got {t}")));
    }
    if m.rho <= -1.0 {
        return Ok(f64::INFINITY);
    }
    explosion_root(m, t, 1.0)
}

/// `q*(t) < 0`: the negative moment exploding at time `t`, `−∞` if none.
pub fn heston_negative_explosion_moment(m: &Heston, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(domain("maturity must be positive"));
    }
    explosion_root(m, t, -1.0)
}

fn t_star_or_inf(m: &Heston, p: f64) -> f64 {
    explosion_time_raw(m, p).unwrap_or(f64::INFINITY)
}

/// Root of `T*(p) = t` on the side `p > 1` (`dir = 1`) or `p < 0` (`dir = −1`).
fn explosion_root(m: &Heston, t: f64, dir: f64) -> Result<f64> {
    let base = if dir > 0.0 { 1.0 } else { 0.0 };
    let at = |x: f64| base + dir * x;
    // walk outwards until the explosion time drops below t
    let mut hi = 1.0;
    let mut lo = 0.0;
    let mut found = false;
    for _ in 0..200 {
        if t_star_or_inf(m, at(hi)) < t {
            found = true;
            break;
        }
        lo = hi;
        hi *= 2.0;
    }
    if !found {
        return Ok(dir * f64::INFINITY);
    }
    let g = |x: f64| {
        let ts = t_star_or_inf(m, at(x));
        if ts.is_infinite() {
            1e300
        } else {
            ts.ln() - t.ln()
        }
    };
    if lo == 0.0 {
        // the explosion time diverges as p → 1⁺ (or 0⁻); shrink the bracket
        lo = hi;
        for _ in 0..2000 {
            lo *= 0.5;
            if g(lo) > 0.0 {
                break;
            }
        }
    }
    let x = brent(g, lo, hi, 1e-15 * hi, 400)?;
    Ok(at(x))
}

/// `x·cot(x)`, continuous at 0.
fn x_cot_x(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 3.0
    } else {
        x / x.tan()
    }
}

/// Small-time limiting cumulant `Λ(p)`; `+∞` at and beyond `C`.
pub fn heston_lambda(m: &Heston, p: f64) -> f64 {
    if p == 0.0 {
        return 0.0;
    }
    let c = m.explosion_constant();
    if p >= c || p < 0.0 {
        return f64::INFINITY;
    }
    let r = (1.0 - m.rho * m.rho).max(0.0).sqrt();
    let x = 0.5 * m.eta * p * r;
    let h = 2.0 * x_cot_x(x) - m.rho * m.eta * p;
    if h <= 0.0 {
        return f64::INFINITY;
    }
    m.v0 * p * p / h
}

fn heston_lambda_prime(m: &Heston, p: f64) -> f64 {
    let r = (1.0 - m.rho * m.rho).max(0.0).sqrt();
    let x = 0.5 * m.eta * p * r;
    let h = 2.0 * x_cot_x(x) - m.rho * m.eta * p;
    // d/dx (x cot x) = cot x − x/sin²x, ≈ −2x/3 near 0
    let dxcot = if x.abs() < 1e-4 {
        -2.0 * x / 3.0
    } else {
        1.0 / x.tan() - x / (x.sin() * x.sin())
    };
    let dh = 2.0 * dxcot * 0.5 * m.eta * r - m.rho * m.eta;
    m.v0 * (2.0 * p * h - p * p * dh) / (h * h)
}

/// Legendre transform `Λ*(κ) = sup_p (pκ − Λ(p))`, `κ ≥ 0`.
pub fn heston_rate_function(m: &Heston, kappa: f64) -> Result<f64> {
    if !(kappa >= 0.0) || !kappa.is_finite() {
        return Err(domain(format!("rate function needs κ ≥ 0, got {kappa}")));
    }
    if kappa == 0.0 {
        return Ok(0.0);
    }
    let c = m.explosion_constant();
    let p = if c.is_finite() {
        // Λ' increases from 0 to +∞ on [0, C)
        let g = |p: f64| heston_lambda_prime(m, p) - kappa;
        let mut hi = c * (1.0 - 1e-3);
        let mut step = 1e-3;
        while g(hi) < 0.0 {
            step *= 1e-2;
            hi = c * (1.0 - step);
            if step < 1e-300 {
                return Err(Error::Numerical("rate function bracket failed".into()));
            }
        }
        brent(g, 0.0, hi, 1e-15 * c, 400)?
    } else {
        // no explosion: sup may be infinite once κ exceeds the linear growth of Λ
        let slope = m.v0 / m.eta;
        if kappa >= slope {
            return Ok(f64::INFINITY);
        }
        let g = |p: f64| heston_lambda_prime(m, p) - kappa;
        let mut hi = 1.0;
        while g(hi) < 0.0 {
            hi *= 2.0;
            if hi > 1e300 {
                return Ok(f64::INFINITY);
            }
        }
        brent(g, 0.0, hi, 1e-15 * hi, 400)?
    };
    Ok(p * kappa - heston_lambda(m, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn model(rho: f64) -> Heston {
        Heston::new(1.5, 0.04, 0.5, 0.04, rho).unwrap()
    }

    #[test]
    fn rho_minus_one_never_explodes() {
        let m = model(-1.0);
        assert!(heston_explosion_time(&m, 3.0).unwrap().t_star.is_infinite());
        assert!(heston_explosion_moment(&m, 0.1).unwrap().is_infinite());
        assert!(m.explosion_constant().is_infinite());
    }

    #[test]
    fn special_case_rho_one_eta_two_lambda() {
        let m = Heston::new(0.5, 0.04, 1.0, 0.04, 1.0).unwrap();
        for &p in &[1.5, 3.0, 10.0] {
            let ts = heston_explosion_time(&m, p).unwrap().t_star;
            let want = (1.0 / 0.5) * (1.0 + 2.0 * 0.5 / (1.0 * p - 2.0 * 0.5)).ln();
            assert!((ts / want - 1.0).abs() < 1e-12, "p={p}: {ts} vs {want}");
        }
    }

    #[test]
    fn constant_limits() {
        let m = model(0.0);
        assert!((m.explosion_constant() - PI / 0.5).abs() < 1e-12);
        let m = model(1.0);
        assert!((m.explosion_constant() - 2.0 / 0.5).abs() < 1e-12);
        let a = model(1e-9).explosion_constant();
        let b = model(-1e-9).explosion_constant();
        assert!((a - b).abs() < 1e-6);
    }

    #[test]
    fn moment_round_trip() {
        for &rho in &[-0.7, -0.3, 0.0, 0.4, 0.9, 1.0] {
            let m = model(rho);
            for &p0 in &[1.2, 2.0, 7.5, 100.0] {
                let ts = heston_explosion_time(&m, p0).unwrap().t_star;
                if ts.is_finite() {
                    let p = heston_explosion_moment(&m, ts).unwrap();
                    assert!((p / p0 - 1.0).abs() < 1e-10, "rho={rho}, p0={p0}: {p}");
                }
            }
        }
    }

    #[test]
    fn explosion_time_decreasing() {
        let m = model(-0.5);
        let mut prev = f64::INFINITY;
        assert!(heston_explosion_time(&m, 50.0).unwrap().t_star.is_finite());
        for i in 1..200 {
            let p = 1.0 + 0.25 * i as f64;
            let ts = heston_explosion_time(&m, p).unwrap().t_star;
            // infinite near p = 1 when ρ < 0, then strictly decreasing
            assert!(
                ts < prev || (ts.is_infinite() && prev.is_infinite()),
                "p={p}"
            );
            prev = ts;
        }
    }

    #[test]
    fn boundary_case_only_inside_unit_interval() {
        // χ(p) = 0 forces Δ(p) = −η²(p² − p), which is ≥ 0 only for p ∈ [0, 1]
        let m = Heston::new(0.5, 0.04, 1.0, 0.04, 1.0).unwrap();
        assert!(explosion_time_raw(&m, 0.5).is_none());
        assert!(heston_explosion_time(&m, 1.0).is_err());
    }

    #[test]
    fn lambda_and_rate_function() {
        let m = model(-0.5);
        assert_eq!(heston_lambda(&m, 0.0), 0.0);
        let c = m.explosion_constant();
        assert!(heston_lambda(&m, c).is_infinite());
        // derivative check
        for &p in &[0.3, 1.0, 0.9 * c] {
            let h = 1e-6;
            let num = (heston_lambda(&m, p + h) - heston_lambda(&m, p - h)) / (2.0 * h);
            assert!((num / heston_lambda_prime(&m, p) - 1.0).abs() < 1e-6);
        }
        let mut prev = 0.0;
        for &k in &[10.0, 100.0, 1000.0] {
            let r = heston_rate_function(&m, k).unwrap() / (c * k);
            let gap = (r - 1.0).abs();
            if prev > 0.0 {
                assert!(gap < prev);
            }
            prev = gap;
        }
        assert!(prev < 0.05);
        let ks: Vec<f64> = (1..40).map(|i| 0.05 * i as f64).collect();
        let vals: Vec<f64> = ks
            .iter()
            .map(|&k| heston_rate_function(&m, k).unwrap())
            .collect();
        for i in 1..vals.len() - 1 {
            assert!(vals[i] <= 0.5 * (vals[i - 1] + vals[i + 1]) + 1e-12);
        }
    }

    #[test]
    fn small_time_moment_asymptotics() {
        let m = model(0.0);
        let t = 1e-6;
        let p = heston_explosion_moment(&m, t).unwrap();
        assert!((p * t / (PI / 0.5) - 1.0).abs() < 1e-3);
        let m = model(1.0);
        let p = heston_explosion_moment(&m, t).unwrap();
        assert!((p * t / (2.0 / 0.5) - 1.0).abs() < 1e-2);
    }
}
