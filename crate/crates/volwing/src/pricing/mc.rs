//! Monte Carlo prices with one counter-based random stream per path, so the
//! estimate depends only on `(seed, n_paths)` and not on the thread count.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use rayon::prelude::*;

use super::{check_t, PriceMethod, PriceResult};
use crate::error::{domain, Result};
use crate::models::stable::sample_stable;
use crate::models::ModelSpec;

pub const DEFAULT_HESTON_STEPS: usize = 256;
const CHUNK: usize = 8192;

/// The random stream of path `index` under `seed`.
pub fn path_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// One draw of `X_t`. Black-Scholes, Merton and Carr-Wu are sampled exactly;
/// Heston uses a full-truncation Euler scheme with `steps` steps.
pub fn sample_log_return<R: Rng + ?Sized>(m: &ModelSpec, t: f64, steps: usize, rng: &mut R) -> f64 {
    match m {
        ModelSpec::BlackScholes(b) => {
            let z: f64 = StandardNormal.sample(rng);
            let v = b.sigma * t.sqrt();
            -0.5 * v * v + v * z
        }
        ModelSpec::Merton(j) => {
            let lt = j.lambda * t;
            let n = if lt > 0.0 {
                Poisson::new(lt).map(|p| p.sample(rng)).unwrap_or(0.0) as usize
            } else {
                0
            };
            let (mean, var) = j.conditional(n, t);
            let z: f64 = StandardNormal.sample(rng);
            mean + var.sqrt() * z
        }
        ModelSpec::CarrWu(c) => c.mu() * t + c.scale(t) * sample_stable(rng, c.alpha),
        ModelSpec::Heston(h) => {
            let dt = t / steps as f64;
            let sq = dt.sqrt();
            let rc = (1.0 - h.rho * h.rho).max(0.0).sqrt();
            let mut x = 0.0;
            let mut v = h.v0;
            for _ in 0..steps {
                let z1: f64 = StandardNormal.sample(rng);
                let z2: f64 = StandardNormal.sample(rng);
                let vp = v.max(0.0);
                let sv = vp.sqrt() * sq;
                x += -0.5 * vp * dt + sv * z1;
                v += h.lambda * (h.theta - vp) * dt + h.eta * sv * (h.rho * z1 + rc * z2);
            }
            x
        }
    }
}

/// Call prices at several strikes from one set of paths.
pub fn mc_prices(
    m: &ModelSpec,
    kappas: &[f64],
    t: f64,
    n_paths: usize,
    seed: u64,
) -> Result<Vec<PriceResult>> {
    mc_prices_with_steps(m, kappas, t, n_paths, seed, DEFAULT_HESTON_STEPS)
}

pub fn mc_prices_with_steps(
    m: &ModelSpec,
    kappas: &[f64],
    t: f64,
    n_paths: usize,
    seed: u64,
    steps: usize,
) -> Result<Vec<PriceResult>> {
    check_t(t)?;
    if n_paths == 0 || steps == 0 {
        return Err(domain("need at least one path and one step"));
    }
    if kappas.iter().any(|k| !k.is_finite()) {
        return Err(domain("κ must be finite"));
    }
    let strikes: Vec<f64> = kappas.iter().map(|k| k.exp()).collect();
    let n_chunks = n_paths.div_ceil(CHUNK);
    // per chunk: (Σ payoff, Σ payoff²) for each strike
    let partial: Vec<Vec<(f64, f64)>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![(0.0, 0.0); strikes.len()];
            let start = c * CHUNK;
            let end = (start + CHUNK).min(n_paths);
            for i in start..end {
                let mut rng = path_rng(seed, i as u64);
                let s = sample_log_return(m, t, steps, &mut rng).exp();
                for (a, &k) in acc.iter_mut().zip(&strikes) {
                    let p = (s - k).max(0.0);
                    a.0 += p;
                    a.1 += p * p;
                }
            }
            acc
        })
        .collect();
    let n = n_paths as f64;
    let mut out = Vec::with_capacity(kappas.len());
    for (j, &kappa) in kappas.iter().enumerate() {
        let (mut s1, mut s2) = (0.0, 0.0);
        for chunk in &partial {
            s1 += chunk[j].0;
            s2 += chunk[j].1;
        }
        let mean = s1 / n;
        let var = if n_paths > 1 {
            ((s2 / n - mean * mean) * n / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        let se = (var / n).sqrt();
        let put = mean + kappa.exp_m1();
        let otm = if kappa >= 0.0 { mean } else { put };
        out.push(PriceResult {
            kappa,
            t,
            price: mean,
            put,
            ln_otm: otm.ln(),
            method: PriceMethod::MonteCarlo,
            abs_error_bound: 0.0,
            rel_error_bound: if otm > 0.0 { se / otm } else { f64::INFINITY },
            mc_std_error: Some(se),
            seed: Some(seed),
        });
    }
    Ok(out)
}

pub fn mc_price(
    m: &ModelSpec,
    kappa: f64,
    t: f64,
    n_paths: usize,
    seed: u64,
) -> Result<PriceResult> {
    Ok(mc_prices(m, &[kappa], t, n_paths, seed)?.remove(0))
}
