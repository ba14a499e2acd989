//! Experiment harness: runs a pricer and an asymptotic formula along a family
//! of `(κ, t)` points, compares the two implied volatilities, fits the trend
//! of the gap and writes the rows as CSV or TSV.

mod config;

pub use config::{model_from_config, Config};

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::asymptotics::{
    carrwu_smile_with, heston_smile, merton_k2, merton_smile, tail_to_vol_left, tail_to_vol_right,
    typical_vol, AsymptoticQuote, FormulaId, HestonBranch,
};
use crate::blackscholes::{
    bs_ln_otm_price, implied_vol_ln_otm, price_to_vol_asymptotic_ln, PriceBranch,
};
use crate::error::{domain, regime, Error, Result};
use crate::models::{model_tail, scaling_data, ModelSpec, Side};
use crate::pricing::{
    check_t, fourier_call, mc_price, merton_series_price_auto, tail_integral_price, PriceMethod,
    PriceResult,
};

/// Rows whose pricer error bound exceeds this fraction of the price are capped.
pub const DEFAULT_CAP_REL: f64 = 0.1;
pub const DEFAULT_MC_PATHS: usize = 1_000_000;
pub const CLOSED_LOOP_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathKind {
    FixedTKappaGrid,
    FixedKappaTGrid,
    Curve,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeTag {
    RightAtypical,
    LeftAtypical,
    Typical,
    Atm,
}

macro_rules! text_enum {
    ($ty:ident { $($v:ident => $s:literal),* $(,)? }) => {
        impl $ty {
            pub fn as_str(&self) -> &'static str {
                match self { $($ty::$v => $s),* }
            }
        }
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
        impl FromStr for $ty {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($s => Ok($ty::$v),)*
                    _ => Err(Error::Config(format!("unknown {} '{s}'", stringify!($ty)))),
                }
            }
        }
    };
}

text_enum!(PathKind {
    FixedTKappaGrid => "fixed-t-kappa-grid",
    FixedKappaTGrid => "fixed-kappa-t-grid",
    Curve => "curve",
});

text_enum!(RegimeTag {
    RightAtypical => "right-atypical",
    LeftAtypical => "left-atypical",
    Typical => "typical",
    Atm => "atm",
});

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Tsv,
}

text_enum!(OutputFormat { Csv => "csv", Tsv => "tsv" });

/// An explicit, ordered list of `(κ, t)` points approaching a limit.
#[derive(Debug, Clone, PartialEq)]
pub struct PathFamily {
    pub kind: PathKind,
    pub points: Vec<(f64, f64)>,
    pub regime_tag: RegimeTag,
    /// Exponent `e` when the family is `κ = a·t^e`.
    pub scaling_exponent: Option<f64>,
}

impl PathFamily {
    /// Checks that points are finite, `t > 0`, and ordered in the limit
    /// direction: `|κ|` increasing at fixed `t`, `t` decreasing otherwise.
    pub fn new(
        kind: PathKind,
        points: Vec<(f64, f64)>,
        regime_tag: RegimeTag,
        scaling_exponent: Option<f64>,
    ) -> Result<Self> {
        if points.is_empty() {
            return Err(domain("path family has no points"));
        }
        for &(k, t) in &points {
            if !k.is_finite() || !(t > 0.0) || !t.is_finite() {
                return Err(domain(format!("bad point (κ = {k}, t = {t})")));
            }
        }
        for w in points.windows(2) {
            let ((k0, t0), (k1, t1)) = (w[0], w[1]);
            let ok = match kind {
                PathKind::FixedTKappaGrid => {
                    t0 == t1 && k1.abs() > k0.abs() && k0.signum() == k1.signum()
                }
                PathKind::FixedKappaTGrid => k0 == k1 && t1 < t0,
                PathKind::Curve => t1 < t0,
            };
            if !ok {
                return Err(domain(format!(
                    "points ({k0}, {t0}) → ({k1}, {t1}) break the ordering of a {kind} family"
                )));
            }
        }
        Ok(PathFamily {
            kind,
            points,
            regime_tag,
            scaling_exponent,
        })
    }

    pub fn kappa_grid(t: f64, kappas: &[f64], tag: RegimeTag) -> Result<Self> {
        PathFamily::new(
            PathKind::FixedTKappaGrid,
            kappas.iter().map(|&k| (k, t)).collect(),
            tag,
            None,
        )
    }

    pub fn t_grid(kappa: f64, ts: &[f64], tag: RegimeTag) -> Result<Self> {
        PathFamily::new(
            PathKind::FixedKappaTGrid,
            ts.iter().map(|&t| (kappa, t)).collect(),
            tag,
            None,
        )
    }

    /// `κ = scale·t^exponent`.
    pub fn power_curve(scale: f64, exponent: f64, ts: &[f64], tag: RegimeTag) -> Result<Self> {
        let pts = ts.iter().map(|&t| (scale * t.powf(exponent), t)).collect();
        PathFamily::new(PathKind::Curve, pts, tag, Some(exponent))
    }

    /// `κ = scale·√(log(1/t))`, the natural Merton scale.
    pub fn merton_k2_curve(scale: f64, ts: &[f64], tag: RegimeTag) -> Result<Self> {
        let pts = ts
            .iter()
            .map(|&t| Ok((scale * merton_k2(t)?, t)))
            .collect::<Result<Vec<_>>>()?;
        PathFamily::new(PathKind::Curve, pts, tag, None)
    }

    /// The variable that tends to zero along the family.
    pub fn limit_variable(&self, kappa: f64, t: f64) -> f64 {
        match self.kind {
            PathKind::FixedTKappaGrid => 1.0 / kappa.abs(),
            PathKind::FixedKappaTGrid | PathKind::Curve => t,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportRow {
    pub kappa: f64,
    pub t: f64,
    /// Out-of-the-money price (call for `κ ≥ 0`, put for `κ < 0`).
    pub exact_price: f64,
    pub ln_exact_price: f64,
    pub exact_vol: f64,
    pub asym_vol: f64,
    /// `exact_vol / asym_vol`.
    pub ratio: f64,
    pub formula: FormulaId,
    /// Set when the pricer could not certify 10% accuracy; such rows are
    /// excluded from trend fits.
    pub capped: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportMeta {
    pub model: String,
    pub formula: FormulaId,
    pub method: Option<PriceMethod>,
    pub seed: Option<u64>,
    pub config_hash: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Convergence {
    pub slope: f64,
    pub last_gap: f64,
    pub points_used: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub path: PathFamily,
    pub rows: Vec<ReportRow>,
    pub convergence: Option<Convergence>,
    pub meta: ReportMeta,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentOptions {
    /// Pricer override; by default the closed form for Black-Scholes, the
    /// Poisson mixture for Merton and Fourier inversion otherwise.
    pub method: Option<PriceMethod>,
    pub seed: u64,
    pub mc_paths: usize,
    pub cap_rel: f64,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        ExperimentOptions {
            method: None,
            seed: 0,
            mc_paths: DEFAULT_MC_PATHS,
            cap_rel: DEFAULT_CAP_REL,
        }
    }
}

/// Exact price at one point with the requested (or default) method.
pub fn exact_price(
    m: &ModelSpec,
    kappa: f64,
    t: f64,
    opts: &ExperimentOptions,
) -> Result<PriceResult> {
    let method = opts.method.unwrap_or(match m {
        ModelSpec::Merton(_) | ModelSpec::BlackScholes(_) => PriceMethod::ClosedSum,
        _ => PriceMethod::Fourier,
    });
    match method {
        PriceMethod::Fourier => fourier_call(m, kappa, t),
        PriceMethod::TailIntegral => tail_integral_price(m, kappa, t),
        PriceMethod::MonteCarlo => mc_price(m, kappa, t, opts.mc_paths, opts.seed),
        PriceMethod::ClosedSum => match m {
            ModelSpec::Merton(j) => merton_series_price_auto(j, kappa, t),
            ModelSpec::BlackScholes(b) => {
                check_t(t)?;
                let ln = bs_ln_otm_price(kappa, b.sigma * t.sqrt())?;
                Ok(PriceResult::from_otm(
                    kappa,
                    t,
                    ln,
                    PriceMethod::ClosedSum,
                    1e-14,
                ))
            }
            _ => Err(domain(format!("no closed-form sum for {}", m.name()))),
        },
    }
}

fn side_of(kappa: f64) -> Side {
    if kappa >= 0.0 {
        Side::Right
    } else {
        Side::Left
    }
}

/// The model and regime a formula needs, checked before any computation.
pub fn check_regime(m: &ModelSpec, path: &PathFamily, formula: FormulaId) -> Result<()> {
    use FormulaId::*;
    let model_ok = match formula {
        CwRight | CwLeft | CwTypical => matches!(m, ModelSpec::CarrWu(_)),
        MertonFlat | MertonLow | MertonMid | MertonHigh => matches!(m, ModelSpec::Merton(_)),
        HestonFixedT | HestonSmallT | HestonConjecture => matches!(m, ModelSpec::Heston(_)),
        _ => true,
    };
    if !model_ok {
        return Err(regime(format!(
            "formula {formula} does not apply to {}",
            m.name()
        )));
    }
    let tags: &[RegimeTag] = match formula {
        RightTailGeneral | RightTailSpecial | CwRight | MertonFlat | MertonLow | MertonMid
        | MertonHigh | HestonFixedT | HestonSmallT | HestonConjecture => {
            &[RegimeTag::RightAtypical]
        }
        LeftTailGeneral | LeftTailSpecial | CwLeft => &[RegimeTag::LeftAtypical],
        PriceOtm => &[RegimeTag::RightAtypical, RegimeTag::LeftAtypical],
        PriceSmallStrike | Typical | CwTypical => &[RegimeTag::Typical],
        PriceAtm => &[RegimeTag::Atm],
    };
    if !tags.contains(&path.regime_tag) {
        return Err(regime(format!(
            "formula {formula} needs a {:?} family, got {}",
            tags, path.regime_tag
        )));
    }
    let bad = path.points.iter().find(|&&(k, _)| match path.regime_tag {
        RegimeTag::RightAtypical => k <= 0.0,
        RegimeTag::LeftAtypical => k >= 0.0,
        RegimeTag::Atm => k != 0.0,
        RegimeTag::Typical => formula == PriceSmallStrike && k == 0.0,
    });
    if let Some(&(k, t)) = bad {
        return Err(regime(format!(
            "point (κ = {k}, t = {t}) is outside the {} regime of {formula}",
            path.regime_tag
        )));
    }
    Ok(())
}

/// Asymptotic implied volatility of `formula` at one point. Tail-based and
/// price-based formulas are fed the exact tail or price.
pub fn asymptotic_quote(
    m: &ModelSpec,
    formula: FormulaId,
    kappa: f64,
    t: f64,
    ln_otm: Option<f64>,
) -> Result<AsymptoticQuote> {
    use FormulaId::*;
    let k = kappa.abs();
    let need_price = || ln_otm.ok_or_else(|| domain(format!("{formula} needs the exact price")));
    match (formula, m) {
        (RightTailGeneral | RightTailSpecial, _) => {
            let tail = model_tail(m, Side::Right, k, t)?;
            tail_to_vol_right(k, t, tail.ln_value, formula == RightTailSpecial)
        }
        (LeftTailGeneral | LeftTailSpecial, _) => {
            let tail = model_tail(m, Side::Left, k, t)?;
            tail_to_vol_left(k, t, tail.ln_value, formula == LeftTailSpecial)
        }
        (PriceOtm, _) => price_to_vol_asymptotic_ln(kappa, t, need_price()?, PriceBranch::Otm),
        (PriceSmallStrike, _) => {
            price_to_vol_asymptotic_ln(kappa, t, need_price()?, PriceBranch::SmallStrike)
        }
        (PriceAtm, _) => price_to_vol_asymptotic_ln(kappa, t, need_price()?, PriceBranch::Atm),
        (Typical, _) => typical_vol(m, k / scaling_data(m).gamma.gamma(t), t, side_of(kappa)),
        // branch forced by the requested formula
        (CwRight, ModelSpec::CarrWu(c)) => carrwu_smile_with(c, k, t, Side::Right, 0.0),
        (CwLeft, ModelSpec::CarrWu(c)) => carrwu_smile_with(c, k, t, Side::Left, 0.0),
        (CwTypical, ModelSpec::CarrWu(c)) => {
            carrwu_smile_with(c, k, t, side_of(kappa), f64::INFINITY)
        }
        (MertonFlat | MertonLow | MertonMid | MertonHigh, ModelSpec::Merton(j)) => {
            merton_smile(j, kappa, t)
        }
        (HestonFixedT, ModelSpec::Heston(h)) => heston_smile(h, kappa, t, HestonBranch::FixedT),
        (HestonSmallT, ModelSpec::Heston(h)) => heston_smile(h, kappa, t, HestonBranch::SmallT),
        (HestonConjecture, ModelSpec::Heston(h)) => {
            heston_smile(h, kappa, t, HestonBranch::Conjecture)
        }
        _ => Err(regime(format!(
            "formula {formula} does not apply to {}",
            m.name()
        ))),
    }
}

fn config_hash(text: &str) -> String {
    Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn describe(
    m: &ModelSpec,
    path: &PathFamily,
    formula: FormulaId,
    opts: &ExperimentOptions,
) -> String {
    let mut s = format!(
        "model={m}\nformula={formula}\npath={}\nregime={}\nmethod={:?}\nseed={}\npaths={}\ncap={:e}\n",
        path.kind, path.regime_tag, opts.method, opts.seed, opts.mc_paths, opts.cap_rel
    );
    for (k, t) in &path.points {
        s.push_str(&format!("{k:e},{t:e}\n"));
    }
    s
}

pub fn run_experiment(
    m: &ModelSpec,
    path: &PathFamily,
    formula: FormulaId,
) -> Result<ExperimentReport> {
    run_experiment_with(m, path, formula, &ExperimentOptions::default())
}

/// Prices every point, inverts to implied volatility and evaluates the
/// formula. Rows run in parallel; the report keeps the declared order.
pub fn run_experiment_with(
    m: &ModelSpec,
    path: &PathFamily,
    formula: FormulaId,
    opts: &ExperimentOptions,
) -> Result<ExperimentReport> {
    check_regime(m, path, formula)?;
    let rows = path
        .points
        .par_iter()
        .map(|&(kappa, t)| compute_row(m, formula, kappa, t, opts))
        .collect::<Result<Vec<_>>>()?;
    let meta = ReportMeta {
        model: m.to_string(),
        formula,
        method: opts.method,
        seed: matches!(opts.method, Some(PriceMethod::MonteCarlo)).then_some(opts.seed),
        config_hash: config_hash(&describe(m, path, formula, opts)),
    };
    let mut report = ExperimentReport {
        path: path.clone(),
        rows,
        convergence: None,
        meta,
    };
    report.convergence = convergence_metric(&report).ok();
    Ok(report)
}

fn compute_row(
    m: &ModelSpec,
    formula: FormulaId,
    kappa: f64,
    t: f64,
    opts: &ExperimentOptions,
) -> Result<ReportRow> {
    let priced = match exact_price(m, kappa, t, opts) {
        Ok(p) if p.rel_error_bound <= opts.cap_rel && p.ln_otm.is_finite() => Some(p),
        Ok(_) | Err(Error::Accuracy { .. }) => None,
        Err(e) => return Err(e),
    };
    let exact = match priced {
        Some(p) => match implied_vol_ln_otm(kappa, t, p.ln_otm) {
            Ok(q) => Some((p.ln_otm, q.sigma)),
            Err(Error::Accuracy { .. }) => None,
            Err(e) => return Err(e),
        },
        None => None,
    };
    let quote = asymptotic_quote(m, formula, kappa, t, exact.map(|e| e.0)).or_else(|e| {
        match (e, exact) {
            // price-based formulas cannot run on a capped row
            (Error::Domain(_), None) => {
                Ok(AsymptoticQuote::new(f64::NAN, formula, "", kappa, t, None))
            }
            (e, _) => Err(e),
        }
    })?;
    let (ln_p, vol) = exact.unwrap_or((f64::NAN, f64::NAN));
    Ok(ReportRow {
        kappa,
        t,
        exact_price: ln_p.exp(),
        ln_exact_price: ln_p,
        exact_vol: vol,
        asym_vol: quote.value,
        ratio: vol / quote.value,
        formula: quote.formula,
        capped: exact.is_none(),
    })
}

/// Least-squares slope of `log|ratio − 1|` against the log of the limit
/// variable, and the gap `|ratio − 1|` at the last usable point. Capped rows,
/// non-finite ratios and ratios exactly 1 are dropped.
pub fn convergence_metric(report: &ExperimentReport) -> Result<Convergence> {
    if report.rows.len() < 3 {
        return Err(Error::Degenerate(format!(
            "need at least 3 rows, got {}",
            report.rows.len()
        )));
    }
    let pts: Vec<(f64, f64)> = report
        .rows
        .iter()
        .filter(|r| !r.capped && r.ratio.is_finite() && r.ratio != 1.0)
        .map(|r| {
            (
                report.path.limit_variable(r.kappa, r.t).ln(),
                (r.ratio - 1.0).abs().ln(),
            )
        })
        .collect();
    if pts.len() < 2 {
        return Err(Error::Degenerate(format!(
            "only {} usable rows for a trend fit",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Degenerate("limit variable does not vary".into()));
    }
    Ok(Convergence {
        slope: sxy / sxx,
        last_gap: pts[pts.len() - 1].1.exp(),
        points_used: pts.len(),
    })
}

/// Result of [`uniform_region_search`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformRegion {
    pub m: f64,
    /// Largest `|ratio − 1|` over the accepted grid.
    pub worst_gap: f64,
    pub points_checked: usize,
}

/// Smallest `M` among `candidates` for which every grid point
/// `κ = ±M ρ γ_t` (`t ∈ ts`, `ρ ∈ multipliers`) has `|ratio − 1| ≤ eps`.
/// Candidates are tried in increasing order; a capped row disqualifies its
/// candidate. `None` when no candidate qualifies.
#[allow(clippy::too_many_arguments)]
pub fn uniform_region_search(
    m: &ModelSpec,
    formula: FormulaId,
    tag: RegimeTag,
    ts: &[f64],
    multipliers: &[f64],
    candidates: &[f64],
    eps: f64,
    opts: &ExperimentOptions,
) -> Result<Option<UniformRegion>> {
    let sign = match tag {
        RegimeTag::RightAtypical => 1.0,
        RegimeTag::LeftAtypical => -1.0,
        other => {
            return Err(regime(format!(
                "uniform region needs an atypical family, got {other}"
            )))
        }
    };
    if !(eps > 0.0) || multipliers.is_empty() || ts.is_empty() {
        return Err(domain("need eps > 0 and a non-empty grid"));
    }
    let gamma = scaling_data(m).gamma;
    let mut sorted = candidates.to_vec();
    sorted.sort_by(f64::total_cmp);
    for &big_m in &sorted {
        let mut worst: f64 = 0.0;
        let mut n = 0;
        let mut ok = true;
        for &t in ts {
            let kappas: Vec<f64> = multipliers
                .iter()
                .map(|r| sign * big_m * r * gamma.gamma(t))
                .collect();
            let path = PathFamily::kappa_grid(t, &kappas, tag)?;
            let report = run_experiment_with(m, &path, formula, opts)?;
            for r in &report.rows {
                n += 1;
                let gap = (r.ratio - 1.0).abs();
                if r.capped || !(gap <= eps) {
                    ok = false;
                }
                worst = worst.max(gap);
            }
            if !ok {
                break;
            }
        }
        if ok {
            return Ok(Some(UniformRegion {
                m: big_m,
                worst_gap: worst,
                points_checked: n,
            }));
        }
    }
    Ok(None)
}

pub const COLUMNS: [&str; 8] = [
    "kappa",
    "t",
    "exact_price",
    "exact_vol",
    "asym_vol",
    "ratio",
    "formula",
    "capped",
];

/// Header plus one line per row, numbers with 12 significant digits.
pub fn emit(report: &ExperimentReport, format: OutputFormat) -> String {
    let sep = match format {
        OutputFormat::Csv => ",",
        OutputFormat::Tsv => "\t",
    };
    let mut out = COLUMNS.join(sep);
    out.push('\n');
    for r in &report.rows {
        let nums = [
            r.kappa,
            r.t,
            r.exact_price,
            r.exact_vol,
            r.asym_vol,
            r.ratio,
        ];
        let mut fields: Vec<String> = nums.iter().map(|x| format!("{x:.11e}")).collect();
        fields.push(r.formula.to_string());
        fields.push(r.capped.to_string());
        out.push_str(&fields.join(sep));
        out.push('\n');
    }
    out
}

/// Largest relative mismatch between `log` of each row's price and the
/// Black-Scholes price at its implied volatility. Capped rows are skipped.
pub fn closed_loop_residual(report: &ExperimentReport) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for r in report.rows.iter().filter(|r| !r.capped) {
        let back = bs_ln_otm_price(r.kappa, r.exact_vol * r.t.sqrt())?;
        worst = worst.max((back - r.ln_exact_price).abs() / r.ln_exact_price.abs().max(1.0));
    }
    Ok(worst)
}

/// A complete experiment as read from a config file.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub model: ModelSpec,
    pub path: PathFamily,
    pub formula: FormulaId,
    pub options: ExperimentOptions,
    pub format: OutputFormat,
    pub max_gap: Option<f64>,
    pub min_slope: Option<f64>,
    pub config_hash: String,
}

fn grid(cfg: &Config, list: &str, prefix: &str) -> Result<Vec<f64>> {
    if let Some(v) = cfg.f64_list(list)? {
        return Ok(v);
    }
    let from = cfg.f64(&format!("{prefix}_from"))?;
    let to = cfg.f64(&format!("{prefix}_to"))?;
    let n: usize = cfg.parsed(&format!("{prefix}_count"))?.unwrap_or(5);
    if n < 2 || !(from > 0.0 && to > 0.0) {
        return Err(Error::Config(format!(
            "geometric grid '{prefix}' needs positive ends and at least 2 points"
        )));
    }
    let r = (to / from).ln() / (n - 1) as f64;
    Ok((0..n).map(|i| from * (r * i as f64).exp()).collect())
}

impl Experiment {
    pub fn from_config(cfg: &Config) -> Result<Self> {
        let model = model_from_config(cfg)?;
        let formula: FormulaId = cfg
            .require("formula")?
            .parse()
            .map_err(|e: Error| Error::Config(e.to_string()))?;
        let tag: RegimeTag = cfg.require("regime")?.parse()?;
        let kind: PathKind = cfg.require("path")?.parse()?;
        let path = match kind {
            PathKind::FixedTKappaGrid => {
                PathFamily::kappa_grid(cfg.f64("t")?, &grid(cfg, "kappas", "kappa")?, tag)?
            }
            PathKind::FixedKappaTGrid => {
                PathFamily::t_grid(cfg.f64("kappa")?, &grid(cfg, "ts", "t")?, tag)?
            }
            PathKind::Curve => {
                let ts = grid(cfg, "ts", "t")?;
                let scale = cfg.f64_or("curve_scale", 1.0)?;
                match cfg.get("curve").unwrap_or("power") {
                    "power" => {
                        PathFamily::power_curve(scale, cfg.f64("curve_exponent")?, &ts, tag)?
                    }
                    "merton-k2" => PathFamily::merton_k2_curve(scale, &ts, tag)?,
                    other => return Err(Error::Config(format!("unknown curve '{other}'"))),
                }
            }
        };
        let options = ExperimentOptions {
            method: cfg
                .parsed::<String>("method")?
                .map(|s| s.parse())
                .transpose()?,
            seed: cfg.parsed("seed")?.unwrap_or(0),
            mc_paths: cfg.parsed("mc_paths")?.unwrap_or(DEFAULT_MC_PATHS),
            cap_rel: cfg.f64_or("cap_rel", DEFAULT_CAP_REL)?,
        };
        Ok(Experiment {
            model,
            path,
            formula,
            options,
            format: cfg.get("format").unwrap_or("csv").parse()?,
            max_gap: cfg.parsed("max_gap")?,
            min_slope: cfg.parsed("min_slope")?,
            config_hash: config_hash(&cfg.canonical()),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOutcome {
    pub report: ExperimentReport,
    pub output: String,
    pub closed_loop: f64,
}

/// Runs a config end to end and checks its tolerances: the closed loop
/// always, `max_gap` and `min_slope` when given.
pub fn verify(config_text: &str) -> Result<VerifyOutcome> {
    let cfg = Config::parse(config_text)?;
    let exp = Experiment::from_config(&cfg)?;
    let mut report = run_experiment_with(&exp.model, &exp.path, exp.formula, &exp.options)?;
    report.meta.config_hash = exp.config_hash.clone();
    let closed_loop = closed_loop_residual(&report)?;
    if closed_loop > CLOSED_LOOP_TOL {
        return Err(Error::Accuracy {
            message: "implied vol does not reproduce the price".into(),
            achieved: closed_loop,
        });
    }
    if exp.max_gap.is_some() || exp.min_slope.is_some() {
        let c = convergence_metric(&report)?;
        if let Some(g) = exp.max_gap {
            if !(c.last_gap <= g) {
                return Err(Error::Accuracy {
                    message: format!("final gap above {g}"),
                    achieved: c.last_gap,
                });
            }
        }
        if let Some(s) = exp.min_slope {
            if !(c.slope >= s) {
                return Err(Error::Accuracy {
                    message: format!("convergence slope below {s}"),
                    achieved: c.slope,
                });
            }
        }
    }
    let output = emit(&report, exp.format);
    Ok(VerifyOutcome {
        report,
        output,
        closed_loop,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{BlackScholes, CarrWu};

    fn synthetic(f: impl Fn(f64) -> f64) -> ExperimentReport {
        let ts = [0.1, 0.05, 0.02, 0.01, 0.005];
        let path = PathFamily::t_grid(1.0, &ts, RegimeTag::RightAtypical).unwrap();
        let rows = ts
            .iter()
            .map(|&t| ReportRow {
                kappa: 1.0,
                t,
                exact_price: 0.0,
                ln_exact_price: 0.0,
                exact_vol: 0.0,
                asym_vol: 0.0,
                ratio: 1.0 + f(t),
                formula: FormulaId::PriceOtm,
                capped: false,
            })
            .collect();
        let meta = ReportMeta {
            model: "synthetic".into(),
            formula: FormulaId::PriceOtm,
            method: None,
            seed: None,
            config_hash: String::new(),
        };
        ExperimentReport {
            path,
            rows,
            convergence: None,
            meta,
        }
    }

    #[test]
    fn slope_of_synthetic_rows() {
        let c = convergence_metric(&synthetic(|x| x)).unwrap();
        assert!((c.slope - 1.0).abs() < 1e-6);
        assert!((c.last_gap - 0.005).abs() < 1e-15);
        let c = convergence_metric(&synthetic(|x| x * x)).unwrap();
        assert!((c.slope - 2.0).abs() < 1e-6);
        assert!(matches!(
            convergence_metric(&synthetic(|_| 0.0)),
            Err(Error::Degenerate(_))
        ));
        let mut short = synthetic(|x| x);
        short.rows.truncate(2);
        assert!(matches!(
            convergence_metric(&short),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn ordering_is_enforced() {
        assert!(PathFamily::t_grid(1.0, &[0.1, 0.2], RegimeTag::RightAtypical).is_err());
        assert!(PathFamily::kappa_grid(1.0, &[2.0, 1.0], RegimeTag::RightAtypical).is_err());
        assert!(PathFamily::kappa_grid(1.0, &[-1.0, -2.0], RegimeTag::LeftAtypical).is_ok());
        assert!(PathFamily::kappa_grid(1.0, &[], RegimeTag::RightAtypical).is_err());
    }

    #[test]
    fn black_scholes_sanity_path() {
        let m = ModelSpec::BlackScholes(BlackScholes::new(0.2).unwrap());
        let path = PathFamily::kappa_grid(1.0, &[2.0, 4.0, 8.0], RegimeTag::RightAtypical).unwrap();
        let r = run_experiment(&m, &path, FormulaId::RightTailGeneral).unwrap();
        for row in &r.rows {
            assert!((row.exact_vol - 0.2).abs() < 1e-10);
        }
        let gaps: Vec<f64> = r.rows.iter().map(|x| (x.ratio - 1.0).abs()).collect();
        assert!(gaps[2] < gaps[1] && gaps[1] < gaps[0], "{gaps:?}");
        assert!(closed_loop_residual(&r).unwrap() < CLOSED_LOOP_TOL);
    }

    #[test]
    fn regime_mismatch_before_computation() {
        let m = ModelSpec::BlackScholes(BlackScholes::new(0.2).unwrap());
        let path = PathFamily::kappa_grid(1.0, &[2.0, 4.0], RegimeTag::RightAtypical).unwrap();
        assert!(matches!(
            run_experiment(&m, &path, FormulaId::CwRight),
            Err(Error::RegimeMismatch(_))
        ));
        assert!(matches!(
            run_experiment(&m, &path, FormulaId::PriceAtm),
            Err(Error::RegimeMismatch(_))
        ));
        let bad = PathFamily::kappa_grid(1.0, &[-2.0, -4.0], RegimeTag::RightAtypical).unwrap();
        assert!(matches!(
            run_experiment(&m, &bad, FormulaId::RightTailGeneral),
            Err(Error::RegimeMismatch(_))
        ));
    }

    #[test]
    fn carr_wu_gap_shrinks_along_kappa() {
        let m = ModelSpec::CarrWu(CarrWu::new(0.2, 1.5).unwrap());
        let path =
            PathFamily::kappa_grid(0.25, &[0.5, 1.0, 2.0, 4.0], RegimeTag::RightAtypical).unwrap();
        let r = run_experiment(&m, &path, FormulaId::CwRight).unwrap();
        let gaps: Vec<f64> = r.rows.iter().map(|x| (x.ratio - 1.0).abs()).collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
    }

    #[test]
    fn uniform_region_shrinks_with_tolerance() {
        let m = ModelSpec::CarrWu(CarrWu::new(0.2, 1.5).unwrap());
        let opts = ExperimentOptions::default();
        let search = |eps| {
            uniform_region_search(
                &m,
                FormulaId::CwRight,
                RegimeTag::RightAtypical,
                &[0.1, 0.03, 0.01],
                &[1.0, 2.0],
                &[16.0, 1.0, 8.0, 2.0, 4.0],
                eps,
                &opts,
            )
            .unwrap()
        };
        let mut prev = 0.0;
        for eps in [0.05, 0.02, 0.01] {
            let r = search(eps).expect("some candidate qualifies");
            assert!(r.worst_gap <= eps && r.points_checked == 6);
            assert!(r.m >= prev);
            prev = r.m;
        }
        assert!(prev > 1.0);
        assert_eq!(search(1e-4), None);
        let bad = uniform_region_search(
            &m,
            FormulaId::CwRight,
            RegimeTag::Typical,
            &[0.1],
            &[1.0],
            &[1.0],
            0.1,
            &opts,
        );
        assert!(matches!(bad, Err(Error::RegimeMismatch(_))));
    }

    #[test]
    fn emit_layout() {
        let mut r = synthetic(|x| x);
        r.rows.clear();
        assert_eq!(
            emit(&r, OutputFormat::Csv),
            format!("{}\n", COLUMNS.join(","))
        );
        let mut r = synthetic(|x| x);
        r.rows.truncate(1);
        r.rows[0].exact_price = 0.123456789012345;
        let text = emit(&r, OutputFormat::Tsv);
        let line = text.lines().nth(1).unwrap();
        let f: Vec<&str> = line.split('\t').collect();
        assert_eq!(f.len(), COLUMNS.len());
        assert_eq!(f[2], "1.23456789012e-1");
        assert_eq!(f[2].parse::<f64>().unwrap(), 0.123456789012);
        assert_eq!(f[5].parse::<f64>().unwrap(), 1.1);
        assert_eq!(f[6], "price-otm");
    }

    #[test]
    fn verify_is_deterministic() {
        let cfg = "model = merton\nsigma = 0.2\nlambda = 0.01\nalpha_j = 0.1\ndelta = 0.3\n\
                   path = curve\ncurve = merton-k2\nts = 0.3, 0.1, 0.03\nregime = right-atypical\n\
                   formula = merton-mid\n";
        let a = verify(cfg).unwrap();
        let b = verify(cfg).unwrap();
        assert_eq!(a.output, b.output);
        assert_eq!(a.report.meta.config_hash, b.report.meta.config_hash);
        assert_eq!(a.report.rows.len(), 3);
    }
}
