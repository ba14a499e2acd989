use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use volwing::asymptotics::FormulaId;
use volwing::blackscholes::{implied_vol, implied_vol_ln_otm};
use volwing::harness::{
    asymptotic_quote, exact_price, model_from_config, verify, Config, ExperimentOptions,
};
use volwing::models::{model_tail, ModelSpec, Side};
use volwing::pricing::PriceMethod;
use volwing::{Error, Result};

/// Implied volatility wing asymptotics and exact pricing oracles.
#[derive(Parser)]
#[command(name = "volwing", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct PricingArgs {
    /// Model config file, or inline `name:key=value,…` (e.g. `bs:sigma=0.2`).
    model: String,
    #[arg(long, allow_hyphen_values = true)]
    kappa: f64,
    #[arg(long)]
    t: f64,
    /// fourier, closed-sum, tail-integral or monte-carlo.
    #[arg(long)]
    method: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1_000_000)]
    paths: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Exact call and put price.
    Price(PricingArgs),
    /// Implied volatility of the exact model price.
    Impvol {
        #[command(flatten)]
        args: PricingArgs,
    },
    /// Black-Scholes implied volatility of a quoted call price.
    ImpvolQuote {
        #[arg(long, allow_hyphen_values = true)]
        kappa: f64,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        call: f64,
    },
    /// Tail probability P(X_t > κ) or P(X_t ≤ −κ).
    Tail {
        model: String,
        #[arg(long)]
        kappa: f64,
        #[arg(long)]
        t: f64,
        #[arg(long, default_value = "right")]
        side: String,
    },
    /// Asymptotic implied volatility from a named formula.
    Smile {
        model: String,
        #[arg(long, allow_hyphen_values = true)]
        kappa: f64,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        formula: String,
    },
    /// Run an experiment config and check its tolerances.
    Verify {
        config: PathBuf,
        /// Write the table here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_model(spec: &str) -> Result<ModelSpec> {
    let cfg = if Path::new(spec).is_file() {
        Config::parse(&std::fs::read_to_string(spec)?)?
    } else {
        Config::parse_inline(spec)?
    };
    model_from_config(&cfg)
}

fn options(a: &PricingArgs) -> Result<ExperimentOptions> {
    Ok(ExperimentOptions {
        method: a
            .method
            .as_deref()
            .map(str::parse::<PriceMethod>)
            .transpose()?,
        seed: a.seed,
        mc_paths: a.paths,
        ..ExperimentOptions::default()
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Price(a) => {
            let m = load_model(&a.model)?;
            let p = exact_price(&m, a.kappa, a.t, &options(&a)?)?;
            println!("model\t{m}");
            println!("method\t{}", p.method.as_str());
            println!("call\t{:.15e}", p.price);
            println!("put\t{:.15e}", p.put);
            println!("ln_otm\t{:.15e}", p.ln_otm);
            println!("rel_error_bound\t{:.3e}", p.rel_error_bound);
            if let Some(se) = p.mc_std_error {
                println!("mc_std_error\t{se:.3e}");
            }
        }
        Command::Impvol { args: a } => {
            let m = load_model(&a.model)?;
            let p = exact_price(&m, a.kappa, a.t, &options(&a)?)?;
            let q = implied_vol_ln_otm(a.kappa, a.t, p.ln_otm)?;
            println!("sigma\t{:.15e}", q.sigma);
            println!("total_vol\t{:.15e}", q.total_vol);
        }
        Command::ImpvolQuote { kappa, t, call } => {
            let q = implied_vol(kappa, t, call)?;
            println!("sigma\t{:.15e}", q.sigma);
        }
        Command::Tail {
            model,
            kappa,
            t,
            side,
        } => {
            let m = load_model(&model)?;
            let side: Side = side.parse()?;
            let e = model_tail(&m, side, kappa, t)?;
            println!("value\t{:.15e}", e.value);
            println!("ln_value\t{:.15e}", e.ln_value);
            println!("method\t{}", e.method.as_str());
            println!("abs_error_bound\t{:.3e}", e.abs_error_bound);
        }
        Command::Smile {
            model,
            kappa,
            t,
            formula,
        } => {
            let m = load_model(&model)?;
            let f: FormulaId = formula.parse()?;
            let needs_price = matches!(
                f,
                FormulaId::PriceOtm | FormulaId::PriceSmallStrike | FormulaId::PriceAtm
            );
            let ln_otm = if needs_price {
                Some(exact_price(&m, kappa, t, &ExperimentOptions::default())?.ln_otm)
            } else {
                None
            };
            let q = asymptotic_quote(&m, f, kappa, t, ln_otm)?;
            println!("sigma\t{:.15e}", q.value);
            println!("formula\t{}", q.formula);
            println!("regime\t{}", q.regime);
        }
        Command::Verify { config, out } => {
            let text = std::fs::read_to_string(&config)?;
            let v = verify(&text)?;
            match out {
                Some(path) => std::fs::write(path, &v.output)?,
                None => print!("{}", v.output),
            }
            let r = &v.report;
            eprintln!("model\t{}", r.meta.model);
            eprintln!("config_hash\t{}", r.meta.config_hash);
            if let Some(c) = r.convergence {
                eprintln!("slope\t{:.6}", c.slope);
                eprintln!("last_gap\t{:.6e}", c.last_gap);
            }
            eprintln!("closed_loop\t{:.3e}", v.closed_loop);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    // clap's own usage-error code (2) would collide with regime mismatch
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::RegimeMismatch(_) => 2,
                Error::Accuracy { .. } => 3,
                _ => 1,
            })
        }
    }
}
