//! Plain-text `key = value` configuration, one entry per line, `#` starts a
//! comment. Keys are unique; values stay as text until a typed getter asks.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::models::{BlackScholes, CarrWu, Heston, Merton, ModelSpec};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Config {
    entries: Vec<(String, String)>,
    index: BTreeMap<String, usize>,
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Config::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                config_err(format!(
                    "line {}: expected 'key = value', got '{line}'",
                    n + 1
                ))
            })?;
            let (k, v) = (k.trim().to_string(), v.trim().to_string());
            if k.is_empty() {
                return Err(config_err(format!("line {}: empty key", n + 1)));
            }
            if cfg.index.contains_key(&k) {
                return Err(config_err(format!("line {}: duplicate key '{k}'", n + 1)));
            }
            cfg.index.insert(k.clone(), cfg.entries.len());
            cfg.entries.push((k, v));
        }
        Ok(cfg)
    }

    /// Inline form `name:key=value,key=value`, as accepted on the command line.
    pub fn parse_inline(spec: &str) -> Result<Self> {
        let (name, rest) = spec.split_once(':').unwrap_or((spec, ""));
        let mut text = format!("model = {}\n", name.trim());
        for kv in rest.split(',').filter(|s| !s.trim().is_empty()) {
            text.push_str(kv);
            text.push('\n');
        }
        Config::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.index.get(key).map(|&i| self.entries[i].1.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| config_err(format!("missing key '{key}'")))
    }

    pub fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| config_err(format!("cannot parse '{v}' for key '{key}'"))),
        }
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        self.parsed(key)?
            .ok_or_else(|| config_err(format!("missing key '{key}'")))
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.parsed(key)?.unwrap_or(default))
    }

    /// Comma-separated list of numbers.
    pub fn f64_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        let Some(v) = self.get(key) else {
            return Ok(None);
        };
        v.split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| config_err(format!("cannot parse '{s}' in list '{key}'")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }

    /// Entries in file order, comments and blank lines removed.
    pub fn canonical(&self) -> String {
        self.entries
            .iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }
}

/// Builds a model from `model = …` and its parameter keys.
pub fn model_from_config(cfg: &Config) -> Result<ModelSpec> {
    let name = cfg.require("model")?;
    match name {
        "black-scholes" | "bs" => Ok(ModelSpec::BlackScholes(BlackScholes::new(
            cfg.f64("sigma")?,
        )?)),
        "carr-wu" | "cw" => Ok(ModelSpec::CarrWu(CarrWu::new(
            cfg.f64("sigma")?,
            cfg.f64("alpha")?,
        )?)),
        "merton" => {
            let m = Merton::new(
                cfg.f64("sigma")?,
                cfg.f64("lambda")?,
                cfg.f64("alpha_j")?,
                cfg.f64("delta")?,
            )?;
            match cfg.parsed::<f64>("mu")? {
                Some(mu) => Ok(ModelSpec::Merton(m.with_mu(mu))),
                None => Ok(ModelSpec::Merton(m)),
            }
        }
        "heston" => Ok(ModelSpec::Heston(Heston::new(
            cfg.f64("lambda")?,
            cfg.f64("theta")?,
            cfg.f64("eta")?,
            cfg.f64("v0")?,
            cfg.f64("rho")?,
        )?)),
        other => Err(config_err(format!("unknown model '{other}'"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_blank_lines_and_lists() {
        let c =
            Config::parse("# header\nmodel = merton  # trailing\n\nts = 0.3, 0.2 ,0.1\n").unwrap();
        assert_eq!(c.get("model"), Some("merton"));
        assert_eq!(c.f64_list("ts").unwrap().unwrap(), vec![0.3, 0.2, 0.1]);
        assert_eq!(c.canonical(), "model=merton\nts=0.3, 0.2 ,0.1\n");
    }

    #[test]
    fn malformed_input_is_rejected() {
        assert!(matches!(
            Config::parse("no equals sign"),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            Config::parse("a = 1\na = 2"),
            Err(Error::Config(_))
        ));
        let c = Config::parse("sigma = abc").unwrap();
        assert!(c.f64("sigma").is_err());
        assert!(c.f64("missing").is_err());
    }

    #[test]
    fn models_from_text() {
        let c = Config::parse_inline("merton:sigma=0.2,lambda=0.01,alpha_j=0.1,delta=0.3").unwrap();
        let ModelSpec::Merton(m) = model_from_config(&c).unwrap() else {
            panic!()
        };
        assert!(m.is_risk_neutral());
        let c = Config::parse_inline("merton:sigma=0.2,lambda=0.01,alpha_j=0.1,delta=0.3,mu=0.5")
            .unwrap();
        let ModelSpec::Merton(m) = model_from_config(&c).unwrap() else {
            panic!()
        };
        assert_eq!(m.mu, 0.5);
        let c =
            Config::parse_inline("heston:lambda=1.5,theta=0.04,eta=0.5,v0=0.04,rho=-0.7").unwrap();
        assert!(matches!(
            model_from_config(&c).unwrap(),
            ModelSpec::Heston(_)
        ));
        assert!(model_from_config(&Config::parse_inline("vasicek:a=1").unwrap()).is_err());
        assert!(model_from_config(&Config::parse_inline("bs:sigma=-1").unwrap()).is_err());
    }
}
