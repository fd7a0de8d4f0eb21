//! Flat `key = value` experiment configuration.
//!
//! Sources are merged in order: config file, `--set` overrides, then the
//! dedicated `--tol`, `--seed` and `--out` flags.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use quasalg::models::spin::{Interaction, Range};

pub const KEYS: &[(&str, &str)] = &[
    ("d", "matrix size"),
    ("M", "weight exponents, comma separated (W = e^{-M})"),
    ("N", "grid size"),
    ("p", "L^p exponent, p >= 2"),
    ("Nsites", "spin chain length"),
    ("coupling", "ising | heisenberg"),
    ("range", "nearest | long"),
    ("alpha", "long-range decay exponent"),
    ("J", "coupling strength"),
    ("field", "uniform sigma^z field"),
    ("family_size", "number of sesquilinear forms"),
    ("tol", "verdict tolerance, > 0"),
    ("seed", "nonnegative integer seed"),
    ("t_grid", "times, comma separated"),
    ("lambda_list", "spectral parameters, comma separated"),
    ("n_max", "largest approximation index"),
    ("quad_step", "quadrature step, > 0"),
    ("output", "output directory"),
];

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("invalid value for `{key}`: {reason}")]
    Invalid { key: String, reason: String },
    #[error("{path}:{line}: expected `key = value`")]
    Syntax { path: PathBuf, line: usize },
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("unknown experiment `{0}` (see `quasalg list`)")]
    UnknownExperiment(String),
}

impl ConfigError {
    /// The offending key, when there is one.
    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::UnknownKey(k) | ConfigError::Invalid { key: k, .. } => Some(k),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub d: Option<usize>,
    pub exponents: Option<Vec<f64>>,
    pub grid: Option<usize>,
    pub p: Option<f64>,
    pub sites: Option<usize>,
    pub interaction: Option<Interaction>,
    pub range: Option<Range>,
    pub alpha: Option<f64>,
    pub j: Option<f64>,
    pub field: Option<f64>,
    pub family_size: Option<usize>,
    pub tol: Option<f64>,
    pub seed: u64,
    pub t_grid: Option<Vec<f64>>,
    pub lambda_list: Option<Vec<f64>>,
    pub n_max: Option<u64>,
    pub quad_step: Option<f64>,
    pub output: PathBuf,
    /// Raw values of every key that was set, for the report echo.
    raw: BTreeMap<String, String>,
    range_kind: Option<String>,
}

fn invalid(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.into(),
        reason: reason.into(),
    }
}

fn parse_real(key: &str, v: &str) -> Result<f64, ConfigError> {
    let x: f64 = v.parse().map_err(|_| invalid(key, format!("`{v}` is not a number")))?;
    if !x.is_finite() {
        return Err(invalid(key, "must be finite"));
    }
    Ok(x)
}

fn parse_positive(key: &str, v: &str) -> Result<f64, ConfigError> {
    let x = parse_real(key, v)?;
    if x <= 0.0 {
        return Err(invalid(key, format!("must be > 0, got {x}")));
    }
    Ok(x)
}

fn parse_count(key: &str, v: &str, min: usize) -> Result<usize, ConfigError> {
    let n: usize = v
        .parse()
        .map_err(|_| invalid(key, format!("`{v}` is not a nonnegative integer")))?;
    if n < min {
        return Err(invalid(key, format!("must be at least {min}")));
    }
    Ok(n)
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>, ConfigError> {
    let out: Vec<f64> = v
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_real(key, s))
        .collect::<Result<_, _>>()?;
    if out.is_empty() {
        return Err(invalid(key, "empty list"));
    }
    Ok(out)
}

impl ExperimentConfig {
    pub fn new(experiment: &str) -> Self {
        Self {
            experiment: experiment.into(),
            d: None,
            exponents: None,
            grid: None,
            p: None,
            sites: None,
            interaction: None,
            range: None,
            alpha: None,
            j: None,
            field: None,
            family_size: None,
            tol: None,
            seed: 0,
            t_grid: None,
            lambda_list: None,
            n_max: None,
            quad_step: None,
            output: PathBuf::from("out"),
            raw: BTreeMap::new(),
            range_kind: None,
        }
    }

    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let v = value.trim();
        match key {
            "d" => self.d = Some(parse_count(key, v, 1)?),
            "M" => self.exponents = Some(parse_list(key, v)?),
            "N" => self.grid = Some(parse_count(key, v, 4)?),
            "p" => {
                let p = parse_real(key, v)?;
                if p < 2.0 {
                    return Err(invalid(key, "only p >= 2 is supported"));
                }
                self.p = Some(p);
            }
            "Nsites" => self.sites = Some(parse_count(key, v, 2)?),
            "coupling" => {
                self.interaction = Some(match v.to_ascii_lowercase().as_str() {
                    "ising" => Interaction::Ising,
                    "heisenberg" => Interaction::Heisenberg,
                    _ => return Err(invalid(key, format!("`{v}` is neither ising nor heisenberg"))),
                })
            }
            "range" => match v.to_ascii_lowercase().as_str() {
                "nearest" | "long" => self.range_kind = Some(v.to_ascii_lowercase()),
                _ => return Err(invalid(key, format!("`{v}` is neither nearest nor long"))),
            },
            "alpha" => self.alpha = Some(parse_positive(key, v)?),
            "J" => self.j = Some(parse_real(key, v)?),
            "field" => self.field = Some(parse_real(key, v)?),
            "family_size" => self.family_size = Some(parse_count(key, v, 1)?),
            "tol" => self.tol = Some(parse_positive(key, v)?),
            "seed" => {
                self.seed = v
                    .parse()
                    .map_err(|_| invalid(key, format!("`{v}` is not a nonnegative integer")))?
            }
            "t_grid" => self.t_grid = Some(parse_list(key, v)?),
            "lambda_list" => {
                let l = parse_list(key, v)?;
                if l.contains(&0.0) {
                    return Err(invalid(key, "λ = 0 is not allowed"));
                }
                self.lambda_list = Some(l);
            }
            "n_max" => self.n_max = Some(parse_count(key, v, 2)? as u64),
            "quad_step" => self.quad_step = Some(parse_positive(key, v)?),
            "output" => self.output = PathBuf::from(v),
            _ => return Err(ConfigError::UnknownKey(key.into())),
        }
        self.raw.insert(key.into(), v.into());
        self.refresh_range();
        Ok(())
    }

    fn refresh_range(&mut self) {
        self.range = match self.range_kind.as_deref() {
            Some("nearest") => Some(Range::Nearest),
            Some(_) => Some(Range::LongRange {
                alpha: self.alpha.unwrap_or(2.0),
            }),
            None => self.alpha.map(|alpha| Range::LongRange { alpha }),
        };
    }

    /// Applies a `key=value` override.
    pub fn set_pair(&mut self, pair: &str) -> Result<(), ConfigError> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| invalid(pair.trim(), "expected key=value"))?;
        self.set(k.trim(), v)
    }

    /// Reads a flat config file; `#` starts a comment.
    pub fn load_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        self.apply_text(&text, path)
    }

    pub fn apply_text(&mut self, text: &str, origin: &Path) -> Result<(), ConfigError> {
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                path: origin.to_path_buf(),
                line: i + 1,
            })?;
            self.set(k.trim(), v)?;
        }
        Ok(())
    }

    /// Cross-key checks, run after all sources are merged.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if let (Some(d), Some(m)) = (self.d, &self.exponents) {
            if m.len() != d {
                return Err(invalid("M", format!("has {} entries but d = {d}", m.len())));
            }
        }
        if self.alpha.is_some() && self.range_kind.as_deref() == Some("nearest") {
            return Err(invalid("alpha", "only meaningful with range = long"));
        }
        Ok(())
    }

    /// `(key, value)` pairs that were set, in key order.
    pub fn echo(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = vec![
            ("experiment".into(), self.experiment.clone()),
            ("seed".into(), self.seed.to_string()),
        ];
        out.extend(self.raw.iter().filter(|(k, _)| k.as_str() != "seed").map(|(k, v)| (k.clone(), v.clone())));
        out
    }

    pub fn tol_or(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_file_text() {
        let mut c = ExperimentConfig::new("qubit-conjugation");
        c.apply_text("# demo\nd = 3\nM = 0, 0.5, 1 # weights\n\ntol=1e-6\n", Path::new("x.cfg"))
            .unwrap();
        assert_eq!(c.d, Some(3));
        assert_eq!(c.exponents, Some(vec![0.0, 0.5, 1.0]));
        assert_eq!(c.tol, Some(1e-6));
        c.validate().unwrap();
    }

    #[test]
    fn rejects_unknown_and_bad_values() {
        let mut c = ExperimentConfig::new("x");
        assert_eq!(c.set("colour", "red").unwrap_err().key(), Some("colour"));
        assert_eq!(c.set("tol", "-1").unwrap_err().key(), Some("tol"));
        assert_eq!(c.set("tol", "0").unwrap_err().key(), Some("tol"));
        assert_eq!(c.set("seed", "-3").unwrap_err().key(), Some("seed"));
        assert_eq!(c.set("lambda_list", "1,0").unwrap_err().key(), Some("lambda_list"));
        assert!(matches!(
            c.apply_text("d 3\n", Path::new("bad.cfg")),
            Err(ConfigError::Syntax { line: 1, .. })
        ));
    }

    #[test]
    fn later_sources_win() {
        let mut c = ExperimentConfig::new("x");
        c.apply_text("tol = 1e-3\nseed = 4\n", Path::new("a.cfg")).unwrap();
        c.set_pair("tol=1e-5").unwrap();
        assert_eq!(c.tol, Some(1e-5));
        assert_eq!(c.seed, 4);
        assert!(c.echo().contains(&("tol".into(), "1e-5".into())));
    }

    #[test]
    fn range_and_alpha() {
        let mut c = ExperimentConfig::new("spin-lattice-probe");
        c.set("range", "long").unwrap();
        assert_eq!(c.range, Some(Range::LongRange { alpha: 2.0 }));
        c.set("alpha", "3").unwrap();
        assert_eq!(c.range, Some(Range::LongRange { alpha: 3.0 }));
        c.set("range", "nearest").unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn mismatched_exponents() {
        let mut c = ExperimentConfig::new("x");
        c.set("d", "2").unwrap();
        c.set("M", "0,1,2").unwrap();
        assert_eq!(c.validate().unwrap_err().key(), Some("M"));
    }
}
