//! Flat `key = value` run configuration.

use std::path::{Path, PathBuf};

use crate::analysis::{Axis, GridSpec, Param};
use crate::error::{Error, Result};
use crate::fockfield::{Injection, SqueezedFieldSpec, DEFAULT_WEIGHT_TOLERANCE};
use crate::reduced_state::{Family, InitialState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Keys accepted in a config file and as their flag equivalents.
pub const KEYS: &[&str] = &[
    "family",
    "alpha",
    "s",
    "tau",
    "injection",
    "n_max",
    "weight_tolerance",
    "x",
    "x_min",
    "x_max",
    "x_step",
    "y",
    "y_min",
    "y_max",
    "y_step",
    "output",
    "format",
    "threads",
    "seed",
    "count",
];

#[derive(Clone, Debug, Default, PartialEq)]
pub struct AxisConfig {
    pub param: Option<Param>,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub step: Option<f64>,
}

impl AxisConfig {
    fn build(&self, which: &str) -> Result<Axis> {
        let param = self
            .param
            .ok_or_else(|| Error::Config(format!("sweep needs '{which}' (s, tau or alpha)")))?;
        let (lo, hi) = param.range();
        let min = self.min.unwrap_or(lo);
        let max = self.max.unwrap_or(match param {
            Param::Tau => crate::analysis::DEFAULT_TAU_MAX,
            Param::S => crate::analysis::DEFAULT_S_MAX,
            Param::Alpha => hi,
        });
        let step = self.step.unwrap_or(param.default_step());
        Axis::range(param, min, max, step).map_err(|e| Error::Config(format!("{which} axis: {e}")))
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunConfig {
    pub family: Option<Family>,
    pub alpha: Option<f64>,
    pub s: Option<f64>,
    pub tau: Option<f64>,
    pub injection: Option<Injection>,
    pub n_max: Option<usize>,
    pub weight_tolerance: Option<f64>,
    pub x: AxisConfig,
    pub y: AxisConfig,
    pub output: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub threads: Option<usize>,
    pub seed: Option<u64>,
    pub count: Option<usize>,
}

fn bad(key: &str, value: &str, why: impl std::fmt::Display) -> Error {
    Error::Config(format!("invalid value '{value}' for '{key}': {why}"))
}

fn real(key: &str, value: &str) -> Result<f64> {
    let v: f64 = value.parse().map_err(|e| bad(key, value, e))?;
    if !v.is_finite() {
        return Err(bad(key, value, "not finite"));
    }
    Ok(v)
}

fn in_range(key: &str, value: &str, lo: f64, hi: f64) -> Result<f64> {
    let v = real(key, value)?;
    if v < lo || v > hi {
        return Err(bad(key, value, format!("must lie in [{lo}, {hi}]")));
    }
    Ok(v)
}

fn count(key: &str, value: &str, min: usize) -> Result<usize> {
    let v: usize = value.parse().map_err(|e| bad(key, value, e))?;
    if v < min {
        return Err(bad(key, value, format!("must be >= {min}")));
    }
    Ok(v)
}

impl RunConfig {
    /// Parse and store one setting. Values are range-checked here so that a
    /// malformed setting never reaches computation.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "family" => self.family = Some(value.parse().map_err(|e| bad(key, value, e))?),
            "alpha" => self.alpha = Some(in_range(key, value, 0.0, 1.0)?),
            "s" => self.s = Some(in_range(key, value, 0.0, f64::MAX)?),
            "tau" => self.tau = Some(in_range(key, value, 0.0, f64::MAX)?),
            "injection" => {
                self.injection = Some(if value == "full" {
                    Injection::Full
                } else {
                    let theta = real(key, value)
                        .map_err(|_| bad(key, value, "expected 'full' or a beam-splitter angle"))?;
                    Injection::Angle(theta)
                })
            }
            "n_max" => self.n_max = Some(count(key, value, 1)?),
            "weight_tolerance" => {
                let v = real(key, value)?;
                if !(v > 0.0 && v < 1.0) {
                    return Err(bad(key, value, "must lie in (0, 1)"));
                }
                self.weight_tolerance = Some(v);
            }
            "x" => self.x.param = Some(value.parse().map_err(|e| bad(key, value, e))?),
            "x_min" => self.x.min = Some(real(key, value)?),
            "x_max" => self.x.max = Some(real(key, value)?),
            "x_step" => self.x.step = Some(in_range(key, value, f64::MIN_POSITIVE, f64::MAX)?),
            "y" => self.y.param = Some(value.parse().map_err(|e| bad(key, value, e))?),
            "y_min" => self.y.min = Some(real(key, value)?),
            "y_max" => self.y.max = Some(real(key, value)?),
            "y_step" => self.y.step = Some(in_range(key, value, f64::MIN_POSITIVE, f64::MAX)?),
            "output" => {
                if value.is_empty() {
                    return Err(bad(key, value, "empty path"));
                }
                self.output = Some(PathBuf::from(value))
            }
            "format" => {
                self.format = Some(match value {
                    "csv" => OutputFormat::Csv,
                    "json" => OutputFormat::Json,
                    _ => return Err(bad(key, value, "expected csv or json")),
                })
            }
            "threads" => self.threads = Some(count(key, value, 1)?),
            "seed" => self.seed = Some(value.parse().map_err(|e| bad(key, value, e))?),
            "count" => self.count = Some(count(key, value, 1)?),
            _ => return Err(Error::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    pub fn parse_str(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value, got '{line}'", lineno + 1))
            })?;
            cfg.set(key.trim(), value)
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse_str(&text)
    }

    pub fn format(&self) -> OutputFormat {
        self.format.unwrap_or_default()
    }

    pub fn initial_state(&self) -> Result<InitialState> {
        let family = self.family.ok_or_else(|| Error::Config("missing 'family'".into()))?;
        match family {
            Family::Alpha => {
                let alpha = self
                    .alpha
                    .ok_or_else(|| Error::Config("the alpha family needs 'alpha'".into()))?;
                InitialState::new(family, Some(alpha))
            }
            Family::Phi2 => {
                if self.alpha.is_some() {
                    return Err(Error::Config("'alpha' does not apply to the phi2 family".into()));
                }
                InitialState::new(family, None)
            }
        }
    }

    pub fn field(&self) -> Result<SqueezedFieldSpec> {
        let s = self.s.ok_or_else(|| Error::Config("missing 's'".into()))?;
        self.field_at(s)
    }

    fn field_at(&self, s: f64) -> Result<SqueezedFieldSpec> {
        let field = SqueezedFieldSpec::with_tolerance(
            s,
            self.injection.unwrap_or(Injection::Full),
            self.weight_tolerance.unwrap_or(DEFAULT_WEIGHT_TOLERANCE),
        )
        .map_err(|e| Error::Config(e.to_string()))?;
        match self.n_max {
            Some(n) => field.with_n_max(n).map_err(|e| Error::Config(e.to_string())),
            None => Ok(field),
        }
    }

    /// Grid spec for `sweep`; every range is validated here.
    pub fn grid_spec(&self) -> Result<GridSpec> {
        let family = self.family.ok_or_else(|| Error::Config("missing 'family'".into()))?;
        let x = self.x.build("x")?;
        let y = self.y.build("y")?;
        let mut spec = GridSpec::new(family, x, y);
        let swept = |p: Param| spec.x.param == p || spec.y.param == p;
        let (sx, tx, ax) = (swept(Param::S), swept(Param::Tau), swept(Param::Alpha));
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| Error::Config(format!("'{name}' must be fixed when not swept")))
        };
        if !sx {
            spec.s = need(self.s, "s")?;
        }
        if !tx {
            spec.tau = need(self.tau, "tau")?;
        }
        match family {
            Family::Alpha if !ax => spec.alpha = need(self.alpha, "alpha")?,
            Family::Phi2 if self.alpha.is_some() => {
                return Err(Error::Config("'alpha' does not apply to the phi2 family".into()))
            }
            _ => {}
        }
        spec.injection = self.injection.unwrap_or(Injection::Full);
        spec.n_max = self.n_max;
        spec.weight_tolerance = self.weight_tolerance.unwrap_or(DEFAULT_WEIGHT_TOLERANCE);
        spec.validate().map_err(|e| Error::Config(e.to_string()))?;
        let s_max = [&spec.x, &spec.y]
            .into_iter()
            .find(|a| a.param == Param::S)
            .and_then(|a| a.values.last().copied())
            .unwrap_or(spec.s);
        self.field_at(s_max)?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_whitespace() {
        let cfg = RunConfig::parse_str(
            "# a run\nfamily = alpha\nalpha=0.5   # half\n\n s = 0.64\ntau=7.75\nformat = json\n",
        )
        .unwrap();
        assert_eq!(cfg.family, Some(Family::Alpha));
        assert_eq!(cfg.alpha, Some(0.5));
        assert_eq!(cfg.s, Some(0.64));
        assert_eq!(cfg.format(), OutputFormat::Json);
        assert_eq!(cfg.initial_state().unwrap(), InitialState::Alpha(0.5));
    }

    #[test]
    fn rejects_unknown_key() {
        let err = RunConfig::parse_str("familly = alpha\n").unwrap_err();
        assert!(err.to_string().contains("unknown key 'familly'"));
    }

    #[test]
    fn rejects_bad_values() {
        for text in [
            "alpha = 1.5",
            "s = -0.1",
            "tau = nan",
            "n_max = 0",
            "weight_tolerance = 0",
            "format = xml",
            "x = theta",
            "count = 0",
            "justakey",
        ] {
            assert!(RunConfig::parse_str(text).is_err(), "{text}");
        }
    }

    #[test]
    fn phi2_with_alpha_rejected() {
        let cfg = RunConfig::parse_str("family = phi2\nalpha = 0.3").unwrap();
        assert!(cfg.initial_state().is_err());
    }

    #[test]
    fn grid_spec_defaults() {
        let cfg = RunConfig::parse_str("family = alpha\nalpha = 1\nx = tau\ny = s\ny_max = 0.2\ny_step = 0.1")
            .unwrap();
        let spec = cfg.grid_spec().unwrap();
        assert_eq!(spec.x.len(), 321);
        assert_eq!(spec.y.values, vec![0.0, 0.1, 0.2]);
        assert_eq!(spec.alpha, 1.0);
    }

    #[test]
    fn grid_spec_out_of_range() {
        let cfg = RunConfig::parse_str("family = alpha\nalpha = 1\nx = tau\nx_max = 40\ny = s").unwrap();
        assert!(cfg.grid_spec().is_err());
        let cfg = RunConfig::parse_str("family = alpha\nalpha = 1\nx = tau\ny = s\ny_max = 1.5").unwrap();
        assert!(cfg.grid_spec().is_err());
        let cfg = RunConfig::parse_str("family = alpha\nx = tau\ny = s").unwrap();
        assert!(cfg.grid_spec().is_err());
    }
}
