use std::path::{Path, PathBuf};

use clap::Args;
use onsager_skeleton::NumericPolicy;
use serde::Deserialize;

/// Everything a run needs; file keys and command-line flags share these names.
#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<String>,
    pub n: Option<usize>,
    pub l: Option<Vec<usize>>,
    pub min_deg: Option<i64>,
    pub coeffs: Option<Vec<f64>>,
    pub sign: Option<i8>,
    pub p: Option<i64>,
    pub s: Option<Vec<f64>>,
    pub branch: Option<usize>,
    pub resolution: Option<usize>,
    pub points: Option<Vec<Vec<f64>>>,
    pub d: Option<usize>,
    pub k_max: Option<i64>,
    pub a: Option<Vec<f64>>,
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub policy: NumericPolicy,
}

/// Flag overrides; any flag given wins over the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// Local dimension N.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Chain lengths, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub l: Option<Vec<usize>>,
    /// Lowest power of z in the coupling polynomial.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub min_deg: Option<i64>,
    /// Coupling coefficients t_m from min_deg upwards.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub coeffs: Option<Vec<f64>>,
    /// Overall sign of the skeleton polynomial (+1 or -1).
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub sign: Option<i8>,
    /// Power of z in the skeleton polynomial.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub p: Option<i64>,
    /// Coefficients s_0..s_d of g.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub s: Option<Vec<f64>>,
    /// Charge branch of the odd-p fixed point.
    #[arg(long, global = true)]
    pub branch: Option<usize>,
    /// Simplex resolution for sweeps.
    #[arg(long, global = true)]
    pub resolution: Option<usize>,
    /// Largest truncation order D.
    #[arg(long, global = true)]
    pub d: Option<usize>,
    /// Largest generator index in algebra checks.
    #[arg(long, global = true)]
    pub k_max: Option<i64>,
    /// Disorder couplings, comma separated.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub a: Option<Vec<f64>>,
    /// Output file (default: stdout, or the output directory).
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

pub fn field_error(field: &str, msg: impl std::fmt::Display) -> ConfigError {
    ConfigError(format!("invalid config field `{field}`: {msg}"))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| ConfigError(format!("config {}: {e}", path.display())))
    }

    pub fn apply(&mut self, o: &Overrides) {
        macro_rules! take {
            ($($f:ident),*) => { $( if o.$f.is_some() { self.$f = o.$f.clone(); } )* };
        }
        take!(n, l, min_deg, coeffs, sign, p, s, branch, resolution, d, k_max, a, output);
    }

    pub fn n(&self) -> Result<usize, ConfigError> {
        let n = self.n.ok_or_else(|| field_error("n", "required"))?;
        if n < 2 {
            return Err(field_error("n", format!("N must be at least 2, got {n}")));
        }
        Ok(n)
    }

    /// Chain lengths, each checked against `L mod N = 0`.
    pub fn lengths(&self) -> Result<Vec<usize>, ConfigError> {
        let n = self.n()?;
        let ls = self.l.clone().ok_or_else(|| field_error("l", "required"))?;
        if ls.is_empty() {
            return Err(field_error("l", "empty list"));
        }
        for &l in &ls {
            if l < 2 || l % n != 0 {
                return Err(field_error("l", format!("L={l} must be a positive multiple of N={n}")));
            }
        }
        Ok(ls)
    }

    pub fn skeleton(&self) -> Result<(i8, i64, Vec<f64>), ConfigError> {
        let sign = self.sign.unwrap_or(1);
        if sign != 1 && sign != -1 {
            return Err(field_error("sign", format!("must be 1 or -1, got {sign}")));
        }
        let s = self.s.clone().ok_or_else(|| field_error("s", "required"))?;
        if s.is_empty() || s[0] == 0.0 || s.iter().any(|x| !x.is_finite()) {
            return Err(field_error("s", "needs finite entries with s_0 ≠ 0"));
        }
        Ok((sign, self.p.unwrap_or(0), s))
    }

    pub fn s_list(&self) -> Result<Vec<f64>, ConfigError> {
        let s = self.s.clone().ok_or_else(|| field_error("s", "required"))?;
        if s.is_empty() || s.iter().any(|x| !x.is_finite()) {
            return Err(field_error("s", "needs at least one finite entry"));
        }
        Ok(s)
    }

    pub fn polynomial(&self) -> Result<onsager_skeleton::laurent::LaurentPoly, ConfigError> {
        let c = self.coeffs.clone().ok_or_else(|| field_error("coeffs", "required"))?;
        onsager_skeleton::laurent::LaurentPoly::new(self.min_deg.unwrap_or(0), c).map_err(|e| field_error("coeffs", e))
    }
}
