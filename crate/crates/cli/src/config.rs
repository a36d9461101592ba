use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, ValueEnum};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Problem {
    Oscillator,
    Coulomb,
    Anharmonic,
    General,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    ClosedForm,
    Aim,
    Perturbative,
    Direct,
    Oracle,
    Compare,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Table,
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Branch {
    #[default]
    Particle,
    Antiparticle,
}

fn enum_name<T: ValueEnum>(v: &T) -> String {
    v.to_possible_value()
        .expect("no skipped variants")
        .get_name()
        .to_string()
}

fn enum_parse<T: ValueEnum>(key: &str, s: &str) -> Result<T, CliError> {
    T::from_str(s, false).map_err(|_| CliError::Usage(format!("invalid value {s:?} for {key}")))
}

/// Every setting of a run. Unset fields take per-problem defaults.
///
/// Numeric physics parameters are kept as the decimal text given by the
/// user and parsed at the working precision, so a saved configuration
/// reloads bit-identically.
#[derive(Args, Clone, Debug, Default, PartialEq)]
pub struct RunConfig {
    /// Load settings from a key = value file; flags override it.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Write the effective settings to a key = value file.
    #[arg(long, value_name = "FILE")]
    pub save_config: Option<PathBuf>,

    /// Physical problem.
    #[arg(long, value_enum)]
    pub problem: Option<Problem>,
    /// Solution method.
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Working precision in decimal digits.
    #[arg(long)]
    pub precision: Option<u32>,
    /// Evaluation point of the quantization condition.
    #[arg(long)]
    pub x0: Option<String>,
    /// Iteration depth (or largest depth of a schedule).
    #[arg(long)]
    pub k_max: Option<usize>,
    /// Comma-separated iteration depths.
    #[arg(long, value_delimiter = ',')]
    pub k_schedule: Option<Vec<usize>>,
    /// Root search window.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
    pub bracket: Option<Vec<String>>,
    /// Rank of the root among those in the window (default: the state index).
    #[arg(long)]
    pub state_rank: Option<usize>,
    /// Order P of the γ-expansion.
    #[arg(long)]
    pub gamma_order: Option<usize>,
    /// Also tabulate G, H₊₁, H₋₁.
    #[arg(long)]
    pub components: bool,
    /// Report format (default: table).
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write the report here instead of stdout.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Agreement tolerance (trace classification, table cells).
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Decimals in table and CSV output (default: 6 for tables, full for CSV).
    #[arg(long)]
    pub decimals: Option<usize>,

    /// States: `3`, `0..3` (inclusive) or `0,2,5`.
    #[arg(long)]
    pub n: Option<String>,
    /// Total angular momentum.
    #[arg(long = "J")]
    pub j: Option<u32>,
    /// Oscillator `k = mω/ħ` with `m = ħ = c = 1`.
    #[arg(long)]
    pub k: Option<String>,
    /// Rest mass (oscillator and Coulomb).
    #[arg(long)]
    pub mass: Option<String>,
    /// Oscillator frequency.
    #[arg(long)]
    pub omega: Option<String>,
    /// Reduced Planck constant.
    #[arg(long)]
    pub hbar: Option<String>,
    /// Speed of light.
    #[arg(long)]
    pub c: Option<String>,
    /// Coulomb coupling `γ = αZ` with `m = ħ = c = 1`.
    #[arg(long = "alphaZ")]
    pub alpha_z: Option<String>,
    /// Nuclear charge, used with --alpha.
    #[arg(long = "Z")]
    pub z: Option<String>,
    /// Fine-structure constant, used with --Z.
    #[arg(long)]
    pub alpha: Option<String>,
    /// Sign of the oscillator energy.
    #[arg(long, value_enum)]
    pub branch: Option<Branch>,
    /// Anharmonic Gaussian parameter β.
    #[arg(long)]
    pub beta: Option<String>,
    /// General family parameter a.
    #[arg(long)]
    pub a: Option<String>,
    /// General family parameter b > 0.
    #[arg(long)]
    pub b: Option<String>,
    /// General family parameter m.
    #[arg(long)]
    pub m: Option<String>,
    /// General family power N >= -1.
    #[arg(long = "N", allow_negative_numbers = true)]
    pub big_n: Option<i32>,

    /// Which golden table to reproduce (1 or 2).
    #[arg(long)]
    pub table: Option<u8>,
    /// First grid point of a wavefunction table.
    #[arg(long)]
    pub r_min: Option<String>,
    /// Last grid point of a wavefunction table.
    #[arg(long)]
    pub r_max: Option<String>,
    /// Number of grid points of a wavefunction table.
    #[arg(long)]
    pub points: Option<usize>,
    /// Root scan intervals.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Comma-separated evaluation points for an x0 sensitivity scan.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub x0_scan: Option<Vec<String>>,
}

fn join<T: fmt::Display>(v: &[T], sep: &str) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(sep)
}

fn list<T: FromStr>(key: &str, s: &str, sep: char) -> Result<Vec<T>, CliError> {
    s.split(sep)
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse()
                .map_err(|_| CliError::Usage(format!("invalid entry {t:?} in {key}")))
        })
        .collect()
}

fn scalar<T: FromStr>(key: &str, s: &str) -> Result<T, CliError> {
    s.parse()
        .map_err(|_| CliError::Usage(format!("invalid value {s:?} for {key}")))
}

impl RunConfig {
    /// `key = value` lines in a fixed key order; unset fields are omitted.
    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                out.push_str(&format!("{k} = {v}\n"));
            }
        };
        put("problem", self.problem.as_ref().map(enum_name));
        put("mode", self.mode.as_ref().map(enum_name));
        put("precision", self.precision.map(|v| v.to_string()));
        put("x0", self.x0.clone());
        put("k_max", self.k_max.map(|v| v.to_string()));
        put("k_schedule", self.k_schedule.as_ref().map(|v| join(v, ",")));
        put("bracket", self.bracket.as_ref().map(|v| join(v, " ")));
        put("state_rank", self.state_rank.map(|v| v.to_string()));
        put("gamma_order", self.gamma_order.map(|v| v.to_string()));
        put("components", self.components.then(|| "true".to_string()));
        put("format", self.format.as_ref().map(enum_name));
        put("out", self.out.as_ref().map(|p| p.display().to_string()));
        put("tolerance", self.tolerance.map(|v| v.to_string()));
        put("decimals", self.decimals.map(|v| v.to_string()));
        put("n", self.n.clone());
        put("J", self.j.map(|v| v.to_string()));
        put("k", self.k.clone());
        put("mass", self.mass.clone());
        put("omega", self.omega.clone());
        put("hbar", self.hbar.clone());
        put("c", self.c.clone());
        put("alphaZ", self.alpha_z.clone());
        put("Z", self.z.clone());
        put("alpha", self.alpha.clone());
        put("branch", self.branch.as_ref().map(enum_name));
        put("beta", self.beta.clone());
        put("a", self.a.clone());
        put("b", self.b.clone());
        put("m", self.m.clone());
        put("N", self.big_n.map(|v| v.to_string()));
        put("table", self.table.map(|v| v.to_string()));
        put("r_min", self.r_min.clone());
        put("r_max", self.r_max.clone());
        put("points", self.points.map(|v| v.to_string()));
        put("grid", self.grid.map(|v| v.to_string()));
        put("x0_scan", self.x0_scan.as_ref().map(|v| join(v, ",")));
        out
    }

    /// Parses `key = value` lines; `#` starts a comment line.
    pub fn from_kv(text: &str) -> Result<Self, CliError> {
        let mut c = RunConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim().to_string()))
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", i + 1)))?;
            let v = value.as_str();
            match key {
                "problem" => c.problem = Some(enum_parse(key, v)?),
                "mode" => c.mode = Some(enum_parse(key, v)?),
                "precision" => c.precision = Some(scalar(key, v)?),
                "x0" => c.x0 = Some(value),
                "k_max" => c.k_max = Some(scalar(key, v)?),
                "k_schedule" => c.k_schedule = Some(list(key, v, ',')?),
                "bracket" => {
                    let parts: Vec<String> = v.split_whitespace().map(str::to_string).collect();
                    if parts.len() != 2 {
                        return Err(CliError::Usage("bracket needs two values".into()));
                    }
                    c.bracket = Some(parts);
                }
                "state_rank" => c.state_rank = Some(scalar(key, v)?),
                "gamma_order" => c.gamma_order = Some(scalar(key, v)?),
                "components" => c.components = scalar(key, v)?,
                "format" => c.format = Some(enum_parse(key, v)?),
                "out" => c.out = Some(PathBuf::from(v)),
                "tolerance" => c.tolerance = Some(scalar(key, v)?),
                "decimals" => c.decimals = Some(scalar(key, v)?),
                "n" => c.n = Some(value),
                "J" => c.j = Some(scalar(key, v)?),
                "k" => c.k = Some(value),
                "mass" => c.mass = Some(value),
                "omega" => c.omega = Some(value),
                "hbar" => c.hbar = Some(value),
                "c" => c.c = Some(value),
                "alphaZ" => c.alpha_z = Some(value),
                "Z" => c.z = Some(value),
                "alpha" => c.alpha = Some(value),
                "branch" => c.branch = Some(enum_parse(key, v)?),
                "beta" => c.beta = Some(value),
                "a" => c.a = Some(value),
                "b" => c.b = Some(value),
                "m" => c.m = Some(value),
                "N" => c.big_n = Some(scalar(key, v)?),
                "table" => c.table = Some(scalar(key, v)?),
                "r_min" => c.r_min = Some(value),
                "r_max" => c.r_max = Some(value),
                "points" => c.points = Some(scalar(key, v)?),
                "grid" => c.grid = Some(scalar(key, v)?),
                "x0_scan" => c.x0_scan = Some(list(key, v, ',')?),
                other => return Err(CliError::Usage(format!("unknown config key {other:?}"))),
            }
        }
        Ok(c)
    }

    /// Fields set in `self` win over those in `base`.
    pub fn over(self, base: RunConfig) -> RunConfig {
        macro_rules! pick {
            ($($f:ident),*) => {
                RunConfig {
                    config: self.config.or(base.config),
                    save_config: self.save_config.or(base.save_config),
                    components: self.components || base.components,
                    $($f: self.$f.or(base.$f),)*
                }
            };
        }
        pick!(
            problem,
            mode,
            precision,
            x0,
            k_max,
            k_schedule,
            bracket,
            state_rank,
            gamma_order,
            format,
            out,
            tolerance,
            decimals,
            n,
            j,
            k,
            mass,
            omega,
            hbar,
            c,
            alpha_z,
            z,
            alpha,
            branch,
            beta,
            a,
            b,
            m,
            big_n,
            table,
            r_min,
            r_max,
            points,
            grid,
            x0_scan
        )
    }

    /// Merges the file named by `--config` under the flags.
    pub fn resolve(self) -> Result<RunConfig, CliError> {
        match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
                Ok(self.over(RunConfig::from_kv(&text)?))
            }
            None => Ok(self),
        }
    }

    /// The `--n` selection as a list of indices.
    pub fn states(&self, default: usize) -> Result<Vec<usize>, CliError> {
        let Some(spec) = &self.n else {
            return Ok(vec![default]);
        };
        let spec = spec.trim();
        if let Some((lo, hi)) = spec.split_once("..") {
            let lo: usize = scalar("n", lo.trim())?;
            let hi: usize = scalar("n", hi.trim().trim_start_matches('='))?;
            if lo > hi {
                return Err(CliError::Usage(format!("empty state range {spec}")));
            }
            return Ok((lo..=hi).collect());
        }
        list("n", spec, ',')
    }
}
