//! Run settings (flags over config file over defaults), the synthetic-panel
//! config file, and the ground-truth export.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use clap::Args;
use cryptofactor_core::synth::{FactorPlant, LogNormal};
use cryptofactor_core::{Factor, FactorSpec, GroundTruth, ReturnConvention, SynthConfig, WindowSpec};
use serde::{Deserialize, Deserializer};

use crate::error::{read_text, write_text, Error, Result};
use crate::legacy::matrix_text;

/// Window, roster and file settings shared by `backtest`, `indexes` and
/// `turnover`. Every field can come from a flag or from the TOML file named by
/// `--config`; flags win.
#[derive(Debug, Clone, Default, PartialEq, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSettings {
    /// Directory holding the aggregated cr.*.txt files [default: .]
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Length of the selection period in days [default: 365]
    #[arg(long)]
    pub days: Option<usize>,
    /// Days skipped before the regression period [default: 0]
    #[arg(long)]
    pub back: Option<usize>,
    /// Regression period length in days [default: days]
    #[arg(long)]
    pub lookback: Option<usize>,
    /// Padding added to the selection period [default: 20]
    #[arg(long)]
    pub d_r: Option<usize>,
    /// Volume averaging window(s); a comma list sweeps [default: 20]
    #[arg(long, value_delimiter = ',')]
    #[serde(default, deserialize_with = "one_or_many")]
    pub d_v: Option<Vec<usize>>,
    /// High-low volatility window(s); a comma list sweeps [default: 20]
    #[arg(long, value_delimiter = ',')]
    #[serde(default, deserialize_with = "one_or_many")]
    pub d_i: Option<Vec<usize>>,
    /// Comma-separated factors from int, cap, mom, mom1..mom4, hlv, vol, mnbl
    /// [default: int,cap,mom,hlv,vol]
    #[arg(long)]
    pub roster: Option<String>,
    /// open-to-close or close-to-close [default: open-to-close]
    #[arg(long)]
    pub convention: Option<String>,
    /// File of slugs to drop, one per line
    #[arg(long)]
    pub exclusions: Option<PathBuf>,
    /// Split table file, `builtin` or `none` [default: builtin]
    #[arg(long)]
    pub splits: Option<String>,
    /// Output directory (indexes) [default: .]
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Write full-precision factor returns and statistics with this path prefix
    #[arg(long)]
    pub dump: Option<PathBuf>,
    /// Also render SVG charts (indexes)
    #[arg(long)]
    #[serde(default)]
    pub svg: bool,
    /// Report assets with a run of identical closes at least this long
    #[arg(long, num_args = 0..=1, default_missing_value = "30")]
    pub stale_report: Option<usize>,
}

fn one_or_many<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Vec<usize>>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(usize),
        Many(Vec<usize>),
    }
    Ok(Some(match OneOrMany::deserialize(d)? {
        OneOrMany::One(v) => vec![v],
        OneOrMany::Many(v) => v,
    }))
}

impl RunSettings {
    pub fn from_toml(text: &str, file: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Format(format!("{file}: {e}")))
    }

    /// Fields set here take precedence over `other`.
    pub fn or(self, other: RunSettings) -> RunSettings {
        RunSettings {
            input: self.input.or(other.input),
            days: self.days.or(other.days),
            back: self.back.or(other.back),
            lookback: self.lookback.or(other.lookback),
            d_r: self.d_r.or(other.d_r),
            d_v: self.d_v.or(other.d_v),
            d_i: self.d_i.or(other.d_i),
            roster: self.roster.or(other.roster),
            convention: self.convention.or(other.convention),
            exclusions: self.exclusions.or(other.exclusions),
            splits: self.splits.or(other.splits),
            output: self.output.or(other.output),
            dump: self.dump.or(other.dump),
            svg: self.svg || other.svg,
            stale_report: self.stale_report.or(other.stale_report),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SplitChoice {
    Builtin,
    Disabled,
    File(PathBuf),
}

/// Fully resolved run settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input: PathBuf,
    /// Window of the first sweep point.
    pub window: WindowSpec,
    pub d_v: Vec<usize>,
    pub d_hlv: Vec<usize>,
    pub roster: Vec<Factor>,
    pub convention: ReturnConvention,
    pub exclusions: Option<PathBuf>,
    pub splits: SplitChoice,
    pub output: PathBuf,
    pub dump: Option<PathBuf>,
    pub svg: bool,
    pub stale_threshold: Option<usize>,
}

impl RunConfig {
    pub fn resolve(s: RunSettings) -> Result<Self> {
        let days = s.days.unwrap_or(365);
        let d_v = s.d_v.unwrap_or_else(|| vec![20]);
        let d_hlv = s.d_i.unwrap_or_else(|| vec![20]);
        if d_v.is_empty() || d_hlv.is_empty() {
            return Err(Error::Format("--d-v and --d-i need at least one value".into()));
        }
        let roster = FactorSpec::parse(s.roster.as_deref().unwrap_or("int,cap,mom,hlv,vol"), d_v[0], d_hlv[0])?
            .roster()
            .to_vec();
        let convention = match s.convention {
            Some(c) => c.parse()?,
            None => ReturnConvention::default(),
        };
        let splits = match s.splits.as_deref() {
            None | Some("builtin") => SplitChoice::Builtin,
            Some("none") => SplitChoice::Disabled,
            Some(path) => SplitChoice::File(path.into()),
        };
        let config = RunConfig {
            input: s.input.unwrap_or_else(|| ".".into()),
            window: WindowSpec {
                days,
                back: s.back.unwrap_or(0),
                lookback: s.lookback.unwrap_or(days),
                d_r: s.d_r.unwrap_or(20),
                d_v: d_v[0],
                d_hlv: d_hlv[0],
            },
            d_v,
            d_hlv,
            roster,
            convention,
            exclusions: s.exclusions,
            splits,
            output: s.output.unwrap_or_else(|| ".".into()),
            dump: s.dump,
            svg: s.svg,
            stale_threshold: s.stale_report,
        };
        config.sweep()?;
        Ok(config)
    }

    /// Window and factor spec for every `(d_v, d_hlv)` pair, d_v outermost.
    pub fn sweep(&self) -> Result<Vec<(WindowSpec, FactorSpec)>> {
        let mut out = Vec::new();
        for &d_v in &self.d_v {
            for &d_hlv in &self.d_hlv {
                let window = WindowSpec { d_v, d_hlv, ..self.window }.validated()?;
                out.push((window, FactorSpec::new(self.roster.clone(), d_v, d_hlv)?));
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct LogNormalFile {
    log_mean: f64,
    cross_sd: f64,
    daily_sd: f64,
}

impl From<LogNormalFile> for LogNormal {
    fn from(f: LogNormalFile) -> Self {
        LogNormal { log_mean: f.log_mean, cross_sd: f.cross_sd, daily_sd: f.daily_sd }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlantFile {
    mean: Option<f64>,
    sd: Option<f64>,
    series: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct SynthFile {
    n_assets: usize,
    n_days: usize,
    seed: u64,
    end_date: Option<String>,
    roster: Option<String>,
    d_v: Option<usize>,
    d_hlv: Option<usize>,
    noise_sd: Option<f64>,
    minable_fraction: Option<f64>,
    base_close: Option<f64>,
    warmup_return_sd: Option<f64>,
    cap: Option<LogNormalFile>,
    spread: Option<LogNormalFile>,
    volume: Option<LogNormalFile>,
    mean_reversion: Option<f64>,
    #[serde(default)]
    plants: BTreeMap<String, PlantFile>,
}

/// Parses a synthetic-panel config; unset keys take the generator defaults.
pub fn parse_synth_config(text: &str, file: &str) -> Result<SynthConfig> {
    let f: SynthFile = toml::from_str(text).map_err(|e| Error::Format(format!("{file}: {e}")))?;
    let mut c = SynthConfig::new(f.n_assets, f.n_days, f.seed);
    if f.roster.is_some() || f.d_v.is_some() || f.d_hlv.is_some() {
        let roster = f.roster.as_deref().unwrap_or("int,cap,mom,hlv,vol");
        c = c.with_factors(FactorSpec::parse(roster, f.d_v.unwrap_or(20), f.d_hlv.unwrap_or(20))?);
    }
    if let Some(d) = f.end_date {
        c.end_date = NaiveDate::parse_from_str(&d, "%Y-%m-%d")
            .map_err(|e| Error::Format(format!("{file}: end_date `{d}`: {e}")))?;
    }
    c.noise_sd = f.noise_sd.unwrap_or(c.noise_sd);
    c.minable_fraction = f.minable_fraction.unwrap_or(c.minable_fraction);
    c.base_close = f.base_close.unwrap_or(c.base_close);
    c.warmup_return_sd = f.warmup_return_sd.unwrap_or(c.warmup_return_sd);
    if let Some(x) = f.cap {
        c.cap = x.into();
    }
    if let Some(x) = f.spread {
        c.spread = x.into();
    }
    if let Some(x) = f.volume {
        c.volume = x.into();
    }
    for (name, p) in f.plants {
        let factor: Factor = name.parse()?;
        let plant = match (p.series, c.plant(factor)) {
            (Some(_), _) if p.mean.is_some() || p.sd.is_some() => {
                return Err(Error::Format(format!("{file}: plant `{name}` mixes series with mean/sd")));
            }
            (Some(series), _) => FactorPlant::Series(series),
            (None, Some(FactorPlant::Drawn { mean, sd })) => FactorPlant::Drawn {
                mean: p.mean.unwrap_or(*mean),
                sd: p.sd.unwrap_or(*sd),
            },
            (None, _) => FactorPlant::Drawn { mean: p.mean.unwrap_or(0.0), sd: p.sd.unwrap_or(0.0) },
        };
        c.set_plant(factor, plant)?;
    }
    if let Some(strength) = f.mean_reversion {
        c = cryptofactor_core::synth::plant_mean_reversion(&c, strength)?;
    }
    Ok(c)
}

pub fn read_synth_config(path: &Path) -> Result<SynthConfig> {
    parse_synth_config(&read_text(path)?, &path.display().to_string())
}

pub const TRUTH_DIR: &str = "truth";

/// Writes `truth/meta.txt`, `truth/factor_returns.txt`, one
/// `truth/loadings.<factor>.txt` matrix per factor and `truth/noise.txt`, all
/// at full precision with model days most recent first.
pub fn write_ground_truth(config: &SynthConfig, truth: &GroundTruth, dir: &Path) -> Result<()> {
    let dir = dir.join(TRUTH_DIR);
    std::fs::create_dir_all(&dir).map_err(Error::io(&dir))?;
    let mut meta = String::new();
    let names: Vec<String> = truth.factors.iter().map(|f| f.name()).collect();
    for (k, v) in [
        ("rng", truth.rng.to_string()),
        ("seed", config.seed.to_string()),
        ("n_assets", config.n_assets.to_string()),
        ("n_days", config.n_days.to_string()),
        ("model_days", truth.model_days().to_string()),
        ("roster", names.join(",")),
        ("d_v", config.factors.d_v.to_string()),
        ("d_hlv", config.factors.d_hlv.to_string()),
        ("noise_sd", config.noise_sd.to_string()),
    ] {
        writeln!(meta, "{k}\t{v}").unwrap();
    }
    write_text(&dir.join("meta.txt"), &meta)?;

    let mut fr = format!("date\t{}\n", names.join("\t"));
    for (date, row) in truth.dates.iter().zip(&truth.factor_returns) {
        let cells: Vec<String> = row.iter().map(f64::to_string).collect();
        writeln!(fr, "{date}\t{}", cells.join("\t")).unwrap();
    }
    write_text(&dir.join("factor_returns.txt"), &fr)?;

    let header: Vec<String> = truth.dates.iter().map(|d| d.to_string()).collect();
    let header = header.join("\t");
    let n = config.n_assets;
    let t = truth.model_days();
    for (k, name) in names.iter().enumerate() {
        let mut m = cryptofactor_core::FieldMatrix::missing(n, t);
        for (s, x) in truth.loadings.iter().enumerate() {
            for i in 0..n {
                m.set(i, s, Some(x.get(i, k)));
            }
        }
        write_text(&dir.join(format!("loadings.{name}.txt")), &matrix_text(&header, &m))?;
    }
    let mut m = cryptofactor_core::FieldMatrix::missing(n, t);
    for (s, row) in truth.noise.iter().enumerate() {
        for (i, &e) in row.iter().enumerate() {
            m.set(i, s, Some(e));
        }
    }
    write_text(&dir.join("noise.txt"), &matrix_text(&header, &m))
}
