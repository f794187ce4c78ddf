//! Command-line front end.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use cryptofactor_core::index::{cap_index, price_index};
use cryptofactor_core::regress::{run_backtest, turnover_summary};
use cryptofactor_core::synth::generate_panel;
use cryptofactor_core::universe::{select_universe, stale_price_report};
use cryptofactor_core::factors::build_loadings;
use cryptofactor_core::ingest::aggregate_histories;
use cryptofactor_core::{Panel, SplitTable, UniverseMask};

use crate::config::{read_synth_config, write_ground_truth, RunConfig, RunSettings, SplitChoice};
use crate::history::{
    bad_list_text, fetch_histories, read_listing, read_slug_list, DirectorySource, BAD_FILE, LISTING_FILE,
};
use crate::legacy::{read_legacy_panel, write_legacy_panel};
use crate::report::{
    emit_series, render_svg, report_dump, series_dump, six_number_text, tstat_header, tstat_row,
};

#[derive(Debug, Parser)]
#[command(name = "cryptofactor", version, about = "Cross-sectional factor backtests on daily crypto asset panels")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Merge per-asset history files into the aggregated cr.*.txt panel files
    Aggregate(AggregateArgs),
    /// Run the daily cross-sectional regressions and print annualized t-statistics
    Backtest(RunArgs),
    /// Write cap- and price-weighted index series for the regression period
    Indexes(RunArgs),
    /// Print the six-number summary of volume-to-cap turnover on the most recent regressed day
    Turnover(RunArgs),
    /// Generate a synthetic panel with a planted factor model
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct AggregateArgs {
    /// Directory with crypto.cap.txt (optional) and CryptoHistData/<slug>.txt
    #[arg(long, default_value = ".")]
    pub input: PathBuf,
    /// Where the cr.*.txt files are written
    #[arg(long, default_value = ".")]
    pub output: PathBuf,
    /// Asset whose dates define the axis [default: first listed, else bitcoin]
    #[arg(long)]
    pub reference: Option<String>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// TOML file with any of the settings below; flags take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub settings: RunSettings,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// TOML synthetic-panel config
    #[arg(long)]
    pub config: PathBuf,
    /// Where the panel files and truth/ are written
    #[arg(long, default_value = ".")]
    pub output: PathBuf,
    /// Overrides the seed in the config file
    #[arg(long)]
    pub seed: Option<u64>,
}

pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Aggregate(a) => cmd_aggregate(&a, err),
        Command::Backtest(a) => cmd_backtest(&resolve(a)?, out, err),
        Command::Indexes(a) => cmd_indexes(&resolve(a)?),
        Command::Turnover(a) => cmd_turnover(&resolve(a)?, out),
        Command::Synth(a) => cmd_synth(&a),
    }
}

fn resolve(args: RunArgs) -> Result<RunConfig> {
    let file = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            RunSettings::from_toml(&text, &path.display().to_string())?
        }
        None => RunSettings::default(),
    };
    Ok(RunConfig::resolve(args.settings.or(file))?)
}

pub fn cmd_aggregate(args: &AggregateArgs, err: &mut dyn Write) -> Result<()> {
    let source = DirectorySource::new(&args.input);
    let listing = args.input.join(LISTING_FILE);
    let (assets, listed) = if listing.is_file() {
        (read_listing(&listing)?, true)
    } else {
        let slugs = source.slugs()?;
        (slugs.iter().map(|s| cryptofactor_core::AssetMeta::new(s.as_str(), s.as_str(), false)).collect(), false)
    };
    let reference = match (&args.reference, listed) {
        (Some(r), _) => r.clone(),
        (None, true) => assets.first().map(|a| a.slug.clone()).context("listing has no assets")?,
        (None, false) => "bitcoin".into(),
    };

    let mut bad = cryptofactor_core::BadAssetList::default();
    let prior = args.input.join(BAD_FILE);
    let skip = if prior.is_file() { read_slug_list(&prior)? } else { Vec::new() };
    let mut keep = Vec::with_capacity(assets.len());
    for a in assets {
        if skip.contains(&a.slug) {
            bad.push(a.slug, format!("listed in input {BAD_FILE}"));
        } else {
            keep.push(a);
        }
    }
    let (histories, fetch_bad) = fetch_histories(&source, &keep)?;
    bad.extend(fetch_bad);
    let (panel, agg_bad) = aggregate_histories(&histories, &reference)?;
    bad.extend(agg_bad);

    write_legacy_panel(&panel, &args.output)?;
    let bad_path = args.output.join(BAD_FILE);
    if bad.is_empty() {
        if bad_path.is_file() {
            std::fs::remove_file(&bad_path).with_context(|| format!("removing stale {}", bad_path.display()))?;
        }
    } else {
        std::fs::write(&bad_path, bad_list_text(&bad)).with_context(|| format!("writing {}", bad_path.display()))?;
        for (slug, why) in bad.entries() {
            writeln!(err, "skipped {slug}: {why}")?;
        }
    }
    Ok(())
}

fn load(config: &RunConfig) -> Result<(Panel, Vec<String>)> {
    let panel = read_legacy_panel(&config.input)?;
    let exclusions = match &config.exclusions {
        Some(p) => read_slug_list(p)?,
        None => Vec::new(),
    };
    Ok((panel, exclusions))
}

pub fn cmd_backtest(config: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let (panel, exclusions) = load(config)?;
    if let Some(threshold) = config.stale_threshold {
        let days = 0..config.window.padded_len().min(panel.n_days());
        for s in stale_price_report(&panel, threshold, days)? {
            writeln!(err, "stale prices: {} has {} identical closes in a row", s.slug, s.run)?;
        }
    }
    let sweep = config.sweep()?;
    let mut rows = Vec::with_capacity(sweep.len());
    for (window, spec) in &sweep {
        let bt = run_backtest(&panel, window, spec, config.convention, &exclusions)
            .with_context(|| format!("backtest with d_v = {}, d_hlv = {}", window.d_v, window.d_hlv))?;
        if let Some(prefix) = &config.dump {
            let stem = if sweep.len() == 1 {
                prefix.display().to_string()
            } else {
                format!("{}.dv{}.dhlv{}", prefix.display(), window.d_v, window.d_hlv)
            };
            write_file(Path::new(&format!("{stem}.series.txt")), &series_dump(&bt.series))?;
            write_file(Path::new(&format!("{stem}.tstat.txt")), &report_dump(&bt.report))?;
        }
        rows.push(tstat_row(window.d_v, window.d_hlv, &bt.report));
    }
    writeln!(out, "{}", tstat_header(&sweep[0].1))?;
    for r in rows {
        writeln!(out, "{r}")?;
    }
    Ok(())
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn split_table(config: &RunConfig, panel: &Panel) -> Result<SplitTable> {
    Ok(match &config.splits {
        SplitChoice::Disabled => SplitTable::default(),
        SplitChoice::File(p) => crate::report::read_splits(p)?,
        // the shipped entry only applies to panels that carry the asset and date
        SplitChoice::Builtin => SplitTable::new(
            SplitTable::xaurum()
                .entries()
                .iter()
                .filter(|e| panel.asset_index(&e.slug).is_some() && panel.axis().position(e.date).is_some())
                .cloned()
                .collect(),
        )?,
    })
}

fn regression_universe(config: &RunConfig, panel: &Panel, exclusions: &[String]) -> Result<UniverseMask> {
    let (window, spec) = config.sweep()?.swap_remove(0);
    let mask = select_universe(panel, &window, exclusions)?;
    if mask.selected_count() == 0 {
        bail!(cryptofactor_core::Error::EmptyUniverse);
    }
    Ok(build_loadings(panel, &mask, &window, &spec)?.mask().clone())
}

pub fn cmd_indexes(config: &RunConfig) -> Result<()> {
    let (panel, exclusions) = load(config)?;
    let mask = regression_universe(config, &panel, &exclusions)?;
    let period = config.window.regression_days();
    let splits = split_table(config, &panel)?;
    let cap = cap_index(&panel, &mask, period.clone())?;
    let price = price_index(&panel, &mask, &splits, period)?;
    std::fs::create_dir_all(&config.output).with_context(|| format!("creating {}", config.output.display()))?;
    for series in [&cap, &price] {
        let name = series.kind.name();
        let mut buf = Vec::new();
        emit_series(series, &mut buf)?;
        let path = config.output.join(format!("{name}.tsv"));
        std::fs::write(&path, buf).with_context(|| format!("writing {}", path.display()))?;
        if config.svg {
            write_file(&config.output.join(format!("{name}.svg")), &render_svg(series))?;
        }
    }
    Ok(())
}

pub fn cmd_turnover(config: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let (panel, exclusions) = load(config)?;
    let window = config.window.validated()?;
    let mask = select_universe(&panel, &window, &exclusions)?;
    let summary = turnover_summary(&panel, &mask, window.back, window.d_v)?;
    write!(out, "{}", six_number_text(&summary))?;
    Ok(())
}

pub fn cmd_synth(args: &SynthArgs) -> Result<()> {
    let mut config = read_synth_config(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let (panel, truth) = generate_panel(&config)?;
    write_legacy_panel(&panel, &args.output)?;
    write_ground_truth(&config, &truth, &args.output)?;
    Ok(())
}
