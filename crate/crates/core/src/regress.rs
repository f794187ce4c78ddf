//! Daily cross-sectional regressions and Fama-MacBeth style t-statistics.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use chrono::NaiveDate;

use crate::factors::{build_loadings, Factor, FactorSpec, LoadingsCube};
use crate::linalg::{least_squares, DesignMatrix, LeastSquares, LstsqError};
use crate::math;
use crate::panel::{Field, Panel, ReturnConvention};
use crate::universe::{select_universe, UniverseMask, WindowSpec};
use crate::{Error, Result};

/// Days per year used to annualize daily t-statistics (crypto trades every day).
pub const ANNUALIZATION_DAYS: f64 = 365.0;

/// |t| above this marks a relevant predictor.
pub const RELEVANT_TSTAT: f64 = 3.0;
/// |t| below this marks a poor predictor.
pub const POOR_TSTAT: f64 = 2.0;

/// OLS of `y` on the columns of `x` by Householder QR.
///
/// Needs at least `K + 1` observations; a rank-deficient design is an error
/// naming the columns that depend on earlier ones.
pub fn cross_section_ols(y: &[f64], x: &DesignMatrix) -> Result<LeastSquares> {
    ols_named(y, x, |k| format!("column {k}"))
}

fn ols_named(y: &[f64], x: &DesignMatrix, name: impl Fn(usize) -> String) -> Result<LeastSquares> {
    least_squares(x, y).map_err(|e| match e {
        LstsqError::Underdetermined { n, k } => Error::InsufficientCrossSection {
            n,
            k,
            required: k + 1,
        },
        LstsqError::RankDeficient(cols) => Error::RankDeficient {
            columns: cols.into_iter().map(name).collect(),
        },
        LstsqError::Dimension { rows, len } => Error::Dimension(format!(
            "response has {len} entries, design has {rows} rows"
        )),
    })
}

/// One day's cross-sectional fit.
#[derive(Debug, Clone, PartialEq)]
pub struct DayRegression {
    /// Panel column.
    pub day: usize,
    pub date: NaiveDate,
    pub coefficients: Vec<f64>,
    pub fitted: Vec<f64>,
    pub residuals: Vec<f64>,
}

/// Daily factor returns, one row per regressed day (most recent first).
#[derive(Debug, Clone, PartialEq)]
pub struct FactorReturnSeries {
    factors: Vec<Factor>,
    dates: Vec<NaiveDate>,
    values: Vec<Vec<f64>>,
}

impl FactorReturnSeries {
    /// `values[t][k]` is the return of `factors[k]` on `dates[t]`.
    pub fn new(factors: Vec<Factor>, dates: Vec<NaiveDate>, values: Vec<Vec<f64>>) -> Result<Self> {
        if dates.len() != values.len() {
            return Err(Error::Dimension(format!(
                "{} dates for {} rows of factor returns",
                dates.len(),
                values.len()
            )));
        }
        if let Some(row) = values.iter().find(|r| r.len() != factors.len()) {
            return Err(Error::Dimension(format!(
                "factor-return row has {} entries for {} factors",
                row.len(),
                factors.len()
            )));
        }
        Ok(Self {
            factors,
            dates,
            values,
        })
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    /// Number of days `T`.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn column(&self, k: usize) -> Vec<f64> {
        self.values.iter().map(|r| r[k]).collect()
    }
}

/// Annualized t-statistic of one factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TStat {
    pub factor: Factor,
    pub mean: f64,
    /// Sample standard deviation (denominator `T - 1`).
    pub sd: f64,
    pub t: f64,
    pub days: usize,
}

impl TStat {
    /// Rule-of-thumb reading of |t|; advisory only.
    pub fn annotation(&self) -> &'static str {
        let a = self.t.abs();
        if a > RELEVANT_TSTAT {
            "relevant"
        } else if a < POOR_TSTAT {
            "poor"
        } else {
            "marginal"
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TStatReport {
    entries: Vec<TStat>,
}

impl TStatReport {
    pub fn entries(&self) -> &[TStat] {
        &self.entries
    }

    pub fn get(&self, factor: Factor) -> Option<&TStat> {
        self.entries.iter().find(|e| e.factor == factor)
    }
}

/// `t_A = √365 · mean / sd` per factor, with the sample sd over `T - 1`.
pub fn annualized_tstat(series: &FactorReturnSeries) -> Result<TStatReport> {
    let t = series.len();
    if t < 2 {
        return Err(Error::Argument(format!(
            "t-statistics need at least 2 days, series has {t}"
        )));
    }
    let entries = series
        .factors
        .iter()
        .enumerate()
        .map(|(k, &factor)| {
            let xs = series.column(k);
            let mean = xs.iter().sum::<f64>() / t as f64;
            let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (t - 1) as f64;
            let sd = math::sqrt(var);
            if sd == 0.0 {
                return Err(Error::DegenerateSeries {
                    factor: factor.name(),
                });
            }
            Ok(TStat {
                factor,
                mean,
                sd,
                t: math::sqrt(ANNUALIZATION_DAYS) * mean / sd,
                days: t,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TStatReport { entries })
}

/// Everything a backtest run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct Backtest {
    pub window: WindowSpec,
    pub convention: ReturnConvention,
    /// Final cross-section (after the hlv-finiteness filter).
    pub universe: UniverseMask,
    /// Panel rows regressed, in regression row order.
    pub rows: Vec<usize>,
    pub regressions: Vec<DayRegression>,
    pub series: FactorReturnSeries,
    pub report: TStatReport,
}

impl Backtest {
    /// Number of panel columns the run reads: the padded selection window.
    pub fn columns_consumed(&self) -> usize {
        self.window.padded_len()
    }
}

/// Selection, loadings, one OLS per regression day, and t-statistics.
///
/// Days are regressed from `window.back` (most recent) to `window.back +
/// window.lookback - 1`. Each day needs at least `K + 2` assets.
pub fn run_backtest<S: AsRef<str>>(
    panel: &Panel,
    window: &WindowSpec,
    spec: &FactorSpec,
    convention: ReturnConvention,
    exclusions: &[S],
) -> Result<Backtest> {
    let window = window.validated()?;
    let mask = select_universe(panel, &window, exclusions)?;
    if mask.selected_count() == 0 {
        return Err(Error::EmptyUniverse);
    }
    let cube = build_loadings(panel, &mask, &window, spec)?;
    regress_cube(panel, &window, &cube, convention)
}

/// Regresses returns on an already built cube.
pub fn regress_cube(
    panel: &Panel,
    window: &WindowSpec,
    cube: &LoadingsCube,
    convention: ReturnConvention,
) -> Result<Backtest> {
    let (n, k) = (cube.rows().len(), cube.factors().len());
    if n == 0 {
        return Err(Error::EmptyUniverse);
    }
    if n < k + 2 {
        return Err(Error::InsufficientCrossSection {
            n,
            k,
            required: k + 2,
        });
    }
    let days = cube.panel_day(0)..cube.panel_day(cube.len());
    let returns = convention.compute_rows(panel, cube.rows(), days)?;

    let mut regressions = Vec::with_capacity(cube.len());
    for (s, x) in cube.iter() {
        let date = panel.axis().date_or_default(s);
        let wrap = |e: Error| Error::Day {
            date,
            source: Box::new(e),
        };
        let y = cube
            .rows()
            .iter()
            .map(|&i| {
                returns
                    .get(i, s)?
                    .ok_or_else(|| panel.domain("missing return", i, s, f64::NAN))
            })
            .collect::<Result<Vec<_>>>()
            .map_err(wrap)?;
        let fit = ols_named(&y, x, |c| cube.factors()[c].name()).map_err(wrap)?;
        regressions.push(DayRegression {
            day: s,
            date,
            coefficients: fit.coefficients,
            fitted: fit.fitted,
            residuals: fit.residuals,
        });
    }

    let series = FactorReturnSeries::new(
        cube.factors().to_vec(),
        regressions.iter().map(|r| r.date).collect(),
        regressions.iter().map(|r| r.coefficients.clone()).collect(),
    )?;
    let report = annualized_tstat(&series)?;
    Ok(Backtest {
        window: *window,
        convention,
        universe: cube.mask().clone(),
        rows: cube.rows().to_vec(),
        regressions,
        series,
        report,
    })
}

/// Min, quartiles, mean and max of a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SixNumberSummary {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub mean: f64,
    pub q3: f64,
    pub max: f64,
}

impl SixNumberSummary {
    pub const LABELS: [&'static str; 6] = ["Min.", "1st Qu.", "Median", "Mean", "3rd Qu.", "Max."];

    /// Quantiles interpolate linearly between order statistics at
    /// `h = (n - 1) p`.
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let q = |p: f64| {
            let h = (v.len() - 1) as f64 * p;
            let lo = h as usize;
            let hi = (lo + 1).min(v.len() - 1);
            v[lo] + (h - lo as f64) * (v[hi] - v[lo])
        };
        Some(Self {
            min: v[0],
            q1: q(0.25),
            median: q(0.5),
            mean: v.iter().sum::<f64>() / v.len() as f64,
            q3: q(0.75),
            max: v[v.len() - 1],
        })
    }

    pub fn values(&self) -> [f64; 6] {
        [self.min, self.q1, self.median, self.mean, self.q3, self.max]
    }
}

/// Per-asset "turnover" on day `s`: average daily dollar volume over
/// `s + 1 ..= s + d_v` divided by the market cap on `s + 1`, i.e. the ratio
/// of the vol and cap loadings' underlying quantities.
pub fn turnover_ratios(panel: &Panel, mask: &UniverseMask, s: usize, d_v: usize) -> Result<Vec<f64>> {
    if d_v == 0 {
        return Err(Error::Argument("d_v must be at least one day".into()));
    }
    if s + d_v >= panel.n_days() {
        return Err(Error::Range(format!(
            "turnover on column {s} with d_v = {d_v} needs {} columns, panel has {}",
            s + d_v + 1,
            panel.n_days()
        )));
    }
    mask.selected()
        .into_iter()
        .map(|i| {
            let cap = panel
                .get(Field::Cap, i, s + 1)
                .ok_or_else(|| panel.domain("missing market cap", i, s + 1, f64::NAN))?;
            if cap <= 0.0 {
                return Err(panel.domain("non-positive market cap", i, s + 1, cap));
            }
            let mut sum = 0.0;
            for r in 1..=d_v {
                sum += panel
                    .get(Field::Volume, i, s + r)
                    .ok_or_else(|| panel.domain("missing volume", i, s + r, f64::NAN))?;
            }
            Ok(sum / d_v as f64 / cap)
        })
        .collect()
}

/// Cross-sectional six-number summary of [`turnover_ratios`].
pub fn turnover_summary(
    panel: &Panel,
    mask: &UniverseMask,
    s: usize,
    d_v: usize,
) -> Result<SixNumberSummary> {
    let ratios = turnover_ratios(panel, mask, s, d_v)?;
    SixNumberSummary::of(&ratios).ok_or(Error::EmptyUniverse)
}
