//! Out-of-sample factor loadings.
//!
//! Every loading used on day `s` is built from data dated `s + 1` or older,
//! except `int` (constant) and `mnbl` (fixed per asset).

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::linalg::DesignMatrix;
use crate::math;
use crate::panel::{AssetMeta, Field, Panel, ReturnConvention, ReturnMatrix};
use crate::universe::{hlv_finiteness_filter, UniverseMask, WindowSpec};
use crate::{Error, Result};

/// Deepest momentum lag (`mom4`).
pub const MAX_MOM_LAG: u8 = 4;

/// A factor loading column. The derived order is the column order of reports:
/// int, cap, mom, mom1..mom4, hlv, vol, mnbl.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Factor {
    /// Intercept, a column of ones.
    Int,
    /// Log of the previous day's market cap.
    Cap,
    /// Open-to-close return `lag + 1` days back; `Mom(0)` is plain `mom`.
    Mom(u8),
    /// Half the log of the mean squared (high - low) / close.
    Hlv,
    /// Log of the average daily dollar volume.
    Vol,
    /// 1 for minable assets, 0 otherwise.
    Mnbl,
}

impl Factor {
    /// Five-factor roster of the main regressions.
    pub const DEFAULT_ROSTER: [Factor; 5] =
        [Factor::Int, Factor::Cap, Factor::Mom(0), Factor::Hlv, Factor::Vol];

    pub fn name(self) -> String {
        match self {
            Factor::Int => "int".into(),
            Factor::Cap => "cap".into(),
            Factor::Mom(0) => "mom".into(),
            Factor::Mom(k) => format!("mom{k}"),
            Factor::Hlv => "hlv".into(),
            Factor::Vol => "vol".into(),
            Factor::Mnbl => "mnbl".into(),
        }
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Factor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "int" => Factor::Int,
            "cap" => Factor::Cap,
            "mom" => Factor::Mom(0),
            "hlv" => Factor::Hlv,
            "vol" => Factor::Vol,
            "mnbl" => Factor::Mnbl,
            other => match other.strip_prefix("mom").and_then(|k| k.parse::<u8>().ok()) {
                Some(k @ 1..=MAX_MOM_LAG) => Factor::Mom(k),
                _ => return Err(Error::Argument(format!("unknown factor `{other}`"))),
            },
        })
    }
}

/// Factor roster plus the averaging windows of the hlv and vol builders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorSpec {
    roster: Vec<Factor>,
    pub d_v: usize,
    pub d_hlv: usize,
}

impl FactorSpec {
    /// Sorts the roster into report order, which puts `int` first.
    pub fn new(mut roster: Vec<Factor>, d_v: usize, d_hlv: usize) -> Result<Self> {
        if roster.is_empty() {
            return Err(Error::Argument("factor roster is empty".into()));
        }
        if let Some(Factor::Mom(k)) = roster.iter().find(|f| matches!(f, Factor::Mom(k) if *k > MAX_MOM_LAG)) {
            return Err(Error::Argument(format!("momentum lag {k} exceeds {MAX_MOM_LAG}")));
        }
        roster.sort();
        if let Some(w) = roster.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Argument(format!("factor `{}` listed twice", w[0])));
        }
        if d_v == 0 || d_hlv == 0 {
            return Err(Error::Argument("averaging windows must be at least one day".into()));
        }
        Ok(Self { roster, d_v, d_hlv })
    }

    /// Roster parsed from a comma-separated list such as `int,cap,mom`.
    pub fn parse(roster: &str, d_v: usize, d_hlv: usize) -> Result<Self> {
        let factors = roster
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(Factor::from_str)
            .collect::<Result<Vec<_>>>()?;
        Self::new(factors, d_v, d_hlv)
    }

    pub fn with_window(roster: Vec<Factor>, window: &WindowSpec) -> Result<Self> {
        Self::new(roster, window.d_v, window.d_hlv)
    }

    pub fn roster(&self) -> &[Factor] {
        &self.roster
    }

    pub fn k(&self) -> usize {
        self.roster.len()
    }

    pub fn includes_intercept(&self) -> bool {
        self.roster.first() == Some(&Factor::Int)
    }

    pub fn contains(&self, f: Factor) -> bool {
        self.roster.contains(&f)
    }

    pub fn names(&self) -> Vec<String> {
        self.roster.iter().map(|f| f.name()).collect()
    }

    /// Deepest momentum lag in the roster, if any momentum factor is present.
    pub fn max_mom_lag(&self) -> Option<u8> {
        self.roster
            .iter()
            .filter_map(|f| match f {
                Factor::Mom(k) => Some(*k),
                _ => None,
            })
            .max()
    }
}

/// Column of `n` ones.
pub fn loading_int(n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::Argument("intercept needs at least one asset".into()));
    }
    Ok(vec![1.0; n])
}

fn prior(panel: &Panel, field: Field, i: usize, s: usize, what: &'static str) -> Result<f64> {
    if s >= panel.n_days() {
        return Err(Error::Range(format!(
            "{field} on column {s} is past the {}-day panel",
            panel.n_days()
        )));
    }
    panel
        .get(field, i, s)
        .ok_or_else(|| panel.domain(what, i, s, f64::NAN))
}

/// `ln C_{i,s+1}`: the previous day's market cap.
pub fn loading_cap(panel: &Panel, rows: &[usize], s: usize) -> Result<Vec<f64>> {
    rows.iter()
        .map(|&i| {
            let c = prior(panel, Field::Cap, i, s + 1, "missing market cap")?;
            if c <= 0.0 {
                return Err(panel.domain("non-positive market cap", i, s + 1, c));
            }
            Ok(math::ln(c))
        })
        .collect()
}

/// `R_{i,s+1+lag}` from open-to-close returns.
pub fn loading_mom(returns: &ReturnMatrix, rows: &[usize], s: usize, lag: u8) -> Result<Vec<f64>> {
    let day = s + 1 + lag as usize;
    rows.iter()
        .map(|&i| {
            returns.get(i, day)?.ok_or_else(|| {
                Error::Argument(format!("return of row {i} on column {day} is missing"))
            })
        })
        .collect()
}

/// `½ ln U` with `U = mean over r = 1..=d_hlv of ((H - L) / C)²` at `s + r`.
///
/// A flat price over the whole window gives `-inf`; callers drop such assets
/// with [`hlv_finiteness_filter`].
pub fn loading_hlv(panel: &Panel, rows: &[usize], s: usize, d_hlv: usize) -> Result<Vec<f64>> {
    if d_hlv == 0 {
        return Err(Error::Argument("d_hlv must be at least one day".into()));
    }
    rows.iter()
        .map(|&i| {
            let mut sum = 0.0;
            for r in 1..=d_hlv {
                let c = prior(panel, Field::Close, i, s + r, "missing close price")?;
                if c <= 0.0 {
                    return Err(panel.domain("non-positive close price", i, s + r, c));
                }
                let h = prior(panel, Field::High, i, s + r, "missing high price")?;
                let l = prior(panel, Field::Low, i, s + r, "missing low price")?;
                let q = (h - l) / c;
                sum += q * q;
            }
            Ok(0.5 * math::ln(sum / d_hlv as f64))
        })
        .collect()
}

/// `ln` of the mean dollar volume over `s + 1 ..= s + d_v`.
pub fn loading_vol(panel: &Panel, rows: &[usize], s: usize, d_v: usize) -> Result<Vec<f64>> {
    if d_v == 0 {
        return Err(Error::Argument("d_v must be at least one day".into()));
    }
    rows.iter()
        .map(|&i| {
            let mut sum = 0.0;
            for r in 1..=d_v {
                sum += prior(panel, Field::Volume, i, s + r, "missing volume")?;
            }
            let mean = sum / d_v as f64;
            if mean <= 0.0 {
                return Err(panel.domain("non-positive average volume", i, s + 1, mean));
            }
            Ok(math::ln(mean))
        })
        .collect()
}

/// 1 for minable assets, 0 otherwise.
pub fn loading_mnbl<'a>(assets: impl IntoIterator<Item = &'a AssetMeta>) -> Vec<f64> {
    assets
        .into_iter()
        .map(|a| if a.minable { 1.0 } else { 0.0 })
        .collect()
}

/// The `rows.len() × K` design matrix of day `s`.
///
/// `mom_returns` must hold open-to-close returns covering `s + 1 ..= s + 1 +
/// max lag` whenever the roster has a momentum factor.
pub fn day_loadings(
    panel: &Panel,
    mom_returns: Option<&ReturnMatrix>,
    rows: &[usize],
    s: usize,
    spec: &FactorSpec,
) -> Result<DesignMatrix> {
    let columns = spec
        .roster
        .iter()
        .map(|&f| match f {
            Factor::Int => loading_int(rows.len()),
            Factor::Cap => loading_cap(panel, rows, s),
            Factor::Mom(lag) => {
                let r = mom_returns.ok_or_else(|| {
                    Error::Argument("momentum loadings need open-to-close returns".into())
                })?;
                loading_mom(r, rows, s, lag)
            }
            Factor::Hlv => loading_hlv(panel, rows, s, spec.d_hlv),
            Factor::Vol => loading_vol(panel, rows, s, spec.d_v),
            Factor::Mnbl => Ok(loading_mnbl(rows.iter().map(|&i| &panel.assets()[i]))),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DesignMatrix::from_columns(&columns))
}

/// Per-day loading matrices over the regression period.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadingsCube {
    factors: Vec<Factor>,
    rows: Vec<usize>,
    first_day: usize,
    days: Vec<DesignMatrix>,
    mask: UniverseMask,
}

impl LoadingsCube {
    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    /// Panel rows of the assets, in matrix row order.
    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    /// Mask after the hlv-finiteness filter.
    pub fn mask(&self) -> &UniverseMask {
        &self.mask
    }

    pub fn len(&self) -> usize {
        self.days.len()
    }

    pub fn is_empty(&self) -> bool {
        self.days.is_empty()
    }

    /// Panel column of cube day `j`.
    pub fn panel_day(&self, j: usize) -> usize {
        self.first_day + j
    }

    pub fn day(&self, j: usize) -> &DesignMatrix {
        &self.days[j]
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &DesignMatrix)> {
        self.days.iter().enumerate().map(|(j, m)| (self.first_day + j, m))
    }
}

/// Builds the cube for days `window.back .. window.back + window.lookback`.
///
/// When the roster has hlv, assets with any non-finite hlv loading on any of
/// those days are removed (from every day) and recorded in the returned mask.
pub fn build_loadings(
    panel: &Panel,
    mask: &UniverseMask,
    window: &WindowSpec,
    spec: &FactorSpec,
) -> Result<LoadingsCube> {
    let window = window.validated()?;
    if spec.d_v != window.d_v || spec.d_hlv != window.d_hlv {
        return Err(Error::Argument(format!(
            "factor windows (d_v {}, d_hlv {}) disagree with the selection window (d_v {}, d_hlv {})",
            spec.d_v, spec.d_hlv, window.d_v, window.d_hlv
        )));
    }
    if mask.len() != panel.n_assets() {
        return Err(Error::Dimension(format!(
            "mask covers {} assets, panel has {}",
            mask.len(),
            panel.n_assets()
        )));
    }
    let mut rows = mask.selected();
    if rows.is_empty() {
        return Err(Error::Argument("no assets selected".into()));
    }
    let days = window.regression_days();
    let mom_returns = match spec.max_mom_lag() {
        Some(lag) => Some(ReturnConvention::OpenToClose.compute_rows(
            panel,
            &rows,
            days.start + 1..days.end + 1 + lag as usize,
        )?),
        None => None,
    };

    let mut matrices = days
        .clone()
        .map(|s| day_loadings(panel, mom_returns.as_ref(), &rows, s, spec))
        .collect::<Result<Vec<_>>>()?;

    let mut final_mask = mask.clone();
    if let Some(col) = spec.roster.iter().position(|&f| f == Factor::Hlv) {
        let hlv: Vec<Vec<f64>> = matrices.iter().map(|m| m.column(col).to_vec()).collect();
        final_mask = hlv_finiteness_filter(mask, &hlv)?;
        let keep: Vec<usize> = rows
            .iter()
            .enumerate()
            .filter(|(_, &i)| final_mask.is_selected(i))
            .map(|(k, _)| k)
            .collect();
        if keep.len() != rows.len() {
            matrices = matrices.iter().map(|m| select_rows(m, &keep)).collect();
            rows = keep.iter().map(|&k| rows[k]).collect();
        }
    }

    Ok(LoadingsCube {
        factors: spec.roster.clone(),
        rows,
        first_day: days.start,
        days: matrices,
        mask: final_mask,
    })
}

fn select_rows(m: &DesignMatrix, keep: &[usize]) -> DesignMatrix {
    let columns: Vec<Vec<f64>> = (0..m.cols())
        .map(|c| keep.iter().map(|&k| m.column(c)[k]).collect())
        .collect();
    DesignMatrix::from_columns(&columns)
}

impl fmt::Display for FactorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.roster.iter().map(ToString::to_string).collect();
        write!(f, "{} (d_v {}, d_hlv {})", names.join(","), self.d_v, self.d_hlv)
    }
}
