//! Cross-section selection over the padded selection window.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;

use crate::panel::{Field, Panel};
use crate::{Error, Result};

/// Lengths (in days) that place the selection, skip and regression periods
/// on the most-recent-first column axis.
///
/// The selection period covers columns `0..days`, padded by `d_r + 1` older
/// columns so that every moving average and lagged return of the regression
/// days is computed from strictly older data. Regressions run on columns
/// `back..back + lookback`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowSpec {
    pub days: usize,
    pub back: usize,
    pub lookback: usize,
    pub d_r: usize,
    pub d_v: usize,
    pub d_hlv: usize,
}

/// Extra columns beyond `d_r` are never needed: the deepest lag, mom4, reads
/// `s + 5` and `s <= days - 1`.
const MAX_MOM_LAG: usize = 4;

impl Default for WindowSpec {
    fn default() -> Self {
        Self {
            days: 365,
            back: 0,
            lookback: 365,
            d_r: 20,
            d_v: 20,
            d_hlv: 20,
        }
    }
}

impl WindowSpec {
    pub fn new(days: usize, back: usize, lookback: usize) -> Result<Self> {
        Self {
            days,
            back,
            lookback,
            ..Self::default()
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        let fail = |m: String| Err(Error::Argument(m));
        if self.lookback == 0 {
            return fail("lookback must be positive".into());
        }
        if self.back + self.lookback > self.days {
            return fail(format!(
                "back ({}) + lookback ({}) exceeds days ({})",
                self.back, self.lookback, self.days
            ));
        }
        if self.d_v == 0 || self.d_hlv == 0 {
            return fail("averaging windows must be at least one day".into());
        }
        if self.d_v > self.d_r || self.d_hlv > self.d_r || self.d_r < MAX_MOM_LAG {
            return fail(format!(
                "padding d_r = {} must cover d_v = {}, d_hlv = {} and {MAX_MOM_LAG} momentum lags",
                self.d_r, self.d_v, self.d_hlv
            ));
        }
        Ok(self)
    }

    /// `days + d_r + 1`, the number of panel columns the selection filters see.
    pub fn padded_len(&self) -> usize {
        self.days + self.d_r + 1
    }

    /// Panel columns regressed, most recent first.
    pub fn regression_days(&self) -> Range<usize> {
        self.back..self.back + self.lookback
    }
}

/// Why an asset is not in the cross-section.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Exclusion {
    MissingData,
    ZeroVolume,
    Explicit,
    NonfiniteHlv,
}

impl Exclusion {
    pub fn tag(self) -> &'static str {
        match self {
            Exclusion::MissingData => "missing-data",
            Exclusion::ZeroVolume => "zero-volume",
            Exclusion::Explicit => "explicit-exclusion",
            Exclusion::NonfiniteHlv => "nonfinite-hlv",
        }
    }
}

impl fmt::Display for Exclusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Per-asset selection flags over a panel's rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniverseMask {
    reasons: Vec<Option<Exclusion>>,
}

impl UniverseMask {
    /// Every one of `n` assets selected.
    pub fn all(n: usize) -> Self {
        Self {
            reasons: vec![None; n],
        }
    }

    pub fn len(&self) -> usize {
        self.reasons.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reasons.is_empty()
    }

    pub fn is_selected(&self, i: usize) -> bool {
        self.reasons[i].is_none()
    }

    pub fn reason(&self, i: usize) -> Option<Exclusion> {
        self.reasons[i]
    }

    pub fn exclude(&mut self, i: usize, why: Exclusion) {
        if self.reasons[i].is_none() {
            self.reasons[i] = Some(why);
        }
    }

    /// Panel row indices of selected assets, in panel order.
    pub fn selected(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.is_selected(i)).collect()
    }

    pub fn selected_count(&self) -> usize {
        self.reasons.iter().filter(|r| r.is_none()).count()
    }

    pub fn excluded_count(&self) -> usize {
        self.len() - self.selected_count()
    }
}

/// Keeps an asset iff, on every column of the padded window, all six fields
/// are present, volume is strictly positive, and its slug is not in
/// `exclusions`.
pub fn select_universe<S: AsRef<str>>(
    panel: &Panel,
    window: &WindowSpec,
    exclusions: &[S],
) -> Result<UniverseMask> {
    let padded = window.padded_len();
    if panel.n_days() < padded {
        return Err(Error::Range(format!(
            "panel has {} days, the padded selection window needs {padded}",
            panel.n_days()
        )));
    }
    let mut mask = UniverseMask::all(panel.n_assets());
    for (i, asset) in panel.assets().iter().enumerate() {
        let why = if exclusions.iter().any(|e| e.as_ref() == asset.slug) {
            Some(Exclusion::Explicit)
        } else if (0..padded).any(|s| Field::ALL.iter().any(|&f| panel.get(f, i, s).is_none())) {
            Some(Exclusion::MissingData)
        } else if (0..padded).any(|s| panel.get(Field::Volume, i, s) == Some(0.0)) {
            Some(Exclusion::ZeroVolume)
        } else {
            None
        };
        if let Some(why) = why {
            mask.exclude(i, why);
        }
    }
    Ok(mask)
}

/// Drops assets with any non-finite hlv loading.
///
/// `hlv[j][k]` is the loading of the `k`-th selected asset (in
/// [`UniverseMask::selected`] order) on the `j`-th regression day.
pub fn hlv_finiteness_filter(mask: &UniverseMask, hlv: &[Vec<f64>]) -> Result<UniverseMask> {
    let rows = mask.selected();
    let mut out = mask.clone();
    for (j, day) in hlv.iter().enumerate() {
        if day.len() != rows.len() {
            return Err(Error::Dimension(format!(
                "hlv day {j} has {} entries for {} selected assets",
                day.len(),
                rows.len()
            )));
        }
        for (k, v) in day.iter().enumerate() {
            if !v.is_finite() {
                out.exclude(rows[k], Exclusion::NonfiniteHlv);
            }
        }
    }
    Ok(out)
}

/// An asset whose close stayed constant for `run` consecutive days.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StaleRun {
    pub slug: String,
    pub run: usize,
}

/// Default run length for [`stale_price_report`].
pub const DEFAULT_STALE_THRESHOLD: usize = 30;

/// Lists assets whose longest run of identical closes within `days` reaches
/// `threshold`. Missing cells break runs. Advisory only.
pub fn stale_price_report(
    panel: &Panel,
    threshold: usize,
    days: Range<usize>,
) -> Result<Vec<StaleRun>> {
    if threshold < 2 {
        return Err(Error::Argument(format!(
            "stale-price threshold must be at least 2, got {threshold}"
        )));
    }
    panel.check_range(&days, false)?;
    let close = panel.field(Field::Close);
    let mut report = Vec::new();
    for (i, asset) in panel.assets().iter().enumerate() {
        let (mut longest, mut run, mut prev) = (0usize, 0usize, None::<f64>);
        for s in days.clone() {
            let v = close.get(i, s);
            run = match (v, prev) {
                (Some(a), Some(b)) if a == b => run + 1,
                (Some(_), _) => 1,
                (None, _) => 0,
            };
            prev = v;
            longest = longest.max(run);
        }
        if longest >= threshold {
            report.push(StaleRun {
                slug: asset.slug.clone(),
                run: longest,
            });
        }
    }
    Ok(report)
}
