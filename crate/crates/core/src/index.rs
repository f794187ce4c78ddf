//! Cap- and price-weighted market indexes with declared split adjustments.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::ops::Range;

use chrono::NaiveDate;

use crate::panel::{Field, Panel};
use crate::universe::UniverseMask;
use crate::{Error, Result};

/// Prices of `slug` dated strictly before `date` are divided by `ratio`.
#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub slug: String,
    pub date: NaiveDate,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SplitTable {
    entries: Vec<Split>,
}

impl SplitTable {
    pub fn new(entries: Vec<Split>) -> Result<Self> {
        for (k, e) in entries.iter().enumerate() {
            if !(e.ratio.is_finite() && e.ratio > 0.0) {
                return Err(Error::Argument(format!(
                    "split ratio for `{}` on {} must be positive, got {}",
                    e.slug, e.date, e.ratio
                )));
            }
            if entries[..k].iter().any(|o| o.slug == e.slug && o.date == e.date) {
                return Err(Error::Argument(format!(
                    "duplicate split for `{}` on {}",
                    e.slug, e.date
                )));
            }
        }
        Ok(Self { entries })
    }

    /// The Xaurum 8000-to-1 forward split of 2016-08-23.
    pub fn xaurum() -> Self {
        Self {
            entries: alloc::vec![Split {
                slug: "xaurum".into(),
                date: NaiveDate::from_ymd_opt(2016, 8, 23).expect("valid date"),
                ratio: 8000.0,
            }],
        }
    }

    pub fn entries(&self) -> &[Split] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Divides open/high/low/close before each split date by its ratio. Volume
/// and market cap are left alone.
pub fn apply_splits(panel: &Panel, splits: &SplitTable) -> Result<Panel> {
    let mut out = panel.clone();
    for split in &splits.entries {
        let i = panel
            .asset_index(&split.slug)
            .ok_or_else(|| Error::UnknownAsset(split.slug.clone()))?;
        let s0 = panel
            .axis()
            .position(split.date)
            .ok_or(Error::OffAxisDate(split.date))?;
        for s in s0 + 1..panel.n_days() {
            for field in Field::ALL.into_iter().filter(|f| f.is_price()) {
                if let Some(v) = out.get(field, i, s) {
                    out.set(field, i, s, Some(v / split.ratio))?;
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexKind {
    CapWeighted,
    PriceWeighted,
}

impl IndexKind {
    pub fn name(self) -> &'static str {
        match self {
            IndexKind::CapWeighted => "cap",
            IndexKind::PriceWeighted => "price",
        }
    }
}

/// Normalized index values, oldest date first; the first value is exactly 1.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexSeries {
    pub kind: IndexKind,
    pub dates: Vec<NaiveDate>,
    pub values: Vec<f64>,
    /// Reciprocal of the unnormalized total on the earliest date.
    pub gamma: f64,
}

impl IndexSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn weighted_index(
    panel: &Panel,
    mask: &UniverseMask,
    period: Range<usize>,
    field: Field,
    kind: IndexKind,
) -> Result<IndexSeries> {
    if period.is_empty() {
        return Err(Error::Argument("index period is empty".into()));
    }
    panel.check_range(&period, false)?;
    if mask.len() != panel.n_assets() {
        return Err(Error::Dimension(format!(
            "mask covers {} assets, panel has {}",
            mask.len(),
            panel.n_assets()
        )));
    }
    let rows = mask.selected();
    let mut dates = Vec::with_capacity(period.len());
    let mut totals = Vec::with_capacity(period.len());
    for s in period.rev() {
        let mut total = 0.0;
        for &i in &rows {
            total += panel.get(field, i, s).ok_or_else(|| {
                panel.domain("missing value in index period", i, s, f64::NAN)
            })?;
        }
        dates.push(panel.axis().date_or_default(s));
        totals.push(total);
    }
    let base = totals[0];
    if base == 0.0 {
        return Err(Error::ZeroTotal(field.name()));
    }
    Ok(IndexSeries {
        kind,
        dates,
        values: totals.iter().map(|t| t / base).collect(),
        gamma: 1.0 / base,
    })
}

/// `γ Σ_i C_is` over `period`, normalized to 1 on the oldest day.
pub fn cap_index(panel: &Panel, mask: &UniverseMask, period: Range<usize>) -> Result<IndexSeries> {
    weighted_index(panel, mask, period, Field::Cap, IndexKind::CapWeighted)
}

/// `γ Σ_i P̃_is` over split-adjusted closes, normalized to 1 on the oldest day.
pub fn price_index(
    panel: &Panel,
    mask: &UniverseMask,
    splits: &SplitTable,
    period: Range<usize>,
) -> Result<IndexSeries> {
    let adjusted = apply_splits(panel, splits)?;
    weighted_index(&adjusted, mask, period, Field::Close, IndexKind::PriceWeighted)
}
