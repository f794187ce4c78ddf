//! Aggregation of per-asset histories onto a reference date axis.
//!
//! Parsing of the per-asset text files lives with the other file formats in
//! the `cryptofactor` crate; this module only merges already-parsed rows.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use chrono::NaiveDate;

use crate::panel::{AssetMeta, DateAxis, Field, Panel};
use crate::{Error, Result};

/// One dated row of a per-asset history. Values are in [`Field::ALL`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryRow {
    pub date: NaiveDate,
    pub values: [Option<f64>; 6],
}

impl HistoryRow {
    pub fn get(&self, field: Field) -> Option<f64> {
        self.values[field as usize]
    }
}

/// Daily history of one asset, most recent row first.
#[derive(Debug, Clone, PartialEq)]
pub struct AssetHistory {
    meta: AssetMeta,
    rows: Vec<HistoryRow>,
}

impl AssetHistory {
    pub fn new(meta: AssetMeta, rows: Vec<HistoryRow>) -> Result<Self> {
        if let Some(w) = rows.windows(2).find(|w| w[0].date <= w[1].date) {
            return Err(Error::Argument(format!(
                "history of `{}` is not strictly decreasing in date: {} then {}",
                meta.slug, w[0].date, w[1].date
            )));
        }
        Ok(Self { meta, rows })
    }

    /// Row `i` of `panel` as a history covering every date of the axis.
    pub fn from_panel(panel: &Panel, i: usize) -> Self {
        let rows = panel
            .axis()
            .dates()
            .iter()
            .enumerate()
            .map(|(s, &date)| HistoryRow {
                date,
                values: Field::ALL.map(|f| panel.get(f, i, s)),
            })
            .collect();
        Self {
            meta: panel.assets()[i].clone(),
            rows,
        }
    }

    pub fn meta(&self) -> &AssetMeta {
        &self.meta
    }

    pub fn slug(&self) -> &str {
        &self.meta.slug
    }

    pub fn rows(&self) -> &[HistoryRow] {
        &self.rows
    }

    pub fn with_meta(mut self, meta: AssetMeta) -> Self {
        self.meta = meta;
        self
    }
}

/// Slugs left out of an aggregated panel, with the reason for each.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BadAssetList {
    entries: Vec<(String, String)>,
}

impl BadAssetList {
    pub fn push(&mut self, slug: impl Into<String>, reason: impl Into<String>) {
        self.entries.push((slug.into(), reason.into()));
    }

    pub fn slugs(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(s, _)| s.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn contains(&self, slug: &str) -> bool {
        self.slugs().any(|s| s == slug)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn extend(&mut self, other: BadAssetList) {
        self.entries.extend(other.entries);
    }
}

/// Merges histories into a panel whose axis is exactly the reference asset's
/// dates.
///
/// Rows of other assets are matched to columns by date; rows dated off the
/// reference axis (including anything older than the reference history) are
/// dropped and axis dates an asset lacks stay missing. Histories with no rows
/// are reported in the returned [`BadAssetList`] and left out of the panel.
pub fn aggregate_histories(
    histories: &[AssetHistory],
    reference_slug: &str,
) -> Result<(Panel, BadAssetList)> {
    let reference = histories
        .iter()
        .find(|h| h.slug() == reference_slug)
        .filter(|h| !h.rows.is_empty())
        .ok_or_else(|| Error::MissingReference(reference_slug.into()))?;
    let axis = DateAxis::new(reference.rows.iter().map(|r| r.date).collect())?;
    let columns: BTreeMap<NaiveDate, usize> = axis
        .dates()
        .iter()
        .enumerate()
        .map(|(s, &d)| (d, s))
        .collect();

    let mut bad = BadAssetList::default();
    let mut kept = Vec::with_capacity(histories.len());
    for h in histories {
        if h.rows.is_empty() {
            bad.push(h.slug(), "no data rows");
        } else {
            kept.push(h);
        }
    }

    let mut panel = Panel::empty(kept.iter().map(|h| h.meta.clone()).collect(), axis)?;
    for (i, h) in kept.iter().enumerate() {
        for row in &h.rows {
            let Some(&s) = columns.get(&row.date) else {
                continue;
            };
            for field in Field::ALL {
                panel.set(field, i, s, row.get(field))?;
            }
        }
    }
    Ok((panel, bad))
}
