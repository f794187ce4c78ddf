//! Asset×date panels and daily log returns.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;
use core::str::FromStr;

use chrono::NaiveDate;

use crate::math;
use crate::{Error, Result};

/// Calendar dates of a panel, most recent first.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DateAxis {
    dates: Vec<NaiveDate>,
}

impl DateAxis {
    /// Builds an axis; dates must be strictly decreasing.
    pub fn new(dates: Vec<NaiveDate>) -> Result<Self> {
        if let Some(w) = dates.windows(2).find(|w| w[0] <= w[1]) {
            return Err(Error::Argument(format!(
                "date axis must be strictly decreasing, found {} followed by {}",
                w[0], w[1]
            )));
        }
        Ok(Self { dates })
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn date(&self, s: usize) -> Option<NaiveDate> {
        self.dates.get(s).copied()
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    /// Column index of `date`, if present.
    pub fn position(&self, date: NaiveDate) -> Option<usize> {
        self.dates.binary_search_by(|d| date.cmp(d)).ok()
    }

    /// Date of column `s` for error messages; falls back to the epoch
    /// default when `s` is past the end.
    pub(crate) fn date_or_default(&self, s: usize) -> NaiveDate {
        self.date(s).unwrap_or_default()
    }
}

/// Identity of one asset. Symbols are not unique across the universe; slugs are.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssetMeta {
    pub name: String,
    pub slug: String,
    pub minable: bool,
}

impl AssetMeta {
    pub fn new(name: impl Into<String>, slug: impl Into<String>, minable: bool) -> Self {
        Self {
            name: name.into(),
            slug: slug.into(),
            minable,
        }
    }
}

/// The six per-day data fields carried by a panel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Field {
    Open,
    High,
    Low,
    Close,
    Volume,
    Cap,
}

impl Field {
    pub const ALL: [Field; 6] = [
        Field::Open,
        Field::High,
        Field::Low,
        Field::Close,
        Field::Volume,
        Field::Cap,
    ];

    pub fn is_price(self) -> bool {
        matches!(self, Field::Open | Field::High | Field::Low | Field::Close)
    }

    pub fn name(self) -> &'static str {
        match self {
            Field::Open => "open",
            Field::High => "high",
            Field::Low => "low",
            Field::Close => "close",
            Field::Volume => "volume",
            Field::Cap => "cap",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Dense row-major matrix whose cells may be missing.
///
/// Missing cells are stored as NaN, which no valid panel value can take, and
/// are surfaced as `None`. Storing `Some(NaN)` therefore reads back as missing.
#[derive(Debug, Clone)]
pub struct FieldMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl FieldMatrix {
    /// All cells missing.
    pub fn missing(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            values: vec![f64::NAN; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<Option<f64>>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = Self::missing(rows.len(), cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::Dimension(format!(
                    "row {i} has {} cells, expected {cols}",
                    row.len()
                )));
            }
            for (s, v) in row.iter().enumerate() {
                m.set(i, s, *v);
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Panics if `(i, s)` is out of bounds.
    #[inline]
    pub fn get(&self, i: usize, s: usize) -> Option<f64> {
        assert!(i < self.rows && s < self.cols, "cell ({i}, {s}) out of bounds");
        let v = self.values[i * self.cols + s];
        if v.is_nan() {
            None
        } else {
            Some(v)
        }
    }

    #[inline]
    pub fn set(&mut self, i: usize, s: usize, value: Option<f64>) {
        assert!(i < self.rows && s < self.cols, "cell ({i}, {s}) out of bounds");
        self.values[i * self.cols + s] = value.unwrap_or(f64::NAN);
    }

    pub fn is_missing(&self, i: usize, s: usize) -> bool {
        self.get(i, s).is_none()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = Option<f64>> + '_ {
        self.values[i * self.cols..(i + 1) * self.cols]
            .iter()
            .map(|v| if v.is_nan() { None } else { Some(*v) })
    }

    fn cells(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_nan())
            .map(move |(k, v)| (k / self.cols.max(1), k % self.cols.max(1), *v))
    }
}

/// Cell-for-cell equality, bitwise on present values.
impl PartialEq for FieldMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| (a.is_nan() && b.is_nan()) || a.to_bits() == b.to_bits())
    }
}

/// Open, high, low, close, volume and market cap for `N` assets on a shared
/// date axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    assets: Vec<AssetMeta>,
    axis: DateAxis,
    fields: [FieldMatrix; 6],
}

impl Panel {
    /// `fields` are given in [`Field::ALL`] order.
    pub fn new(assets: Vec<AssetMeta>, axis: DateAxis, fields: [FieldMatrix; 6]) -> Result<Self> {
        let (n, d) = (assets.len(), axis.len());
        for (field, m) in Field::ALL.iter().zip(&fields) {
            if m.rows() != n || m.cols() != d {
                return Err(Error::Dimension(format!(
                    "{field} matrix is {}x{}, expected {n}x{d}",
                    m.rows(),
                    m.cols()
                )));
            }
            if let Some((i, s, v)) = m.cells().find(|(_, _, v)| !(v.is_finite() && *v >= 0.0)) {
                return Err(Error::Domain {
                    what: "panel values must be finite and non-negative",
                    asset: assets[i].slug.clone(),
                    date: axis.date_or_default(s),
                    value: v,
                });
            }
        }
        for (i, a) in assets.iter().enumerate() {
            if assets[..i].iter().any(|b| b.slug == a.slug) {
                return Err(Error::Argument(format!("duplicate asset slug `{}`", a.slug)));
            }
        }
        Ok(Self {
            assets,
            axis,
            fields,
        })
    }

    /// A panel whose cells are all missing.
    pub fn empty(assets: Vec<AssetMeta>, axis: DateAxis) -> Result<Self> {
        let (n, d) = (assets.len(), axis.len());
        Self::new(
            assets,
            axis,
            core::array::from_fn(|_| FieldMatrix::missing(n, d)),
        )
    }

    pub fn n_assets(&self) -> usize {
        self.assets.len()
    }

    pub fn n_days(&self) -> usize {
        self.axis.len()
    }

    pub fn assets(&self) -> &[AssetMeta] {
        &self.assets
    }

    pub fn axis(&self) -> &DateAxis {
        &self.axis
    }

    pub fn field(&self, field: Field) -> &FieldMatrix {
        &self.fields[field.index()]
    }

    #[inline]
    pub fn get(&self, field: Field, i: usize, s: usize) -> Option<f64> {
        self.fields[field.index()].get(i, s)
    }

    /// Overwrites one cell, keeping the non-negativity invariant.
    pub fn set(&mut self, field: Field, i: usize, s: usize, value: Option<f64>) -> Result<()> {
        if i >= self.n_assets() || s >= self.n_days() {
            return Err(Error::Range(format!(
                "cell ({i}, {s}) outside {}x{} panel",
                self.n_assets(),
                self.n_days()
            )));
        }
        if let Some(v) = value {
            if !(v.is_finite() && v >= 0.0) {
                return Err(self.domain("panel values must be finite and non-negative", i, s, v));
            }
        }
        self.fields[field.index()].set(i, s, value);
        Ok(())
    }

    pub fn asset_index(&self, slug: &str) -> Option<usize> {
        self.assets.iter().position(|a| a.slug == slug)
    }

    pub fn into_parts(self) -> (Vec<AssetMeta>, DateAxis, [FieldMatrix; 6]) {
        (self.assets, self.axis, self.fields)
    }

    pub(crate) fn domain(&self, what: &'static str, i: usize, s: usize, value: f64) -> Error {
        Error::Domain {
            what,
            asset: self.assets[i].slug.clone(),
            date: self.axis.date_or_default(s),
            value,
        }
    }

    pub(crate) fn check_range(&self, days: &Range<usize>, need_next: bool) -> Result<()> {
        let limit = self.n_days().saturating_sub(need_next as usize);
        if days.start > days.end || days.end > limit {
            return Err(Error::Range(format!(
                "day range {}..{} exceeds the {} usable columns of a {}-day panel",
                days.start,
                days.end,
                limit,
                self.n_days()
            )));
        }
        Ok(())
    }
}

/// Which prices the dependent-variable log return is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReturnConvention {
    /// `ln(close_s / open_s)`.
    #[default]
    OpenToClose,
    /// `ln(close_s / close_{s+1})`.
    CloseToClose,
}

impl ReturnConvention {
    pub fn name(self) -> &'static str {
        match self {
            ReturnConvention::OpenToClose => "open-to-close",
            ReturnConvention::CloseToClose => "close-to-close",
        }
    }

    pub fn compute(self, panel: &Panel, days: Range<usize>) -> Result<ReturnMatrix> {
        let rows: Vec<usize> = (0..panel.n_assets()).collect();
        self.compute_rows(panel, &rows, days)
    }

    /// Like [`ReturnConvention::compute`], but only `rows` are evaluated; all
    /// other rows are left missing.
    pub fn compute_rows(self, panel: &Panel, rows: &[usize], days: Range<usize>) -> Result<ReturnMatrix> {
        match self {
            ReturnConvention::OpenToClose => {
                panel.check_range(&days, false)?;
                log_ratio_matrix(panel, rows, days, self, |i, s| panel.get(Field::Open, i, s), "non-positive open price")
            }
            ReturnConvention::CloseToClose => {
                panel.check_range(&days, true)?;
                log_ratio_matrix(
                    panel,
                    rows,
                    days,
                    self,
                    |i, s| panel.get(Field::Close, i, s + 1),
                    "non-positive previous close price",
                )
            }
        }
    }
}

impl FromStr for ReturnConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "open-to-close" | "oc" => Ok(ReturnConvention::OpenToClose),
            "close-to-close" | "cc" => Ok(ReturnConvention::CloseToClose),
            other => Err(Error::Argument(format!("unknown return convention `{other}`"))),
        }
    }
}

impl fmt::Display for ReturnConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Daily log returns for every panel asset over a contiguous range of columns.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnMatrix {
    convention: ReturnConvention,
    first_day: usize,
    values: FieldMatrix,
}

impl ReturnMatrix {
    pub fn convention(&self) -> ReturnConvention {
        self.convention
    }

    /// Panel columns covered.
    pub fn days(&self) -> Range<usize> {
        self.first_day..self.first_day + self.values.cols()
    }

    pub fn n_assets(&self) -> usize {
        self.values.rows()
    }

    /// Return of asset `i` on panel column `s`; `None` when missing.
    pub fn get(&self, i: usize, s: usize) -> Result<Option<f64>> {
        if !self.days().contains(&s) || i >= self.values.rows() {
            return Err(Error::Range(format!(
                "return ({i}, {s}) outside rows 0..{} and days {:?}",
                self.values.rows(),
                self.days()
            )));
        }
        Ok(self.values.get(i, s - self.first_day))
    }
}

fn log_ratio_matrix(
    panel: &Panel,
    rows: &[usize],
    days: Range<usize>,
    convention: ReturnConvention,
    denominator: impl Fn(usize, usize) -> Option<f64>,
    what: &'static str,
) -> Result<ReturnMatrix> {
    let mut values = FieldMatrix::missing(panel.n_assets(), days.len());
    for &i in rows {
        for (j, s) in days.clone().enumerate() {
            let (Some(num), Some(den)) = (panel.get(Field::Close, i, s), denominator(i, s)) else {
                continue;
            };
            if num <= 0.0 {
                return Err(panel.domain("non-positive close price", i, s, num));
            }
            if den <= 0.0 {
                return Err(panel.domain(what, i, s, den));
            }
            values.set(i, j, Some(math::ln(num / den)));
        }
    }
    Ok(ReturnMatrix {
        convention,
        first_day: days.start,
        values,
    })
}

/// `R_is = ln(close_is / open_is)` over `days`; missing inputs give missing returns.
pub fn open_close_returns(panel: &Panel, days: Range<usize>) -> Result<ReturnMatrix> {
    ReturnConvention::OpenToClose.compute(panel, days)
}

/// `ln(close_is / close_{i,s+1})` over `days`; the oldest column has no
/// predecessor and is a range error.
pub fn close_close_returns(panel: &Panel, days: Range<usize>) -> Result<ReturnMatrix> {
    ReturnConvention::CloseToClose.compute(panel, days)
}
