//! Cross-sectional factor models for daily cryptoasset returns.
//!
//! The crate is `no_std` (with `alloc`) and carries the whole numerical
//! pipeline: asset×date panels, history aggregation, universe selection,
//! out-of-sample factor loadings, daily cross-sectional OLS with annualized
//! t-statistics, cap/price weighted indexes, and a synthetic panel generator
//! with planted factor structure. File formats and the command-line frontend
//! live in the `cryptofactor` crate.
//!
//! Date columns are stored most-recent-first: column `s = 0` is the latest
//! date and `s` grows going back in time. Every window computation in the
//! crate is written against that convention.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;
mod math;

pub mod factors;
pub mod index;
pub mod ingest;
pub mod linalg;
pub mod panel;
pub mod regress;
pub mod synth;
pub mod universe;

pub use error::{Error, Result};
pub use factors::{Factor, FactorSpec, LoadingsCube};
pub use index::{IndexKind, IndexSeries, Split, SplitTable};
pub use ingest::{AssetHistory, BadAssetList, HistoryRow};
pub use panel::{AssetMeta, DateAxis, Field, FieldMatrix, Panel, ReturnConvention, ReturnMatrix};
pub use regress::{Backtest, DayRegression, FactorReturnSeries, TStat, TStatReport};
pub use synth::{GroundTruth, SynthConfig};
pub use universe::{Exclusion, UniverseMask, WindowSpec};
