use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use chrono::NaiveDate;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A value outside the domain of a log/ratio computation.
    #[error("{what} for asset `{asset}` on {date}: got {value}")]
    Domain {
        what: &'static str,
        asset: String,
        date: NaiveDate,
        value: f64,
    },
    #[error("index out of range: {0}")]
    Range(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("design matrix is rank deficient; dependent columns: {}", .columns.join(", "))]
    RankDeficient { columns: Vec<String> },
    #[error("cross-section too small: {n} observations for {k} regressors (need at least {required})")]
    InsufficientCrossSection { n: usize, k: usize, required: usize },
    #[error("factor `{factor}` has zero sample standard deviation")]
    DegenerateSeries { factor: String },
    #[error("reference asset `{0}` has no usable history")]
    MissingReference(String),
    #[error("unknown asset `{0}`")]
    UnknownAsset(String),
    #[error("date {0} is not on the panel's date axis")]
    OffAxisDate(NaiveDate),
    #[error("universe is empty")]
    EmptyUniverse,
    #[error("total {0} is zero on the normalization date")]
    ZeroTotal(&'static str),
    #[error("infeasible synthetic configuration: {0}")]
    Infeasible(String),
    #[error("regression for {date} failed: {source}")]
    Day {
        date: NaiveDate,
        #[source]
        source: Box<Error>,
    },
}
