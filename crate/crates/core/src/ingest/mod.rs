//! FRED-MD ingestion: fetching vintages, parsing the CSV layout and
//! applying the per-series transformation codes.

mod panel;
mod parse;
mod transform;
mod vintage;

pub use panel::{SeriesPanel, TransformedPanel};
pub use parse::{parse_fredmd, to_fredmd_csv};
pub use transform::{apply_tcode, build_transformed_panel, leading_missing_added};
pub use vintage::{content_hash, fetch_vintage, vintage_id_from_source, FetchOutcome, Vintage};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IngestError {
    #[error("network error fetching {url}: {reason}")]
    Network { url: String, reason: String },
    #[error("source not found: {0}")]
    NotFound(String),
    #[error("source returned an empty body")]
    EmptyBody,
    #[error("input is not valid UTF-8")]
    Encoding,
    #[error("missing `sasdate` header row")]
    MissingHeader,
    #[error("bad header: {0}")]
    BadHeader(String),
    #[error("missing `Transform:` row")]
    MissingTransformRow,
    #[error("bad transformation code `{value}` for series {series}")]
    BadTcode { series: String, value: String },
    #[error("row {row}: expected {expected} cells, found {found}")]
    RaggedRow { row: usize, expected: usize, found: usize },
    #[error("row {row}, column {column}: cannot parse `{value}` as a number")]
    BadNumber { row: usize, column: usize, value: String },
    #[error("row {row}: bad date `{value}`")]
    BadDate { row: usize, value: String },
    #[error("row {row}: date is not one month after the previous row")]
    NonConsecutiveDates { row: usize },
    #[error("invalid panel: {0}")]
    InvalidPanel(String),
    #[error("series {series}: transformation code {tcode} takes logs of a non-positive value")]
    NonPositiveForLog { series: String, tcode: u8 },
}
