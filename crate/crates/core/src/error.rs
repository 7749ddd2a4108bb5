use alloc::string::String;

/// Errors raised by the recognition toolkit.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid image dimensions {width}x{height} with {pixels} pixels")]
    Dimension {
        width: usize,
        height: usize,
        pixels: usize,
    },
    #[error("cannot split an image of width {width} into {blocks} blocks")]
    TooManyBlocks { width: usize, blocks: usize },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("image contains no ink")]
    EmptyInk,
    #[error("invalid Zernike index (order {order}, repetition {repetition})")]
    InvalidZernikeIndex { order: u32, repetition: i32 },
    #[error("column {column} has zero variance")]
    ZeroVariance { column: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("silhouette is undefined for fewer than two clusters")]
    UndefinedSilhouette,
    #[error("class {class} has no training samples")]
    MissingClass { class: usize },
    #[error("structure learning needs at least two attributes, found {attributes}")]
    TooFewAttributes { attributes: usize },
    #[error("label {label} out of range for attribute {attribute} (cardinality {cardinality})")]
    LabelOutOfRange {
        attribute: usize,
        label: usize,
        cardinality: usize,
    },
    #[error("class {class} out of range for {classes} classes")]
    ClassOutOfRange { class: usize, classes: usize },
    #[error("symbol {symbol} out of range for chain {chain} ({symbols} symbols)")]
    SymbolOutOfRange {
        chain: usize,
        symbol: usize,
        symbols: usize,
    },
    #[error("class {class} has {count} samples, at least {required} are required")]
    ClassTooSmall {
        class: usize,
        count: usize,
        required: usize,
    },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("invalid probability table: {0}")]
    InvalidDistribution(String),
    #[error("empty input: {0}")]
    Empty(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
