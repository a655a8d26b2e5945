use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cell {cell} out of range for {cells} cells")]
    CellOutOfRange { cell: usize, cells: usize },

    /// Rejection sampling could not hit the cell; its area is (nearly) zero.
    #[error("cell {cell} is degenerate: no sample accepted after {attempts} draws")]
    DegenerateCell { cell: usize, attempts: u64 },

    /// Zero-forcing needs more antennas than scheduled users.
    #[error("ZFC infeasible in cell {cell}: {antennas} antennas for {users} users")]
    ZfcInfeasible {
        cell: usize,
        antennas: u32,
        users: u32,
    },

    #[error("not a deviation: cell {cell} already belongs to the target coalition")]
    NotADeviation { cell: usize },

    #[error("invalid coalition structure: {0}")]
    InvalidStructure(String),

    #[error("partition enumeration limited to 1..={max} cells, got {cells}")]
    TooManyCells { cells: usize, max: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("csv: {0}")]
    Csv(String),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}
