use std::path::PathBuf;

use crate::domain::{CaseId, CmgCode, Violation};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{file}: line {line}: column `{column}`: {message}")]
    Parse {
        file: String,
        line: u64,
        column: String,
        message: String,
    },

    #[error("{file}: missing required column `{column}`")]
    MissingColumn { file: String, column: String },

    #[error("{file}: expected exactly one data row, found {found}")]
    RowCount { file: String, found: usize },

    #[error("CMG {cmg}: {detail}")]
    CrossTable { cmg: CmgCode, detail: String },

    #[error("duplicate case id {0}")]
    DuplicateCase(CaseId),

    #[error("{context}: {}", format_violations(.violations))]
    Invalid {
        context: String,
        violations: Vec<Violation>,
    },

    #[error("CMG {cmg}: PAC weights need redistribution but the RIW sum is zero")]
    ZeroRiwSum { cmg: CmgCode },

    #[error("case {0} has no entry in the weight map")]
    MissingWeight(CaseId),

    #[error("cannot normalize: {0} is not positive")]
    ZeroDenominator(&'static str),

    #[error("CMG coverage mismatch: {0}")]
    Coverage(String),

    #[error("CMG {0}: actual total cost is zero, relative error undefined")]
    ZeroActualTotal(CmgCode),

    #[error("the hybrid model combines per-CMG statistics; use the aggregation step (report --hybrid) instead of per-case estimation")]
    HybridPerCase,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("grid is empty")]
    EmptyGrid,

    #[error("grid has {points} points, above the cap of {cap}")]
    GridTooLarge { points: u64, cap: u64 },

    #[error("infeasible synthetic spec: {0}")]
    InfeasibleSpec(String),

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
