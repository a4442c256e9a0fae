use thiserror::Error;

use crate::domain::{FluentKind, Ident};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("unknown time point {0}")]
    UnknownTimePoint(Ident),
    #[error("undeclared identifier {0}")]
    Undeclared(Ident),
    #[error("ill-sorted term: {0}")]
    IllSorted(String),
    #[error("fluent kind {} has no threat table", .0.name())]
    UnsupportedFluent(FluentKind),
    #[error("time points {0} and {1} are not consecutive")]
    NonConsecutive(Ident, Ident),
}
