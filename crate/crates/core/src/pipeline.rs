//! The full analysis of one answer set: supports, constraint annotations,
//! merged table and assumption report.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::assumption::{minimal_assumption_sets, AssumptionReport};
use crate::constraint::{constraint_preprocessing, ConstraintError};
use crate::egraph::merge_supports;
use crate::node::SupportTable;
use crate::program::{AtomId, GroundProgram};
use crate::support::{build_er, SupportError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnalysisError {
    #[error(transparent)]
    Support(#[from] SupportError),
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
}

#[derive(Clone, Debug)]
pub struct Analysis {
    pub answer: BTreeSet<AtomId>,
    pub er: SupportTable,
    pub ec: SupportTable,
    pub e: SupportTable,
    pub report: AssumptionReport,
}

pub fn analyze(g: &GroundProgram, answer: &BTreeSet<AtomId>) -> Result<Analysis, AnalysisError> {
    let er = build_er(g, answer)?;
    let ec = constraint_preprocessing(g, answer)?;
    let e = merge_supports(&er, &ec);
    let report = minimal_assumption_sets(g, answer, &e);
    Ok(Analysis {
        answer: answer.clone(),
        er,
        ec,
        e,
        report,
    })
}
