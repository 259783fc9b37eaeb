//! Witness bundles: the accepting trace together with the extension diagram it
//! builds, so a witness can be re-checked against its germ or drawn on its own.
//!
//! ```toml
//! mode = "klein"
//! condition = "condition2"
//!
//! [[steps]]
//! vertex = "top"
//! choice = { tag = "MPlus" }
//!
//! [diagram]
//! loop_count = 0
//! # vertices and edges of the extension diagram
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagram::{syntax_error, DiagramError, GermDiagram};
use crate::extension::{
    build_extension_diagram, check_klein_conditions, ExtensionDiagram, ExtensionRecord,
    KleinCondition,
};
use crate::search::{Mode, Witness};
use crate::sweep::TraceRejection;
use crate::trace::{trace_from_records, trace_to_records, StepRecord, TraceFormatError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessFile {
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition: Option<KleinCondition>,
    pub steps: Vec<StepRecord>,
    pub diagram: ExtensionRecord,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WitnessError {
    #[error(transparent)]
    Syntax(#[from] DiagramError),
    #[error(transparent)]
    Trace(#[from] TraceFormatError),
    #[error("trace rejected: {0}")]
    Rejected(#[from] TraceRejection),
    #[error("bad diagram record: {0}")]
    Record(String),
    #[error("stored diagram does not match the one built from the trace")]
    DiagramMismatch,
    #[error("stored condition {stored:?} does not match computed {computed:?}")]
    ConditionMismatch {
        stored: Option<KleinCondition>,
        computed: Option<KleinCondition>,
    },
}

pub fn serialize_witness(germ: &GermDiagram, mode: Mode, w: &Witness) -> String {
    let file = WitnessFile {
        mode,
        condition: w.condition,
        steps: trace_to_records(germ, &w.trace).steps,
        diagram: w.diagram.to_record(),
    };
    toml::to_string(&file).expect("witnesses always serialize")
}

/// Reads a bundle without a germ. Only the stored diagram is available.
pub fn parse_witness_file(text: &str) -> Result<WitnessFile, WitnessError> {
    toml::from_str(text).map_err(|e| WitnessError::Syntax(syntax_error(text, &e)))
}

pub fn witness_diagram(file: &WitnessFile) -> Result<ExtensionDiagram, WitnessError> {
    ExtensionDiagram::from_record(&file.diagram).map_err(WitnessError::Record)
}

/// Reads a bundle and replays its trace on `germ`. The rebuilt diagram and
/// condition must agree with what the bundle stores.
pub fn parse_witness(germ: &GermDiagram, text: &str) -> Result<(Mode, Witness), WitnessError> {
    let file = parse_witness_file(text)?;
    let trace = trace_from_records(
        germ,
        &crate::trace::TraceFile {
            steps: file.steps.clone(),
        },
    )?;
    let diagram = build_extension_diagram(germ, &trace)?;
    if diagram != witness_diagram(&file)? {
        return Err(WitnessError::DiagramMismatch);
    }
    let computed = (file.mode == Mode::Klein).then(|| check_klein_conditions(&diagram));
    if computed != file.condition {
        return Err(WitnessError::ConditionMismatch {
            stored: file.condition,
            computed,
        });
    }
    Ok((
        file.mode,
        Witness {
            trace,
            diagram,
            condition: computed,
        },
    ))
}
