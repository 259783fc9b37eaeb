//! Text form of traces.
//!
//! ```toml
//! [[steps]]
//! vertex = "a"
//! choice = { tag = "MPlus" }
//!
//! [[steps]]
//! vertex = "b"
//! choice = { tag = "JMinus", parts = [["e2"], ["e3"]], labels = [[0, 0], [0, 0]] }
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagram::{syntax_error, DiagramError, GermDiagram};
use crate::surface::SurfaceClass;
use crate::sweep::{Trace, TraceStep, TransitionChoice};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "tag", deny_unknown_fields)]
pub enum ChoiceRecord {
    MPlus,
    MMinus {
        host: usize,
    },
    NMinus,
    NPlus,
    SPlus,
    SMinus,
    JPlus,
    GPlus {
        label: SurfaceClass,
    },
    JMinus {
        parts: [Vec<String>; 2],
        labels: [SurfaceClass; 2],
    },
    GMinus {
        label: SurfaceClass,
    },
    OPlus,
    OMinus {
        label: SurfaceClass,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepRecord {
    pub vertex: String,
    pub choice: ChoiceRecord,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceFile {
    pub steps: Vec<StepRecord>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TraceFormatError {
    #[error(transparent)]
    Syntax(#[from] DiagramError),
    #[error("step {step}: unknown vertex `{vertex}`")]
    UnknownVertex { step: usize, vertex: String },
    #[error("step {step}: unknown edge `{edge}`")]
    UnknownEdge { step: usize, edge: String },
    #[error("step {step}: JMinus parts must each contain exactly one down edge of the vertex")]
    BadParts { step: usize },
}

pub fn trace_to_records(germ: &GermDiagram, t: &Trace) -> TraceFile {
    let edge_ids = |edges: &[usize]| -> Vec<String> {
        edges.iter().map(|&e| germ.edges()[e].id.clone()).collect()
    };
    let steps = t
        .steps
        .iter()
        .map(|s| StepRecord {
            vertex: germ.vertices()[s.vertex].id.clone(),
            choice: match &s.choice {
                TransitionChoice::MPlus => ChoiceRecord::MPlus,
                TransitionChoice::MMinus { host } => ChoiceRecord::MMinus { host: *host },
                TransitionChoice::NMinus => ChoiceRecord::NMinus,
                TransitionChoice::NPlus => ChoiceRecord::NPlus,
                TransitionChoice::SPlus => ChoiceRecord::SPlus,
                TransitionChoice::SMinus => ChoiceRecord::SMinus,
                TransitionChoice::JPlus => ChoiceRecord::JPlus,
                TransitionChoice::GPlus { label } => ChoiceRecord::GPlus { label: *label },
                TransitionChoice::JMinus { parts, labels } => ChoiceRecord::JMinus {
                    parts: [edge_ids(&parts[0]), edge_ids(&parts[1])],
                    labels: *labels,
                },
                TransitionChoice::GMinus { label } => ChoiceRecord::GMinus { label: *label },
                TransitionChoice::OPlus => ChoiceRecord::OPlus,
                TransitionChoice::OMinus { label } => ChoiceRecord::OMinus { label: *label },
            },
        })
        .collect();
    TraceFile { steps }
}

/// Resolves ids against the germ. JMinus parts may be given in either order;
/// they are normalized so that the first part holds the lower-indexed down edge.
pub fn trace_from_records(germ: &GermDiagram, file: &TraceFile) -> Result<Trace, TraceFormatError> {
    let mut steps = Vec::with_capacity(file.steps.len());
    for (i, rec) in file.steps.iter().enumerate() {
        let vertex =
            germ.vertex_index(&rec.vertex)
                .ok_or_else(|| TraceFormatError::UnknownVertex {
                    step: i,
                    vertex: rec.vertex.clone(),
                })?;
        let choice = match &rec.choice {
            ChoiceRecord::MPlus => TransitionChoice::MPlus,
            ChoiceRecord::MMinus { host } => TransitionChoice::MMinus { host: *host },
            ChoiceRecord::NMinus => TransitionChoice::NMinus,
            ChoiceRecord::NPlus => TransitionChoice::NPlus,
            ChoiceRecord::SPlus => TransitionChoice::SPlus,
            ChoiceRecord::SMinus => TransitionChoice::SMinus,
            ChoiceRecord::JPlus => TransitionChoice::JPlus,
            ChoiceRecord::GPlus { label } => TransitionChoice::GPlus { label: *label },
            ChoiceRecord::JMinus { parts, labels } => {
                let resolve = |ids: &[String]| -> Result<Vec<usize>, TraceFormatError> {
                    let mut out = ids
                        .iter()
                        .map(|id| {
                            germ.edge_index(id)
                                .ok_or_else(|| TraceFormatError::UnknownEdge {
                                    step: i,
                                    edge: id.clone(),
                                })
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    out.sort_unstable();
                    Ok(out)
                };
                let (p0, p1) = (resolve(&parts[0])?, resolve(&parts[1])?);
                let down = germ.down_edges(vertex);
                if down.len() != 2 {
                    return Err(TraceFormatError::BadParts { step: i });
                }
                let holds = |p: &[usize], e: usize| p.binary_search(&e).is_ok();
                if holds(&p0, down[0]) && holds(&p1, down[1]) {
                    TransitionChoice::JMinus {
                        parts: [p0, p1],
                        labels: *labels,
                    }
                } else if holds(&p1, down[0]) && holds(&p0, down[1]) {
                    TransitionChoice::JMinus {
                        parts: [p1, p0],
                        labels: [labels[1], labels[0]],
                    }
                } else {
                    return Err(TraceFormatError::BadParts { step: i });
                }
            }
            ChoiceRecord::GMinus { label } => TransitionChoice::GMinus { label: *label },
            ChoiceRecord::OPlus => TransitionChoice::OPlus,
            ChoiceRecord::OMinus { label } => TransitionChoice::OMinus { label: *label },
        };
        steps.push(TraceStep { vertex, choice });
    }
    Ok(Trace { steps })
}

pub fn serialize_trace(germ: &GermDiagram, t: &Trace) -> String {
    toml::to_string(&trace_to_records(germ, t)).expect("traces always serialize")
}

pub fn parse_trace(germ: &GermDiagram, text: &str) -> Result<Trace, TraceFormatError> {
    let file: TraceFile = toml::from_str(text).map_err(|e| syntax_error(text, &e))?;
    trace_from_records(germ, &file)
}
