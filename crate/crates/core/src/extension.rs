//! The labelled Reeb diagram of an extension, rebuilt from an accepted trace.
//!
//! Each edge is one stretch of a level-surface component between two
//! consecutive critical levels that touch it. Its label is the component's
//! `(demigenus, orientability)` over that stretch.

use std::collections::HashMap;
use std::fmt;

use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

use crate::diagram::{dot_quote, DotExport, GermDiagram};
use crate::surface::{
    crosscap_add, crosscap_remove_options, genus_add_options, genus_remove_options, join,
    SurfaceClass,
};
use crate::sweep::{closes_loop, replay, touched_blocks, Trace, TraceRejection, TransitionKind};

#[derive(Debug, Clone, PartialEq)]
pub struct ExtVertex {
    pub id: String,
    pub height: f64,
    pub transition: TransitionKind,
    /// Up-saddle joining two parts of one connected piece.
    pub loop_closing: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtEdge {
    pub id: String,
    pub upper: usize,
    pub lower: usize,
    pub cls: SurfaceClass,
    /// Germ edges lying on this stretch of level surface.
    pub provenance: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtensionDiagram {
    pub vertices: Vec<ExtVertex>,
    pub edges: Vec<ExtEdge>,
    pub loop_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KleinCondition {
    /// Every label orientable and exactly one loop.
    Condition1,
    /// Non-orientable labels form a nonempty connected set and there is no loop.
    Condition2,
    Neither,
}

impl fmt::Display for KleinCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KleinCondition::Condition1 => "condition 1",
            KleinCondition::Condition2 => "condition 2",
            KleinCondition::Neither => "neither condition",
        })
    }
}

pub fn build_extension_diagram(
    germ: &GermDiagram,
    t: &Trace,
) -> Result<ExtensionDiagram, TraceRejection> {
    let states = replay(germ, t)?;
    let mut vertices = Vec::with_capacity(t.steps.len());
    let mut edges = Vec::new();
    let mut loop_count = 0;
    // Start vertex of the open stretch of each block, aligned with the current state.
    let mut open: Vec<usize> = Vec::new();

    for (step, w) in t.steps.iter().zip(states.windows(2)) {
        let (above, below) = (&w[0], &w[1]);
        let v = step.vertex;
        let loop_closing =
            closes_loop(germ, above, v) && step.choice.kind() == TransitionKind::JPlus;
        if loop_closing {
            loop_count += 1;
        }
        let germ_vertex = &germ.vertices()[v];
        vertices.push(ExtVertex {
            id: germ_vertex.id.clone(),
            height: germ_vertex.height,
            transition: step.choice.kind(),
            loop_closing,
        });

        let (old, new) = touched_blocks(germ, v, above, below, &step.choice);
        for &i in &old {
            let b = &above.blocks()[i];
            edges.push(ExtEdge {
                id: format!("h{}", edges.len()),
                upper: open[i],
                lower: v,
                cls: b.cls,
                provenance: b
                    .edges
                    .iter()
                    .map(|&e| germ.edges()[e].id.clone())
                    .collect(),
            });
        }
        let carried: HashMap<&[usize], usize> = above
            .blocks()
            .iter()
            .enumerate()
            .filter(|(i, _)| !old.contains(i))
            .map(|(i, b)| (b.edges.as_slice(), open[i]))
            .collect();
        open = below
            .blocks()
            .iter()
            .enumerate()
            .map(|(j, b)| {
                if new.contains(&j) {
                    v
                } else {
                    carried[b.edges.as_slice()]
                }
            })
            .collect();
    }

    Ok(ExtensionDiagram {
        vertices,
        edges,
        loop_count,
    })
}

impl ExtensionDiagram {
    pub fn component_count(&self) -> usize {
        let mut uf = UnionFind::<usize>::new(self.vertices.len());
        for e in &self.edges {
            uf.union(e.upper, e.lower);
        }
        let mut roots: Vec<usize> = (0..self.vertices.len()).map(|i| uf.find(i)).collect();
        roots.sort_unstable();
        roots.dedup();
        roots.len()
    }

    /// First Betti number E − V + C of the underlying graph.
    pub fn betti1(&self) -> usize {
        self.edges.len() + self.component_count() - self.vertices.len()
    }

    fn incident(&self, v: usize) -> (Vec<SurfaceClass>, Vec<SurfaceClass>) {
        let above = self
            .edges
            .iter()
            .filter(|e| e.lower == v)
            .map(|e| e.cls)
            .collect();
        let below = self
            .edges
            .iter()
            .filter(|e| e.upper == v)
            .map(|e| e.cls)
            .collect();
        (above, below)
    }

    /// Checks the structural and labelling invariants of a collapse target.
    pub fn check_invariants(&self) -> Result<(), String> {
        for e in &self.edges {
            if e.upper >= e.lower || self.vertices[e.upper].height <= self.vertices[e.lower].height
            {
                return Err(format!("edge {} does not descend", e.id));
            }
        }
        if self.betti1() != self.loop_count {
            return Err(format!(
                "betti1 {} differs from loop count {}",
                self.betti1(),
                self.loop_count
            ));
        }
        for (i, v) in self.vertices.iter().enumerate() {
            let (above, below) = self.incident(i);
            let bad = |what: &str| Err(format!("vertex {} ({}): {what}", v.id, v.transition));
            let (want_above, want_below) = match v.transition {
                TransitionKind::MPlus => (0, 1),
                TransitionKind::NMinus => (1, 0),
                TransitionKind::JPlus => (2, 1),
                TransitionKind::JMinus => (1, 2),
                _ => (1, 1),
            };
            if (above.len(), below.len()) != (want_above, want_below) {
                return bad("wrong degree");
            }
            let ok = match v.transition {
                TransitionKind::MPlus => below[0] == SurfaceClass::DISC,
                TransitionKind::NMinus => above[0] == SurfaceClass::DISC,
                TransitionKind::MMinus
                | TransitionKind::NPlus
                | TransitionKind::SPlus
                | TransitionKind::SMinus => above[0] == below[0],
                TransitionKind::JPlus => join(above[0], above[1]) == below[0],
                TransitionKind::JMinus => join(below[0], below[1]) == above[0],
                TransitionKind::GPlus => genus_add_options(above[0]).contains(&below[0]),
                TransitionKind::GMinus => genus_remove_options(above[0]).contains(&below[0]),
                TransitionKind::OPlus => crosscap_add(above[0]) == below[0],
                TransitionKind::OMinus => crosscap_remove_options(above[0]).contains(&below[0]),
            };
            if !ok {
                return bad("labels do not satisfy the local rule");
            }
        }
        Ok(())
    }
}

pub fn check_klein_conditions(x: &ExtensionDiagram) -> KleinCondition {
    let betti1 = x.betti1();
    let twisted: Vec<&ExtEdge> = x.edges.iter().filter(|e| !e.cls.is_orientable()).collect();
    if twisted.is_empty() {
        return if betti1 == 1 {
            KleinCondition::Condition1
        } else {
            KleinCondition::Neither
        };
    }
    if betti1 != 0 {
        return KleinCondition::Neither;
    }
    let mut uf = UnionFind::<usize>::new(x.vertices.len());
    for e in &twisted {
        uf.union(e.upper, e.lower);
    }
    let root = uf.find(twisted[0].upper);
    if twisted.iter().all(|e| uf.find(e.upper) == root) {
        KleinCondition::Condition2
    } else {
        KleinCondition::Neither
    }
}

impl DotExport for ExtensionDiagram {
    fn to_dot(&self) -> String {
        let mut out = String::from("digraph extension {\n");
        for v in &self.vertices {
            let label = format!("{} {} {}", v.id, v.transition, v.height);
            out.push_str(&format!(
                "  {} [label={}];\n",
                dot_quote(&v.id),
                dot_quote(&label)
            ));
        }
        for e in &self.edges {
            out.push_str(&format!(
                "  {} -> {} [label={}];\n",
                dot_quote(&self.vertices[e.upper].id),
                dot_quote(&self.vertices[e.lower].id),
                dot_quote(&e.cls.to_string())
            ));
        }
        out.push_str("}\n");
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtVertexRecord {
    pub id: String,
    pub height: f64,
    pub transition: String,
    pub loop_closing: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtEdgeRecord {
    pub id: String,
    pub upper: String,
    pub lower: String,
    pub label: SurfaceClass,
    pub provenance: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtensionRecord {
    pub loop_count: usize,
    pub vertices: Vec<ExtVertexRecord>,
    pub edges: Vec<ExtEdgeRecord>,
}

impl ExtensionDiagram {
    pub fn to_record(&self) -> ExtensionRecord {
        ExtensionRecord {
            loop_count: self.loop_count,
            vertices: self
                .vertices
                .iter()
                .map(|v| ExtVertexRecord {
                    id: v.id.clone(),
                    height: v.height,
                    transition: v.transition.name().to_string(),
                    loop_closing: v.loop_closing,
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| ExtEdgeRecord {
                    id: e.id.clone(),
                    upper: self.vertices[e.upper].id.clone(),
                    lower: self.vertices[e.lower].id.clone(),
                    label: e.cls,
                    provenance: e.provenance.clone(),
                })
                .collect(),
        }
    }

    pub fn from_record(r: &ExtensionRecord) -> Result<ExtensionDiagram, String> {
        let vertices = r
            .vertices
            .iter()
            .map(|v| {
                let transition = TransitionKind::ALL
                    .into_iter()
                    .find(|k| k.name() == v.transition)
                    .ok_or_else(|| format!("unknown transition `{}`", v.transition))?;
                Ok(ExtVertex {
                    id: v.id.clone(),
                    height: v.height,
                    transition,
                    loop_closing: v.loop_closing,
                })
            })
            .collect::<Result<Vec<_>, String>>()?;
        let index = |id: &str| {
            vertices
                .iter()
                .position(|v| v.id == id)
                .ok_or_else(|| format!("unknown vertex `{id}`"))
        };
        let edges = r
            .edges
            .iter()
            .map(|e| {
                Ok(ExtEdge {
                    id: e.id.clone(),
                    upper: index(&e.upper)?,
                    lower: index(&e.lower)?,
                    cls: e.label,
                    provenance: e.provenance.clone(),
                })
            })
            .collect::<Result<Vec<_>, String>>()?;
        Ok(ExtensionDiagram {
            vertices,
            edges,
            loop_count: r.loop_count,
        })
    }
}
