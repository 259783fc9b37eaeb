//! Downward sweep over a germ diagram.
//!
//! Between two critical levels, the level surface of an extension is a
//! disjoint union of components. Each component is recorded as a [`Block`]:
//! the germ edges (boundary circles) lying on it, its label, and the
//! connected component of the 3-manifold built so far that contains it.
//! Processing germ vertices from the top down, [`successors`] enumerates every
//! legal way the level surface can change at that vertex. Runs that start and
//! end with an empty level surface are exactly the allowable collapses.

use std::collections::BTreeMap;
use std::fmt;

use crate::diagram::{GermDiagram, Sign, VertexKind};
use crate::surface::{
    crosscap_add, crosscap_remove_options, genus_add_options, genus_remove_options, join,
    split_options, SurfaceClass,
};

/// One component of the current level surface.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Block {
    /// Germ edge indices, ascending.
    pub edges: Vec<usize>,
    pub cls: SurfaceClass,
    pub component: u32,
}

impl Block {
    fn first_edge(&self) -> usize {
        self.edges[0]
    }
}

/// Level surface between two critical values.
///
/// States returned by this module are canonical: blocks are ordered by their
/// smallest edge and component ids are numbered by first appearance.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SweepState {
    blocks: Vec<Block>,
}

/// Canonical form of a [`SweepState`], usable as a memo key.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateKey(Vec<(Vec<usize>, SurfaceClass, u32)>);

pub fn initial_state() -> SweepState {
    SweepState::default()
}

impl SweepState {
    /// Builds a state from arbitrary blocks; the result is canonicalized.
    pub fn new(blocks: Vec<Block>) -> SweepState {
        SweepState { blocks }.into_canonical()
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block_of(&self, edge: usize) -> Option<usize> {
        self.blocks
            .iter()
            .position(|b| b.edges.binary_search(&edge).is_ok())
    }

    pub fn active_edge_count(&self) -> usize {
        self.blocks.iter().map(|b| b.edges.len()).sum()
    }

    pub fn total_demigenus(&self) -> u32 {
        self.blocks.iter().map(|b| b.cls.demigenus()).sum()
    }

    fn into_canonical(mut self) -> SweepState {
        for b in &mut self.blocks {
            b.edges.sort_unstable();
        }
        self.blocks.sort_by_key(Block::first_edge);
        let mut renumber = BTreeMap::new();
        for b in &mut self.blocks {
            let next = renumber.len() as u32;
            b.component = *renumber.entry(b.component).or_insert(next);
        }
        self
    }

    /// Checks the structural invariants against the expected active edge set.
    pub fn check_invariants(&self, active: &[usize]) -> Result<(), String> {
        let mut covered: Vec<usize> = Vec::new();
        for (i, b) in self.blocks.iter().enumerate() {
            if b.edges.is_empty() {
                return Err(format!("block {i} is empty"));
            }
            if !b.edges.windows(2).all(|w| w[0] < w[1]) {
                return Err(format!("block {i} edges are not strictly ascending"));
            }
            covered.extend(&b.edges);
        }
        covered.sort_unstable();
        if covered.windows(2).any(|w| w[0] == w[1]) {
            return Err("blocks overlap".into());
        }
        let mut expected = active.to_vec();
        expected.sort_unstable();
        if covered != expected {
            return Err(format!(
                "blocks cover {covered:?}, active edges are {expected:?}"
            ));
        }
        Ok(())
    }
}

pub fn canonicalize(s: &SweepState) -> StateKey {
    let canonical = s.clone().into_canonical();
    StateKey(
        canonical
            .blocks
            .into_iter()
            .map(|b| (b.edges, b.cls, b.component))
            .collect(),
    )
}

/// Resolved nondeterminism at one germ vertex. Edge payloads are germ edge indices.
///
/// The derived order is the canonical choice order used for tie-breaking.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TransitionChoice {
    MPlus,
    /// Index of the host block in the canonical order of the state above.
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
    /// `parts[0]` holds the lower-indexed down edge, `parts[1]` the other.
    JMinus {
        parts: [Vec<usize>; 2],
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

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TransitionKind {
    MPlus,
    MMinus,
    NMinus,
    NPlus,
    SPlus,
    SMinus,
    JPlus,
    GPlus,
    JMinus,
    GMinus,
    OPlus,
    OMinus,
}

impl TransitionKind {
    pub const ALL: [TransitionKind; 12] = [
        TransitionKind::MPlus,
        TransitionKind::MMinus,
        TransitionKind::NMinus,
        TransitionKind::NPlus,
        TransitionKind::SPlus,
        TransitionKind::SMinus,
        TransitionKind::JPlus,
        TransitionKind::GPlus,
        TransitionKind::JMinus,
        TransitionKind::GMinus,
        TransitionKind::OPlus,
        TransitionKind::OMinus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TransitionKind::MPlus => "MPlus",
            TransitionKind::MMinus => "MMinus",
            TransitionKind::NMinus => "NMinus",
            TransitionKind::NPlus => "NPlus",
            TransitionKind::SPlus => "SPlus",
            TransitionKind::SMinus => "SMinus",
            TransitionKind::JPlus => "JPlus",
            TransitionKind::GPlus => "GPlus",
            TransitionKind::JMinus => "JMinus",
            TransitionKind::GMinus => "GMinus",
            TransitionKind::OPlus => "OPlus",
            TransitionKind::OMinus => "OMinus",
        }
    }

    /// Change in the number of boundary circles of the level surface.
    pub fn boundary_delta(self) -> i32 {
        match self {
            TransitionKind::SPlus | TransitionKind::MMinus | TransitionKind::MPlus => 1,
            TransitionKind::SMinus | TransitionKind::NPlus | TransitionKind::NMinus => -1,
            TransitionKind::OPlus | TransitionKind::OMinus => 0,
            TransitionKind::GPlus | TransitionKind::JPlus => -1,
            TransitionKind::GMinus | TransitionKind::JMinus => 1,
        }
    }

    /// Vertex (kind, sign) pairs at which this transition can occur.
    pub fn vertex(self) -> (VertexKind, Sign) {
        use Sign::*;
        use VertexKind::*;
        match self {
            TransitionKind::MPlus => (Max, Plus),
            TransitionKind::MMinus => (Max, Minus),
            TransitionKind::NMinus => (Min, Minus),
            TransitionKind::NPlus => (Min, Plus),
            TransitionKind::SPlus => (DownSaddle, Plus),
            TransitionKind::SMinus => (UpSaddle, Minus),
            TransitionKind::JPlus | TransitionKind::GPlus => (UpSaddle, Plus),
            TransitionKind::JMinus | TransitionKind::GMinus => (DownSaddle, Minus),
            TransitionKind::OPlus => (Mobius, Plus),
            TransitionKind::OMinus => (Mobius, Minus),
        }
    }
}

impl fmt::Display for TransitionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl TransitionChoice {
    pub fn kind(&self) -> TransitionKind {
        match self {
            TransitionChoice::MPlus => TransitionKind::MPlus,
            TransitionChoice::MMinus { .. } => TransitionKind::MMinus,
            TransitionChoice::NMinus => TransitionKind::NMinus,
            TransitionChoice::NPlus => TransitionKind::NPlus,
            TransitionChoice::SPlus => TransitionKind::SPlus,
            TransitionChoice::SMinus => TransitionKind::SMinus,
            TransitionChoice::JPlus => TransitionKind::JPlus,
            TransitionChoice::GPlus { .. } => TransitionKind::GPlus,
            TransitionChoice::JMinus { .. } => TransitionKind::JMinus,
            TransitionChoice::GMinus { .. } => TransitionKind::GMinus,
            TransitionChoice::OPlus => TransitionKind::OPlus,
            TransitionChoice::OMinus { .. } => TransitionKind::OMinus,
        }
    }
}

/// Replaces `remove` by `add` in a sorted edge list.
fn swap_edges(edges: &[usize], remove: &[usize], add: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = edges
        .iter()
        .copied()
        .filter(|e| !remove.contains(e))
        .chain(add.iter().copied())
        .collect();
    out.sort_unstable();
    out
}

fn with_block(s: &SweepState, at: usize, block: Block) -> SweepState {
    let mut blocks = s.blocks.clone();
    blocks[at] = block;
    SweepState { blocks }.into_canonical()
}

/// All legal transitions at vertex `v`, in canonical choice order.
///
/// `s` must be the state reached after every vertex above `v`, so that all of
/// `v`'s up-edges are active. An empty result is a dead end.
pub fn successors(
    germ: &GermDiagram,
    s: &SweepState,
    v: usize,
) -> Vec<(SweepState, TransitionChoice)> {
    let vertex = &germ.vertices()[v];
    let up = germ.up_edges(v);
    let down = germ.down_edges(v);
    let owner = |e: usize| {
        s.block_of(e)
            .unwrap_or_else(|| panic!("up-edge {e} of vertex {v} is not active"))
    };
    let mut out = Vec::new();

    match (vertex.kind, vertex.sign) {
        (VertexKind::Max, Sign::Plus) => {
            let fresh = s.blocks.iter().map(|b| b.component + 1).max().unwrap_or(0);
            let mut blocks = s.blocks.clone();
            blocks.push(Block {
                edges: vec![down[0]],
                cls: SurfaceClass::DISC,
                component: fresh,
            });
            out.push((
                SweepState { blocks }.into_canonical(),
                TransitionChoice::MPlus,
            ));
        }
        (VertexKind::Max, Sign::Minus) => {
            for (host, b) in s.blocks.iter().enumerate() {
                let block = Block {
                    edges: swap_edges(&b.edges, &[], &[down[0]]),
                    ..b.clone()
                };
                out.push((
                    with_block(s, host, block),
                    TransitionChoice::MMinus { host },
                ));
            }
        }
        (VertexKind::Min, Sign::Minus) => {
            let p = owner(up[0]);
            let b = &s.blocks[p];
            if b.edges.len() == 1 && b.cls == SurfaceClass::DISC {
                let mut blocks = s.blocks.clone();
                blocks.remove(p);
                out.push((
                    SweepState { blocks }.into_canonical(),
                    TransitionChoice::NMinus,
                ));
            }
        }
        (VertexKind::Min, Sign::Plus) => {
            let p = owner(up[0]);
            let b = &s.blocks[p];
            if b.edges.len() >= 2 {
                let block = Block {
                    edges: swap_edges(&b.edges, up, &[]),
                    ..b.clone()
                };
                out.push((with_block(s, p, block), TransitionChoice::NPlus));
            }
        }
        (VertexKind::DownSaddle, Sign::Plus) => {
            let p = owner(up[0]);
            let b = &s.blocks[p];
            let block = Block {
                edges: swap_edges(&b.edges, up, down),
                ..b.clone()
            };
            out.push((with_block(s, p, block), TransitionChoice::SPlus));
        }
        (VertexKind::DownSaddle, Sign::Minus) => {
            let p = owner(up[0]);
            let b = &s.blocks[p];
            for label in genus_remove_options(b.cls) {
                let block = Block {
                    edges: swap_edges(&b.edges, up, down),
                    cls: label,
                    component: b.component,
                };
                out.push((with_block(s, p, block), TransitionChoice::GMinus { label }));
            }
            let rest = swap_edges(&b.edges, up, &[]);
            let mut labelings = Vec::new();
            for (c1, c2) in split_options(b.cls) {
                labelings.push([c1, c2]);
                if c1 != c2 {
                    labelings.push([c2, c1]);
                }
            }
            assert!(
                rest.len() < 64,
                "too many boundary circles on one component"
            );
            for mask in 0..(1u64 << rest.len()) {
                let (mut x, mut y) = (vec![down[0]], vec![down[1]]);
                for (i, &e) in rest.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        x.push(e);
                    } else {
                        y.push(e);
                    }
                }
                x.sort_unstable();
                y.sort_unstable();
                for labels in &labelings {
                    let mut blocks = s.blocks.clone();
                    blocks[p] = Block {
                        edges: x.clone(),
                        cls: labels[0],
                        component: b.component,
                    };
                    blocks.push(Block {
                        edges: y.clone(),
                        cls: labels[1],
                        component: b.component,
                    });
                    out.push((
                        SweepState { blocks }.into_canonical(),
                        TransitionChoice::JMinus {
                            parts: [x.clone(), y.clone()],
                            labels: *labels,
                        },
                    ));
                }
            }
        }
        (VertexKind::UpSaddle, Sign::Minus) => {
            let (p1, p2) = (owner(up[0]), owner(up[1]));
            if p1 == p2 {
                let b = &s.blocks[p1];
                let block = Block {
                    edges: swap_edges(&b.edges, up, down),
                    ..b.clone()
                };
                out.push((with_block(s, p1, block), TransitionChoice::SMinus));
            }
        }
        (VertexKind::UpSaddle, Sign::Plus) => {
            let (p1, p2) = (owner(up[0]), owner(up[1]));
            if p1 != p2 {
                let (b1, b2) = (&s.blocks[p1], &s.blocks[p2]);
                let (keep, drop) = (b1.component, b2.component);
                let merged = Block {
                    edges: swap_edges(
                        &[b1.edges.as_slice(), b2.edges.as_slice()].concat(),
                        up,
                        down,
                    ),
                    cls: join(b1.cls, b2.cls),
                    component: keep,
                };
                let mut blocks: Vec<Block> = s
                    .blocks
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != p1 && i != p2)
                    .map(|(_, b)| b.clone())
                    .collect();
                blocks.push(merged);
                for b in &mut blocks {
                    if b.component == drop {
                        b.component = keep;
                    }
                }
                out.push((
                    SweepState { blocks }.into_canonical(),
                    TransitionChoice::JPlus,
                ));
            } else {
                let b = &s.blocks[p1];
                for label in genus_add_options(b.cls) {
                    let block = Block {
                        edges: swap_edges(&b.edges, up, down),
                        cls: label,
                        component: b.component,
                    };
                    out.push((with_block(s, p1, block), TransitionChoice::GPlus { label }));
                }
            }
        }
        (VertexKind::Mobius, Sign::Plus) => {
            let p = owner(up[0]);
            let b = &s.blocks[p];
            let block = Block {
                edges: swap_edges(&b.edges, up, down),
                cls: crosscap_add(b.cls),
                component: b.component,
            };
            out.push((with_block(s, p, block), TransitionChoice::OPlus));
        }
        (VertexKind::Mobius, Sign::Minus) => {
            let p = owner(up[0]);
            let b = &s.blocks[p];
            for label in crosscap_remove_options(b.cls) {
                let block = Block {
                    edges: swap_edges(&b.edges, up, down),
                    cls: label,
                    component: b.component,
                };
                out.push((with_block(s, p, block), TransitionChoice::OMinus { label }));
            }
        }
    }

    out.sort_by(|a, b| a.1.cmp(&b.1));
    out
}

/// Whether an up-saddle at `v` joins two blocks that already lie in the same
/// component, closing a loop in the extension diagram.
pub fn closes_loop(germ: &GermDiagram, s: &SweepState, v: usize) -> bool {
    let up = germ.up_edges(v);
    if up.len() != 2 {
        return false;
    }
    match (s.block_of(up[0]), s.block_of(up[1])) {
        (Some(a), Some(b)) => a != b && s.blocks[a].component == s.blocks[b].component,
        _ => false,
    }
}

/// Blocks touched by the transition at `v`: indices into the state above and
/// into the state below. Every other block passes through unchanged.
pub fn touched_blocks(
    germ: &GermDiagram,
    v: usize,
    above: &SweepState,
    below: &SweepState,
    choice: &TransitionChoice,
) -> (Vec<usize>, Vec<usize>) {
    let mut old: Vec<usize> = germ
        .up_edges(v)
        .iter()
        .filter_map(|&e| above.block_of(e))
        .collect();
    if let TransitionChoice::MMinus { host } = choice {
        old.push(*host);
    }
    old.sort_unstable();
    old.dedup();
    let mut new: Vec<usize> = germ
        .down_edges(v)
        .iter()
        .filter_map(|&e| below.block_of(e))
        .collect();
    if let TransitionChoice::NPlus = choice {
        // The block survives without the closed circle.
        let survivor = old
            .first()
            .and_then(|&p| {
                above.blocks[p]
                    .edges
                    .iter()
                    .find(|e| !germ.up_edges(v).contains(e))
            })
            .and_then(|&e| below.block_of(e));
        new.extend(survivor);
    }
    new.sort_unstable();
    new.dedup();
    (old, new)
}

/// Edges with exactly one endpoint at or above step `v` (the active set after processing `v`).
pub fn active_edges_after(germ: &GermDiagram, v: usize) -> Vec<usize> {
    germ.edges()
        .iter()
        .enumerate()
        .filter(|(_, e)| e.upper <= v && e.lower > v)
        .map(|(i, _)| i)
        .collect()
}

/// Resolved run: one choice per germ vertex, in sweep order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Trace {
    pub steps: Vec<TraceStep>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TraceStep {
    /// Vertex index in the germ's canonical order.
    pub vertex: usize,
    pub choice: TransitionChoice,
}

impl Trace {
    pub fn from_choices(choices: Vec<TransitionChoice>) -> Trace {
        Trace {
            steps: choices
                .into_iter()
                .enumerate()
                .map(|(vertex, choice)| TraceStep { vertex, choice })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRejection {
    /// Step at which replay failed; equals the trace length when the
    /// failure is detected after the last step.
    pub step: usize,
    pub vertex: Option<String>,
    pub reason: String,
}

impl fmt::Display for TraceRejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.vertex {
            Some(v) => write!(f, "step {} (vertex `{}`): {}", self.step, v, self.reason),
            None => write!(f, "step {}: {}", self.step, self.reason),
        }
    }
}

impl std::error::Error for TraceRejection {}

/// Replays a trace, returning the state before each step followed by the final state.
pub fn replay(germ: &GermDiagram, t: &Trace) -> Result<Vec<SweepState>, TraceRejection> {
    let n = germ.vertices().len();
    let mut states = vec![initial_state()];
    for (i, step) in t.steps.iter().enumerate() {
        let reject = |reason: String| TraceRejection {
            step: i,
            vertex: germ.vertices().get(step.vertex).map(|v| v.id.clone()),
            reason,
        };
        if step.vertex != i || i >= n {
            return Err(reject(format!(
                "vertex out of order: expected {}",
                germ.vertices()
                    .get(i)
                    .map_or("end of trace".to_string(), |v| format!("`{}`", v.id))
            )));
        }
        let current = states.last().expect("nonempty");
        let next = successors(germ, current, i)
            .into_iter()
            .find(|(_, c)| *c == step.choice)
            .map(|(s, _)| s)
            .ok_or_else(|| reject("choice not in successor set".into()))?;
        states.push(next);
    }
    if t.steps.len() < n {
        return Err(TraceRejection {
            step: t.steps.len(),
            vertex: Some(germ.vertices()[t.steps.len()].id.clone()),
            reason: "unprocessed vertices".into(),
        });
    }
    if !states.last().expect("nonempty").is_empty() {
        return Err(TraceRejection {
            step: t.steps.len(),
            vertex: None,
            reason: "level surface not empty after the last vertex".into(),
        });
    }
    Ok(states)
}

pub fn check_trace(germ: &GermDiagram, t: &Trace) -> Result<(), TraceRejection> {
    replay(germ, t).map(|_| ())
}

/// Per-step bookkeeping of an accepted trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LedgerEntry {
    pub kind: TransitionKind,
    pub boundary_delta: i32,
    pub demigenus_delta: i64,
}

pub fn ledger(germ: &GermDiagram, t: &Trace) -> Result<Vec<LedgerEntry>, TraceRejection> {
    let states = replay(germ, t)?;
    Ok(t.steps
        .iter()
        .zip(states.windows(2))
        .map(|(step, w)| LedgerEntry {
            kind: step.choice.kind(),
            boundary_delta: w[1].active_edge_count() as i32 - w[0].active_edge_count() as i32,
            demigenus_delta: i64::from(w[1].total_demigenus()) - i64::from(w[0].total_demigenus()),
        })
        .collect())
}
