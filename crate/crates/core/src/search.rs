//! Deciding extendability.
//!
//! The search is a depth-first walk over [`successors`] that counts accepting
//! runs below every node, memoized on the canonical sweep state. The count
//! makes three things cheap: the yes/no verdict, the lexicographically first
//! witness (follow the first child with a nonzero count), and bounded
//! enumeration of witnesses in canonical order.
//!
//! Klein mode also needs global properties of the finished extension diagram:
//! its number of loops, and whether its non-orientable edges form one
//! connected set. Both are tracked incrementally in a [`KleinSummary`] that
//! becomes part of the memo key, so counts stay exact. The final condition is
//! still re-checked on the built diagram.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagram::{validate_klein_germ, GermDiagram, KleinRejection, Sign, VertexKind};
use crate::extension::{
    build_extension_diagram, check_klein_conditions, ExtensionDiagram, KleinCondition,
};
use crate::par::{self, Execution};
use crate::sweep::{
    closes_loop, initial_state, successors, touched_blocks, SweepState, Trace, TransitionChoice,
};

pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Some compact 3-manifold bounded by the surface.
    General,
    /// The solid Klein bottle.
    Klein,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::General => "general",
            Mode::Klein => "klein",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "general" => Ok(Mode::General),
            "klein" => Ok(Mode::Klein),
            other => Err(format!(
                "unknown mode `{other}` (expected general or klein)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchConfig {
    /// Maximum number of expanded search nodes.
    pub budget: u64,
    pub memoize: bool,
    /// Drop states whose total demigenus can no longer be destroyed.
    pub prune: bool,
    /// Reject Klein germs outside the two known Möbius/loop patterns.
    pub strict: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            budget: DEFAULT_BUDGET,
            memoize: true,
            prune: true,
            strict: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("search budget of {budget} nodes exceeded")]
    BudgetExceeded { budget: u64 },
    #[error("germ rejected: {0}")]
    Rejected(#[from] KleinRejection),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub trace: Trace,
    pub diagram: ExtensionDiagram,
    /// Klein condition met by the diagram; `None` in general mode.
    pub condition: Option<KleinCondition>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub mode: Mode,
    pub extendable: bool,
    /// Lexicographically first accepting run, when one exists.
    pub witness: Option<Witness>,
    /// Number of distinct accepting runs (saturating).
    pub witness_count: u64,
    /// Search nodes expanded.
    pub nodes: u64,
}

impl Verdict {
    pub fn condition(&self) -> Option<KleinCondition> {
        self.witness.as_ref().and_then(|w| w.condition)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.extendable, self.condition()) {
            (true, Some(c)) => write!(f, "extendable ({c})"),
            (true, None) => write!(f, "extendable"),
            (false, _) => write!(f, "not extendable"),
        }
    }
}

/// Incremental view of the Klein conditions for the part of the extension
/// diagram built so far.
///
/// A twisted region is a connected set of non-orientable edges. It is open
/// while some active block still carries it and closed otherwise; closed
/// regions can never grow again.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KleinSummary {
    /// Region of each block in canonical block order; `None` for orientable blocks.
    regions: Vec<Option<u32>>,
    closed: u8,
    loops: u8,
}

impl KleinSummary {
    fn start() -> Self {
        KleinSummary {
            regions: Vec::new(),
            closed: 0,
            loops: 0,
        }
    }

    fn has_open_region(&self) -> bool {
        self.regions.iter().any(Option::is_some)
    }

    /// Whether some completion could still meet a condition.
    fn viable(&self) -> bool {
        match (self.loops, self.closed) {
            (0, 0) => true,
            (0, 1) => !self.has_open_region(),
            (1, 0) => !self.has_open_region(),
            _ => false,
        }
    }

    fn outcome(&self) -> KleinCondition {
        match (self.loops, self.closed, self.has_open_region()) {
            (1, 0, false) => KleinCondition::Condition1,
            (0, 1, false) => KleinCondition::Condition2,
            _ => KleinCondition::Neither,
        }
    }

    fn advance(
        &self,
        germ: &GermDiagram,
        v: usize,
        above: &SweepState,
        below: &SweepState,
        choice: &TransitionChoice,
    ) -> KleinSummary {
        let (old, new) = touched_blocks(germ, v, above, below, choice);
        let mut loops = self.loops;
        if matches!(choice, TransitionChoice::JPlus) && closes_loop(germ, above, v) {
            loops = loops.saturating_add(1).min(2);
        }

        let merging: BTreeSet<u32> = old.iter().filter_map(|&i| self.regions[i]).collect();
        let twisted_below = new.iter().any(|&j| !below.blocks()[j].cls.is_orientable());
        let untouched: HashMap<&[usize], Option<u32>> = above
            .blocks()
            .iter()
            .zip(&self.regions)
            .enumerate()
            .filter(|(i, _)| !old.contains(i))
            .map(|(_, (b, r))| (b.edges.as_slice(), *r))
            .collect();

        let target = match merging.first() {
            Some(&r) => Some(r),
            None if twisted_below => Some(self.regions.iter().flatten().max().map_or(0, |m| m + 1)),
            None => None,
        };
        let regions: Vec<Option<u32>> = below
            .blocks()
            .iter()
            .enumerate()
            .map(|(j, b)| {
                if new.contains(&j) {
                    (!b.cls.is_orientable()).then(|| target.expect("twisted block has a region"))
                } else {
                    untouched[b.edges.as_slice()].map(|r| {
                        if merging.contains(&r) {
                            target.unwrap()
                        } else {
                            r
                        }
                    })
                }
            })
            .collect();

        let mut closed = self.closed;
        if let Some(t) = target {
            if !regions.contains(&Some(t)) {
                closed = closed.saturating_add(1).min(2);
            }
        }

        let mut renumber = BTreeMap::new();
        let regions = regions
            .into_iter()
            .map(|r| {
                r.map(|r| {
                    let next = renumber.len() as u32;
                    *renumber.entry(r).or_insert(next)
                })
            })
            .collect();
        KleinSummary {
            regions,
            closed,
            loops,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Node {
    state: SweepState,
    klein: Option<KleinSummary>,
}

struct Searcher<'a> {
    germ: &'a GermDiagram,
    mode: Mode,
    config: SearchConfig,
    /// Demigenus that vertices at index ≥ i can still destroy.
    destroyable: Vec<u32>,
    memo: HashMap<(usize, Node), u64>,
    nodes: u64,
}

impl<'a> Searcher<'a> {
    fn new(germ: &'a GermDiagram, mode: Mode, config: SearchConfig) -> Self {
        let n = germ.vertices().len();
        let mut destroyable = vec![0u32; n + 1];
        for i in (0..n).rev() {
            let v = &germ.vertices()[i];
            let here = match (v.kind, v.sign) {
                (VertexKind::DownSaddle, Sign::Minus) => 2,
                (VertexKind::Mobius, Sign::Minus) => 1,
                _ => 0,
            };
            destroyable[i] = destroyable[i + 1] + here;
        }
        Searcher {
            germ,
            mode,
            config,
            destroyable,
            memo: HashMap::new(),
            nodes: 0,
        }
    }

    fn root(&self) -> Node {
        Node {
            state: initial_state(),
            klein: (self.mode == Mode::Klein).then(KleinSummary::start),
        }
    }

    /// Children of `node` at step `v`, in canonical choice order, with
    /// hopeless ones removed.
    fn children(&self, v: usize, node: &Node) -> Vec<(Node, TransitionChoice)> {
        successors(self.germ, &node.state, v)
            .into_iter()
            .filter_map(|(state, choice)| {
                if self.config.prune && state.total_demigenus() > self.destroyable[v + 1] {
                    return None;
                }
                let klein = match &node.klein {
                    Some(k) => {
                        let next = k.advance(self.germ, v, &node.state, &state, &choice);
                        if self.config.prune && !next.viable() {
                            return None;
                        }
                        Some(next)
                    }
                    None => None,
                };
                Some((Node { state, klein }, choice))
            })
            .collect()
    }

    fn accepts(&self, node: &Node) -> bool {
        node.state.is_empty()
            && node
                .klein
                .as_ref()
                .is_none_or(|k| k.outcome() != KleinCondition::Neither)
    }

    fn count(&mut self, v: usize, node: &Node) -> Result<u64, SearchError> {
        if v == self.germ.vertices().len() {
            return Ok(u64::from(self.accepts(node)));
        }
        if self.config.memoize {
            if let Some(&c) = self.memo.get(&(v, node.clone())) {
                return Ok(c);
            }
        }
        self.nodes += 1;
        if self.nodes > self.config.budget {
            return Err(SearchError::BudgetExceeded {
                budget: self.config.budget,
            });
        }
        let mut total = 0u64;
        for (child, _) in self.children(v, node) {
            total = total.saturating_add(self.count(v + 1, &child)?);
        }
        if self.config.memoize {
            self.memo.insert((v, node.clone()), total);
        }
        Ok(total)
    }

    /// Accepting traces in canonical order, at most `limit` of them.
    fn collect(
        &mut self,
        v: usize,
        node: &Node,
        prefix: &mut Vec<TransitionChoice>,
        limit: usize,
        out: &mut Vec<Trace>,
    ) -> Result<(), SearchError> {
        if out.len() >= limit {
            return Ok(());
        }
        if v == self.germ.vertices().len() {
            if self.accepts(node) {
                out.push(Trace::from_choices(prefix.clone()));
            }
            return Ok(());
        }
        for (child, choice) in self.children(v, node) {
            if self.count(v + 1, &child)? == 0 {
                continue;
            }
            prefix.push(choice);
            self.collect(v + 1, &child, prefix, limit, out)?;
            prefix.pop();
            if out.len() >= limit {
                break;
            }
        }
        Ok(())
    }
}

fn witness_for(germ: &GermDiagram, mode: Mode, trace: Trace) -> Witness {
    let diagram =
        build_extension_diagram(germ, &trace).expect("search only yields accepted traces");
    let condition = (mode == Mode::Klein).then(|| check_klein_conditions(&diagram));
    Witness {
        trace,
        diagram,
        condition,
    }
}

fn admit(germ: &GermDiagram, mode: Mode, config: &SearchConfig) -> Result<(), SearchError> {
    if mode == Mode::Klein {
        validate_klein_germ(germ, config.strict)?;
    }
    Ok(())
}

pub fn decide(
    germ: &GermDiagram,
    mode: Mode,
    config: &SearchConfig,
) -> Result<Verdict, SearchError> {
    admit(germ, mode, config)?;
    let mut searcher = Searcher::new(germ, mode, *config);
    let root = searcher.root();
    let witness_count = searcher.count(0, &root)?;
    let witness = if witness_count > 0 {
        let mut traces = Vec::with_capacity(1);
        searcher.collect(0, &root, &mut Vec::new(), 1, &mut traces)?;
        traces.pop().map(|t| witness_for(germ, mode, t))
    } else {
        None
    };
    Ok(Verdict {
        mode,
        extendable: witness_count > 0,
        witness,
        witness_count,
        nodes: searcher.nodes,
    })
}

/// Extension to some compact 3-manifold bounded by the germ's surface.
pub fn decide_general(germ: &GermDiagram) -> Result<Verdict, SearchError> {
    decide(germ, Mode::General, &SearchConfig::default())
}

/// Extension to the solid Klein bottle.
pub fn decide_klein(germ: &GermDiagram) -> Result<Verdict, SearchError> {
    decide(germ, Mode::Klein, &SearchConfig::default())
}

pub fn enumerate_witnesses(
    germ: &GermDiagram,
    mode: Mode,
    limit: usize,
    config: &SearchConfig,
) -> Result<Vec<Witness>, SearchError> {
    admit(germ, mode, config)?;
    let mut searcher = Searcher::new(germ, mode, *config);
    let root = searcher.root();
    let mut traces = Vec::new();
    searcher.collect(0, &root, &mut Vec::new(), limit, &mut traces)?;
    Ok(traces
        .into_iter()
        .map(|t| witness_for(germ, mode, t))
        .collect())
}

/// Decides many germs, in parallel when `exec` allows it. Output order matches input.
pub fn decide_batch(
    germs: &[GermDiagram],
    mode: Mode,
    config: &SearchConfig,
    exec: Execution,
) -> Vec<Result<Verdict, SearchError>> {
    par::map(exec, germs, |g| decide(g, mode, config))
}
