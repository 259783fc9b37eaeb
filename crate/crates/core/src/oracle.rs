//! Reference decision procedure and random germ generator.
//!
//! The brute-force enumerator below is a second, deliberately naive reading
//! of the collapse rules. It shares nothing with [`crate::sweep`] or
//! [`crate::search`] except the germ data model: blocks are kept in insertion
//! order with bitmask edge sets, label options are found by filtering every
//! legal label, nothing is memoized or pruned, and the extension diagram of
//! each accepting run is assembled and checked on the spot.

use std::sync::atomic::{AtomicU64, Ordering};

use petgraph::unionfind::UnionFind;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::diagram::{validate_germ, EdgeSpec, GermDiagram, Sign, VertexKind, VertexSpec};
use crate::par::{self, Execution};
use crate::search::Mode;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleResult {
    pub extendable: bool,
    pub witness_count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("oracle budget of {0} nodes exceeded")]
    BudgetExceeded(u64),
    #[error("oracle handles at most 64 edges, germ has {0}")]
    TooLarge(usize),
}

/// Brute-force node cap used by [`brute_force_decide`].
pub const ORACLE_BUDGET: u64 = 50_000_000;

/// Legal (demigenus, non-orientable) labels with demigenus ≤ `max`.
fn labels_up_to(max: u32) -> Vec<(u32, bool)> {
    let mut out = vec![(0, false)];
    for g in 1..=max {
        out.push((g, true));
        if g % 2 == 0 {
            out.push((g, false));
        }
    }
    out
}

#[derive(Clone, Debug)]
struct Piece {
    circles: u64,
    g: u32,
    twisted: bool,
    comp: usize,
    since: usize,
}

/// One stretch of level surface: (upper vertex, lower vertex, twisted).
type Stretch = (usize, usize, bool);

struct Run<'a> {
    germ: &'a GermDiagram,
    mode: Mode,
    budget: u64,
    nodes: AtomicU64,
    exec: Execution,
    fan_depth: usize,
}

impl Run<'_> {
    fn piece_with(&self, pieces: &[Piece], e: usize) -> usize {
        pieces
            .iter()
            .position(|p| p.circles >> e & 1 == 1)
            .expect("up-edge must be on the current level surface")
    }

    /// Every way the level surface can change at vertex `v`, as
    /// (pieces below, stretches finished at `v`).
    fn moves(&self, v: usize, pieces: &[Piece]) -> Vec<(Vec<Piece>, Vec<Stretch>)> {
        let vert = &self.germ.vertices()[v];
        let ups = self.germ.up_edges(v);
        let downs = self.germ.down_edges(v);
        let bit = |e: usize| 1u64 << e;
        let mut out = Vec::new();

        // Replace piece `i` by `replacement` pieces, closing its stretch at `v`.
        let finish = |i: usize, replacement: Vec<Piece>| {
            let old = &pieces[i];
            let mut next: Vec<Piece> = pieces.to_vec();
            next.remove(i);
            next.extend(replacement);
            (next, vec![(old.since, v, old.twisted)])
        };
        let fresh = |circles: u64, g: u32, twisted: bool, comp: usize| Piece {
            circles,
            g,
            twisted,
            comp,
            since: v,
        };

        match vert.kind {
            VertexKind::Max => {
                if vert.sign == Sign::Plus {
                    let comp = pieces.iter().map(|p| p.comp + 1).max().unwrap_or(0);
                    let mut next = pieces.to_vec();
                    next.push(fresh(bit(downs[0]), 0, false, comp));
                    out.push((next, vec![]));
                } else {
                    for (i, p) in pieces.iter().enumerate() {
                        out.push(finish(
                            i,
                            vec![fresh(p.circles | bit(downs[0]), p.g, p.twisted, p.comp)],
                        ));
                    }
                }
            }
            VertexKind::Min => {
                let i = self.piece_with(pieces, ups[0]);
                let p = &pieces[i];
                let rest = p.circles & !bit(ups[0]);
                match vert.sign {
                    Sign::Minus if rest == 0 && p.g == 0 && !p.twisted => {
                        out.push(finish(i, vec![]))
                    }
                    Sign::Plus if rest != 0 => {
                        out.push(finish(i, vec![fresh(rest, p.g, p.twisted, p.comp)]));
                    }
                    _ => {}
                }
            }
            VertexKind::Mobius => {
                let i = self.piece_with(pieces, ups[0]);
                let p = &pieces[i];
                let circles = (p.circles & !bit(ups[0])) | bit(downs[0]);
                if vert.sign == Sign::Plus {
                    out.push(finish(i, vec![fresh(circles, p.g + 1, true, p.comp)]));
                } else if p.twisted {
                    for (g, t) in labels_up_to(p.g) {
                        if g + 1 == p.g {
                            out.push(finish(i, vec![fresh(circles, g, t, p.comp)]));
                        }
                    }
                }
            }
            VertexKind::DownSaddle => {
                let i = self.piece_with(pieces, ups[0]);
                let p = &pieces[i];
                let rest = p.circles & !bit(ups[0]);
                if vert.sign == Sign::Plus {
                    out.push(finish(
                        i,
                        vec![fresh(
                            rest | bit(downs[0]) | bit(downs[1]),
                            p.g,
                            p.twisted,
                            p.comp,
                        )],
                    ));
                } else {
                    // Non-separating cut: demigenus −2, may become orientable.
                    for (g, t) in labels_up_to(p.g) {
                        if g + 2 == p.g && (t == p.twisted || !t) {
                            out.push(finish(
                                i,
                                vec![fresh(rest | bit(downs[0]) | bit(downs[1]), g, t, p.comp)],
                            ));
                        }
                    }
                    // Separating cut: every subset of the remaining circles goes with the first down edge.
                    let members: Vec<usize> = (0..64).filter(|e| rest >> e & 1 == 1).collect();
                    for mask in 0..(1u64 << members.len()) {
                        let mut left = bit(downs[0]);
                        let mut right = bit(downs[1]);
                        for (k, &e) in members.iter().enumerate() {
                            if mask >> k & 1 == 1 {
                                left |= bit(e);
                            } else {
                                right |= bit(e);
                            }
                        }
                        for &(g1, t1) in &labels_up_to(p.g) {
                            for &(g2, t2) in &labels_up_to(p.g) {
                                if g1 + g2 == p.g && (t1 || t2) == p.twisted {
                                    out.push(finish(
                                        i,
                                        vec![
                                            fresh(left, g1, t1, p.comp),
                                            fresh(right, g2, t2, p.comp),
                                        ],
                                    ));
                                }
                            }
                        }
                    }
                }
            }
            VertexKind::UpSaddle => {
                let i = self.piece_with(pieces, ups[0]);
                let j = self.piece_with(pieces, ups[1]);
                let strip = |c: u64| c & !bit(ups[0]) & !bit(ups[1]);
                if i == j {
                    let p = &pieces[i];
                    let circles = strip(p.circles) | bit(downs[0]);
                    if vert.sign == Sign::Minus {
                        out.push(finish(i, vec![fresh(circles, p.g, p.twisted, p.comp)]));
                    } else {
                        // Handle attached within one piece: demigenus +2, may become non-orientable.
                        for (g, t) in labels_up_to(p.g + 2) {
                            if g == p.g + 2 && (t == p.twisted || t) {
                                out.push(finish(i, vec![fresh(circles, g, t, p.comp)]));
                            }
                        }
                    }
                } else if vert.sign == Sign::Plus {
                    let (a, b) = (&pieces[i], &pieces[j]);
                    let merged = fresh(
                        strip(a.circles | b.circles) | bit(downs[0]),
                        a.g + b.g,
                        a.twisted || b.twisted,
                        a.comp,
                    );
                    let finished = vec![(a.since, v, a.twisted), (b.since, v, b.twisted)];
                    let mut next: Vec<Piece> = pieces
                        .iter()
                        .enumerate()
                        .filter(|&(k, _)| k != i && k != j)
                        .map(|(_, p)| p.clone())
                        .collect();
                    for p in &mut next {
                        if p.comp == b.comp {
                            p.comp = a.comp;
                        }
                    }
                    next.push(merged);
                    out.push((next, finished));
                }
            }
        }
        out
    }

    fn finished_run_counts(&self, stretches: &[Stretch]) -> bool {
        match self.mode {
            Mode::General => true,
            Mode::Klein => klein_ok(self.germ.vertices().len(), stretches),
        }
    }

    fn explore(
        &self,
        v: usize,
        pieces: Vec<Piece>,
        stretches: Vec<Stretch>,
    ) -> Result<u64, OracleError> {
        if v == self.germ.vertices().len() {
            return Ok(u64::from(
                pieces.is_empty() && self.finished_run_counts(&stretches),
            ));
        }
        if self.nodes.fetch_add(1, Ordering::Relaxed) >= self.budget {
            return Err(OracleError::BudgetExceeded(self.budget));
        }
        let branches = self.moves(v, &pieces);
        let step = |(next, done): (Vec<Piece>, Vec<Stretch>)| {
            let mut all = stretches.clone();
            all.extend(done);
            self.explore(v + 1, next, all)
        };
        let counts: Vec<Result<u64, OracleError>> = if v < self.fan_depth {
            par::map_owned(self.exec, branches, step)
        } else {
            branches.into_iter().map(step).collect()
        };
        counts
            .into_iter()
            .try_fold(0u64, |acc, c| Ok(acc.saturating_add(c?)))
    }
}

/// Klein conditions on a finished extension graph given as its stretches.
fn klein_ok(vertex_count: usize, stretches: &[Stretch]) -> bool {
    let mut all = UnionFind::<usize>::new(vertex_count);
    for &(a, b, _) in stretches {
        all.union(a, b);
    }
    let mut roots: Vec<usize> = (0..vertex_count).map(|x| all.find(x)).collect();
    roots.sort_unstable();
    roots.dedup();
    let loops = stretches.len() + roots.len() - vertex_count;

    let twisted: Vec<&Stretch> = stretches.iter().filter(|s| s.2).collect();
    if twisted.is_empty() {
        return loops == 1;
    }
    if loops != 0 {
        return false;
    }
    // Walk the twisted subgraph from one twisted edge; it must reach them all.
    let mut reached = vec![false; vertex_count];
    let mut stack = vec![twisted[0].0];
    reached[twisted[0].0] = true;
    while let Some(x) = stack.pop() {
        for &&(a, b, _) in &twisted {
            for (from, to) in [(a, b), (b, a)] {
                if from == x && !reached[to] {
                    reached[to] = true;
                    stack.push(to);
                }
            }
        }
    }
    twisted.iter().all(|s| reached[s.0] && reached[s.1])
}

pub fn brute_force_decide(d: &GermDiagram, mode: Mode) -> Result<OracleResult, OracleError> {
    brute_force_decide_with(d, mode, ORACLE_BUDGET, Execution::Sequential)
}

/// Brute force with an explicit node cap; with [`Execution::Parallel`] the
/// first levels of the run tree are explored concurrently.
pub fn brute_force_decide_with(
    d: &GermDiagram,
    mode: Mode,
    budget: u64,
    exec: Execution,
) -> Result<OracleResult, OracleError> {
    if d.edges().len() > 64 {
        return Err(OracleError::TooLarge(d.edges().len()));
    }
    let run = Run {
        germ: d,
        mode,
        budget,
        nodes: AtomicU64::new(0),
        exec,
        fan_depth: 3,
    };
    let witness_count = run.explore(0, Vec::new(), Vec::new())?;
    Ok(OracleResult {
        extendable: witness_count > 0,
        witness_count,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MobiusTarget {
    Zero,
    Two,
    /// Any even count.
    Any,
}

impl std::str::FromStr for MobiusTarget {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "0" => Ok(MobiusTarget::Zero),
            "2" => Ok(MobiusTarget::Two),
            "any" => Ok(MobiusTarget::Any),
            other => Err(format!(
                "unknown Möbius target `{other}` (expected 0, 2 or any)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneratorParams {
    pub seed: u64,
    pub max_vertices: usize,
    pub mobius: MobiusTarget,
    pub euler: Option<i64>,
    pub connected: bool,
}

impl GeneratorParams {
    pub fn new(seed: u64, max_vertices: usize) -> Self {
        GeneratorParams {
            seed,
            max_vertices,
            mobius: MobiusTarget::Any,
            euler: None,
            connected: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeneratorError {
    #[error("vertex bound must be at least 2, got {0}")]
    BoundTooSmall(usize),
    #[error("euler characteristic {0} is odd; generated germs always have an even one")]
    OddEuler(i64),
    #[error(
        "no germ with at most {max_vertices} vertices met the targets after {attempts} attempts"
    )]
    Unsatisfiable {
        max_vertices: usize,
        attempts: usize,
    },
}

const GENERATOR_ATTEMPTS: usize = 20_000;

/// Whether a partial top-down build with `f` open edges, `r` vertices and `m`
/// Möbius points still to place can be closed off exactly.
fn closable(r: usize, f: usize, m: usize) -> bool {
    if r == 0 {
        return f == 0 && m == 0;
    }
    if r < f + m || (r - f - m) % 2 == 1 {
        return false;
    }
    f > 0 || r >= m + 2
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Step {
    Max,
    Min,
    Split,
    Merge,
    Twist,
}

/// Random valid germ built top-down: vertices are inserted one height at a time
/// while tracking the open edges, and every edge is eventually closed off.
pub fn random_germ(p: &GeneratorParams) -> Result<GermDiagram, GeneratorError> {
    if p.max_vertices < 2 {
        return Err(GeneratorError::BoundTooSmall(p.max_vertices));
    }
    if let Some(e) = p.euler {
        if e % 2 != 0 {
            return Err(GeneratorError::OddEuler(e));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    for _ in 0..GENERATOR_ATTEMPTS {
        let mobius = match p.mobius {
            MobiusTarget::Zero => 0,
            MobiusTarget::Two => 2,
            MobiusTarget::Any => 2 * rng.gen_range(0..=(p.max_vertices.saturating_sub(2)) / 2),
        };
        let sizes: Vec<usize> = (2..=p.max_vertices)
            .filter(|n| *n >= mobius + 2 && (n - mobius) % 2 == 0)
            .collect();
        let Some(&n) = sizes.choose(&mut rng) else {
            continue;
        };
        let germ = build_random(&mut rng, n, mobius);
        let report = validate_germ(&germ);
        if p.euler.is_some_and(|e| e != report.euler) {
            continue;
        }
        if p.connected && report.components != 1 {
            continue;
        }
        return Ok(germ);
    }
    Err(GeneratorError::Unsatisfiable {
        max_vertices: p.max_vertices,
        attempts: GENERATOR_ATTEMPTS,
    })
}

fn build_random(rng: &mut ChaCha8Rng, n: usize, mobius: usize) -> GermDiagram {
    let width = n.to_string().len().max(2);
    let mut vertices = Vec::with_capacity(n);
    let mut edges: Vec<EdgeSpec> = Vec::new();
    let mut open: Vec<String> = Vec::new();
    let mut twists_left = mobius;
    let new_edge = |edges: &mut Vec<EdgeSpec>, upper: &str| {
        let id = format!("e{:0width$}", edges.len(), width = width);
        edges.push(EdgeSpec::new(id.clone(), upper, ""));
        id
    };

    for i in 0..n {
        let r = n - i - 1;
        let f = open.len();
        let m = twists_left;
        let mut options = Vec::new();
        if closable(r, f + 1, m) {
            options.push(Step::Max);
        }
        if f >= 1 && closable(r, f + 1, m) {
            options.push(Step::Split);
        }
        if f >= 1 && closable(r, f - 1, m) {
            options.push(Step::Min);
        }
        if f >= 2 && closable(r, f - 1, m) {
            options.push(Step::Merge);
        }
        if f >= 1 && m >= 1 && closable(r, f, m - 1) {
            options.push(Step::Twist);
        }
        let step = *options
            .choose(rng)
            .expect("size and parity keep the build closable");

        let id = format!("v{:0width$}", i, width = width);
        let sign = if rng.gen_bool(0.5) {
            Sign::Plus
        } else {
            Sign::Minus
        };
        vertices.push(VertexSpec::new(id.clone(), (n - 1 - i) as f64, sign));
        let mut close = |open: &mut Vec<String>, rng: &mut ChaCha8Rng| {
            let k = rng.gen_range(0..open.len());
            let e = open.swap_remove(k);
            let spec = edges
                .iter_mut()
                .find(|s| s.id == e)
                .expect("open edge exists");
            spec.lower = id.clone();
        };
        match step {
            Step::Max => {}
            Step::Min => close(&mut open, rng),
            Step::Split => close(&mut open, rng),
            Step::Merge => {
                close(&mut open, rng);
                close(&mut open, rng);
            }
            Step::Twist => {
                close(&mut open, rng);
                twists_left -= 1;
            }
        }
        let fresh = match step {
            Step::Max | Step::Merge | Step::Twist => 1,
            Step::Split => 2,
            Step::Min => 0,
        };
        for _ in 0..fresh {
            let e = new_edge(&mut edges, &id);
            open.push(e);
        }
    }
    debug_assert!(open.is_empty());
    GermDiagram::new(vertices, edges).expect("generator only builds valid diagrams")
}
