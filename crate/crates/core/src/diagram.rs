//! Signed Reeb diagrams of Morse germs along a closed surface.
//!
//! A [`GermDiagram`] is always stored in canonical order: vertices by
//! decreasing height, edges by id. Vertex index `i` is therefore also the
//! `i`-th step of the downward sweep, and edge indices are ranks by id.

use std::collections::{HashMap, HashSet};
use std::fmt;

use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn flipped(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// Local shape of a germ vertex, read off its (up-degree, down-degree).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VertexKind {
    Max,
    Min,
    DownSaddle,
    UpSaddle,
    Mobius,
}

impl VertexKind {
    pub fn from_degrees(up: usize, down: usize) -> Option<VertexKind> {
        match (up, down) {
            (0, 1) => Some(VertexKind::Max),
            (1, 0) => Some(VertexKind::Min),
            (1, 2) => Some(VertexKind::DownSaddle),
            (2, 1) => Some(VertexKind::UpSaddle),
            (1, 1) => Some(VertexKind::Mobius),
            _ => None,
        }
    }

    pub fn degrees(self) -> (usize, usize) {
        match self {
            VertexKind::Max => (0, 1),
            VertexKind::Min => (1, 0),
            VertexKind::DownSaddle => (1, 2),
            VertexKind::UpSaddle => (2, 1),
            VertexKind::Mobius => (1, 1),
        }
    }
}

impl fmt::Display for VertexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub id: String,
    pub height: f64,
    pub sign: Sign,
    pub kind: VertexKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub id: String,
    /// Index of the upper endpoint in [`GermDiagram::vertices`].
    pub upper: usize,
    /// Index of the lower endpoint in [`GermDiagram::vertices`].
    pub lower: usize,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagramError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("duplicate vertex id `{0}`")]
    DuplicateVertex(String),
    #[error("duplicate edge id `{0}`")]
    DuplicateEdge(String),
    #[error("edge `{edge}` references unknown vertex `{vertex}`")]
    UnknownVertex { edge: String, vertex: String },
    #[error("vertex `{0}` has a non-finite height")]
    NonFiniteHeight(String),
    #[error("heights not distinct: `{0}` and `{1}` share a height")]
    HeightsNotDistinct(String, String),
    #[error("edge `{0}` does not descend: its upper endpoint must be strictly higher")]
    EdgeNotDescending(String),
    #[error(
        "vertex `{vertex}` has degree pattern (up {up}, down {down}), which is not a germ vertex"
    )]
    BadDegree {
        vertex: String,
        up: usize,
        down: usize,
    },
    #[error("vertex `{vertex}` declares kind {declared} but its edges make it {derived}")]
    KindMismatch {
        vertex: String,
        declared: VertexKind,
        derived: VertexKind,
    },
}

/// A validated signed Reeb diagram `dgm⁺(f)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GermDiagram {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    up: Vec<Vec<usize>>,
    down: Vec<Vec<usize>>,
}

/// Raw vertex description used to build a [`GermDiagram`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexSpec {
    pub id: String,
    pub height: f64,
    pub sign: Sign,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<VertexKind>,
}

/// Raw edge description used to build a [`GermDiagram`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    pub id: String,
    pub upper: String,
    pub lower: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GermFile {
    vertices: Vec<VertexSpec>,
    edges: Vec<EdgeSpec>,
}

impl VertexSpec {
    pub fn new(id: impl Into<String>, height: f64, sign: Sign) -> Self {
        VertexSpec {
            id: id.into(),
            height,
            sign,
            kind: None,
        }
    }
}

impl EdgeSpec {
    pub fn new(id: impl Into<String>, upper: impl Into<String>, lower: impl Into<String>) -> Self {
        EdgeSpec {
            id: id.into(),
            upper: upper.into(),
            lower: lower.into(),
        }
    }
}

impl GermDiagram {
    /// Checks every structural invariant and returns the diagram in canonical order.
    pub fn new(vertices: Vec<VertexSpec>, edges: Vec<EdgeSpec>) -> Result<Self, DiagramError> {
        let mut seen = HashSet::new();
        for v in &vertices {
            if !seen.insert(v.id.as_str()) {
                return Err(DiagramError::DuplicateVertex(v.id.clone()));
            }
            if !v.height.is_finite() {
                return Err(DiagramError::NonFiniteHeight(v.id.clone()));
            }
        }
        let mut seen = HashSet::new();
        for e in &edges {
            if !seen.insert(e.id.as_str()) {
                return Err(DiagramError::DuplicateEdge(e.id.clone()));
            }
        }

        let mut vertices = vertices;
        vertices.sort_by(|a, b| b.height.total_cmp(&a.height));
        for w in vertices.windows(2) {
            if w[0].height == w[1].height {
                return Err(DiagramError::HeightsNotDistinct(
                    w[0].id.clone(),
                    w[1].id.clone(),
                ));
            }
        }
        let index: HashMap<&str, usize> = vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.id.as_str(), i))
            .collect();

        let mut edges = edges;
        edges.sort_by(|a, b| a.id.cmp(&b.id));
        let mut resolved = Vec::with_capacity(edges.len());
        for e in &edges {
            let lookup = |name: &str| {
                index
                    .get(name)
                    .copied()
                    .ok_or_else(|| DiagramError::UnknownVertex {
                        edge: e.id.clone(),
                        vertex: name.to_string(),
                    })
            };
            let upper = lookup(&e.upper)?;
            let lower = lookup(&e.lower)?;
            // Canonical order is by decreasing height, so "higher" means a smaller index.
            if upper >= lower {
                return Err(DiagramError::EdgeNotDescending(e.id.clone()));
            }
            resolved.push(Edge {
                id: e.id.clone(),
                upper,
                lower,
            });
        }

        let mut up = vec![Vec::new(); vertices.len()];
        let mut down = vec![Vec::new(); vertices.len()];
        for (i, e) in resolved.iter().enumerate() {
            down[e.upper].push(i);
            up[e.lower].push(i);
        }

        let mut built = Vec::with_capacity(vertices.len());
        for (i, v) in vertices.into_iter().enumerate() {
            let derived =
                VertexKind::from_degrees(up[i].len(), down[i].len()).ok_or_else(|| {
                    DiagramError::BadDegree {
                        vertex: v.id.clone(),
                        up: up[i].len(),
                        down: down[i].len(),
                    }
                })?;
            if let Some(declared) = v.kind {
                if declared != derived {
                    return Err(DiagramError::KindMismatch {
                        vertex: v.id,
                        declared,
                        derived,
                    });
                }
            }
            built.push(Vertex {
                id: v.id,
                height: v.height,
                sign: v.sign,
                kind: derived,
            });
        }

        Ok(GermDiagram {
            vertices: built,
            edges: resolved,
            up,
            down,
        })
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Edges whose lower endpoint is vertex `v`, ascending by edge index.
    pub fn up_edges(&self, v: usize) -> &[usize] {
        &self.up[v]
    }

    /// Edges whose upper endpoint is vertex `v`, ascending by edge index.
    pub fn down_edges(&self, v: usize) -> &[usize] {
        &self.down[v]
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v.id == id)
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edges.binary_search_by(|e| e.id.as_str().cmp(id)).ok()
    }

    pub fn vertex_specs(&self) -> Vec<VertexSpec> {
        self.vertices
            .iter()
            .map(|v| VertexSpec {
                id: v.id.clone(),
                height: v.height,
                sign: v.sign,
                kind: Some(v.kind),
            })
            .collect()
    }

    pub fn edge_specs(&self) -> Vec<EdgeSpec> {
        self.edges
            .iter()
            .map(|e| EdgeSpec {
                id: e.id.clone(),
                upper: self.vertices[e.upper].id.clone(),
                lower: self.vertices[e.lower].id.clone(),
            })
            .collect()
    }

    /// Same diagram with the sign of vertex `v` reversed.
    pub fn with_flipped_sign(&self, v: usize) -> GermDiagram {
        let mut out = self.clone();
        out.vertices[v].sign = out.vertices[v].sign.flipped();
        out
    }

    /// Number of connected components of the underlying graph.
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

    pub fn count_kind(&self, kind: VertexKind) -> usize {
        self.vertices.iter().filter(|v| v.kind == kind).count()
    }
}

pub fn parse_germ(text: &str) -> Result<GermDiagram, DiagramError> {
    let file: GermFile = toml::from_str(text).map_err(|e| syntax_error(text, &e))?;
    GermDiagram::new(file.vertices, file.edges)
}

pub(crate) fn syntax_error(text: &str, e: &toml::de::Error) -> DiagramError {
    let (line, column) = match e.span() {
        Some(span) => line_column(text, span.start),
        None => (0, 0),
    };
    DiagramError::Syntax {
        line,
        column,
        message: e.message().to_string(),
    }
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |s| s.chars().count()) + 1;
    (line, column)
}

/// Canonical text form: vertices by decreasing height, edges by id.
pub fn serialize_germ(d: &GermDiagram) -> String {
    let file = GermFile {
        vertices: d.vertex_specs(),
        edges: d.edge_specs(),
    };
    toml::to_string(&file).expect("germ diagrams always serialize")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GermReport {
    pub euler: i64,
    pub betti1: usize,
    pub mobius_count: usize,
    pub components: usize,
    pub vertices: usize,
    pub edges: usize,
}

impl fmt::Display for GermReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "vertices:      {}", self.vertices)?;
        writeln!(f, "edges:         {}", self.edges)?;
        writeln!(f, "components:    {}", self.components)?;
        writeln!(f, "euler:         {}", self.euler)?;
        writeln!(f, "betti1:        {}", self.betti1)?;
        write!(f, "mobius points: {}", self.mobius_count)
    }
}

pub fn validate_germ(d: &GermDiagram) -> GermReport {
    let extrema = d.count_kind(VertexKind::Max) + d.count_kind(VertexKind::Min);
    let saddles = d.count_kind(VertexKind::DownSaddle) + d.count_kind(VertexKind::UpSaddle);
    let mobius = d.count_kind(VertexKind::Mobius);
    let components = d.component_count();
    GermReport {
        euler: extrema as i64 - saddles as i64 - mobius as i64,
        betti1: d.edges.len() + components - d.vertices.len(),
        mobius_count: mobius,
        components,
        vertices: d.vertices.len(),
        edges: d.edges.len(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KleinRejection {
    #[error("euler characteristic {0} ≠ 0")]
    Euler(i64),
    #[error("germ is disconnected ({0} components)")]
    Disconnected(usize),
    #[error(
        "pattern mobius={mobius}, betti1={betti1} is neither (0 Möbius points, one loop) nor \
         (2 Möbius points, no loop) [partially established condition; override with --no-strict]"
    )]
    Pattern { mobius: usize, betti1: usize },
}

/// Necessary conditions for a germ along a Klein bottle.
///
/// Returns the warnings that were downgraded when `strict` is off.
pub fn validate_klein_germ(
    d: &GermDiagram,
    strict: bool,
) -> Result<Vec<KleinRejection>, KleinRejection> {
    let report = validate_germ(d);
    if report.euler != 0 {
        return Err(KleinRejection::Euler(report.euler));
    }
    if report.components != 1 {
        return Err(KleinRejection::Disconnected(report.components));
    }
    let pattern_ok = (report.mobius_count == 0 && report.betti1 == 1)
        || (report.mobius_count == 2 && report.betti1 == 0);
    if pattern_ok {
        return Ok(Vec::new());
    }
    let rejection = KleinRejection::Pattern {
        mobius: report.mobius_count,
        betti1: report.betti1,
    };
    if strict {
        Err(rejection)
    } else {
        Ok(vec![rejection])
    }
}

/// Rendering to the Graphviz `digraph` language.
pub trait DotExport {
    fn to_dot(&self) -> String;
}

pub fn export_dot<D: DotExport + ?Sized>(d: &D) -> String {
    d.to_dot()
}

pub(crate) fn dot_quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            _ => out.push(c),
        }
    }
    out.push('"');
    out
}

impl DotExport for GermDiagram {
    fn to_dot(&self) -> String {
        let mut out = String::from("digraph germ {\n");
        for v in &self.vertices {
            let label = format!("{} {} {} {}", v.id, v.kind, v.sign, v.height);
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
                dot_quote(&e.id)
            ));
        }
        out.push_str("}\n");
        out
    }
}
