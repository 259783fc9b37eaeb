#![allow(dead_code)]

use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use morse_extend::diagram::{EdgeSpec, VertexSpec};
use morse_extend::oracle::{GeneratorParams, MobiusTarget};
use morse_extend::search::{Mode, Witness};
use morse_extend::surface::{
    crosscap_add, crosscap_remove_options, genus_add_options, genus_remove_options, join,
    lambda_valid, split_options,
};
use morse_extend::sweep::{ledger, TransitionKind};
use morse_extend::{
    build_extension_diagram, check_klein_conditions, check_trace, parse_germ, GermDiagram,
    SearchConfig, SurfaceClass, Trace,
};

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn fixture(name: &str) -> GermDiagram {
    let path = fixture_dir().join(name);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    parse_germ(&text).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// All fixture file names, sorted.
pub fn fixture_names() -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(fixture_dir())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".germ"))
        .collect();
    names.sort();
    names
}

/// Generator settings used for cross-checking search against the oracle.
/// Klein germs alternate between the two Möbius patterns.
pub fn oracle_params(mode: Mode, seed: u64, max_vertices: usize) -> GeneratorParams {
    match mode {
        Mode::General => GeneratorParams::new(seed, max_vertices),
        Mode::Klein => GeneratorParams {
            mobius: if seed.is_multiple_of(2) {
                MobiusTarget::Zero
            } else {
                MobiusTarget::Two
            },
            euler: Some(0),
            connected: true,
            ..GeneratorParams::new(seed, max_vertices)
        },
    }
}

pub fn lenient() -> SearchConfig {
    SearchConfig {
        strict: false,
        ..SearchConfig::default()
    }
}

/// Same germ with fresh ids, shuffled declaration order and new distinct heights.
pub fn disguise(d: &GermDiagram, seed: u64) -> GermDiagram {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = d.vertices().len();
    let mut heights: Vec<f64> = (0..n).map(|_| rng.gen_range(-1e6..1e6)).collect();
    heights.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let rename = |id: &str| format!("x \"{id}\" ü");
    let mut vs: Vec<VertexSpec> = d
        .vertices()
        .iter()
        .zip(&heights)
        .map(|(v, &h)| VertexSpec::new(rename(&v.id), h, v.sign))
        .collect();
    let mut es: Vec<EdgeSpec> = d
        .edges()
        .iter()
        .map(|e| {
            EdgeSpec::new(
                format!("{}'", e.id),
                rename(&d.vertices()[e.upper].id),
                rename(&d.vertices()[e.lower].id),
            )
        })
        .collect();
    vs.shuffle(&mut rng);
    es.shuffle(&mut rng);
    GermDiagram::new(vs, es).unwrap()
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Id(String),
    Arrow,
    Punct(char),
}

fn tokenize(text: &str) -> Result<Vec<Tok>, String> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
        } else if c == '"' {
            chars.next();
            let mut s = String::new();
            loop {
                match chars.next() {
                    None => return Err("unterminated string".into()),
                    Some('"') => break,
                    Some('\\') => match chars.next() {
                        Some(e) => s.push(e),
                        None => return Err("dangling escape".into()),
                    },
                    Some(ch) => s.push(ch),
                }
            }
            out.push(Tok::Id(s));
        } else if c == '-' {
            chars.next();
            match chars.peek() {
                Some('>') => {
                    chars.next();
                    out.push(Tok::Arrow);
                }
                Some(d) if d.is_ascii_digit() || *d == '.' => {
                    let mut s = String::from("-");
                    while let Some(&d) = chars.peek() {
                        if d.is_ascii_digit() || d == '.' {
                            s.push(d);
                            chars.next();
                        } else {
                            break;
                        }
                    }
                    out.push(Tok::Id(s));
                }
                _ => return Err("stray `-`".into()),
            }
        } else if c.is_alphanumeric() || c == '_' || c == '.' {
            let mut s = String::new();
            while let Some(&d) = chars.peek() {
                if d.is_alphanumeric() || d == '_' || d == '.' {
                    s.push(d);
                    chars.next();
                } else {
                    break;
                }
            }
            out.push(Tok::Id(s));
        } else if "{}[];=,".contains(c) {
            out.push(Tok::Punct(c));
            chars.next();
        } else {
            return Err(format!("unexpected character `{c}`"));
        }
    }
    Ok(out)
}

/// Checks `text` against the directed-graph subset of the DOT grammar:
/// `digraph ID? { (node_stmt | edge_stmt | attr)* }` with optional attribute
/// lists and `;` separators. Edge statements must only use `->`.
pub fn check_dot(text: &str) -> Result<(), String> {
    let toks = tokenize(text)?;
    let mut i = 0;
    let next = |i: &mut usize| -> Option<Tok> {
        let t = toks.get(*i).cloned();
        *i += 1;
        t
    };
    if next(&mut i) != Some(Tok::Id("digraph".into())) {
        return Err("expected `digraph`".into());
    }
    if let Some(Tok::Id(_)) = toks.get(i) {
        i += 1;
    }
    if next(&mut i) != Some(Tok::Punct('{')) {
        return Err("expected `{`".into());
    }
    loop {
        match next(&mut i) {
            Some(Tok::Punct('}')) => break,
            Some(Tok::Punct(';')) => continue,
            Some(Tok::Id(_)) => {
                if toks.get(i) == Some(&Tok::Punct('=')) {
                    i += 1;
                    match next(&mut i) {
                        Some(Tok::Id(_)) => continue,
                        _ => return Err("expected attribute value".into()),
                    }
                }
                while toks.get(i) == Some(&Tok::Arrow) {
                    i += 1;
                    match next(&mut i) {
                        Some(Tok::Id(_)) => {}
                        _ => return Err("expected node after `->`".into()),
                    }
                }
                if toks.get(i) == Some(&Tok::Punct('[')) {
                    i += 1;
                    loop {
                        match next(&mut i) {
                            Some(Tok::Punct(']')) => break,
                            Some(Tok::Punct(',')) | Some(Tok::Punct(';')) => {}
                            Some(Tok::Id(_)) => {
                                if next(&mut i) != Some(Tok::Punct('=')) {
                                    return Err("expected `=` in attribute list".into());
                                }
                                match next(&mut i) {
                                    Some(Tok::Id(_)) => {}
                                    _ => return Err("expected attribute value".into()),
                                }
                            }
                            other => return Err(format!("bad attribute list token {other:?}")),
                        }
                    }
                }
            }
            other => return Err(format!("unexpected token {other:?}")),
        }
    }
    if i != toks.len() {
        return Err("trailing input after `}`".into());
    }
    Ok(())
}

/// Violations of the label algebra laws over every class with demigenus ≤ `max_g`.
pub fn lambda_violations(max_g: u32) -> Vec<String> {
    let mut bad = Vec::new();
    let all: Vec<SurfaceClass> = SurfaceClass::all_up_to(max_g).collect();
    for g in 0..=max_g + 1 {
        for o in 0..=2u8 {
            let expected = o <= 1 && (o == 1 && g >= 1 || o == 0 && g % 2 == 0);
            if lambda_valid(g, o) != expected || SurfaceClass::new(g, o).is_some() != expected {
                bad.push(format!("validity of ({g},{o})"));
            }
        }
    }
    for &c in &all {
        let splits = split_options(c);
        for &(a, b) in &splits {
            if join(a, b) != c || join(b, a) != c {
                bad.push(format!("split {c} -> {a} + {b} does not join back"));
            }
        }
        for &a in &all {
            for &b in &all {
                if join(a, b) == c && !splits.contains(&(a.min(b), a.max(b))) {
                    bad.push(format!("split {c} misses {a} + {b}"));
                }
            }
        }
        for up in genus_add_options(c) {
            if up.demigenus() != c.demigenus() + 2 || !genus_remove_options(up).contains(&c) {
                bad.push(format!("genus add {c} -> {up} not undone"));
            }
        }
        for down in genus_remove_options(c) {
            if down.demigenus() + 2 != c.demigenus() || !genus_add_options(down).contains(&c) {
                bad.push(format!("genus remove {c} -> {down} not undone"));
            }
        }
        if c.demigenus() < 2 && !genus_remove_options(c).is_empty() {
            bad.push(format!("genus remove from {c} should be empty"));
        }
        let up = crosscap_add(c);
        if up.is_orientable()
            || up.demigenus() != c.demigenus() + 1
            || !crosscap_remove_options(up).contains(&c)
        {
            bad.push(format!("crosscap add {c} -> {up} not undone"));
        }
        let downs = crosscap_remove_options(c);
        if c.is_orientable() != downs.is_empty() {
            bad.push(format!("crosscap remove from {c} has wrong emptiness"));
        }
        for down in downs {
            if crosscap_add(down) != c {
                bad.push(format!("crosscap remove {c} -> {down} not undone"));
            }
        }
    }
    bad
}

/// Boundary-count change per transition, straight from the table of local effects.
pub fn table_boundary_delta(kind: TransitionKind) -> i32 {
    use TransitionKind::*;
    match kind {
        SPlus | MMinus | GMinus | JMinus | MPlus => 1,
        SMinus | NPlus | GPlus | JPlus | NMinus => -1,
        OPlus | OMinus => 0,
    }
}

/// Ledger violations along an accepting trace.
pub fn ledger_violations(germ: &GermDiagram, trace: &Trace) -> Vec<String> {
    let entries = match ledger(germ, trace) {
        Ok(e) => e,
        Err(e) => return vec![format!("replay failed: {e}")],
    };
    let mut bad = Vec::new();
    let (mut created, mut destroyed) = (0i64, 0i64);
    for (i, e) in entries.iter().enumerate() {
        if e.boundary_delta != table_boundary_delta(e.kind) {
            bad.push(format!(
                "step {i} {}: boundary delta {}",
                e.kind, e.boundary_delta
            ));
        }
        match e.kind {
            TransitionKind::OPlus | TransitionKind::GPlus if e.demigenus_delta > 0 => {
                created += e.demigenus_delta
            }
            TransitionKind::OMinus | TransitionKind::GMinus if e.demigenus_delta < 0 => {
                destroyed -= e.demigenus_delta
            }
            _ if e.demigenus_delta != 0 => bad.push(format!(
                "step {i} {}: demigenus delta {}",
                e.kind, e.demigenus_delta
            )),
            _ => {}
        }
    }
    if created != destroyed {
        bad.push(format!(
            "demigenus created {created}, destroyed {destroyed}"
        ));
    }
    bad
}

/// Problems found when replaying a witness from scratch.
pub fn witness_mismatches(germ: &GermDiagram, mode: Mode, w: &Witness) -> Vec<String> {
    let mut bad = Vec::new();
    if let Err(e) = check_trace(germ, &w.trace) {
        bad.push(format!("check_trace: {e}"));
        return bad;
    }
    match build_extension_diagram(germ, &w.trace) {
        Ok(d) => {
            if d != w.diagram {
                bad.push("rebuilt diagram differs".into());
            }
            if let Err(e) = d.check_invariants() {
                bad.push(format!("diagram invariants: {e}"));
            }
            let computed = (mode == Mode::Klein).then(|| check_klein_conditions(&d));
            if computed != w.condition {
                bad.push(format!(
                    "condition {computed:?} vs reported {:?}",
                    w.condition
                ));
            }
        }
        Err(e) => bad.push(format!("build_extension_diagram: {e}")),
    }
    bad
}
