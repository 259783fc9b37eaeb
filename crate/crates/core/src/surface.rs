//! Labels of level-surface components.
//!
//! A compact connected surface with boundary is determined by its number of
//! boundary circles `b`, its demigenus `g` (2 − χ after capping every boundary
//! circle with a disc) and its orientability `o`. Legal `(g, o)` pairs are
//! `(0,0)`, `(odd,1)` and `(even ≥ 2, 0 or 1)`.
//!
//! The option sets below describe how a single critical level changes the
//! label of the component it touches, read from top to bottom.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "[u32; 2]", into = "[u32; 2]")]
pub struct SurfaceClass {
    g: u32,
    non_orientable: bool,
}

pub fn lambda_valid(g: u32, o: u8) -> bool {
    match o {
        0 => g.is_multiple_of(2),
        1 => g >= 1,
        _ => false,
    }
}

impl SurfaceClass {
    pub const DISC: SurfaceClass = SurfaceClass {
        g: 0,
        non_orientable: false,
    };

    pub fn new(g: u32, o: u8) -> Option<SurfaceClass> {
        lambda_valid(g, o).then_some(SurfaceClass {
            g,
            non_orientable: o == 1,
        })
    }

    pub fn demigenus(self) -> u32 {
        self.g
    }

    /// 0 for orientable, 1 for non-orientable.
    pub fn o(self) -> u8 {
        u8::from(self.non_orientable)
    }

    pub fn is_orientable(self) -> bool {
        !self.non_orientable
    }

    /// Every legal class with demigenus at most `max_g`, ordered by `(g, o)`.
    pub fn all_up_to(max_g: u32) -> impl Iterator<Item = SurfaceClass> {
        (0..=max_g).flat_map(|g| (0..=1).filter_map(move |o| SurfaceClass::new(g, o)))
    }
}

impl TryFrom<[u32; 2]> for SurfaceClass {
    type Error = String;

    fn try_from([g, o]: [u32; 2]) -> Result<Self, Self::Error> {
        u8::try_from(o)
            .ok()
            .and_then(|o| SurfaceClass::new(g, o))
            .ok_or_else(|| format!("({g},{o}) is not a legal surface label"))
    }
}

impl From<SurfaceClass> for [u32; 2] {
    fn from(c: SurfaceClass) -> Self {
        [c.g, u32::from(c.o())]
    }
}

impl fmt::Display for SurfaceClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.g, self.o())
    }
}

/// Boundary-connected sum.
pub fn join(a: SurfaceClass, b: SurfaceClass) -> SurfaceClass {
    SurfaceClass {
        g: a.g + b.g,
        non_orientable: a.non_orientable || b.non_orientable,
    }
}

/// Unordered pairs whose boundary-connected sum is `c`, each pair listed once
/// with its smaller member first.
pub fn split_options(c: SurfaceClass) -> Vec<(SurfaceClass, SurfaceClass)> {
    let mut out = Vec::new();
    for g1 in 0..=c.g / 2 {
        let g2 = c.g - g1;
        for o1 in 0..=1u8 {
            for o2 in 0..=1u8 {
                let (Some(a), Some(b)) = (SurfaceClass::new(g1, o1), SurfaceClass::new(g2, o2))
                else {
                    continue;
                };
                if a > b || join(a, b) != c {
                    continue;
                }
                out.push((a, b));
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Labels below an up-saddle that closes a handle within one component.
pub fn genus_add_options(c: SurfaceClass) -> Vec<SurfaceClass> {
    let mut out: Vec<_> = [c.o(), 1]
        .into_iter()
        .filter_map(|o| SurfaceClass::new(c.g + 2, o))
        .collect();
    out.sort();
    out.dedup();
    out
}

/// Labels below a down-saddle that cuts a handle without disconnecting.
/// Empty when `c.g < 2`.
pub fn genus_remove_options(c: SurfaceClass) -> Vec<SurfaceClass> {
    if c.g < 2 {
        return Vec::new();
    }
    let mut out: Vec<_> = [0, c.o()]
        .into_iter()
        .filter_map(|o| SurfaceClass::new(c.g - 2, o))
        .collect();
    out.sort();
    out.dedup();
    out
}

pub fn crosscap_add(c: SurfaceClass) -> SurfaceClass {
    SurfaceClass {
        g: c.g + 1,
        non_orientable: true,
    }
}

/// Labels after cutting one cross-cap. Empty on orientable input.
///
/// Demigenus drops by one; the remainder may be orientable exactly when the
/// new demigenus is even. A `(1,1)` result is allowed.
pub fn crosscap_remove_options(c: SurfaceClass) -> Vec<SurfaceClass> {
    if c.is_orientable() {
        return Vec::new();
    }
    let g = c.g - 1;
    (0..=1).filter_map(|o| SurfaceClass::new(g, o)).collect()
}

/// A level-surface component: boundary circle count plus label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BoundedClass {
    pub boundary: u32,
    pub cls: SurfaceClass,
}

/// Normal form of a compact connected surface with boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SurfaceType {
    /// Disc with `boundary − 1` holes and `handles` handles.
    Orientable { boundary: u32, handles: u32 },
    /// Orientable type plus one projective plane.
    OddNonOrientable { boundary: u32, handles: u32 },
    /// Orientable type plus one Klein bottle.
    EvenNonOrientable { boundary: u32, handles: u32 },
}

pub fn classify(b: u32, c: SurfaceClass) -> SurfaceType {
    match (c.non_orientable, c.g % 2) {
        (false, _) => SurfaceType::Orientable {
            boundary: b,
            handles: c.g / 2,
        },
        (true, 1) => SurfaceType::OddNonOrientable {
            boundary: b,
            handles: (c.g - 1) / 2,
        },
        (true, _) => SurfaceType::EvenNonOrientable {
            boundary: b,
            handles: (c.g - 2) / 2,
        },
    }
}

impl BoundedClass {
    pub fn classify(self) -> SurfaceType {
        classify(self.boundary, self.cls)
    }

    /// Euler characteristic of the bounded surface.
    pub fn euler(self) -> i64 {
        2 - i64::from(self.cls.g) - i64::from(self.boundary)
    }
}
