//! The four copy layouts. Every layout places copy corners at integer points of a periodic
//! pattern; gluings are sides that coincide modulo the pattern lattice.

use std::collections::BTreeSet;

use super::glue::{glue, match_sides, GluedTorus, Layout, SideGluing, TileBase};
use super::{validate_covering, Construction, ConstructError, MarkedDisk, SphereCutSystem};
use crate::lattice::{idet, IVec, Lattice, PatternFrame};
use crate::scalar::{Real, Vec2};

/// Pairs of copies (numbered from 1) whose paths `Γ_0`, `Γ_1`, `Γ_2` are identified.
pub const PAIRINGS_8: [[(usize, usize); 4]; 3] = [
    [(1, 2), (3, 4), (5, 6), (7, 8)],
    [(1, 8), (2, 3), (4, 5), (6, 7)],
    [(1, 4), (2, 7), (3, 6), (5, 8)],
];

/// Corners `v0, v1, v2` of the eight octants of the doubled unit square.
const OCTANTS: [[IVec; 3]; 8] = [
    [[0, 0], [1, 1], [0, 1]],
    [[0, 0], [1, 1], [1, 0]],
    [[2, 0], [1, 1], [1, 0]],
    [[2, 0], [1, 1], [2, 1]],
    [[2, 2], [1, 1], [2, 1]],
    [[2, 2], [1, 1], [1, 2]],
    [[0, 2], [1, 1], [1, 2]],
    [[0, 2], [1, 1], [0, 1]],
];

/// Corners `v0..v3` of the four rectangles of the doubled 2x2 block.
const QUADRANTS: [[IVec; 4]; 4] = [
    [[0, 0], [1, 0], [1, 1], [0, 1]],
    [[2, 0], [1, 0], [1, 1], [2, 1]],
    [[0, 2], [1, 2], [1, 1], [0, 1]],
    [[2, 2], [1, 2], [1, 1], [2, 1]],
];

/// Hexagon corners relative to a center, in thirds of the triangular lattice basis
/// `(1, 0), (1/2, sqrt(3)/2)`, counterclockwise. Even corners form one bipartite class of the
/// honeycomb, odd corners the other.
pub const HEX_CORNERS: [IVec; 6] = [[1, 1], [-1, 2], [-2, 1], [-1, -1], [1, -2], [2, -1]];

const DOUBLED: [IVec; 2] = [[2, 0], [0, 2]];
const LAMBDA7: [IVec; 2] = [[2, 1], [-1, 3]];

fn scaled(b: [IVec; 2], s: i64) -> [IVec; 2] {
    b.map(|v| v.map(|x| x * s))
}

fn orientation<T: Real>(frame: &PatternFrame<T>, corners: &[IVec]) -> i8 {
    let n = corners.len();
    let twice_area: i64 = (0..n)
        .map(|i| {
            let (p, q) = (corners[i], corners[(i + 1) % n]);
            p[0] * q[1] - p[1] * q[0]
        })
        .sum();
    let s = twice_area.signum() * idet(frame.basis).signum() * if frame.target.det() > T::zero() { 1 } else { -1 };
    s as i8
}

fn finish<T: Real>(t: GluedTorus<T>) -> Result<GluedTorus<T>, ConstructError> {
    if !t.problems().is_empty() {
        return Err(ConstructError::Validation(t.problems().join("; ")));
    }
    let report = validate_covering(&t);
    if !report.passed {
        return Err(ConstructError::Validation(report.failures.join("; ")));
    }
    Ok(t)
}

fn identity_gluings(gluings: &[SideGluing]) -> Result<(), ConstructError> {
    match gluings.iter().find(|g| g.a.1 != g.b.1 || g.reversed) {
        Some(g) => Err(ConstructError::Pattern(format!("layout glues side {:?} to side {:?}", g.a, g.b))),
        None => Ok(()),
    }
}

fn from_layout<T: Real>(
    construction: Construction,
    base: TileBase<T>,
    layout: Layout<T>,
    gluings: Option<Vec<SideGluing>>,
) -> Result<GluedTorus<T>, ConstructError> {
    let gluings = match gluings {
        Some(g) => g,
        None => match_sides(&layout)?,
    };
    if construction != Construction::Sphere63 {
        identity_gluings(&gluings)?;
    }
    let signs = layout.corners.iter().map(|c| orientation(&layout.frame, c)).collect();
    Ok(glue(construction, base, signs, gluings, Some(layout)))
}

/// Layout of the eight octant copies on the unit square torus.
pub(crate) fn layout_8<T: Real>() -> Layout<T> {
    Layout {
        frame: PatternFrame::new(DOUBLED, Lattice::unit_square()),
        corners: OCTANTS.iter().map(|c| c.to_vec()).collect(),
    }
}

/// Eight copies glued by [`PAIRINGS_8`]. Copy `c` (from 0) sits on the octant with corners
/// `OCTANTS[c]` of the unit square torus; odd-numbered copies keep the disk orientation.
pub fn build_torus_8<T: Real>(d: &MarkedDisk<T>) -> Result<GluedTorus<T>, ConstructError> {
    d.require(3)?;
    let gluings = PAIRINGS_8
        .iter()
        .enumerate()
        .flat_map(|(side, pairs)| {
            pairs.iter().map(move |&(a, b)| SideGluing { a: (a - 1, side), b: (b - 1, side), reversed: false })
        })
        .collect();
    finish(from_layout(Construction::Isosceles8, TileBase::from_disk(d), layout_8(), Some(gluings))?)
}

/// The four reflections of the unit square torus that permute the octant copies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Reflection8 {
    /// `(x, y) -> (x, -y)`
    H,
    /// `(x, y) -> (-x, y)`
    V,
    /// `(x, y) -> (y, x)`
    DP,
    /// `(x, y) -> (1 - y, 1 - x)`
    DS,
}

impl Reflection8 {
    pub const ALL: [Reflection8; 4] = [Reflection8::H, Reflection8::V, Reflection8::DP, Reflection8::DS];

    pub fn apply<T: Real>(self, p: Vec2<T>) -> Vec2<T> {
        match self {
            Reflection8::H => [p[0], -p[1]],
            Reflection8::V => [-p[0], p[1]],
            Reflection8::DP => [p[1], p[0]],
            Reflection8::DS => [T::one() - p[1], T::one() - p[0]],
        }
    }

    fn apply_pattern(self, p: IVec) -> IVec {
        match self {
            Reflection8::H => [p[0], -p[1]],
            Reflection8::V => [-p[0], p[1]],
            Reflection8::DP => [p[1], p[0]],
            Reflection8::DS => [2 - p[1], 2 - p[0]],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Reflection8::H => "H",
            Reflection8::V => "V",
            Reflection8::DP => "DP",
            Reflection8::DS => "DS",
        }
    }
}

/// Copy permutation (from 0) induced by a reflection: the reflected octant of copy `c`, with
/// corners in order, is octant `perm[c]` modulo the lattice.
pub fn reflection_permutation_8(r: Reflection8) -> [usize; 8] {
    let frame = PatternFrame::<f64>::new(DOUBLED, Lattice::unit_square());
    let key = |c: &[IVec; 3]| {
        let r = frame.reduce(c[0]);
        c.map(|p| [p[0] - c[0][0] + r[0], p[1] - c[0][1] + r[1]])
    };
    let mut perm = [0; 8];
    for (c, oct) in OCTANTS.iter().enumerate() {
        let image = key(&oct.map(|p| r.apply_pattern(p)));
        perm[c] = OCTANTS.iter().position(|o| key(o) == image).expect("reflections permute the octants");
    }
    perm
}

/// Four rectangles of width `aspect` and height 1 in a 2x2 block; the torus lattice is
/// `(2 aspect, 0), (0, 2)`.
pub fn build_torus_4<T: Real>(d: &MarkedDisk<T>, aspect: T) -> Result<GluedTorus<T>, ConstructError> {
    d.require(4)?;
    if !(aspect > T::zero()) || !aspect.is_finite() {
        return Err(ConstructError::Marks(format!("aspect must be positive, got {aspect}")));
    }
    let two = T::lit(2.0);
    let layout = Layout {
        frame: PatternFrame::new(DOUBLED, Lattice::rectangle(two * aspect, two)),
        corners: QUADRANTS.iter().map(|c| c.to_vec()).collect(),
    };
    finish(from_layout(Construction::Rectangle4, TileBase::from_disk(d), layout, None)?)
}

/// Canonical hexagon centers modulo `basis`, the origin first.
fn hex_classes(basis: [IVec; 2], count: usize) -> Vec<IVec> {
    let frame = PatternFrame::<f64>::new(basis, Lattice::unit_square());
    let mut seen = BTreeSet::new();
    let r = 4 * (basis[0][0].abs() + basis[0][1].abs() + basis[1][0].abs() + basis[1][1].abs());
    for a in -r..=r {
        for b in -r..=r {
            seen.insert(frame.reduce([a, b]));
        }
    }
    seen.remove(&[0, 0]);
    let mut out = vec![[0, 0]];
    let mut rest: Vec<IVec> = seen.into_iter().collect();
    rest.sort_by_key(|p| (p[1], p[0]));
    out.extend(rest);
    assert_eq!(out.len(), count, "hexagon class count");
    out
}

pub(crate) fn hex_centers_42() -> Vec<IVec> {
    let c = [[0, 0], [1, 0], [0, 1], [-1, 1], [-1, 0], [0, -1], [1, -1]];
    debug_assert_eq!(hex_classes(LAMBDA7, 7).len(), 7);
    c.to_vec()
}

/// 42 triangles: each of the 7 hexagons of the torus `R^2 / Λ7` is split into 6 triangles
/// around its center. Copy `6 h + m` spans the center of hexagon `h` and its corners `m`,
/// `m + 1`; `v0` sits at the center, `v1` on even corners and `v2` on odd corners.
pub fn build_torus_42<T: Real>(d: &MarkedDisk<T>) -> Result<GluedTorus<T>, ConstructError> {
    d.require(3)?;
    let mut corners = Vec::with_capacity(42);
    for [a, b] in hex_centers_42() {
        let center = [3 * a, 3 * b];
        for m in 0..6 {
            let at = |i: usize| [center[0] + HEX_CORNERS[i % 6][0], center[1] + HEX_CORNERS[i % 6][1]];
            let (even, odd) = if m % 2 == 0 { (at(m), at(m + 1)) } else { (at(m + 1), at(m)) };
            corners.push(vec![center, even, odd]);
        }
    }
    let layout = Layout { frame: PatternFrame::new(scaled(LAMBDA7, 3), Lattice::equilateral(T::one())), corners };
    finish(from_layout(Construction::Equilateral42, TileBase::from_disk(d), layout, None)?)
}

/// Side-label rotation of the hexagon at `(a, b)`; well defined modulo `3 Λ7`.
pub fn rotation_offset(a: i64, b: i64) -> usize {
    (4 * a + 2 * b).rem_euclid(6) as usize
}

pub(crate) fn hex_centers_63() -> Vec<IVec> {
    hex_classes(scaled(LAMBDA7, 3), 63)
}

/// 63 copies of the cut sphere, one per hexagon of the torus `R^2 / 3Λ7`. Disk side `s` of
/// the copy at `(a, b)` lies on hexagon side `s + r(a, b)`.
pub fn build_torus_63<T: Real>(c: &SphereCutSystem<T>) -> Result<GluedTorus<T>, ConstructError> {
    let base = c.tile_base()?;
    let mut corners = Vec::with_capacity(63);
    for [a, b] in hex_centers_63() {
        let r = rotation_offset(a, b);
        corners.push(
            (0..6)
                .map(|s| {
                    let o = HEX_CORNERS[(s + r) % 6];
                    [3 * a + o[0], 3 * b + o[1]]
                })
                .collect(),
        );
    }
    let layout = Layout { frame: PatternFrame::new(scaled(LAMBDA7, 9), Lattice::equilateral(T::one())), corners };
    let mut t = from_layout(Construction::Sphere63, base, layout, None)?;
    let mut declared = vec![(c.p_o(), 1)];
    declared.extend(c.leaves().iter().map(|&l| (l, 3)));
    t.declare_branching(declared);
    finish(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_pairings_match_the_octant_geometry() {
        let lay = layout_8::<f64>();
        let mut expected: Vec<SideGluing> = PAIRINGS_8
            .iter()
            .enumerate()
            .flat_map(|(s, p)| p.iter().map(move |&(a, b)| SideGluing { a: (a - 1, s), b: (b - 1, s), reversed: false }))
            .collect();
        expected.sort_by_key(|g| (g.a, g.b));
        assert_eq!(match_sides(&lay).unwrap(), expected);
    }

    #[test]
    fn octant_orientations_alternate() {
        let lay = layout_8::<f64>();
        let signs: Vec<i8> = lay.corners.iter().map(|c| orientation(&lay.frame, c)).collect();
        assert_eq!(signs, vec![1, -1, 1, -1, 1, -1, 1, -1]);
    }

    #[test]
    fn reflection_permutations() {
        let one = |p: [usize; 8]| p.map(|i| i + 1);
        assert_eq!(one(reflection_permutation_8(Reflection8::H)), [8, 7, 6, 5, 4, 3, 2, 1]);
        assert_eq!(one(reflection_permutation_8(Reflection8::V)), [4, 3, 2, 1, 8, 7, 6, 5]);
        assert_eq!(one(reflection_permutation_8(Reflection8::DP)), [2, 1, 8, 7, 6, 5, 4, 3]);
        assert_eq!(one(reflection_permutation_8(Reflection8::DS)), [6, 5, 4, 3, 2, 1, 8, 7]);
    }

    #[test]
    fn rotation_offset_is_lattice_invariant() {
        for a in -20..20 {
            for b in -20..20 {
                let r = rotation_offset(a, b);
                assert_eq!(r % 2, 0);
                assert_eq!(rotation_offset(a + 6, b + 3), r);
                assert_eq!(rotation_offset(a - 3, b + 9), r);
            }
        }
    }

    #[test]
    fn hexagon_neighbours_pair_p_sides_with_leaf_sides() {
        // across every hexagon side, the two disks meet with opposite halves of the same cut path
        let neighbour = [[0, 1], [-1, 1], [-1, 0], [0, -1], [1, -1], [1, 0]];
        for a in -7..7 {
            for b in -7..7 {
                for (j, n) in neighbour.iter().enumerate() {
                    let (r, rn) = (rotation_offset(a, b), rotation_offset(a + n[0], b + n[1]));
                    let s = (j + 6 - r) % 6;
                    let sn = ((j + 3) % 6 + 6 - rn) % 6;
                    assert_eq!(s / 2, sn / 2, "same cut path");
                    assert_ne!(s % 2, sn % 2, "opposite halves");
                }
            }
        }
    }

    #[test]
    fn hexagon_class_counts() {
        assert_eq!(hex_classes(LAMBDA7, 7).len(), 7);
        assert_eq!(hex_centers_63().len(), 63);
        let frame = PatternFrame::<f64>::new(LAMBDA7, Lattice::unit_square());
        let reps: BTreeSet<IVec> = hex_centers_42().iter().map(|&p| frame.reduce(p)).collect();
        assert_eq!(reps.len(), 7);
    }
}
