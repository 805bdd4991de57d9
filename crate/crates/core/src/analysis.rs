//! Checks on solved tori (reflection and rotation symmetries, tiling, per-copy energies, folds)
//! and the SVG and JSON artifacts.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::construct::{reflection_permutation_8, BranchEntry, Construction, GluedTorus, Reflection8, SphereCutSystem};
use crate::direct::{procrustes, Crosscheck};
use crate::energy::EdgeWeights;
use crate::lattice::{isub, Lattice};
use crate::linalg::SolveStats;
use crate::mesh::SurfaceMesh;
use crate::scalar::{add2, orient2, sub2, Real, Vec2};
use crate::torus::TorusEmbedding;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("check needs a {expected:?} torus, got {got:?}")]
    WrongConstruction { expected: Construction, got: Construction },
    #[error("embedding is empty")]
    Empty,
    #[error("report serialization failed: {0}")]
    Json(#[from] serde_json::Error),
}

/// Symmetry residuals are measured against `SYMMETRY_TOLERANCE * lattice cell diameter`.
pub const SYMMETRY_TOLERANCE: f64 = 1e-8;
pub const AREA_TOLERANCE: f64 = 1e-8;
pub const TILE_TOLERANCE: f64 = 1e-8;
pub const ENERGY_SPREAD_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct SymmetryCheck {
    pub name: String,
    pub max_residual: f64,
    pub mean_residual: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SymmetryReport {
    pub tolerance: f64,
    pub checks: Vec<SymmetryCheck>,
    pub passed: bool,
}

impl SymmetryReport {
    fn new(tolerance: f64, checks: Vec<SymmetryCheck>) -> Self {
        let passed = checks.iter().all(|c| c.passed);
        Self { tolerance, checks, passed }
    }

    pub fn max_residual(&self) -> f64 {
        self.checks.iter().map(|c| c.max_residual).fold(0.0, f64::max)
    }
}

fn summarize(name: String, residuals: &[f64], tol: f64) -> SymmetryCheck {
    let max = residuals.iter().copied().fold(0.0, f64::max);
    let mean = if residuals.is_empty() { 0.0 } else { residuals.iter().sum::<f64>() / residuals.len() as f64 };
    SymmetryCheck { name, max_residual: max, mean_residual: mean, passed: max <= tol }
}

fn require<T: Real>(t: &GluedTorus<T>, c: Construction) -> Result<(), AnalysisError> {
    if t.construction() != c {
        return Err(AnalysisError::WrongConstruction { expected: c, got: t.construction() });
    }
    Ok(())
}

/// Lifts shifted so the pin sits where the layout puts corner 0 of copy 0.
fn pattern_aligned<T: Real>(emb: &TorusEmbedding<T>, t: &GluedTorus<T>) -> Vec<[f64; 2]> {
    let shift = t
        .layout()
        .map(|l| l.frame.to_plane(l.corners[0][0]))
        .map_or([0.0, 0.0], |p| p.map(|x| x.as_f64()));
    let pin = emb.lifts[emb.pin].map(|x| x.as_f64());
    emb.lifts
        .iter()
        .map(|p| [p[0].as_f64() - pin[0] + shift[0], p[1].as_f64() - pin[1] + shift[1]])
        .collect()
}

/// For each of the four reflections `R` of the square torus and its copy permutation `S`,
/// the distances `|R(x(c, v)) - x(S(c), v)|` modulo the lattice.
pub fn check_reflections_8<T: Real>(emb: &TorusEmbedding<T>, t: &GluedTorus<T>) -> Result<SymmetryReport, AnalysisError> {
    require(t, Construction::Isosceles8)?;
    let l: Lattice<f64> = emb.lattice.convert();
    let x = pattern_aligned(emb, t);
    let tol = SYMMETRY_TOLERANCE * l.cell_diameter();
    let n = t.base().mesh.n_vertices();
    let checks = Reflection8::ALL
        .iter()
        .map(|&r| {
            let perm = reflection_permutation_8(r);
            let res: Vec<f64> = (0..8)
                .flat_map(|c| (0..n).map(move |v| (c, v)))
                .map(|(c, v)| {
                    let a = r.apply(x[t.torus_vertex(c, v)]);
                    l.distance_mod(a, x[t.torus_vertex(perm[c], v)])
                })
                .collect();
            summarize(r.name().to_string(), &res, tol)
        })
        .collect();
    Ok(SymmetryReport::new(tol, checks))
}

fn rotate(p: [f64; 2], c: [f64; 2], angle: f64) -> [f64; 2] {
    let (s, co) = angle.sin_cos();
    let d = [p[0] - c[0], p[1] - c[1]];
    [c[0] + co * d[0] - s * d[1], c[1] + s * d[0] + co * d[1]]
}

/// Inside every tile, `sigma` must act as a third of a turn about a common center. The center
/// is fitted by least squares, both turning directions are tried.
pub fn check_rotation_63<T: Real>(
    emb: &TorusEmbedding<T>,
    t: &GluedTorus<T>,
    cuts: &SphereCutSystem<T>,
) -> Result<SymmetryReport, AnalysisError> {
    require(t, Construction::Sphere63)?;
    let sigma = cuts.cut_sigma();
    let tol = SYMMETRY_TOLERANCE * emb.lattice.cell_diameter().as_f64();
    let mut checks = Vec::with_capacity(t.copies());
    for c in 0..t.copies() {
        let y: Vec<[f64; 2]> = emb.copy_uv(t, c).iter().map(|p| p.map(|x| x.as_f64())).collect();
        let best = [1.0f64, -1.0]
            .into_iter()
            .map(|dir| {
                let angle = dir * 2.0 * std::f64::consts::PI / 3.0;
                // (I - R) c = mean(y_sigma - R y)
                let m = y.len() as f64;
                let acc = y.iter().enumerate().fold([0.0, 0.0], |a, (v, p)| {
                    let r = rotate(*p, [0.0, 0.0], angle);
                    [a[0] + (y[sigma[v]][0] - r[0]) / m, a[1] + (y[sigma[v]][1] - r[1]) / m]
                });
                let (s, co) = angle.sin_cos();
                let (a, b, cc, d) = (1.0 - co, s, -s, 1.0 - co);
                let det = a * d - b * cc;
                let center = [(d * acc[0] - b * acc[1]) / det, (-cc * acc[0] + a * acc[1]) / det];
                let res: Vec<f64> = (0..y.len())
                    .map(|v| {
                        let r = rotate(y[v], center, angle);
                        (r[0] - y[sigma[v]][0]).hypot(r[1] - y[sigma[v]][1])
                    })
                    .collect();
                summarize(format!("tile {c}"), &res, tol)
            })
            .min_by(|a, b| a.max_residual.total_cmp(&b.max_residual))
            .expect("two directions");
        checks.push(best);
    }
    Ok(SymmetryReport::new(tol, checks))
}

#[derive(Debug, Clone, Serialize)]
pub struct Tile {
    pub copy: usize,
    /// Planar positions of the copy's disk vertices, shifted so the centroid lies in the cell.
    pub uv: Vec<[f64; 2]>,
    pub centroid: [f64; 2],
    pub area: f64,
    /// Tiles with equal class are translates of each other in the layout.
    pub class: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct TileExtraction {
    pub tiles: Vec<Tile>,
    pub total_area: f64,
    pub lattice_area: f64,
    pub area_relative_error: f64,
    /// Largest vertex RMS between a tile and its class representative after removing the
    /// translation.
    pub max_translation_rms: f64,
    /// Largest vertex RMS between a tile and tile 0 after the best rigid motion.
    pub max_congruence_rms: f64,
    pub hexagon_groups: Option<HexagonCheck>,
    pub overlap_samples: usize,
    pub overlaps: usize,
    pub passed: bool,
}

fn tile_class_keys<T: Real>(t: &GluedTorus<T>) -> Vec<usize> {
    let Some(l) = t.layout() else { return (0..t.copies()).collect() };
    let mut keys: Vec<Vec<[i64; 2]>> = Vec::new();
    l.corners
        .iter()
        .map(|cs| {
            let key: Vec<[i64; 2]> = cs.iter().map(|&p| isub(p, cs[0])).collect();
            match keys.iter().position(|k| *k == key) {
                Some(i) => i,
                None => {
                    keys.push(key);
                    keys.len() - 1
                }
            }
        })
        .collect()
}

fn rms(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    let s: f64 = a.iter().zip(b).map(|(p, q)| (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sum();
    (s / a.len().max(1) as f64).sqrt()
}

fn in_triangle(p: [f64; 2], t: [[f64; 2]; 3]) -> bool {
    let eps = 1e-12;
    orient2(t[0], t[1], p) > eps && orient2(t[1], t[2], p) > eps && orient2(t[2], t[0], p) > eps
}

/// Splits the embedding into one tile per copy and checks that the tiles partition the flat
/// torus into congruent pieces.
pub fn check_tiling<T: Real>(emb: &TorusEmbedding<T>, t: &GluedTorus<T>) -> TileExtraction {
    let l: Lattice<f64> = emb.lattice.convert();
    let bm = &t.base().mesh;
    let classes = tile_class_keys(t);
    let diam = l.cell_diameter();
    let tiles: Vec<Tile> = (0..t.copies())
        .map(|c| {
            let uv: Vec<[f64; 2]> = emb.copy_uv(t, c).iter().map(|p| p.map(|x| x.as_f64())).collect();
            let sign = if t.signs()[c] > 0 { 1.0 } else { -1.0 };
            let area: f64 = bm.faces().iter().map(|f| sign * orient2(uv[f[0]], uv[f[1]], uv[f[2]]) / 2.0).sum();
            let m = uv.len() as f64;
            let cen = uv.iter().fold([0.0, 0.0], |a, p| [a[0] + p[0] / m, a[1] + p[1] / m]);
            let (red, _) = l.reduce(cen);
            let shift = sub2(red, cen);
            Tile {
                copy: c,
                uv: uv.iter().map(|&p| add2(p, shift)).collect(),
                centroid: red,
                area,
                class: classes[c],
            }
        })
        .collect();
    let total_area: f64 = tiles.iter().map(|t| t.area).sum();
    let lattice_area = l.area();
    let area_relative_error = (total_area - lattice_area).abs() / lattice_area;

    let mut max_translation_rms = 0.0f64;
    for tile in &tiles {
        let rep = tiles.iter().find(|r| r.class == tile.class).expect("class has a member");
        let d = sub2(tile.uv[0], rep.uv[0]);
        let moved: Vec<[f64; 2]> = rep.uv.iter().map(|&p| add2(p, d)).collect();
        max_translation_rms = max_translation_rms.max(rms(&moved, &tile.uv));
    }
    let max_congruence_rms =
        tiles.iter().map(|tile| procrustes(&tiles[0].uv, &tile.uv, false).rms).fold(0.0, f64::max);

    let hexagon_groups = (t.construction() == Construction::Equilateral42).then(|| hexagon_check(&tiles, t, &l));

    // sampled disjointness: face centroids must fall inside exactly one face modulo the lattice
    let mesh = t.mesh();
    let corners: Vec<[[f64; 2]; 3]> =
        (0..mesh.n_faces()).map(|f| emb.face_corners(mesh, f).map(|p| p.map(|x| x.as_f64()))).collect();
    let step = (mesh.n_faces() / 200).max(1);
    let mut overlap_samples = 0;
    let mut overlaps = 0;
    for f in (0..mesh.n_faces()).step_by(step) {
        let [a, b, c] = corners[f];
        let p = [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0];
        overlap_samples += 1;
        let hits = corners
            .iter()
            .filter(|tri| {
                let q = add2(tri[0], l.shortest(sub2(p, tri[0])));
                (-1..=1).any(|i| {
                    (-1..=1).any(|j| {
                        let r = add2(q, l.point([i, j]));
                        in_triangle(r, **tri)
                    })
                })
            })
            .count();
        if hits != 1 {
            overlaps += 1;
        }
    }

    let passed = area_relative_error <= AREA_TOLERANCE
        && max_translation_rms <= TILE_TOLERANCE * diam
        && max_congruence_rms <= TILE_TOLERANCE * diam
        && hexagon_groups.as_ref().is_none_or(|h| h.passed)
        && overlaps == 0;
    TileExtraction {
        tiles,
        total_area,
        lattice_area,
        area_relative_error,
        max_translation_rms,
        max_congruence_rms,
        hexagon_groups,
        overlap_samples,
        overlaps,
        passed,
    }
}

/// The six tiles around each hexagon center of the 42-copy layout.
#[derive(Debug, Clone, Serialize)]
pub struct HexagonCheck {
    /// Largest `|area(group) - area(cell) / 7|`, relative.
    pub area_relative_error: f64,
    /// Largest distance of an outer corner from the circle of the regular hexagon of that area,
    /// relative to the cell diameter.
    pub regularity: f64,
    /// Largest vertex RMS between a group and group 0 after removing the translation.
    pub translation_rms: f64,
    /// Largest relative deviation of a tile's corner-to-corner distances from their mean.
    pub edge_deviation: f64,
    pub passed: bool,
}

pub const EDGE_TOLERANCE: f64 = 1e-7;

fn hexagon_check<T: Real>(tiles: &[Tile], t: &GluedTorus<T>, l: &Lattice<f64>) -> HexagonCheck {
    let corners = t.base().corners();
    let center = corners[0];
    let diam = l.cell_diameter();
    let target_area = l.area() / 7.0;
    let radius = (2.0 * target_area / (3.0 * 3f64.sqrt())).sqrt();
    let mut area_relative_error = 0.0f64;
    let mut regularity = 0.0f64;
    let mut edge_deviation = 0.0f64;
    // each group unrolled around its center, which is moved to the origin
    let mut groups: Vec<Vec<[f64; 2]>> = Vec::with_capacity(7);
    for h in 0..7 {
        let group = &tiles[6 * h..6 * h + 6];
        let a: f64 = group.iter().map(|t| t.area).sum();
        area_relative_error = area_relative_error.max((a - target_area).abs() / target_area);
        let c0 = group[0].uv[center];
        let mut pts = Vec::new();
        for tile in group {
            let shift = sub2(l.shortest(sub2(tile.uv[center], c0)), sub2(tile.uv[center], c0));
            for &v in &corners[1..] {
                let p = add2(sub2(tile.uv[v], c0), shift);
                regularity = regularity.max(((p[0] * p[0] + p[1] * p[1]).sqrt() - radius).abs() / diam);
            }
            pts.extend(tile.uv.iter().map(|&p| add2(sub2(p, c0), shift)));
            let k = corners.len();
            let lens: Vec<f64> = (0..k)
                .map(|j| {
                    let d = sub2(tile.uv[corners[(j + 1) % k]], tile.uv[corners[j]]);
                    d[0].hypot(d[1])
                })
                .collect();
            let mean = lens.iter().sum::<f64>() / k as f64;
            edge_deviation = lens.iter().fold(edge_deviation, |m, &x| m.max((x - mean).abs() / mean));
        }
        groups.push(pts);
    }
    let translation_rms = groups.iter().map(|g| rms(g, &groups[0])).fold(0.0, f64::max);
    let passed = area_relative_error <= AREA_TOLERANCE
        && regularity <= TILE_TOLERANCE
        && translation_rms <= TILE_TOLERANCE * diam
        && edge_deviation <= EDGE_TOLERANCE;
    HexagonCheck { area_relative_error, regularity, translation_rms, edge_deviation, passed }
}

#[derive(Debug, Clone, Serialize)]
pub struct CopyEnergies {
    pub energies: Vec<f64>,
    pub total: f64,
    /// `(max - min) / mean`.
    pub relative_spread: f64,
}

/// Dirichlet energy of every copy, with `w` the weights on the torus mesh.
pub fn per_copy_energies<T: Real>(emb: &TorusEmbedding<T>, t: &GluedTorus<T>, w: &EdgeWeights<T>) -> CopyEnergies {
    let mesh = t.mesh();
    let mut energies = vec![0.0f64; t.copies()];
    for f in 0..mesh.n_faces() {
        energies[t.copy_of_face(f)] += w.face_energy(f, emb.face_corners(mesh, f)).as_f64();
    }
    let total: f64 = energies.iter().sum();
    let (lo, hi) = energies.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &e| (a.min(e), b.max(e)));
    let mean = total / energies.len().max(1) as f64;
    let relative_spread = if mean != 0.0 { (hi - lo) / mean.abs() } else { hi - lo };
    CopyEnergies { energies, total, relative_spread }
}

/// Faces whose image has non-positive signed area.
pub fn flip_count<T: Real>(mesh: &SurfaceMesh<T>, uv: &[Vec2<T>]) -> usize {
    mesh.faces().iter().filter(|f| orient2(uv[f[0]], uv[f[1]], uv[f[2]]) <= T::zero()).count()
}

pub fn flip_count_torus<T: Real>(emb: &TorusEmbedding<T>, mesh: &SurfaceMesh<T>) -> usize {
    emb.signed_areas(mesh).iter().filter(|&&a| a <= T::zero()).count()
}

/// Distances of the tile corners from their layout positions and of side vertices from the
/// straight segments between them.
#[derive(Debug, Clone, Serialize)]
pub struct CornerCheck {
    pub max_corner_error: f64,
    pub max_side_deviation: f64,
    pub passed: bool,
}

/// Copy `c` compared with the polygon its corners occupy in the layout: corners must sit on
/// the layout points and every boundary path on the straight side between its corners.
pub fn check_layout_polygon<T: Real>(emb: &TorusEmbedding<T>, t: &GluedTorus<T>, c: usize) -> Option<CornerCheck> {
    let layout = t.layout()?;
    let l: Lattice<f64> = emb.lattice.convert();
    let x = pattern_aligned(emb, t);
    let corners = t.base().corners();
    let k = corners.len();
    let target: Vec<[f64; 2]> = layout.corners[c].iter().map(|&p| layout.frame.to_plane(p).map(|v| v.as_f64())).collect();
    // copy_uv starts from the raw lift of corner 0, `x` holds the pattern-aligned one
    let uv: Vec<[f64; 2]> = emb.copy_uv(t, c).iter().map(|p| p.map(|v| v.as_f64())).collect();
    let v0 = corners[0];
    let aligned = add2(uv[v0], sub2(x[t.torus_vertex(c, v0)], emb.lifts[t.torus_vertex(c, v0)].map(|v| v.as_f64())));
    let delta = sub2(target[0], aligned);
    let shift = add2(sub2(delta, l.shortest(delta)), sub2(aligned, uv[v0]));
    let y: Vec<[f64; 2]> = uv.iter().map(|&p| add2(p, shift)).collect();
    let max_corner_error = (0..k).map(|j| {
        let d = sub2(y[corners[j]], target[j]);
        d[0].hypot(d[1])
    });
    let max_corner_error = max_corner_error.fold(0.0, f64::max);
    let mut max_side_deviation = 0.0f64;
    for j in 0..k {
        let (a, b) = (target[j], target[(j + 1) % k]);
        let len = (b[0] - a[0]).hypot(b[1] - a[1]);
        for &v in &t.base().sides[j] {
            max_side_deviation = max_side_deviation.max(orient2(a, b, y[v]).abs() / len);
        }
    }
    let tol = SYMMETRY_TOLERANCE * l.cell_diameter();
    Some(CornerCheck { max_corner_error, max_side_deviation, passed: max_corner_error <= tol && max_side_deviation <= tol })
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SvgOptions {
    /// Also draw the eight neighbouring translates of the cell, faded.
    pub translates: bool,
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 { a } else { gcd(b, a % b) }
}

fn copy_color(c: usize, k: usize) -> String {
    // stride through the hue circle so neighbouring copies differ, distinct for every copy
    let k = k.max(1);
    let stride = (k * 2 / 5..=k).find(|&s| gcd(s, k) == 1).unwrap_or(1);
    let hue = ((c * stride) % k) as f64 * 360.0 / k as f64;
    format!("hsl({hue:.1},65%,{}%)", if c.is_multiple_of(2) { 62 } else { 74 })
}

/// SVG of the tiles in the fundamental cell, one fill group per copy.
pub fn emit_svg<T: Real>(emb: &TorusEmbedding<T>, t: &GluedTorus<T>, opts: SvgOptions) -> Result<String, AnalysisError> {
    if emb.lifts.is_empty() || t.copies() == 0 {
        return Err(AnalysisError::Empty);
    }
    let l: Lattice<f64> = emb.lattice.convert();
    let tiles = check_tiling_tiles(emb, t);
    let cell = [[0.0, 0.0], l.basis[0], add2(l.basis[0], l.basis[1]), l.basis[1]];
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in cell.iter().chain(tiles.iter().flat_map(|t| t.iter())) {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let size = 800.0;
    let s = size / (hi[0] - lo[0]).max(hi[1] - lo[1]);
    let margin = 10.0;
    let px = |p: [f64; 2]| [margin + (p[0] - lo[0]) * s, margin + (hi[1] - p[1]) * s];
    let (w, h) = ((hi[0] - lo[0]) * s + 2.0 * margin, (hi[1] - lo[1]) * s + 2.0 * margin);
    let bm = &t.base().mesh;
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w:.1}" height="{h:.1}" viewBox="0 0 {w:.1} {h:.1}">"#
    );
    let poly = |out: &mut String, pts: &[[f64; 2]]| {
        let coords: Vec<String> = pts.iter().map(|&p| px(p)).map(|q| format!("{:.3},{:.3}", q[0], q[1])).collect();
        let _ = writeln!(out, r#"    <polygon points="{}"/>"#, coords.join(" "));
    };
    let shifts: Vec<[i64; 2]> =
        if opts.translates { (-1..=1).flat_map(|i| (-1..=1).map(move |j| [i, j])).collect() } else { vec![[0, 0]] };
    for (c, uv) in tiles.iter().enumerate() {
        let _ = writeln!(
            out,
            r##"  <g id="copy-{c}" class="tile" fill="{}" stroke="#333333" stroke-width="0.2">"##,
            copy_color(c, t.copies())
        );
        for &sh in &shifts {
            let d = l.point(sh);
            for f in bm.faces() {
                poly(&mut out, &f.map(|v| add2(uv[v], d)));
            }
        }
        let _ = writeln!(out, "  </g>");
    }
    let _ = writeln!(out, r#"  <g id="cell" fill="none" stroke="black" stroke-width="1.5">"#);
    poly(&mut out, &cell);
    let _ = writeln!(out, "  </g>");
    let _ = writeln!(out, "</svg>");
    Ok(out)
}

/// SVG of a planar map of `mesh`, one face group, for results without a torus.
pub fn emit_svg_uv<T: Real>(mesh: &SurfaceMesh<T>, uv: &[Vec2<T>]) -> Result<String, AnalysisError> {
    if uv.is_empty() || mesh.n_faces() == 0 {
        return Err(AnalysisError::Empty);
    }
    let pts: Vec<[f64; 2]> = uv.iter().map(|p| p.map(|x| x.as_f64())).collect();
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in &pts {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let s = 800.0 / (hi[0] - lo[0]).max(hi[1] - lo[1]).max(f64::MIN_POSITIVE);
    let margin = 10.0;
    let (w, h) = ((hi[0] - lo[0]) * s + 2.0 * margin, (hi[1] - lo[1]) * s + 2.0 * margin);
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w:.1}" height="{h:.1}" viewBox="0 0 {w:.1} {h:.1}">"#
    );
    let _ = writeln!(out, r##"  <g id="copy-0" class="tile" fill="{}" stroke="#333333" stroke-width="0.2">"##, copy_color(0, 1));
    for f in mesh.faces() {
        let coords: Vec<String> = f
            .iter()
            .map(|&v| format!("{:.3},{:.3}", margin + (pts[v][0] - lo[0]) * s, margin + (hi[1] - pts[v][1]) * s))
            .collect();
        let _ = writeln!(out, r#"    <polygon points="{}"/>"#, coords.join(" "));
    }
    let _ = writeln!(out, "  </g>");
    let _ = writeln!(out, "</svg>");
    Ok(out)
}

fn check_tiling_tiles<T: Real>(emb: &TorusEmbedding<T>, t: &GluedTorus<T>) -> Vec<Vec<[f64; 2]>> {
    let l: Lattice<f64> = emb.lattice.convert();
    (0..t.copies())
        .map(|c| {
            let uv: Vec<[f64; 2]> = emb.copy_uv(t, c).iter().map(|p| p.map(|x| x.as_f64())).collect();
            let m = uv.len() as f64;
            let cen = uv.iter().fold([0.0, 0.0], |a, p| [a[0] + p[0] / m, a[1] + p[1] / m]);
            let shift = sub2(l.reduce(cen).0, cen);
            uv.iter().map(|&p| add2(p, shift)).collect()
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct SolverSummary {
    pub method: String,
    pub iters: usize,
    pub residual: f64,
    pub equation_residual: f64,
}

impl SolverSummary {
    pub fn new(stats: &SolveStats, equation_residual: f64) -> Self {
        let method = serde_json::to_value(stats.method).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default();
        Self { method, iters: stats.iterations, residual: stats.relative_residual, equation_residual }
    }
}

/// Run summary written as `<name>.report.json`.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub construction: Construction,
    pub k: usize,
    pub weights: String,
    pub method: String,
    pub energies: Vec<f64>,
    pub total_energy: Option<f64>,
    pub energy_spread: Option<f64>,
    /// Named residuals of every check that ran.
    pub residuals: BTreeMap<String, f64>,
    pub flips: usize,
    pub negative_weights: usize,
    pub branch_table: Vec<BranchEntry>,
    pub solver: Option<SolverSummary>,
    pub crosscheck: Option<Crosscheck>,
    /// Named pass/fail outcome of every check that ran.
    pub checks: BTreeMap<String, bool>,
    pub passed: bool,
}

pub fn emit_report(r: &Report) -> Result<String, AnalysisError> {
    let mut s = serde_json::to_string_pretty(r)?;
    s.push('\n');
    Ok(s)
}
