use std::collections::BTreeMap;

use serde::Serialize;

use super::glue::GluedTorus;
use super::Construction;
use crate::mesh::NO_TWIN;
use crate::scalar::{norm2, sub2, Real};

/// Preimages of one covered vertex that share a local degree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BranchEntry {
    pub vertex: usize,
    pub label: String,
    pub local_degree: usize,
    pub preimages: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoveringReport {
    pub passed: bool,
    pub copies: usize,
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub euler_characteristic: i64,
    pub closed: bool,
    pub manifold: bool,
    /// Glued vertices and edges project consistently onto the covered surface.
    pub projection_consistent: bool,
    /// Pattern corner angles around every vertex sum to a full turn.
    pub flat_pattern: Option<bool>,
    pub branch_table: Vec<BranchEntry>,
    /// `Σ (e - 1)` over all preimages, for closed covered surfaces.
    pub ramification_total: Option<usize>,
    pub riemann_hurwitz: Option<bool>,
    pub failures: Vec<String>,
}

fn he_origin(faces: &[[usize; 3]], h: usize) -> usize {
    faces[h / 3][h % 3]
}

fn he_head(faces: &[[usize; 3]], h: usize) -> usize {
    faces[h / 3][(h % 3 + 1) % 3]
}

fn he_prev(h: usize) -> usize {
    3 * (h / 3) + (h % 3 + 2) % 3
}

/// Checks that a glued torus is a closed orientable surface of Euler characteristic 0 that
/// covers its base surface as declared. Never panics on corrupted input; every violated
/// condition is listed in `failures`.
pub fn validate_covering<T: Real>(t: &GluedTorus<T>) -> CoveringReport {
    let faces = t.raw_faces();
    let twins = t.raw_twins();
    let nv = t.n_vertices();
    let nf = faces.len();
    let nh = 3 * nf;
    let mut failures: Vec<String> = t.problems().to_vec();

    let unpaired = twins.iter().filter(|&&x| x == NO_TWIN).count();
    let ne = (nh - unpaired) / 2 + unpaired;
    let chi = nv as i64 - ne as i64 + nf as i64;
    let closed = unpaired == 0;
    if !closed {
        failures.push(format!("{unpaired} halfedges have no twin"));
    }
    if chi != 0 {
        failures.push(format!("euler characteristic is {chi}, expected 0"));
    }

    let mut twins_ok = true;
    for h in 0..nh {
        let g = twins[h];
        if g == NO_TWIN {
            continue;
        }
        if g >= nh || twins[g] != h || he_origin(faces, h) != he_head(faces, g) || he_head(faces, h) != he_origin(faces, g) {
            twins_ok = false;
            failures.push(format!("halfedge {h}: twin does not reverse it"));
            break;
        }
    }

    // vertex links: the corners around every vertex must form one cycle
    let mut corners = vec![0usize; nv];
    let mut first_out = vec![usize::MAX; nv];
    for h in 0..nh {
        let v = he_origin(faces, h);
        corners[v] += 1;
        if first_out[v] == usize::MAX {
            first_out[v] = h;
        }
    }
    let mut manifold = closed && twins_ok;
    if manifold {
        for v in 0..nv {
            if corners[v] == 0 {
                manifold = false;
                failures.push(format!("vertex {v} has no faces"));
                continue;
            }
            let start = first_out[v];
            let mut h = start;
            let mut steps = 0;
            loop {
                h = twins[he_prev(h)];
                steps += 1;
                if h == start || steps > corners[v] {
                    break;
                }
            }
            if h != start || steps != corners[v] {
                manifold = false;
                failures.push(format!("vertex {v}: link is not a single cycle ({steps} of {} corners reached)", corners[v]));
            }
        }
    }

    let base = t.base();
    let covered = &base.covered;
    let k = t.copies();

    // projection of vertices
    let mut proj = vec![usize::MAX; nv];
    let mut members: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nv];
    let mut projection_consistent = true;
    for c in 0..k {
        for v in 0..base.mesh.n_vertices() {
            let u = t.torus_vertex(c, v);
            members[u].push((c, v));
            let s = base.origin[v];
            if proj[u] == usize::MAX {
                proj[u] = s;
            } else if proj[u] != s {
                if projection_consistent {
                    failures.push(format!("torus vertex {u} projects to both {} and {s}", proj[u]));
                }
                projection_consistent = false;
            }
        }
    }

    let covered_corners: Vec<usize> = (0..covered.n_vertices()).map(|s| covered.outgoing(s).len()).collect();
    let mut degree = vec![0usize; nv];
    for u in 0..nv {
        let s = proj[u];
        if s == usize::MAX || !corners[u].is_multiple_of(covered_corners[s]) {
            projection_consistent = false;
            failures.push(format!("torus vertex {u}: corner count {} is not a multiple of the base count", corners[u]));
            continue;
        }
        degree[u] = corners[u] / covered_corners[s];
    }

    let mut ramification_total = None;
    let mut riemann_hurwitz = None;
    let mut table: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let labels: Vec<(usize, String)>;
    if covered.is_closed() {
        // a branched covering: glued edges must project onto edges of the base, with the copy
        // orientation preserved
        if t.signs().iter().any(|&s| s < 0) {
            projection_consistent = false;
            failures.push("copies of a closed surface must keep its orientation".into());
        }
        let project = |h: usize| 3 * t.base_face(h / 3) + h % 3;
        if closed && twins_ok {
            if let Some(h) = (0..nh).find(|&h| covered.twin(project(h)) != Some(project(twins[h]))) {
                projection_consistent = false;
                failures.push(format!("halfedge {h} is glued across an edge that does not exist in the base"));
            }
        }
        let declared: BTreeMap<usize, usize> = t.declared_branching().iter().copied().collect();
        let mut sum = 0usize;
        for u in 0..nv {
            if proj[u] == usize::MAX || degree[u] == 0 {
                continue;
            }
            let s = proj[u];
            sum += degree[u] - 1;
            let expected = declared.get(&s).copied().unwrap_or(1);
            if degree[u] != expected {
                failures.push(format!("preimage {u} of base vertex {s} has local degree {}, expected {expected}", degree[u]));
            }
            if degree[u] != 1 || declared.contains_key(&s) {
                *table.entry((s, degree[u])).or_default() += 1;
            }
        }
        ramification_total = Some(sum);
        let rh = chi == k as i64 * covered.euler_characteristic() - sum as i64;
        if !rh {
            failures.push("riemann-hurwitz count does not balance".into());
        }
        riemann_hurwitz = Some(rh);
        labels = t
            .declared_branching()
            .iter()
            .enumerate()
            .map(|(i, &(s, _))| {
                let name = if t.construction() == Construction::Sphere63 {
                    if i == 0 { "p_O".to_string() } else { format!("L_{}", i - 1) }
                } else {
                    format!("b{i}")
                };
                (s, name)
            })
            .collect();
    } else {
        // folded disk copies: report how many sheets meet at the preimages of each corner
        labels = base.corners().iter().enumerate().map(|(j, &v)| (base.origin[v], format!("v{j}"))).collect();
        for u in 0..nv {
            if let Some((s, _)) = labels.iter().find(|(s, _)| *s == proj[u]) {
                *table.entry((*s, degree[u])).or_default() += 1;
            }
        }
    }
    let branch_table = table
        .into_iter()
        .map(|((vertex, local_degree), preimages)| BranchEntry {
            vertex,
            label: labels.iter().find(|(s, _)| *s == vertex).map_or_else(|| format!("vertex {vertex}"), |(_, l)| l.clone()),
            local_degree,
            preimages,
        })
        .collect();

    let flat_pattern = t.layout().map(|lay| {
        let corner_idx: Vec<Option<usize>> = {
            let mut v = vec![None; base.mesh.n_vertices()];
            for (j, &c) in base.corners().iter().enumerate() {
                v[c] = Some(j);
            }
            v
        };
        let on_boundary: Vec<bool> = (0..base.mesh.n_vertices()).map(|v| base.mesh.is_boundary_vertex(v)).collect();
        let nc = base.sides.len();
        let full = 2.0 * std::f64::consts::PI;
        let mut ok = true;
        for (u, mem) in members.iter().enumerate() {
            let total: f64 = mem
                .iter()
                .map(|&(c, v)| match corner_idx[v] {
                    Some(j) => {
                        let p = |i: usize| lay.frame.to_plane(lay.corners[c][i % nc]).map(|x| x.as_f64());
                        let (a, b) = (sub2(p(j + nc - 1), p(j)), sub2(p(j + 1), p(j)));
                        ((a[0] * b[0] + a[1] * b[1]) / (norm2(a) * norm2(b))).clamp(-1.0, 1.0).acos()
                    }
                    None if on_boundary[v] => std::f64::consts::PI,
                    None => full,
                })
                .sum();
            if (total - full).abs() > 1e-9 {
                ok = false;
                failures.push(format!("pattern angles around torus vertex {u} sum to {total}"));
                break;
            }
        }
        ok
    });

    let passed = failures.is_empty();
    CoveringReport {
        passed,
        copies: k,
        vertices: nv,
        edges: ne,
        faces: nf,
        euler_characteristic: chi,
        closed,
        manifold,
        projection_consistent,
        flat_pattern,
        branch_table,
        ramification_total,
        riemann_hurwitz,
        failures,
    }
}
