use symtile::analysis::{
    check_layout_polygon, check_reflections_8, check_rotation_63, check_tiling, emit_report, emit_svg, flip_count,
    flip_count_torus, per_copy_energies, AnalysisError, Report, SvgOptions,
};
use symtile::construct::{
    build_torus_4, build_torus_42, build_torus_63, build_torus_8, make_symmetric_cuts, validate_covering, GluedTorus,
    MarkedDisk, SphereCutSystem,
};
use symtile::energy::{cotan_weights, uniform_weights, EdgeWeights};
use symtile::fixtures::{self, SphereFixture};
use symtile::lattice::Lattice;
use symtile::linalg::SolverOptions;
use symtile::torus::{harmonic_embedding, TorusEmbedding};

type Weights = fn(&symtile::mesh::SurfaceMesh<f64>) -> EdgeWeights<f64>;
const SCHEMES: [Weights; 2] = [uniform_weights, cotan_weights];

fn solve(t: &GluedTorus<f64>, base_w: Weights) -> (TorusEmbedding<f64>, EdgeWeights<f64>) {
    let w = t.lift_weights(&base_w(&t.base().mesh));
    let (e, _) =
        harmonic_embedding(t, &w, t.default_pin(), Lattice::unit_square(), &SolverOptions::for_scalar::<f64>()).unwrap();
    (e, w)
}

fn cuts(s: &SphereFixture) -> SphereCutSystem<f64> {
    make_symmetric_cuts(&s.mesh, s.p_o, &s.sigma, s.seed_target).unwrap()
}

fn disks3() -> Vec<MarkedDisk<f64>> {
    vec![
        fixtures::single_triangle().marked(),
        fixtures::symmetric_disk(6).marked(),
        fixtures::random_delaunay_disk(20, 5).marked(),
    ]
}

#[test]
fn reflections_hold_on_every_disk() {
    for d in disks3() {
        let t = build_torus_8(&d).unwrap();
        for w in SCHEMES {
            let (e, _) = solve(&t, w);
            let r = check_reflections_8(&e, &t).unwrap();
            assert!(r.passed, "{r:?}");
            assert_eq!(r.checks.len(), 4);
        }
    }
}

#[test]
fn single_triangle_reflections_are_exact() {
    let t = build_torus_8(&fixtures::single_triangle().marked()).unwrap();
    let (e, _) = solve(&t, uniform_weights);
    assert!(check_reflections_8(&e, &t).unwrap().max_residual() < 1e-14);
}

#[test]
fn corrupted_jump_breaks_reflection_symmetry() {
    let t = build_torus_8(&fixtures::random_delaunay_disk(20, 5).marked()).unwrap();
    let (mut e, _) = solve(&t, cotan_weights);
    // a wrong lift for one vertex stands in for a wrong jump on its edges
    let v = (0..e.lifts.len()).find(|&v| v != e.pin).unwrap();
    e.lifts[v] = [e.lifts[v][0] + 0.05, e.lifts[v][1] + 0.02];
    let r = check_reflections_8(&e, &t).unwrap();
    assert!(!r.passed && r.max_residual() > 1e3 * r.tolerance);
}

#[test]
fn wrong_construction_is_rejected() {
    let t = build_torus_42(&fixtures::single_triangle().marked()).unwrap();
    let (e, _) = solve(&t, uniform_weights);
    assert!(matches!(check_reflections_8(&e, &t), Err(AnalysisError::WrongConstruction { .. })));
    let s = fixtures::tetrahedron();
    let c = cuts(&s);
    assert!(matches!(check_rotation_63(&e, &t, &c), Err(AnalysisError::WrongConstruction { .. })));
}

#[test]
fn octant_corners_and_sides() {
    for d in disks3() {
        let t = build_torus_8(&d).unwrap();
        for w in SCHEMES {
            let (e, _) = solve(&t, w);
            for c in 0..8 {
                let r = check_layout_polygon(&e, &t, c).unwrap();
                assert!(r.passed, "copy {c}: {r:?}");
            }
            let uv = e.copy_uv(&t, 0);
            let p0 = uv[d.marks()[0]];
            let rel = |v: usize| [uv[v][0] - p0[0], uv[v][1] - p0[1]];
            // up to the global translation fixed by the pin
            for (v, want) in [(d.marks()[1], [0.5, 0.5]), (d.marks()[2], [0.0, 0.5])] {
                let got = rel(v);
                let ok = |g: [f64; 2]| (g[0] - want[0]).abs() < 1e-8 && (g[1] - want[1]).abs() < 1e-8;
                assert!(ok(got), "{got:?} vs {want:?}");
            }
        }
    }
}

#[test]
fn eight_tiles_of_equal_area() {
    let t = build_torus_8(&fixtures::random_delaunay_disk(30, 8).marked()).unwrap();
    let (e, _) = solve(&t, cotan_weights);
    let x = check_tiling(&e, &t);
    assert!(x.passed, "{x:?}");
    assert_eq!(x.tiles.len(), 8);
    for tile in &x.tiles {
        assert!((tile.area - 0.125).abs() < 1e-10);
    }
}

#[test]
fn single_triangle_copy_energies_split_evenly() {
    let t = build_torus_8(&fixtures::single_triangle().marked()).unwrap();
    let (e, w) = solve(&t, uniform_weights);
    let c = per_copy_energies(&e, &t, &w);
    for x in &c.energies {
        assert!((x - c.total / 8.0).abs() < 1e-14);
    }
}

#[test]
fn energy_spread_on_all_constructions() {
    let d = fixtures::random_delaunay_disk(40, 3).marked();
    let d4 = fixtures::random_delaunay_disk_marked(40, 3, 4).marked();
    let tori = [
        build_torus_8(&d).unwrap(),
        build_torus_4(&d4, 0.7).unwrap(),
        build_torus_42(&d).unwrap(),
        build_torus_63(&cuts(&fixtures::tetrahedron())).unwrap(),
    ];
    for t in &tori {
        for w in SCHEMES {
            let (e, w) = solve(t, w);
            let c = per_copy_energies(&e, t, &w);
            assert!(c.relative_spread <= 1e-9, "{:?}: {}", t.construction(), c.relative_spread);
            let x = check_tiling(&e, t);
            assert!(x.passed, "{:?}: {x:?}", t.construction());
        }
    }
}

#[test]
fn corrupted_embedding_spreads_energy() {
    let t = build_torus_8(&fixtures::random_delaunay_disk(20, 5).marked()).unwrap();
    let (mut e, w) = solve(&t, uniform_weights);
    let v = t.torus_vertex(3, 10);
    e.lifts[v][0] += 0.03;
    assert!(per_copy_energies(&e, &t, &w).relative_spread > 1e-3);
}

#[test]
fn forty_two_hexagons() {
    let t = build_torus_42(&fixtures::random_delaunay_disk(30, 9).marked()).unwrap();
    let (e, _) = solve(&t, uniform_weights);
    let x = check_tiling(&e, &t);
    assert!(x.passed, "{x:?}");
    assert!((x.total_area - 3f64.sqrt() / 2.0).abs() <= 1e-8 * x.total_area);
    let h = x.hexagon_groups.as_ref().unwrap();
    assert!(h.passed && h.edge_deviation <= 1e-7, "{h:?}");
    for tile in &x.tiles {
        assert!((tile.area - x.lattice_area / 42.0).abs() < 1e-10);
    }
}

#[test]
fn sixty_three_copy_rotations() {
    for s in [fixtures::tetrahedron(), fixtures::default_symmetric_sphere()] {
        let c = cuts(&s);
        let t = build_torus_63(&c).unwrap();
        for w in SCHEMES {
            let (e, _) = solve(&t, w);
            let r = check_rotation_63(&e, &t, &c).unwrap();
            assert!(r.passed, "{}", r.max_residual());
            assert_eq!(r.checks.len(), 63);
            let x = check_tiling(&e, &t);
            assert!(x.passed, "{x:?}");
            assert!((x.tiles[5].area - x.lattice_area / 63.0).abs() < 1e-10);
        }
    }
}

#[test]
fn unequal_weights_break_the_rotation() {
    // an order-3 automorphism is not enough: the weights must be invariant too
    let s = fixtures::default_symmetric_sphere();
    let c = cuts(&s);
    let t = build_torus_63(&c).unwrap();
    let base = cotan_weights(&t.base().mesh);
    let mut he: Vec<f64> = (0..3 * t.base().mesh.n_faces()).map(|h| base.halfedge_weight(h)).collect();
    he[0] *= 3.0;
    he[7] *= 0.3;
    let skewed = EdgeWeights::from_halfedges(&t.base().mesh, base.scheme(), he, vec![]);
    let w = t.lift_weights(&skewed);
    let (e, _) = harmonic_embedding(&t, &w, t.default_pin(), Lattice::unit_square(), &SolverOptions::for_scalar::<f64>())
        .unwrap();
    assert!(!check_rotation_63(&e, &t, &c).unwrap().passed);
}

#[test]
fn flips() {
    let d = fixtures::random_delaunay_disk(30, 2);
    let mut uv: Vec<[f64; 2]> = d.mesh.positions().iter().map(|p| [p[0], p[1]]).collect();
    assert_eq!(flip_count(&d.mesh, &uv), 0);
    let interior = (0..uv.len()).find(|&v| !d.mesh.is_boundary_vertex(v)).unwrap();
    // push one interior vertex far across its link
    uv[interior] = [uv[interior][0] * -40.0, uv[interior][1] * -40.0 + 100.0];
    assert!(flip_count(&d.mesh, &uv) >= 1);

    let t = build_torus_8(&d.marked()).unwrap();
    let (e, _) = solve(&t, cotan_weights);
    assert_eq!(flip_count_torus(&e, t.mesh()), 0);
}

#[test]
fn svg_has_one_group_per_copy() {
    let c = cuts(&fixtures::tetrahedron());
    let t = build_torus_63(&c).unwrap();
    let (e, _) = solve(&t, uniform_weights);
    let svg = emit_svg(&e, &t, SvgOptions::default()).unwrap();
    assert_eq!(svg.matches(r#"class="tile""#).count(), 63);
    let fills: std::collections::BTreeSet<&str> =
        svg.match_indices("fill=\"hsl").map(|(i, _)| &svg[i..i + svg[i..].find(')').unwrap()]).collect();
    assert_eq!(fills.len(), 63);
    assert!(svg.contains(r#"id="cell""#));
    assert_eq!(svg, emit_svg(&e, &t, SvgOptions::default()).unwrap());
}

#[test]
fn empty_embedding_is_an_error() {
    let t = build_torus_8(&fixtures::single_triangle().marked()).unwrap();
    let (mut e, _) = solve(&t, uniform_weights);
    e.lifts.clear();
    assert!(matches!(emit_svg(&e, &t, SvgOptions::default()), Err(AnalysisError::Empty)));
}

#[test]
fn report_json_has_the_documented_keys() {
    let t = build_torus_8(&fixtures::single_triangle().marked()).unwrap();
    let (e, w) = solve(&t, uniform_weights);
    let c = per_copy_energies(&e, &t, &w);
    let r = Report {
        construction: t.construction(),
        k: t.copies(),
        weights: "uniform".into(),
        method: "torus".into(),
        energies: c.energies.clone(),
        total_energy: Some(c.total),
        energy_spread: Some(c.relative_spread),
        residuals: [("reflections".to_string(), 0.0)].into_iter().collect(),
        flips: 0,
        negative_weights: 0,
        branch_table: validate_covering(&t).branch_table,
        solver: Some(symtile::analysis::SolverSummary::new(&e.stats, e.equation_residual)),
        crosscheck: None,
        checks: Default::default(),
        passed: true,
    };
    let s = emit_report(&r).unwrap();
    let v: serde_json::Value = serde_json::from_str(&s).unwrap();
    for key in ["construction", "k", "energies", "residuals", "flips", "branch_table", "solver"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert!(v["solver"].get("iters").is_some() && v["solver"].get("residual").is_some());
    assert_eq!(v["k"], 8);
    assert_eq!(s, emit_report(&r).unwrap());
}
