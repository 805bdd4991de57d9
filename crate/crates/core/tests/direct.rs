use symtile::direct::{crosscheck_against_torus, procrustes, solve_direct, DirectError, TargetShape};
use symtile::energy::{cotan_weights, signed_area, uniform_weights};
use symtile::fixtures;
use symtile::linalg::SolverOptions;
use symtile::scalar::orient2;

fn opts() -> SolverOptions {
    SolverOptions::for_scalar::<f64>()
}

#[test]
fn single_triangle_hits_corners() {
    let d = fixtures::single_triangle().marked();
    let s = solve_direct(&d, &TargetShape::right_isosceles(), &uniform_weights(d.mesh()), &opts()).unwrap();
    assert_eq!(s.uv, vec![[0.0, 0.0], [0.5, 0.5], [0.0, 0.5]]);
}

#[test]
fn square_fan_center_lands_in_the_middle() {
    let d = fixtures::square_fan().marked();
    for w in [uniform_weights(d.mesh()), cotan_weights(d.mesh())] {
        let s = solve_direct(&d, &TargetShape::rectangle(1.0), &w, &opts()).unwrap();
        assert!((s.uv[4][0] - 0.5).abs() < 1e-12 && (s.uv[4][1] - 0.5).abs() < 1e-12);
    }
}

#[test]
fn boundary_paths_stay_on_their_sides() {
    for (d, shape) in [
        (fixtures::random_delaunay_disk(50, 21), TargetShape::right_isosceles()),
        (fixtures::random_delaunay_disk(50, 22), TargetShape::equilateral()),
        (fixtures::random_delaunay_disk_marked(50, 23, 4), TargetShape::rectangle(1.7)),
    ] {
        let d = d.marked();
        let s = solve_direct(&d, &shape, &cotan_weights(d.mesh()), &opts()).unwrap();
        assert!(s.equation_residual <= 1e-10);
        for (j, &m) in d.marks().iter().enumerate() {
            assert_eq!(s.uv[m], shape.corners[j]);
        }
        let k = shape.corners.len();
        for j in 0..k {
            let (a, b) = (shape.corners[j], shape.corners[(j + 1) % k]);
            let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
            for &v in d.side(j) {
                let p = s.uv[v];
                assert!(orient2(a, b, p).abs() / len <= 1e-10, "off side {j}");
                let t = ((p[0] - a[0]) * (b[0] - a[0]) + (p[1] - a[1]) * (b[1] - a[1])) / (len * len);
                assert!((-1e-10..=1.0 + 1e-10).contains(&t));
            }
        }
        for f in d.mesh().faces() {
            assert!(orient2(s.uv[f[0]], s.uv[f[1]], s.uv[f[2]]) > 0.0);
        }
        let area: f64 = signed_area(d.mesh(), &s.uv);
        let shape_area: f64 = (0..k).map(|j| orient2([0.0, 0.0], shape.corners[j], shape.corners[(j + 1) % k]) / 2.0).sum();
        assert!((area - shape_area).abs() < 1e-10);
    }
}

#[test]
fn wrong_mark_count() {
    let d = fixtures::quad().marked();
    assert!(matches!(
        solve_direct(&d, &TargetShape::right_isosceles(), &uniform_weights(d.mesh()), &opts()),
        Err(DirectError::Marks { expected: 3, got: 4 })
    ));
}

#[test]
fn procrustes_recovers_a_reflection() {
    let pts = vec![[0.0, 0.0], [1.0, 0.2], [0.3, 0.9], [0.7, 0.5]];
    let (c, s) = (0.6f64.cos(), 0.6f64.sin());
    let moved: Vec<[f64; 2]> = pts.iter().map(|p| [c * p[0] + s * p[1] + 2.0, s * p[0] - c * p[1] - 1.0]).collect();
    let a = procrustes(&pts, &moved, false);
    assert!(a.reflected);
    assert!(a.rms < 1e-12);
    let scaled: Vec<[f64; 2]> = pts.iter().map(|p| [3.0 * p[0] + 1.0, 3.0 * p[1]]).collect();
    let b = procrustes(&pts, &scaled, true);
    assert!(b.rms < 1e-12 && (b.scale - 1.0 / 3.0).abs() < 1e-12);
}

#[test]
fn single_triangle_crosscheck_is_exact() {
    let d = fixtures::single_triangle().marked();
    let (c, _) = crosscheck_against_torus(&d, &TargetShape::right_isosceles(), &uniform_weights(d.mesh()), &opts()).unwrap();
    assert!(c.rms_deviation < 1e-14, "{c:?}");
}

#[test]
fn random_disk_crosschecks() {
    let tri = fixtures::random_delaunay_disk(50, 31).marked();
    let quad = fixtures::random_delaunay_disk_marked(50, 31, 4).marked();
    for (d, shape) in [
        (&tri, TargetShape::right_isosceles()),
        (&tri, TargetShape::equilateral()),
        (&quad, TargetShape::rectangle(1.0)),
        (&quad, TargetShape::rectangle(0.6)),
    ] {
        for w in [cotan_weights(d.mesh()), uniform_weights(d.mesh())] {
            let (c, _) = crosscheck_against_torus(d, &shape, &w, &opts()).unwrap();
            assert!(c.passed && c.relative_rms <= 1e-7, "{:?}: {c:?}", shape.kind);
            assert!((c.energy_direct - c.energy_torus_copy).abs() <= 1e-9 * c.energy_direct, "{c:?}");
        }
    }
}
