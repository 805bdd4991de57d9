use symtile::analysis::{check_reflections_8, flip_count, flip_count_torus, per_copy_energies};
use symtile::construct::build_torus_8;
use symtile::direct::{solve_direct, TargetShape};
use symtile::energy::{cotan_weights, uniform_weights};
use symtile::fixtures;
use symtile::lattice::Lattice;
use symtile::linalg::SolverOptions;
use symtile::torus::harmonic_embedding;

#[test]
fn f32_torus_pipeline() {
    let d = fixtures::random_delaunay_disk(40, 4).marked().convert::<f32>();
    let t = build_torus_8(&d).unwrap();
    for w in [uniform_weights(&t.base().mesh), cotan_weights(&t.base().mesh)] {
        let tw = t.lift_weights(&w);
        let (e, _) =
            harmonic_embedding(&t, &tw, t.default_pin(), Lattice::unit_square(), &SolverOptions::for_scalar::<f32>())
                .unwrap();
        assert_eq!(flip_count_torus(&e, t.mesh()), 0);
        let r = check_reflections_8(&e, &t).unwrap();
        assert!(r.max_residual() < 1e-4, "{}", r.max_residual());
        let c = per_copy_energies(&e, &t, &tw);
        assert!(c.relative_spread < 1e-4 && (c.total - 1.0).abs() < 0.5);
    }
}

#[test]
fn f32_direct() {
    let d = fixtures::random_delaunay_disk(40, 4).marked().convert::<f32>();
    let s = solve_direct(&d, &TargetShape::<f32>::equilateral(), &cotan_weights(d.mesh()), &SolverOptions::for_scalar::<f32>())
        .unwrap();
    assert_eq!(flip_count(d.mesh(), &s.uv), 0);
    assert_eq!(s.uv[d.marks()[1]], [1.0, 0.0]);
}
