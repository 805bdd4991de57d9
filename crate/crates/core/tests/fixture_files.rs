use symtile::fixtures;
use symtile::mesh::{load_obj, SurfaceMesh};

fn shipped(name: &str) -> SurfaceMesh<f64> {
    load_obj(format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

fn assert_same(a: &SurfaceMesh<f64>, b: &SurfaceMesh<f64>) {
    assert_eq!(a.faces(), b.faces());
    assert_eq!(a.positions(), b.positions());
}

#[test]
fn shipped_meshes_match_the_generators() {
    assert_same(&shipped("tri.obj"), &fixtures::single_triangle().mesh);
    assert_same(&shipped("quad.obj"), &fixtures::quad().mesh);
    assert_same(&shipped("disk50.obj"), &fixtures::random_delaunay_disk(50, 7).mesh);
    assert_same(&shipped("tet.obj"), &fixtures::tetrahedron().mesh);
    assert_same(&shipped("sphere.obj"), &fixtures::default_symmetric_sphere().mesh);
}

#[test]
fn documented_marks() {
    assert_eq!(fixtures::random_delaunay_disk(50, 7).marks, vec![0, 8, 17]);
    assert_eq!(fixtures::random_delaunay_disk_marked(50, 7, 4).marks, vec![0, 6, 13, 19]);
    let s = fixtures::default_symmetric_sphere();
    assert_eq!((s.p_o, s.seed_target), (0, 2));
}
