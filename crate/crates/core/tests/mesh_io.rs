use proptest::prelude::*;
use sgce::mesh::{
    gen_synthetic, parse_obj, parse_ply, validate_mesh, write_obj, write_ply, SyntheticKind,
    Violation,
};
use sgce::Mesh;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        -1e6f64..1e6,
        any::<f64>().prop_filter("finite", |x| x.is_finite()),
        Just(0.0),
        Just(-0.0),
        Just(f64::MIN_POSITIVE / 4.0),
    ]
}

fn mesh_strategy() -> impl Strategy<Value = Mesh> {
    (3usize..40).prop_flat_map(|n| {
        let verts = prop::collection::vec([finite(), finite(), finite()], n);
        let faces = prop::collection::vec(
            (0..n, 0..n, 0..n)
                .prop_filter("distinct", |(a, b, c)| a != b && b != c && a != c)
                .prop_map(|(a, b, c)| [a, b, c]),
            1..60,
        );
        (verts, faces).prop_map(|(vertices, faces)| Mesh { vertices, faces })
    })
}

fn bits(m: &Mesh) -> Vec<u64> {
    m.vertices.iter().flatten().map(|x| x.to_bits()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn obj_round_trip_is_lossless(m in mesh_strategy()) {
        let back = parse_obj(&write_obj(&m)).unwrap();
        prop_assert_eq!(bits(&back), bits(&m));
        prop_assert_eq!(&back.faces, &m.faces);
        prop_assert_eq!(back.topology_hash(), m.topology_hash());
    }

    #[test]
    fn ply_round_trip_is_lossless(m in mesh_strategy()) {
        let back = parse_ply(&write_ply(&m)).unwrap();
        prop_assert_eq!(bits(&back), bits(&m));
        prop_assert_eq!(&back.faces, &m.faces);
    }

    #[test]
    fn one_bad_index_gives_one_violation(level in 0u32..3, face in 0usize..20, corner in 0usize..3, over in 0usize..5) {
        let mut m = sgce::mesh::icosphere(level);
        let n = m.vertex_count();
        m.faces[face][corner] = n + over;
        let report = validate_mesh(&m);
        let range: Vec<_> = report.errors().filter(|v| matches!(v, Violation::IndexOutOfRange { .. })).collect();
        prop_assert_eq!(range.len(), 1);
    }
}

#[test]
fn file_round_trip_both_formats() {
    let dir = tempfile::tempdir().unwrap();
    let ds = gen_synthetic(SyntheticKind::Grid, 2, 1, 3.0, 5).unwrap();
    let m = ds.sample_mesh(0);
    for ext in ["obj", "ply"] {
        let p = dir.path().join(format!("m.{ext}"));
        m.save(&p).unwrap();
        assert_eq!(Mesh::load(&p).unwrap(), m);
    }
    assert!(m.save(&dir.path().join("m.stl")).is_err());
}

#[test]
fn synthetic_generation_is_seeded() {
    let a = gen_synthetic(SyntheticKind::Icosphere, 2, 8, 5.0, 7).unwrap();
    let b = gen_synthetic(SyntheticKind::Icosphere, 2, 8, 5.0, 7).unwrap();
    let c = gen_synthetic(SyntheticKind::Icosphere, 2, 8, 5.0, 8).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.samples, c.samples);
    assert_eq!((a.topology.vertex_count(), a.len()), (162, 8));
}
