use magnav::map::generate_gaussian_map;
use magnav::sim::{Builtin, MapSpec};
use magnav::{Bounds, Error, GaussianSource, GridMap};
use proptest::prelude::*;

#[test]
fn builtin_maps_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    for b in Builtin::ALL {
        let map = b.map();
        let path = dir.path().join(format!("{}.magmap", b.name()));
        map.save(&path).unwrap();
        assert_eq!(GridMap::load(&path).unwrap(), map);
    }
}

#[test]
fn shipped_map_file_matches_its_spec() {
    let root = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data");
    let spec = MapSpec::load(root.join("lab_like.toml")).unwrap();
    let from_file = GridMap::load(root.join("lab_like.magmap")).unwrap();
    assert_eq!(spec.build().unwrap(), from_file);
    assert_eq!(from_file, Builtin::LabLike.map());
}

#[test]
fn missing_and_corrupt_files_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(
        GridMap::load(dir.path().join("absent.magmap")),
        Err(Error::Io { .. })
    ));
    let bad = dir.path().join("bad.magmap");
    std::fs::write(&bad, "this is not a map\n").unwrap();
    assert!(matches!(
        GridMap::load(&bad),
        Err(Error::MalformedMap { .. })
    ));
}

#[test]
fn node_values_are_reproduced_exactly() {
    let sources = [GaussianSource::new(1.0, 1.0, 500.0, 0.4)];
    let map = generate_gaussian_map(&sources, Bounds::new(0.0, 2.0, 0.0, 2.0), 0.1, 100.0).unwrap();
    let (nx, ny) = map.dims();
    for i in 0..nx {
        for j in 0..ny {
            let (x, y) = map.node_position(i, j);
            assert_eq!(map.field_at(x, y).unwrap(), map.value(i, j));
            assert!((map.value(i, j) - 100.0 - sources[0].value_at(x, y)).abs() < 1e-9);
        }
    }
}

proptest! {
    #[test]
    fn text_form_round_trips(
        vals in proptest::collection::vec(-1e5f64..1e5, 12),
        res in 0.01f64..2.0,
        ox in -100.0f64..100.0,
        amp in 0.0f64..100.0,
    ) {
        let map = GridMap::new(ox, -ox, res, 4, 3, vals, amp, 0.3).unwrap();
        prop_assert_eq!(GridMap::from_text(&map.to_text()).unwrap(), map);
    }

    #[test]
    fn interpolation_stays_within_cell_corners(fx in 0.0f64..1.0, fy in 0.0f64..1.0) {
        let map = GridMap::new(0.0, 0.0, 1.0, 2, 2, vec![3.0, -1.0, 7.0, 2.0], 0.0, 0.0).unwrap();
        let h = map.field_at(fx, fy).unwrap();
        prop_assert!((-1.0 - 1e-12..=7.0 + 1e-12).contains(&h));
    }
}
