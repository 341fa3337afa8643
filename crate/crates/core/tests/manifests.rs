//! The manifests shipped under manifests/ must stay valid as the schema
//! evolves, without anyone having to launch the runs they describe.

use std::path::Path;

use airholp::manifest::RunManifest;

fn shipped(name: &str) -> RunManifest {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../manifests")
        .join(name);
    RunManifest::from_path(&path).unwrap()
}

#[test]
fn quick_manifest_is_a_small_valid_grid() {
    let manifest = shipped("quick.toml");
    assert_eq!(manifest.cells().len(), 16);
    assert_eq!(manifest.replicates, 25);
    assert_eq!(manifest.parsed_methods().unwrap().len(), 4);
}

#[test]
fn full_grid_manifest_covers_the_complete_factorial() {
    let manifest = shipped("full_grid.toml");
    assert_eq!(manifest.cells().len(), 4 * 4 * 4 * 5 * 5);
    assert_eq!(manifest.replicates, 500);
    let cells = manifest.cells();
    assert!(cells.iter().any(|c| c.n == 1000 && c.p == 15000));
}
