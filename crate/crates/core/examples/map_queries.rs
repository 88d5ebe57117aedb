//! Build a map from Gaussian anomalies, query it, and round-trip it through a map file.
//!
//! Run with `cargo run --example map_queries`.

use magnav::map::generate_gaussian_map;
use magnav::{Bounds, GaussianSource, Pose};

fn main() -> magnav::Result<()> {
    let sources = [
        GaussianSource::new(1.0, 1.0, 800.0, 0.5),
        GaussianSource::new(2.5, 1.5, -600.0, 0.6),
    ];
    let map = generate_gaussian_map(&sources, Bounds::new(0.0, 4.0, 0.0, 3.0), 0.25, 50_000.0)?
        .with_heading_correction(40.0, 0.0)?;
    let (nx, ny) = map.dims();
    println!("map: {nx} x {ny} nodes at {} m", map.resolution());

    for (x, y) in [(1.0, 1.0), (1.6, 1.2), (2.5, 1.5)] {
        let h = map.field_at(x, y)?;
        let g = map.gradient_at(x, y)?;
        let hess = map.hessian_at(x, y)?;
        println!(
            "({x:.1}, {y:.1}): field {h:9.2} nT  gradient ({:8.2}, {:8.2}) nT/m  hessian diag ({:9.2}, {:9.2}) nT/m^2",
            g.x,
            g.y,
            hess[(0, 0)],
            hess[(1, 1)]
        );
    }
    let north = map.field_with_heading(&Pose::new(1.0, 1.0, std::f64::consts::FRAC_PI_2))?;
    println!("facing north at (1.0, 1.0): {north:.2} nT (heading correction included)");
    println!("(5.0, 1.0) on map: {}", map.contains(5.0, 1.0));

    let path = std::env::temp_dir().join("magnav_example.magmap");
    map.save(&path)?;
    let back = magnav::GridMap::load(&path)?;
    println!("reloaded {} identical: {}", path.display(), back == map);
    Ok(())
}
