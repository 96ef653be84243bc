//! Deterministic direction grids on the unit sphere.

use crate::tensor::{Direction, Vec3};

/// Golden angle in radians.
const GOLDEN_ANGLE: f64 = 2.399963229728653;

/// Fibonacci lattice covering the whole sphere with `n` near-uniform points.
pub fn fibonacci_sphere(n: usize) -> Vec<Direction> {
    assert!(n > 0);
    (0..n)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            point_at(z, i as f64 * GOLDEN_ANGLE)
        })
        .collect()
}

/// Fibonacci lattice on the open upper hemisphere (z > 0). Because the
/// quartic power of a direction is even, antipodal points carry identical
/// atoms; restricting to one hemisphere avoids duplicate dictionary columns.
pub fn fibonacci_hemisphere(n: usize) -> Vec<Direction> {
    assert!(n > 0);
    (0..n)
        .map(|i| {
            let z = (i as f64 + 0.5) / n as f64;
            point_at(z, i as f64 * GOLDEN_ANGLE)
        })
        .collect()
}

fn point_at(z: f64, phi: f64) -> Direction {
    let r = (1.0 - z * z).max(0.0).sqrt();
    Direction::new(Vec3::new(r * phi.cos(), r * phi.sin(), z))
        .expect("lattice points are unit by construction")
}

/// The six non-antipodal vertices of the regular icosahedron. Together with
/// equal weights they integrate polynomials of degree up to five exactly
/// (spherical 5-design), which makes them a closed-form decomposition of the
/// isotropic fourth-order tensor.
pub fn icosahedron_directions() -> [Direction; 6] {
    let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
    let mk = |x: f64, y: f64, z: f64| {
        Direction::from_vector(Vec3::new(x, y, z)).expect("nonzero vertex")
    };
    [
        mk(1.0, phi, 0.0),
        mk(-1.0, phi, 0.0),
        mk(phi, 0.0, 1.0),
        mk(phi, 0.0, -1.0),
        mk(0.0, 1.0, phi),
        mk(0.0, -1.0, phi),
    ]
}
