//! Reference networks used by the canned reports and the test suites.

use nalgebra::DMatrix;

/// The six-node weighted network used throughout the Example 1 report.
/// Identical to `fixtures/example1_n6.csv` at the workspace root.
pub const EXAMPLE1_ROWS: [[f64; 6]; 6] = [
    [0.0, 0.1477, 0.0, 0.1698, 0.0, 0.0135],
    [0.4242, 0.0, 0.2626, 0.3621, 0.0, 0.0],
    [0.0, 0.1889, 0.0, 0.0, 0.2502, 0.4158],
    [0.4036, 0.2997, 0.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.2427, 0.0, 0.0, 0.2513],
    [0.0301, 0.0, 0.4474, 0.0, 0.2787, 0.0],
];

pub fn example1_matrix() -> DMatrix<f64> {
    DMatrix::from_fn(6, 6, |i, j| EXAMPLE1_ROWS[i][j])
}

/// Unit-weight complete graph on `n` nodes.
pub fn complete_graph(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { 1.0 })
}
