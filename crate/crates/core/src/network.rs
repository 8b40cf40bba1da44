//! Interaction network: validation of the adjacency matrix and the matrices
//! derived from it (`Δ`, `H₁ = Δ⁻¹A`, Laplacians).

use std::collections::VecDeque;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::Deserialize;

use crate::error::{Error, Result, SymmetrizerWitness};

/// Relative tolerance on `‖DA − (DA)ᵀ‖_∞ / ‖DA‖_∞` accepted by
/// [`find_symmetrizer`] when no other value is configured.
///
/// Published weight matrices are typically rounded to four decimals, which
/// breaks the cycle-product condition at the 1e-4 level; exact data passes
/// at machine precision.
pub const DEFAULT_SYMMETRIZER_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy)]
pub struct LoadOptions {
    pub symmetrizer_tol: f64,
    /// Reject the matrix when no symmetrizer exists. When false the network
    /// loads with `symmetrizer() == None`.
    pub require_symmetrizable: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            symmetrizer_tol: DEFAULT_SYMMETRIZER_TOL,
            require_symmetrizable: true,
        }
    }
}

/// A validated weighted adjacency matrix with its derived quantities.
#[derive(Debug, Clone)]
pub struct WeightedNetwork {
    adjacency: DMatrix<f64>,
    delta: DVector<f64>,
    h1: DMatrix<f64>,
    symmetrizer: Option<DVector<f64>>,
    symmetrizer_residual: Option<f64>,
}

impl WeightedNetwork {
    /// Validates `a` with the default options.
    pub fn new(a: DMatrix<f64>) -> Result<Self> {
        Self::with_options(a, LoadOptions::default())
    }

    pub fn with_options(a: DMatrix<f64>, opts: LoadOptions) -> Result<Self> {
        validate_entries(&a)?;
        let n = a.nrows();
        let delta = DVector::from_iterator(n, a.row_iter().map(|r| r.sum()));
        if let Some(i) = delta.iter().position(|&d| d <= 0.0) {
            // An empty row means node i influences nobody through row i.
            let to = if i == 0 { 1 } else { 0 };
            return Err(Error::NotIrreducible { from: i, to });
        }
        if let Some((from, to)) = irreducibility_witness(&a) {
            return Err(Error::NotIrreducible { from, to });
        }
        let (symmetrizer, symmetrizer_residual) = match find_symmetrizer(&a, opts.symmetrizer_tol) {
            Ok(d) => {
                let r = symmetrizer_residual(&a, &d);
                (Some(d), Some(r))
            }
            Err(e) if opts.require_symmetrizable => return Err(e),
            Err(_) => (None, None),
        };
        let mut h1 = a.clone();
        for (i, mut row) in h1.row_iter_mut().enumerate() {
            row /= delta[i];
        }
        Ok(Self {
            adjacency: a,
            delta,
            h1,
            symmetrizer,
            symmetrizer_residual,
        })
    }

    /// Builds a network from row-major data.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(matrix_from_rows(rows)?)
    }

    pub fn n(&self) -> usize {
        self.adjacency.nrows()
    }

    pub fn adjacency(&self) -> &DMatrix<f64> {
        &self.adjacency
    }

    /// Row sums `δᵢ = Σⱼ aᵢⱼ`.
    pub fn delta(&self) -> &DVector<f64> {
        &self.delta
    }

    pub fn delta_min(&self) -> f64 {
        self.delta.min()
    }

    pub fn delta_max(&self) -> f64 {
        self.delta.max()
    }

    /// `H₁ = Δ⁻¹A`; every row sums to one.
    pub fn h1(&self) -> &DMatrix<f64> {
        &self.h1
    }

    /// Positive `d` with `d₁ = 1` such that `diag(d)·A` is symmetric.
    pub fn symmetrizer(&self) -> Option<&DVector<f64>> {
        self.symmetrizer.as_ref()
    }

    /// Relative asymmetry left by the symmetrizer (0 for exact data).
    pub fn symmetrizer_residual(&self) -> Option<f64> {
        self.symmetrizer_residual
    }

    /// Symmetrizer of `H₁`: `d ⊙ δ`, since `diag(d)Δ·H₁ = diag(d)A`.
    pub fn h1_symmetrizer(&self) -> Option<DVector<f64>> {
        self.symmetrizer
            .as_ref()
            .map(|d| d.component_mul(&self.delta))
    }

    pub fn laplacians(&self) -> LaplacianSet<'_> {
        let n = self.n();
        let l1 = DMatrix::identity(n, n) - &self.h1;
        let l = DMatrix::from_diagonal(&self.delta) - &self.adjacency;
        LaplacianSet { net: self, l1, l }
    }

    /// `‖A‖_∞` (maximum absolute row sum), which equals `δ_max`.
    pub fn norm_inf(&self) -> f64 {
        self.delta_max()
    }
}

/// `L₁ = I − H₁`, `L = Δ − A`, and `L̃(π) = Δ − πA` on demand.
#[derive(Debug, Clone)]
pub struct LaplacianSet<'a> {
    net: &'a WeightedNetwork,
    pub l1: DMatrix<f64>,
    pub l: DMatrix<f64>,
}

impl LaplacianSet<'_> {
    pub fn ltilde_at(&self, pi: f64) -> DMatrix<f64> {
        DMatrix::from_diagonal(self.net.delta()) - self.net.adjacency() * pi
    }
}

fn validate_entries(a: &DMatrix<f64>) -> Result<()> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::NotSquare {
            rows: n,
            row: 0,
            cols: a.ncols(),
        });
    }
    if n < 2 {
        return Err(Error::TooSmall { n });
    }
    for i in 0..n {
        for j in 0..n {
            let v = a[(i, j)];
            if !v.is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
            if v < 0.0 {
                return Err(Error::NegativeEntry {
                    row: i,
                    col: j,
                    value: v,
                });
            }
        }
    }
    for i in 0..n {
        if a[(i, i)] != 0.0 {
            return Err(Error::NonzeroDiagonal {
                index: i,
                value: a[(i, i)],
            });
        }
    }
    Ok(())
}

fn reachable(a: &DMatrix<f64>, start: usize, transpose: bool) -> Vec<bool> {
    let n = a.nrows();
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    while let Some(i) = queue.pop_front() {
        for j in 0..n {
            let w = if transpose { a[(j, i)] } else { a[(i, j)] };
            if w > 0.0 && !seen[j] {
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }
    seen
}

/// A pair `(from, to)` with `to` unreachable from `from` in the support
/// digraph, or `None` when the digraph is strongly connected.
pub fn irreducibility_witness(a: &DMatrix<f64>) -> Option<(usize, usize)> {
    if let Some(j) = reachable(a, 0, false).iter().position(|&r| !r) {
        return Some((0, j));
    }
    reachable(a, 0, true)
        .iter()
        .position(|&r| !r)
        .map(|j| (j, 0))
}

/// True iff the digraph with an edge `i → j` for every `aᵢⱼ > 0` is
/// strongly connected.
pub fn check_irreducible(a: &DMatrix<f64>) -> bool {
    a.is_square() && a.nrows() > 0 && irreducibility_witness(a).is_none()
}

/// `‖DA − (DA)ᵀ‖_∞ / ‖DA‖_∞`.
pub fn symmetrizer_residual(a: &DMatrix<f64>, d: &DVector<f64>) -> f64 {
    let da = DMatrix::from_diagonal(d) * a;
    let skew = &da - da.transpose();
    let norm = |m: &DMatrix<f64>| {
        m.row_iter()
            .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    let scale = norm(&da);
    if scale == 0.0 {
        0.0
    } else {
        norm(&skew) / scale
    }
}

/// Finds a positive `d` (normalized to `d₁ = 1`) with `diag(d)·A` symmetric.
///
/// Sign symmetry of the support is checked first. The scaling is then
/// propagated along a BFS spanning tree of the undirected support,
/// `dⱼ = dᵢ·aᵢⱼ/aⱼᵢ`, and the remaining edges are verified against `tol`.
/// Checking every non-tree edge is equivalent to the cycle-product
/// condition.
pub fn find_symmetrizer(a: &DMatrix<f64>, tol: f64) -> Result<DVector<f64>> {
    let n = a.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let (fwd, bwd) = (a[(i, j)] > 0.0, a[(j, i)] > 0.0);
            if fwd != bwd {
                let (row, col) = if fwd { (i, j) } else { (j, i) };
                return Err(Error::NotSymmetrizable(
                    SymmetrizerWitness::SignAsymmetric { row, col },
                ));
            }
        }
    }

    let mut d = DVector::from_element(n, f64::NAN);
    d[0] = 1.0;
    let mut queue = VecDeque::from([0]);
    while let Some(i) = queue.pop_front() {
        for j in 0..n {
            if a[(i, j)] > 0.0 && d[j].is_nan() {
                d[j] = d[i] * a[(i, j)] / a[(j, i)];
                queue.push_back(j);
            }
        }
    }
    if d.iter().any(|v| v.is_nan()) {
        return Err(Error::NotSymmetrizable(SymmetrizerWitness::Missing));
    }
    // Least squares on log d over all edges spreads rounding error in the
    // weights across every cycle instead of pushing it onto non-tree edges.
    if n > 1 {
        let mut lap = DMatrix::<f64>::zeros(n, n);
        let mut rhs = DVector::<f64>::zeros(n);
        for k in 0..n {
            for m in 0..n {
                if a[(k, m)] > 0.0 {
                    lap[(k, k)] += 1.0;
                    lap[(k, m)] -= 1.0;
                    rhs[k] -= (a[(k, m)] / a[(m, k)]).ln();
                }
            }
        }
        let reduced = lap.view((1, 1), (n - 1, n - 1)).into_owned();
        if let Some(y) = reduced.lu().solve(&rhs.rows(1, n - 1).into_owned()) {
            d[0] = 1.0;
            for i in 1..n {
                d[i] = y[i - 1].exp();
            }
        }
    }

    let da = DMatrix::from_diagonal(&d) * a;
    let scale = da
        .row_iter()
        .map(|r| r.iter().sum::<f64>())
        .fold(0.0, f64::max);
    let residual = symmetrizer_residual(a, &d);
    if residual > tol {
        let mut worst = (0, 0, 0.0);
        for i in 0..n {
            for j in (i + 1)..n {
                let m = (da[(i, j)] - da[(j, i)]).abs() / scale;
                if m > worst.2 {
                    worst = (i, j, m);
                }
            }
        }
        return Err(Error::NotSymmetrizable(SymmetrizerWitness::CycleMismatch {
            row: worst.0,
            col: worst.1,
            mismatch: residual,
        }));
    }
    Ok(d)
}

pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if let Some((row, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(Error::NotSquare {
            rows: n,
            row,
            cols: r.len(),
        });
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

/// Parses `n` lines of `n` comma-separated values.
pub fn parse_csv_matrix(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let row = record
            .iter()
            .enumerate()
            .map(|(col, field)| {
                field.parse::<f64>().map_err(|_| {
                    Error::Parse(format!(
                        "row {line}, column {col}: `{field}` is not a number"
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse("empty matrix".into()));
    }
    Ok(rows)
}

#[derive(Debug, Deserialize)]
struct JsonMatrix {
    n: usize,
    rows: Vec<Vec<f64>>,
}

/// Parses `{"n": int, "rows": [[...], ...]}`.
pub fn parse_json_matrix(text: &str) -> Result<Vec<Vec<f64>>> {
    let m: JsonMatrix = serde_json::from_str(text)?;
    if m.rows.len() != m.n {
        return Err(Error::Parse(format!(
            "declared n = {} but {} rows given",
            m.n,
            m.rows.len()
        )));
    }
    Ok(m.rows)
}

/// Reads a matrix file; JSON is detected by extension or a leading `{`.
pub fn read_matrix_file(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path)?;
    let is_json = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"))
        || text.trim_start().starts_with('{');
    if is_json {
        parse_json_matrix(&text)
    } else {
        parse_csv_matrix(&text)
    }
}

/// Reads and validates a network in one step.
pub fn load_network(path: &Path, opts: LoadOptions) -> Result<WeightedNetwork> {
    let rows = read_matrix_file(path)?;
    WeightedNetwork::with_options(matrix_from_rows(&rows)?, opts)
}
