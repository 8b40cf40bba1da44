//! Eigenstructure of the network matrices, bifurcation thresholds, and
//! Geršgorin disks.
//!
//! Every matrix handled here is symmetrizable: `diag(d)·M` is symmetric for
//! a known positive `d`. The spectrum is then computed on the similar
//! matrix `D^{1/2} M D^{-1/2}`, which is symmetric, so eigenvalues are real
//! by construction. When `d` only symmetrizes `M` approximately (rounded
//! input data) each isolated eigenpair is polished against `M` itself.

use nalgebra::{DMatrix, DVector};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result, SymmetrizerWitness};
use crate::linalg::{refine_eigenpair, symmetric_eigen};
use crate::network::WeightedNetwork;

/// Absolute gap below which two eigenvalues of `H₁` count as coincident.
pub const SIMPLICITY_TOL: f64 = 1e-8;

/// Real eigen-decomposition of a symmetrizable matrix.
#[derive(Debug, Clone)]
pub struct RealSpectrum {
    /// Nondecreasing eigenvalues.
    pub values: Vec<f64>,
    /// Right eigenvectors as columns, unit 2-norm, largest-magnitude
    /// component positive.
    pub right: DMatrix<f64>,
    /// Left eigenvectors as columns, scaled so `leftₖᵀ rightₖ = 1`.
    pub left: DMatrix<f64>,
}

/// Spectrum of `m` given a symmetrizer `d` (`diag(d)·m` symmetric).
pub fn real_spectrum(m: &DMatrix<f64>, d: Option<&DVector<f64>>) -> Result<RealSpectrum> {
    let d = d.ok_or(Error::NotSymmetrizable(SymmetrizerWitness::Missing))?;
    let n = m.nrows();
    let s = d.map(f64::sqrt);
    let t = DMatrix::from_fn(n, n, |i, j| s[i] * m[(i, j)] / s[j]);
    let skew = (&t - t.transpose()).norm() * 0.5;
    let (mut values, u) = symmetric_eigen(&t);

    let mut right = DMatrix::from_fn(n, n, |i, k| u[(i, k)] / s[i]);
    let mut left = DMatrix::from_fn(n, n, |i, k| u[(i, k)] * s[i]);

    // rounding-level asymmetry moves eigenvalues only at second order
    if skew > 1e-13 * t.norm() {
        let original = values.clone();
        for k in 0..n {
            let below = if k > 0 {
                original[k] - original[k - 1]
            } else {
                f64::INFINITY
            };
            let above = if k + 1 < n {
                original[k + 1] - original[k]
            } else {
                f64::INFINITY
            };
            let gap = below.min(above);
            if gap <= 10.0 * skew {
                continue;
            }
            let r0 = right.column(k).into_owned();
            let l0 = left.column(k).into_owned();
            if let Some((val, r, l)) = refine_eigenpair(m, &r0, &l0, 12) {
                if (val - original[k]).abs() < 0.5 * gap {
                    values[k] = val;
                    right.set_column(k, &r);
                    left.set_column(k, &l);
                }
            }
        }
    }

    for k in 0..n {
        let mut r = right.column(k).normalize();
        let pivot = r
            .iter()
            .copied()
            .fold(0.0_f64, |acc, v| if v.abs() > acc.abs() { v } else { acc });
        if pivot < 0.0 {
            r = -r;
        }
        let mut l = left.column(k).into_owned();
        let ip = l.dot(&r);
        if ip != 0.0 {
            l /= ip;
        }
        right.set_column(k, &r);
        left.set_column(k, &l);
    }

    Ok(RealSpectrum {
        values,
        right,
        left,
    })
}

pub fn serialize_extended<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralSummary {
    pub eigs_a: Vec<f64>,
    pub eigs_h1: Vec<f64>,
    /// `ρ(A)`.
    pub rho_a: f64,
    /// `λ_{n−1}(A)`.
    pub lambda2nd_a: f64,
    /// `λ_{n−1}(H₁)`.
    pub lambda2nd_h1: f64,
    /// Critical social effort `1/λ_{n−1}(H₁)`, infinite when that
    /// eigenvalue is not positive (no mixed-sign equilibria at any π).
    #[serde(serialize_with = "serialize_extended")]
    pub pi2: f64,
    /// Algebraic connectivity `λ₂(L₁) = 1 − λ_{n−1}(H₁)`.
    pub alg_conn: f64,
    pub lambda2nd_simple: bool,
}

pub fn spectral_summary(net: &WeightedNetwork) -> Result<SpectralSummary> {
    let eigs_a = real_spectrum(net.adjacency(), net.symmetrizer())?.values;
    let eigs_h1 = real_spectrum(net.h1(), net.h1_symmetrizer().as_ref())?.values;
    let n = net.n();
    let lambda2nd_h1 = eigs_h1[n - 2];
    // the spectrum of H₁ lies in [−1, 1]; anything this small is a rounded zero
    let pi2 = if lambda2nd_h1 > 1e-12 {
        1.0 / lambda2nd_h1
    } else {
        f64::INFINITY
    };
    let lambda2nd_simple = eigs_h1[n - 1] - eigs_h1[n - 2] > SIMPLICITY_TOL
        && (n < 3 || eigs_h1[n - 2] - eigs_h1[n - 3] > SIMPLICITY_TOL);
    Ok(SpectralSummary {
        rho_a: eigs_a[n - 1],
        lambda2nd_a: eigs_a[n - 2],
        lambda2nd_h1,
        pi2,
        alg_conn: 1.0 - lambda2nd_h1,
        lambda2nd_simple,
        eigs_a,
        eigs_h1,
    })
}

/// Right and left eigenvectors of `H₁` for `λ_{n−1}(H₁)`.
#[derive(Debug, Clone)]
pub struct FiedlerPair {
    pub value: f64,
    /// Unit 2-norm, largest-magnitude component positive.
    pub right: DVector<f64>,
    /// Scaled so `leftᵀ right = 1`.
    pub left: DVector<f64>,
}

pub fn fiedler_pair(net: &WeightedNetwork) -> Result<FiedlerPair> {
    let spec = real_spectrum(net.h1(), net.h1_symmetrizer().as_ref())?;
    let n = net.n();
    let vals = &spec.values;
    let mut gap = vals[n - 1] - vals[n - 2];
    if n >= 3 {
        gap = gap.min(vals[n - 2] - vals[n - 3]);
    }
    if gap <= SIMPLICITY_TOL {
        return Err(Error::NotSimple { gap });
    }
    Ok(FiedlerPair {
        value: vals[n - 2],
        right: spec.right.column(n - 2).into_owned(),
        left: spec.left.column(n - 2).into_owned(),
    })
}

/// Sorted eigenvalues of `Δ − πA` (shares the symmetrizer of `A`).
pub fn ltilde_eigenvalues(net: &WeightedNetwork, pi: f64) -> Result<Vec<f64>> {
    let m = net.laplacians().ltilde_at(pi);
    Ok(real_spectrum(&m, net.symmetrizer())?.values)
}

/// Sorted eigenvalues of `I − πH₁`.
pub fn i_minus_pi_h1_eigenvalues(net: &WeightedNetwork, pi: f64) -> Result<Vec<f64>> {
    let n = net.n();
    let m = DMatrix::identity(n, n) - net.h1() * pi;
    Ok(real_spectrum(&m, net.h1_symmetrizer().as_ref())?.values)
}

/// Eigenvalues of the linearization at the origin, `−I + πH₁`, obtained as
/// the affine image `πλᵢ(H₁) − 1` of precomputed eigenvalues.
pub fn origin_linearization(eigs_h1: &[f64], pi: f64) -> Vec<f64> {
    eigs_h1.iter().map(|l| pi * l - 1.0).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GersgorinDisk {
    pub row_index: usize,
    pub center: f64,
    pub radius: f64,
}

impl GersgorinDisk {
    pub fn distance(&self, z: f64) -> f64 {
        ((z - self.center).abs() - self.radius).max(0.0)
    }
}

pub fn gersgorin_disks(m: &DMatrix<f64>) -> Vec<GersgorinDisk> {
    (0..m.nrows())
        .map(|i| GersgorinDisk {
            row_index: i,
            center: m[(i, i)],
            radius: (0..m.ncols())
                .filter(|&j| j != i)
                .map(|j| m[(i, j)].abs())
                .sum(),
        })
        .collect()
}

/// Distance from `z` to the union of the disks (0 when inside).
pub fn gersgorin_distance(disks: &[GersgorinDisk], z: f64) -> f64 {
    disks
        .iter()
        .map(|d| d.distance(z))
        .fold(f64::INFINITY, f64::min)
}

/// The four matrices behind the Geršgorin panels: `I − H₁`, `I − πH₁`,
/// `Δ − A`, `Δ − πA`, with their disks and eigenvalues.
#[derive(Debug, Clone, Serialize)]
pub struct GersgorinPanel {
    pub label: String,
    pub pi: f64,
    pub disks: Vec<GersgorinDisk>,
    pub eigenvalues: Vec<f64>,
}

pub fn gersgorin_panels(net: &WeightedNetwork, pi: f64) -> Result<Vec<GersgorinPanel>> {
    let n = net.n();
    let lap = net.laplacians();
    let h1_sym = net.h1_symmetrizer();
    let id = DMatrix::<f64>::identity(n, n);
    let cases: [(&str, f64, DMatrix<f64>, Option<&DVector<f64>>); 4] = [
        ("a", 1.0, lap.l1.clone(), h1_sym.as_ref()),
        ("b", pi, &id - net.h1() * pi, h1_sym.as_ref()),
        ("c", 1.0, lap.l.clone(), net.symmetrizer()),
        ("d", pi, lap.ltilde_at(pi), net.symmetrizer()),
    ];
    cases
        .into_iter()
        .map(|(label, p, m, d)| {
            Ok(GersgorinPanel {
                label: label.to_string(),
                pi: p,
                disks: gersgorin_disks(&m),
                eigenvalues: real_spectrum(&m, d)?.values,
            })
        })
        .collect()
}
