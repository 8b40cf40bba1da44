//! Locating, deduplicating and classifying equilibria, plus the structural
//! predicates they must satisfy.
//!
//! Equilibria are found by damped Newton iteration from many starting
//! points. The search box is tied to the consensus equilibrium `x⁺ = α𝟙`:
//! for identical sigmoidal `ψ` every equilibrium satisfies `|x̄ᵢ| ≤ α`, so a
//! box of half-width `1.5·max(α, 1)` covers all of them.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::dynamics::SystemInstance;
use crate::error::{Error, Result};
use crate::nonlinearity::Saturation;
use crate::seeding::start_rng;
use crate::spectral::{real_spectrum, SpectralSummary};

/// Components with `|xᵢ|` below this are treated as zero when reading off
/// the orthant.
pub const DEGENERATE_TOL: f64 = 1e-8;
/// Jacobian real parts within `±MARGINAL_BAND` of zero are marginal.
pub const MARGINAL_BAND: f64 = 1e-8;
/// Two roots closer than this (infinity norm) are the same equilibrium.
pub const DEDUP_TOL: f64 = 1e-6;

/// Newton acceptance threshold `1e-10·max(1, ‖Δ‖_∞)`.
pub fn newton_tolerance(sys: &SystemInstance) -> f64 {
    1e-10 * sys.net().norm_inf().max(1.0)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NewtonOptions {
    /// Residual threshold; `None` means [`newton_tolerance`].
    pub tol: Option<f64>,
    pub max_iter: usize,
    /// Extra full Newton steps taken after acceptance, kept only while they
    /// reduce the residual.
    pub polish_steps: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: None,
            max_iter: 100,
            polish_steps: 2,
        }
    }
}

/// A converged Newton iterate.
#[derive(Debug, Clone)]
pub struct Root {
    pub x: DVector<f64>,
    /// `‖f(x)‖_∞`.
    pub residual: f64,
    pub iterations: usize,
}

fn newton_direction(j: &DMatrix<f64>, f: &DVector<f64>) -> Result<DVector<f64>> {
    if let Some(dx) = j.clone().lu().solve(&(-f)) {
        if dx.iter().all(|v| v.is_finite()) {
            return Ok(dx);
        }
    }
    let n = j.nrows();
    let normal = j.transpose() * j + DMatrix::identity(n, n) * 1e-8;
    normal
        .lu()
        .solve(&(-(j.transpose() * f)))
        .filter(|dx| dx.iter().all(|v| v.is_finite()))
        .ok_or(Error::SingularJacobian)
}

/// Damped Newton on `f(x) = 0` with the analytic Jacobian and Armijo
/// backtracking on `‖f‖₂`.
pub fn newton_solve(sys: &SystemInstance, x0: &DVector<f64>, opts: &NewtonOptions) -> Result<Root> {
    let tol = opts.tol.unwrap_or_else(|| newton_tolerance(sys));
    let mut x = x0.clone();
    let mut f = sys.vector_field(&x);
    for it in 0..=opts.max_iter {
        let residual = f.amax();
        if !residual.is_finite() {
            break;
        }
        if residual < tol {
            let mut best = Root {
                x,
                residual,
                iterations: it,
            };
            for _ in 0..opts.polish_steps {
                let Ok(dx) = newton_direction(&sys.jacobian(&best.x), &f) else {
                    break;
                };
                let xn = &best.x + dx;
                let fn_ = sys.vector_field(&xn);
                if fn_.amax() >= best.residual {
                    break;
                }
                best.residual = fn_.amax();
                best.x = xn;
                f = fn_;
            }
            return Ok(best);
        }
        if it == opts.max_iter {
            break;
        }
        let dx = newton_direction(&sys.jacobian(&x), &f)?;
        let phi0 = f.norm_squared();
        let mut t = 1.0;
        loop {
            let xn = &x + &dx * t;
            let fn_ = sys.vector_field(&xn);
            let phi = fn_.norm_squared();
            if phi <= (1.0 - 2e-4 * t) * phi0 {
                x = xn;
                f = fn_;
                break;
            }
            t *= 0.5;
            if t < 1e-10 {
                // stalled at a local minimum of the merit function
                return Err(Error::NoConvergence {
                    iterations: it + 1,
                    residual: f.amax(),
                });
            }
        }
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iter,
        residual: f.amax(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Stable,
    Unstable,
    Marginal,
}

fn serialize_orthant<S: Serializer>(o: &[i8], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&orthant_string(o))
}

/// `+`, `-`, or `0` (degenerate) per component.
pub fn orthant_string(o: &[i8]) -> String {
    o.iter()
        .map(|&k| match k {
            1 => '+',
            -1 => '-',
            _ => '0',
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct EquilibriumRecord {
    pub x: Vec<f64>,
    pub residual: f64,
    /// Sign of each component; 0 where `|xᵢ| < DEGENERATE_TOL`.
    #[serde(serialize_with = "serialize_orthant")]
    pub orthant: Vec<i8>,
    pub degenerate: bool,
    /// Sorted real parts of the Jacobian eigenvalues.
    pub jac_eigs_real: Vec<f64>,
    pub stability: Stability,
    /// `π·maxⱼ ψⱼ′(x̄ⱼ) < 1`: strict diagonal dominance of `I − Hψ′(x̄)`.
    pub sufficient_stable: bool,
    /// `π·minⱼ ψⱼ′(x̄ⱼ) > 1`: the Perron root of `Hψ′(x̄)` exceeds one.
    pub sufficient_unstable: bool,
    /// `‖x̄‖₂ / ‖x⁺‖₂`, when the consensus equilibrium is known and nonzero.
    pub norm_ratio: Option<f64>,
}

impl EquilibriumRecord {
    pub fn state(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.x)
    }

    pub fn orthant_string(&self) -> String {
        orthant_string(&self.orthant)
    }

    pub fn is_origin(&self) -> bool {
        self.orthant.iter().all(|&k| k == 0)
    }

    /// Has both a strictly positive and a strictly negative component.
    pub fn is_mixed(&self) -> bool {
        self.orthant.contains(&1) && self.orthant.contains(&-1)
    }

    pub fn unstable_dimension(&self) -> usize {
        self.jac_eigs_real
            .iter()
            .filter(|&&v| v > MARGINAL_BAND)
            .count()
    }

    pub fn negative_fraction(&self) -> f64 {
        self.orthant.iter().filter(|&&k| k == -1).count() as f64 / self.orthant.len() as f64
    }

    pub fn norm(&self) -> f64 {
        self.x.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Builds a classified record for an equilibrium `x`.
pub fn make_record(
    sys: &SystemInstance,
    x: &DVector<f64>,
    x_plus: Option<&DVector<f64>>,
) -> EquilibriumRecord {
    let orthant: Vec<i8> = x
        .iter()
        .map(|&v| {
            if v.abs() < DEGENERATE_TOL {
                0
            } else if v > 0.0 {
                1
            } else {
                -1
            }
        })
        .collect();
    let norm_ratio = x_plus
        .map(|p| p.norm())
        .filter(|&p| p > 0.0)
        .map(|p| x.norm() / p);
    let mut record = EquilibriumRecord {
        x: x.as_slice().to_vec(),
        residual: sys.vector_field(x).amax(),
        degenerate: orthant.contains(&0),
        orthant,
        jac_eigs_real: Vec::new(),
        stability: Stability::Marginal,
        sufficient_stable: false,
        sufficient_unstable: false,
        norm_ratio,
    };
    classify_stability(sys, &mut record);
    record
}

/// Real parts of the Jacobian spectrum, ascending.
pub fn jacobian_spectrum(sys: &SystemInstance, x: &DVector<f64>) -> Vec<f64> {
    let j = sys.jacobian(x);
    match sys.jacobian_symmetrizer(x) {
        Some(d) => real_spectrum(&j, Some(&d))
            .map(|s| s.values)
            .unwrap_or_else(|_| schur_real_parts(&j)),
        // ψ′ underflowed somewhere; the symmetrizing transform breaks down.
        None => schur_real_parts(&j),
    }
}

fn schur_real_parts(m: &DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = m
        .clone()
        .complex_eigenvalues()
        .iter()
        .map(|c| c.re)
        .collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Fills in the Jacobian spectrum, the spectral stability class and the two
/// sufficient tests.
pub fn classify_stability(sys: &SystemInstance, record: &mut EquilibriumRecord) {
    let x = record.state();
    let eigs = jacobian_spectrum(sys, &x);
    let top = eigs.last().copied().unwrap_or(f64::NEG_INFINITY);
    record.stability = if top < -MARGINAL_BAND {
        Stability::Stable
    } else if top > MARGINAL_BAND {
        Stability::Unstable
    } else {
        Stability::Marginal
    };
    let slopes = sys.psi().apply_d1(&x);
    record.sufficient_stable = sys.pi() * slopes.max() < 1.0;
    record.sufficient_unstable = sys.pi() * slopes.min() > 1.0;
    record.jac_eigs_real = eigs;
}

/// Largest positive root of `ψ(α) = α/π`, or `None` if there is none.
///
/// A 2000-point scan of `(0, π·μ]` from the top finds the outermost sign
/// change of `ψ(α) − α/π`, which bisection then narrows to 1e-14.
pub fn consensus_amplitude(f: &dyn Saturation, pi: f64, mu: f64) -> Option<f64> {
    let g = |a: f64| f.value(a) - a / pi;
    let top = pi * mu.max(1.0);
    const STEPS: usize = 2000;
    let h = top / STEPS as f64;
    let mut bracket = None;
    let mut upper = top;
    for k in (1..STEPS).rev() {
        let a = k as f64 * h;
        if g(a) > 0.0 {
            bracket = Some((a, upper));
            break;
        }
        upper = a;
    }
    if bracket.is_none() {
        let tiny = h * 1e-6;
        if g(tiny) > 0.0 {
            bracket = Some((tiny, h));
        }
    }
    let (mut lo, mut hi) = bracket?;
    while hi - lo > 1e-14 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// The equilibrium in the positive orthant.
#[derive(Debug, Clone)]
pub struct PositiveEquilibrium {
    pub x: DVector<f64>,
    /// Common component value when `ψ` is identical across nodes.
    pub alpha: Option<f64>,
    /// False when the point came from Newton iteration rather than the
    /// scalar consensus equation.
    pub analytic: bool,
}

/// `x⁺ = α𝟙` with `ψ(α) = α/π`, which requires identical `ψᵢ`.
pub fn consensus_equilibrium(sys: &SystemInstance) -> Result<PositiveEquilibrium> {
    let f = sys.psi().shared().ok_or(Error::NotIdenticalPsi)?;
    let alpha = consensus_amplitude(f, sys.pi(), sys.psi().mu()).unwrap_or(0.0);
    Ok(PositiveEquilibrium {
        x: DVector::from_element(sys.n(), alpha),
        alpha: Some(alpha),
        analytic: true,
    })
}

/// Like [`consensus_equilibrium`], but falls back to Newton iteration from
/// `π·𝟙` for heterogeneous nonlinearities.
pub fn positive_equilibrium(sys: &SystemInstance) -> Result<PositiveEquilibrium> {
    match consensus_equilibrium(sys) {
        Err(Error::NotIdenticalPsi) => {
            let start = DVector::from_element(sys.n(), sys.pi());
            let root = newton_solve(sys, &start, &NewtonOptions::default())?;
            let x = if root.x.min() > DEGENERATE_TOL {
                root.x
            } else {
                DVector::zeros(sys.n())
            };
            Ok(PositiveEquilibrium {
                x,
                alpha: None,
                analytic: false,
            })
        }
        other => other,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CensusOptions {
    pub n_starts: usize,
    /// Sampling box half-width is `box_scale·max(α, 1)`.
    pub box_scale: f64,
    pub seed: u64,
    pub dedup_tol: f64,
    pub newton: NewtonOptions,
}

impl Default for CensusOptions {
    fn default() -> Self {
        Self {
            n_starts: 1000,
            box_scale: 1.5,
            seed: 0,
            dedup_tol: DEDUP_TOL,
            newton: NewtonOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Census {
    pub pi: f64,
    pub records: Vec<EquilibriumRecord>,
    pub x_plus: Vec<f64>,
    pub alpha: Option<f64>,
    pub box_half_width: f64,
    /// Random starts whose Newton iteration failed.
    pub failed_starts: usize,
    /// Records whose negation did not pass the residual test.
    pub closure_violations: usize,
}

impl Census {
    pub fn count(&self) -> usize {
        self.records.len()
    }

    pub fn orthant_count(&self) -> usize {
        let mut sigs: Vec<&[i8]> = self.records.iter().map(|r| r.orthant.as_slice()).collect();
        sigs.sort();
        sigs.dedup();
        sigs.len()
    }

    pub fn stable_count(&self) -> usize {
        self.records
            .iter()
            .filter(|r| r.stability == Stability::Stable)
            .count()
    }

    pub fn mixed(&self) -> impl Iterator<Item = &EquilibriumRecord> {
        self.records.iter().filter(|r| r.is_mixed())
    }

    pub fn x_plus_state(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.x_plus)
    }

    /// Flat CSV: one row per record.
    pub fn to_csv(&self) -> String {
        let n = self.x_plus.len();
        let mut out = String::from("pi,index");
        for i in 1..=n {
            out.push_str(&format!(",x{i}"));
        }
        out.push_str(",residual,orthant,stability,sufficient_stable,sufficient_unstable,unstable_dim,norm_ratio");
        for i in 1..=n {
            out.push_str(&format!(",re_eig{i}"));
        }
        out.push('\n');
        for (k, r) in self.records.iter().enumerate() {
            out.push_str(&format!("{},{}", self.pi, k));
            for v in &r.x {
                out.push_str(&format!(",{v}"));
            }
            out.push_str(&format!(
                ",{},{},{},{},{},{},{}",
                r.residual,
                r.orthant_string(),
                serde_json::to_value(r.stability).unwrap().as_str().unwrap(),
                r.sufficient_stable,
                r.sufficient_unstable,
                r.unstable_dimension(),
                r.norm_ratio.map_or(String::new(), |v| v.to_string())
            ));
            for v in &r.jac_eigs_real {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }
}

fn total_order(a: &EquilibriumRecord, b: &EquilibriumRecord) -> Ordering {
    b.norm().total_cmp(&a.norm()).then_with(|| {
        a.x.iter()
            .zip(&b.x)
            .map(|(p, q)| q.total_cmp(p))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or(Ordering::Equal)
    })
}

/// Multistart Newton search for all reachable equilibria at the system's π.
///
/// Starts are `0`, `x⁺`, `x⁻`, then `warm_starts`, then `n_starts` uniform
/// samples in the box. Roots are merged in start order, the list is closed
/// under negation, and records are sorted by decreasing norm.
pub fn multistart_census(
    sys: &SystemInstance,
    opts: &CensusOptions,
    warm_starts: &[DVector<f64>],
) -> Result<Census> {
    let n = sys.n();
    let pos = positive_equilibrium(sys)?;
    let amplitude = pos.alpha.unwrap_or_else(|| pos.x.max());
    let half_width = opts.box_scale * amplitude.max(1.0);

    let mut seeds = vec![DVector::zeros(n)];
    if pos.x.max() > 0.0 {
        seeds.push(pos.x.clone());
        seeds.push(-&pos.x);
    }
    seeds.extend(warm_starts.iter().cloned());

    let fixed: Vec<Option<Root>> = seeds
        .par_iter()
        .map(|x0| {
            // the analytic x± are exact; keep them as they are
            let exact = (x0 - &pos.x).amax() == 0.0 || (x0 + &pos.x).amax() == 0.0;
            if pos.analytic && exact {
                let r = sys.vector_field(x0).amax();
                if r < newton_tolerance(sys) {
                    return Some(Root {
                        x: x0.clone(),
                        residual: r,
                        iterations: 0,
                    });
                }
            }
            newton_solve(sys, x0, &opts.newton).ok()
        })
        .collect();
    let random: Vec<Option<Root>> = (0..opts.n_starts)
        .into_par_iter()
        .map(|k| {
            use rand::Rng;
            let mut rng = start_rng(opts.seed, k as u64);
            let x0 = DVector::from_fn(n, |_, _| rng.random_range(-half_width..=half_width));
            newton_solve(sys, &x0, &opts.newton).ok()
        })
        .collect();
    let failed_starts = random.iter().filter(|r| r.is_none()).count();

    let mut accepted: Vec<DVector<f64>> = Vec::new();
    let is_new = |acc: &[DVector<f64>], x: &DVector<f64>| {
        acc.iter().all(|e| (e - x).amax() > opts.dedup_tol)
    };
    for root in fixed.into_iter().chain(random).flatten() {
        if is_new(&accepted, &root.x) {
            accepted.push(root.x);
        }
    }

    let tol = opts.newton.tol.unwrap_or_else(|| newton_tolerance(sys));
    let mut closure_violations = 0;
    let mut k = 0;
    while k < accepted.len() {
        let neg = -&accepted[k];
        if is_new(&accepted, &neg) {
            if sys.vector_field(&neg).amax() < tol {
                accepted.push(neg);
            } else {
                closure_violations += 1;
            }
        }
        k += 1;
    }

    let x_plus = pos.x.clone();
    let mut records: Vec<EquilibriumRecord> = accepted
        .par_iter()
        .map(|x| make_record(sys, x, sys.psi().is_identical().then_some(&x_plus)))
        .collect();
    records.sort_by(total_order);

    Ok(Census {
        pi: sys.pi(),
        records,
        x_plus: x_plus.as_slice().to_vec(),
        alpha: pos.alpha,
        box_half_width: half_width,
        failed_starts,
        closure_violations,
    })
}

/// Mixed-sign equilibria require `π·λ_{n−1}(H₁) > 1`, i.e. `π > π₂`.
/// With a simple `λ_{n−1}(H₁)` the condition is also sufficient.
pub fn necessary_condition_h(summary: &SpectralSummary, pi: f64) -> bool {
    pi * summary.lambda2nd_h1 > 1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionA {
    pub holds: bool,
    /// The non-Perron positive eigenvalue of `A` that satisfies the test.
    pub witness: Option<f64>,
}

/// Adjacency-level necessary condition: some eigenvalue `0 < λ(A) ≠ ρ(A)`
/// with `π·λ(A) > δ_min` (sigmoidal, `μ = 1`) or `π·λ(A) ≥ δ_min/μ`
/// (`μ > 1`).
pub fn necessary_condition_a(eigs_a: &[f64], delta: &[f64], pi: f64, mu: f64) -> ConditionA {
    let delta_min = delta.iter().copied().fold(f64::INFINITY, f64::min);
    let n = eigs_a.len();
    let passes = |l: f64| {
        if mu <= 1.0 {
            pi * l > delta_min
        } else {
            pi * l >= delta_min / mu
        }
    };
    let witness = eigs_a[..n.saturating_sub(1)]
        .iter()
        .rev()
        .copied()
        .find(|&l| l > 0.0 && passes(l));
    ConditionA {
        holds: witness.is_some(),
        witness,
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SignRatioReport {
    pub holds: bool,
    /// `minᵢ ψ(x̄ᵢ)/x̄ᵢ − 1/π`.
    pub min_margin: f64,
    pub worst_index: usize,
}

/// Checks `ψ(x̄ᵢ)/x̄ᵢ ≥ 1/π` for every component; near-zero components use
/// the limit `ψ′(0)`.
pub fn check_sign_ratio(sys: &SystemInstance, record: &EquilibriumRecord) -> SignRatioReport {
    let inv_pi = 1.0 / sys.pi();
    let (worst_index, min_margin) = record
        .x
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let ratio = if v.abs() > DEGENERATE_TOL {
                sys.psi().eval(i, v) / v
            } else {
                sys.psi().d1(i, 0.0)
            };
            (i, ratio - inv_pi)
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap_or((0, f64::INFINITY));
    SignRatioReport {
        holds: min_margin >= -1e-10,
        min_margin,
        worst_index,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NormBoundReport {
    /// Indices of records breaking `|x̄ᵢ| ≤ xᵢ⁺(1 + 1e-8)` or
    /// `‖x̄‖₂ ≤ ‖x⁺‖₂(1 + 1e-8)`.
    pub violations: Vec<usize>,
    pub max_norm_ratio: f64,
    /// `maxᵢ |x̄ᵢ| / xᵢ⁺` over all records.
    pub max_component_ratio: f64,
}

impl NormBoundReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn check_norm_bound(records: &[EquilibriumRecord], x_plus: &DVector<f64>) -> NormBoundReport {
    let plus_norm = x_plus.norm();
    let mut report = NormBoundReport {
        violations: Vec::new(),
        max_norm_ratio: 0.0,
        max_component_ratio: 0.0,
    };
    for (k, r) in records.iter().enumerate() {
        let norm_ok = r.norm() <= plus_norm * (1.0 + 1e-8);
        let comp_ok =
            r.x.iter()
                .zip(x_plus.iter())
                .all(|(v, p)| v.abs() <= p * (1.0 + 1e-8));
        if !(norm_ok && comp_ok) {
            report.violations.push(k);
        }
        if plus_norm > 0.0 {
            report.max_norm_ratio = report.max_norm_ratio.max(r.norm() / plus_norm);
        }
        for (v, p) in r.x.iter().zip(x_plus.iter()) {
            let ratio = if *p > 0.0 {
                v.abs() / p
            } else if *v == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            report.max_component_ratio = report.max_component_ratio.max(ratio);
        }
    }
    report
}

/// `|cos∠(x, v)|`.
pub fn alignment(x: &[f64], v: &DVector<f64>) -> f64 {
    let x = DVector::from_column_slice(x);
    (x.dot(v) / (x.norm() * v.norm())).abs()
}
