//! The vector field `f(x) = −Δx + πAψ(x)`, its Jacobian, and fixed-step
//! RK4 integration.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::WeightedNetwork;
use crate::nonlinearity::SigmoidFamily;
use crate::seeding::start_rng;

/// A concrete dynamical system: network, nonlinearity and social effort π.
#[derive(Debug, Clone)]
pub struct SystemInstance {
    net: WeightedNetwork,
    psi: SigmoidFamily,
    pi: f64,
}

impl SystemInstance {
    pub fn new(net: WeightedNetwork, psi: SigmoidFamily, pi: f64) -> Result<Self> {
        if !(pi > 0.0 && pi.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "social effort must be positive, got {pi}"
            )));
        }
        if let Some(k) = psi.node_count() {
            if k != net.n() {
                return Err(Error::InvalidParameter(format!(
                    "{k} per-node nonlinearities for a {}-node network",
                    net.n()
                )));
            }
        }
        Ok(Self { net, psi, pi })
    }

    /// Same network and nonlinearity at a different π.
    pub fn with_pi(&self, pi: f64) -> Result<Self> {
        Self::new(self.net.clone(), self.psi.clone(), pi)
    }

    pub fn net(&self) -> &WeightedNetwork {
        &self.net
    }

    pub fn psi(&self) -> &SigmoidFamily {
        &self.psi
    }

    pub fn pi(&self) -> f64 {
        self.pi
    }

    pub fn n(&self) -> usize {
        self.net.n()
    }

    pub fn vector_field(&self, x: &DVector<f64>) -> DVector<f64> {
        let psi = self.psi.apply(x);
        self.net.adjacency() * psi * self.pi - self.net.delta().component_mul(x)
    }

    /// `Δ[−x + πH₁ψ(x)]`, algebraically identical to [`Self::vector_field`].
    pub fn vector_field_h_form(&self, x: &DVector<f64>) -> DVector<f64> {
        let inner = self.net.h1() * self.psi.apply(x) * self.pi - x;
        self.net.delta().component_mul(&inner)
    }

    /// `J(x) = −Δ + πA·diag(ψ′(x))`; Metzler for every `x`.
    pub fn jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let slopes = self.psi.apply_d1(x);
        let n = self.n();
        let a = self.net.adjacency();
        let j = DMatrix::from_fn(n, n, |i, k| {
            let coupling = self.pi * a[(i, k)] * slopes[k];
            if i == k {
                coupling - self.net.delta()[i]
            } else {
                coupling
            }
        });
        debug_assert!(is_metzler(&j), "Jacobian lost the Metzler property");
        j
    }

    /// Symmetrizer of `J(x)`: `d ⊙ ψ′(x)`, since `diag(d)A` is symmetric.
    pub fn jacobian_symmetrizer(&self, x: &DVector<f64>) -> Option<DVector<f64>> {
        let slopes = self.psi.apply_d1(x);
        if slopes.iter().any(|&s| s <= 0.0) {
            return None;
        }
        self.net.symmetrizer().map(|d| d.component_mul(&slopes))
    }
}

/// Nonnegative off-diagonal entries.
pub fn is_metzler(m: &DMatrix<f64>) -> bool {
    (0..m.nrows()).all(|i| (0..m.ncols()).all(|j| i == j || m[(i, j)] >= 0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminalReason {
    Converged,
    MaxTime,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    pub terminal_reason: TerminalReason,
}

impl Trajectory {
    pub fn final_state(&self) -> &DVector<f64> {
        self.states
            .last()
            .expect("trajectory holds at least the initial state")
    }

    pub fn final_time(&self) -> f64 {
        *self
            .times
            .last()
            .expect("trajectory holds at least the initial time")
    }

    /// CSV with header `t,x1,…,xn`.
    pub fn to_csv(&self) -> String {
        let n = self.states.first().map_or(0, |s| s.len());
        let mut out = String::from("t");
        for i in 1..=n {
            out.push_str(&format!(",x{i}"));
        }
        out.push('\n');
        for (t, x) in self.times.iter().zip(&self.states) {
            out.push_str(&format!("{t}"));
            for v in x.iter() {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct IntegrateOptions {
    /// Fixed RK4 step; `None` picks `0.01·min(1/δ_max, 1)`.
    pub step: Option<f64>,
    /// Record every `stride`-th step (the final state is always kept).
    pub stride: usize,
    /// Stop once `‖f(x)‖_∞` drops below this.
    pub converge_tol: f64,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self {
            step: None,
            stride: 10,
            converge_tol: 1e-10,
        }
    }
}

pub fn default_step(net: &WeightedNetwork) -> f64 {
    0.01 * (1.0 / net.delta_max()).min(1.0)
}

/// Classic fourth-order Runge–Kutta with a fixed step.
pub fn integrate(
    sys: &SystemInstance,
    x0: &DVector<f64>,
    t_max: f64,
    opts: &IntegrateOptions,
) -> Result<Trajectory> {
    if !(t_max > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "t_max must be positive, got {t_max}"
        )));
    }
    let h = opts.step.unwrap_or_else(|| default_step(sys.net()));
    let stride = opts.stride.max(1);
    let mut x = x0.clone();
    let mut t = 0.0;
    let mut times = vec![t];
    let mut states = vec![x.clone()];
    let mut step = 0usize;
    let mut reason = TerminalReason::MaxTime;

    loop {
        let f = sys.vector_field(&x);
        if f.amax() < opts.converge_tol {
            reason = TerminalReason::Converged;
            break;
        }
        if t >= t_max {
            break;
        }
        let dt = h.min(t_max - t);
        let k2 = sys.vector_field(&(&x + &f * (0.5 * dt)));
        let k3 = sys.vector_field(&(&x + &k2 * (0.5 * dt)));
        let k4 = sys.vector_field(&(&x + &k3 * dt));
        x += (f + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        t += dt;
        step += 1;
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::StepFailure { time: t });
        }
        if step.is_multiple_of(stride) {
            times.push(t);
            states.push(x.clone());
        }
    }
    if times.last() != Some(&t) {
        times.push(t);
        states.push(x);
    }
    Ok(Trajectory {
        times,
        states,
        terminal_reason: reason,
    })
}

/// Distribution of initial conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampler {
    /// Uniform on `[−half_width, half_width]ⁿ`.
    UniformBox { half_width: f64 },
}

impl Sampler {
    pub fn sample(&self, n: usize, seed: u64, index: u64) -> DVector<f64> {
        use rand::Rng;
        let mut rng = start_rng(seed, index);
        match *self {
            Sampler::UniformBox { half_width } => {
                DVector::from_fn(n, |_, _| rng.random_range(-half_width..=half_width))
            }
        }
    }
}

/// Attractor-matching tolerance (infinity norm).
pub const MATCH_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Serialize)]
pub struct EnsembleOutcome {
    pub index: usize,
    pub x0: Vec<f64>,
    pub terminal: Vec<f64>,
    pub final_time: f64,
    pub converged: bool,
    /// Index into the equilibrium list passed to [`ensemble_run`]; `None`
    /// when unresolved.
    pub attractor: Option<usize>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EnsembleOptions {
    pub t_max: f64,
    pub integrate: IntegrateOptions,
}

impl Default for EnsembleOptions {
    fn default() -> Self {
        Self {
            t_max: 400.0,
            integrate: IntegrateOptions {
                stride: usize::MAX,
                ..Default::default()
            },
        }
    }
}

/// Index of the nearest equilibrium within [`MATCH_TOL`].
pub fn match_attractor(x: &DVector<f64>, equilibria: &[DVector<f64>]) -> Option<usize> {
    equilibria
        .iter()
        .enumerate()
        .map(|(k, e)| (k, (x - e).amax()))
        .filter(|&(_, d)| d < MATCH_TOL)
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(k, _)| k)
}

/// Integrates from `n_starts` sampled initial conditions and matches each
/// terminal state to the nearest listed equilibrium.
///
/// Start `k` draws from its own RNG stream derived from `(seed, k)`, so the
/// result does not depend on thread scheduling.
pub fn ensemble_run(
    sys: &SystemInstance,
    n_starts: usize,
    sampler: Sampler,
    seed: u64,
    equilibria: &[DVector<f64>],
    opts: &EnsembleOptions,
) -> Vec<EnsembleOutcome> {
    (0..n_starts)
        .into_par_iter()
        .map(|k| {
            let x0 = sampler.sample(sys.n(), seed, k as u64);
            match integrate(sys, &x0, opts.t_max, &opts.integrate) {
                Ok(traj) => {
                    let end = traj.final_state();
                    EnsembleOutcome {
                        index: k,
                        x0: x0.as_slice().to_vec(),
                        terminal: end.as_slice().to_vec(),
                        final_time: traj.final_time(),
                        converged: traj.terminal_reason == TerminalReason::Converged,
                        attractor: match_attractor(end, equilibria),
                    }
                }
                Err(_) => EnsembleOutcome {
                    index: k,
                    x0: x0.as_slice().to_vec(),
                    terminal: vec![f64::NAN; sys.n()],
                    final_time: f64::NAN,
                    converged: false,
                    attractor: None,
                },
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::example1_matrix;
    use proptest::prelude::*;

    fn example1(pi: f64) -> SystemInstance {
        SystemInstance::new(
            WeightedNetwork::new(example1_matrix()).unwrap(),
            SigmoidFamily::boltzmann(),
            pi,
        )
        .unwrap()
    }

    #[test]
    fn origin_is_fixed() {
        let sys = example1(1.838);
        assert_eq!(sys.vector_field(&DVector::zeros(6)).amax(), 0.0);
    }

    #[test]
    fn rejects_nonpositive_effort() {
        assert!(example1(1.0).with_pi(0.0).is_err());
        assert!(example1(1.0).with_pi(-1.0).is_err());
    }

    #[test]
    fn jacobian_at_origin_is_linear_part() {
        let sys = example1(1.3);
        let j = sys.jacobian(&DVector::zeros(6));
        let expected = sys.net().adjacency() * 1.3 - DMatrix::from_diagonal(sys.net().delta());
        assert!((j - expected).amax() < 1e-15);
    }

    #[test]
    fn consensus_point_is_equilibrium() {
        // oracle: scalar bisection for tanh(a) = a / pi
        let pi: f64 = 1.838;
        let (mut lo, mut hi) = (1e-6, pi);
        for _ in 0..200 {
            let m = 0.5 * (lo + hi);
            if m.tanh() - m / pi > 0.0 {
                lo = m;
            } else {
                hi = m;
            }
        }
        let x = DVector::from_element(6, 0.5 * (lo + hi));
        assert!(example1(pi).vector_field(&x).amax() < 1e-9);
    }

    #[test]
    fn subthreshold_converges_to_origin() {
        let sys = example1(0.5);
        let x0 = DVector::from_vec(vec![1.5, -2.0, 0.3, 1.0, -0.7, 2.0]);
        let traj = integrate(&sys, &x0, 500.0, &IntegrateOptions::default()).unwrap();
        assert_eq!(traj.terminal_reason, TerminalReason::Converged);
        assert!(traj.final_state().amax() < 1e-6);
    }

    #[test]
    fn positive_orthant_is_invariant() {
        let sys = example1(1.838);
        let x0 = DVector::from_vec(vec![0.01, 2.0, 0.5, 0.001, 1.0, 0.2]);
        let traj = integrate(
            &sys,
            &x0,
            400.0,
            &IntegrateOptions {
                stride: 1,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(traj.states.iter().all(|s| s.min() > -1e-12));
        assert_eq!(traj.terminal_reason, TerminalReason::Converged);
        let end = traj.final_state();
        assert!((end.max() - end.min()).abs() < 1e-8, "not consensus: {end}");
    }

    #[test]
    fn zero_start_stays_put() {
        let traj = integrate(
            &example1(2.0),
            &DVector::zeros(6),
            10.0,
            &IntegrateOptions::default(),
        )
        .unwrap();
        assert_eq!(traj.times.len(), 1);
        assert_eq!(traj.final_state().amax(), 0.0);
    }

    #[test]
    fn times_strictly_increase_and_csv_shape() {
        let x0 = DVector::from_element(6, 0.3);
        let traj = integrate(
            &example1(1.1),
            &x0,
            2.0,
            &IntegrateOptions {
                stride: 7,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(traj.final_time(), 2.0);
        let csv = traj.to_csv();
        assert!(csv.starts_with("t,x1,x2,x3,x4,x5,x6\n"));
        assert_eq!(csv.lines().count(), traj.times.len() + 1);
    }

    #[test]
    fn ensemble_is_deterministic_and_handles_zero_starts() {
        let sys = example1(0.5);
        let sampler = Sampler::UniformBox { half_width: 2.0 };
        let opts = EnsembleOptions::default();
        let origin = [DVector::zeros(6)];
        assert!(ensemble_run(&sys, 0, sampler, 1, &origin, &opts).is_empty());
        let a = ensemble_run(&sys, 8, sampler, 11, &origin, &opts);
        let b = ensemble_run(&sys, 8, sampler, 11, &origin, &opts);
        for (p, q) in a.iter().zip(&b) {
            assert_eq!(p.x0, q.x0);
            assert_eq!(p.terminal, q.terminal);
            assert_eq!(p.attractor, Some(0));
        }
    }

    fn state() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-3.0..3.0f64, 6)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn field_is_odd_and_forms_agree(x in state(), pi in 0.2..4.0f64) {
            let sys = example1(pi);
            let x = DVector::from_vec(x);
            let f = sys.vector_field(&x);
            prop_assert!((sys.vector_field(&-&x) + &f).amax() < 1e-14);
            let g = sys.vector_field_h_form(&x);
            prop_assert!((&f - &g).amax() <= 1e-12 * f.amax().max(1.0));
        }

        #[test]
        fn jacobian_is_metzler_and_matches_differences(x in state(), pi in 0.2..4.0f64, dir in state()) {
            let sys = example1(pi);
            let x = DVector::from_vec(x);
            let j = sys.jacobian(&x);
            prop_assert!(is_metzler(&j));
            let h = DVector::from_vec(dir).normalize() * 1e-5;
            let fd = (sys.vector_field(&(&x + &h)) - sys.vector_field(&(&x - &h))) / 2.0;
            let lin = &j * &h;
            prop_assert!((&fd - &lin).amax() <= 1e-6 * lin.amax().max(1e-5));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn flow_preserves_order_and_oddness(x in state(), gap in prop::collection::vec(0.0..1.0f64, 6), pi in 0.5..2.5f64) {
            let sys = example1(pi);
            let opts = IntegrateOptions { stride: 5, converge_tol: 0.0, ..Default::default() };
            let x0 = DVector::from_vec(x);
            let y0 = &x0 + DVector::from_vec(gap);
            let tx = integrate(&sys, &x0, 5.0, &opts).unwrap();
            let ty = integrate(&sys, &y0, 5.0, &opts).unwrap();
            let tn = integrate(&sys, &-&x0, 5.0, &opts).unwrap();
            for ((sx, sy), sn) in tx.states.iter().zip(&ty.states).zip(&tn.states) {
                prop_assert!((sx - sy).max() <= 1e-8);
                prop_assert!((sx + sn).amax() <= 1e-10);
                let bound = x0.amax().max(pi * sys.psi().mu()) + 1e-6;
                prop_assert!(sx.amax() <= bound);
            }
        }
    }
}
