//! Per-node saturation functions `ψᵢ`, their derivatives, grid-based
//! assumption checks and the ratio bound `μ`.
//!
//! The assumption checks sample a finite grid. They catch modelling mistakes;
//! they do not prove anything about the function between samples.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A scalar nonlinearity with closed-form derivatives up to third order.
pub trait Saturation: Send + Sync + fmt::Debug {
    fn value(&self, x: f64) -> f64;
    fn d1(&self, x: f64) -> f64;
    fn d2(&self, x: f64) -> f64;
    fn d3(&self, x: f64) -> f64;

    /// Whether the function is at least C³ at the origin, so that
    /// `ψ‴(0)` is meaningful.
    fn smooth_at_origin(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PsiKind {
    Boltzmann,
    #[serde(rename = "mm")]
    MichaelisMenten,
    CubicTanh,
    Custom,
}

impl FromStr for PsiKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "boltzmann" | "tanh" => Ok(PsiKind::Boltzmann),
            "mm" | "michaelis-menten" | "michaelis_menten" => Ok(PsiKind::MichaelisMenten),
            "cubic-tanh" | "cubic_tanh" => Ok(PsiKind::CubicTanh),
            _ => Err(Error::UnknownKind(s.to_string())),
        }
    }
}

impl fmt::Display for PsiKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PsiKind::Boltzmann => "boltzmann",
            PsiKind::MichaelisMenten => "mm",
            PsiKind::CubicTanh => "cubic-tanh",
            PsiKind::Custom => "custom",
        })
    }
}

fn sech2(u: f64) -> f64 {
    let c = u.cosh();
    1.0 / (c * c)
}

/// `(1 − e^{−2x}) / (1 + e^{−2x})`, which is exactly `tanh x`.
#[derive(Debug, Clone, Copy)]
pub struct Boltzmann;

impl Saturation for Boltzmann {
    fn value(&self, x: f64) -> f64 {
        x.tanh()
    }
    fn d1(&self, x: f64) -> f64 {
        sech2(x)
    }
    fn d2(&self, x: f64) -> f64 {
        -2.0 * x.tanh() * sech2(x)
    }
    fn d3(&self, x: f64) -> f64 {
        let (t, s) = (x.tanh(), sech2(x));
        -2.0 * s * (s - 2.0 * t * t)
    }
}

/// `x / (1 + |x|)`. Only C¹ at the origin: `ψ″` jumps from +2 to −2.
#[derive(Debug, Clone, Copy)]
pub struct MichaelisMenten;

impl Saturation for MichaelisMenten {
    fn value(&self, x: f64) -> f64 {
        x / (1.0 + x.abs())
    }
    fn d1(&self, x: f64) -> f64 {
        (1.0 + x.abs()).powi(-2)
    }
    fn d2(&self, x: f64) -> f64 {
        if x == 0.0 {
            0.0
        } else {
            -2.0 * x.signum() * (1.0 + x.abs()).powi(-3)
        }
    }
    fn d3(&self, x: f64) -> f64 {
        6.0 * (1.0 + x.abs()).powi(-4)
    }
    fn smooth_at_origin(&self) -> bool {
        false
    }
}

/// `tanh(x + x³)`: odd, increasing, saturating, unit slope at 0, but
/// convex on an interval of `x > 0`, so it is not sigmoidal and `μ > 1`.
#[derive(Debug, Clone, Copy)]
pub struct CubicTanh;

impl Saturation for CubicTanh {
    fn value(&self, x: f64) -> f64 {
        (x + x * x * x).tanh()
    }
    fn d1(&self, x: f64) -> f64 {
        sech2(x + x * x * x) * (1.0 + 3.0 * x * x)
    }
    fn d2(&self, x: f64) -> f64 {
        let u = x + x * x * x;
        let (t, s) = (u.tanh(), sech2(u));
        let u1 = 1.0 + 3.0 * x * x;
        -2.0 * t * s * u1 * u1 + s * 6.0 * x
    }
    fn d3(&self, x: f64) -> f64 {
        let u = x + x * x * x;
        let (t, s) = (u.tanh(), sech2(u));
        let u1 = 1.0 + 3.0 * x * x;
        -2.0 * s * (s - 2.0 * t * t) * u1 * u1 * u1 + 3.0 * (-2.0 * t * s) * u1 * 6.0 * x + 6.0 * s
    }
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A user-supplied nonlinearity given as four callables.
#[derive(Clone)]
pub struct CustomPsi {
    pub name: String,
    pub value: ScalarFn,
    pub d1: ScalarFn,
    pub d2: ScalarFn,
    pub d3: ScalarFn,
}

impl fmt::Debug for CustomPsi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomPsi")
            .field("name", &self.name)
            .finish()
    }
}

impl Saturation for CustomPsi {
    fn value(&self, x: f64) -> f64 {
        (self.value)(x)
    }
    fn d1(&self, x: f64) -> f64 {
        (self.d1)(x)
    }
    fn d2(&self, x: f64) -> f64 {
        (self.d2)(x)
    }
    fn d3(&self, x: f64) -> f64 {
        (self.d3)(x)
    }
}

#[derive(Debug, Clone)]
enum Nodes {
    Shared(Arc<dyn Saturation>),
    PerNode(Vec<Arc<dyn Saturation>>),
}

/// The vector nonlinearity `ψ(x) = (ψ₁(x₁), …, ψₙ(xₙ))`.
#[derive(Debug, Clone)]
pub struct SigmoidFamily {
    kind: PsiKind,
    nodes: Nodes,
    is_sigmoidal: bool,
    mu: f64,
}

impl SigmoidFamily {
    pub fn builtin(kind: PsiKind) -> Result<Self> {
        let f: Arc<dyn Saturation> = match kind {
            PsiKind::Boltzmann => Arc::new(Boltzmann),
            PsiKind::MichaelisMenten => Arc::new(MichaelisMenten),
            PsiKind::CubicTanh => Arc::new(CubicTanh),
            PsiKind::Custom => return Err(Error::UnknownKind("custom".into())),
        };
        Ok(Self::shared_with_kind(kind, f))
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::builtin(name.parse()?)
    }

    pub fn boltzmann() -> Self {
        Self::shared_with_kind(PsiKind::Boltzmann, Arc::new(Boltzmann))
    }

    pub fn custom(f: CustomPsi) -> Self {
        Self::shared_with_kind(PsiKind::Custom, Arc::new(f))
    }

    /// One function per node.
    pub fn heterogeneous(functions: Vec<Arc<dyn Saturation>>) -> Self {
        let is_sigmoidal = functions
            .iter()
            .all(|f| verify_assumptions(f.as_ref(), &[Assumption::A4]).passed());
        let mu = functions
            .iter()
            .map(|f| compute_mu(f.as_ref()))
            .fold(f64::MIN, f64::max);
        Self {
            kind: PsiKind::Custom,
            nodes: Nodes::PerNode(functions),
            is_sigmoidal,
            mu,
        }
    }

    fn shared_with_kind(kind: PsiKind, f: Arc<dyn Saturation>) -> Self {
        let is_sigmoidal = verify_assumptions(f.as_ref(), &[Assumption::A4]).passed();
        let mu = compute_mu(f.as_ref());
        Self {
            kind,
            nodes: Nodes::Shared(f),
            is_sigmoidal,
            mu,
        }
    }

    pub fn kind(&self) -> PsiKind {
        self.kind
    }

    pub fn is_sigmoidal(&self) -> bool {
        self.is_sigmoidal
    }

    /// `max_i sup_{x} ψᵢ(x)/x`, including the `x → 0` limit `ψᵢ′(0)`.
    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// True when every node uses the same function.
    pub fn is_identical(&self) -> bool {
        matches!(self.nodes, Nodes::Shared(_))
    }

    /// The shared function, if all nodes use the same one.
    pub fn shared(&self) -> Option<&dyn Saturation> {
        match &self.nodes {
            Nodes::Shared(f) => Some(f.as_ref()),
            Nodes::PerNode(_) => None,
        }
    }

    /// Number of nodes this family is tied to; `None` for a shared function.
    pub fn node_count(&self) -> Option<usize> {
        match &self.nodes {
            Nodes::Shared(_) => None,
            Nodes::PerNode(v) => Some(v.len()),
        }
    }

    pub fn node(&self, i: usize) -> &dyn Saturation {
        match &self.nodes {
            Nodes::Shared(f) => f.as_ref(),
            Nodes::PerNode(v) => v[i].as_ref(),
        }
    }

    pub fn eval(&self, i: usize, x: f64) -> f64 {
        self.node(i).value(x)
    }

    pub fn d1(&self, i: usize, x: f64) -> f64 {
        self.node(i).d1(x)
    }

    pub fn d2(&self, i: usize, x: f64) -> f64 {
        self.node(i).d2(x)
    }

    pub fn d3(&self, i: usize, x: f64) -> f64 {
        self.node(i).d3(x)
    }

    /// `ψ(x)` componentwise.
    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(x.len(), x.iter().enumerate().map(|(i, &v)| self.eval(i, v)))
    }

    /// `ψ′(x)` componentwise (the diagonal of `∂ψ/∂x`).
    pub fn apply_d1(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(x.len(), x.iter().enumerate().map(|(i, &v)| self.d1(i, v)))
    }

    /// `βᵢ = ψᵢ‴(0)`, absent when `ψᵢ` is not C³ at the origin.
    pub fn beta(&self, i: usize) -> Option<f64> {
        let f = self.node(i);
        f.smooth_at_origin().then(|| f.d3(0.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Assumption {
    /// Odd.
    A1,
    /// Strictly increasing with unit slope at 0.
    A2,
    /// Saturating to ±1.
    A3,
    /// Concave on x > 0, convex on x < 0.
    A4,
}

impl Assumption {
    pub const ALL: [Assumption; 4] = [
        Assumption::A1,
        Assumption::A2,
        Assumption::A3,
        Assumption::A4,
    ];
}

#[derive(Debug, Clone, Serialize)]
pub struct AssumptionCheck {
    pub assumption: Assumption,
    pub passed: bool,
    /// A sample point where the check failed.
    pub witness: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct AssumptionReport {
    pub checks: Vec<AssumptionCheck>,
}

impl AssumptionReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, a: Assumption) -> Option<&AssumptionCheck> {
        self.checks.iter().find(|c| c.assumption == a)
    }
}

/// 10³ evenly spaced points on [−20, 20] plus a log-spaced cluster on
/// ±[1e-4, 1e-1].
pub fn verification_grid() -> Vec<f64> {
    let mut grid: Vec<f64> = (0..1000).map(|k| -20.0 + 40.0 * k as f64 / 999.0).collect();
    for k in 0..60 {
        let x = 10f64.powf(-4.0 + 3.0 * k as f64 / 59.0);
        grid.push(x);
        grid.push(-x);
    }
    grid.sort_by(f64::total_cmp);
    grid
}

/// At values this close to ±1 the derivative may have underflowed to zero.
fn saturated(v: f64) -> bool {
    v.abs() >= 1.0
}

pub fn verify_assumptions(f: &dyn Saturation, which: &[Assumption]) -> AssumptionReport {
    let grid = verification_grid();
    let checks = which
        .iter()
        .map(|&a| {
            let fail = |x: f64, detail: String| AssumptionCheck {
                assumption: a,
                passed: false,
                witness: Some(x),
                detail,
            };
            let result = match a {
                Assumption::A1 => {
                    if f.value(0.0).abs() > 1e-12 {
                        Err(fail(0.0, format!("psi(0) = {}", f.value(0.0))))
                    } else {
                        grid.iter()
                            .find(|&&x| (f.value(x) + f.value(-x)).abs() > 1e-12)
                            .map_or(Ok(()), |&x| Err(fail(x, "psi(x) + psi(-x) != 0".into())))
                    }
                }
                Assumption::A2 => {
                    if (f.d1(0.0) - 1.0).abs() > 1e-12 {
                        Err(fail(0.0, format!("psi'(0) = {}", f.d1(0.0))))
                    } else {
                        grid.iter()
                            .find(|&&x| {
                                let d = f.d1(x);
                                !(d > 0.0 || (d == 0.0 && saturated(f.value(x))))
                            })
                            .map_or(Ok(()), |&x| Err(fail(x, format!("psi'(x) = {}", f.d1(x)))))
                    }
                }
                Assumption::A3 => {
                    let far = [1e2, 1e4, 1e6, 1e8, 1e10, 1e12];
                    let mut result = Ok(());
                    for sign in [1.0, -1.0] {
                        let gaps: Vec<f64> = far
                            .iter()
                            .map(|&x| (f.value(sign * x) - sign).abs())
                            .collect();
                        if let Some(k) = (1..gaps.len()).find(|&k| gaps[k] > gaps[k - 1]) {
                            result = Err(fail(sign * far[k], "distance to the limit grows".into()));
                            break;
                        }
                        if gaps[gaps.len() - 1] > 1e-8 {
                            result = Err(fail(
                                sign * far[far.len() - 1],
                                format!("psi = {}", f.value(sign * 1e12)),
                            ));
                            break;
                        }
                    }
                    result.and_then(|_| {
                        grid.iter()
                            .find(|&&x| f.value(x).abs() > 1.0)
                            .map_or(Ok(()), |&x| Err(fail(x, "|psi(x)| > 1".into())))
                    })
                }
                Assumption::A4 => grid
                    .iter()
                    .filter(|&&x| x != 0.0)
                    .find_map(|&x| {
                        let d2 = f.d2(x) * x.signum();
                        let curvature_ok = d2 < 0.0 || (d2 == 0.0 && saturated(f.value(x)));
                        if !curvature_ok {
                            Some(fail(x, format!("psi''(x) = {}", f.d2(x))))
                        } else if f.value(x).abs() >= x.abs() {
                            Some(fail(x, "|psi(x)| >= |x|".into()))
                        } else {
                            None
                        }
                    })
                    .map_or(Ok(()), Err),
            };
            result.map_or_else(
                |e| e,
                |_| AssumptionCheck {
                    assumption: a,
                    passed: true,
                    witness: None,
                    detail: String::new(),
                },
            )
        })
        .collect();
    AssumptionReport { checks }
}

/// `sup_{x>0} ψ(x)/x`, including the limit `ψ′(0)` at the origin.
///
/// A 10⁴-point grid on (0, 50] locates the best sample, which is then
/// refined by golden-section search down to a 1e-10 bracket.
pub fn compute_mu(f: &dyn Saturation) -> f64 {
    let ratio = |x: f64| f.value(x) / x;
    const POINTS: usize = 10_000;
    let h = 50.0 / POINTS as f64;
    let (best_k, best) =
        (1..=POINTS)
            .map(|k| (k, ratio(k as f64 * h)))
            .fold(
                (1, f64::MIN),
                |acc, (k, r)| if r > acc.1 { (k, r) } else { acc },
            );

    let (mut lo, mut hi) = ((best_k as f64 - 1.0) * h, (best_k as f64 + 1.0) * h);
    lo = lo.max(1e-12);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (ratio(c), ratio(d));
    while hi - lo > 1e-10 {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = ratio(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = ratio(d);
        }
    }
    best.max(fc).max(fd).max(f.d1(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn builtins() -> [(PsiKind, Arc<dyn Saturation>); 3] {
        [
            (PsiKind::Boltzmann, Arc::new(Boltzmann)),
            (PsiKind::MichaelisMenten, Arc::new(MichaelisMenten)),
            (PsiKind::CubicTanh, Arc::new(CubicTanh)),
        ]
    }

    #[test]
    fn boltzmann_is_tanh() {
        for x in [-3.0_f64, -0.4, 0.0, 0.1, 2.5] {
            let b: f64 = (1.0 - (-2.0 * x).exp()) / (1.0 + (-2.0 * x).exp());
            assert!((Boltzmann.value(x) - b).abs() < 1e-15);
        }
        assert_eq!(Boltzmann.value(0.0), 0.0);
        assert_eq!(Boltzmann.d1(0.0), 1.0);
        assert_eq!(Boltzmann.d3(0.0), -2.0);
    }

    #[test]
    fn boltzmann_third_derivative_at_zero_by_differences() {
        // oracle: fourth-order central difference of psi'' at 0 gives psi'''(0)
        let h = 1e-3;
        let f = |x: f64| Boltzmann.d1(x);
        let fd = (f(h) - 2.0 * f(0.0) + f(-h)) / (h * h);
        assert!((fd + 2.0).abs() < 1e-5, "{fd}");
    }

    #[test]
    fn michaelis_menten_at_one() {
        assert_eq!(MichaelisMenten.value(1.0), 0.5);
    }

    #[test]
    fn builtins_from_names() {
        assert_eq!("mm".parse::<PsiKind>().unwrap(), PsiKind::MichaelisMenten);
        assert_eq!("cubic-tanh".parse::<PsiKind>().unwrap(), PsiKind::CubicTanh);
        assert!(matches!(
            "logistic".parse::<PsiKind>(),
            Err(Error::UnknownKind(_))
        ));
        assert!(SigmoidFamily::builtin(PsiKind::Custom).is_err());
    }

    #[test]
    fn sigmoidal_flags_and_mu() {
        let b = SigmoidFamily::builtin(PsiKind::Boltzmann).unwrap();
        assert!(b.is_sigmoidal());
        assert_eq!(b.mu(), 1.0);
        let m = SigmoidFamily::builtin(PsiKind::MichaelisMenten).unwrap();
        assert!(m.is_sigmoidal());
        assert_eq!(m.mu(), 1.0);
        let c = SigmoidFamily::builtin(PsiKind::CubicTanh).unwrap();
        assert!(!c.is_sigmoidal());
        assert!(c.mu() > 1.0);
    }

    /// Independent oracle for μ of `tanh(x + x³)`: the maximizer of ψ(x)/x
    /// solves `x ψ′(x) = ψ(x)`; bracket the sign change on a grid and bisect.
    fn cubic_mu_oracle() -> f64 {
        let g = |x: f64| {
            let u: f64 = x + x.powi(3);
            x * (1.0 + 3.0 * x * x) / u.cosh().powi(2) - u.tanh()
        };
        let mut a = 1e-3;
        while g(a + 1e-3) > 0.0 {
            a += 1e-3;
        }
        let mut b = a + 1e-3;
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if g(m) > 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        let x = 0.5 * (a + b);
        (x + x.powi(3)).tanh() / x
    }

    #[test]
    fn cubic_tanh_mu_matches_stationarity_oracle() {
        let oracle = cubic_mu_oracle();
        // frozen from a 30-digit mpmath root of x psi'(x) = psi(x)
        assert!((oracle - 1.121_659_822_473_65).abs() < 1e-12, "{oracle}");
        assert!((compute_mu(&CubicTanh) - oracle).abs() < 1e-9);
    }

    #[test]
    fn verify_all_assumptions() {
        assert!(verify_assumptions(&Boltzmann, &Assumption::ALL).passed());
        assert!(verify_assumptions(&MichaelisMenten, &[Assumption::A1]).passed());
        assert!(verify_assumptions(&MichaelisMenten, &Assumption::ALL).passed());
        let cubic = verify_assumptions(&CubicTanh, &Assumption::ALL);
        for a in [Assumption::A1, Assumption::A2, Assumption::A3] {
            assert!(cubic.get(a).unwrap().passed, "{a:?}: {:?}", cubic.get(a));
        }
        let a4 = cubic.get(Assumption::A4).unwrap();
        assert!(!a4.passed);
        let x = a4.witness.unwrap();
        // oracle: the witness breaks concavity or the |psi(x)| < |x| bound
        let convex = CubicTanh.d2(x) * x.signum() >= 0.0;
        let above = (x + x.powi(3)).tanh().abs() >= x.abs();
        assert!(convex || above, "{x}");
    }

    #[test]
    fn non_odd_custom_fails_a1() {
        let f = CustomPsi {
            name: "shifted".into(),
            value: Arc::new(|x: f64| (x + 0.1).tanh()),
            d1: Arc::new(|x: f64| 1.0 / (x + 0.1).cosh().powi(2)),
            d2: Arc::new(|_| 0.0),
            d3: Arc::new(|_| 0.0),
        };
        let r = verify_assumptions(&f, &[Assumption::A1, Assumption::A2]);
        assert!(!r.get(Assumption::A1).unwrap().passed);
        assert!(!r.get(Assumption::A2).unwrap().passed);
    }

    #[test]
    fn saturate_at_twenty_for_exponential_builtins() {
        for f in [&Boltzmann as &dyn Saturation, &CubicTanh] {
            assert!((f.value(20.0) - 1.0).abs() < 1e-8);
            assert!((f.value(-20.0) + 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn derivative_chain_matches_central_differences() {
        let h = 1e-5;
        for (kind, f) in builtins() {
            for x in verification_grid() {
                let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(1.0);
                let fd1 = (f.value(x + h) - f.value(x - h)) / (2.0 * h);
                assert!(rel(f.d1(x), fd1) < 1e-6, "{kind:?} d1 at {x}");
                if kind == PsiKind::MichaelisMenten && x.abs() <= 2.0 * h {
                    continue;
                }
                let fd2 = (f.d1(x + h) - f.d1(x - h)) / (2.0 * h);
                let fd3 = (f.d2(x + h) - f.d2(x - h)) / (2.0 * h);
                assert!(rel(f.d2(x), fd2) < 1e-6, "{kind:?} d2 at {x}");
                assert!(
                    rel(f.d3(x), fd3) < 1e-6,
                    "{kind:?} d3 at {x}: {} vs {fd3}",
                    f.d3(x)
                );
            }
        }
    }

    #[test]
    fn ratio_bounded_by_mu_on_grid() {
        for (kind, f) in builtins() {
            let fam = SigmoidFamily::builtin(kind).unwrap();
            for x in verification_grid().into_iter().filter(|&x| x != 0.0) {
                let r = f.value(x) / x;
                assert!(r > 0.0 && r <= fam.mu() + 1e-12, "{kind:?} at {x}");
                if fam.is_sigmoidal() {
                    assert!(f.value(x).abs() < x.abs());
                }
            }
        }
    }

    #[test]
    fn beta_negative_for_smooth_sigmoids() {
        let b = SigmoidFamily::boltzmann();
        assert!(b.beta(0).unwrap() < 0.0);
        assert!(SigmoidFamily::builtin(PsiKind::MichaelisMenten)
            .unwrap()
            .beta(0)
            .is_none());
    }

    #[test]
    fn heterogeneous_family() {
        let fam =
            SigmoidFamily::heterogeneous(vec![Arc::new(Boltzmann), Arc::new(MichaelisMenten)]);
        assert!(!fam.is_identical());
        assert!(fam.is_sigmoidal());
        assert_eq!(fam.node_count(), Some(2));
        assert_eq!(fam.eval(1, 1.0), 0.5);
        let mixed = SigmoidFamily::heterogeneous(vec![Arc::new(Boltzmann), Arc::new(CubicTanh)]);
        assert!(!mixed.is_sigmoidal());
        assert!(mixed.mu() > 1.0);
    }
}
