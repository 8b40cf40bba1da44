//! Parameter sweeps over π, random networks, and the two canned example
//! reports with their plot-ready output files.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{ensemble_run, EnsembleOptions, Sampler, SystemInstance};
use crate::equilibria::{
    alignment, check_norm_bound, check_sign_ratio, multistart_census, necessary_condition_a,
    Census, CensusOptions, NormBoundReport, Stability,
};
use crate::error::{Error, Result};
use crate::fixtures::example1_matrix;
use crate::network::{check_irreducible, WeightedNetwork};
use crate::nonlinearity::SigmoidFamily;
use crate::seeding::derive_seed;
use crate::spectral::{
    fiedler_pair, gersgorin_panels, ltilde_eigenvalues, origin_linearization, spectral_summary,
    GersgorinPanel, SpectralSummary,
};

/// `count` evenly spaced values on `(lo, hi]`; written `lo:hi:count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PiGrid {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl PiGrid {
    pub fn new(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && hi > lo) {
            return Err(Error::InvalidParameter(format!(
                "pi grid needs 0 <= lo < hi, got {lo}:{hi}"
            )));
        }
        Ok(Self { lo, hi, count })
    }

    pub fn values(&self) -> Vec<f64> {
        let span = self.hi - self.lo;
        (1..=self.count)
            .map(|k| {
                if k == self.count {
                    self.hi
                } else {
                    self.lo + span * k as f64 / self.count as f64
                }
            })
            .collect()
    }
}

impl FromStr for PiGrid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::InvalidParameter(format!("expected lo:hi:count, got '{s}'"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let lo = parts[0].trim().parse().map_err(|_| bad())?;
        let hi = parts[1].trim().parse().map_err(|_| bad())?;
        let count = parts[2].trim().parse().map_err(|_| bad())?;
        Self::new(lo, hi, count)
    }
}

impl fmt::Display for PiGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.lo, self.hi, self.count)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepOptions {
    pub starts_per_pi: usize,
    pub seed: u64,
    /// Seed each census with the previous π's equilibria.
    pub warm_start: bool,
    pub census: CensusOptions,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            starts_per_pi: 1000,
            seed: 0,
            warm_start: true,
            census: CensusOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PiSample {
    pub pi: f64,
    pub equilibrium_count: usize,
    pub orthant_count: usize,
    pub stable_count: usize,
    pub mixed_count: usize,
    pub failed_starts: usize,
    pub closure_violations: usize,
    pub norm_ratios: Vec<f64>,
    /// Spectrum of `−I + πH₁`.
    pub origin_eigs: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub pi_values: Vec<f64>,
    pub per_pi: Vec<PiSample>,
    pub pi1: f64,
    #[serde(serialize_with = "crate::spectral::serialize_extended")]
    pub pi2: f64,
    #[serde(skip)]
    pub censuses: Vec<Census>,
}

impl SweepResult {
    /// Smallest sampled π whose census contains a mixed-sign equilibrium.
    pub fn first_mixed_pi(&self) -> Option<f64> {
        self.per_pi.iter().find(|s| s.mixed_count > 0).map(|s| s.pi)
    }
}

fn sample_of(census: &Census, eigs_h1: &[f64]) -> PiSample {
    PiSample {
        pi: census.pi,
        equilibrium_count: census.count(),
        orthant_count: census.orthant_count(),
        stable_count: census.stable_count(),
        mixed_count: census.mixed().count(),
        failed_starts: census.failed_starts,
        closure_violations: census.closure_violations,
        norm_ratios: census.records.iter().filter_map(|r| r.norm_ratio).collect(),
        origin_eigs: origin_linearization(eigs_h1, census.pi),
    }
}

/// Runs a census at every π. Census `k` uses seed `derive_seed(seed, k)`.
pub fn pi_sweep(
    net: &WeightedNetwork,
    psi: &SigmoidFamily,
    pi_values: &[f64],
    opts: &SweepOptions,
) -> Result<SweepResult> {
    if let Some(w) = pi_values.windows(2).find(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(format!(
            "pi grid not increasing at {}",
            w[1]
        )));
    }
    if pi_values.iter().any(|&p| !(p > 0.0)) {
        return Err(Error::InvalidParameter("pi values must be positive".into()));
    }
    let summary = spectral_summary(net)?;
    let census_opts = |k: usize| CensusOptions {
        n_starts: opts.starts_per_pi,
        seed: derive_seed(opts.seed, k as u64),
        ..opts.census.clone()
    };
    let build = |pi: f64| SystemInstance::new(net.clone(), psi.clone(), pi);

    let censuses: Vec<Census> = if opts.warm_start {
        let mut out: Vec<Census> = Vec::with_capacity(pi_values.len());
        for (k, &pi) in pi_values.iter().enumerate() {
            let warm: Vec<DVector<f64>> = out
                .last()
                .map(|c| {
                    c.records
                        .iter()
                        .filter(|r| !r.is_origin())
                        .map(|r| r.state())
                        .collect()
                })
                .unwrap_or_default();
            out.push(multistart_census(&build(pi)?, &census_opts(k), &warm)?);
        }
        out
    } else {
        pi_values
            .par_iter()
            .enumerate()
            .map(|(k, &pi)| multistart_census(&build(pi)?, &census_opts(k), &[]))
            .collect::<Result<_>>()?
    };

    Ok(SweepResult {
        pi_values: pi_values.to_vec(),
        per_pi: censuses
            .iter()
            .map(|c| sample_of(c, &summary.eigs_h1))
            .collect(),
        pi1: 1.0,
        pi2: summary.pi2,
        censuses,
    })
}

/// Undirected Erdős–Rényi graph with one uniform weight per edge, resampled
/// until connected.
pub fn random_network(
    n: usize,
    edge_prob: f64,
    weight_range: (f64, f64),
    seed: u64,
) -> Result<WeightedNetwork> {
    let (lo, hi) = weight_range;
    if n < 2 {
        return Err(Error::TooSmall { n });
    }
    if !(edge_prob > 0.0 && edge_prob <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "edge probability {edge_prob} outside (0, 1]"
        )));
    }
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "weight range [{lo}, {hi}] must be positive"
        )));
    }
    const ATTEMPTS: usize = 1000;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..ATTEMPTS {
        let mut a = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.random::<f64>() < edge_prob {
                    let w = rng.random_range(lo..=hi);
                    a[(i, j)] = w;
                    a[(j, i)] = w;
                }
            }
        }
        if check_irreducible(&a) {
            return WeightedNetwork::new(a);
        }
    }
    Err(Error::InfeasibleAfterRetries { attempts: ATTEMPTS })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Example1Options {
    pub pi_list: Vec<f64>,
    /// Effort used for the Geršgorin panels and the trajectory ensemble.
    pub figure_pi: f64,
    pub starts: usize,
    pub seed: u64,
    pub ensemble_starts: usize,
    pub ensemble_half_width: f64,
    /// π grid for the bifurcation data and the origin-linearization curves.
    pub branch_grid: PiGrid,
}

impl Default for Example1Options {
    fn default() -> Self {
        Self {
            pi_list: vec![0.5, 1.1, 1.5, 1.838],
            figure_pi: 1.838,
            starts: 1000,
            seed: 0,
            ensemble_starts: 100,
            ensemble_half_width: 2.0,
            branch_grid: PiGrid {
                lo: 0.0,
                hi: 2.5,
                count: 50,
            },
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AttractorTally {
    pub orthant: String,
    pub x: Vec<f64>,
    pub count: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnsembleSummary {
    pub pi: f64,
    pub half_width: f64,
    pub starts: usize,
    /// Stable equilibria of the census at this π, with hit counts.
    pub attractors: Vec<AttractorTally>,
    /// Trajectories that ended near an unstable equilibrium.
    pub unstable_hits: usize,
    pub unresolved: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Example1Report {
    pub options: Example1Options,
    pub spectral: SpectralSummary,
    pub fiedler_vector: Vec<f64>,
    pub pi1: f64,
    #[serde(serialize_with = "crate::spectral::serialize_extended")]
    pub pi2: f64,
    /// `λ₂(Δ − πA)` at the figure effort.
    pub ltilde_lambda2: f64,
    pub condition_a_witness: Option<f64>,
    pub gersgorin: Vec<GersgorinPanel>,
    pub censuses: Vec<Census>,
    pub norm_bound: NormBoundReport,
    /// Mixed-sign records with some `ψ(x̄ᵢ)/x̄ᵢ < 1/π`.
    pub sign_ratio_violations: usize,
    pub ensemble: EnsembleSummary,
    #[serde(skip)]
    pub branches: SweepResult,
}

pub fn example1_report(opts: &Example1Options) -> Result<Example1Report> {
    let net = WeightedNetwork::new(example1_matrix())?;
    let psi = SigmoidFamily::boltzmann();
    let spectral = spectral_summary(&net)?;
    let fiedler = fiedler_pair(&net)?;

    let mut pis = opts.pi_list.clone();
    if !pis.contains(&opts.figure_pi) {
        pis.push(opts.figure_pi);
    }
    let census_opts = |k: usize| CensusOptions {
        n_starts: opts.starts,
        seed: derive_seed(opts.seed, k as u64),
        ..Default::default()
    };
    let censuses: Vec<Census> = pis
        .iter()
        .enumerate()
        .map(|(k, &pi)| {
            multistart_census(
                &SystemInstance::new(net.clone(), psi.clone(), pi)?,
                &census_opts(k),
                &[],
            )
        })
        .collect::<Result<_>>()?;

    let mut norm_bound = NormBoundReport {
        violations: Vec::new(),
        max_norm_ratio: 0.0,
        max_component_ratio: 0.0,
    };
    let mut sign_ratio_violations = 0;
    for c in &censuses {
        let sys = SystemInstance::new(net.clone(), psi.clone(), c.pi)?;
        let rep = check_norm_bound(&c.records, &c.x_plus_state());
        norm_bound.violations.extend(rep.violations);
        norm_bound.max_norm_ratio = norm_bound.max_norm_ratio.max(rep.max_norm_ratio);
        norm_bound.max_component_ratio =
            norm_bound.max_component_ratio.max(rep.max_component_ratio);
        sign_ratio_violations += c
            .mixed()
            .filter(|r| !check_sign_ratio(&sys, r).holds)
            .count();
    }

    let fig_census = censuses
        .iter()
        .find(|c| c.pi == opts.figure_pi)
        .expect("figure effort is always censused");
    let fig_sys = SystemInstance::new(net.clone(), psi.clone(), opts.figure_pi)?;
    let candidates: Vec<DVector<f64>> = fig_census.records.iter().map(|r| r.state()).collect();
    let outcomes = ensemble_run(
        &fig_sys,
        opts.ensemble_starts,
        Sampler::UniformBox {
            half_width: opts.ensemble_half_width,
        },
        derive_seed(opts.seed, u64::MAX),
        &candidates,
        &EnsembleOptions::default(),
    );
    let mut attractors: Vec<AttractorTally> = fig_census
        .records
        .iter()
        .filter(|r| r.stability == Stability::Stable)
        .map(|r| AttractorTally {
            orthant: r.orthant_string(),
            x: r.x.clone(),
            count: 0,
        })
        .collect();
    let (mut unstable_hits, mut unresolved) = (0, 0);
    for o in &outcomes {
        match o.attractor.map(|k| &fig_census.records[k]) {
            Some(r) if r.stability == Stability::Stable => {
                if let Some(t) = attractors.iter_mut().find(|t| t.x == r.x) {
                    t.count += 1;
                }
            }
            Some(_) => unstable_hits += 1,
            None => unresolved += 1,
        }
    }

    let branches = pi_sweep(
        &net,
        &psi,
        &opts.branch_grid.values(),
        &SweepOptions {
            starts_per_pi: opts.starts.min(200),
            seed: derive_seed(opts.seed, u64::MAX - 1),
            ..Default::default()
        },
    )?;

    Ok(Example1Report {
        options: opts.clone(),
        fiedler_vector: fiedler.right.as_slice().to_vec(),
        pi1: 1.0,
        pi2: spectral.pi2,
        ltilde_lambda2: ltilde_eigenvalues(&net, opts.figure_pi)?[1],
        condition_a_witness: necessary_condition_a(
            &spectral.eigs_a,
            net.delta().as_slice(),
            opts.figure_pi,
            1.0,
        )
        .witness,
        gersgorin: gersgorin_panels(&net, opts.figure_pi)?,
        spectral,
        censuses,
        norm_bound,
        sign_ratio_violations,
        ensemble: EnsembleSummary {
            pi: opts.figure_pi,
            half_width: opts.ensemble_half_width,
            starts: opts.ensemble_starts,
            attractors,
            unstable_hits,
            unresolved,
        },
        branches,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Example2Options {
    pub n: usize,
    pub p: f64,
    pub weight_range: (f64, f64),
    pub grid: PiGrid,
    pub starts: usize,
    pub seed: u64,
}

impl Default for Example2Options {
    fn default() -> Self {
        Self {
            n: 20,
            p: 0.1,
            weight_range: (0.1, 1.0),
            grid: PiGrid {
                lo: 1.0,
                hi: 20.0,
                count: 50,
            },
            starts: 1000,
            seed: 42,
        }
    }
}

impl Example2Options {
    /// `10⁴` starts at each of 500 efforts.
    pub fn paper_scale(mut self) -> Self {
        self.starts = 10_000;
        self.grid.count = 500;
        self
    }
}

/// One point of the polar distribution plot.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PolarPoint {
    pub pi: f64,
    pub norm_ratio: f64,
    pub unstable_dim: usize,
    pub negative_fraction: f64,
    pub stable: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Example2Report {
    pub options: Example2Options,
    pub adjacency: Vec<Vec<f64>>,
    pub spectral: SpectralSummary,
    pub sweep: SweepResult,
    pub polar: Vec<PolarPoint>,
    pub mean_ratio_stable: Option<f64>,
    pub mean_ratio_unstable: Option<f64>,
    /// Smallest `|cos∠(x̄, v₂)|` over the mixed records at the first effort
    /// where any appear.
    pub onset_alignment: Option<f64>,
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

pub fn example2_report(opts: &Example2Options) -> Result<Example2Report> {
    let net = random_network(opts.n, opts.p, opts.weight_range, opts.seed)?;
    let psi = SigmoidFamily::boltzmann();
    let spectral = spectral_summary(&net)?;
    let sweep = pi_sweep(
        &net,
        &psi,
        &opts.grid.values(),
        &SweepOptions {
            starts_per_pi: opts.starts,
            seed: opts.seed,
            ..Default::default()
        },
    )?;
    let mut polar = Vec::new();
    let (mut stable, mut unstable) = (Vec::new(), Vec::new());
    for c in &sweep.censuses {
        for r in &c.records {
            let Some(ratio) = r.norm_ratio else { continue };
            let is_stable = r.stability == Stability::Stable;
            if is_stable {
                stable.push(ratio);
            } else {
                unstable.push(ratio);
            }
            polar.push(PolarPoint {
                pi: c.pi,
                norm_ratio: ratio,
                unstable_dim: r.unstable_dimension(),
                negative_fraction: r.negative_fraction(),
                stable: is_stable,
            });
        }
    }
    let onset_alignment = fiedler_pair(&net).ok().and_then(|f| {
        sweep
            .censuses
            .iter()
            .find(|c| c.mixed().next().is_some())
            .map(|c| {
                c.mixed()
                    .map(|r| alignment(&r.x, &f.right))
                    .fold(1.0, f64::min)
            })
    });
    Ok(Example2Report {
        options: opts.clone(),
        adjacency: net
            .adjacency()
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect(),
        spectral,
        mean_ratio_stable: mean(&stable),
        mean_ratio_unstable: mean(&unstable),
        sweep,
        polar,
        onset_alignment,
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    Ok(csv::Writer::from_path(path)?)
}

/// Writes `census_pi_<value>.csv` and `census_pi_<value>.json`.
pub fn write_census(dir: &Path, census: &Census) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(
        dir.join(format!("census_pi_{}.csv", census.pi)),
        census.to_csv(),
    )?;
    write_json(&dir.join(format!("census_pi_{}.json", census.pi)), census)
}

/// Eigenvalues of `−I + πH₁` along a π grid, one column per eigenvalue.
pub fn write_origin_eigs(path: &Path, eigs_h1: &[f64], pis: &[f64]) -> Result<()> {
    let mut w = csv_writer(path)?;
    let mut header = vec!["pi".to_string()];
    header.extend((1..=eigs_h1.len()).map(|i| format!("eig{i}")));
    w.write_record(&header)?;
    for &pi in pis {
        let mut row = vec![pi.to_string()];
        row.extend(
            origin_linearization(eigs_h1, pi)
                .iter()
                .map(|v| v.to_string()),
        );
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_gersgorin(dir: &Path, panels: &[GersgorinPanel]) -> Result<()> {
    for p in panels {
        let mut w = csv_writer(&dir.join(format!("fig2_disks_{}.csv", p.label)))?;
        w.write_record(["kind", "row", "center", "radius", "pi"])?;
        for d in &p.disks {
            w.write_record([
                "disk".to_string(),
                d.row_index.to_string(),
                d.center.to_string(),
                d.radius.to_string(),
                p.pi.to_string(),
            ])?;
        }
        for (k, e) in p.eigenvalues.iter().enumerate() {
            w.write_record([
                "eigenvalue".to_string(),
                k.to_string(),
                e.to_string(),
                "0".into(),
                p.pi.to_string(),
            ])?;
        }
        w.flush()?;
    }
    Ok(())
}

fn write_counts(path: &Path, sweep: &SweepResult) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record([
        "pi",
        "equilibria",
        "orthants",
        "stable",
        "mixed",
        "failed_starts",
    ])?;
    for s in &sweep.per_pi {
        w.write_record([
            s.pi.to_string(),
            s.equilibrium_count.to_string(),
            s.orthant_count.to_string(),
            s.stable_count.to_string(),
            s.mixed_count.to_string(),
            s.failed_starts.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn write_branches(path: &Path, sweep: &SweepResult) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["pi", "index", "norm", "orthant", "stability"])?;
    for c in &sweep.censuses {
        for (k, r) in c.records.iter().enumerate() {
            w.write_record([
                c.pi.to_string(),
                k.to_string(),
                r.norm().to_string(),
                r.orthant_string(),
                stability_label(r.stability).to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn stability_label(s: Stability) -> &'static str {
    match s {
        Stability::Stable => "stable",
        Stability::Unstable => "unstable",
        Stability::Marginal => "marginal",
    }
}

impl SweepResult {
    /// `summary.json`, `fig3a_counts.csv`, `fig1b_eigs.csv` and one census
    /// file pair per π.
    pub fn write(&self, dir: &Path, eigs_h1: &[f64]) -> Result<()> {
        fs::create_dir_all(dir)?;
        write_json(&dir.join("summary.json"), self)?;
        write_counts(&dir.join("fig3a_counts.csv"), self)?;
        write_origin_eigs(&dir.join("fig1b_eigs.csv"), eigs_h1, &self.pi_values)?;
        for c in &self.censuses {
            write_census(dir, c)?;
        }
        Ok(())
    }
}

impl Example1Report {
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        write_json(&dir.join("summary.json"), self)?;
        for c in &self.censuses {
            write_census(dir, c)?;
        }
        write_gersgorin(dir, &self.gersgorin)?;
        write_origin_eigs(
            &dir.join("fig1b_eigs.csv"),
            &self.spectral.eigs_h1,
            &self.branches.pi_values,
        )?;
        write_branches(&dir.join("fig1a_branches.csv"), &self.branches)?;
        write_json(&dir.join("fig1c_ensemble.json"), &self.ensemble)
    }
}

impl Example2Report {
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        write_json(&dir.join("summary.json"), self)?;
        write_counts(&dir.join("fig3a_counts.csv"), &self.sweep)?;
        write_origin_eigs(
            &dir.join("fig1b_eigs.csv"),
            &self.spectral.eigs_h1,
            &self.sweep.pi_values,
        )?;
        let mut w = csv_writer(&dir.join("fig3b_ratios.csv"))?;
        w.write_record(["pi", "norm_ratio", "stable"])?;
        for p in &self.polar {
            w.write_record([
                p.pi.to_string(),
                p.norm_ratio.to_string(),
                p.stable.to_string(),
            ])?;
        }
        w.flush()?;
        let mut w = csv_writer(&dir.join("fig3c_polar.csv"))?;
        w.write_record([
            "pi",
            "norm_ratio",
            "unstable_dim",
            "negative_fraction",
            "stable",
        ])?;
        for p in &self.polar {
            w.write_record([
                p.pi.to_string(),
                p.norm_ratio.to_string(),
                p.unstable_dim.to_string(),
                p.negative_fraction.to_string(),
                p.stable.to_string(),
            ])?;
        }
        w.flush()?;
        for c in &self.sweep.censuses {
            write_census(dir, c)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing_and_values() {
        let g: PiGrid = "1:5:4".parse().unwrap();
        assert_eq!(g.values(), vec![2.0, 3.0, 4.0, 5.0]);
        assert_eq!(g.to_string(), "1:5:4");
        assert!("1:5".parse::<PiGrid>().is_err());
        assert!("5:1:3".parse::<PiGrid>().is_err());
        assert!("1:x:3".parse::<PiGrid>().is_err());
        assert!(PiGrid::new(1.0, 2.0, 0).unwrap().values().is_empty());
    }

    #[test]
    fn empty_sweep() {
        let net = WeightedNetwork::new(example1_matrix()).unwrap();
        let r = pi_sweep(
            &net,
            &SigmoidFamily::boltzmann(),
            &[],
            &SweepOptions::default(),
        )
        .unwrap();
        assert!(r.per_pi.is_empty() && r.pi_values.is_empty());
    }

    #[test]
    fn rejects_non_increasing_grid() {
        let net = WeightedNetwork::new(example1_matrix()).unwrap();
        assert!(pi_sweep(
            &net,
            &SigmoidFamily::boltzmann(),
            &[1.5, 1.2],
            &SweepOptions::default()
        )
        .is_err());
    }

    #[test]
    fn example1_sweep_counts() {
        let net = WeightedNetwork::new(example1_matrix()).unwrap();
        let opts = SweepOptions {
            starts_per_pi: 300,
            seed: 4,
            ..Default::default()
        };
        let r = pi_sweep(&net, &SigmoidFamily::boltzmann(), &[0.5, 1.1, 1.5], &opts).unwrap();
        let counts: Vec<usize> = r.per_pi.iter().map(|s| s.equilibrium_count).collect();
        assert_eq!(&counts[..2], &[1, 3]);
        assert!(counts[2] > 3);
        assert_eq!(r.pi1, 1.0);
        let eigs = spectral_summary(&net).unwrap().eigs_h1;
        for s in &r.per_pi {
            for (e, h) in s.origin_eigs.iter().zip(&eigs) {
                assert!((e - (s.pi * h - 1.0)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn warm_and_cold_sweeps_agree_on_counts() {
        let net = WeightedNetwork::new(example1_matrix()).unwrap();
        let grid = [1.1, 1.3, 1.6];
        let mut opts = SweepOptions {
            starts_per_pi: 400,
            seed: 1,
            ..Default::default()
        };
        let warm = pi_sweep(&net, &SigmoidFamily::boltzmann(), &grid, &opts).unwrap();
        opts.warm_start = false;
        let cold = pi_sweep(&net, &SigmoidFamily::boltzmann(), &grid, &opts).unwrap();
        for (a, b) in warm.per_pi.iter().zip(&cold.per_pi) {
            assert_eq!(a.equilibrium_count, b.equilibrium_count, "pi = {}", a.pi);
        }
    }

    #[test]
    fn threshold_bracketing_near_pi2() {
        let net = WeightedNetwork::new(example1_matrix()).unwrap();
        let pi2 = spectral_summary(&net).unwrap().pi2;
        let grid = PiGrid::new(pi2 * 0.95, pi2 * 1.05, 20).unwrap();
        let step = (grid.hi - grid.lo) / grid.count as f64;
        let opts = SweepOptions {
            starts_per_pi: 300,
            seed: 11,
            ..Default::default()
        };
        let r = pi_sweep(&net, &SigmoidFamily::boltzmann(), &grid.values(), &opts).unwrap();
        let first = r.first_mixed_pi().unwrap();
        assert!(
            first >= pi2 * 0.98 && first <= pi2 + step,
            "{first} vs {pi2}"
        );
        let after = r.per_pi.iter().find(|s| s.pi > pi2).unwrap();
        assert!(after.equilibrium_count >= 5);
        let crossing = r
            .per_pi
            .iter()
            .map(|s| s.origin_eigs[4] > 0.0)
            .collect::<Vec<_>>();
        for (s, c) in r.per_pi.iter().zip(crossing) {
            assert_eq!(c, s.pi > pi2);
        }
    }

    #[test]
    fn random_network_is_symmetric_and_connected() {
        let net = random_network(20, 0.1, (0.1, 1.0), 42).unwrap();
        let a = net.adjacency();
        assert_eq!(a, &a.transpose());
        assert!(a.iter().all(|&v| v == 0.0 || (0.1..=1.0).contains(&v)));
        assert_eq!(net.symmetrizer().unwrap(), &DVector::from_element(20, 1.0));
        let again = random_network(20, 0.1, (0.1, 1.0), 42).unwrap();
        assert_eq!(again.adjacency(), a);
    }

    #[test]
    fn random_network_edge_cases() {
        let k = random_network(5, 1.0, (0.5, 0.5), 0).unwrap();
        assert!(k.adjacency().iter().filter(|&&v| v > 0.0).count() == 20);
        let two = random_network(2, 1.0, (1.0, 1.0), 0).unwrap();
        assert_eq!(two.adjacency()[(0, 1)], 1.0);
        assert!(matches!(
            random_network(30, 1e-6, (0.1, 1.0), 0),
            Err(Error::InfeasibleAfterRetries { .. })
        ));
        assert!(random_network(1, 0.5, (0.1, 1.0), 0).is_err());
        assert!(random_network(4, 0.0, (0.1, 1.0), 0).is_err());
    }

    #[test]
    fn example1_report_contents() {
        let opts = Example1Options {
            starts: 300,
            seed: 3,
            ensemble_starts: 20,
            branch_grid: PiGrid::new(0.0, 2.0, 8).unwrap(),
            ..Default::default()
        };
        let rep = example1_report(&opts).unwrap();
        assert!((rep.spectral.rho_a - 0.706).abs() < 1.5e-3);
        assert!((rep.pi2 - 1.216).abs() < 1.5e-3);
        assert!((rep.ltilde_lambda2 + 0.302).abs() < 1.5e-3);
        assert_eq!(rep.gersgorin.len(), 4);
        assert_eq!(rep.censuses.len(), 4);
        assert!(rep.norm_bound.violations.is_empty());
        assert_eq!(rep.sign_ratio_violations, 0);
        assert_eq!(rep.ensemble.attractors.len(), 4);
        let hits: usize = rep.ensemble.attractors.iter().map(|t| t.count).sum();
        assert_eq!(
            hits + rep.ensemble.unresolved + rep.ensemble.unstable_hits,
            20
        );

        let dir = tempfile::tempdir().unwrap();
        rep.write(dir.path()).unwrap();
        for name in [
            "summary.json",
            "fig1b_eigs.csv",
            "fig1a_branches.csv",
            "fig2_disks_a.csv",
            "fig2_disks_d.csv",
            "census_pi_1.838.csv",
        ] {
            assert!(dir.path().join(name).exists(), "{name}");
        }
    }

    #[test]
    fn example2_small_report() {
        let opts = Example2Options {
            n: 8,
            p: 0.4,
            grid: PiGrid::new(1.0, 6.0, 5).unwrap(),
            starts: 200,
            seed: 5,
            ..Default::default()
        };
        let rep = example2_report(&opts).unwrap();
        assert!(rep.polar.iter().all(|p| p.norm_ratio <= 1.0 + 1e-8));
        for s in &rep.sweep.per_pi {
            if s.pi < rep.sweep.pi2 {
                assert_eq!(s.mixed_count, 0);
            }
        }
        let dir = tempfile::tempdir().unwrap();
        rep.write(dir.path()).unwrap();
        for name in [
            "summary.json",
            "fig3a_counts.csv",
            "fig3b_ratios.csv",
            "fig3c_polar.csv",
        ] {
            assert!(dir.path().join(name).exists(), "{name}");
        }
        let counts = fs::read_to_string(dir.path().join("fig3a_counts.csv")).unwrap();
        assert_eq!(counts.lines().count(), 6);
    }
}
