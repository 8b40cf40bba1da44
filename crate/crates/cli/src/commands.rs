use std::fs;
use std::path::Path;

use multieq::dynamics::{
    ensemble_run, integrate, EnsembleOptions, IntegrateOptions, Sampler, SystemInstance,
};
use multieq::equilibria::{
    check_norm_bound, multistart_census, necessary_condition_a, necessary_condition_h, Census,
    CensusOptions, NewtonOptions, Stability,
};
use multieq::fixtures::example1_matrix;
use multieq::network::{load_network, LoadOptions};
use multieq::nonlinearity::{verify_assumptions, Assumption};
use multieq::seeding::derive_seed;
use multieq::spectral::{gersgorin_panels, spectral_summary};
use multieq::sweep::{
    example1_report, example2_report, pi_sweep, stability_label, write_census, write_gersgorin,
    Example1Options, Example2Options, SweepOptions,
};
use multieq::{Error, Result, SigmoidFamily, WeightedNetwork};
use serde::Serialize;
use serde_json::json;

use crate::{Cli, Command, Common};

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn network(common: &Common) -> Result<WeightedNetwork> {
    let opts = LoadOptions {
        symmetrizer_tol: common.tol_symmetrizer,
        ..Default::default()
    };
    match &common.input {
        Some(path) => load_network(path, opts),
        None => WeightedNetwork::with_options(example1_matrix(), opts),
    }
}

fn newton(common: &Common) -> NewtonOptions {
    NewtonOptions {
        tol: common.tol_newton,
        ..Default::default()
    }
}

fn psi(common: &Common) -> Result<SigmoidFamily> {
    SigmoidFamily::builtin(common.psi)
}

pub fn run(cli: &Cli) -> Result<()> {
    let common = &cli.common;
    let command = cli.command.as_ref().expect("resolved config has a command");
    fs::create_dir_all(&common.out)?;
    write_json(&common.out.join("config.json"), cli)?;
    match command {
        Command::Analyze { pi } => analyze(common, *pi),
        Command::Equilibria {
            pi,
            starts,
            box_scale,
        } => equilibria(common, *pi, *starts, *box_scale),
        Command::Sweep {
            pi_grid,
            starts,
            no_warm_start,
        } => {
            let net = network(common)?;
            let opts = SweepOptions {
                starts_per_pi: *starts,
                seed: common.seed,
                warm_start: !no_warm_start,
                census: CensusOptions {
                    newton: newton(common),
                    ..Default::default()
                },
            };
            let result = pi_sweep(&net, &psi(common)?, &pi_grid.values(), &opts)?;
            result.write(&common.out, &spectral_summary(&net)?.eigs_h1)?;
            println!(
                "{:>10} {:>8} {:>8} {:>7} {:>6}",
                "pi", "equilib", "orthants", "stable", "mixed"
            );
            for s in &result.per_pi {
                println!(
                    "{:>10.4} {:>8} {:>8} {:>7} {:>6}",
                    s.pi, s.equilibrium_count, s.orthant_count, s.stable_count, s.mixed_count
                );
            }
            Ok(())
        }
        Command::Simulate {
            pi,
            starts,
            half_width,
            t_max,
            census_starts,
            trajectories,
        } => simulate(
            common,
            *pi,
            *starts,
            *half_width,
            *t_max,
            *census_starts,
            *trajectories,
        ),
        Command::Example1 {
            starts,
            pi,
            ensemble_starts,
        } => {
            let opts = Example1Options {
                pi_list: pi.clone(),
                starts: *starts,
                seed: common.seed,
                ensemble_starts: *ensemble_starts,
                ..Default::default()
            };
            let rep = example1_report(&opts)?;
            rep.write(&common.out)?;
            println!("rho(A)       {:.4}", rep.spectral.rho_a);
            println!("lambda5(A)   {:.4}", rep.spectral.lambda2nd_a);
            println!("lambda5(H1)  {:.4}", rep.spectral.lambda2nd_h1);
            println!("pi2          {:.4}", rep.pi2);
            println!(
                "lambda2(L~)  {:.4} at pi = {}",
                rep.ltilde_lambda2, opts.figure_pi
            );
            for c in &rep.censuses {
                print_census_line(c);
            }
            let hits: Vec<String> = rep
                .ensemble
                .attractors
                .iter()
                .map(|t| format!("{}:{}", t.orthant, t.count))
                .collect();
            println!(
                "ensemble     {} unresolved {}",
                hits.join(" "),
                rep.ensemble.unresolved
            );
            Ok(())
        }
        Command::Example2 {
            n,
            p,
            w_lo,
            w_hi,
            pi_grid,
            starts,
            paper_scale,
        } => {
            let mut opts = Example2Options {
                n: *n,
                p: *p,
                weight_range: (*w_lo, *w_hi),
                grid: *pi_grid,
                starts: *starts,
                seed: common.seed,
            };
            if *paper_scale {
                opts = opts.paper_scale();
            }
            let rep = example2_report(&opts)?;
            rep.write(&common.out)?;
            println!("pi2 {:.4}", rep.sweep.pi2);
            for c in &rep.sweep.censuses {
                print_census_line(c);
            }
            println!(
                "mean norm ratio: stable {:.4}, unstable {:.4}",
                rep.mean_ratio_stable.unwrap_or(f64::NAN),
                rep.mean_ratio_unstable.unwrap_or(f64::NAN)
            );
            Ok(())
        }
    }
}

fn print_census_line(c: &Census) {
    let max_ratio = c
        .records
        .iter()
        .filter_map(|r| r.norm_ratio)
        .fold(0.0, f64::max);
    println!(
        "pi {:>8.4}  equilibria {:>5}  orthants {:>5}  stable {:>4}  max ratio {:.4}",
        c.pi,
        c.count(),
        c.orthant_count(),
        c.stable_count(),
        max_ratio
    );
}

fn analyze(common: &Common, pi: Option<f64>) -> Result<()> {
    let net = network(common)?;
    let summary = spectral_summary(&net)?;
    let psi = psi(common)?;
    let f = psi.shared().expect("built-in families are identical");
    let assumptions = verify_assumptions(f, &Assumption::ALL);
    write_json(
        &common.out.join("validation.json"),
        &json!({
            "n": net.n(),
            "irreducible": true,
            "symmetrizer": net.symmetrizer().map(|d| d.as_slice().to_vec()),
            "symmetrizer_residual": net.symmetrizer_residual(),
            "delta_min": net.delta_min(),
            "delta_max": net.delta_max(),
            "psi": common.psi,
            "psi_assumptions": assumptions,
            "mu": psi.mu(),
        }),
    )?;
    let panel_pi = pi.unwrap_or(if summary.pi2.is_finite() {
        summary.pi2
    } else {
        1.0
    });
    let cond_a = necessary_condition_a(&summary.eigs_a, net.delta().as_slice(), panel_pi, psi.mu());
    write_json(
        &common.out.join("summary.json"),
        &json!({
            "spectral": summary,
            "pi1": 1.0,
            "pi": panel_pi,
            "necessary_condition_h": necessary_condition_h(&summary, panel_pi),
            "necessary_condition_a": cond_a,
        }),
    )?;
    write_gersgorin(&common.out, &gersgorin_panels(&net, panel_pi)?)?;

    println!("n                   {}", net.n());
    println!("rho(A)              {:.6}", summary.rho_a);
    println!("lambda_(n-1)(A)     {:.6}", summary.lambda2nd_a);
    println!("lambda_(n-1)(H1)    {:.6}", summary.lambda2nd_h1);
    println!("pi2                 {:.6}", summary.pi2);
    println!("alg. connectivity   {:.6}", summary.alg_conn);
    println!("simple              {}", summary.lambda2nd_simple);
    Ok(())
}

fn census_at(
    common: &Common,
    pi: f64,
    starts: usize,
    box_scale: f64,
    seed: u64,
) -> Result<(SystemInstance, Census)> {
    let sys = SystemInstance::new(network(common)?, psi(common)?, pi)?;
    let opts = CensusOptions {
        n_starts: starts,
        box_scale,
        seed,
        newton: newton(common),
        ..Default::default()
    };
    let census = multistart_census(&sys, &opts, &[])?;
    if !census.records.iter().any(|r| r.is_origin()) {
        return Err(Error::NoConvergence {
            iterations: 0,
            residual: f64::NAN,
        });
    }
    Ok((sys, census))
}

fn equilibria(common: &Common, pi: f64, starts: usize, box_scale: f64) -> Result<()> {
    if !(box_scale > 0.0) {
        return Err(Error::InvalidParameter(
            "--box-scale must be positive".into(),
        ));
    }
    let (_, census) = census_at(common, pi, starts, box_scale, common.seed)?;
    write_census(&common.out, &census)?;
    let bound = check_norm_bound(&census.records, &census.x_plus_state());
    write_json(
        &common.out.join("summary.json"),
        &json!({
            "pi": pi,
            "equilibria": census.count(),
            "orthants": census.orthant_count(),
            "stable": census.stable_count(),
            "mixed": census.mixed().count(),
            "failed_starts": census.failed_starts,
            "closure_violations": census.closure_violations,
            "max_norm_ratio": bound.max_norm_ratio,
            "norm_bound_violations": bound.violations,
        }),
    )?;
    println!(
        "{:>4} {:>8} {:>9} {:>12} {:>10}",
        "#", "orthant", "stability", "residual", "norm ratio"
    );
    for (k, r) in census.records.iter().enumerate() {
        println!(
            "{:>4} {:>8} {:>9} {:>12.2e} {:>10}",
            k,
            r.orthant_string(),
            stability_label(r.stability),
            r.residual,
            r.norm_ratio.map_or("-".into(), |v| format!("{v:.4}"))
        );
    }
    print_census_line(&census);
    Ok(())
}

fn simulate(
    common: &Common,
    pi: f64,
    starts: usize,
    half_width: f64,
    t_max: f64,
    census_starts: usize,
    trajectories: usize,
) -> Result<()> {
    if !(half_width > 0.0 && t_max > 0.0) {
        return Err(Error::InvalidParameter(
            "--half-width and --t-max must be positive".into(),
        ));
    }
    let (sys, census) = census_at(common, pi, census_starts, 1.5, derive_seed(common.seed, 0))?;
    let equilibria: Vec<_> = census.records.iter().map(|r| r.state()).collect();
    let sampler = Sampler::UniformBox { half_width };
    let outcomes = ensemble_run(
        &sys,
        starts,
        sampler,
        common.seed,
        &equilibria,
        &EnsembleOptions {
            t_max,
            ..Default::default()
        },
    );
    write_census(&common.out, &census)?;
    write_json(&common.out.join("ensemble.json"), &outcomes)?;

    let mut attractors = String::from("index,orthant,stability,hits");
    for i in 1..=sys.n() {
        attractors.push_str(&format!(",x{i}"));
    }
    attractors.push('\n');
    for (k, r) in census.records.iter().enumerate() {
        let hits = outcomes.iter().filter(|o| o.attractor == Some(k)).count();
        attractors.push_str(&format!(
            "{k},{},{},{hits}",
            r.orthant_string(),
            stability_label(r.stability)
        ));
        for v in &r.x {
            attractors.push_str(&format!(",{v}"));
        }
        attractors.push('\n');
    }
    fs::write(common.out.join("attractors.csv"), attractors)?;

    let traj_dir = common.out.join("trajectories");
    fs::create_dir_all(&traj_dir)?;
    for k in 0..trajectories.min(starts) {
        let x0 = sampler.sample(sys.n(), common.seed, k as u64);
        let traj = integrate(&sys, &x0, t_max, &IntegrateOptions::default())?;
        fs::write(traj_dir.join(format!("traj_{k}.csv")), traj.to_csv())?;
    }

    let unresolved = outcomes.iter().filter(|o| o.attractor.is_none()).count();
    println!(
        "{:>4} {:>8} {:>9} {:>6}",
        "#", "orthant", "stability", "hits"
    );
    for (k, r) in census.records.iter().enumerate() {
        let hits = outcomes.iter().filter(|o| o.attractor == Some(k)).count();
        if hits > 0 || r.stability == Stability::Stable {
            println!(
                "{:>4} {:>8} {:>9} {:>6}",
                k,
                r.orthant_string(),
                stability_label(r.stability),
                hits
            );
        }
    }
    println!("unresolved {unresolved} of {starts}");
    Ok(())
}
