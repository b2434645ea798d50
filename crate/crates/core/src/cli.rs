//! Command-line front end.
//!
//! Three subcommands over JSON files: `verify` (one spec, per-constraint
//! verdicts), `certify-dataset` (adversarial error rates over labeled
//! examples) and `switches` (bounds on prediction switches over a feature
//! sequence).
//!
//! Exit codes for `verify`: 0 when every constraint is verified, 2 when any
//! constraint is falsified, 1 when any is unknown (and none falsified),
//! 3 on usage or i/o errors. The other subcommands use 0/3.

use crate::error::{Result, VerifyError};
use crate::input_sets::{InputSet, Norm};
use crate::linalg;
use crate::network::{forward, load_network, Network};
use crate::oracles::{grid_oracle, pgd_attack, AttackConfig};
use crate::single_layer::{fixed_point_verify, fold_output_layer, trust_region_bound};
use crate::verifier::{
    certified_error_rate, max_label_switches, reachable_labels, verify, ConstraintVerdict,
    ErrorRates, LabeledExample, VerdictReport, VerificationSpec, VerifyConfig,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

pub const EXIT_VERIFIED: i32 = 0;
pub const EXIT_UNKNOWN: i32 = 1;
pub const EXIT_FALSIFIED: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "dualbound",
    version,
    about = "Certified bounds on worst-case violations of linear output constraints of feedforward networks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Verify the constraints of a spec file over its input set.
    Verify(VerifyArgs),
    /// Clean, certified and attacked error rates over a labeled dataset.
    CertifyDataset(CertifyArgs),
    /// Bound the number of prediction switches over a feature sequence.
    Switches(SwitchesArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Subgradient-optimized dual bound plus projected gradient attack.
    Dual,
    /// Zero-multiplier dual bound (pure interval relaxation) plus attack.
    Interval,
    /// Fixed-point certification for 2-layer smooth nets on 2-norm balls.
    FixedPoint,
    /// Quadratic trust-region bound for 2-layer smooth nets on 2-norm balls.
    TrustRegion,
    /// Attack only: no certificate, the upper bound is reported as null.
    Attack,
    /// Exhaustive grid search (input dimension at most 3).
    Oracle,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Network JSON path.
    #[arg(long)]
    pub net: PathBuf,
    /// Specification JSON path.
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::Dual)]
    pub method: Method,
    /// Dual iterations; doubles as attack steps (attack), fixed-point
    /// iterations (fixed-point) and grid points per axis (oracle).
    #[arg(long, default_value_t = 200)]
    pub iters: usize,
    /// Per-neuron dual budget for bound tightening.
    #[arg(long)]
    pub tighten: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; defaults to the number of logical processors.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Args, Debug)]
pub struct CertifyArgs {
    #[arg(long)]
    pub net: PathBuf,
    /// Dataset JSON path: {"examples": [{"x": [...], "label": n}, ...]}.
    #[arg(long)]
    pub dataset: PathBuf,
    /// Perturbation radius.
    #[arg(long)]
    pub epsilon: f64,
    /// Perturbation norm: 1, 2 or inf.
    #[arg(long, default_value = "inf")]
    pub norm: Norm,
    #[arg(long, default_value_t = 150)]
    pub iters: usize,
    #[arg(long)]
    pub tighten: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Args, Debug)]
pub struct SwitchesArgs {
    #[arg(long)]
    pub net: PathBuf,
    /// Feature sequence JSON path: {"timesteps": [[...], ...]}.
    #[arg(long)]
    pub dataset: PathBuf,
    /// Per-timestep perturbation radius.
    #[arg(long)]
    pub epsilon: f64,
    /// Perturbation norm: 1, 2 or inf.
    #[arg(long, default_value = "inf")]
    pub norm: Norm,
    #[arg(long, default_value_t = 150)]
    pub iters: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub workers: Option<usize>,
}

/// Runs a parsed command line, returning the process exit code. Errors are
/// printed to standard error and map to the usage exit code.
pub fn run(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Verify(args) => with_pool(args.workers, || cmd_verify(&args)),
        Command::CertifyDataset(args) => with_pool(args.workers, || cmd_certify_dataset(&args)),
        Command::Switches(args) => with_pool(args.workers, || cmd_switches(&args)),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("dualbound: {err}");
            EXIT_USAGE
        }
    }
}

fn with_pool<T>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> T
where
    T: Send,
{
    match workers {
        Some(n) if n > 0 => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("worker pool")
            .install(f),
        _ => f(),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> Result<T> {
    let bytes = fs::read(path)
        .map_err(|e| VerifyError::InvalidConfig(format!("cannot read {what} {path:?}: {e}")))?;
    serde_json::from_slice(&bytes)
        .map_err(|e| VerifyError::InvalidConfig(format!("malformed {what} {path:?}: {e}")))
}

fn write_report<T: Serialize>(out: Option<&Path>, report: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    match out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn verify_exit_code(report: &VerdictReport) -> i32 {
    if report.any_falsified() {
        EXIT_FALSIFIED
    } else if report.all_verified() {
        EXIT_VERIFIED
    } else {
        EXIT_UNKNOWN
    }
}

fn base_config(iters: usize, tighten: Option<usize>, seed: u64) -> VerifyConfig {
    VerifyConfig {
        dual_iterations: iters,
        tighten,
        seed,
        ..VerifyConfig::default()
    }
}

/// `verify` subcommand: writes a per-constraint VerdictReport and exits by
/// the verified/falsified/unknown lattice.
pub fn cmd_verify(args: &VerifyArgs) -> Result<i32> {
    let net: Network = load_network(&fs::read(&args.net).map_err(|e| {
        VerifyError::InvalidConfig(format!("cannot read network {:?}: {e}", args.net))
    })?)?;
    let spec: VerificationSpec = read_json(&args.spec, "spec")?;
    if spec.input_set.dim() != net.input_dim() {
        return Err(VerifyError::Shape(format!(
            "spec input dimension {} != network input width {}",
            spec.input_set.dim(),
            net.input_dim()
        )));
    }
    let config = base_config(args.iters, args.tighten, args.seed);
    let report = match args.method {
        Method::Dual => verify(&net, &spec, &config)?,
        Method::Interval => verify(
            &net,
            &spec,
            &VerifyConfig {
                dual_iterations: 0,
                ..config
            },
        )?,
        Method::Attack => {
            let mut constraints = Vec::with_capacity(spec.constraints.len());
            for (i, con) in spec.constraints.iter().enumerate() {
                let attack = pgd_attack(
                    &net,
                    &con.c,
                    con.d,
                    &spec.input_set,
                    &AttackConfig {
                        steps: args.iters,
                        seed: args.seed.wrapping_add(i as u64),
                        ..AttackConfig::default()
                    },
                )?;
                constraints.push(ConstraintVerdict::from_bounds(
                    f64::INFINITY,
                    attack.value,
                    args.iters,
                ));
            }
            VerdictReport {
                schema_version: 1,
                constraints,
            }
        }
        Method::Oracle => {
            if spec.input_set.dim() > 3 {
                return Err(VerifyError::OracleRefused(format!(
                    "oracle method supports input dimension <= 3, got {}",
                    spec.input_set.dim()
                )));
            }
            let resolution = args.iters.max(10);
            let mut constraints = Vec::with_capacity(spec.constraints.len());
            for con in &spec.constraints {
                let oracle = grid_oracle(&net, &con.c, con.d, &spec.input_set, resolution)?;
                // The grid maximum is attained at a feasible point, so it is
                // an exact lower bound; as an upper bound it is only
                // grid-resolution accurate.
                constraints.push(ConstraintVerdict::from_bounds(
                    oracle.value,
                    oracle.value,
                    resolution,
                ));
            }
            VerdictReport {
                schema_version: 1,
                constraints,
            }
        }
        Method::FixedPoint | Method::TrustRegion => {
            single_layer_report(&net, &spec, args)?
        }
    };
    write_report(args.out.as_deref(), &report)?;
    Ok(verify_exit_code(&report))
}

fn single_layer_report(
    net: &Network,
    spec: &VerificationSpec,
    args: &VerifyArgs,
) -> Result<VerdictReport> {
    let InputSet::NormBall {
        p: Norm::L2,
        center,
        radius,
    } = &spec.input_set
    else {
        return Err(VerifyError::InvalidSpec(
            "fixed-point and trust-region methods need a 2-norm ball input set".into(),
        ));
    };
    let mut constraints = Vec::with_capacity(spec.constraints.len());
    for con in &spec.constraints {
        let problem = fold_output_layer(net, &con.c, con.d, center, *radius)?;
        let verdict = match args.method {
            Method::FixedPoint => {
                let fp = fixed_point_verify(&problem, args.iters.max(1), 1e-12)?;
                if fp.guaranteed {
                    // The iterate is the global maximizer: its value is both
                    // the certificate and the attained bound.
                    ConstraintVerdict::from_bounds(fp.value, fp.value, fp.iterates.len())
                } else {
                    ConstraintVerdict::from_bounds(f64::INFINITY, fp.value, fp.iterates.len())
                }
            }
            Method::TrustRegion => {
                let tr = trust_region_bound(&problem)?;
                // The model maximizer is feasible, so the true objective
                // there is a valid lower bound.
                let x_adv: Vec<f64> = center.iter().zip(&tr.z_star).map(|(c, z)| c + z).collect();
                let lower = linalg::dot(&con.c, forward(net, &x_adv)?.output()) + con.d;
                ConstraintVerdict::from_bounds(tr.upper_bound, lower, 1)
            }
            _ => unreachable!("only single-layer methods reach here"),
        };
        constraints.push(verdict);
    }
    Ok(VerdictReport {
        schema_version: 1,
        constraints,
    })
}

#[derive(Deserialize)]
struct DatasetDoc {
    examples: Vec<LabeledExample>,
}

#[derive(Serialize)]
struct CertifyReport {
    schema_version: u32,
    clean_error: f64,
    certified_upper: f64,
    attack_lower: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    warning: Option<String>,
}

/// `certify-dataset` subcommand: emits {clean_error, certified_upper,
/// attack_lower}.
pub fn cmd_certify_dataset(args: &CertifyArgs) -> Result<i32> {
    let net: Network = load_network(&fs::read(&args.net).map_err(|e| {
        VerifyError::InvalidConfig(format!("cannot read network {:?}: {e}", args.net))
    })?)?;
    let dataset: DatasetDoc = read_json(&args.dataset, "dataset")?;
    let config = base_config(args.iters, args.tighten, args.seed);
    let ErrorRates {
        clean_error,
        certified_upper,
        attack_lower,
        warning,
    } = certified_error_rate(&net, &dataset.examples, args.epsilon, args.norm, &config)?;
    assert!(
        certified_upper >= attack_lower,
        "certified upper bound fell below the attack rate"
    );
    write_report(
        args.out.as_deref(),
        &CertifyReport {
            schema_version: 1,
            clean_error,
            certified_upper,
            attack_lower,
            warning,
        },
    )?;
    Ok(EXIT_VERIFIED)
}

#[derive(Deserialize)]
struct FeatureSequenceDoc {
    timesteps: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct SwitchesReport {
    schema_version: u32,
    max_switches_upper: usize,
    max_switches_lower: usize,
}

/// `switches` subcommand: reachable-label sets per timestep (verified upper
/// approximation, attack-witnessed lower approximation), then the switch
/// dynamic program on both.
pub fn cmd_switches(args: &SwitchesArgs) -> Result<i32> {
    let net: Network = load_network(&fs::read(&args.net).map_err(|e| {
        VerifyError::InvalidConfig(format!("cannot read network {:?}: {e}", args.net))
    })?)?;
    let doc: FeatureSequenceDoc = read_json(&args.dataset, "feature sequence")?;
    if doc.timesteps.is_empty() {
        return Err(VerifyError::InvalidSpec(
            "feature sequence has no timesteps".into(),
        ));
    }
    let config = base_config(args.iters, None, args.seed);
    let mut upper_sets: Vec<BTreeSet<usize>> = Vec::with_capacity(doc.timesteps.len());
    let mut lower_sets: Vec<BTreeSet<usize>> = Vec::with_capacity(doc.timesteps.len());
    for x in &doc.timesteps {
        let (upper, witnessed) = reachable_labels(&net, x, args.epsilon, args.norm, &config)?;
        upper_sets.push(upper);
        lower_sets.push(witnessed);
    }
    let max_switches_upper = max_label_switches(&upper_sets)?;
    let max_switches_lower = max_label_switches(&lower_sets)?;
    assert!(
        max_switches_upper >= max_switches_lower,
        "witnessed switches exceeded the verified bound"
    );
    write_report(
        args.out.as_deref(),
        &SwitchesReport {
            schema_version: 1,
            max_switches_upper,
            max_switches_lower,
        },
    )?;
    Ok(EXIT_VERIFIED)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verifier::Status;

    #[test]
    fn exit_codes_follow_the_lattice() {
        let verdict = |s: Status| ConstraintVerdict {
            upper_bound: 0.0,
            lower_bound: 0.0,
            status: s,
            iterations_used: 0,
        };
        let report = |statuses: &[Status]| VerdictReport {
            schema_version: 1,
            constraints: statuses.iter().map(|&s| verdict(s)).collect(),
        };
        assert_eq!(
            verify_exit_code(&report(&[Status::Verified, Status::Verified])),
            EXIT_VERIFIED
        );
        assert_eq!(
            verify_exit_code(&report(&[Status::Verified, Status::Unknown])),
            EXIT_UNKNOWN
        );
        assert_eq!(
            verify_exit_code(&report(&[Status::Unknown, Status::Falsified])),
            EXIT_FALSIFIED
        );
    }

    #[test]
    fn cli_parses_the_documented_flags() {
        let cli = Cli::try_parse_from([
            "dualbound",
            "verify",
            "--net",
            "net.json",
            "--spec",
            "spec.json",
            "--method",
            "trust-region",
            "--iters",
            "50",
            "--tighten",
            "10",
            "--seed",
            "7",
            "--workers",
            "2",
        ])
        .unwrap();
        match cli.command {
            Command::Verify(args) => {
                assert_eq!(args.method, Method::TrustRegion);
                assert_eq!(args.iters, 50);
                assert_eq!(args.tighten, Some(10));
            }
            _ => panic!("expected verify"),
        }
        let cli = Cli::try_parse_from([
            "dualbound",
            "certify-dataset",
            "--net",
            "net.json",
            "--dataset",
            "data.json",
            "--epsilon",
            "0.1",
            "--norm",
            "2",
        ])
        .unwrap();
        match cli.command {
            Command::CertifyDataset(args) => assert_eq!(args.norm, Norm::L2),
            _ => panic!("expected certify-dataset"),
        }
    }
}
