//! Specification layer: builds verification specs, orchestrates
//! bounds -> dual solve -> attack into verdicts, and the label-switch
//! dynamic program.

use crate::bounds::{interval_propagate, tighten_bounds, ActivationBounds};
use crate::dual::{minimize_dual, DualConfig};
use crate::error::{Result, VerifyError};
use crate::input_sets::{InputSet, Norm};
use crate::network::{forward, Network};
use crate::oracles::{pgd_attack, AttackConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// One linear output constraint c . output + d <= 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputConstraint {
    pub c: Vec<f64>,
    pub d: f64,
}

/// An input set together with the output constraints to verify over it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecDoc")]
pub struct VerificationSpec {
    pub input_set: InputSet,
    pub constraints: Vec<OutputConstraint>,
}

#[derive(Deserialize)]
struct SpecDoc {
    input_set: InputSet,
    constraints: Vec<OutputConstraint>,
}

impl TryFrom<SpecDoc> for VerificationSpec {
    type Error = VerifyError;
    fn try_from(doc: SpecDoc) -> Result<Self> {
        VerificationSpec::new(doc.input_set, doc.constraints)
    }
}

impl VerificationSpec {
    pub fn new(input_set: InputSet, constraints: Vec<OutputConstraint>) -> Result<Self> {
        if constraints.is_empty() {
            return Err(VerifyError::InvalidSpec(
                "specification needs at least one output constraint".into(),
            ));
        }
        Ok(VerificationSpec {
            input_set,
            constraints,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Verified,
    Falsified,
    Unknown,
}

/// Per-constraint outcome. Verified exactly when the certified upper bound
/// is strictly negative; falsified exactly when the attack found a strictly
/// positive violation.
///
/// Attack-only runs certify nothing, leaving `upper_bound` infinite; JSON
/// carries that as null.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintVerdict {
    #[serde(with = "maybe_infinite")]
    pub upper_bound: f64,
    pub lower_bound: f64,
    pub status: Status,
    pub iterations_used: usize,
}

mod maybe_infinite {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

impl ConstraintVerdict {
    pub fn from_bounds(upper_bound: f64, lower_bound: f64, iterations_used: usize) -> Self {
        let status = if upper_bound < 0.0 {
            Status::Verified
        } else if lower_bound > 0.0 {
            Status::Falsified
        } else {
            Status::Unknown
        };
        ConstraintVerdict {
            upper_bound,
            lower_bound,
            status,
            iterations_used,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictReport {
    pub schema_version: u32,
    pub constraints: Vec<ConstraintVerdict>,
}

impl VerdictReport {
    pub fn all_verified(&self) -> bool {
        self.constraints
            .iter()
            .all(|v| v.status == Status::Verified)
    }

    pub fn any_falsified(&self) -> bool {
        self.constraints
            .iter()
            .any(|v| v.status == Status::Falsified)
    }
}

/// Pipeline settings for [`verify`].
#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub dual_iterations: usize,
    pub alpha0: f64,
    /// Per-neuron dual budget for bound tightening; None skips tightening.
    pub tighten: Option<usize>,
    pub attack_steps: usize,
    pub attack_restarts: usize,
    pub attack_step_size: Option<f64>,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            dual_iterations: 200,
            alpha0: 0.1,
            tighten: None,
            attack_steps: 100,
            attack_restarts: 5,
            attack_step_size: None,
            seed: 0,
        }
    }
}

impl VerifyConfig {
    fn dual(&self) -> DualConfig {
        DualConfig {
            iterations: self.dual_iterations,
            alpha0: self.alpha0,
            seed: self.seed,
        }
    }

    fn attack(&self, constraint_index: usize) -> AttackConfig {
        AttackConfig {
            steps: self.attack_steps,
            restarts: self.attack_restarts,
            step_size: self.attack_step_size,
            seed: self
                .seed
                .wrapping_mul(0x9e37_79b9_7f4a_7c15)
                .wrapping_add(constraint_index as u64),
        }
    }
}

/// Targeted-attack spec: the perturbation ball around the nominal input and
/// the constraint (logit of target) - (logit of true label) <= 0.
pub fn spec_targeted_attack(
    x_nom: &[f64],
    epsilon: f64,
    p: Norm,
    true_label: usize,
    target_label: usize,
    num_labels: usize,
) -> Result<VerificationSpec> {
    if true_label >= num_labels || target_label >= num_labels {
        return Err(VerifyError::InvalidSpec(format!(
            "labels {true_label}/{target_label} out of range for {num_labels} outputs"
        )));
    }
    let mut c = vec![0.0; num_labels];
    c[target_label] += 1.0;
    c[true_label] -= 1.0;
    VerificationSpec::new(
        InputSet::norm_ball(p, x_nom.to_vec(), epsilon)?,
        vec![OutputConstraint { c, d: 0.0 }],
    )
}

/// Monotonicity spec over the box [x_nom, x_nom + delta] for a scalar
/// output: violation is output(x_nom) - output(x), which is non-positive
/// for every x in the box exactly when the network never dips below its
/// value at the nominal input there. The maximum violation is 0 (attained
/// at the nominal corner), so the strict Verified status is unreachable by
/// construction; the certified upper bound itself quantifies how far from
/// monotone the network can be.
pub fn spec_monotone(x_nom: &[f64], delta: &[f64], net: &Network) -> Result<VerificationSpec> {
    if net.output_dim() != 1 {
        return Err(VerifyError::InvalidSpec(format!(
            "monotone specs need a scalar output, got width {}",
            net.output_dim()
        )));
    }
    if delta.len() != x_nom.len() || delta.iter().any(|&d| d < 0.0) {
        return Err(VerifyError::InvalidSpec(
            "monotone spec deltas must be non-negative and match the input width".into(),
        ));
    }
    let upper: Vec<f64> = x_nom.iter().zip(delta).map(|(&x, &d)| x + d).collect();
    let nominal = forward(net, x_nom)?.output()[0];
    VerificationSpec::new(
        InputSet::box_set(x_nom.to_vec(), upper)?,
        vec![OutputConstraint {
            c: vec![-1.0],
            d: nominal,
        }],
    )
}

/// Targeted attack restricted to at most k perturbed coordinates.
pub fn spec_cardinality(
    x_nom: &[f64],
    epsilon: f64,
    k: usize,
    true_label: usize,
    target_label: usize,
    num_labels: usize,
) -> Result<VerificationSpec> {
    let targeted =
        spec_targeted_attack(x_nom, epsilon, Norm::LInf, true_label, target_label, num_labels)?;
    VerificationSpec::new(
        InputSet::cardinality(x_nom.to_vec(), epsilon, k)?,
        targeted.constraints,
    )
}

/// Runs the full pipeline: bounding box -> interval bounds -> optional
/// dual tightening -> per-constraint dual upper bounds and attack lower
/// bounds. Constraints are independent and solved in parallel.
pub fn verify(net: &Network, spec: &VerificationSpec, config: &VerifyConfig) -> Result<VerdictReport> {
    let bounds = prepare_bounds(net, &spec.input_set, config)?;
    let verdicts: Vec<Result<ConstraintVerdict>> = spec
        .constraints
        .par_iter()
        .enumerate()
        .map(|(i, constraint)| verify_constraint(net, spec, &bounds, config, i, constraint))
        .collect();
    let mut constraints = Vec::with_capacity(verdicts.len());
    for v in verdicts {
        constraints.push(v?);
    }
    Ok(VerdictReport {
        schema_version: 1,
        constraints,
    })
}

fn prepare_bounds(
    net: &Network,
    set: &InputSet,
    config: &VerifyConfig,
) -> Result<ActivationBounds> {
    let (lo, hi) = set.bounding_box();
    let bounds = interval_propagate(net, &lo, &hi)?;
    match config.tighten {
        Some(budget) if budget > 0 => tighten_bounds(net, set, &bounds, budget),
        _ => Ok(bounds),
    }
}

fn verify_constraint(
    net: &Network,
    spec: &VerificationSpec,
    bounds: &ActivationBounds,
    config: &VerifyConfig,
    index: usize,
    constraint: &OutputConstraint,
) -> Result<ConstraintVerdict> {
    let solve = minimize_dual(
        net,
        &constraint.c,
        constraint.d,
        &spec.input_set,
        bounds,
        &config.dual(),
    )?;
    let attack = pgd_attack(
        net,
        &constraint.c,
        constraint.d,
        &spec.input_set,
        &config.attack(index),
    )?;
    debug_assert!(attack.value <= solve.best_bound + 1e-6);
    Ok(ConstraintVerdict::from_bounds(
        solve.best_bound,
        attack.value,
        config.dual_iterations,
    ))
}

/// Adversarial error accounting over a labeled dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRates {
    /// Fraction misclassified at the nominal inputs.
    pub clean_error: f64,
    /// Fraction for which at least one targeted constraint could not be
    /// verified: an upper bound on the true adversarial error rate.
    pub certified_upper: f64,
    /// Fraction for which the attack found a working adversarial input:
    /// a lower bound on the true adversarial error rate.
    pub attack_lower: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

/// Labeled example for [`certified_error_rate`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LabeledExample {
    pub x: Vec<f64>,
    pub label: usize,
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Verifies every target-label constraint for every example and aggregates
/// the three rates. Examples are independent and processed in parallel.
pub fn certified_error_rate(
    net: &Network,
    dataset: &[LabeledExample],
    epsilon: f64,
    p: Norm,
    config: &VerifyConfig,
) -> Result<ErrorRates> {
    if dataset.is_empty() {
        return Ok(ErrorRates {
            clean_error: 0.0,
            certified_upper: 0.0,
            attack_lower: 0.0,
            warning: Some("empty dataset: rates reported as 0".into()),
        });
    }
    let num_labels = net.output_dim();
    let flags: Vec<Result<(bool, bool, bool)>> = dataset
        .par_iter()
        .enumerate()
        .map(|(i, example)| {
            if example.label >= num_labels {
                return Err(VerifyError::InvalidSpec(format!(
                    "label {} out of range for {num_labels} outputs",
                    example.label
                )));
            }
            let clean_pred = argmax(forward(net, &example.x)?.output());
            let clean_err = clean_pred != example.label;
            let set = InputSet::norm_ball(p, example.x.clone(), epsilon)?;
            let bounds = prepare_bounds(net, &set, config)?;
            let mut not_verified = false;
            let mut falsified = false;
            for target in 0..num_labels {
                if target == example.label {
                    continue;
                }
                let mut c = vec![0.0; num_labels];
                c[target] = 1.0;
                c[example.label] = -1.0;
                let solve = minimize_dual(net, &c, 0.0, &set, &bounds, &config.dual())?;
                if !(solve.best_bound < 0.0) {
                    not_verified = true;
                    let attack =
                        pgd_attack(net, &c, 0.0, &set, &config.attack(i * num_labels + target))?;
                    if attack.value > 0.0 {
                        falsified = true;
                    }
                }
            }
            Ok((clean_err, not_verified, falsified))
        })
        .collect();
    let mut clean = 0usize;
    let mut upper = 0usize;
    let mut lower = 0usize;
    for f in flags {
        let (c, u, l) = f?;
        clean += c as usize;
        upper += u as usize;
        lower += l as usize;
    }
    let n = dataset.len() as f64;
    Ok(ErrorRates {
        clean_error: clean as f64 / n,
        certified_upper: upper as f64 / n,
        attack_lower: lower as f64 / n,
        warning: None,
    })
}

/// Labels reachable from a nominal input under perturbations: the sound
/// over-approximation (every target whose targeted constraint was not
/// verified, plus the clean prediction) and the attack-witnessed
/// under-approximation (labels actually attained at feasible points).
pub fn reachable_labels(
    net: &Network,
    x_nom: &[f64],
    epsilon: f64,
    p: Norm,
    config: &VerifyConfig,
) -> Result<(BTreeSet<usize>, BTreeSet<usize>)> {
    let num_labels = net.output_dim();
    let clean_pred = argmax(forward(net, x_nom)?.output());
    let set = InputSet::norm_ball(p, x_nom.to_vec(), epsilon)?;
    let bounds = prepare_bounds(net, &set, config)?;
    let mut upper = BTreeSet::from([clean_pred]);
    let mut witnessed = BTreeSet::from([clean_pred]);
    for target in 0..num_labels {
        if target == clean_pred {
            continue;
        }
        let mut c = vec![0.0; num_labels];
        c[target] = 1.0;
        c[clean_pred] = -1.0;
        let solve = minimize_dual(net, &c, 0.0, &set, &bounds, &config.dual())?;
        if !(solve.best_bound < 0.0) {
            // Could not prove the target unreachable.
            upper.insert(target);
            let attack = pgd_attack(net, &c, 0.0, &set, &config.attack(target))?;
            let landed = argmax(forward(net, &attack.x_adv)?.output());
            witnessed.insert(landed);
        }
    }
    Ok((upper, witnessed))
}

/// Maximum number of label switches over a sequence of reachable-label
/// sets, by dynamic programming: best[t][y] = max over y' reachable at t-1
/// of best[t-1][y'] + [y' != y].
pub fn max_label_switches(reachable: &[BTreeSet<usize>]) -> Result<usize> {
    if reachable.iter().any(BTreeSet::is_empty) {
        return Err(VerifyError::InvalidSpec(
            "every timestep needs a non-empty reachable label set".into(),
        ));
    }
    let Some(first) = reachable.first() else {
        return Ok(0);
    };
    let mut best: Vec<(usize, usize)> = first.iter().map(|&y| (y, 0)).collect();
    for step in &reachable[1..] {
        best = step
            .iter()
            .map(|&y| {
                let score = best
                    .iter()
                    .map(|&(prev, s)| s + usize::from(prev != y))
                    .max()
                    .unwrap();
                (y, score)
            })
            .collect();
    }
    Ok(best.iter().map(|&(_, s)| s).max().unwrap_or(0))
}
