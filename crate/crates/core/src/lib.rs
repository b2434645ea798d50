//! Certified bounds on worst-case violations of linear output constraints
//! of feedforward neural networks over bounded input sets.
//!
//! The engine relaxes both layer recurrences of the network with Lagrange
//! multipliers, which decouples the worst-case search into closed-form
//! per-neuron and per-layer subproblems. Minimizing the resulting convex
//! objective by subgradient descent gives an anytime certificate: every
//! iterate upper-bounds the true worst case. A projected gradient attack
//! supplies matching lower bounds, and two specialized single-hidden-layer
//! certifiers (a convergent fixed-point iteration and an exact trust-region
//! bound with an a-priori cubic gap) cover the smooth small-radius regime
//! with provable tightness.
//!
//! Modules follow the pipeline: [`network`] (models and activations),
//! [`input_sets`] (constraint sets and their linear maximization),
//! [`conjugates`] (per-neuron dual subproblems), [`bounds`] (interval
//! propagation and dual tightening), [`dual`] (objective assembly and
//! subgradient descent), [`single_layer`] (the specialized certifiers),
//! [`oracles`] (brute-force comparators and the attack), [`verifier`]
//! (spec construction and verdict orchestration), [`cli`] (the `dualbound`
//! binary).

pub mod bounds;
pub mod cli;
pub mod conjugates;
pub mod dual;
pub mod error;
pub mod input_sets;
pub mod linalg;
pub mod network;
pub mod oracles;
pub mod single_layer;
pub mod verifier;

pub use bounds::{interval_propagate, tighten_bounds, ActivationBounds};
pub use dual::{dual_objective, minimize_dual, DualConfig, DualEvaluation, DualVariables};
pub use error::{Result, VerifyError};
pub use input_sets::{InputSet, Norm};
pub use network::{forward, load_network, save_network, ActivationKind, Layer, Network, Trace};
pub use oracles::{grid_oracle, pgd_attack, AttackConfig, AttackResult};
pub use single_layer::{
    fixed_point_verify, fold_output_layer, kappa, smoothness, trs_solve, trust_region_bound,
    SingleLayerProblem,
};
pub use verifier::{
    certified_error_rate, max_label_switches, spec_cardinality, spec_monotone,
    spec_targeted_attack, verify, ConstraintVerdict, OutputConstraint, Status, VerdictReport,
    VerificationSpec, VerifyConfig,
};
