//! Lagrangian dual of the verification problem.
//!
//! Relaxing both layer recurrences (the affine maps with multipliers `mu`,
//! the activations with multipliers `lambda`) decouples the problem into
//! independent box-constrained maximizations: one conjugate subproblem per
//! neuron, one linear term per hidden post-activation vector, and one linear
//! maximization over the input set. For any multiplier values the assembled
//! objective upper-bounds the true worst-case violation, so subgradient
//! descent on the multipliers yields a monotone best-so-far certificate that
//! is valid at every prefix of the iteration.

use crate::bounds::ActivationBounds;
use crate::conjugates::{conjugate, conjugate_maxpool};
use crate::error::{Result, VerifyError};
use crate::input_sets::{f0, InputSet};
use crate::linalg;
use crate::network::{activation_eval, ActivationKind, Network};

/// Multipliers of the dual relaxation.
///
/// `lambda[l]` (layers 0..L-2) has the width of post-activation l+1;
/// `mu[l]` (layers 0..L-1) has the pre-activation width of layer l. The
/// multiplier of the last activation is not stored: the objective fixes it
/// to -c.
#[derive(Debug, Clone, PartialEq)]
pub struct DualVariables {
    pub lambda: Vec<Vec<f64>>,
    pub mu: Vec<Vec<f64>>,
}

impl DualVariables {
    pub fn zeros_for(net: &Network) -> DualVariables {
        let ln = net.num_layers();
        DualVariables {
            lambda: net.layers()[..ln - 1]
                .iter()
                .map(|l| vec![0.0; l.out_dim()])
                .collect(),
            mu: net.layers().iter().map(|l| vec![0.0; l.pre_dim()]).collect(),
        }
    }

    fn matches(&self, net: &Network) -> bool {
        let ln = net.num_layers();
        self.lambda.len() == ln - 1
            && self.mu.len() == ln
            && self
                .lambda
                .iter()
                .zip(net.layers())
                .all(|(v, l)| v.len() == l.out_dim())
            && self
                .mu
                .iter()
                .zip(net.layers())
                .all(|(v, l)| v.len() == l.pre_dim())
    }

    /// In-place step `self += scale * direction`, used by the subgradient
    /// descent with a negative scale.
    fn step(&mut self, scale: f64, dir_lambda: &[Vec<f64>], dir_mu: &[Vec<f64>]) {
        for (row, d) in self.lambda.iter_mut().zip(dir_lambda) {
            for (x, g) in row.iter_mut().zip(d) {
                *x += scale * g;
            }
        }
        for (row, d) in self.mu.iter_mut().zip(dir_mu) {
            for (x, g) in row.iter_mut().zip(d) {
                *x += scale * g;
            }
        }
    }

    /// Convex combination `theta * a + (1 - theta) * b`.
    pub fn blend(a: &DualVariables, b: &DualVariables, theta: f64) -> DualVariables {
        let mix = |x: &[Vec<f64>], y: &[Vec<f64>]| {
            x.iter()
                .zip(y)
                .map(|(r, s)| {
                    r.iter()
                        .zip(s)
                        .map(|(&u, &v)| theta * u + (1.0 - theta) * v)
                        .collect()
                })
                .collect()
        };
        DualVariables {
            lambda: mix(&a.lambda, &b.lambda),
            mu: mix(&a.mu, &b.mu),
        }
    }
}

/// Dual objective value with subgradients and the maximizing box points.
#[derive(Debug, Clone)]
pub struct DualEvaluation {
    pub bound: f64,
    pub subgrad_lambda: Vec<Vec<f64>>,
    pub subgrad_mu: Vec<Vec<f64>>,
    /// Pre-activation maximizers z*, one vector per layer.
    pub pre_witness: Vec<Vec<f64>>,
    /// Post-activation maximizers x*, layers 0..L-1 (layer 0 comes from the
    /// input-set maximization).
    pub post_witness: Vec<Vec<f64>>,
}

fn check_constraint(net: &Network, c: &[f64]) -> Result<()> {
    if c.len() != net.output_dim() {
        return Err(VerifyError::Shape(format!(
            "constraint length {} != network output width {}",
            c.len(),
            net.output_dim()
        )));
    }
    Ok(())
}

/// Evaluates the dual objective at the given multipliers.
///
/// The bound decomposes as: conjugate terms for every pre-activation (the
/// last layer uses -c as its activation multiplier), a closed-form box term
/// per hidden post-activation, the input-set term, plus the constraint
/// offset d. Subgradients come from the maximizer rule: each relaxed
/// equality constraint evaluated at the per-term maximizers.
pub fn dual_objective(
    net: &Network,
    c: &[f64],
    d: f64,
    set: &InputSet,
    bounds: &ActivationBounds,
    duals: &DualVariables,
) -> Result<DualEvaluation> {
    check_constraint(net, c)?;
    bounds.validate_for(net)?;
    if set.dim() != net.input_dim() {
        return Err(VerifyError::Shape(format!(
            "input set dimension {} != network input width {}",
            set.dim(),
            net.input_dim()
        )));
    }
    if !duals.matches(net) {
        return Err(VerifyError::Shape(
            "dual variable widths do not match network".into(),
        ));
    }

    let layers = net.layers();
    let ln = layers.len();
    let mut bound = d;

    // Conjugate terms and pre-activation maximizers.
    let mut pre_witness: Vec<Vec<f64>> = Vec::with_capacity(ln);
    for (l, layer) in layers.iter().enumerate() {
        let neg_c: Vec<f64>;
        let lam: &[f64] = if l + 1 == ln {
            neg_c = c.iter().map(|ci| -ci).collect();
            &neg_c
        } else {
            &duals.lambda[l]
        };
        let mu = &duals.mu[l];
        let lo = &bounds.pre_lower[l];
        let hi = &bounds.pre_upper[l];
        let mut z = vec![0.0; layer.pre_dim()];
        match layer.activation() {
            ActivationKind::MaxPool(g) => {
                for (group, start) in (0..layer.pre_dim()).step_by(g).enumerate() {
                    let r = conjugate_maxpool(
                        lam[group],
                        &mu[start..start + g],
                        &lo[start..start + g],
                        &hi[start..start + g],
                    )?;
                    bound += r.value;
                    z[start..start + g].copy_from_slice(&r.argmax);
                }
            }
            kind => {
                for k in 0..layer.pre_dim() {
                    let r = conjugate(kind, lam[k], mu[k], lo[k], hi[k])?;
                    bound += r.value;
                    z[k] = r.argmax;
                }
            }
        }
        pre_witness.push(z);
    }

    // Input-set term and the box terms of hidden post-activations.
    let mut post_witness: Vec<Vec<f64>> = Vec::with_capacity(ln);
    let (f0_value, x0) = f0(&duals.mu[0], layers[0].weights(), layers[0].bias(), set)?;
    bound += f0_value;
    post_witness.push(x0);
    for l in 1..ln {
        let v = linalg::sub(
            &duals.lambda[l - 1],
            &linalg::mat_t_vec(layers[l].weights(), &duals.mu[l]),
        );
        let mut term = -linalg::dot(layers[l].bias(), &duals.mu[l]);
        // Ties (v = 0) take the lower corner for a deterministic witness.
        let x: Vec<f64> = v
            .iter()
            .zip(bounds.post_lower[l].iter().zip(&bounds.post_upper[l]))
            .map(|(&vi, (&lo, &hi))| {
                let xi = if vi > 0.0 { hi } else { lo };
                term += vi * xi;
                xi
            })
            .collect();
        bound += term;
        post_witness.push(x);
    }

    // Subgradients from the relaxed constraints at the witnesses.
    let mut subgrad_mu = Vec::with_capacity(ln);
    for l in 0..ln {
        let affine = layers[l].affine(&post_witness[l]);
        subgrad_mu.push(linalg::sub(&pre_witness[l], &affine));
    }
    let mut subgrad_lambda = Vec::with_capacity(ln.saturating_sub(1));
    for l in 0..ln - 1 {
        let hz = activation_eval(layers[l].activation(), &pre_witness[l])?;
        subgrad_lambda.push(linalg::sub(&post_witness[l + 1], &hz));
    }

    Ok(DualEvaluation {
        bound,
        subgrad_lambda,
        subgrad_mu,
        pre_witness,
        post_witness,
    })
}

/// Subgradient descent settings. The descent itself is deterministic; the
/// seed only labels the run in reports.
#[derive(Debug, Clone)]
pub struct DualConfig {
    pub iterations: usize,
    /// Base step size, decayed as alpha0 / sqrt(t + 1) and normalized by
    /// the subgradient's infinity norm.
    pub alpha0: f64,
    pub seed: u64,
}

impl Default for DualConfig {
    fn default() -> Self {
        DualConfig {
            iterations: 200,
            alpha0: 0.1,
            seed: 0,
        }
    }
}

/// Result of the dual minimization.
#[derive(Debug, Clone)]
pub struct DualSolve {
    pub best_bound: f64,
    pub best_duals: DualVariables,
    /// Best-so-far bound after the initial evaluation and after each
    /// iteration; non-increasing by construction (length iterations + 1).
    pub history: Vec<f64>,
}

/// Minimizes the dual bound over the multipliers by projected-free
/// subgradient descent from zero. Any prefix of the run yields a valid
/// certificate, so the running minimum is returned along with its
/// multipliers.
pub fn minimize_dual(
    net: &Network,
    c: &[f64],
    d: f64,
    set: &InputSet,
    bounds: &ActivationBounds,
    config: &DualConfig,
) -> Result<DualSolve> {
    let mut duals = DualVariables::zeros_for(net);
    let mut eval = dual_objective(net, c, d, set, bounds, &duals)?;
    let mut best_bound = eval.bound;
    let mut best_duals = duals.clone();
    let mut history = Vec::with_capacity(config.iterations + 1);
    history.push(best_bound);
    for t in 0..config.iterations {
        let gnorm = eval
            .subgrad_lambda
            .iter()
            .chain(&eval.subgrad_mu)
            .map(|v| linalg::norm_inf(v))
            .fold(0.0f64, f64::max);
        let step = config.alpha0 / ((t + 1) as f64).sqrt() / (1.0 + gnorm);
        duals.step(-step, &eval.subgrad_lambda, &eval.subgrad_mu);
        eval = dual_objective(net, c, d, set, bounds, &duals)?;
        if eval.bound < best_bound {
            best_bound = eval.bound;
            best_duals = duals.clone();
        }
        history.push(best_bound);
    }
    Ok(DualSolve {
        best_bound,
        best_duals,
        history,
    })
}

/// Checks convexity of the dual objective along the segment between two
/// multiplier settings at theta in {1/4, 1/2, 3/4}, with 1e-7 slack.
pub fn convexity_probe(
    net: &Network,
    c: &[f64],
    d: f64,
    set: &InputSet,
    bounds: &ActivationBounds,
    duals_a: &DualVariables,
    duals_b: &DualVariables,
) -> Result<bool> {
    let ga = dual_objective(net, c, d, set, bounds, duals_a)?.bound;
    let gb = dual_objective(net, c, d, set, bounds, duals_b)?.bound;
    for theta in [0.25, 0.5, 0.75] {
        let mid = DualVariables::blend(duals_a, duals_b, theta);
        let gm = dual_objective(net, c, d, set, bounds, &mid)?.bound;
        if gm > theta * ga + (1.0 - theta) * gb + 1e-7 {
            return Ok(false);
        }
    }
    Ok(true)
}
