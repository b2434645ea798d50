//! Independent comparators: brute-force grid search at tiny scale and a
//! projected gradient attack for lower bounds.
//!
//! Any feasible point evaluates the true objective, so attack results are
//! always valid lower bounds regardless of how good the attack is; the grid
//! oracle is exhaustive up to its spacing and refuses dimensions above 3.

use crate::error::{Result, VerifyError};
use crate::input_sets::InputSet;
use crate::linalg;
use crate::network::{forward, ActivationKind, Network};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Exhaustive grid maximum of c . output + d over the set.
#[derive(Debug, Clone)]
pub struct GridOracleResult {
    pub value: f64,
    pub argmax: Vec<f64>,
    /// Largest distance between adjacent grid points along any axis; the
    /// true optimum exceeds `value` by at most the objective's Lipschitz
    /// constant times half the grid cell diagonal.
    pub spacing: f64,
}

/// Brute-force maximization over the bounding-box grid intersected with the
/// set. Refuses dimension > 3; uses an odd per-axis point count so centered
/// sets keep their center (and axis segments of cardinality sets) on the
/// grid.
pub fn grid_oracle(
    net: &Network,
    c: &[f64],
    d: f64,
    set: &InputSet,
    resolution: usize,
) -> Result<GridOracleResult> {
    let dim = set.dim();
    if dim > 3 {
        return Err(VerifyError::OracleRefused(format!(
            "grid oracle supports dimension <= 3, got {dim}"
        )));
    }
    if resolution < 10 {
        return Err(VerifyError::InvalidConfig(format!(
            "grid resolution must be at least 10 points per axis, got {resolution}"
        )));
    }
    if c.len() != net.output_dim() || dim != net.input_dim() {
        return Err(VerifyError::Shape(
            "grid oracle constraint/set widths do not match network".into(),
        ));
    }
    let n = if resolution % 2 == 0 {
        resolution + 1
    } else {
        resolution
    };
    let (lo, hi) = set.bounding_box();
    let spacing = lo
        .iter()
        .zip(&hi)
        .map(|(&l, &h)| (h - l) / (n - 1) as f64)
        .fold(0.0f64, f64::max);
    let membership_tol = 1e-9 * (1.0 + linalg::norm_inf(&hi).max(linalg::norm_inf(&lo)));

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut idx = vec![0usize; dim];
    let mut x = vec![0.0f64; dim];
    'sweep: loop {
        for a in 0..dim {
            x[a] = if lo[a] == hi[a] {
                lo[a]
            } else {
                lo[a] + (hi[a] - lo[a]) * idx[a] as f64 / (n - 1) as f64
            };
        }
        if set.contains(&x, membership_tol) {
            let value = linalg::dot(c, forward(net, &x)?.output()) + d;
            if best.as_ref().is_none_or(|(bv, _)| value > *bv) {
                best = Some((value, x.clone()));
            }
        }
        // Odometer increment.
        let mut axis = 0;
        loop {
            if axis == dim {
                break 'sweep;
            }
            idx[axis] += 1;
            if idx[axis] < n {
                break;
            }
            idx[axis] = 0;
            axis += 1;
        }
    }
    let (value, argmax) = best.expect("the set center is always on the grid");
    Ok(GridOracleResult {
        value,
        argmax,
        spacing,
    })
}

/// Gradient of c . output with respect to the input, by reverse
/// accumulation through the layer recurrences. ReLU's subgradient at 0 is
/// fixed to 0 and max-pool routes to the first maximal coordinate of each
/// group, so the result is deterministic.
pub fn objective_gradient(net: &Network, x: &[f64], c: &[f64]) -> Result<Vec<f64>> {
    if c.len() != net.output_dim() {
        return Err(VerifyError::Shape(format!(
            "constraint length {} != network output width {}",
            c.len(),
            net.output_dim()
        )));
    }
    let trace = forward(net, x)?;
    let mut grad = c.to_vec();
    for (l, layer) in net.layers().iter().enumerate().rev() {
        let z = &trace.pre[l];
        let pre_grad: Vec<f64> = match layer.activation() {
            ActivationKind::MaxPool(g) => {
                let mut out = vec![0.0; z.len()];
                for (group, start) in (0..z.len()).step_by(g).enumerate() {
                    let mut arg = start;
                    for j in start + 1..start + g {
                        if z[j] > z[arg] {
                            arg = j;
                        }
                    }
                    out[arg] = grad[group];
                }
                out
            }
            ActivationKind::Relu => z
                .iter()
                .zip(&grad)
                .map(|(&zi, &gi)| if zi > 0.0 { gi } else { 0.0 })
                .collect(),
            kind => z
                .iter()
                .zip(&grad)
                .map(|(&zi, &gi)| gi * kind.scalar_deriv(zi, 1).expect("smooth kind"))
                .collect(),
        };
        grad = linalg::mat_t_vec(layer.weights(), &pre_grad);
    }
    Ok(grad)
}

/// Projected gradient ascent settings.
#[derive(Debug, Clone)]
pub struct AttackConfig {
    pub steps: usize,
    /// Additional uniformly random starts beyond the deterministic start at
    /// the set center.
    pub restarts: usize,
    /// Step size; when absent, 2.5 * (half the widest bounding-box axis) /
    /// steps.
    pub step_size: Option<f64>,
    pub seed: u64,
}

impl Default for AttackConfig {
    fn default() -> Self {
        AttackConfig {
            steps: 100,
            restarts: 5,
            step_size: None,
            seed: 0,
        }
    }
}

/// A feasible point and the objective value it attains.
#[derive(Debug, Clone)]
pub struct AttackResult {
    pub x_adv: Vec<f64>,
    pub value: f64,
    pub steps: usize,
}

/// Maximizes c . output + d over the set by projected gradient ascent:
/// one run from the set center plus `restarts` random starts, keeping the
/// best iterate seen anywhere. The returned point is always feasible.
pub fn pgd_attack(
    net: &Network,
    c: &[f64],
    d: f64,
    set: &InputSet,
    config: &AttackConfig,
) -> Result<AttackResult> {
    if set.dim() != net.input_dim() {
        return Err(VerifyError::Shape(format!(
            "input set dimension {} != network input width {}",
            set.dim(),
            net.input_dim()
        )));
    }
    let (lo, hi) = set.bounding_box();
    let half_width = lo
        .iter()
        .zip(&hi)
        .map(|(&l, &h)| (h - l) / 2.0)
        .fold(0.0f64, f64::max);
    let alpha = config
        .step_size
        .unwrap_or_else(|| 2.5 * half_width / config.steps.max(1) as f64);
    let value_at = |x: &[f64]| -> Result<f64> {
        Ok(linalg::dot(c, forward(net, x)?.output()) + d)
    };

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut best: Option<(f64, Vec<f64>)> = None;
    for restart in 0..=config.restarts {
        let mut x = if restart == 0 {
            set.center()
        } else {
            set.sample(&mut rng)
        };
        let mut value = value_at(&x)?;
        if best.as_ref().is_none_or(|(bv, _)| value > *bv) {
            best = Some((value, x.clone()));
        }
        for _ in 0..config.steps {
            let g = objective_gradient(net, &x, c)?;
            let stepped: Vec<f64> = x.iter().zip(&g).map(|(&xi, &gi)| xi + alpha * gi).collect();
            x = set.project(&stepped)?;
            value = value_at(&x)?;
            if best.as_ref().is_none_or(|(bv, _)| value > *bv) {
                best = Some((value, x.clone()));
            }
        }
    }
    let (value, x_adv) = best.expect("at least the center start runs");
    debug_assert!(set.contains(&x_adv, 1e-9));
    Ok(AttackResult {
        x_adv,
        value,
        steps: config.steps,
    })
}

/// Grid maximum of mu y - lambda h(y) over n uniform samples including the
/// endpoints. The test-side comparator for the analytic conjugates.
pub fn conjugate_grid(h: impl Fn(f64) -> f64, lambda: f64, mu: f64, lo: f64, hi: f64, n: usize) -> f64 {
    if lo == hi || n < 2 {
        return mu * lo - lambda * h(lo);
    }
    let mut best = f64::NEG_INFINITY;
    for i in 0..n {
        let y = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        best = best.max(mu * y - lambda * h(y));
    }
    best
}
