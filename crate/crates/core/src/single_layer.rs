//! Specialized certifiers for single-hidden-layer networks with smooth
//! activations over a 2-norm input ball.
//!
//! Two routes with a-priori guarantees:
//!
//! - a normalized-gradient fixed-point iteration that converges to the true
//!   worst case whenever the radius is below nu / (2 L), where nu is the
//!   gradient norm at the nominal input and L the Lipschitz constant of the
//!   objective's gradient;
//! - a second-order expansion at the nominal pre-activations whose exact
//!   trust-region maximum, padded by kappa * epsilon^3, certifies the true
//!   optimum for every radius.

use crate::error::{Result, VerifyError};
use crate::linalg;
use crate::network::{smoothness_constants, ActivationKind, Network};
use nalgebra::{DMatrix, DVector};

/// max of sum_i c_i h(W_i x + b_i) + offset over the 2-norm ball of radius
/// epsilon around x_nom.
///
/// `offset` carries constants folded out of an output layer so reported
/// values stay comparable with the original network objective.
#[derive(Debug, Clone)]
pub struct SingleLayerProblem {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    pub c: Vec<f64>,
    pub x_nom: Vec<f64>,
    pub epsilon: f64,
    pub activation: ActivationKind,
    pub offset: f64,
}

impl SingleLayerProblem {
    pub fn new(
        weights: Vec<Vec<f64>>,
        bias: Vec<f64>,
        c: Vec<f64>,
        x_nom: Vec<f64>,
        epsilon: f64,
        activation: ActivationKind,
        offset: f64,
    ) -> Result<Self> {
        if !matches!(activation, ActivationKind::Sigmoid | ActivationKind::Tanh) {
            return Err(VerifyError::UnsupportedActivation {
                kind: activation.to_string(),
                op: "single-layer certification",
            });
        }
        let n = weights.len();
        if n == 0 || bias.len() != n || c.len() != n {
            return Err(VerifyError::Shape(format!(
                "single-layer shapes: {} rows, {} biases, {} objective weights",
                n,
                bias.len(),
                c.len()
            )));
        }
        let d = weights[0].len();
        if weights.iter().any(|r| r.len() != d) || x_nom.len() != d {
            return Err(VerifyError::Shape(
                "single-layer weight rows and nominal input disagree".into(),
            ));
        }
        if !epsilon.is_finite() || epsilon < 0.0 {
            return Err(VerifyError::InvalidConfig(format!(
                "radius must be finite and non-negative, got {epsilon}"
            )));
        }
        Ok(SingleLayerProblem {
            weights,
            bias,
            c,
            x_nom,
            epsilon,
            activation,
            offset,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.x_nom.len()
    }

    fn pre_activations(&self, x: &[f64]) -> Vec<f64> {
        linalg::add(&linalg::matvec(&self.weights, x), &self.bias)
    }

    /// Objective value (offset included).
    pub fn objective(&self, x: &[f64]) -> f64 {
        let z = self.pre_activations(x);
        self.c
            .iter()
            .zip(&z)
            .map(|(&ci, &zi)| ci * self.activation.scalar(zi))
            .sum::<f64>()
            + self.offset
    }

    /// Gradient W^T (c .* h'(W x + b)) of the objective.
    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let z = self.pre_activations(x);
        let scaled: Vec<f64> = self
            .c
            .iter()
            .zip(&z)
            .map(|(&ci, &zi)| ci * self.activation.scalar_deriv(zi, 1).expect("smooth"))
            .collect();
        linalg::mat_t_vec(&self.weights, &scaled)
    }
}

/// Reduces a two-layer network (smooth hidden layer, identity output layer)
/// to a single-layer problem by folding the output layer into the objective
/// weights: c = W1^T c_out, offset = c_out . b1 + d_out.
pub fn fold_output_layer(
    net: &Network,
    c_out: &[f64],
    d_out: f64,
    x_nom: &[f64],
    epsilon: f64,
) -> Result<SingleLayerProblem> {
    if net.num_layers() != 2 {
        return Err(VerifyError::InvalidModel(format!(
            "single-layer certification needs exactly 2 layers, got {}",
            net.num_layers()
        )));
    }
    let hidden = &net.layers()[0];
    let output = &net.layers()[1];
    if output.activation() != ActivationKind::Identity {
        return Err(VerifyError::UnsupportedActivation {
            kind: output.activation().to_string(),
            op: "output layer of a single-layer problem (must be identity)",
        });
    }
    if c_out.len() != net.output_dim() {
        return Err(VerifyError::Shape(format!(
            "constraint length {} != network output width {}",
            c_out.len(),
            net.output_dim()
        )));
    }
    let c = linalg::mat_t_vec(output.weights(), c_out);
    let offset = linalg::dot(c_out, output.bias()) + d_out;
    SingleLayerProblem::new(
        hidden.weights().to_vec(),
        hidden.bias().to_vec(),
        c,
        x_nom.to_vec(),
        epsilon,
        hidden.activation(),
        offset,
    )
}

/// Constants controlling the fixed-point guarantee.
#[derive(Debug, Clone)]
pub struct SmoothnessData {
    /// Gradient norm at the nominal input.
    pub nu: f64,
    /// Lipschitz constant of the gradient:
    /// sigma_max(diag(c) W) * sigma_max(diag(gamma) W).
    pub lipschitz: f64,
    /// Per-neuron curvature bounds sup |h''| (uniform per activation).
    pub gamma: Vec<f64>,
    /// epsilon < nu / (2 lipschitz).
    pub radius_ok: bool,
}

impl SmoothnessData {
    /// Largest radius with the convergence guarantee.
    pub fn radius_threshold(&self) -> f64 {
        if self.lipschitz == 0.0 {
            f64::INFINITY
        } else {
            self.nu / (2.0 * self.lipschitz)
        }
    }

    /// Contraction modulus epsilon L / (nu - epsilon L) of the iteration.
    pub fn contraction(&self, epsilon: f64) -> f64 {
        let el = epsilon * self.lipschitz;
        el / (self.nu - el)
    }
}

/// Computes nu, the gradient Lipschitz constant and the guarantee radius
/// for a problem. Singular values come from power iteration at 1e-9
/// relative tolerance.
pub fn smoothness(problem: &SingleLayerProblem) -> Result<SmoothnessData> {
    let (gamma_scalar, _) = smoothness_constants(problem.activation)?;
    let nu = linalg::norm2(&problem.gradient(&problem.x_nom));
    let scale_rows = |s: &[f64]| -> Vec<Vec<f64>> {
        problem
            .weights
            .iter()
            .zip(s)
            .map(|(row, &si)| linalg::scale(row, si))
            .collect()
    };
    let gamma = vec![gamma_scalar; problem.weights.len()];
    let lipschitz = linalg::sigma_max(&scale_rows(&problem.c), 1e-9, 100_000)
        * linalg::sigma_max(&scale_rows(&gamma), 1e-9, 100_000);
    let radius_ok = if lipschitz == 0.0 {
        nu > 0.0
    } else {
        problem.epsilon < nu / (2.0 * lipschitz)
    };
    Ok(SmoothnessData {
        nu,
        lipschitz,
        gamma,
        radius_ok,
    })
}

/// Outcome of the fixed-point iteration.
#[derive(Debug, Clone)]
pub struct FixedPointResult {
    pub x_star: Vec<f64>,
    /// Objective at `x_star` (offset included). The global optimum when
    /// `guaranteed`; otherwise a feasible lower bound only.
    pub value: f64,
    pub converged: bool,
    /// radius_ok held and the iteration converged without hitting a zero
    /// gradient.
    pub guaranteed: bool,
    /// The gradient vanished at some iterate, stalling the iteration.
    pub stationary_gradient: bool,
    /// Every iterate, starting with the nominal input.
    pub iterates: Vec<Vec<f64>>,
}

/// Iterates x <- x_nom + epsilon * g(x) / |g(x)| from the nominal input.
/// Inside the guarantee radius this contracts to the global maximizer with
/// modulus epsilon L / (nu - epsilon L); outside it the result is labeled
/// heuristic and only valid as an attack-style lower bound.
pub fn fixed_point_verify(
    problem: &SingleLayerProblem,
    max_iters: usize,
    tol: f64,
) -> Result<FixedPointResult> {
    let data = smoothness(problem)?;
    let mut x = problem.x_nom.clone();
    let mut iterates = vec![x.clone()];
    let mut converged = false;
    let mut stationary = false;
    if problem.epsilon == 0.0 {
        return Ok(FixedPointResult {
            value: problem.objective(&x),
            x_star: x,
            converged: true,
            guaranteed: true,
            stationary_gradient: false,
            iterates,
        });
    }
    for _ in 0..max_iters {
        let g = problem.gradient(&x);
        let n = linalg::norm2(&g);
        if n == 0.0 {
            stationary = true;
            break;
        }
        let next = linalg::add(&problem.x_nom, &linalg::scale(&g, problem.epsilon / n));
        let delta = linalg::norm2(&linalg::sub(&next, &x));
        x = next;
        iterates.push(x.clone());
        if delta < tol {
            converged = true;
            break;
        }
    }
    Ok(FixedPointResult {
        value: problem.objective(&x),
        x_star: x,
        converged,
        guaranteed: data.radius_ok && converged && !stationary,
        stationary_gradient: stationary,
        iterates,
    })
}

/// Third-order remainder coefficient:
/// kappa = 1/6 * sum_i eta_i |c_i| |W_i|_2^3.
///
/// |c_i| rather than the signed coefficient: each neuron's remainder is
/// bounded in magnitude, so signs cannot reduce the worst case.
pub fn kappa(problem: &SingleLayerProblem) -> Result<f64> {
    let (_, eta) = smoothness_constants(problem.activation)?;
    Ok(problem
        .weights
        .iter()
        .zip(&problem.c)
        .map(|(row, &ci)| eta * ci.abs() * linalg::norm2(row).powi(3))
        .sum::<f64>()
        / 6.0)
}

/// Certified bound from the quadratic model.
#[derive(Debug, Clone)]
pub struct TrustRegionBound {
    /// Exact maximum of the quadratic model (constant terms and offset
    /// included).
    pub tr_value: f64,
    /// tr_value + kappa * epsilon^3, an upper bound on the true optimum.
    pub upper_bound: f64,
    /// Maximizing input deviation of the quadratic model.
    pub z_star: Vec<f64>,
}

/// Expands the objective to second order in the input deviation z around
/// x_nom: gradient g = W^T (c .* h'(z_nom)), curvature
/// H = W^T diag(c .* h''(z_nom)) W, constant sum_i c_i h(z_nom_i). The
/// model's exact maximum over |z| <= epsilon plus kappa eps^3 certifies
/// the true optimum.
pub fn trust_region_bound(problem: &SingleLayerProblem) -> Result<TrustRegionBound> {
    let z_nom = problem.pre_activations(&problem.x_nom);
    let d = problem.input_dim();
    let mut g = vec![0.0; d];
    let mut h = vec![vec![0.0; d]; d];
    let mut constant = problem.offset;
    for ((row, &ci), &zi) in problem.weights.iter().zip(&problem.c).zip(&z_nom) {
        constant += ci * problem.activation.scalar(zi);
        let h1 = problem.activation.scalar_deriv(zi, 1)?;
        let h2 = problem.activation.scalar_deriv(zi, 2)?;
        for (a, &wa) in row.iter().enumerate() {
            g[a] += ci * h1 * wa;
            for (b, &wb) in row.iter().enumerate() {
                h[a][b] += ci * h2 * wa * wb;
            }
        }
    }
    let (z_star, model_max) = trs_solve(&g, &h, problem.epsilon)?;
    let tr_value = model_max + constant;
    let upper_bound = tr_value + kappa(problem)? * problem.epsilon.powi(3);
    Ok(TrustRegionBound {
        tr_value,
        upper_bound,
        z_star,
    })
}

/// Exact global maximum of g . z + 1/2 z^T H z over the 2-norm ball of
/// radius epsilon.
///
/// Eigendecomposes H and solves the boundary stationarity condition
/// (sigma I - H) z = g for the multiplier sigma >= max(0, lambda_max) by
/// bisection on the monotone norm equation |z(sigma)| = epsilon. When the
/// gradient has no component on the top eigenspace and the remaining
/// solution is interior (the hard case), the solution is padded along a top
/// eigenvector to reach the boundary.
pub fn trs_solve(g: &[f64], h: &[Vec<f64>], epsilon: f64) -> Result<(Vec<f64>, f64)> {
    let d = g.len();
    if h.len() != d || h.iter().any(|row| row.len() != d) {
        return Err(VerifyError::Shape(format!(
            "trust-region curvature must be {d} x {d}"
        )));
    }
    if !epsilon.is_finite() || epsilon < 0.0 {
        return Err(VerifyError::InvalidConfig(format!(
            "trust-region radius must be finite and non-negative, got {epsilon}"
        )));
    }
    let quad = |z: &[f64]| -> f64 {
        let hz = linalg::matvec(h, z);
        linalg::dot(g, z) + 0.5 * linalg::dot(z, &hz)
    };
    if epsilon == 0.0 || d == 0 {
        return Ok((vec![0.0; d], 0.0));
    }

    let mat = DMatrix::from_fn(d, d, |i, j| 0.5 * (h[i][j] + h[j][i]));
    let eig = mat.symmetric_eigen();
    let eigenvalues: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
    let ghat: Vec<f64> = {
        let gv = DVector::from_column_slice(g);
        let proj = eig.eigenvectors.transpose() * gv;
        proj.iter().cloned().collect()
    };
    let lambda_max = eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

    let from_eigen = |coeffs: &[f64]| -> Vec<f64> {
        let cv = DVector::from_column_slice(coeffs);
        let z = &eig.eigenvectors * cv;
        z.iter().cloned().collect()
    };
    // |z(sigma)|^2 with z_i = ghat_i / (sigma - lambda_i), skipping
    // components whose denominator is below `skip` (the top cluster in the
    // hard case).
    let norm2_at = |sigma: f64, skip: f64| -> f64 {
        eigenvalues
            .iter()
            .zip(&ghat)
            .map(|(&li, &gi)| {
                let denom = sigma - li;
                if denom.abs() <= skip {
                    0.0
                } else {
                    (gi / denom).powi(2)
                }
            })
            .sum::<f64>()
            .sqrt()
    };
    let solve_at = |sigma: f64, skip: f64| -> Vec<f64> {
        let coeffs: Vec<f64> = eigenvalues
            .iter()
            .zip(&ghat)
            .map(|(&li, &gi)| {
                let denom = sigma - li;
                if denom.abs() <= skip {
                    0.0
                } else {
                    gi / denom
                }
            })
            .collect();
        from_eigen(&coeffs)
    };

    // Interior stationary point: sigma = 0 needs -H positive semidefinite.
    if lambda_max <= 0.0 {
        let strictly = eigenvalues.iter().all(|&l| l < 0.0);
        if strictly {
            let z = solve_at(0.0, 0.0);
            if linalg::norm2(&z) <= epsilon {
                let value = quad(&z);
                return Ok((z, value));
            }
        } else {
            // Singular concave case: valid interior solution only if the
            // gradient vanishes on the null space.
            let scale = 1.0 + lambda_max.abs() + linalg::norm_inf(&eigenvalues);
            let tol = 1e-12 * scale;
            let null_clean = eigenvalues
                .iter()
                .zip(&ghat)
                .all(|(&li, &gi)| li.abs() > tol || gi.abs() <= 1e-12 * (1.0 + linalg::norm2(g)));
            if null_clean {
                let z = solve_at(0.0, tol);
                if linalg::norm2(&z) <= epsilon {
                    let value = quad(&z);
                    return Ok((z, value));
                }
            }
        }
    }

    // Boundary solution: bisect sigma in (max(0, lambda_max), inf) on the
    // strictly decreasing norm equation. The hard case arises only when the
    // gradient has no component on the floor eigenvalue cluster AND the
    // remaining solution falls short of the sphere; then the multiplier
    // sticks at the floor and the solution is padded along a top
    // eigenvector.
    let sigma_floor = lambda_max.max(0.0);
    let cluster_tol = 1e-10 * (1.0 + sigma_floor.abs());
    let gnorm = linalg::norm2(g);
    let in_cluster =
        |li: f64| -> bool { (li - sigma_floor).abs() <= cluster_tol };
    let cluster_grad_is_zero = eigenvalues
        .iter()
        .zip(&ghat)
        .all(|(&li, &gi)| !in_cluster(li) || gi.abs() <= 1e-10 * (1.0 + gnorm));
    if cluster_grad_is_zero {
        let mut z = solve_at(sigma_floor, cluster_tol);
        if linalg::norm2(&z) < epsilon {
            if let Some(top) = eigenvalues.iter().position(|&l| in_cluster(l)) {
                let mut unit = vec![0.0; d];
                unit[top] = 1.0;
                let dir = from_eigen(&unit);
                let pad = (epsilon * epsilon - linalg::dot(&z, &z)).max(0.0).sqrt();
                for (zi, &di) in z.iter_mut().zip(&dir) {
                    *zi += pad * di;
                }
            }
            let value = quad(&z);
            return Ok((z, value));
        }
    }
    let mut lo_sigma = sigma_floor;
    let mut hi_sigma = sigma_floor.max(1.0);
    let gnorm = linalg::norm2(g);
    while norm2_at(hi_sigma, 0.0) > epsilon {
        hi_sigma = 2.0 * hi_sigma + gnorm / epsilon + 1.0;
    }
    for _ in 0..500 {
        let mid = 0.5 * (lo_sigma + hi_sigma);
        if norm2_at(mid, 0.0) > epsilon {
            lo_sigma = mid;
        } else {
            hi_sigma = mid;
        }
        if hi_sigma - lo_sigma <= 1e-10 * (1.0 + hi_sigma.abs()) {
            break;
        }
    }
    let sigma = hi_sigma;
    let mut z = solve_at(sigma, 0.0);
    // Land exactly on the sphere.
    let n = linalg::norm2(&z);
    if n > 0.0 {
        z = linalg::scale(&z, epsilon / n);
    }
    let value = quad(&z);
    Ok((z, value))
}
