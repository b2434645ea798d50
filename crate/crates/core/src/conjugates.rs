//! Per-neuron dual subproblems: max of mu*y - lambda*h(y) over a bounded
//! interval.
//!
//! For ReLU, sigmoid, tanh, ELU and identity the maximum is found exactly by
//! enumerating interval endpoints plus the interior stationary points of the
//! objective. Max-pooling couples a group of coordinates and is solved
//! exactly per group by [`conjugate_maxpool`]. [`conjugate_general`] gives a
//! sound over-approximation for arbitrary scalar nonlinearities.

use crate::error::{Result, VerifyError};
use crate::network::ActivationKind;

/// Treat |lambda| below this as zero to avoid mu/lambda blow-up.
const LAMBDA_EPS: f64 = 1e-12;

/// Outcome of a scalar conjugate solve.
///
/// When `exact` is set, `value` equals the objective at `argmax` (up to
/// floating-point rounding); otherwise `value` is only guaranteed to be an
/// upper bound and `argmax` is the best evaluated witness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConjugateResult {
    pub value: f64,
    pub argmax: f64,
    pub exact: bool,
}

/// Outcome of a max-pool group conjugate solve; always exact.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxPoolConjugate {
    pub value: f64,
    pub argmax: Vec<f64>,
}

fn check_interval(lo: f64, hi: f64) -> Result<()> {
    if !lo.is_finite() || !hi.is_finite() || lo > hi {
        return Err(VerifyError::InvalidInterval {
            lower: lo,
            upper: hi,
        });
    }
    Ok(())
}

/// Maximum of `g` over candidate points. Ties keep the earliest candidate,
/// so listing the lower endpoint first makes tie-breaking deterministic.
fn best_candidate(g: impl Fn(f64) -> f64, candidates: &[f64]) -> (f64, f64) {
    let mut best = (f64::NEG_INFINITY, candidates[0]);
    for &y in candidates {
        let v = g(y);
        if v > best.0 {
            best = (v, y);
        }
    }
    best
}

/// Exact conjugate for ReLU: the objective is piecewise linear with a single
/// breakpoint at 0, so endpoints plus 0 (when interior) suffice.
pub fn conjugate_relu(lambda: f64, mu: f64, lo: f64, hi: f64) -> Result<ConjugateResult> {
    check_interval(lo, hi)?;
    let g = |y: f64| mu * y - lambda * y.max(0.0);
    let mut candidates = vec![lo, hi];
    if lo < 0.0 && 0.0 < hi {
        candidates.push(0.0);
    }
    let (value, argmax) = best_candidate(g, &candidates);
    Ok(ConjugateResult {
        value,
        argmax,
        exact: true,
    })
}

/// Exact conjugate for sigmoid. Interior stationary points exist when
/// mu/lambda lies in [0, 1/4]; they solve s(1-s) = mu/lambda in sigmoid
/// space and are pulled back through the logit before clamping into the
/// interval.
pub fn conjugate_sigmoid(lambda: f64, mu: f64, lo: f64, hi: f64) -> Result<ConjugateResult> {
    check_interval(lo, hi)?;
    let g = |y: f64| mu * y - lambda * ActivationKind::Sigmoid.scalar(y);
    let mut candidates = vec![lo, hi];
    if lambda.abs() >= LAMBDA_EPS {
        let q = mu / lambda;
        if (0.0..=0.25).contains(&q) {
            let root = (1.0 - 4.0 * q).max(0.0).sqrt();
            for s in [(1.0 - root) / 2.0, (1.0 + root) / 2.0] {
                if s > 0.0 && s < 1.0 {
                    let y = (s / (1.0 - s)).ln();
                    candidates.push(y.clamp(lo, hi));
                }
            }
        }
    }
    let (value, argmax) = best_candidate(g, &candidates);
    Ok(ConjugateResult {
        value,
        argmax,
        exact: true,
    })
}

/// Exact conjugate for tanh. Stationarity gives tanh(y)^2 = 1 - mu/lambda,
/// hence the +/- pair of points when mu/lambda lies in [0, 1].
pub fn conjugate_tanh(lambda: f64, mu: f64, lo: f64, hi: f64) -> Result<ConjugateResult> {
    check_interval(lo, hi)?;
    let g = |y: f64| mu * y - lambda * y.tanh();
    let mut candidates = vec![lo, hi];
    if lambda.abs() >= LAMBDA_EPS {
        let q = mu / lambda;
        if (0.0..=1.0).contains(&q) {
            let t = (1.0 - q).max(0.0).sqrt();
            if t < 1.0 {
                let y = t.atanh();
                candidates.push(y.clamp(lo, hi));
                candidates.push((-y).clamp(lo, hi));
            }
        }
    }
    let (value, argmax) = best_candidate(g, &candidates);
    Ok(ConjugateResult {
        value,
        argmax,
        exact: true,
    })
}

/// Exact conjugate for ELU (alpha = 1). The objective is linear on
/// [0, inf) and smooth on (-inf, 0] with at most one stationary point at
/// ln(mu/lambda), so endpoints, the kink at 0, and that point cover every
/// local maximum.
pub fn conjugate_elu(lambda: f64, mu: f64, lo: f64, hi: f64) -> Result<ConjugateResult> {
    check_interval(lo, hi)?;
    let g = |y: f64| mu * y - lambda * ActivationKind::Elu.scalar(y);
    let mut candidates = vec![lo, hi];
    if lo < 0.0 && 0.0 < hi {
        candidates.push(0.0);
    }
    if lambda.abs() >= LAMBDA_EPS {
        let q = mu / lambda;
        if q > 0.0 && q < 1.0 {
            let y = q.ln();
            if y > lo && y < hi.min(0.0) {
                candidates.push(y);
            }
        }
    }
    let (value, argmax) = best_candidate(g, &candidates);
    Ok(ConjugateResult {
        value,
        argmax,
        exact: true,
    })
}

fn conjugate_identity(lambda: f64, mu: f64, lo: f64, hi: f64) -> Result<ConjugateResult> {
    check_interval(lo, hi)?;
    let g = |y: f64| (mu - lambda) * y;
    let (value, argmax) = best_candidate(g, &[lo, hi]);
    Ok(ConjugateResult {
        value,
        argmax,
        exact: true,
    })
}

/// Exact conjugate of a max-pool group: max of mu . y - lambda * max_j(y_j)
/// over the box [lo, hi].
///
/// Enumerates which coordinate attains the group maximum. With coordinate
/// `i` fixed at level `m`, every other coordinate decouples to
/// max of mu_j * y_j over [lo_j, min(hi_j, m)], so the level function is
/// piecewise linear in `m` with breakpoints at the upper bounds hi_j;
/// evaluating the feasible range endpoints and those breakpoints is exact.
pub fn conjugate_maxpool(
    lambda: f64,
    mu: &[f64],
    lo: &[f64],
    hi: &[f64],
) -> Result<MaxPoolConjugate> {
    let t = mu.len();
    if t < 2 || lo.len() != t || hi.len() != t {
        return Err(VerifyError::Shape(format!(
            "maxpool conjugate needs matching vectors of length >= 2, got {}/{}/{}",
            mu.len(),
            lo.len(),
            hi.len()
        )));
    }
    for (&l, &h) in lo.iter().zip(hi) {
        check_interval(l, h)?;
    }
    let level_floor = lo.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut best: Option<(f64, Vec<f64>)> = None;
    for i in 0..t {
        if hi[i] < level_floor {
            // Coordinate i can never attain the group maximum.
            continue;
        }
        let mut levels = vec![level_floor, hi[i]];
        for (j, &hj) in hi.iter().enumerate() {
            if j != i && hj > level_floor && hj < hi[i] {
                levels.push(hj);
            }
        }
        for &m in &levels {
            let mut y = vec![0.0; t];
            y[i] = m;
            let mut value = mu[i] * m - lambda * m;
            for j in 0..t {
                if j == i {
                    continue;
                }
                let cap = hi[j].min(m);
                y[j] = if mu[j] > 0.0 { cap } else { lo[j] };
                value += mu[j] * y[j];
            }
            if best.as_ref().is_none_or(|(bv, _)| value > *bv) {
                best = Some((value, y));
            }
        }
    }
    let (value, argmax) = best.expect("the max-lower-bound coordinate is always feasible");
    Ok(MaxPoolConjugate { value, argmax })
}

/// Sound upper bound on the conjugate of an arbitrary scalar nonlinearity.
///
/// Splits the interval into `pieces` uniform sub-intervals and decouples the
/// linear and nonlinear terms on each: the bound per piece is
/// max(mu a, mu b) + max(-lambda h(a), -lambda h(b)), always >= the true
/// maximum there. Refining the partition by doubling never loosens the
/// bound for monotone `h`. The returned `argmax` is the best evaluated
/// witness point, so the reported bound may exceed the objective there.
pub fn conjugate_general(
    h: impl Fn(f64) -> f64,
    lambda: f64,
    mu: f64,
    lo: f64,
    hi: f64,
    pieces: usize,
) -> Result<ConjugateResult> {
    check_interval(lo, hi)?;
    if pieces == 0 {
        return Err(VerifyError::InvalidConfig(
            "conjugate_general needs at least one piece".into(),
        ));
    }
    let g = |y: f64| mu * y - lambda * h(y);
    let width = (hi - lo) / pieces as f64;
    let mut bound = f64::NEG_INFINITY;
    let mut witness = (g(lo), lo);
    for i in 0..pieces {
        let a = lo + width * i as f64;
        let b = if i + 1 == pieces { hi } else { lo + width * (i + 1) as f64 };
        let piece = (mu * a).max(mu * b) + (-lambda * h(a)).max(-lambda * h(b));
        bound = bound.max(piece);
        for y in [a, b] {
            let v = g(y);
            if v > witness.0 {
                witness = (v, y);
            }
        }
    }
    Ok(ConjugateResult {
        value: bound,
        argmax: witness.1,
        exact: false,
    })
}

/// Dispatches to the activation-specific conjugate solver.
///
/// Max-pool is layer-structured rather than component-wise; use
/// [`conjugate_maxpool`] for it.
pub fn conjugate(
    kind: ActivationKind,
    lambda: f64,
    mu: f64,
    lo: f64,
    hi: f64,
) -> Result<ConjugateResult> {
    match kind {
        ActivationKind::Relu => conjugate_relu(lambda, mu, lo, hi),
        ActivationKind::Sigmoid => conjugate_sigmoid(lambda, mu, lo, hi),
        ActivationKind::Tanh => conjugate_tanh(lambda, mu, lo, hi),
        ActivationKind::Elu => conjugate_elu(lambda, mu, lo, hi),
        ActivationKind::Identity => conjugate_identity(lambda, mu, lo, hi),
        ActivationKind::MaxPool(_) => Err(VerifyError::UnsupportedActivation {
            kind: kind.to_string(),
            op: "scalar conjugate (use conjugate_maxpool)",
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    // Test-side oracle: dense 1-D grid max, independent of the solvers.
    fn grid_max(h: impl Fn(f64) -> f64, lambda: f64, mu: f64, lo: f64, hi: f64, n: usize) -> f64 {
        let mut best = f64::NEG_INFINITY;
        for i in 0..n {
            let y = lo + (hi - lo) * i as f64 / (n - 1) as f64;
            best = best.max(mu * y - lambda * h(y));
        }
        best
    }

    fn eval(kind: ActivationKind, y: f64) -> f64 {
        kind.scalar(y)
    }

    #[test]
    fn relu_examples() {
        let r = conjugate_relu(0.0, 1.0, -1.0, 2.0).unwrap();
        assert_eq!((r.value, r.argmax), (2.0, 2.0));

        // max(mu lo, (mu - lambda) hi, 0) = max(-1, 0, 0) = 0
        let r = conjugate_relu(1.0, 1.0, -1.0, 2.0).unwrap();
        assert_eq!(r.value, 0.0);
        let g = grid_max(|y| y.max(0.0), 1.0, 1.0, -1.0, 2.0, 100_001);
        assert!((r.value - g).abs() < 1e-4);

        let r = conjugate_relu(2.0, 1.0, 1.0, 3.0).unwrap();
        assert_eq!((r.value, r.argmax), (-1.0, 1.0));
        let g = grid_max(|y| y.max(0.0), 2.0, 1.0, 1.0, 3.0, 100_001);
        assert!((r.value - g).abs() < 1e-4);
    }

    #[test]
    fn sigmoid_examples() {
        let r = conjugate_sigmoid(0.0, 1.0, -2.0, 3.0).unwrap();
        assert_eq!((r.value, r.argmax), (3.0, 3.0));

        // Oracle value -sigmoid(-2) = -0.11920292202211755 at y = -2.
        let r = conjugate_sigmoid(1.0, 0.0, -2.0, 3.0).unwrap();
        assert!((r.value - (-0.119_202_922_022_117_55)).abs() < 1e-12);
        assert_eq!(r.argmax, -2.0);

        // Oracle value -0.8102965072897335 at y = 3; stationary y = 0 gives -2.
        let r = conjugate_sigmoid(4.0, 1.0, -3.0, 3.0).unwrap();
        assert!((r.value - (-0.810_296_507_289_733_5)).abs() < 1e-12);
        assert_eq!(r.argmax, 3.0);
        let g = grid_max(|y| eval(ActivationKind::Sigmoid, y), 4.0, 1.0, -3.0, 3.0, 100_001);
        assert!((r.value - g).abs() < 1e-4);
    }

    #[test]
    fn tanh_examples() {
        let r = conjugate_tanh(0.0, -1.0, -2.0, 1.0).unwrap();
        assert_eq!((r.value, r.argmax), (2.0, -2.0));

        // Oracle value 2 - tanh(2) = 1.035972419924183 at y = 2.
        let r = conjugate_tanh(1.0, 1.0, -2.0, 2.0).unwrap();
        assert!((r.value - 1.035_972_419_924_183).abs() < 1e-12);
        assert_eq!(r.argmax, 2.0);

        // Oracle value 3 - 2 tanh(3) = 1.009890492626539; interior
        // stationaries +/- atanh(sqrt(1/2)) are dominated.
        let r = conjugate_tanh(2.0, 1.0, -3.0, 3.0).unwrap();
        assert!((r.value - 1.009_890_492_626_539).abs() < 1e-12);
        let g = grid_max(f64::tanh, 2.0, 1.0, -3.0, 3.0, 100_001);
        assert!((r.value - g).abs() < 1e-4);
    }

    #[test]
    fn maxpool_examples() {
        let r = conjugate_maxpool(0.0, &[1.0, 1.0], &[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert_eq!(r.value, 2.0);
        assert_eq!(r.argmax, vec![1.0, 1.0]);

        // Minimizing the group max over [0,1] x [2,3]: oracle value -2.
        let r = conjugate_maxpool(1.0, &[0.0, 0.0], &[0.0, 2.0], &[1.0, 3.0]).unwrap();
        assert_eq!(r.value, -2.0);

        // Oracle (dense 2-D grid) value 0: y_0 - max(y_0, y_1) <= 0 on
        // [0,2] x [0,1] with equality whenever y_0 >= y_1.
        let r = conjugate_maxpool(1.0, &[1.0, 0.0], &[0.0, 0.0], &[2.0, 1.0]).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn maxpool_matches_dense_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let mu = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let lambda: f64 = rng.gen_range(-1.0..1.0);
            let lo = [rng.gen_range(-1.0..0.0), rng.gen_range(-1.0..0.0)];
            let hi = [
                lo[0] + rng.gen_range(0.0..1.5),
                lo[1] + rng.gen_range(0.0..1.5),
            ];
            let r = conjugate_maxpool(lambda, &mu, &lo, &hi).unwrap();
            let n = 801;
            let mut grid = f64::NEG_INFINITY;
            for i in 0..n {
                let y0 = lo[0] + (hi[0] - lo[0]) * i as f64 / (n - 1) as f64;
                for j in 0..n {
                    let y1 = lo[1] + (hi[1] - lo[1]) * j as f64 / (n - 1) as f64;
                    grid = grid.max(mu[0] * y0 + mu[1] * y1 - lambda * y0.max(y1));
                }
            }
            assert!(r.value >= grid - 1e-9, "unsound: {} < {grid}", r.value);
            assert!((r.value - grid).abs() < 1e-2);
            // The reported argmax attains the value.
            let at = mu[0] * r.argmax[0] + mu[1] * r.argmax[1]
                - lambda * r.argmax[0].max(r.argmax[1]);
            assert!((at - r.value).abs() < 1e-9);
        }
    }

    #[test]
    fn general_examples() {
        let r = conjugate_general(|y| y.tanh(), 0.0, 1.0, -1.0, 2.0, 1).unwrap();
        assert_eq!(r.value, 2.0);

        // Monotone h makes the one-piece bound tight here: equals -sigmoid(-2).
        let r = conjugate_general(
            |y| eval(ActivationKind::Sigmoid, y),
            1.0,
            0.0,
            -2.0,
            3.0,
            1,
        )
        .unwrap();
        let exact = conjugate_sigmoid(1.0, 0.0, -2.0, 3.0).unwrap();
        assert!((r.value - exact.value).abs() < 1e-12);

        // Oracle sequence for tanh, lambda = mu = 1 on [-2, 2]:
        // pieces 1 -> 2.964027580075817, 10 -> 1.0783314455935287,
        // 1000 -> 1.0362561156726569; exact conjugate 1.035972419924183.
        let exact = conjugate_tanh(1.0, 1.0, -2.0, 2.0).unwrap().value;
        let seq: Vec<f64> = [1usize, 10, 1000]
            .iter()
            .map(|&p| conjugate_general(f64::tanh, 1.0, 1.0, -2.0, 2.0, p).unwrap().value)
            .collect();
        assert!((seq[0] - 2.964_027_580_075_817).abs() < 1e-12);
        assert!((seq[1] - 1.078_331_445_593_528_7).abs() < 1e-12);
        assert!((seq[2] - 1.036_256_115_672_656_9).abs() < 1e-12);
        assert!(seq[0] >= seq[1] && seq[1] >= seq[2]);
        assert!(seq[2] >= exact && seq[2] - exact < 1e-3);
    }

    #[test]
    fn general_refinement_by_doubling_never_loosens() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for kind in [ActivationKind::Sigmoid, ActivationKind::Tanh, ActivationKind::Elu] {
            for _ in 0..100 {
                let lambda = rng.gen_range(-2.0..2.0);
                let mu = rng.gen_range(-2.0..2.0);
                let lo = rng.gen_range(-3.0..1.0);
                let hi = lo + rng.gen_range(0.0..4.0);
                let mut prev = f64::INFINITY;
                let mut pieces = 1;
                while pieces <= 64 {
                    let b = conjugate_general(|y| eval(kind, y), lambda, mu, lo, hi, pieces)
                        .unwrap()
                        .value;
                    assert!(b <= prev + 1e-12);
                    prev = b;
                    pieces *= 2;
                }
            }
        }
    }

    #[test]
    fn dispatch_mirrors_specific_solvers() {
        let (lambda, mu, lo, hi) = (0.7, -0.3, -1.5, 2.5);
        assert_eq!(
            conjugate(ActivationKind::Relu, lambda, mu, lo, hi).unwrap(),
            conjugate_relu(lambda, mu, lo, hi).unwrap()
        );
        assert_eq!(
            conjugate(ActivationKind::Sigmoid, lambda, mu, lo, hi).unwrap(),
            conjugate_sigmoid(lambda, mu, lo, hi).unwrap()
        );
        assert_eq!(
            conjugate(ActivationKind::Tanh, lambda, mu, lo, hi).unwrap(),
            conjugate_tanh(lambda, mu, lo, hi).unwrap()
        );
        assert!(conjugate(ActivationKind::MaxPool(2), lambda, mu, lo, hi).is_err());
    }

    #[test]
    fn elu_matches_grid_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let lambda = rng.gen_range(-2.0..2.0);
            let mu = rng.gen_range(-2.0..2.0);
            let r = conjugate(ActivationKind::Elu, lambda, mu, -4.0, 4.0).unwrap();
            let g = grid_max(|y| eval(ActivationKind::Elu, y), lambda, mu, -4.0, 4.0, 100_001);
            assert!(r.value >= g - 1e-9);
            assert!(r.value - g < 1e-3);
        }
    }

    #[test]
    fn soundness_and_exactness_against_grid() {
        // Smaller-volume version of the acceptance sweep: sound against
        // sampled points and within grid tolerance of the grid max.
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for kind in [
            ActivationKind::Relu,
            ActivationKind::Sigmoid,
            ActivationKind::Tanh,
            ActivationKind::Elu,
        ] {
            for _ in 0..200 {
                let lambda = rng.gen_range(-1.5..1.5);
                let mu = rng.gen_range(-1.5..1.5);
                let lo = rng.gen_range(-3.0..2.9);
                let hi = lo + rng.gen_range(0.0..(3.0f64 - lo).max(0.001));
                let r = conjugate(kind, lambda, mu, lo, hi).unwrap();
                for _ in 0..100 {
                    let y = rng.gen_range(lo..=hi);
                    assert!(r.value >= mu * y - lambda * eval(kind, y) - 1e-9);
                }
                let g = grid_max(|y| eval(kind, y), lambda, mu, lo, hi, 20_001);
                assert!(r.value >= g - 1e-9);
                assert!((r.value - g).abs() < 1e-3);
                if r.exact {
                    let at = mu * r.argmax - lambda * eval(kind, r.argmax);
                    assert!((r.value - at).abs() < 1e-9);
                }
                assert!(r.argmax >= lo && r.argmax <= hi);
            }
        }
    }

    #[test]
    fn degenerate_interval_returns_point_value() {
        for kind in [
            ActivationKind::Relu,
            ActivationKind::Sigmoid,
            ActivationKind::Tanh,
            ActivationKind::Elu,
            ActivationKind::Identity,
        ] {
            let r = conjugate(kind, 1.3, -0.7, 0.4, 0.4).unwrap();
            let expect = -0.7 * 0.4 - 1.3 * eval(kind, 0.4);
            assert_eq!(r.value, expect);
            assert_eq!(r.argmax, 0.4);
        }
    }

    #[test]
    fn invalid_interval_rejected() {
        assert!(conjugate_relu(1.0, 1.0, 2.0, 1.0).is_err());
        assert!(conjugate_sigmoid(1.0, 1.0, f64::NAN, 1.0).is_err());
        assert!(conjugate_maxpool(1.0, &[1.0, 1.0], &[0.0, 3.0], &[1.0, 2.0]).is_err());
    }
}
