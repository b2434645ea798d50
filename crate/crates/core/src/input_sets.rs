//! Input constraint sets and linear maximization over them.
//!
//! Every supported set is bounded and admits an exact closed-form solution
//! of max over x in S of v . x, which is all the dual decomposition needs
//! from the input layer.

use crate::error::{Result, VerifyError};
use crate::linalg;
use rand::Rng;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Perturbation norm for ball-shaped sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Norm {
    L1,
    L2,
    LInf,
}

impl Serialize for Norm {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Norm::L1 => s.serialize_u64(1),
            Norm::L2 => s.serialize_u64(2),
            Norm::LInf => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Norm {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        match &v {
            serde_json::Value::Number(n) if n.as_u64() == Some(1) => Ok(Norm::L1),
            serde_json::Value::Number(n) if n.as_u64() == Some(2) => Ok(Norm::L2),
            serde_json::Value::String(s) if s == "1" => Ok(Norm::L1),
            serde_json::Value::String(s) if s == "2" => Ok(Norm::L2),
            serde_json::Value::String(s) if s.eq_ignore_ascii_case("inf") => Ok(Norm::LInf),
            other => Err(D::Error::custom(format!(
                "norm must be 1, 2 or \"inf\", got {other}"
            ))),
        }
    }
}

impl std::str::FromStr for Norm {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "1" => Ok(Norm::L1),
            "2" => Ok(Norm::L2),
            _ if s.eq_ignore_ascii_case("inf") => Ok(Norm::LInf),
            other => Err(format!("norm must be 1, 2 or inf, got {other:?}")),
        }
    }
}

/// Bounded input region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", try_from = "InputSetDoc")]
pub enum InputSet {
    /// Axis-aligned box [lower, upper].
    Box { lower: Vec<f64>, upper: Vec<f64> },
    /// {x : |x - center|_p <= radius}.
    NormBall {
        p: Norm,
        center: Vec<f64>,
        radius: f64,
    },
    /// {x : at most k coordinates differ from center, each by at most
    /// radius in absolute value}.
    Cardinality {
        center: Vec<f64>,
        radius: f64,
        k: usize,
    },
}

#[derive(Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum InputSetDoc {
    Box { lower: Vec<f64>, upper: Vec<f64> },
    NormBall {
        p: Norm,
        center: Vec<f64>,
        radius: f64,
    },
    Cardinality {
        center: Vec<f64>,
        radius: f64,
        k: usize,
    },
}

impl TryFrom<InputSetDoc> for InputSet {
    type Error = VerifyError;
    fn try_from(doc: InputSetDoc) -> Result<Self> {
        match doc {
            InputSetDoc::Box { lower, upper } => InputSet::box_set(lower, upper),
            InputSetDoc::NormBall { p, center, radius } => InputSet::norm_ball(p, center, radius),
            InputSetDoc::Cardinality { center, radius, k } => {
                InputSet::cardinality(center, radius, k)
            }
        }
    }
}

impl InputSet {
    pub fn box_set(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(VerifyError::InvalidInputSet(
                "box bounds must be non-empty vectors of equal length".into(),
            ));
        }
        if !linalg::all_finite(&lower) || !linalg::all_finite(&upper) {
            return Err(VerifyError::NonFinite("box bounds"));
        }
        for (&l, &u) in lower.iter().zip(&upper) {
            if l > u {
                return Err(VerifyError::InvalidInterval { lower: l, upper: u });
            }
        }
        Ok(InputSet::Box { lower, upper })
    }

    pub fn norm_ball(p: Norm, center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() || !linalg::all_finite(&center) {
            return Err(VerifyError::InvalidInputSet(
                "norm ball center must be a non-empty finite vector".into(),
            ));
        }
        if !radius.is_finite() || radius < 0.0 {
            return Err(VerifyError::InvalidInputSet(format!(
                "norm ball radius must be finite and non-negative, got {radius}"
            )));
        }
        Ok(InputSet::NormBall { p, center, radius })
    }

    pub fn cardinality(center: Vec<f64>, radius: f64, k: usize) -> Result<Self> {
        if center.is_empty() || !linalg::all_finite(&center) {
            return Err(VerifyError::InvalidInputSet(
                "cardinality center must be a non-empty finite vector".into(),
            ));
        }
        if !radius.is_finite() || radius < 0.0 {
            return Err(VerifyError::InvalidInputSet(format!(
                "cardinality radius must be finite and non-negative, got {radius}"
            )));
        }
        if k > center.len() {
            return Err(VerifyError::InvalidInputSet(format!(
                "cardinality budget {k} exceeds dimension {}",
                center.len()
            )));
        }
        Ok(InputSet::Cardinality { center, radius, k })
    }

    pub fn dim(&self) -> usize {
        match self {
            InputSet::Box { lower, .. } => lower.len(),
            InputSet::NormBall { center, .. } | InputSet::Cardinality { center, .. } => {
                center.len()
            }
        }
    }

    /// A canonical interior point: ball centers, box midpoint.
    pub fn center(&self) -> Vec<f64> {
        match self {
            InputSet::Box { lower, upper } => lower
                .iter()
                .zip(upper)
                .map(|(&l, &u)| 0.5 * (l + u))
                .collect(),
            InputSet::NormBall { center, .. } | InputSet::Cardinality { center, .. } => {
                center.clone()
            }
        }
    }

    /// Smallest axis-aligned box containing the set.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            InputSet::Box { lower, upper } => (lower.clone(), upper.clone()),
            InputSet::NormBall { center, radius, .. }
            | InputSet::Cardinality { center, radius, .. } => (
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            ),
        }
    }

    /// Membership test with an absolute slack per constraint.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        match self {
            InputSet::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(&xi, (&l, &u))| xi >= l - tol && xi <= u + tol),
            InputSet::NormBall { p, center, radius } => {
                let delta = linalg::sub(x, center);
                let n = match p {
                    Norm::L1 => linalg::norm1(&delta),
                    Norm::L2 => linalg::norm2(&delta),
                    Norm::LInf => linalg::norm_inf(&delta),
                };
                n <= radius + tol
            }
            InputSet::Cardinality { center, radius, k } => {
                let delta = linalg::sub(x, center);
                linalg::norm_inf(&delta) <= radius + tol
                    && delta.iter().filter(|d| d.abs() > tol).count() <= *k
            }
        }
    }

    fn check_dim(&self, v: &[f64], what: &str) -> Result<()> {
        if v.len() != self.dim() {
            return Err(VerifyError::Shape(format!(
                "{what} length {} != set dimension {}",
                v.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// Exact maximum of v . x over the set and a maximizing point.
    pub fn linear_max(&self, v: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.check_dim(v, "objective")?;
        match self {
            InputSet::Box { lower, upper } => {
                let mut value = 0.0;
                let argmax: Vec<f64> = v
                    .iter()
                    .zip(lower.iter().zip(upper))
                    .map(|(&vi, (&l, &u))| {
                        let x = if vi > 0.0 { u } else { l };
                        value += vi * x;
                        x
                    })
                    .collect();
                Ok((value, argmax))
            }
            InputSet::NormBall { p, center, radius } => {
                let base = linalg::dot(v, center);
                match p {
                    // Dual norm of l-inf is l1: push every coordinate to its
                    // signed extreme.
                    Norm::LInf => {
                        let value = base + radius * linalg::norm1(v);
                        let argmax = center
                            .iter()
                            .zip(v)
                            .map(|(&c, &vi)| c + radius * sign(vi))
                            .collect();
                        Ok((value, argmax))
                    }
                    Norm::L2 => {
                        let n = linalg::norm2(v);
                        if n == 0.0 {
                            return Ok((base, center.clone()));
                        }
                        let argmax = center
                            .iter()
                            .zip(v)
                            .map(|(&c, &vi)| c + radius * vi / n)
                            .collect();
                        Ok((base + radius * n, argmax))
                    }
                    // Dual norm of l1 is l-inf: spend the whole radius on one
                    // largest-magnitude coordinate.
                    Norm::L1 => {
                        let mut imax = 0;
                        for (i, vi) in v.iter().enumerate() {
                            if vi.abs() > v[imax].abs() {
                                imax = i;
                            }
                        }
                        let mut argmax = center.clone();
                        argmax[imax] += radius * sign(v[imax]);
                        Ok((base + radius * v[imax].abs(), argmax))
                    }
                }
            }
            InputSet::Cardinality { center, radius, k } => {
                // Per-coordinate gain of a full deviation is radius * |v_i|;
                // spend the budget on the k largest.
                let base = linalg::dot(v, center);
                let mut order: Vec<usize> = (0..v.len()).collect();
                order.sort_by(|&a, &b| {
                    v[b].abs()
                        .partial_cmp(&v[a].abs())
                        .unwrap()
                        .then(a.cmp(&b))
                });
                let mut argmax = center.clone();
                let mut value = base;
                for &i in order.iter().take(*k) {
                    argmax[i] += radius * sign(v[i]);
                    value += radius * v[i].abs();
                }
                Ok((value, argmax))
            }
        }
    }

    /// Restores feasibility of an arbitrary point.
    ///
    /// Exact Euclidean projection for boxes and 2-/inf-norm balls. The
    /// 1-norm ball rescales the deviation radially onto the sphere, and the
    /// cardinality set clips to the inf-box then keeps only the k largest
    /// deviations; both are feasibility-restoring maps rather than nearest
    /// points, which is all their callers require.
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x, "point")?;
        match self {
            InputSet::Box { lower, upper } => Ok(x
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(&xi, (&l, &u))| xi.clamp(l, u))
                .collect()),
            InputSet::NormBall { p, center, radius } => {
                let delta = linalg::sub(x, center);
                match p {
                    Norm::LInf => Ok(center
                        .iter()
                        .zip(&delta)
                        .map(|(&c, &d)| c + d.clamp(-radius, *radius))
                        .collect()),
                    Norm::L2 => {
                        let n = linalg::norm2(&delta);
                        if n <= *radius {
                            return Ok(x.to_vec());
                        }
                        Ok(linalg::add(center, &linalg::scale(&delta, radius / n)))
                    }
                    Norm::L1 => {
                        let n = linalg::norm1(&delta);
                        if n <= *radius {
                            return Ok(x.to_vec());
                        }
                        Ok(linalg::add(center, &linalg::scale(&delta, radius / n)))
                    }
                }
            }
            InputSet::Cardinality { center, radius, k } => {
                let clipped: Vec<f64> = linalg::sub(x, center)
                    .iter()
                    .map(|d| d.clamp(-radius, *radius))
                    .collect();
                let mut order: Vec<usize> = (0..clipped.len()).collect();
                order.sort_by(|&a, &b| {
                    clipped[b]
                        .abs()
                        .partial_cmp(&clipped[a].abs())
                        .unwrap()
                        .then(a.cmp(&b))
                });
                let mut out = center.clone();
                for &i in order.iter().take(*k) {
                    out[i] += clipped[i];
                }
                Ok(out)
            }
        }
    }

    /// Random feasible point, used for attack restarts and sampled
    /// soundness checks.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        match self {
            InputSet::Box { lower, upper } => lower
                .iter()
                .zip(upper)
                .map(|(&l, &u)| if l == u { l } else { rng.gen_range(l..=u) })
                .collect(),
            InputSet::NormBall { p, center, radius } => {
                if *radius == 0.0 {
                    return center.clone();
                }
                match p {
                    Norm::LInf => center
                        .iter()
                        .map(|&c| rng.gen_range(c - radius..=c + radius))
                        .collect(),
                    Norm::L2 => {
                        // Gaussian direction, radius scaled for uniformity.
                        let d = center.len();
                        let dir: Vec<f64> = (0..d)
                            .map(|_| {
                                let u1: f64 = rng.gen_range(1e-12..1.0);
                                let u2: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                                (-2.0 * u1.ln()).sqrt() * u2.cos()
                            })
                            .collect();
                        let n = linalg::norm2(&dir).max(1e-300);
                        let r = radius * rng.gen_range(0.0f64..=1.0).powf(1.0 / d as f64);
                        linalg::add(center, &linalg::scale(&dir, r / n))
                    }
                    Norm::L1 => {
                        let raw: Vec<f64> = center
                            .iter()
                            .map(|&c| rng.gen_range(c - radius..=c + radius))
                            .collect();
                        self.project(&raw).expect("dimensions match")
                    }
                }
            }
            InputSet::Cardinality { center, radius, k } => {
                let mut out = center.clone();
                if *radius == 0.0 || *k == 0 {
                    return out;
                }
                let mut indices: Vec<usize> = (0..center.len()).collect();
                for i in 0..*k {
                    let j = rng.gen_range(i..indices.len());
                    indices.swap(i, j);
                }
                for &i in indices.iter().take(*k) {
                    out[i] += rng.gen_range(-radius..=*radius);
                }
                out
            }
        }
    }
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Input-layer term of the dual decomposition:
/// max over x in S of (-W0^T mu0) . x - b0 . mu0, with its maximizer.
pub fn f0(
    mu0: &[f64],
    w0: &[Vec<f64>],
    b0: &[f64],
    set: &InputSet,
) -> Result<(f64, Vec<f64>)> {
    if w0.len() != mu0.len() || b0.len() != mu0.len() {
        return Err(VerifyError::Shape(format!(
            "f0 shapes: W rows {}, bias {}, mu {}",
            w0.len(),
            b0.len(),
            mu0.len()
        )));
    }
    let v = linalg::scale(&linalg::mat_t_vec(w0, mu0), -1.0);
    let (value, argmax) = set.linear_max(&v)?;
    Ok((value - linalg::dot(b0, mu0), argmax))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn linear_max_inf_ball_corner() {
        let set = InputSet::norm_ball(Norm::LInf, vec![0.0, 0.0], 0.5).unwrap();
        let (v, x) = set.linear_max(&[1.0, -1.0]).unwrap();
        assert_eq!(v, 1.0);
        assert_eq!(x, vec![0.5, -0.5]);
    }

    #[test]
    fn linear_max_zero_objective_returns_center() {
        for set in [
            InputSet::norm_ball(Norm::L2, vec![1.0, 2.0], 0.7).unwrap(),
            InputSet::cardinality(vec![1.0, 2.0], 0.7, 1).unwrap(),
            InputSet::box_set(vec![0.0, 1.5], vec![2.0, 2.5]).unwrap(),
        ] {
            let (v, x) = set.linear_max(&[0.0, 0.0]).unwrap();
            assert_eq!(v, 0.0);
            assert!(set.contains(&x, 1e-12));
        }
    }

    #[test]
    fn linear_max_cardinality_picks_largest_coordinate() {
        let set = InputSet::cardinality(vec![0.0; 3], 1.0, 1).unwrap();
        let (v, x) = set.linear_max(&[3.0, -2.0, 5.0]).unwrap();
        assert_eq!(v, 5.0);
        assert_eq!(x, vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn cardinality_matches_subset_enumeration() {
        // Brute force over all subsets of size <= k and corner signs.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let d = rng.gen_range(2..=6);
            let k = rng.gen_range(0..=3.min(d));
            let center: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let radius = rng.gen_range(0.0..2.0);
            let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let set = InputSet::cardinality(center.clone(), radius, k).unwrap();
            let (got, arg) = set.linear_max(&v).unwrap();

            let mut best = f64::NEG_INFINITY;
            for mask in 0u32..(1 << d) {
                if mask.count_ones() as usize > k {
                    continue;
                }
                let mut val = linalg::dot(&v, &center);
                for i in 0..d {
                    if mask & (1 << i) != 0 {
                        val += radius * v[i].abs();
                    }
                }
                best = best.max(val);
            }
            assert!((got - best).abs() < 1e-12);
            assert!(set.contains(&arg, 1e-12));
            assert!((linalg::dot(&v, &arg) - got).abs() < 1e-12);
        }
    }

    #[test]
    fn f0_examples() {
        let w0 = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let b0 = vec![0.0, 0.0];
        let set = InputSet::norm_ball(Norm::LInf, vec![0.0, 0.0], 0.5).unwrap();

        let (v, _) = f0(&[0.0, 0.0], &w0, &b0, &set).unwrap();
        assert_eq!(v, 0.0);

        // epsilon * |mu|_1 for the identity layer on an inf-ball at 0.
        let (v, _) = f0(&[1.0, -1.0], &w0, &b0, &set).unwrap();
        assert_eq!(v, 1.0);

        let bset = InputSet::box_set(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let (v, x) = f0(&[1.0, 1.0], &w0, &[1.0, 1.0], &bset).unwrap();
        assert_eq!(v, -2.0);
        assert_eq!(x, vec![0.0, 0.0]);
    }

    #[test]
    fn project_examples() {
        let ball = InputSet::norm_ball(Norm::LInf, vec![0.0, 0.0], 1.0).unwrap();
        assert_eq!(ball.project(&[0.3, -0.4]).unwrap(), vec![0.3, -0.4]);
        assert_eq!(ball.project(&[2.0, -3.0]).unwrap(), vec![1.0, -1.0]);

        let card = InputSet::cardinality(vec![0.0, 0.0], 1.0, 1).unwrap();
        assert_eq!(card.project(&[0.5, 2.0]).unwrap(), vec![0.0, 1.0]);
    }

    #[test]
    fn projection_is_feasible_and_fixes_members() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let sets = [
            InputSet::box_set(vec![-1.0, 0.0, 2.0], vec![1.0, 0.5, 3.0]).unwrap(),
            InputSet::norm_ball(Norm::L1, vec![0.5, -0.5, 0.0], 0.8).unwrap(),
            InputSet::norm_ball(Norm::L2, vec![0.0; 3], 1.2).unwrap(),
            InputSet::norm_ball(Norm::LInf, vec![0.0; 3], 0.3).unwrap(),
            InputSet::cardinality(vec![0.0; 3], 0.6, 2).unwrap(),
        ];
        for set in &sets {
            for _ in 0..200 {
                let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-4.0..4.0)).collect();
                let p = set.project(&x).unwrap();
                assert!(set.contains(&p, 1e-9), "{set:?} {p:?}");
                let inside = set.sample(&mut rng);
                let q = set.project(&inside).unwrap();
                for (a, b) in inside.iter().zip(&q) {
                    assert!((a - b).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn bounding_box_examples() {
        let b = InputSet::box_set(vec![0.0], vec![1.0]).unwrap();
        assert_eq!(b.bounding_box(), (vec![0.0], vec![1.0]));
        let nb = InputSet::norm_ball(Norm::LInf, vec![1.0, -1.0], 0.25).unwrap();
        assert_eq!(nb.bounding_box(), (vec![0.75, -1.25], vec![1.25, -0.75]));
        let cb = InputSet::cardinality(vec![1.0, -1.0], 0.25, 1).unwrap();
        assert_eq!(cb.bounding_box(), (vec![0.75, -1.25], vec![1.25, -0.75]));
    }

    #[test]
    fn linear_max_dominates_sampled_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..200 {
            let d = rng.gen_range(1..=5);
            let center: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let radius = rng.gen_range(0.0..1.5);
            let set = match rng.gen_range(0..5) {
                0 => {
                    let upper: Vec<f64> =
                        center.iter().map(|c| c + rng.gen_range(0.0..1.0)).collect();
                    InputSet::box_set(center.clone(), upper).unwrap()
                }
                1 => InputSet::norm_ball(Norm::L1, center.clone(), radius).unwrap(),
                2 => InputSet::norm_ball(Norm::L2, center.clone(), radius).unwrap(),
                3 => InputSet::norm_ball(Norm::LInf, center.clone(), radius).unwrap(),
                _ => InputSet::cardinality(center.clone(), radius, rng.gen_range(0..=d)).unwrap(),
            };
            let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let (value, argmax) = set.linear_max(&v).unwrap();
            assert!(set.contains(&argmax, 1e-9));
            assert!((linalg::dot(&v, &argmax) - value).abs() < 1e-9);
            for _ in 0..100 {
                let x = set.sample(&mut rng);
                assert!(set.contains(&x, 1e-9));
                assert!(value >= linalg::dot(&v, &x) - 1e-9);
            }
            // Support-function symmetry for sets containing a point.
            let neg: Vec<f64> = v.iter().map(|x| -x).collect();
            let (value_neg, _) = set.linear_max(&neg).unwrap();
            assert!(value + value_neg >= -1e-9);
        }
    }

    #[test]
    fn zero_radius_ball_is_the_center() {
        let set = InputSet::norm_ball(Norm::L2, vec![0.3, -0.7], 0.0).unwrap();
        let (v, x) = set.linear_max(&[2.0, 1.0]).unwrap();
        assert!((v - (2.0 * 0.3 - 0.7)).abs() < 1e-15);
        assert_eq!(x, vec![0.3, -0.7]);
    }

    #[test]
    fn serde_round_trip_and_tags() {
        let sets = [
            InputSet::box_set(vec![0.0], vec![1.0]).unwrap(),
            InputSet::norm_ball(Norm::LInf, vec![0.0], 0.5).unwrap(),
            InputSet::norm_ball(Norm::L1, vec![0.0], 0.5).unwrap(),
            InputSet::cardinality(vec![0.0, 1.0], 0.5, 1).unwrap(),
        ];
        for set in &sets {
            let js = serde_json::to_string(set).unwrap();
            let back: InputSet = serde_json::from_str(&js).unwrap();
            assert_eq!(*set, back);
        }
        let js = serde_json::to_value(&sets[1]).unwrap();
        assert_eq!(js["type"], "norm_ball");
        assert_eq!(js["p"], "inf");
        let parsed: InputSet =
            serde_json::from_str(r#"{"type":"norm_ball","p":2,"center":[0.0],"radius":1.0}"#)
                .unwrap();
        assert!(matches!(parsed, InputSet::NormBall { p: Norm::L2, .. }));
        assert!(serde_json::from_str::<InputSet>(
            r#"{"type":"box","lower":[1.0],"upper":[0.0]}"#
        )
        .is_err());
    }

    #[test]
    fn invalid_sets_rejected() {
        assert!(InputSet::box_set(vec![1.0], vec![0.0]).is_err());
        assert!(InputSet::norm_ball(Norm::L2, vec![0.0], -0.1).is_err());
        assert!(InputSet::cardinality(vec![0.0, 0.0], 1.0, 3).is_err());
        let set = InputSet::box_set(vec![0.0], vec![1.0]).unwrap();
        assert!(set.linear_max(&[1.0, 2.0]).is_err());
        assert!(set.project(&[1.0, 2.0]).is_err());
    }
}
