//! Sound per-layer activation boxes.
//!
//! [`interval_propagate`] pushes an input box through the network with
//! interval arithmetic. [`tighten_bounds`] then re-solves the dual
//! relaxation per hidden neuron on truncated prefixes of the network and
//! intersects the resulting bounds, which never loosens a box.

use crate::dual::{minimize_dual, DualConfig};
use crate::error::{Result, VerifyError};
use crate::input_sets::InputSet;
use crate::network::{activation_eval, ActivationKind, Layer, Network, Trace};
use rayon::prelude::*;

/// Boxes on every pre-activation (layers 0..L-1) and post-activation
/// (layers 0..L, where index 0 is the input box).
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationBounds {
    pub pre_lower: Vec<Vec<f64>>,
    pub pre_upper: Vec<Vec<f64>>,
    pub post_lower: Vec<Vec<f64>>,
    pub post_upper: Vec<Vec<f64>>,
}

impl ActivationBounds {
    /// Shape- and ordering-consistency with a network.
    pub fn validate_for(&self, net: &Network) -> Result<()> {
        let ln = net.num_layers();
        if self.pre_lower.len() != ln
            || self.pre_upper.len() != ln
            || self.post_lower.len() != ln + 1
            || self.post_upper.len() != ln + 1
        {
            return Err(VerifyError::Shape(
                "activation bounds layer count does not match network".into(),
            ));
        }
        for (l, layer) in net.layers().iter().enumerate() {
            if self.pre_lower[l].len() != layer.pre_dim()
                || self.pre_upper[l].len() != layer.pre_dim()
                || self.post_lower[l].len() != layer.in_dim()
                || self.post_upper[l].len() != layer.in_dim()
            {
                return Err(VerifyError::Shape(format!(
                    "activation bounds widths mismatch at layer {l}"
                )));
            }
        }
        if self.post_lower[ln].len() != net.output_dim()
            || self.post_upper[ln].len() != net.output_dim()
        {
            return Err(VerifyError::Shape(
                "output bounds width does not match network".into(),
            ));
        }
        for (lo, hi) in self
            .pre_lower
            .iter()
            .chain(&self.post_lower)
            .zip(self.pre_upper.iter().chain(&self.post_upper))
        {
            for (&l, &h) in lo.iter().zip(hi) {
                if !(l <= h) {
                    return Err(VerifyError::InvalidInterval { lower: l, upper: h });
                }
            }
        }
        Ok(())
    }

    /// True when every pre/post vector of the trace lies inside its box.
    pub fn contains_trace(&self, trace: &Trace, tol: f64) -> bool {
        let inside = |xs: &[Vec<f64>], lo: &[Vec<f64>], hi: &[Vec<f64>]| {
            xs.iter().zip(lo.iter().zip(hi)).all(|(x, (l, h))| {
                x.iter()
                    .zip(l.iter().zip(h))
                    .all(|(&v, (&a, &b))| v >= a - tol && v <= b + tol)
            })
        };
        inside(&trace.pre, &self.pre_lower, &self.pre_upper)
            && inside(&trace.post, &self.post_lower, &self.post_upper)
    }

    /// Bounds restricted to the first `n_layers` layers.
    pub fn prefix(&self, n_layers: usize) -> ActivationBounds {
        ActivationBounds {
            pre_lower: self.pre_lower[..n_layers].to_vec(),
            pre_upper: self.pre_upper[..n_layers].to_vec(),
            post_lower: self.post_lower[..=n_layers].to_vec(),
            post_upper: self.post_upper[..=n_layers].to_vec(),
        }
    }
}

/// Interval image of the affine part of a layer.
fn interval_affine(layer: &Layer, lo: &[f64], hi: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut pre_lo = Vec::with_capacity(layer.pre_dim());
    let mut pre_hi = Vec::with_capacity(layer.pre_dim());
    for (row, &b) in layer.weights().iter().zip(layer.bias()) {
        let mut a = b;
        let mut c = b;
        for (&w, (&l, &h)) in row.iter().zip(lo.iter().zip(hi)) {
            if w >= 0.0 {
                a += w * l;
                c += w * h;
            } else {
                a += w * h;
                c += w * l;
            }
        }
        pre_lo.push(a);
        pre_hi.push(c);
    }
    (pre_lo, pre_hi)
}

/// Interval image of an activation. All component-wise activations here are
/// monotone non-decreasing, so endpoint evaluation is exact; max-pool takes
/// the group maximum of each endpoint vector.
fn activation_image(kind: ActivationKind, lo: &[f64], hi: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    Ok((activation_eval(kind, lo)?, activation_eval(kind, hi)?))
}

/// Propagates an input box through the network with interval arithmetic.
pub fn interval_propagate(
    net: &Network,
    input_lower: &[f64],
    input_upper: &[f64],
) -> Result<ActivationBounds> {
    if input_lower.len() != net.input_dim() || input_upper.len() != net.input_dim() {
        return Err(VerifyError::Shape(format!(
            "input box width {} != network input width {}",
            input_lower.len(),
            net.input_dim()
        )));
    }
    for (&l, &h) in input_lower.iter().zip(input_upper) {
        if !(l <= h) {
            return Err(VerifyError::InvalidInterval { lower: l, upper: h });
        }
    }
    let mut bounds = ActivationBounds {
        pre_lower: Vec::with_capacity(net.num_layers()),
        pre_upper: Vec::with_capacity(net.num_layers()),
        post_lower: vec![input_lower.to_vec()],
        post_upper: vec![input_upper.to_vec()],
    };
    for layer in net.layers() {
        let (pl, pu) = interval_affine(
            layer,
            bounds.post_lower.last().unwrap(),
            bounds.post_upper.last().unwrap(),
        );
        let (ql, qu) = activation_image(layer.activation(), &pl, &pu)?;
        bounds.pre_lower.push(pl);
        bounds.pre_upper.push(pu);
        bounds.post_lower.push(ql);
        bounds.post_upper.push(qu);
    }
    Ok(bounds)
}

/// Intersection of two sound intervals; keeps the first if rounding ever
/// makes them disjoint.
fn intersect(lo: f64, hi: f64, new_lo: f64, new_hi: f64) -> (f64, f64) {
    let l = lo.max(new_lo);
    let h = hi.min(new_hi);
    if l <= h {
        (l, h)
    } else {
        (lo, hi)
    }
}

/// Tightens hidden post-activation boxes by running the dual relaxation on
/// each truncated prefix of the network with objective +/- e_k, walking the
/// layers forward so later solves see earlier tightened boxes. Pre-activation
/// boxes are refreshed from the tightened post boxes by one interval step.
/// Every box is intersected with the input bounds, so the result is never
/// looser.
pub fn tighten_bounds(
    net: &Network,
    set: &InputSet,
    bounds: &ActivationBounds,
    iters_per_neuron: usize,
) -> Result<ActivationBounds> {
    bounds.validate_for(net)?;
    if iters_per_neuron == 0 {
        return Ok(bounds.clone());
    }
    let cfg = DualConfig {
        iterations: iters_per_neuron,
        ..DualConfig::default()
    };
    let mut tight = bounds.clone();
    let ln = net.num_layers();
    for l in 1..=ln {
        // Refresh pre[l-1] and post[l] from the (possibly tightened)
        // previous post box.
        let layer = &net.layers()[l - 1];
        let (pl, pu) = interval_affine(layer, &tight.post_lower[l - 1], &tight.post_upper[l - 1]);
        for k in 0..layer.pre_dim() {
            let (a, b) = intersect(
                tight.pre_lower[l - 1][k],
                tight.pre_upper[l - 1][k],
                pl[k],
                pu[k],
            );
            tight.pre_lower[l - 1][k] = a;
            tight.pre_upper[l - 1][k] = b;
        }
        let (ql, qu) = activation_image(
            layer.activation(),
            &tight.pre_lower[l - 1],
            &tight.pre_upper[l - 1],
        )?;
        for k in 0..layer.out_dim() {
            let (a, b) = intersect(tight.post_lower[l][k], tight.post_upper[l][k], ql[k], qu[k]);
            tight.post_lower[l][k] = a;
            tight.post_upper[l][k] = b;
        }

        // Dual-based per-neuron tightening for hidden post layers.
        if l == ln {
            break;
        }
        let sub_net = net.prefix(l)?;
        let sub_bounds = tight.prefix(l);
        let width = sub_net.output_dim();
        let solved: Vec<(f64, f64)> = (0..width)
            .into_par_iter()
            .map(|k| {
                let mut c = vec![0.0; width];
                c[k] = 1.0;
                let up = minimize_dual(&sub_net, &c, 0.0, set, &sub_bounds, &cfg)
                    .map(|s| s.best_bound);
                c[k] = -1.0;
                let down = minimize_dual(&sub_net, &c, 0.0, set, &sub_bounds, &cfg)
                    .map(|s| s.best_bound);
                match (up, down) {
                    (Ok(u), Ok(d)) => (-d, u),
                    _ => (f64::NEG_INFINITY, f64::INFINITY),
                }
            })
            .collect();
        for (k, &(lo, hi)) in solved.iter().enumerate() {
            let (a, b) = intersect(tight.post_lower[l][k], tight.post_upper[l][k], lo, hi);
            tight.post_lower[l][k] = a;
            tight.post_upper[l][k] = b;
        }
    }
    Ok(tight)
}
