//! Dense vector/matrix helpers over plain slices.
//!
//! Matrices are stored as row vectors (`&[Vec<f64>]`), matching the on-disk
//! JSON layout. Networks in this crate are small enough that hand-rolled
//! loops beat pulling a full linear-algebra stack into the hot path.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// W x for a row-major matrix.
pub fn matvec(w: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    w.iter().map(|row| dot(row, x)).collect()
}

/// Wᵀ y without materializing the transpose.
pub fn mat_t_vec(w: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    debug_assert_eq!(w.len(), y.len());
    let cols = w.first().map_or(0, Vec::len);
    let mut out = vec![0.0; cols];
    for (row, &yi) in w.iter().zip(y) {
        for (o, &wij) in out.iter_mut().zip(row) {
            *o += wij * yi;
        }
    }
    out
}

pub fn norm1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

pub fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Largest singular value via power iteration on AᵀA.
///
/// Deterministic start vector; converges to `rel_tol` relative change in the
/// singular value estimate.
pub fn sigma_max(a: &[Vec<f64>], rel_tol: f64, max_iters: usize) -> f64 {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return 0.0;
    }
    // Fixed pseudo-random start so repeated calls agree bit-for-bit.
    let mut v: Vec<f64> = (0..cols)
        .map(|i| 1.0 + 0.37 * ((i as f64 * 2.399_963).sin()))
        .collect();
    let n = norm2(&v);
    v = scale(&v, 1.0 / n);
    let mut sigma = 0.0f64;
    for _ in 0..max_iters {
        let av = matvec(a, &v);
        let atav = mat_t_vec(a, &av);
        let n = norm2(&atav);
        if n == 0.0 {
            return 0.0;
        }
        let new_sigma = n.sqrt();
        v = scale(&atav, 1.0 / n);
        if (new_sigma - sigma).abs() <= rel_tol * new_sigma.max(1.0) {
            return new_sigma;
        }
        sigma = new_sigma;
    }
    sigma
}
