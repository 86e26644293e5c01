//! Scale-free comparisons between per-layer matrices.

use crate::numerics::Mat;

pub fn cosine(a: &Mat, b: &Mat) -> f64 {
    let ab = a.dot(b).expect("same shape");
    let na = a.frobenius_norm();
    let nb = b.frobenius_norm();
    if na == 0.0 && nb == 0.0 {
        1.0
    } else if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        ab / (na * nb)
    }
}

/// Least-squares `c` minimizing `‖a − c·b‖`.
pub fn lsq_scale(a: &Mat, b: &Mat) -> f64 {
    let bb = b.dot(b).expect("same shape");
    if bb == 0.0 {
        0.0
    } else {
        a.dot(b).expect("same shape") / bb
    }
}

/// `‖a − c·b‖` with the least-squares `c`.
pub fn lsq_residual(a: &Mat, b: &Mat) -> f64 {
    let c = lsq_scale(a, b);
    let mut r = a.clone();
    r.add_scaled(-c, b).expect("same shape");
    r.frobenius_norm()
}

/// Entrywise ratios `a_i / b_i` over entries where `|b_i|` exceeds
/// `floor · max|b|`. Returns `(mean ratio, (max − min) / |mean|)`.
pub fn ratio_spread(a: &Mat, b: &Mat, floor: f64) -> Option<(f64, f64)> {
    let cutoff = floor * b.max_abs();
    let ratios: Vec<f64> = a
        .data()
        .iter()
        .zip(b.data())
        .filter(|(_, &bi)| bi.abs() > cutoff && bi != 0.0)
        .map(|(&ai, &bi)| ai / bi)
        .collect();
    if ratios.is_empty() {
        return None;
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Some((mean, (hi - lo) / mean.abs()))
}

/// Largest absolute entrywise difference.
pub fn max_abs_diff(a: &Mat, b: &Mat) -> f64 {
    a.sub(b).expect("same shape").max_abs()
}
