//! The permuted moment `H_t(u) = max_σ Σ_i (i/N)^t u_σ(i)`.
//!
//! The maximising permutation sorts `u` ascending, so `H_t` is a sort and a
//! dot product.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::combinatorics::ExactScalar;
use crate::error::{Error, Result};

/// `H_t(u)` for a non-negative vector, with `0^0 = 1`.
pub fn permuted_moment(u: &[f64], t: u32) -> Result<f64> {
    if u.is_empty() {
        return Err(Error::param("permuted moment of an empty vector"));
    }
    if u.iter().any(|&x| !(x >= 0.0)) {
        return Err(Error::param("permuted moment requires non-negative entries"));
    }
    let mut sorted = u.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(moment_of_sorted(&sorted, t))
}

fn moment_of_sorted(sorted: &[f64], t: u32) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| (i as f64 / n).powi(t as i32) * x)
        .sum()
}

/// Exact `H_t(u)` for rational entries.
pub fn permuted_moment_exact(u: &[ExactScalar], t: u32) -> Result<ExactScalar> {
    if u.is_empty() {
        return Err(Error::param("permuted moment of an empty vector"));
    }
    if u.iter().any(|x| x < &ExactScalar::zero()) {
        return Err(Error::param("permuted moment requires non-negative entries"));
    }
    let mut sorted: Vec<&ExactScalar> = u.iter().collect();
    sorted.sort();
    let n = BigInt::from(sorted.len());
    let denom = n.pow(t);
    let mut acc = ExactScalar::zero();
    for (i, x) in sorted.into_iter().enumerate() {
        let w = if t == 0 {
            BigInt::one()
        } else {
            BigInt::from(i).pow(t)
        };
        if !w.is_zero() {
            acc += x * ExactScalar::from_integer(w);
        }
    }
    Ok(acc / ExactScalar::from_integer(denom))
}

/// `(1 − Σ min{p_i, λ}) + λN/(t+1)`, an upper bound on `H_t(p)` for a
/// probability vector `p`.
pub fn lambda_moment_bound(p: &[f64], t: u32, lambda: f64) -> Result<f64> {
    if p.is_empty() || p.iter().any(|&x| !(x >= 0.0)) {
        return Err(Error::param("lambda bound requires a non-negative vector"));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::param(format!("entries sum to {total}, not 1")));
    }
    if !(lambda >= 0.0) {
        return Err(Error::param("lambda must be >= 0"));
    }
    let clipped: f64 = p.iter().map(|&x| x.min(lambda)).sum();
    Ok((1.0 - clipped) + lambda * p.len() as f64 / (t as f64 + 1.0))
}
