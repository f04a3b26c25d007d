//! Exact generalization bounds.
//!
//! For a signature family `S_ℓ` the averaged permuted moment of `K*` is at
//! most `(1 − Σ 𝔣𝔤) + max 𝔣 / (t + 1)`; with `t = 2R − 1`, `n*` unfamiliar
//! representatives and the `1/R` luck term this caps the success rate of
//! any fixed feature map under nearest-neighbour classification.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::combinatorics::{
    binomial_int, enumerate_signatures, factorial, int, stirling2_int, ComponentSignature,
    ExactScalar,
};
use crate::datamodel::ModelParams;
use crate::error::{Error, Result};
use crate::graphkernel::f_of_signature;

/// `|𝔊_k ∩ 𝔉|`: forests on `n_w` labelled vertices with `k_i` trees of size `i`.
pub fn forest_count(k: &ComponentSignature) -> BigInt {
    let mut num = factorial(k.ghat());
    let mut den = BigInt::one();
    for (idx, &ki) in k.counts().iter().enumerate() {
        den *= factorial(ki);
        let size = idx + 1;
        if size >= 2 && ki > 0 {
            let trees = BigInt::from(size).pow((size - 2) as u32);
            num *= trees.pow(ki as u32);
            den *= factorial(size).pow(ki as u32);
        }
    }
    debug_assert!((&num % &den).is_zero());
    num / den
}

/// `|ζ^{-1}(G)|` for any graph with `m` edges: `m! Σ_α C(L,α){α,m} 2^α n_w^{L−α}`.
pub fn preimage_count(edges: usize, length: usize, n_words: usize) -> BigInt {
    if edges > length {
        return BigInt::zero();
    }
    let n_w = BigInt::from(n_words);
    let mut sum = BigInt::zero();
    for alpha in edges..=length {
        sum += binomial_int(length, alpha)
            * stirling2_int(alpha, edges)
            * (BigInt::one() << alpha)
            * n_w.pow((length - alpha) as u32);
    }
    factorial(edges) * sum
}

/// `𝔤(k)`: lower bound on the fraction of sentence pairs whose graph has
/// signature `k`, counting only forests.
pub fn g_of_signature(k: &ComponentSignature, length: usize, n_words: usize) -> Result<ExactScalar> {
    if k.ghat() != n_words || k.gamma() > length {
        return Err(Error::param(format!(
            "signature {k} not in S for L = {length}, n_w = {n_words}"
        )));
    }
    let pairs = BigInt::from(n_words).pow(2 * length as u32);
    Ok(ExactScalar::new(
        forest_count(k) * preimage_count(k.gamma(), length, n_words),
        pairs,
    ))
}

struct Term {
    gamma: usize,
    f: ExactScalar,
    fg: ExactScalar,
}

/// Per-signature terms `(γ, 𝔣, 𝔣𝔤)` over all of `S`, shared by every `ℓ`.
pub struct BoundTable {
    params: ModelParams,
    terms: Vec<Term>,
}

impl BoundTable {
    pub fn new(params: &ModelParams) -> Result<Self> {
        let length = params.length();
        let n_w = params.n_words();
        let terms = enumerate_signatures(length, n_w, 0)?
            .into_iter()
            .map(|k| {
                let f = f_of_signature(&k, params);
                let g = g_of_signature(&k, length, n_w)?;
                Ok(Term {
                    gamma: k.gamma(),
                    fg: &f * &g,
                    f,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BoundTable {
            params: *params,
            terms,
        })
    }

    /// `(Σ_{S_ℓ} 𝔣𝔤, max_{S_ℓ} 𝔣, |S_ℓ|)`.
    fn family(&self, ell: usize) -> Result<(ExactScalar, ExactScalar, usize)> {
        if ell > self.params.length() {
            return Err(Error::param(format!(
                "ell = {ell} outside [0, L = {}]",
                self.params.length()
            )));
        }
        let mut sum = ExactScalar::zero();
        let mut max: Option<&ExactScalar> = None;
        let mut count = 0;
        for term in self.terms.iter().filter(|t| t.gamma >= ell) {
            sum += &term.fg;
            max = Some(match max {
                Some(m) if m >= &term.f => m,
                _ => &term.f,
            });
            count += 1;
        }
        match max {
            Some(m) => Ok((sum, m.clone(), count)),
            None => Err(Error::EmptySignatureSet {
                ell,
                length: self.params.length(),
                n_words: self.params.n_words(),
            }),
        }
    }

    /// Upper bound on `(1/|X|) Σ_x H_t(K*_x)` using the family `S_ℓ`.
    pub fn moment_bound(&self, t: u64, ell: usize) -> Result<ExactScalar> {
        let (sum, max, _) = self.family(ell)?;
        Ok(ExactScalar::one() - sum + max / int(t + 1))
    }

    /// `Σ_{k ∈ S_ℓ} 𝔣(k)𝔤(k)`.
    pub fn sum_fg(&self, ell: usize) -> Result<ExactScalar> {
        Ok(self.family(ell)?.0)
    }

    /// `max_{k ∈ S_ℓ} 𝔣(k)`.
    pub fn max_f(&self, ell: usize) -> Result<ExactScalar> {
        Ok(self.family(ell)?.1)
    }

    pub fn error_lower_bound(&self, ell: usize, n_star: usize) -> Result<BoundReport> {
        let (sum, max, count) = self.family(ell)?;
        let r = self.params.n_categories() as u64;
        let moment = ExactScalar::one() - &sum + &max / int(2 * r);
        let success = int(n_star as u64) * &moment + ExactScalar::new(BigInt::one(), BigInt::from(r));
        let error = ExactScalar::one() - &success;
        Ok(BoundReport {
            params: self.params,
            ell,
            n_star,
            moment_bound: moment,
            success_upper: success,
            error_lower: error,
            sum_fg: sum,
            max_f: max,
            signature_count: count,
        })
    }

    /// The tightest `error_lower_bound` over `ℓ = 0..=L`; ties go to the
    /// smaller `ℓ`.
    pub fn best_ell(&self, n_star: usize) -> Result<BoundReport> {
        let mut best: Option<BoundReport> = None;
        for ell in 0..=self.params.length() {
            let report = match self.error_lower_bound(ell, n_star) {
                Ok(r) => r,
                Err(Error::EmptySignatureSet { .. }) => continue,
                Err(e) => return Err(e),
            };
            if best.as_ref().is_none_or(|b| report.error_lower > b.error_lower) {
                best = Some(report);
            }
        }
        best.ok_or(Error::EmptySignatureSet {
            ell: 0,
            length: self.params.length(),
            n_words: self.params.n_words(),
        })
    }
}

pub fn moment_bound(params: &ModelParams, t: u64, ell: usize) -> Result<ExactScalar> {
    BoundTable::new(params)?.moment_bound(t, ell)
}

/// Lower bound on the expected error of any fixed feature map with `n*`
/// unfamiliar representatives per category, using the family `S_ℓ`.
pub fn error_lower_bound(params: &ModelParams, ell: usize, n_star: usize) -> Result<BoundReport> {
    BoundTable::new(params)?.error_lower_bound(ell, n_star)
}

pub fn best_ell(params: &ModelParams, n_star: usize) -> Result<BoundReport> {
    BoundTable::new(params)?.best_ell(n_star)
}

#[derive(Clone, Debug)]
pub struct BoundReport {
    pub params: ModelParams,
    pub ell: usize,
    pub n_star: usize,
    pub moment_bound: ExactScalar,
    pub success_upper: ExactScalar,
    pub error_lower: ExactScalar,
    pub sum_fg: ExactScalar,
    pub max_f: ExactScalar,
    pub signature_count: usize,
}

impl BoundReport {
    pub fn error_lower_f64(&self) -> f64 {
        self.error_lower.to_f64().unwrap_or(f64::NAN)
    }

    pub fn success_upper_f64(&self) -> f64 {
        self.success_upper.to_f64().unwrap_or(f64::NAN)
    }

    /// Error bound clipped to `[0, 1]` (vacuous bounds can be negative).
    pub fn error_lower_clamped(&self) -> f64 {
        self.error_lower_f64().clamp(0.0, 1.0)
    }

    pub fn success_upper_clamped(&self) -> f64 {
        self.success_upper_f64().clamp(0.0, 1.0)
    }

    pub fn summary(&self) -> BoundSummary {
        BoundSummary {
            params: self.params,
            ell: self.ell,
            n_star: self.n_star,
            signature_count: self.signature_count,
            moment_bound: to_decimal(&self.moment_bound, 15),
            success_upper: to_decimal(&self.success_upper, 15),
            error_lower: to_decimal(&self.error_lower, 15),
            error_lower_clamped: self.error_lower_clamped(),
            success_upper_clamped: self.success_upper_clamped(),
            error_lower_exact: self.error_lower.to_string(),
        }
    }
}

/// Serializable rendering of a [`BoundReport`].
#[derive(Clone, Debug, Serialize)]
pub struct BoundSummary {
    pub params: ModelParams,
    pub ell: usize,
    pub n_star: usize,
    pub signature_count: usize,
    pub moment_bound: String,
    pub success_upper: String,
    pub error_lower: String,
    pub error_lower_clamped: f64,
    pub success_upper_clamped: f64,
    pub error_lower_exact: String,
}

/// Rounds an exact rational to `digits` significant decimal digits
/// (half away from zero) and renders it without an exponent.
pub fn to_decimal(x: &ExactScalar, digits: usize) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    let neg = x.is_negative();
    let a = x.abs();
    let ten = BigInt::from(10);
    // exponent e with 10^e <= a < 10^(e+1)
    let mut e: i64 = a.to_integer().to_string().len() as i64 - 1;
    if a < ExactScalar::one() {
        e = -1;
        let mut scaled = &a * int(10u32);
        while scaled < ExactScalar::one() {
            scaled *= int(10u32);
            e -= 1;
        }
    }
    let mut shift = digits as i64 - 1 - e;
    let scaled = if shift >= 0 {
        &a * int(ten.pow(shift as u32))
    } else {
        &a / int(ten.pow((-shift) as u32))
    };
    let (q, r) = scaled.numer().div_rem(scaled.denom());
    let mut mant = q;
    if r * 2u32 >= *scaled.denom() {
        mant += 1u32;
    }
    if mant == ten.pow(digits as u32) {
        mant /= 10u32;
        shift -= 1;
    }
    let mut s = mant.to_string();
    let out = if shift <= 0 {
        s.push_str(&"0".repeat((-shift) as usize));
        s
    } else {
        let shift = shift as usize;
        if s.len() <= shift {
            s = "0".repeat(shift - s.len() + 1) + &s;
        }
        let (ip, fp) = s.split_at(s.len() - shift);
        format!("{ip}.{fp}")
    };
    if neg {
        format!("-{out}")
    } else {
        out
    }
}
