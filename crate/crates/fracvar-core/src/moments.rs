//! Moments of (non-symmetric) infinite Bernoulli convolutions
//! `Z = sum_m gamma^m Y_m` via the conditioning recursion, with exact
//! rational and truncated-enumeration cross-checks.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{CoreError, Result};
use crate::increments::{
    expected_abs_power, iid_distribution, markov_distribution, IIDTwoPointLaw,
    IncrementDistribution, MarkovTernaryLaw,
};
use crate::kahan::KahanSum;

/// Moments `E[Z^k]`, `k = 0..=K`, of the convolution with two-point
/// increment law `(mu, nu, p)` and geometric weight `gamma`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTable {
    pub mu: f64,
    pub nu: f64,
    pub p: f64,
    pub gamma: f64,
    pub moments: Vec<f64>,
}

fn check_law(mu: f64, nu: f64, p: f64, gamma: f64) -> Result<()> {
    if !(gamma.abs() < 1.0) || gamma == 0.0 {
        return Err(CoreError::invalid(format!(
            "gamma must satisfy 0 < |gamma| < 1, got {gamma}"
        )));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(CoreError::invalid(format!("p must lie in (0,1), got {p}")));
    }
    if !mu.is_finite() || !nu.is_finite() {
        return Err(CoreError::invalid("mu and nu must be finite"));
    }
    Ok(())
}

/// Moment recursion
/// `E[Z^k] = gamma^k/(1-gamma^k) * sum_{j<k} C(k,j) (p nu^{k-j} + (1-p) mu^{k-j}) E[Z^j]`.
///
/// Valid for `gamma` in `(-1,1) \ {0}`; binomials come from Pascal's rule
/// and the inner sum is compensated.
pub fn moments_recursive(mu: f64, nu: f64, p: f64, gamma: f64, k_max: u32) -> Result<MomentTable> {
    check_law(mu, nu, p, gamma)?;
    let k_max = k_max as usize;
    let mut moments = vec![0.0; k_max + 1];
    moments[0] = 1.0;
    // Pascal row, extended in place.
    let mut binom: Vec<f64> = vec![1.0];
    let mut gamma_k = 1.0;
    for k in 1..=k_max {
        binom.push(1.0);
        for j in (1..k).rev() {
            binom[j] += binom[j - 1];
        }
        gamma_k *= gamma;
        let mut acc = KahanSum::new();
        // powers nu^{k-j}, mu^{k-j} walked down from j = k-1 to 0
        let mut nu_pow = nu;
        let mut mu_pow = mu;
        for j in (0..k).rev() {
            acc += binom[j] * (p * nu_pow + (1.0 - p) * mu_pow) * moments[j];
            nu_pow *= nu;
            mu_pow *= mu;
        }
        moments[k] = gamma_k / (1.0 - gamma_k) * acc.value();
    }
    Ok(MomentTable {
        mu,
        nu,
        p,
        gamma,
        moments,
    })
}

/// Exact-rational version of the moment recursion, for laws with rational
/// parameters.
pub fn moments_recursive_rational(
    mu: &BigRational,
    nu: &BigRational,
    p: &BigRational,
    gamma: &BigRational,
    k_max: u32,
) -> Result<Vec<BigRational>> {
    let one = BigRational::one();
    if gamma.abs() >= one || gamma.is_zero() {
        return Err(CoreError::invalid("gamma must satisfy 0 < |gamma| < 1"));
    }
    if p <= &BigRational::zero() || p >= &one {
        return Err(CoreError::invalid("p must lie in (0,1)"));
    }
    let k_max = k_max as usize;
    let q = &one - p;
    let mut moments = vec![BigRational::zero(); k_max + 1];
    moments[0] = one.clone();
    let mut binom: Vec<BigInt> = vec![BigInt::one()];
    let mut gamma_k = one.clone();
    for k in 1..=k_max {
        binom.push(BigInt::one());
        for j in (1..k).rev() {
            let prev = binom[j - 1].clone();
            binom[j] += prev;
        }
        gamma_k *= gamma;
        let mut sum = BigRational::zero();
        let mut nu_pow = nu.clone();
        let mut mu_pow = mu.clone();
        for j in (0..k).rev() {
            let step = (p * &nu_pow + &q * &mu_pow) * &moments[j];
            sum += BigRational::from(binom[j].clone()) * step;
            nu_pow *= nu;
            mu_pow *= mu;
        }
        moments[k] = &gamma_k / (&one - &gamma_k) * sum;
    }
    Ok(moments)
}

/// Sign of the odd moments `E[Z^k]`, `k >= 3` odd, for a centered law with
/// `mu < 0 < nu` and `gamma` in `(0,1)`: it equals `sign(nu + mu)`.
pub fn odd_moment_sign(mu: f64, nu: f64, p: f64, gamma: f64, k: u32) -> Result<i8> {
    check_law(mu, nu, p, gamma)?;
    if gamma <= 0.0 {
        return Err(CoreError::invalid("odd moment sign requires gamma in (0,1)"));
    }
    if !(mu < 0.0 && nu > 0.0) {
        return Err(CoreError::invalid("odd moment sign requires mu < 0 < nu"));
    }
    if (p * nu + (1.0 - p) * mu).abs() > 1e-12 {
        return Err(CoreError::invalid("law must be centered: p*nu + (1-p)*mu = 0"));
    }
    if k % 2 == 0 || k < 3 {
        return Err(CoreError::invalid(format!("k must be odd and >= 3, got {k}")));
    }
    let s = nu + mu;
    Ok(if s.abs() <= 1e-12 {
        0
    } else if s > 0.0 {
        1
    } else {
        -1
    })
}

/// Either increment law of the (skewed) tent family, as input to the
/// truncated enumeration of `E[|Z|^q]`.
#[derive(Debug, Clone, PartialEq)]
pub enum IncrementLaw {
    TwoPoint(IIDTwoPointLaw),
    Ternary(MarkovTernaryLaw),
}

impl IncrementLaw {
    /// Exact law of the depth-`n` truncation `S_n = sum_{m<=n} gamma^m Y_m`.
    pub fn distribution(&self, gamma: f64, n: u32) -> IncrementDistribution {
        match self {
            IncrementLaw::TwoPoint(law) => iid_distribution(law, gamma, n),
            IncrementLaw::Ternary(law) => markov_distribution(law, gamma, n),
        }
    }

    /// Bound on `|Y_m|`.
    pub fn max_abs_step(&self) -> f64 {
        match self {
            IncrementLaw::TwoPoint(law) => law.mu.abs().max(law.nu.abs()),
            IncrementLaw::Ternary(_) => 1.0,
        }
    }

    pub fn atoms_required(&self, n: u32) -> u64 {
        match self {
            IncrementLaw::TwoPoint(_) => 1u64 << n.min(63),
            IncrementLaw::Ternary(_) => {
                if n == 0 {
                    1
                } else {
                    3u64.saturating_mul(1u64 << (n - 1).min(62))
                }
            }
        }
    }
}

/// Truncated absolute moment with a rigorous tail bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedMoment {
    pub value: f64,
    pub error_bound: f64,
    pub depth: u32,
}

/// Tail bound on `|E[|Z|^q] - E[|S_N|^q]|` from `|Z - S_N| <= delta` and
/// `||x|^q - |y|^q| <= q max(|x|,|y|)^{q-1} |x - y|` for `q >= 1`.
pub fn moment_tail_bound(max_abs_step: f64, gamma: f64, q: f64, depth: u32) -> f64 {
    let g = gamma.abs();
    let delta = max_abs_step * g.powi(depth as i32 + 1) / (1.0 - g);
    let bound_z = max_abs_step * g / (1.0 - g);
    q * bound_z.powf(q - 1.0) * delta
}

/// `E[|S_N|^q]` by exact enumeration, with the tail bound above.
pub fn abs_moment_truncated(
    law: &IncrementLaw,
    gamma: f64,
    q: f64,
    depth: u32,
    budget: u64,
) -> Result<TruncatedMoment> {
    if !(gamma.abs() < 1.0) || gamma == 0.0 {
        return Err(CoreError::invalid("gamma must satisfy 0 < |gamma| < 1"));
    }
    if !(q >= 1.0) {
        return Err(CoreError::invalid(format!("tail bound requires q >= 1, got {q}")));
    }
    let required = law.atoms_required(depth);
    if required > budget {
        return Err(CoreError::BudgetExceeded {
            operation: "abs_moment_truncated",
            n: depth,
            required,
            budget,
        });
    }
    let dist = law.distribution(gamma, depth);
    Ok(TruncatedMoment {
        value: expected_abs_power(&dist, q),
        error_bound: moment_tail_bound(law.max_abs_step(), gamma, q, depth),
        depth,
    })
}

/// Closed form of the third moment for the skewed-tent law at
/// `gamma = b^{-2/3}`: `b^3 (b - 2 ell) / (8 (b^2-1) ell^2 (b-ell)^2)`.
pub fn skewed_third_moment_closed_form(b: u32, ell: u32) -> f64 {
    let b = f64::from(b);
    let ell = f64::from(ell);
    b.powi(3) * (b - 2.0 * ell) / (8.0 * (b * b - 1.0) * ell * ell * (b - ell) * (b - ell))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::increments::{iid_params, markov_params};

    fn big(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn third_moment_b3_l1() {
        let gamma = 3.0f64.powf(-2.0 / 3.0);
        let table = moments_recursive(-0.75, 1.5, 1.0 / 3.0, gamma, 3).unwrap();
        let expected = 27.0 / 256.0;
        assert!(
            ((table.moments[3] - expected) / expected).abs() < 1e-12,
            "got {}",
            table.moments[3]
        );
    }

    #[test]
    fn third_moment_b6_l5_matches_closed_form() {
        // The closed form gives -108/875 here; the recursion must agree.
        let gamma = 6.0f64.powf(-2.0 / 3.0);
        let table = moments_recursive(-3.0, 0.6, 5.0 / 6.0, gamma, 3).unwrap();
        let expected = -108.0 / 875.0;
        assert!(
            ((table.moments[3] - expected) / expected).abs() < 1e-12,
            "got {}",
            table.moments[3]
        );
        assert!(
            ((skewed_third_moment_closed_form(6, 5) - expected) / expected).abs() < 1e-15
        );
    }

    #[test]
    fn centered_law_first_moment_vanishes() {
        let table = moments_recursive(-0.75, 1.5, 1.0 / 3.0, 0.3, 1).unwrap();
        assert!(table.moments[1].abs() < 1e-16);
    }

    #[test]
    fn symmetric_law_odd_moments_vanish() {
        let table = moments_recursive(-1.0, 1.0, 0.5, 0.5, 5).unwrap();
        assert_eq!(table.moments[0], 1.0);
        assert!(table.moments[1].abs() < 1e-16);
        assert!(table.moments[3].abs() < 1e-16);
        assert!(table.moments[5].abs() < 1e-16);
        assert!((table.moments[2] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rational_recursion_is_exact() {
        // gamma = 1/2 symmetric law: E[Z^2] = 1/3, E[Z^4] = (1/15)*(1+6*(1/3)) = 1/5
        let m = moments_recursive_rational(&big(-1, 1), &big(1, 1), &big(1, 2), &big(1, 2), 4)
            .unwrap();
        assert_eq!(m[2], big(1, 3));
        assert!(m[3].is_zero());
        assert_eq!(m[4], big(1, 5));
    }

    #[test]
    fn rational_and_float_recursions_agree() {
        use num_traits::ToPrimitive;
        let m = moments_recursive_rational(&big(-3, 4), &big(3, 2), &big(1, 3), &big(2, 5), 6)
            .unwrap();
        let t = moments_recursive(-0.75, 1.5, 1.0 / 3.0, 0.4, 6).unwrap();
        for k in 0..=6usize {
            let exact = m[k].to_f64().unwrap();
            assert!(
                (t.moments[k] - exact).abs() <= 1e-13 * exact.abs().max(1.0),
                "k={k}: float {} exact {exact}",
                t.moments[k]
            );
        }
    }

    #[test]
    fn odd_moment_sign_cases() {
        assert_eq!(odd_moment_sign(-1.0, 1.0, 0.5, 0.6, 3).unwrap(), 0);
        let law = iid_params(3, 1).unwrap();
        assert_eq!(odd_moment_sign(law.mu, law.nu, law.p, 0.48, 3).unwrap(), 1);
        let law = iid_params(6, 5).unwrap();
        assert_eq!(odd_moment_sign(law.mu, law.nu, law.p, 0.3, 3).unwrap(), -1);
        // sign agrees with the recursion
        let gamma = 6.0f64.powf(-2.0 / 3.0);
        let table = moments_recursive(law.mu, law.nu, law.p, gamma, 3).unwrap();
        assert!(table.moments[3] < 0.0);
    }

    #[test]
    fn odd_moment_sign_rejects_bad_input() {
        assert!(odd_moment_sign(-1.0, 1.0, 0.4, 0.6, 3).is_err()); // not centered
        assert!(odd_moment_sign(1.0, 2.0, 0.5, 0.6, 3).is_err()); // mu > 0
        assert!(odd_moment_sign(-1.0, 1.0, 0.5, -0.6, 3).is_err()); // gamma < 0
        assert!(odd_moment_sign(-1.0, 1.0, 0.5, 0.6, 4).is_err()); // even k
    }

    #[test]
    fn truncated_second_moment_matches_recursion() {
        let law = IncrementLaw::TwoPoint(iid_params(2, 1).unwrap());
        let gamma = 0.5f64.sqrt();
        let tm = abs_moment_truncated(&law, gamma, 2.0, 20, 1 << 21).unwrap();
        let rec = moments_recursive(-1.0, 1.0, 0.5, gamma, 2).unwrap();
        assert!((tm.value - rec.moments[2]).abs() <= tm.error_bound);
    }

    #[test]
    fn truncated_third_moment_floors_signed_value() {
        let law = IncrementLaw::TwoPoint(iid_params(3, 1).unwrap());
        let gamma = 3.0f64.powf(-2.0 / 3.0);
        let tm = abs_moment_truncated(&law, gamma, 3.0, 20, 1 << 31).unwrap();
        // E[|Z|^3] >= |E[Z^3]| = 27/256
        assert!(tm.value + tm.error_bound >= 27.0 / 256.0);
    }

    #[test]
    fn one_step_symmetric_first_abs_moment() {
        let law = IncrementLaw::TwoPoint(iid_params(2, 1).unwrap());
        let tm = abs_moment_truncated(&law, 0.6, 1.0, 1, 1 << 10).unwrap();
        assert!((tm.value - 0.6).abs() < 1e-15);
    }

    #[test]
    fn ternary_law_usable() {
        let law = IncrementLaw::Ternary(markov_params(3).unwrap());
        let tm = abs_moment_truncated(&law, 0.5, 2.0, 12, 1 << 20).unwrap();
        assert!(tm.value > 0.0);
        assert!(tm.error_bound > 0.0);
    }

    #[test]
    fn closed_form_family_matches_recursion() {
        for b in 2..=8u32 {
            for ell in 1..b {
                let law = iid_params(b, ell).unwrap();
                let gamma = f64::from(b).powf(-2.0 / 3.0);
                let table = moments_recursive(law.mu, law.nu, law.p, gamma, 3).unwrap();
                let closed = skewed_third_moment_closed_form(b, ell);
                let scale = closed.abs().max(1e-300);
                if closed == 0.0 {
                    assert!(table.moments[3].abs() < 1e-15);
                } else {
                    assert!(
                        ((table.moments[3] - closed) / scale).abs() < 1e-12,
                        "b={b} ell={ell}: recursion {} closed {closed}",
                        table.moments[3]
                    );
                }
            }
        }
    }
}
