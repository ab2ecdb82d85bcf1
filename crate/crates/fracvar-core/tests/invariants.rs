//! Analytic invariants: perturbation stability of the partition sums,
//! cross-method agreement of the moment computations, and the sign law
//! for odd moments.

use fracvar_core::base::BaseFunction;
use fracvar_core::fractal::FractalSpec;
use fracvar_core::increments::{expected_power, mc_estimate, IIDTwoPointLaw};
use fracvar_core::moments::{
    moment_tail_bound, moments_recursive, odd_moment_sign, IncrementLaw,
};
use fracvar_core::variation::{
    partition_sum, partition_sum_of, signed_partition_sum_of, variation_series,
};

const BUDGET: u64 = 1 << 22;

fn binom(n: u32, k: u32) -> f64 {
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * f64::from(n - i) / f64::from(i + 1);
    }
    acc
}

#[test]
fn total_variation_sums_nondecreasing() {
    for alpha in [0.25f64, 0.7] {
        let spec = FractalSpec::new(BaseFunction::Tent, 2, alpha).unwrap();
        let series = variation_series(&spec, 1.0, 1.0, 1, 10, false, BUDGET).unwrap();
        for w in series.values.windows(2) {
            assert!(w[1].1 >= w[0].1 - 1e-12, "alpha={alpha}: {w:?}");
        }
    }
}

/// Lipschitz perturbations move the p-variation by at most a Minkowski
/// term that itself vanishes: |V(f+g)^{1/p} - V(f)^{1/p}| <= V(g)^{1/p}.
#[test]
fn lipschitz_perturbation_stability() {
    let spec = FractalSpec::new(BaseFunction::Tent, 2, 0.7).unwrap();
    let g = |t: f64| t * (1.0 - t);
    for p in [2.0f64, 3.0] {
        let mut prev_vg = f64::INFINITY;
        for n in 2..=10u32 {
            let vf = partition_sum(&spec, p, 1.0, n).unwrap();
            let vfg =
                partition_sum_of(|t| spec.eval_f(t, 1e-13).unwrap() + g(t), 2, p, 1.0, n).unwrap();
            let vg = partition_sum_of(g, 2, p, 1.0, n).unwrap();
            let lhs = (vfg.powf(1.0 / p) - vf.powf(1.0 / p)).abs();
            assert!(
                lhs <= vg.powf(1.0 / p) + 1e-9,
                "p={p} n={n}: {lhs} vs {}",
                vg.powf(1.0 / p)
            );
            assert!(vg < prev_vg, "V_p of the smooth part must decay");
            prev_vg = vg;
        }
    }
}

/// Signed-sum stability under a bounded-variation shift, with the
/// explicit Young-inequality majorant (exponents q > p, r = q/(q-1)).
#[test]
fn signed_stability_young_bound() {
    let spec = FractalSpec::new(BaseFunction::Tent, 2, 2.0f64.powf(-1.0 / 3.0)).unwrap();
    let h = |t: f64| spec.eval_f(t, 1e-13).unwrap();
    let g = |t: f64| t * (1.0 - t);
    let p = 3u32;
    let q = 4.0f64;
    let r = q / (q - 1.0);
    for n in 2..=8u32 {
        let lhs = (signed_partition_sum_of(|t| g(t) + h(t), 2, p, 1.0, n).unwrap()
            - signed_partition_sum_of(h, 2, p, 1.0, n).unwrap())
        .abs();
        let mut rhs = partition_sum_of(g, 2, f64::from(p), 1.0, n).unwrap();
        for l in 1..p {
            let c = binom(p, l);
            rhs += c / r * partition_sum_of(g, 2, f64::from(p - l) * r, 1.0, n).unwrap();
            rhs += c / q * partition_sum_of(h, 2, f64::from(l) * q, 1.0, n).unwrap();
        }
        assert!(lhs <= rhs + 1e-9, "n={n}: {lhs} vs {rhs}");
    }
}

/// In the rough regime the partial variation grows linearly in t.
#[test]
fn variation_linear_in_t() {
    let spec = FractalSpec::new(BaseFunction::Tent, 2, 0.7).unwrap();
    let q = spec.q_exponent().unwrap();
    let n = 10;
    let full = partition_sum(&spec, q, 1.0, n).unwrap();
    for t in [0.25f64, 0.5, 0.75] {
        let vt = partition_sum(&spec, q, t, n).unwrap();
        assert!(
            (vt - t * full).abs() / full <= 0.05,
            "t={t}: {vt} vs {}",
            t * full
        );
    }
}

/// Moment recursion against exact truncated enumeration on a spread of
/// centered two-point laws.
#[test]
fn recursion_matches_enumeration_on_random_laws() {
    // deterministic low-discrepancy sweep standing in for random draws
    let mut cases = Vec::new();
    for i in 0..20u32 {
        let x = f64::from(i) / 20.0;
        let mu = -0.1 - 2.4 * ((x * 7.13).fract());
        let nu = 0.1 + 2.4 * ((x * 3.71 + 0.29).fract());
        let gamma = 0.05 + 0.7 * ((x * 5.47 + 0.61).fract());
        cases.push((mu, nu, gamma));
    }
    let depth = 24u32;
    for (mu, nu, gamma) in cases {
        let p = -mu / (nu - mu);
        let table = moments_recursive(mu, nu, p, gamma, 6).unwrap();
        let law = IncrementLaw::TwoPoint(IIDTwoPointLaw {
            b: 0,
            ell: 0,
            mu,
            nu,
            p,
        });
        let dist = law.distribution(gamma, depth);
        for k in 1..=6u32 {
            let enumerated = expected_power(&dist, k);
            let bound = moment_tail_bound(law.max_abs_step(), gamma, f64::from(k), depth);
            assert!(
                (table.moments[k as usize] - enumerated).abs() <= bound + 1e-10,
                "mu={mu} nu={nu} gamma={gamma} k={k}: {} vs {enumerated} (bound {bound})",
                table.moments[k as usize]
            );
        }
    }
}

/// Moment recursion against Monte Carlo, 4 standard errors at 1e6 samples.
#[test]
fn recursion_matches_monte_carlo() {
    let spec = FractalSpec::new(BaseFunction::Tent, 2, 0.5f64.sqrt()).unwrap();
    // symmetric unit law at gamma = 2^{-1/2}: E[Z^2] = 1, E[Z^4] = 7/3
    let table = moments_recursive(-1.0, 1.0, 0.5, spec.gamma(), 4).unwrap();
    for k in [2u32, 4] {
        let est = mc_estimate(&spec, f64::from(k), false, None, 1_000_000, 17).unwrap();
        let diff = (est.estimate - table.moments[k as usize]).abs();
        assert!(
            diff <= 4.0 * est.std_error,
            "k={k}: {} vs {} (se {})",
            est.estimate,
            table.moments[k as usize],
            est.std_error
        );
    }
}

/// Odd moments take the sign of nu + mu, across a 10x10x10 grid of
/// centered laws.
#[test]
fn odd_moment_sign_grid() {
    for i in 1..=10u32 {
        let mu = -0.2 * f64::from(i);
        for j in 1..=10u32 {
            let nu = 0.2 * f64::from(j);
            let p = -mu / (nu - mu);
            for g in 1..=10u32 {
                let gamma = f64::from(g) / 11.0;
                let table = moments_recursive(mu, nu, p, gamma, 7).unwrap();
                for k in [3u32, 5, 7] {
                    let predicted = odd_moment_sign(mu, nu, p, gamma, k).unwrap();
                    let actual = table.moments[k as usize];
                    match predicted {
                        0 => assert!(
                            actual.abs() < 1e-12,
                            "mu={mu} nu={nu} gamma={gamma} k={k}: {actual}"
                        ),
                        s => assert!(
                            actual * f64::from(s) > 0.0,
                            "mu={mu} nu={nu} gamma={gamma} k={k}: {actual} vs sign {s}"
                        ),
                    }
                }
            }
        }
    }
}
