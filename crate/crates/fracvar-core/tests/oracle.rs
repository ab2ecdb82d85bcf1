//! Cross-route oracle tests: the moment form of the partition sum must
//! reproduce the direct grid computation, and the exact increment laws
//! must match brute-force enumeration in rational arithmetic.

use fracvar_core::base::BaseFunction;
use fracvar_core::fractal::FractalSpec;
use fracvar_core::increments::{
    iid_params, lambda_coeff, lemma1_value_budgeted, markov_params, skewed_increment_is_up,
    tent_increment_sign,
};
use fracvar_core::variation::partition_sum_budgeted;

fn base_kinds(b: u32) -> Vec<BaseFunction> {
    let mut kinds = vec![
        BaseFunction::Tent,
        BaseFunction::sine(0.5).unwrap(),
        BaseFunction::piecewise_linear(vec![(0.0, 0.0), (0.3, 0.4), (0.7, -0.2), (1.0, 0.0)])
            .unwrap(),
        BaseFunction::degenerate(BaseFunction::sine(1.0).unwrap(), 0.6, b).unwrap(),
    ];
    kinds.push(BaseFunction::skewed_tent(b, 1).unwrap());
    kinds
}

/// Moment-form identity: V_{p,1,n}(f) = (|alpha|^p b)^n E[|S_n|^p],
/// checked over all base kinds, both alpha signs, several p, n <= 8.
#[test]
fn moment_form_matches_partition_sum_grid() {
    let budget = 1 << 24;
    for b in [2u32, 3] {
        for phi in base_kinds(b) {
            for &alpha_abs in &[0.45f64, 0.7] {
                if alpha_abs * f64::from(b) <= 1.0 {
                    continue;
                }
                for &sign in &[1.0f64, -1.0] {
                    let spec = FractalSpec::new(phi.clone(), b, sign * alpha_abs).unwrap();
                    for &p in &[1.0f64, 2.0, 3.0, 4.5] {
                        for n in 1..=8u32 {
                            let direct =
                                partition_sum_budgeted(&spec, p, 1.0, n, budget).unwrap();
                            let via_moments =
                                lemma1_value_budgeted(&spec, p, n, budget).unwrap();
                            let tol = 1e-9 * direct.max(1.0);
                            assert!(
                                (via_moments - direct).abs() <= tol,
                                "b={b} phi={} alpha={} p={p} n={n}: {via_moments} vs {direct}",
                                phi.kind_name(),
                                sign * alpha_abs,
                            );
                        }
                    }
                }
            }
        }
    }
}

/// The chord of phi over [K b^-m, (K+1) b^-m] for an arbitrary (unreduced)
/// index K equals lambda_{m, K mod b^m}: the coefficient only sees the
/// residue, by periodicity. This is the telescoping device behind the
/// moment form.
#[test]
fn lambda_depends_on_residue_only() {
    for b in [2u32, 3] {
        for phi in base_kinds(b) {
            let n = 6u32;
            let bn = u64::from(b).pow(n);
            for m in 1..=n {
                let bm = u64::from(b).pow(m);
                for big_k in (0..bn).step_by(7) {
                    let via_table = lambda_coeff(&phi, b, m, big_k % bm).unwrap();
                    let step = 1.0 / bm as f64;
                    let raw = (phi.eval((big_k + 1) as f64 * step) - phi.eval(big_k as f64 * step))
                        / step;
                    assert!(
                        (via_table - raw).abs() <= 1e-9 * bm as f64,
                        "b={b} phi={} m={m} K={big_k}: {via_table} vs {raw}",
                        phi.kind_name(),
                    );
                }
            }
        }
    }
}

/// The transition frequencies of the ternary chain, counted exactly over
/// the uniform site variable, equal the law's rational matrix entrywise.
#[test]
fn markov_transition_frequencies_exact() {
    for b in [3u32, 5] {
        let law = markov_params(b).unwrap();
        let b64 = u64::from(b);
        for m in 2..=6u32 {
            let bm = b64.pow(m);
            // counts[i][j]: over uniform R_m, pairs (Y_{m-1}, Y_m) = (i, j)
            let mut counts = [[0u64; 3]; 3];
            let mut state_counts = [0u64; 3];
            for k in 0..bm {
                let prev = tent_increment_sign(bm / b64, k % (bm / b64));
                let cur = tent_increment_sign(bm, k);
                let i = (prev + 1) as usize;
                let j = (cur + 1) as usize;
                counts[i][j] += 1;
                state_counts[i] += 1;
            }
            for i in 0..3 {
                for j in 0..3 {
                    // counts[i][j] / state_counts[i] == transition[i][j], as
                    // exact rationals: cross-multiply in integers.
                    let t = law.transition[i][j];
                    let lhs = counts[i][j] as i128 * *t.denom() as i128;
                    let rhs = state_counts[i] as i128 * *t.numer() as i128;
                    assert_eq!(lhs, rhs, "b={b} m={m} ({i},{j})");
                }
            }
        }
        // initial distribution at m=1
        let mut init = [0u64; 3];
        for k in 0..b64 {
            init[(tent_increment_sign(b64, k) + 1) as usize] += 1;
        }
        for i in 0..3 {
            let t = law.initial[i];
            assert_eq!(init[i] as i128 * *t.denom() as i128, b64 as i128 * *t.numer() as i128);
        }
    }
}

/// The two-point law of the skewed tent: exact up-step frequency ell/b at
/// every level, and successive steps are independent (product law).
#[test]
fn iid_frequencies_and_independence_exact() {
    for (b, ell) in [(2u32, 1u32), (3, 1), (6, 5)] {
        let law = iid_params(b, ell).unwrap();
        assert_eq!(law.p, f64::from(ell) / f64::from(b));
        let b64 = u64::from(b);
        for m in 1..=6u32 {
            let bm = b64.pow(m);
            let ups: u64 = (0..bm).filter(|&k| skewed_increment_is_up(b, ell, m, k)).count() as u64;
            // exact: ell * b^{m-1} up-steps out of b^m
            assert_eq!(ups, u64::from(ell) * b64.pow(m - 1), "b={b} ell={ell} m={m}");
            if m >= 2 {
                // joint frequency of (up at m-1, up at m) must be the product
                let joint: u64 = (0..bm)
                    .filter(|&k| {
                        skewed_increment_is_up(b, ell, m - 1, k % (bm / b64))
                            && skewed_increment_is_up(b, ell, m, k)
                    })
                    .count() as u64;
                // joint / b^m == (ell/b)^2 exactly
                assert_eq!(
                    joint as u128 * u128::from(b64) * u128::from(b64),
                    u128::from(bm) * u128::from(ell) * u128::from(ell)
                );
            }
        }
    }
}
