//! Randomized properties of the base maps, the series evaluator, and the
//! exact increment distributions.

use fracvar_core::base::BaseFunction;
use fracvar_core::fractal::FractalSpec;
use fracvar_core::increments::{
    exact_partial_sum_distribution, lemma1_value_budgeted, preferred_mode,
};
use fracvar_core::variation::partition_sum_budgeted;
use proptest::prelude::*;

fn arb_base(b: u32) -> impl Strategy<Value = BaseFunction> {
    prop_oneof![
        Just(BaseFunction::Tent),
        (0.1f64..2.0).prop_map(|a| BaseFunction::sine(a).unwrap()),
        (1..b).prop_map(move |ell| BaseFunction::skewed_tent(b, ell).unwrap()),
        (-0.5f64..0.5).prop_map(|y| {
            BaseFunction::piecewise_linear(vec![(0.0, 0.0), (0.4, y), (1.0, 0.0)]).unwrap()
        }),
    ]
}

proptest! {
    #[test]
    fn bases_are_periodic(b in 2u32..=4, t in 0.0f64..1.0, phi_seed in 0u32..4) {
        let phi = match phi_seed {
            0 => BaseFunction::Tent,
            1 => BaseFunction::sine(0.5).unwrap(),
            2 => BaseFunction::skewed_tent(b, 1).unwrap(),
            _ => BaseFunction::piecewise_linear(
                vec![(0.0, 0.0), (0.25, 0.3), (1.0, 0.0)]).unwrap(),
        };
        let v = phi.eval(t);
        prop_assert!((phi.eval(t + 1.0) - v).abs() <= 1e-12);
        prop_assert!((phi.eval(t + 3.0) - v).abs() <= 1e-12);
        prop_assert!(v.abs() <= phi.sup_norm() + 1e-12);
    }

    #[test]
    fn series_eval_agrees_on_badic_points(
        b in 2u32..=3,
        alpha_abs in 0.05f64..0.95,
        neg in any::<bool>(),
        n in 1u32..=6,
        phi in arb_base(2),
    ) {
        // skewed bases are tied to their b; restrict them to b = 2 inputs
        if matches!(phi, BaseFunction::SkewedTent { .. }) && b != 2 {
            return Ok(());
        }
        let alpha = if neg { -alpha_abs } else { alpha_abs };
        let spec = FractalSpec::new(phi, b, alpha).unwrap();
        let bn = u64::from(b).pow(n);
        let k = bn / 3;
        let exact = spec.eval_f_badic(k, n).unwrap();
        let truncated = spec.eval_f(k as f64 / bn as f64, 1e-13).unwrap();
        prop_assert!((exact - truncated).abs() <= 1e-11,
            "k={k} n={n}: {exact} vs {truncated}");
    }

    #[test]
    fn distribution_probabilities_sum_to_one(
        b in 2u32..=3,
        alpha_abs in 0.4f64..0.9,
        n in 1u32..=8,
        phi in arb_base(3),
    ) {
        if matches!(phi, BaseFunction::SkewedTent { .. }) && b != 3 {
            return Ok(());
        }
        if alpha_abs * f64::from(b) <= 1.0 {
            return Ok(());
        }
        let spec = FractalSpec::new(phi, b, alpha_abs).unwrap();
        let mode = preferred_mode(&spec);
        let dist = exact_partial_sum_distribution(&spec, n, mode, 1 << 22).unwrap();
        prop_assert!((dist.total_probability() - 1.0).abs() <= 1e-12);
        prop_assert_eq!(dist.depth, n);
    }

    #[test]
    fn moment_form_oracle_random_parameters(
        b in 2u32..=3,
        alpha_scaled in 0.05f64..0.95,
        neg in any::<bool>(),
        p in 1.0f64..4.0,
        n in 1u32..=5,
        phi in arb_base(2),
    ) {
        if matches!(phi, BaseFunction::SkewedTent { .. }) && b != 2 {
            return Ok(());
        }
        // map into the rough regime: |alpha| in (1/b, 1)
        let lo = 1.0 / f64::from(b);
        let alpha_abs = lo + (1.0 - lo) * (0.02 + 0.96 * alpha_scaled);
        let alpha = if neg { -alpha_abs } else { alpha_abs };
        let spec = FractalSpec::new(phi, b, alpha).unwrap();
        let direct = partition_sum_budgeted(&spec, p, 1.0, n, 1 << 22).unwrap();
        let via_moments = lemma1_value_budgeted(&spec, p, n, 1 << 22).unwrap();
        prop_assert!((via_moments - direct).abs() <= 1e-9 * direct.max(1.0),
            "{via_moments} vs {direct}");
    }
}
