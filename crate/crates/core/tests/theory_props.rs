use perclab::random_walk::hitting_probability;
use perclab::theory::{self, Regime};
use perclab::ModelParams;
use proptest::prelude::*;

fn factorial(m: u32) -> f64 {
    (1..=m).map(f64::from).product()
}

/// Tuples with `10/n <= p <= 0.1 n^(-1/k)`, so the threshold is moderate.
fn tuples() -> impl Strategy<Value = ModelParams> {
    (
        2u32..=6,
        3.0f64..8.0,
        0.0f64..1.0,
        0.0f64..0.95,
        0.1f64..10.0,
    )
        .prop_filter_map("empty p range", |(k, log_n, frac, tau, gamma)| {
            let n = 10f64.powf(log_n).round() as usize;
            let lo = (10.0 / n as f64).ln();
            let hi = (0.1 * (n as f64).powf(-1.0 / k as f64)).ln();
            if lo >= hi {
                return None;
            }
            let p = (lo + frac * (hi - lo)).exp();
            Some(ModelParams::new(n, p, k, tau, gamma.min(1.0 / p), 0, 0))
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn threshold_ignores_gamma(params in tuples(), gamma in 0.01f64..50.0) {
        let other = ModelParams { gamma: gamma.min(1.0 / params.p), ..params };
        prop_assert_eq!(
            theory::compute_threshold(&params).unwrap().to_bits(),
            theory::compute_threshold(&other).unwrap().to_bits()
        );
    }

    #[test]
    fn lambda_is_a_fixed_point(params in tuples()) {
        let k = params.k as i32;
        let lambda = theory::compute_lambda(&params).unwrap();
        let coef = (1.0 - params.tau).powi(k) * params.n as f64 * params.p.powi(k)
            / factorial(params.k - 1);
        prop_assert!((coef * lambda.powi(k) - lambda).abs() <= 1e-12 * lambda);
    }

    #[test]
    fn trajectory_grows_at_least_geometrically(params in tuples(), c in 1.0f64..8.0) {
        let a_c = theory::compute_threshold(&params).unwrap();
        let bound = c.powf((params.k - 1) as f64 / params.k as f64);
        let traj = theory::trajectory_from_start(&params, c * a_c, 500, 10.0 * params.n as f64);
        for w in traj.windows(2) {
            prop_assert!(w[1] / w[0] >= bound * (1.0 - 1e-12), "{} < {}", w[1] / w[0], bound);
        }
    }

    #[test]
    fn trajectory_strictly_increases(params in tuples(), a0 in 1usize..1000) {
        let params = params.with_a0(a0.min(params.n));
        let traj = theory::expected_trajectory(&params, 50, 10.0 * params.n as f64).unwrap();
        // strict until a subcritical trajectory converges in floating point
        let settled = traj.windows(2).position(|w| w[1] == w[0]).unwrap_or(traj.len());
        prop_assert!(traj[..settled.min(traj.len())].windows(2).all(|w| w[1] > w[0]));
        prop_assert!(traj[settled.min(traj.len() - 1)..].windows(2).all(|w| w[1] == w[0]));
    }

    #[test]
    fn normalized_size_is_n_times_hitting(params in tuples()) {
        let a_c = theory::compute_threshold(&params).unwrap();
        prop_assume!(2.0 * a_c <= params.n as f64);
        let params = params.with_a0((2.0 * a_c).ceil() as usize);
        let pred = theory::predict_final_size(&params).unwrap();
        prop_assume!(pred.regime != Regime::Border);
        let beta = theory::compute_beta(params.tau, params.gamma).unwrap();
        let expected = params.n as f64 * hitting_probability(beta, params.k);
        let got = pred.value.unwrap();
        prop_assert!((got - expected).abs() <= 1e-12 * expected, "{got} vs {expected}");
        if params.excitation_dominates() {
            prop_assert_eq!(pred.regime, Regime::Percolates);
        }
    }

    #[test]
    fn beta_above_half_iff_excitation_dominates(tau in 0.0f64..1.0, gamma in 0.01f64..20.0) {
        let beta = theory::compute_beta(tau, gamma).unwrap();
        prop_assert!((0.0..=1.0).contains(&beta));
        let balance = tau * (1.0 + gamma);
        prop_assume!((balance - 1.0).abs() > 1e-9);
        prop_assert_eq!(beta > 0.5, balance < 1.0);
    }
}

/// Starting the expected trajectory at `floor(a_hat_0)` instead of `a_hat_0`
/// should barely move `a_hat_ell` once `a_hat_0 >= (ln n)^(2+eps)`.
#[test]
fn rounding_down_the_start_is_harmless() {
    let sets = [
        ModelParams::new(100_000, 2.24e-4, 2, 0.0, 1.0, 0, 0),
        ModelParams::new(100_000, 3.16e-4, 2, 0.5, 3.0, 0, 0),
        ModelParams::new(20_000, 0.01, 3, 0.3, 5.0, 0, 0),
        ModelParams::new(1_000_000, 1e-4, 2, 0.0, 1.0, 0, 0),
    ];
    let mut failures = Vec::new();
    for params in sets {
        let n = params.n as f64;
        let a_c = theory::compute_threshold(&params).unwrap();
        let floor = n.ln().powf(2.1);
        let cut = 0.1 * n;
        let mut worst = (0.0f64, 0.0);
        for i in 0..2000 {
            let c = 1.5 * (50.0f64 / 1.5).powf(i as f64 / 1999.0);
            let start = c * a_c;
            if start < floor || start > cut {
                continue;
            }
            let (ell, at_ell) = theory::ell_from_start(&params, start, cut, 10_000).unwrap();
            let rounded = theory::trajectory_from_start(&params, start.floor(), ell, f64::INFINITY);
            let dev = (rounded[ell] - at_ell).abs() / at_ell;
            if dev > worst.0 {
                worst = (dev, c);
            }
        }
        if worst.0 > 0.01 {
            failures.push(format!(
                "n={} p={} k={} tau={}: {:.2}% at c={:.3}",
                params.n,
                params.p,
                params.k,
                params.tau,
                100.0 * worst.0,
                worst.1
            ));
        }
    }
    assert!(failures.is_empty(), "deviation above 1%: {failures:?}");
}
