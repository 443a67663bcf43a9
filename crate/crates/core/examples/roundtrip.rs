//! Fit curves generated from known parameters and report how much of the
//! generating Kabs comes back.
//!
//! `cargo run --release --example roundtrip -- [subjects] [max_evals]`

use std::time::Instant;

use glycosim_core::estimation::{fit, synthetic_subject, FitConfig};
use glycosim_core::model::{EstimatedParameters, FixedParameters};
use rand::{Rng, SeedableRng};

fn main() {
    let mut args = std::env::args().skip(1).map(|s| s.parse::<usize>().expect("expected a count"));
    let n = args.next().unwrap_or(3);
    let config = FitConfig {
        max_evals: args.next().unwrap_or(FitConfig::default().max_evals),
        ..FitConfig::default()
    };
    let fixed = FixedParameters::<f64>::default();
    let times: Vec<f64> = (0..=8).map(|i| 15.0 * i as f64).collect();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for k in 0..n {
        let theta = EstimatedParameters::from_array([
            rng.gen_range(0.008..0.02),
            rng.gen_range(0.05..0.09),
            rng.gen_range(0.08..0.29),
            rng.gen_range(0.04..0.095),
            rng.gen_range(0.68..0.85),
            rng.gen_range(0.001..0.008),
            rng.gen_range(1.7..2.3),
            rng.gen_range(0.002..0.006),
            rng.gen_range(0.005..0.015),
            rng.gen_range(0.01..0.04),
            rng.gen_range(3e-4..9e-4),
        ]);
        let gb = rng.gen_range(80.0..100.0);
        let subject = synthetic_subject(&format!("s{k}"), &fixed, &theta, gb, &times, &config).unwrap();
        let start = Instant::now();
        let res = fit(&subject, &fixed, &config).unwrap();
        println!(
            "{k}: loss {:.3e} after {} evals ({:?}), Kabs {:.4} vs {:.4} ({:+.1}%), min EGP {:.3}, {:.1}s",
            res.loss,
            res.evals,
            res.stop_reason,
            res.theta.k_abs,
            theta.k_abs,
            100.0 * (res.theta.k_abs / theta.k_abs - 1.0),
            res.min_egp,
            start.elapsed().as_secs_f64()
        );
    }
}
