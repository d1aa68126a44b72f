use ecodrive::{DelayDistribution, SignalSpec, TruncatedGaussian};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

fn reference(mean: f64, sd: f64, lo: f64, hi: f64) -> (impl Fn(f64) -> f64, impl Fn(f64) -> f64) {
    let n = Normal::new(mean, sd).unwrap();
    let (a, b) = (n.cdf(lo), n.cdf(hi));
    let cdf = move |x: f64| ((n.cdf(x.clamp(lo, hi)) - a) / (b - a)).clamp(0.0, 1.0);
    let pdf = move |x: f64| {
        if (lo..=hi).contains(&x) {
            n.pdf(x) / (b - a)
        } else {
            0.0
        }
    };
    (cdf, pdf)
}

#[test]
fn truncated_gaussian_matches_independent_normal() {
    for (mean, var, lo, hi) in [
        (3.0, 4.0, 0.0, 30.0),
        (6.0, 16.0, 0.0, 30.0),
        (15.0, 25.0, 0.0, 30.0),
        (1.0, 1.0, 0.0, 6.0),
    ] {
        let law = TruncatedGaussian::new(mean, var, lo, hi).unwrap();
        let (cdf, pdf) = reference(mean, var.sqrt(), lo, hi);
        for i in 0..=300 {
            let x = lo - 1.0 + (hi - lo + 2.0) * i as f64 / 300.0;
            assert!(
                (law.cdf(x) - cdf(x)).abs() < 1e-10,
                "cdf({x}) for N({mean},{var})"
            );
            assert!(
                (law.pdf(x) - pdf(x)).abs() < 1e-10,
                "pdf({x}) for N({mean},{var})"
            );
        }
        for i in 1..100 {
            let eta = i as f64 / 100.0;
            let x = law.inv_cdf(eta);
            assert!((cdf(x) - eta).abs() < 1e-8, "inverse at {eta} gives {x}");
        }
        assert_eq!(law.inv_cdf(0.0), lo);
    }
}

#[test]
fn samples_follow_the_law() {
    let law = TruncatedGaussian::moderate();
    let dist = DelayDistribution::TruncatedGaussian(law.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut xs: Vec<f64> = (0..20_000).map(|_| dist.sample(&mut rng)).collect();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let ks = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = law.cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max);
    // 1% critical value of the Kolmogorov statistic.
    assert!(ks < 1.63 / n.sqrt(), "KS distance {ks}");
    assert!(xs.iter().all(|&x| (0.0..=30.0).contains(&x)));
}

#[test]
fn gate_threshold_grows_with_reliability() {
    let sig = SignalSpec::signal(200.0, 60.0, 30.0, 10.0).with_delay(
        DelayDistribution::TruncatedGaussian(TruncatedGaussian::moderate()),
    );
    assert_eq!(sig.gate_threshold(0.0).unwrap(), 30.0);
    let mut prev = 30.0;
    for i in 1..=100 {
        let g = sig.gate_threshold(i as f64 / 100.0).unwrap();
        assert!(g >= prev, "threshold fell at eta {}", i as f64 / 100.0);
        prev = g;
    }
    assert!((prev - 60.0).abs() < 1e-9);
}
