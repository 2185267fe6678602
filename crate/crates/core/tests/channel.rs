use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use attocell::channel::{DownlinkModel, SinrDistribution, SinrLaw};
use attocell::SystemConfig;

fn ks_distance(dist: &SinrDistribution, mut samples: Vec<f64>) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    let mut d: f64 = 0.0;
    // Evaluate the CDF at a subset of order statistics to keep runtime low.
    for k in (0..samples.len()).step_by(samples.len() / 400) {
        let f = dist.cdf(samples[k]).unwrap();
        d = d.max((f - k as f64 / n).abs()).max((f - (k + 1) as f64 / n).abs());
    }
    d
}

#[test]
fn cdf_matches_harmonic_samples() {
    let cfg = SystemConfig::default();
    let dist = SinrDistribution::new(&cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let samples: Vec<f64> = (0..40_000).map(|_| dist.sample(&mut rng)).collect();
    let d = ks_distance(&dist, samples);
    // 99.9% Kolmogorov quantile is 1.95 / sqrt(n).
    assert!(d < 1.95 / 200.0, "KS distance {d}");
}

#[test]
fn cdf_tracks_full_lattice_model() {
    let cfg = SystemConfig::default();
    let dist = SinrDistribution::new(&cfg).unwrap();
    let model = DownlinkModel::new(&cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let samples: Vec<f64> = (0..10_000).map(|_| model.sample_ue(&mut rng).2).collect();
    let d = ks_distance(&dist, samples);
    assert!(d < 0.03, "KS distance {d}");
}

#[test]
fn statistics_are_ordered() {
    let s = SinrDistribution::new(&SystemConfig::default())
        .unwrap()
        .statistics()
        .unwrap();
    assert!(s.gamma_min < s.mean_sinr && s.mean_sinr < s.gamma_max);
    assert!(s.rate_min < s.mean_rate && s.mean_rate < s.rate_max);
    let half_range = 0.5 * (s.rate_max - s.rate_min);
    assert!(s.rate_std() <= half_range);
}

#[test]
fn support_matches_lattice_extremes() {
    let cfg = SystemConfig::default();
    let dist = SinrDistribution::new(&cfg).unwrap();
    let model = dist.model();
    let (lo, hi) = dist.support();
    assert!((hi - model.sinr(0.0, 0.0).unwrap()).abs() < 1e-9 * hi);
    assert_eq!(lo, model.gamma_min());
    // Strongest interference at the equivalent edge lies toward a neighbour (lattice 0 deg).
    let edge = model.sinr(model.equivalent_radius(), 0.0).unwrap();
    assert!((lo - edge).abs() < 1e-9 * lo, "{lo} vs {edge}");
}
