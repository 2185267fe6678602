use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use attocell::bbo::{bbo_analytic, occupancy_pmf};
use attocell::channel::SinrDistribution;
use attocell::topology::build_super_cell;
use attocell::SystemConfig;

#[test]
fn occupancy_matches_multinomial_histogram() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for (n, m) in [(3, 2), (6, 6), (10, 15), (15, 75)] {
        let pmf = occupancy_pmf(n, m).unwrap();
        let trials = 100_000;
        let mut hist = vec![0usize; n];
        let mut seen = vec![false; n];
        for _ in 0..trials {
            seen.iter_mut().for_each(|s| *s = false);
            for _ in 0..m {
                seen[rng.random_range(0..n)] = true;
            }
            hist[seen.iter().filter(|&&s| s).count() - 1] += 1;
        }
        for (k, (&p, &h)) in pmf.iter().zip(&hist).enumerate() {
            let freq = h as f64 / trials as f64;
            let se = (p * (1.0 - p) / trials as f64).sqrt().max(1e-6);
            assert!((freq - p).abs() < 5.0 * se, "n={n} m={m} k={}: {freq} vs {p}", k + 1);
        }
    }
}

#[test]
fn occupancy_mean_and_total() {
    for (n, m) in [(1, 1), (4, 2), (21, 105), (28, 140)] {
        let pmf = occupancy_pmf(n, m).unwrap();
        let total: f64 = pmf.iter().sum();
        assert!((total - 1.0).abs() < 1e-10, "n={n} m={m} total {total}");
        let mean: f64 = pmf.iter().enumerate().map(|(k, p)| (k + 1) as f64 * p).sum();
        let nf = n as f64;
        let expect = nf * (1.0 - (1.0 - 1.0 / nf).powi(m as i32));
        assert!((mean - expect).abs() < 1e-9 * expect);
    }
}

#[test]
fn analytic_bbo_falls_with_power() {
    let cfg = SystemConfig::default();
    let stats = SinrDistribution::new(&cfg).unwrap().statistics().unwrap();
    let t = build_super_cell(5, cfg.cell_radius_m).unwrap();
    let mut prev = 1.0;
    for k in [1e-4, 1e-3, 1e-2, 1e-1, 1.0] {
        let p = bbo_analytic(&cfg, &t, &stats, k, 75).unwrap();
        assert!(p <= prev + 1e-15);
        prev = p;
    }
    assert!((bbo_analytic(&cfg, &t, &stats, 1e-4, 75).unwrap() - 1.0).abs() < 1e-12);
}
