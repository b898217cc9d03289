use gasdemand_core::datagen::{generate, generate_dataset, GeneratorConfig};
use gasdemand_core::features::hdd;
use gasdemand_core::metrics::{autocorrelation, gaussian_reference, mae, mae_rmse_ratio, mape, pearson, periodogram, rmse, MetricsError};
use gasdemand_core::CivilDate;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

#[test]
fn mae_never_exceeds_rmse() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let n = rng.random_range(1..200);
        let scale: f64 = rng.random_range(0.01..100.0);
        let actual: Vec<f64> = (0..n).map(|_| rng.random_range(-50.0..50.0)).collect();
        let predicted: Vec<f64> = actual.iter().map(|a| a + scale * rng.sample::<f64, _>(StandardNormal)).collect();
        assert!(mae(&actual, &predicted).unwrap() <= rmse(&actual, &predicted).unwrap() * (1.0 + 1e-12));
    }
}

#[test]
fn normal_residual_ratio() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let r: Vec<f64> = (0..100_000).map(|_| rng.sample(StandardNormal)).collect();
    let ratio = mae_rmse_ratio(&r).unwrap();
    assert!((ratio - 0.798).abs() < 0.02, "{ratio}");
    assert!((gaussian_reference() - 0.797_884_560_802_865_4).abs() < 1e-15);
}

#[test]
fn hand_computed_scores() {
    let a = [100.0, 50.0, 20.0];
    let p = [110.0, 45.0, 20.0];
    assert_eq!(mae(&a, &p).unwrap(), 5.0);
    assert!((rmse(&a, &p).unwrap() - (125.0f64 / 3.0).sqrt()).abs() < 1e-12);
    assert!((mape(&a, &p).unwrap() - 100.0 * (0.1 + 0.1) / 3.0).abs() < 1e-12);
    assert!(matches!(mape(&[0.0], &[1.0]), Err(MetricsError::ZeroTarget(0))));
    assert!(matches!(mae(&[1.0], &[1.0, 2.0]), Err(MetricsError::LengthMismatch { .. })));
}

#[test]
fn periodogram_satisfies_parseval() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in [2usize, 3, 64, 365, 1000, 1001] {
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin() * 4.0 + rng.sample::<f64, _>(StandardNormal)).collect();
        let mean = x.iter().sum::<f64>() / n as f64;
        let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
        let total: f64 = periodogram(&x).unwrap().iter().map(|p| p.power).sum();
        assert!((total - var).abs() <= 1e-9 * var.max(1.0), "n={n}: {total} vs {var}");
    }
}

#[test]
fn periodogram_finds_a_pure_tone() {
    let n = 700;
    let x: Vec<f64> = (0..n).map(|i| (std::f64::consts::TAU * i as f64 / 7.0).cos()).collect();
    let spec = periodogram(&x).unwrap();
    let peak = spec.iter().max_by(|a, b| a.power.total_cmp(&b.power)).unwrap();
    assert_eq!(peak.index, 100);
    assert!((peak.period - 7.0).abs() < 1e-12);
    assert!((peak.power - 0.5).abs() < 1e-9);
}

#[test]
fn autocorrelation_basics() {
    let x: Vec<f64> = (0..70).map(|i| [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0][i % 7]).collect();
    let acf = autocorrelation(&x, 14).unwrap();
    assert!((acf[0] - 1.0).abs() < 1e-15);
    assert!(acf[7] > acf[1] && acf[7] > 0.8);
    assert!(autocorrelation(&x, 70).is_err());
    assert!(autocorrelation(&[1.0; 10], 2).is_err());
}

#[test]
fn generated_demand_tracks_heating_degree_days() {
    let data = generate_dataset(&GeneratorConfig::default()).unwrap();
    let rgd: Vec<f64> = data.records().iter().map(|r| r.rgd).collect();
    let h: Vec<f64> = data.records().iter().map(|r| hdd(r.temp_actual.unwrap())).collect();
    assert!(pearson(&rgd, &h).unwrap() > 0.9);
    assert_eq!(data.first_date(), Some(CivilDate::ymd(2007, 1, 1)));
    assert_eq!(data.last_date(), Some(CivilDate::ymd(2017, 12, 31)));
    assert!(rgd.iter().all(|v| *v >= GeneratorConfig::default().floor));

    let spec = periodogram(&rgd).unwrap();
    let yearly = spec.iter().max_by(|a, b| a.power.total_cmp(&b.power)).unwrap();
    assert!((yearly.period - 365.25).abs() < 2.0, "{yearly:?}");
    // Weather noise is red, so the weekly line is a peak of its band, not of
    // every period under a month.
    let band: Vec<_> = spec.iter().filter(|p| p.period > 5.0 && p.period < 10.0).collect();
    let weekly = band.iter().max_by(|a, b| a.power.total_cmp(&b.power)).unwrap();
    assert!((weekly.period - 7.0).abs() < 0.01, "{weekly:?}");
    let runner_up = band.iter().filter(|p| p.index != weekly.index).map(|p| p.power).fold(0.0, f64::max);
    assert!(weekly.power > 3.0 * runner_up);

    let acf = autocorrelation(&rgd, 400).unwrap();
    assert!(acf[365] > 0.5 && acf[182] < 0.0);
}

#[test]
fn generator_is_seed_deterministic() {
    let cfg = GeneratorConfig { end: CivilDate::ymd(2008, 12, 31), ..GeneratorConfig::default() };
    assert_eq!(generate(&cfg).unwrap(), generate(&cfg).unwrap());
    let other = GeneratorConfig { seed: cfg.seed + 1, ..cfg.clone() };
    assert_ne!(generate(&cfg).unwrap(), generate(&other).unwrap());
}

proptest! {
    #[test]
    fn mae_rmse_inequality(v in prop::collection::vec(-1e3f64..1e3, 1..100)) {
        let zeros = vec![0.0; v.len()];
        prop_assert!(mae(&v, &zeros).unwrap() <= rmse(&v, &zeros).unwrap() * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn pearson_is_bounded(v in prop::collection::vec(-1e3f64..1e3, 3..60), a in 0.1f64..10.0, b in -5.0f64..5.0) {
        let w: Vec<f64> = v.iter().map(|x| a * x + b).collect();
        if let Ok(r) = pearson(&v, &w) {
            prop_assert!((r - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn parseval_holds(v in prop::collection::vec(-100f64..100.0, 2..300)) {
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / v.len() as f64;
        let total: f64 = periodogram(&v).unwrap().iter().map(|p| p.power).sum();
        prop_assert!((total - var).abs() <= 1e-9 * var.max(1.0));
    }
}
