//! Distributional checks of the trader models against closed-form references.

use liqsim::agents::{demand_to_intents, noise_demand, EmpiricalOrderDistribution, LimitTuple, ZiCancelMode, ZiParams};
use liqsim::lob::Side;
use liqsim::rng::{DrawStream, SeedSet};
use liqsim::session::SessionCalendar;
use liqsim::sim::{simulate, MarketModel, Recording};
use liqsim::synthetic::SyntheticSpec;

fn zi_model(windows: &str, cancel: ZiCancelMode) -> MarketModel {
    let cal = SessionCalendar::parse(&[windows], 20).unwrap();
    let params = ZiParams { alpha: 0.4, mu: 0.1, delta: 0.01, lambda: 0.5, order_size: 1 };
    MarketModel::zi(cal, params, 2, cancel, SyntheticSpec::default().opening_book())
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, v.sqrt())
}

#[test]
fn zi_depths_follow_the_exponential_law() {
    let model = zi_model("09:15-09:50", ZiCancelMode::Duration);
    let rec = Recording { zi_depths: true, ..Default::default() };
    let path = simulate(&model, &SeedSet::new(3, 0), 100_000, &rec, None).unwrap();
    let mut d = path.zi_depths.clone();
    let n = d.len();
    assert!(n > 50_000, "only {n} limit orders");
    d.sort_by(f64::total_cmp);
    let lambda = 0.5;
    let ks = d
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = 1.0 - (-lambda * x).exp();
            (f - i as f64 / n as f64).abs().max(((i + 1) as f64 / n as f64 - f).abs())
        })
        .fold(0.0, f64::max);
    // Kolmogorov critical value at the 1% level
    let critical = 1.628 / (n as f64).sqrt();
    assert!(ks < critical, "KS {ks} >= {critical}");
}

/// Mean of `xs` with a batch-means standard error (the samples are serially correlated).
fn batch_mean(xs: &[f64], batches: usize) -> (f64, f64) {
    let size = xs.len() / batches;
    let means: Vec<f64> = xs.chunks_exact(size).map(|c| c.iter().sum::<f64>() / size as f64).collect();
    let (m, sd) = mean_sd(&means);
    (m, sd / (means.len() as f64).sqrt())
}

#[test]
fn per_step_cancellation_matches_exponential_lifetimes() {
    let rec = Recording { depth_every: 50, ..Default::default() };
    let depth = |mode| {
        let path = simulate(&zi_model("09:15-09:50", mode), &SeedSet::new(5, 0), 100_000, &rec, None).unwrap();
        // skip the first 5000 steps while the opening book drains
        let xs: Vec<f64> = path.depth_samples[100..].iter().map(|&q| q as f64).collect();
        batch_mean(&xs, 20)
    };
    let (m1, se1) = depth(ZiCancelMode::PerStep);
    let (m2, se2) = depth(ZiCancelMode::Duration);
    assert!(m1 > 10.0 && m2 > 10.0, "books should hold resting volume: {m1} {m2}");
    let z = (m1 - m2).abs() / (se1 * se1 + se2 * se2).sqrt();
    assert!(z < 3.0, "resting depth {m1:.2}±{se1:.2} vs {m2:.2}±{se2:.2}");
}

#[test]
fn fundamental_increments_have_the_configured_variance() {
    let spec = SyntheticSpec { windows: vec!["09:15-10:00".into()], ..Default::default() };
    let model = spec.model().unwrap();
    let rec = Recording { fundamental: true, ..Default::default() };
    let n = 100_000;
    let path = simulate(&model, &SeedSet::new(8, 0), n, &rec, None).unwrap();
    let incs: Vec<f64> = path.fundamental.windows(2).map(|w| w[1].0 - w[0].0).collect();
    let (m, sd) = mean_sd(&incs);
    let var = sd * sd;
    let target = spec.sigma_v * spec.sigma_v;
    let se_var = target * (2.0 / (incs.len() as f64 - 1.0)).sqrt();
    assert!((var - target).abs() < 3.0 * se_var, "variance {var} vs {target} ± {se_var}");
    assert!(m.abs() < 3.0 * spec.sigma_v / (incs.len() as f64).sqrt(), "drift {m}");
}

#[test]
fn noise_demand_moments() {
    let sigma = 1.7;
    let n = 100_000;
    let mut rng = DrawStream::from_seed(21);
    let xs: Vec<f64> = (0..n).map(|_| noise_demand(sigma, rng.normal())).collect();
    let (m, sd) = mean_sd(&xs);
    let nf = n as f64;
    assert!(m.abs() < 3.0 * sigma / nf.sqrt(), "mean {m}");
    assert!((sd - sigma).abs() < 3.0 * sigma / (2.0 * nf).sqrt(), "sd {sd}");
    assert!((0..1000).all(|_| noise_demand(0.0, rng.normal()) == 0.0));
}

#[test]
fn unit_demand_submits_at_the_base_rates() {
    let (alpha, mu) = (0.23, 0.07);
    let n = 100_000;
    let mut rng = DrawStream::from_seed(4);
    let (mut limits, mut markets) = (0usize, 0usize);
    for i in 0..n {
        let d = if i % 2 == 0 { 1.0 } else { -1.0 };
        let intents = demand_to_intents(d, alpha, mu, rng.uniform(), rng.uniform());
        let side = if d > 0.0 { Side::Buy } else { Side::Sell };
        for s in [intents.limit, intents.market].into_iter().flatten() {
            assert_eq!(s, side);
        }
        limits += intents.limit.is_some() as usize;
        markets += intents.market.is_some() as usize;
    }
    let nf = n as f64;
    for (count, p) in [(limits, alpha), (markets, mu)] {
        let rate = count as f64 / nf;
        let se = (p * (1.0 - p) / nf).sqrt();
        assert!((rate - p).abs() < 3.0 * se, "rate {rate} vs {p}");
    }
}

fn tuple(depth: i64, duration: u64) -> LimitTuple {
    LimitTuple { depth, volume: 1, duration }
}

#[test]
fn bucket_draws_are_uniform() {
    let limit = vec![(2, 555, tuple(1, 10)), (2, 556, tuple(2, 20)), (2, 557, tuple(3, 30))];
    let dist = EmpiricalOrderDistribution::new(555, 30, limit, vec![(2, 555, 1)]).unwrap();
    let n = 10_000;
    let mut rng = DrawStream::from_seed(12);
    let mut counts = [0usize; 3];
    for _ in 0..n {
        let t = dist.sample_limit_tuple(2, 560, rng.uniform());
        counts[(t.depth - 1) as usize] += 1;
    }
    let p = 1.0 / 3.0;
    let se = (p * (1.0 - p) / n as f64).sqrt();
    for c in counts {
        assert!((c as f64 / n as f64 - p).abs() < 3.0 * se, "{counts:?}");
    }
}

#[test]
fn fallback_pool_reproduces_bucket_proportions() {
    // spread bucket 2 has records in three time buckets, none at 10:45
    let sizes = [500usize, 300, 200];
    let mut limit = Vec::new();
    for (b, &size) in sizes.iter().enumerate() {
        let minute = 555 + 30 * b as u32;
        limit.extend((0..size).map(|i| (2, minute, tuple(1 + (i % 4) as i64, b as u64 + 1))));
    }
    // a different spread in the empty time bucket must not be used
    limit.push((4, 645, tuple(9, 99)));
    let dist = EmpiricalOrderDistribution::new(555, 30, limit, vec![(2, 555, 1)]).unwrap();
    let n = 100_000;
    let mut rng = DrawStream::from_seed(13);
    let mut counts = [0usize; 3];
    for _ in 0..n {
        let t = dist.sample_limit_tuple(2, 650, rng.uniform());
        assert!(t.duration <= 3, "drew {t:?} from outside the spread pool");
        counts[t.duration as usize - 1] += 1;
    }
    let total: usize = sizes.iter().sum();
    for (c, s) in counts.iter().zip(sizes) {
        let p = s as f64 / total as f64;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((*c as f64 / n as f64 - p).abs() < 3.0 * se, "{counts:?}");
    }
}
