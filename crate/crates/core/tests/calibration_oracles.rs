use liqsim::calibration::{
    compute_stylized_facts, extract_fundamental_proxy, facts_distance, fit_impact_observations, minimize, Bounds, FactSettings, FactWeights,
    ImpactModel, ImpactObservation, MarketSeries, StylizedFacts, SurrogateSettings,
};
use liqsim::rng::DrawStream;
use proptest::prelude::*;

/// An hour of per-second windows from `f(Q) = 0.561 sqrt|Q|` with 10% multiplicative noise.
fn noisy_sqrt_windows(rng: &mut DrawStream, n: usize) -> Vec<ImpactObservation> {
    let truth = ImpactModel::new(0.561, 0.5);
    (0..n)
        .map(|_| {
            let q = (1.0 + (rng.uniform() * 400.0).floor()) * if rng.uniform() < 0.5 { 1.0 } else { -1.0 };
            let noise = 1.0 + 0.1 * rng.normal();
            ImpactObservation { imbalance: q, mid_change: truth.signed(q) * noise }
        })
        .collect()
}

#[test]
fn square_root_impact_is_recovered() {
    let mut rng = DrawStream::from_seed(561);
    for rep in 0..10 {
        let fit = fit_impact_observations(&noisy_sqrt_windows(&mut rng, 3600)).unwrap();
        let m = fit.model;
        assert!((m.lambda / 0.561 - 1.0).abs() < 0.05, "rep {rep}: lambda {}", m.lambda);
        assert!((m.gamma / 0.5 - 1.0).abs() < 0.05, "rep {rep}: gamma {}", m.gamma);
        let nl = fit.nonlinear.0;
        assert!((nl.lambda / 0.561 - 1.0).abs() < 0.05 && (nl.gamma / 0.5 - 1.0).abs() < 0.05, "rep {rep}: {nl:?}");
    }
}

#[test]
fn proxy_strips_known_cumulative_impact() {
    let n = 20_000;
    let sigma = 5.0;
    let impact = ImpactModel::new(0.561, 0.5);
    let mut rng = DrawStream::from_seed(77);
    let mut v = 19_000.0;
    let mut walk = Vec::with_capacity(n);
    let mut q = Vec::with_capacity(n);
    let mut prices = Vec::with_capacity(n);
    let mut cum = 0.0;
    for _ in 0..n {
        v += sigma * rng.normal();
        let qi = ((rng.uniform() - 0.5) * 40.0).round();
        cum += impact.signed(qi);
        walk.push(v);
        q.push(qi);
        // prices are observed on the tick grid
        prices.push((v + cum).round());
    }
    let proxy = extract_fundamental_proxy(&prices, &q, &impact).unwrap();
    for (est, truth) in proxy.values.iter().zip(&walk) {
        assert!((est - truth).abs() <= 0.5 + 1e-9, "{est} vs {truth}");
    }
    let se = sigma / (2.0 * (n - 1) as f64).sqrt();
    assert!((proxy.sigma - sigma).abs() < 3.0 * se, "sigma {} vs {sigma} ± {se}", proxy.sigma);
}

fn iid_series(seed: u64, seconds: usize) -> MarketSeries {
    let mut rng = DrawStream::from_seed(seed);
    let mut mid = 19_000.0;
    let mids = (0..seconds)
        .map(|_| {
            mid += rng.normal();
            mid
        })
        .collect();
    MarketSeries {
        mids,
        spreads: (0..seconds).map(|_| 1.0 + (rng.uniform() * 3.0).floor()).collect(),
        limit_per_minute: (0..seconds / 60).map(|_| 100.0 + 20.0 * rng.normal()).collect(),
        market_per_minute: (0..seconds / 60).map(|_| 20.0 + 5.0 * rng.normal()).collect(),
        order_signs: (0..seconds).map(|_| if rng.uniform() < 0.5 { 1 } else { -1 }).collect(),
    }
}

#[test]
fn iid_returns_have_no_autocorrelation() {
    let seconds = 60 * 600;
    let facts = compute_stylized_facts(&iid_series(5, seconds), &FactSettings::default()).unwrap();
    assert!(facts.degenerate.is_empty());
    let check = |name: &str, acf: &[f64], n: usize| {
        let se = 1.0 / (n as f64).sqrt();
        for (lag, r) in acf.iter().enumerate() {
            assert!(r.abs() < 3.0 * se, "{name} lag {}: {r} (se {se})", lag + 1);
        }
    };
    check("returns_1s", &facts.acf_returns_1s, seconds - 1);
    check("abs_returns_1s", &facts.acf_abs_returns_1s, seconds - 1);
    check("returns_60s", &facts.acf_returns_60s, seconds / 60 - 1);
    check("abs_returns_60s", &facts.acf_abs_returns_60s, seconds / 60 - 1);
    check("signs", &facts.acf_signs, seconds);
}

fn facts(seed: u64) -> StylizedFacts {
    compute_stylized_facts(&iid_series(seed, 600), &FactSettings::default()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn facts_distance_is_a_pseudometric(a in 0u64..1000, b in 0u64..1000, c in 0u64..1000) {
        let w = FactWeights::default();
        let (fa, fb, fc) = (facts(a), facts(b), facts(c));
        prop_assert_eq!(facts_distance(&fa, &fa, &w).unwrap(), 0.0);
        let ab = facts_distance(&fa, &fb, &w).unwrap();
        prop_assert!(ab >= 0.0);
        prop_assert!((ab - facts_distance(&fb, &fa, &w).unwrap()).abs() < 1e-12);
        let ac = facts_distance(&fa, &fc, &w).unwrap();
        let cb = facts_distance(&fc, &fb, &w).unwrap();
        prop_assert!(ab <= ac + cb + 1e-9);
    }
}

#[test]
fn quadratic_minimum_is_found_within_fifty_evaluations() {
    let (x0, y0) = (0.3, -0.7);
    let bounds = Bounds::new(vec![-2.0, -2.0], vec![2.0, 2.0]).unwrap();
    for seed in 0..20 {
        let settings = SurrogateSettings { budget: 50, seed, ..Default::default() };
        let res = minimize(|p| Ok((p[0] - x0).powi(2) + 2.0 * (p[1] - y0).powi(2)), &bounds, &settings).unwrap();
        assert!(res.log.len() <= 50);
        // 5% of the search range in each coordinate
        let tol = 0.05 * 4.0;
        assert!((res.best[0] - x0).abs() < tol && (res.best[1] - y0).abs() < tol, "seed {seed}: {:?}", res.best);
        let logged = res.log.iter().map(|t| t.value).fold(f64::INFINITY, f64::min);
        assert_eq!(logged, res.best_value);
    }
}
