use msd_channel::{bayes_interval, magic_fidelity, posterior, BasisCounts};
use msd_pauli::BlochVector;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

#[test]
fn no_data_gives_the_prior() {
    let p = posterior(&[BasisCounts::default(); 3], 400_000, 1).unwrap();
    assert!((p.mean_fidelity() - 0.5).abs() < 0.002);
    // F = (1+t)/2 with t the projection of a uniform ball point onto an
    // axis, whose density is 3(1−t²)/4; compare bin masses
    let f = p.fidelities();
    let bins = 10;
    for k in 0..bins {
        let (a, b) = (k as f64 / bins as f64, (k + 1) as f64 / bins as f64);
        let cdf = |x: f64| {
            let t = 2.0 * x - 1.0;
            (3.0 * t - t * t * t + 2.0) / 4.0
        };
        let want = cdf(b) - cdf(a);
        let got = f.iter().filter(|&&x| x >= a && x < b).count() as f64 / f.len() as f64;
        let sigma = (want * (1.0 - want) / f.len() as f64).sqrt();
        assert!((got - want).abs() < 4.0 * sigma, "bin {k}: {got} vs {want}");
    }
}

#[test]
fn large_counts_concentrate_near_the_magic_state() {
    let n = 10_000u64;
    let m = ((1.0 + 1.0 / 3f64.sqrt()) / 2.0 * n as f64).round() as u64;
    let i = bayes_interval(&[BasisCounts { shots: n, plus: m }; 3], 200_000, 2).unwrap();
    assert!(i.hi - i.lo < 0.01, "{i:?}");
    assert!(i.hi > 0.99 && i.hi <= 1.0);
    assert!(i.lo <= i.median && i.median <= i.hi);
}

#[test]
fn same_seed_same_interval() {
    let c = [BasisCounts { shots: 50, plus: 40 }, BasisCounts { shots: 50, plus: 31 }, BasisCounts { shots: 50, plus: 45 }];
    assert_eq!(bayes_interval(&c, 50_000, 9).unwrap(), bayes_interval(&c, 50_000, 9).unwrap());
}

fn uniform_ball(rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let v = [0; 3].map(|_| rng.random::<f64>() * 2.0 - 1.0);
        if v.iter().map(|x| x * x).sum::<f64>() <= 1.0 {
            return v;
        }
    }
}

#[test]
fn credible_intervals_cover_at_the_nominal_rate() {
    // a lighter version of the acceptance run: 200 datasets
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let datasets = 200;
    let mut covered = 0;
    for k in 0..datasets {
        let v = uniform_ball(&mut rng);
        let counts = v.map(|x| BasisCounts { shots: 300, plus: Binomial::new(300, (1.0 + x) / 2.0).unwrap().sample(&mut rng) });
        let truth = magic_fidelity(&BlochVector::new(v[0], v[1], v[2]).unwrap()).unwrap();
        let i = bayes_interval(&counts, 20_000, k).unwrap();
        covered += (i.lo <= truth && truth <= i.hi) as usize;
    }
    let rate = covered as f64 / datasets as f64;
    // ±3σ of a binomial proportion at 200 trials
    assert!((rate - 0.68).abs() < 0.1, "{rate}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn intervals_stay_in_the_unit_range(n in prop::array::uniform3(0u64..400), f in prop::array::uniform3(0.0f64..=1.0)) {
        let counts = [0, 1, 2].map(|b| BasisCounts { shots: n[b], plus: (n[b] as f64 * f[b]).round() as u64 });
        let p = posterior(&counts, 5_000, 3).unwrap();
        prop_assert!((p.weights.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!(p.samples.iter().all(|v| v.iter().map(|x| x * x).sum::<f64>() <= 1.0));
        let i = p.interval();
        prop_assert!(0.0 <= i.lo && i.lo <= i.median && i.median <= i.hi && i.hi <= 1.0);
    }
}
