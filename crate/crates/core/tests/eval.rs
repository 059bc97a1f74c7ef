use std::path::PathBuf;

use proptest::prelude::*;
use qbp_core::anneal::AnnealConfig;
use qbp_core::channel::{modulate_bpsk, posterior_prob, snr_to_sigma2, transmit, ChannelConfig};
use qbp_core::eval::*;
use qbp_core::ldpc::*;
use qbp_core::qubo::ObjectiveWeights;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn smoke_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/smoke.json")
}

fn arb_distribution() -> impl Strategy<Value = InstanceDistribution> {
    prop::collection::vec((1usize..50, 0usize..8), 1..12).prop_map(|ranks| {
        let ranks = ranks
            .into_iter()
            .enumerate()
            .map(|(i, (occurrences, bit_errors))| RankEntry {
                energy: i as f64 * 0.5,
                bit_errors,
                word_errors: bit_errors,
                occurrences,
            })
            .collect();
        InstanceDistribution::from_ranks(0, vec![0; 8], ranks).unwrap()
    })
}

proptest! {
    #[test]
    fn rank_probabilities_sum_to_one(d in arb_distribution(), n_a in 1usize..=100) {
        let p = rank_probabilities(&d.cdf, n_a).unwrap();
        prop_assert!(p.iter().all(|&x| (0.0..=1.0).contains(&x)));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(d.cdf.windows(2).all(|w| w[0] <= w[1]));
        prop_assert_eq!(*d.cdf.last().unwrap(), 1.0);
    }

    #[test]
    fn min_rank_dominance_grows_with_reads(d in arb_distribution()) {
        let mut last = vec![0.0; d.num_ranks()];
        for n_a in 1..=100 {
            let p = rank_probabilities(&d.cdf, n_a).unwrap();
            let mut acc = 0.0;
            for (i, x) in p.iter().enumerate() {
                acc += x;
                prop_assert!(acc >= last[i] - 1e-12, "N_a {}: Pr(R_min <= {}) fell", n_a, i);
                last[i] = acc;
            }
        }
    }

    #[test]
    fn ber_non_increasing_when_errors_follow_energy(d in arb_distribution()) {
        let mut d = d;
        let mut errs: Vec<usize> = d.ranks.iter().map(|r| r.bit_errors).collect();
        errs.sort_unstable();
        for (r, e) in d.ranks.iter_mut().zip(errs) {
            r.bit_errors = e;
        }
        let mut last = f64::INFINITY;
        for n_a in 1..=100 {
            let b = ber(&d, n_a, 8).unwrap();
            prop_assert!((0.0..=1.0).contains(&b));
            prop_assert!(b <= last + 1e-12, "N_a {}: {} > {}", n_a, b, last);
            last = b;
        }
    }

    #[test]
    fn single_block_fer_is_mean_miss(ds in prop::collection::vec(arb_distribution(), 1..8), n_a in 1usize..20) {
        let est = fer(&ds, 8, 8, n_a, DEFAULT_FRAME_CAP, 0).unwrap();
        let expect = ds.iter().map(|d| 1.0 - zero_error_mass(d, n_a).unwrap()).sum::<f64>() / ds.len() as f64;
        prop_assert!(est.exhaustive);
        prop_assert!((est.fer - expect).abs() < 1e-12);
    }
}

#[test]
fn ber_can_rise_when_the_minimum_is_wrong() {
    let ranks = vec![
        RankEntry { energy: 0.0, bit_errors: 2, word_errors: 2, occurrences: 1 },
        RankEntry { energy: 1.0, bit_errors: 0, word_errors: 0, occurrences: 9 },
    ];
    let d = InstanceDistribution::from_ranks(0, vec![0; 4], ranks).unwrap();
    assert!(ber(&d, 10, 4).unwrap() > ber(&d, 1, 4).unwrap());
}

#[test]
fn expectation_matches_resampling() {
    let mut r = ChaCha8Rng::seed_from_u64(42);
    for case in 0..6 {
        let ranks: Vec<RankEntry> = (0..r.random_range(2..7))
            .map(|i| {
                let e = r.random_range(0..10);
                RankEntry {
                    energy: f64::from(i),
                    bit_errors: e,
                    word_errors: e,
                    occurrences: r.random_range(1..40),
                }
            })
            .collect();
        let d = InstanceDistribution::from_ranks(case, vec![0; 10], ranks).unwrap();
        let weights: Vec<usize> = d.ranks.iter().map(|x| x.occurrences).collect();
        let total: usize = weights.iter().sum();
        for n_a in [1, 3, 10] {
            let draws = 100_000;
            let mut sum = 0.0;
            let mut sq = 0.0;
            for _ in 0..draws {
                let mut best = usize::MAX;
                for _ in 0..n_a {
                    let mut u = r.random_range(0..total);
                    let mut k = 0;
                    while u >= weights[k] {
                        u -= weights[k];
                        k += 1;
                    }
                    best = best.min(k);
                }
                let e = d.ranks[best].bit_errors as f64;
                sum += e;
                sq += e * e;
            }
            let mean = sum / draws as f64;
            let se = ((sq / draws as f64 - mean * mean) / draws as f64).sqrt();
            let exact = expected_bit_errors(&d, n_a).unwrap();
            assert!((mean - exact).abs() <= 3.0 * se.max(1e-12), "case {case} N_a {n_a}: {mean} vs {exact} (se {se})");
        }
    }
}

#[test]
fn fer_cap_switches_to_sampling() {
    let ds: Vec<InstanceDistribution> = (0..30)
        .map(|i| {
            let ranks = vec![
                RankEntry { energy: 0.0, bit_errors: usize::from(i % 3 == 0), word_errors: 0, occurrences: 3 },
                RankEntry { energy: 1.0, bit_errors: 1, word_errors: 1, occurrences: 1 },
            ];
            InstanceDistribution::from_ranks(i, vec![0; 4], ranks).unwrap()
        })
        .collect();
    // C(30, 5) = 142506 frames
    let exact = fer(&ds, 20, 4, 2, 200_000, 0).unwrap();
    let sampled = fer(&ds, 20, 4, 2, 20_000, 9).unwrap();
    assert!(exact.exhaustive && !sampled.exhaustive);
    assert_eq!(exact.frames, 142_506);
    assert_eq!(sampled.frames, 20_000);
    assert!((exact.fer - sampled.fer).abs() < 0.01);
    assert_eq!(sampled, fer(&ds, 20, 4, 2, 20_000, 9).unwrap());
}

#[test]
fn calibrated_w2_decodes_like_the_oracle() {
    let h = construct_regular_code(&CodeSpec::new(12, 2, 3).with_seed(1)).unwrap().matrix;
    let g = generator(&h).unwrap();
    let decoder = QbpDecoder::new(h.clone(), Backend::Exhaustive, 8.0).unwrap();
    let anneal = AnnealConfig::default();
    let snr = 2.0;
    let s2 = snr_to_sigma2(snr);
    let instance = |t: u64| {
        let c = encode(&random_message(g.k, t), &g).unwrap();
        let rv = transmit(&modulate_bpsk(&c), &ChannelConfig::awgn(snr, 5000 + t)).unwrap();
        let p: Vec<f64> = rv.y.iter().map(|&y| posterior_prob(y, s2)).collect();
        (c, p)
    };
    let grid = [0.01, 0.05, 0.1, 0.3, 1.0, 3.0];
    let cal = calibrate_w2(&[snr], &grid, |_, w2| {
        let w = ObjectiveWeights::new(1.0, w2)?;
        let mut errors = 0usize;
        for t in 0..40 {
            let (c, p) = instance(t);
            let out = decoder.decode(&p, w, &anneal)?;
            errors += g.info_positions().iter().filter(|&&i| out.bits[i] != c[i]).count();
        }
        Ok(errors as f64 / (40 * g.k) as f64)
    })
    .unwrap();
    let w2 = cal.table.lookup(snr).unwrap();
    assert!(w2.is_finite() && grid.contains(&w2));
    assert_eq!(cal.sweep.len(), grid.len());

    let trials = 300;
    let mut agree = 0;
    for t in 1000..1000 + trials {
        let (_, p) = instance(t);
        let ml = ml_decode(&g, &distance_costs(&p)).unwrap();
        let out = decoder.decode(&p, ObjectiveWeights::new(1.0, w2).unwrap(), &anneal).unwrap();
        agree += usize::from(out.bits == ml.codeword);
    }
    assert!(agree * 100 >= 99 * trials as usize, "{agree}/{trials} agree with the oracle at W2 = {w2}");
}

#[test]
fn jferro_choice_is_sweep_argmin() {
    assert!(DEFAULT_JFERRO_GRID.contains(&8.0));
    let one = calibrate_jferro(&[3.0], 4.0, |_| Ok(0.2)).unwrap();
    assert_eq!(one.best, 3.0);
    let cal = calibrate_jferro(&DEFAULT_JFERRO_GRID, 4.0, |jf| Ok((jf - 6.0).abs() * 0.01 + 0.001)).unwrap();
    assert_eq!(cal.best, 6.0);
    let min = cal.sweep.iter().map(|p| p.mean_ber).fold(f64::INFINITY, f64::min);
    assert!(cal.sweep.iter().any(|p| p.value == cal.best && p.mean_ber == min));
}

#[test]
fn smoke_run_satisfies_invariants() {
    let config = ExperimentConfig::load(smoke_path()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let r = run_experiment(&config, dir.path()).unwrap();
    assert_eq!(r.n, 12);
    for snr in &r.per_snr {
        assert_eq!(snr.instances.len(), 10);
        for inst in &snr.instances {
            let d = &inst.distribution;
            assert!(d.ranks.windows(2).all(|w| w[0].energy <= w[1].energy));
            assert!(d.cdf.windows(2).all(|w| w[0] <= w[1]));
            assert_eq!(*d.cdf.last().unwrap(), 1.0);
            assert_eq!(d.ranks.iter().map(|x| x.occurrences).sum::<usize>(), 1000);
            assert!(d.ranks.iter().all(|x| x.bit_errors <= r.k));
            for &n in &config.n_a {
                assert!((0.0..=1.0).contains(&ber(d, n, r.k).unwrap()));
            }
        }
    }
    assert!(r.ber.iter().all(|row| (0.0..=1.0).contains(&row.mean_ber)));
    assert!(r.fer.iter().all(|row| (0.0..=1.0).contains(&row.estimate.fer)));
    for name in ["ber.csv", "fer.csv", "manifest.json", "instances/snr_00.json"] {
        assert!(dir.path().join(name).exists(), "{name} missing");
    }
    let header = std::fs::read_to_string(dir.path().join("ber.csv")).unwrap();
    assert!(header.starts_with("snr_db,w2,n_a,t_c_us,mean_ber,ci95"));
    let header = std::fs::read_to_string(dir.path().join("fer.csv")).unwrap();
    assert!(header.starts_with("snr_db,n_f_bits,n_a,fer"));
}

#[test]
fn missing_alist_is_a_config_error() {
    let config = ExperimentConfig::from_json(
        r#"{"code": {"alist": "/nonexistent/code.alist"}, "snr_db": [1.0], "w2": {"fixed": 0.1}, "instances": 2, "seed": 0}"#,
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(run_experiment(&config, dir.path()), Err(qbp_core::Error::Config(_))));
}
