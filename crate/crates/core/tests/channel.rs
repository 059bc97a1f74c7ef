use proptest::prelude::*;
use qbp_core::bp::init_llr;
use qbp_core::channel::*;

proptest! {
    #[test]
    fn llr_matches_posterior(y in -3.0f64..3.0, sigma2 in 0.3f64..4.0) {
        let p = posterior_prob(y, sigma2);
        let llr = init_llr(&[y], sigma2).unwrap()[0];
        // 1 - p(y) = p(-y), without the cancellation near p = 1
        let q = posterior_prob(-y, sigma2);
        prop_assert!((llr - (q / p).ln()).abs() < 1e-12);
        if llr.abs() < 8.0 {
            prop_assert!((llr - ((1.0 - p) / p).ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn trace_sigma2_follows_subcarriers(snrs in prop::collection::btree_set(-50i32..50, 1..12), n in 1usize..200, seed in any::<u64>()) {
        let trace: Vec<f64> = snrs.iter().map(|&s| f64::from(s) / 4.0).collect();
        let rv = transmit(&vec![-1.0; n], &ChannelConfig::trace(trace.clone(), seed, 3)).unwrap();
        let mut counts = vec![0usize; trace.len()];
        for s2 in &rv.sigma2 {
            let j = trace.iter().position(|&t| snr_to_sigma2(t) == *s2);
            prop_assert!(j.is_some(), "sigma2 {} is no subcarrier's", s2);
            counts[j.unwrap()] += 1;
        }
        // round-robin over subcarriers after interleaving
        for (j, &c) in counts.iter().enumerate() {
            let expect = n / trace.len() + usize::from(j < n % trace.len());
            prop_assert_eq!(c, expect);
        }
    }
}

#[test]
fn transmit_is_reproducible_and_seeds_independent() {
    let n = 10_000;
    let x = vec![-1.0; n];
    let a = transmit(&x, &ChannelConfig::awgn(3.0, 1)).unwrap();
    assert_eq!(a, transmit(&x, &ChannelConfig::awgn(3.0, 1)).unwrap());
    let b = transmit(&x, &ChannelConfig::awgn(3.0, 2)).unwrap();
    let za: Vec<f64> = a.y.iter().map(|v| v + 1.0).collect();
    let zb: Vec<f64> = b.y.iter().map(|v| v + 1.0).collect();
    let mean = |z: &[f64]| z.iter().sum::<f64>() / n as f64;
    let (ma, mb) = (mean(&za), mean(&zb));
    let cov: f64 = za.iter().zip(&zb).map(|(p, q)| (p - ma) * (q - mb)).sum();
    let va: f64 = za.iter().map(|p| (p - ma).powi(2)).sum();
    let vb: f64 = zb.iter().map(|q| (q - mb).powi(2)).sum();
    let r = cov / (va * vb).sqrt();
    assert!(r.abs() < 4.0 / (n as f64).sqrt(), "correlation {r}");
    // noise variance matches the SNR
    let var = va / (n as f64 - 1.0);
    assert!((var / snr_to_sigma2(3.0) - 1.0).abs() < 0.05);
}

#[test]
fn received_csv_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let rv = transmit(&modulate_bpsk(&[0, 1, 1, 0]), &ChannelConfig::awgn(1.5, 4)).unwrap();
    let p = dir.path().join("rx.csv");
    rv.write_csv(&p).unwrap();
    assert_eq!(ReceivedVector::read_csv(&p).unwrap(), rv);
}
