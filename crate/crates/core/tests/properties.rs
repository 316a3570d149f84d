use augtest::harness::separation_error;
use augtest::ingest::{ingest_chunk, KeyMap};
use augtest::io::{read_dist, read_flattening, write_dist, write_flattening};
use augtest::*;
use proptest::prelude::*;

fn normalize(w: Vec<f64>) -> Distribution {
    let total: f64 = w.iter().sum();
    Distribution::new(w.iter().map(|x| x / total).collect()).unwrap()
}

fn weights(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![1 => Just(0.0), 4 => 0.001f64..1.0], n)
        .prop_filter("nonzero", |w| w.iter().any(|&x| x > 0.0))
}

fn dist_pair(max_n: usize) -> impl Strategy<Value = (Distribution, Distribution)> {
    (1..=max_n)
        .prop_flat_map(|n| (weights(n), weights(n)).prop_map(|(a, b)| (normalize(a), normalize(b))))
}

fn dist_triple(max_n: usize) -> impl Strategy<Value = (Distribution, Distribution, Distribution)> {
    (1..=max_n).prop_flat_map(|n| {
        (weights(n), weights(n), weights(n))
            .prop_map(|(a, b, c)| (normalize(a), normalize(b), normalize(c)))
    })
}

proptest! {
    #[test]
    fn tv_is_a_metric((p, q, r) in dist_triple(30)) {
        let pq = tv_distance(&p, &q).unwrap();
        prop_assert!((pq - tv_distance(&q, &p).unwrap()).abs() < 1e-15);
        prop_assert!(tv_distance(&p, &p).unwrap() == 0.0);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&pq));
        prop_assert!(pq <= tv_distance(&p, &r).unwrap() + tv_distance(&r, &q).unwrap() + 1e-12);
    }

    #[test]
    fn scheffe_set_attains_tv((phat, q) in dist_pair(10), mask in any::<u16>()) {
        let n = phat.len();
        let s = scheffe_set(&phat, &q).unwrap();
        let gap = mass(&q, &s).unwrap() - mass(&phat, &s).unwrap();
        prop_assert!((gap - tv_distance(&phat, &q).unwrap()).abs() < 1e-12);
        let members: Vec<usize> = (1..=n).filter(|i| mask >> (i - 1) & 1 == 1).collect();
        let a = IndexSet::new(n, members).unwrap();
        let other = mass(&q, &a).unwrap() - mass(&phat, &a).unwrap();
        prop_assert!(other.abs() <= gap + 1e-12);
    }

    #[test]
    fn mix_is_linear_in_tv((p, q) in dist_pair(30), beta in 0.0f64..=1.0) {
        let m = mix(&p, &q, beta).unwrap();
        let full = tv_distance(&p, &q).unwrap();
        prop_assert!((tv_distance(&p, &m).unwrap() - beta * full).abs() < 1e-12);
        prop_assert!((tv_distance(&m, &q).unwrap() - (1.0 - beta) * full).abs() < 1e-12);
    }

    #[test]
    fn flattening_preserves_l1(
        (p, q) in dist_pair(40),
        extra in prop::collection::vec(0u64..6, 40),
    ) {
        let buckets = (0..p.len()).map(|i| 1 + extra[i]).collect();
        let f = Flattening::from_buckets(buckets).unwrap();
        let fp = flatten_distribution(&f, &p).unwrap();
        let fq = flatten_distribution(&f, &q).unwrap();
        prop_assert_eq!(fp.len(), f.flat_size());
        prop_assert!((tv_distance(&fp, &fq).unwrap() - tv_distance(&p, &q).unwrap()).abs() < 1e-12);
        prop_assert!(l2sq_exact(&fp) <= l2sq_exact(&p) + 1e-15);
    }

    #[test]
    fn flat_index_roundtrip(extra in prop::collection::vec(0u64..5, 1..30)) {
        let f = Flattening::from_buckets(extra.iter().map(|e| e + 1).collect()).unwrap();
        let mut expected = 1;
        for i in 1..=f.n() {
            for j in 1..=f.bucket_count(i) {
                let k = f.flat_index(i, j);
                prop_assert_eq!(k, expected);
                prop_assert_eq!(f.unflatten(k).unwrap(), (i, j));
                expected += 1;
            }
        }
    }

    #[test]
    fn flatten_batch_keeps_bucket_totals(
        counts in prop::collection::vec(0u64..50, 1..20),
        extra in prop::collection::vec(0u64..8, 20),
        seed in any::<u64>(),
    ) {
        let n = counts.len();
        let f = Flattening::from_buckets((0..n).map(|i| 1 + extra[i]).collect()).unwrap();
        let batch = SampleBatch::from_counts(counts.clone());
        let flat = flatten_batch(&f, &batch, &mut SeededRng::new(seed)).unwrap();
        for i in 1..=n {
            let sum: u64 = (1..=f.bucket_count(i))
                .map(|j| flat.count(f.flat_index(i, j)))
                .sum();
            prop_assert_eq!(sum, counts[i - 1]);
        }
    }

    #[test]
    fn collision_count_matches_pairs(counts in prop::collection::vec(0u64..40, 1..20)) {
        let samples: Vec<usize> = counts
            .iter()
            .enumerate()
            .flat_map(|(i, &c)| std::iter::repeat_n(i + 1, c as usize))
            .collect();
        let mut pairs = 0u128;
        for a in 0..samples.len() {
            for b in a + 1..samples.len() {
                pairs += (samples[a] == samples[b]) as u128;
            }
        }
        prop_assert_eq!(collision_count(&SampleBatch::from_counts(counts)), pairs);
    }

    #[test]
    fn draws_are_deterministic((p, _) in dist_pair(20), seed in any::<u64>(), k in 0u64..500) {
        let a = draw(&p, &mut SeededRng::new(seed), k);
        let b = draw(&p, &mut SeededRng::new(seed), k);
        prop_assert_eq!(a.total(), k);
        for i in 1..=p.len() {
            if p.prob(i) == 0.0 {
                prop_assert_eq!(a.count(i), 0);
            }
        }
        prop_assert_eq!(a, b);
    }

    #[test]
    fn separation_error_bounds_and_invariance(
        same in prop::collection::vec(-1e3f64..1e3, 1..40),
        far in prop::collection::vec(-1e3f64..1e3, 1..40),
        scale in 0.01f64..100.0,
        shift in -50.0f64..50.0,
    ) {
        let base = separation_error(&same, &far).unwrap();
        prop_assert!(base.error >= 0.0 && base.error <= 0.5);
        let s2: Vec<f64> = same.iter().map(|z| z * scale + shift).collect();
        let f2: Vec<f64> = far.iter().map(|z| z * scale + shift).collect();
        prop_assert_eq!(separation_error(&s2, &f2).unwrap().error, base.error);
        let s3: Vec<f64> = same.iter().map(|z| z.cbrt()).collect();
        let f3: Vec<f64> = far.iter().map(|z| z.cbrt()).collect();
        prop_assert_eq!(separation_error(&s3, &f3).unwrap().error, base.error);
    }

    #[test]
    fn ingest_is_order_invariant(
        records in prop::collection::vec((0usize..15, 1u64..100), 1..30),
        rotate in 0usize..30,
    ) {
        let lines: Vec<String> = records.iter().map(|(k, c)| format!("key{k}\t{c}")).collect();
        let mut rotated = lines.clone();
        rotated.rotate_left(rotate % lines.len());
        let mut km1 = KeyMap::new();
        let mut km2 = KeyMap::new();
        let d1 = ingest_chunk(&lines, &mut km1, 20).unwrap();
        let d2 = ingest_chunk(&rotated, &mut km2, 20).unwrap();
        for k in 0..15 {
            let key = format!("key{k}");
            let m1 = km1.get(&key).map(|i| d1.prob(i)).unwrap_or(0.0);
            let m2 = km2.get(&key).map(|i| d2.prob(i)).unwrap_or(0.0);
            prop_assert!((m1 - m2).abs() < 1e-15);
        }
    }

    #[test]
    fn dist_file_roundtrip((p, _) in dist_pair(50)) {
        let mut buf = Vec::new();
        write_dist(&p, &mut buf).unwrap();
        let back = read_dist(buf.as_slice()).unwrap();
        prop_assert_eq!(back.len(), p.len());
        for (a, b) in back.probs().iter().zip(p.probs()) {
            prop_assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn flattening_file_roundtrip(extra in prop::collection::vec(0u64..9, 1..40)) {
        let f = Flattening::from_buckets(extra.iter().map(|e| e + 1).collect()).unwrap();
        let mut buf = Vec::new();
        write_flattening(&f, &mut buf).unwrap();
        prop_assert_eq!(read_flattening(buf.as_slice()).unwrap(), f);
    }

    #[test]
    fn augmented_flattening_counts((phat, _) in dist_pair(40), k in 0u64..200, seed in any::<u64>(), n_nu in 1usize..100) {
        let n = phat.len();
        let freqs = draw(&phat, &mut SeededRng::new(seed), k);
        let nu = 1.0 / n_nu as f64;
        let f = build_augmented_flattening(&phat, &freqs, nu).unwrap();
        let floors: usize = phat.probs().iter().map(|p| (p / nu + 1e-12 * (p / nu).max(1.0)).floor() as usize).sum();
        prop_assert_eq!(f.flat_size(), n + k as usize + floors);
        prop_assert!(f.flat_size() <= n + k as usize + n_nu);
    }

    #[test]
    fn search_never_reports_inaccurate(verdicts in prop::collection::vec(0u8..3, 1..40), fallback in any::<bool>()) {
        let f = SampleComplexityFn::new(|a: f64, _| if a >= 1.0 { u64::MAX } else { (1.0 / (1.0 - a)).ceil() as u64 * 10 });
        let mut it = verdicts.iter().cycle();
        let pick = |v: u8| match v {
            0 => Verdict::Accept,
            1 => Verdict::Reject,
            _ => Verdict::Inaccurate,
        };
        let r = search_test(
            |_, _| Ok(TestReport { verdict: pick(*it.next().unwrap()), statistic: None, samples_used: 1, branch: Branch::StandardVote }),
            &f,
            |_| Ok(TestReport { verdict: if fallback { Verdict::Accept } else { Verdict::Reject }, statistic: None, samples_used: 1, branch: Branch::StandardVote }),
            0.1,
        ).unwrap();
        prop_assert!(r.verdict != Verdict::Inaccurate);
        prop_assert!(r.alphas.windows(2).all(|w| w[0] <= w[1]));
    }
}
