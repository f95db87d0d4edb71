use proptest::prelude::*;
use rwndq_core::metrics::{fct_stats, jain_index, persistent_queue, utilization, QueueSample};

proptest! {
    #[test]
    fn jain_is_scale_invariant(xs in prop::collection::vec(0.0f64..1e10, 1..50), c in 1e-3f64..1e3) {
        let scaled: Vec<f64> = xs.iter().map(|x| x * c).collect();
        let (a, b) = (jain_index(&xs).unwrap(), jain_index(&scaled).unwrap());
        prop_assert!((a - b).abs() < 1e-9, "{} vs {}", a, b);
    }

    #[test]
    fn jain_in_unit_interval(xs in prop::collection::vec(0.0f64..1e10, 1..50)) {
        let j = jain_index(&xs).unwrap();
        prop_assert!(j > 0.0 && j <= 1.0 + 1e-12);
        prop_assert!(j >= 1.0 / xs.len() as f64 - 1e-12);
    }

    #[test]
    fn cdf_is_sorted_and_ends_at_one(xs in prop::collection::vec(1e-6f64..1.0, 1..200)) {
        let s = fct_stats(&xs).unwrap();
        prop_assert!(s.cdf.windows(2).all(|w| w[0].0 <= w[1].0 && w[0].1 < w[1].1));
        prop_assert_eq!(s.cdf.last().unwrap().1, 1.0);
        prop_assert!(s.p99 <= s.max && s.mean <= s.max);
    }
}

#[test]
fn timeout_outlier_shows_in_max() {
    let mut fcts = vec![0.0008; 99];
    fcts.push(0.205);
    let s = fct_stats(&fcts).unwrap();
    assert!(s.max > 0.2);
    // nearest rank 99 of 100 is still a normal transfer
    assert_eq!(s.p99, 0.0008);
    assert_eq!(s.count, 100);
    assert!((s.fraction_below(0.2) - 0.99).abs() < 1e-12);
}

#[test]
fn utilization_examples() {
    // one 1500 B frame in one 1.2 us bin at 10 Gbps
    assert_eq!(utilization(&[1500], 10e9, 1.2e-6), vec![1.0]);
    assert_eq!(utilization(&[0, 0], 10e9, 0.01), vec![0.0, 0.0]);
    assert_eq!(utilization(&[12_500_000], 10e9, 0.01), vec![1.0]);
}

#[test]
fn persistent_queue_smooths_a_square_wave() {
    let samples: Vec<QueueSample> = (1..=400)
        .map(|i| {
            let bytes = if (i / 10) % 2 == 0 { 30_000 } else { 0 };
            QueueSample { t: i as f64 * 50e-6, bytes, avg_bytes: bytes as f64, drops_cum: 0 }
        })
        .collect();
    let smooth = persistent_queue(&samples, 500e-6 * 10.0);
    for (_, q) in smooth.iter().skip(100) {
        assert!((q - 15_000.0).abs() <= 1_500.0, "{q}");
    }
}
