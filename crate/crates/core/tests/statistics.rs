use hbsim_core::metrics::{significant_difference, summarize, t_quantile, SummaryStats};
use hbsim_core::sim::{EventKind, EventQueue};
use proptest::prelude::*;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

fn samples() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1e3f64..1e3, 2..40)
}

// Published two-sided 95% table values.
const T_TABLE: [(f64, f64); 6] = [
    (1.0, 12.706),
    (2.0, 4.303),
    (5.0, 2.571),
    (9.0, 2.262),
    (29.0, 2.045),
    (120.0, 1.980),
];

#[test]
fn t_quantile_matches_table() {
    for (df, t) in T_TABLE {
        assert!((t_quantile(0.975, df) - t).abs() < 1e-3, "df {df}");
    }
}

#[test]
fn two_point_halfwidth() {
    let s = summarize(&[0.0, 1.0]).unwrap();
    assert!((s.ci95_halfwidth - 12.706 * 0.7071 / 1.4142).abs() < 1e-2);
}

proptest! {
    #[test]
    fn summary_is_permutation_invariant(mut xs in samples(), seed in any::<u64>()) {
        let a = summarize(&xs).unwrap();
        let len = xs.len();
        let mut state = seed;
        for i in (1..len).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            xs.swap(i, (state >> 33) as usize % (i + 1));
        }
        let b = summarize(&xs).unwrap();
        prop_assert!(close(a.mean, b.mean, 1e-12));
        prop_assert!(close(a.sd, b.sd, 1e-9));
        prop_assert_eq!(a.min, b.min);
        prop_assert_eq!(a.max, b.max);
        prop_assert!(close(a.ci95_halfwidth, b.ci95_halfwidth, 1e-9));
    }

    #[test]
    fn summary_scales_linearly(xs in samples(), c in 0.01f64..100.0) {
        let a = summarize(&xs).unwrap();
        let scaled: Vec<f64> = xs.iter().map(|x| x * c).collect();
        let b = summarize(&scaled).unwrap();
        prop_assert!(close(b.mean, a.mean * c, 1e-9));
        prop_assert!(close(b.sd, a.sd * c, 1e-9));
        prop_assert!(close(b.min, a.min * c, 1e-12));
        prop_assert!(close(b.max, a.max * c, 1e-12));
        prop_assert!(close(b.ci95_halfwidth, a.ci95_halfwidth * c, 1e-9));
    }

    #[test]
    fn summary_invariants(xs in samples()) {
        let s = summarize(&xs).unwrap();
        prop_assert!(s.min <= s.mean && s.mean <= s.max);
        prop_assert!(s.sd >= 0.0 && s.ci95_halfwidth >= 0.0);
        prop_assert_eq!(s.sample_count, xs.len());
    }

    #[test]
    fn constant_samples_have_zero_width(x in -1e6f64..1e6, n in 2usize..30) {
        let s = summarize(&vec![x; n]).unwrap();
        prop_assert_eq!(s.sd, 0.0);
        prop_assert_eq!(s.ci95_halfwidth, 0.0);
    }

    #[test]
    fn halfwidth_shrinks_with_count(sd in 0.01f64..100.0, n in 2usize..200) {
        let hw = |c: usize| t_quantile(0.975, (c - 1) as f64) * sd / (c as f64).sqrt();
        prop_assert!(hw(n + 1) < hw(n));
        // alternating +-1 keeps the sample sd near 1
        let data = |c: usize| -> Vec<f64> { (0..c).map(|i| if i % 2 == 0 { -1.0 } else { 1.0 }).collect() };
        let a = summarize(&data(2 * n)).unwrap();
        let b = summarize(&data(2 * n + 2)).unwrap();
        prop_assert!(b.ci95_halfwidth < a.ci95_halfwidth);
    }

    #[test]
    fn significance_is_symmetric_and_irreflexive(
        m1 in -10f64..10.0, h1 in 0.001f64..5.0, m2 in -10f64..10.0, h2 in 0.001f64..5.0,
    ) {
        let mk = |mean, ci95_halfwidth| SummaryStats {
            mean, sd: 1.0, min: mean - 1.0, max: mean + 1.0, ci95_halfwidth, sample_count: 10,
        };
        let (a, b) = (mk(m1, h1), mk(m2, h2));
        prop_assert_eq!(significant_difference(&a, &b), significant_difference(&b, &a));
        prop_assert!(!significant_difference(&a, &a));
        prop_assert_eq!(significant_difference(&a, &b), (m1 - m2).abs() > h1 + h2);
    }

    #[test]
    fn queue_dequeues_sorted(times in prop::collection::vec(0.0f64..1e4, 0..500)) {
        let mut q = EventQueue::new();
        for (i, &t) in times.iter().enumerate() {
            q.schedule_at(t, EventKind::PollTick(i as u32));
        }
        let mut oracle = times.clone();
        oracle.sort_by(f64::total_cmp);
        let mut got = Vec::new();
        while let Some(e) = q.pop() {
            got.push(e.time);
        }
        prop_assert_eq!(got, oracle);
    }
}
