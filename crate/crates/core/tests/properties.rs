use proptest::prelude::*;
use ultraspherical::harmonic::{
    ap_constant, hardy0, hardy_inf, hl_maximal, hl_maximal_brute, local_global_split, weighted_norm, window,
    IntervalN, KernelMatrix, WeightSeq,
};
use ultraspherical::harness::{random_sequence, Distribution};
use ultraspherical::hypergroup::{convolve, linearization_c, linearization_c_oracle, translate, FiniteSeq};
use ultraspherical::semigroup::{heat_apply, HeatRoute};
use ultraspherical::specfun::gauss_jacobi_cached;
use ultraspherical::transform::{forward_transform, natural_exponent};
use ultraspherical::transplant::{build_kernel_matrix, transplant_kernel, Parity};
use ultraspherical::OrderParam;

fn order() -> impl Strategy<Value = OrderParam> {
    (0.2f64..3.0).prop_map(|l| OrderParam::new(l).unwrap())
}

fn seq(max_len: usize) -> impl Strategy<Value = FiniteSeq> {
    prop::collection::vec(-1.0f64..1.0, 1..max_len).prop_map(FiniteSeq::new)
}

fn nonneg(max_len: usize) -> impl Strategy<Value = FiniteSeq> {
    prop::collection::vec(prop_oneof![3 => 0.0f64..5.0, 1 => Just(0.0)], 1..max_len).prop_map(FiniteSeq::new)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn maximal_fast_matches_brute(g in nonneg(300)) {
        let a = hl_maximal(&g).unwrap();
        let b = hl_maximal_brute(&g).unwrap();
        for n in 0..g.values().len() {
            prop_assert!((a.get(n) - b.get(n)).abs() <= 1e-12 * b.get(n).max(1e-300));
            prop_assert!(a.get(n) >= g.get(n));
        }
    }

    #[test]
    fn maximal_dominates_averages(g in nonneg(60), a in 0usize..60, len in 1usize..20) {
        let m = hl_maximal(&g).unwrap();
        let n = g.values().len();
        let a = a % n;
        let b = (a + len - 1).min(n - 1);
        let avg = (a..=b).map(|k| g.get(k)).sum::<f64>() / (b - a + 1) as f64;
        for k in a..=b {
            prop_assert!(m.get(k) >= avg * (1.0 - 1e-12));
        }
    }

    #[test]
    fn ap_constant_at_least_one_and_monotone(e in -0.9f64..0.9, p in 1.0f64..4.0, n in 2usize..80) {
        let w = WeightSeq::power(e, 2 * n);
        let small = ap_constant(&w, p, n).unwrap();
        let large = ap_constant(&w, p, 2 * n).unwrap();
        prop_assert!(small >= 1.0 - 1e-12);
        prop_assert!(large >= small);
    }

    #[test]
    fn dilation_contains_interval(a in 0usize..1000, len in 0usize..500) {
        let i = IntervalN::new(a, a + len).unwrap();
        let d = i.dilate2();
        prop_assert!(d.contains(i.a) && d.contains(i.b));
        prop_assert!(d.a <= i.a && d.b >= i.b);
        prop_assert!(d.len() >= i.len());
        prop_assert!(d.len() <= 2 * i.len() + 1);
        if d.a > 0 {
            prop_assert!(d.len() >= 2 * i.len() - 1);
        }
    }

    #[test]
    fn windows_are_centred(n in 1usize..100_000) {
        let w = window(n);
        prop_assert!(w.contains(n));
        prop_assert!(2 * w.a >= n && 2 * w.b <= 3 * n);
    }

    #[test]
    fn hardy_operators_are_positive_averages(g in nonneg(80)) {
        let h0 = hardy0(&g);
        let hi = hardy_inf(&g);
        let top = g.values().iter().cloned().fold(0.0, f64::max);
        for n in 1..g.values().len() {
            prop_assert!(h0.get(n) >= 0.0 && hi.get(n) >= 0.0);
            prop_assert!(h0.get(n) <= top * (n + 1) as f64 / n as f64 * (1.0 + 1e-12));
        }
    }

    #[test]
    fn weighted_norm_is_homogeneous(f in seq(40), c in -5.0f64..5.0, e in -0.5f64..2.0, p in 1.0f64..4.0) {
        let w = WeightSeq::power(e, 64);
        let a = weighted_norm(&f.scaled(c), &w, p).unwrap();
        let b = c.abs() * weighted_norm(&f, &w, p).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * b.max(1e-300));
    }

    #[test]
    fn split_adds_up(size in 4usize..40, f in seq(40)) {
        let k = KernelMatrix::from_fn(size, "test", |n, m| 1.0 / (1.0 + n as f64 + 2.0 * m as f64));
        let (loc, glob) = local_global_split(&k, &f);
        let full = k.apply(&f);
        for n in 0..=size {
            prop_assert!((loc.get(n) + glob.get(n) - full.get(n)).abs() < 1e-12);
        }
    }

    #[test]
    fn convolution_commutes(l in order(), f in seq(12), g in seq(12)) {
        let a = convolve(l, &f, &g);
        let b = convolve(l, &g, &f);
        prop_assert!(a.values().len() <= f.values().len() + g.values().len());
        for n in 0..a.values().len().max(b.values().len()) {
            prop_assert!((a.get(n) - b.get(n)).abs() <= 1e-12);
        }
    }

    #[test]
    fn translation_is_symmetric(l in order(), n in 0usize..15, m in 0usize..15, k in 0usize..15) {
        // (τ_n δ_k)(m) = c(n,m,k) is symmetric in all three indices
        let a = translate(l, n, &FiniteSeq::delta(k)).get(m);
        let b = translate(l, m, &FiniteSeq::delta(k)).get(n);
        let c = linearization_c(l, n, m, k);
        prop_assert!((a - c).abs() <= 1e-12 * c.abs().max(1.0));
        prop_assert!((b - c).abs() <= 1e-12 * c.abs().max(1.0));
    }

    #[test]
    fn linearization_closed_form(l in order(), n in 0usize..25, m in 0usize..25, k in 0usize..25) {
        let c = linearization_c(l, n, m, k);
        let o = linearization_c_oracle(l, n, m, k).unwrap();
        prop_assert!((c - o).abs() <= 1e-9 * o.abs().max(1e-3));
        prop_assert!(c >= 0.0);
    }

    #[test]
    fn plancherel_holds(l in order(), f in seq(60)) {
        let q = f.values().len() + 4;
        let rule = gauss_jacobi_cached(natural_exponent(l), q).unwrap();
        let ff = forward_transform(l, &f, &rule, true).unwrap();
        let n2 = f.norm2().powi(2);
        prop_assert!((ff.l2_norm_sq() - n2).abs() <= 1e-12 * n2.max(1.0));
    }

    #[test]
    fn heat_contracts(l in order(), f in seq(20), t in 0.001f64..20.0) {
        let w = heat_apply(l, t, &f, HeatRoute::Convolution, None).unwrap();
        prop_assert!(w.norm2() <= f.norm2() * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn transplant_swap_symmetry(l in 0.3f64..3.0, m in 0.3f64..3.0, n in 0usize..40, k in 0usize..40) {
        let (a, b) = (OrderParam::new(l).unwrap(), OrderParam::new(m).unwrap());
        let x = transplant_kernel(a, b, n, k).unwrap();
        let y = transplant_kernel(b, a, k, n).unwrap();
        prop_assert!((x - y).abs() <= 1e-12);
        if (n + k) % 2 == 1 {
            prop_assert_eq!(x, 0.0);
        }
    }

    #[test]
    fn parity_kernels_are_sublattices(l in 0.3f64..3.0, m in 0.3f64..3.0, n in 0usize..12, k in 0usize..12) {
        let (a, b) = (OrderParam::new(l).unwrap(), OrderParam::new(m).unwrap());
        let full = build_kernel_matrix(a, b, 25, Parity::Full).unwrap();
        let even = build_kernel_matrix(a, b, 12, Parity::Even).unwrap();
        let odd = build_kernel_matrix(a, b, 12, Parity::Odd).unwrap();
        prop_assert!((even.get(n, k) - full.get(2 * n, 2 * k)).abs() <= 1e-13);
        prop_assert!((odd.get(n, k) - full.get(2 * n + 1, 2 * k + 1)).abs() <= 1e-13);
    }

    #[test]
    fn random_sequences_are_unit(seed in any::<u64>(), n in 1usize..200, rad in any::<bool>()) {
        let d = if rad { Distribution::Rademacher } else { Distribution::Gaussian };
        let f = random_sequence(seed, n, d).unwrap();
        prop_assert!((f.norm2() - 1.0).abs() <= 1e-15);
        prop_assert_eq!(f, random_sequence(seed, n, d).unwrap());
    }

    #[test]
    fn sequence_csv_roundtrip(f in seq(50)) {
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let back = FiniteSeq::read_csv(buf.as_slice()).unwrap();
        prop_assert_eq!(back, f);
    }
}
