use proptest::prelude::*;

use thermoquery::bits::BitString;
use thermoquery::detuning::{detuned_probe_temperature, flip_probability, suppression_factor};
use thermoquery::exact::build_joint_state;
use thermoquery::problems::{enumerate_balanced_functions, hamming_weight_population, BVInstance};
use thermoquery::query::{
    classify_regime, kickback_outcome, reset_costs, virtual_swap_outcome, QueryMask, Regime,
};
use thermoquery::readout::{
    chernoff_stein_samples, classical_with_replacement_error, classical_without_replacement_error,
    exact_error_rates, neyman_pearson_threshold, pinsker_lower_bound, relative_entropy,
    sample_bound_from_threshold, total_variation, BinaryDistribution, SampleBound,
};
use thermoquery::thermal::{
    build_bv_oracle, build_dj_oracle, ground_state_population, inverse_temperature_from_population,
    BooleanFunctionTable,
};
use thermoquery::{ThermalMachineOracle, ThermalQubit};

fn gaps(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..2.0, 1..=max_len)
}

fn probe() -> impl Strategy<Value = ThermalQubit> {
    (0.05f64..3.0, -1.0f64..3.0).prop_map(|(w, b)| ThermalQubit::new(w, b).unwrap())
}

fn bits(len: usize) -> impl Strategy<Value = BitString> {
    prop::collection::vec(any::<bool>(), len).prop_map(BitString::new)
}

proptest! {
    // Past |beta * gap| of about 12 the excited population loses too many digits
    // in f64 for an absolute 1e-10 recovery of beta.
    #[test]
    fn temperature_round_trip(
        (gap, beta) in (1e-3f64..50.0).prop_flat_map(|w| {
            let b = (12.0 / w).min(20.0);
            (Just(w), -b..b)
        }),
    ) {
        let p0 = ground_state_population(gap, beta).unwrap();
        let back = inverse_temperature_from_population(p0, gap).unwrap();
        prop_assert!((back - beta).abs() <= 1e-10, "{beta} -> {back}");
    }

    #[test]
    fn positive_temperature_favours_ground(gap in 0.01f64..5.0, beta in -5.0f64..5.0) {
        let p0 = ground_state_population(gap, beta).unwrap();
        prop_assert!(p0 > 0.0 && p0 < 1.0);
        prop_assert_eq!(p0 > 0.5, beta > 0.0);
    }

    #[test]
    fn log_partition_matches_direct_sum(g in gaps(8), beta_m in 0.0f64..3.0) {
        let oracle = ThermalMachineOracle::custom(g.clone(), beta_m).unwrap();
        let n = g.len();
        let direct: f64 = BitString::all(n).map(|x| (-beta_m * x.dot(&g).unwrap()).exp()).sum();
        prop_assert!((oracle.log_partition().exp() - direct).abs() <= 1e-12 * direct);
    }

    #[test]
    fn balanced_partition_is_permutation_invariant(
        seed in any::<u64>(), e1 in 0.05f64..2.0, e2 in 0.05f64..2.0, beta_m in 0.1f64..2.0,
    ) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let a = thermoquery::problems::sample_balanced_function(3, &mut rng).unwrap();
        let b = thermoquery::problems::sample_balanced_function(3, &mut rng).unwrap();
        let za = build_dj_oracle(a.function(), e1, e2, beta_m).unwrap().log_partition();
        let zb = build_dj_oracle(b.function(), e1, e2, beta_m).unwrap().log_partition();
        prop_assert!((za - zb).abs() < 1e-12);
    }

    #[test]
    fn population_update_is_additive(p in probe(), g in gaps(6), beta_m in 0.0f64..3.0, mask_seed in any::<u64>()) {
        let oracle = ThermalMachineOracle::custom(g, beta_m).unwrap();
        let mask = BitString::from_index(mask_seed as usize % (1 << oracle.len()), oracle.len());
        let out = kickback_outcome(&p, &oracle, &QueryMask::new(mask, &oracle).unwrap()).unwrap();
        prop_assert_eq!(out.p0_after, out.p0_before + out.delta_p0);
        prop_assert!(out.p0_after >= 0.0 && out.p0_after <= 1.0);
    }

    #[test]
    fn full_mask_reduces_to_virtual_swap(p in probe(), g in gaps(6), beta_m in 0.0f64..3.0) {
        let oracle = ThermalMachineOracle::custom(g, beta_m).unwrap();
        let general = kickback_outcome(&p, &oracle, &QueryMask::full(&oracle)).unwrap();
        let closed = virtual_swap_outcome(&p, &oracle);
        prop_assert!((general.p0_after - closed.p0_after).abs() <= 1e-14);
        prop_assert_eq!(general.regime, closed.regime);
        if let (Some(a), Some(b)) = (general.beta_after, closed.beta_after) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn beta_after_matches_population(p in probe(), g in gaps(6), beta_m in 0.0f64..3.0) {
        let oracle = ThermalMachineOracle::custom(g, beta_m).unwrap();
        let out = virtual_swap_outcome(&p, &oracle);
        let beta = out.beta_after.expect("physical exchanges keep the probe mixed");
        let from_population = inverse_temperature_from_population(out.p0_after, p.gap()).unwrap();
        prop_assert!((beta - from_population).abs() <= 1e-10 * (1.0 + beta.abs()));
    }

    #[test]
    fn regime_label_is_sign_of_change(p in probe(), g in gaps(6), beta_m in 0.0f64..3.0) {
        let oracle = ThermalMachineOracle::custom(g, beta_m).unwrap();
        let out = virtual_swap_outcome(&p, &oracle);
        let label = classify_regime(&p, &oracle);
        match label {
            Regime::Cooling => prop_assert!(out.delta_p0 > 0.0),
            Regime::Heating => prop_assert!(out.delta_p0 < 0.0),
            Regime::Neutral => prop_assert_eq!(out.delta_p0, 0.0),
        }
        prop_assert_eq!(label, out.regime);
    }

    #[test]
    fn reset_costs_scale_with_gaps(p in probe(), g in gaps(6), beta_m in 0.0f64..3.0) {
        let oracle = ThermalMachineOracle::custom(g, beta_m).unwrap();
        let out = virtual_swap_outcome(&p, &oracle);
        let c = reset_costs(&out, &oracle, &p);
        prop_assert!((c.dissipation * p.gap() - c.reset_work * oracle.total_gap()).abs() <= 1e-14);
    }

    #[test]
    fn exchange_preserves_trace_and_is_involution(
        p in probe(), g in gaps(5), beta_m in 0.0f64..3.0, pairs in prop::collection::vec((0usize..64, 0usize..64), 1..20),
    ) {
        let oracle = ThermalMachineOracle::custom(g, beta_m).unwrap();
        let state = build_joint_state(&p, &oracle).unwrap();
        let len = state.len();
        let mut s = state.clone();
        let mut applied = Vec::new();
        for (a, b) in pairs {
            let (a, b) = (a % len, b % len);
            if a == b {
                continue;
            }
            s = s.apply_level_exchange(a, b).unwrap();
            applied.push((a, b));
            prop_assert!((s.total_population() - 1.0).abs() <= 1e-14);
        }
        for &(a, b) in applied.iter().rev() {
            s = s.apply_level_exchange(a, b).unwrap();
        }
        prop_assert_eq!(s, state);
    }

    #[test]
    fn exact_marginal_matches_kickback(p in probe(), g in gaps(6), beta_m in 0.0f64..3.0, mask_seed in any::<u64>()) {
        let oracle = ThermalMachineOracle::custom(g, beta_m).unwrap();
        let mask = BitString::from_index(mask_seed as usize % (1 << oracle.len()), oracle.len());
        let state = build_joint_state(&p, &oracle).unwrap();
        let exact = state.apply_mask_exchange(&mask).unwrap().probe_marginal().unwrap().p0();
        let out = kickback_outcome(&p, &oracle, &QueryMask::new(mask, &oracle).unwrap()).unwrap();
        prop_assert!((exact - out.p0_after).abs() <= 1e-12);
    }

    #[test]
    fn hamming_population_matches_kickback(
        p in probe(), secret in (1usize..8).prop_flat_map(bits), gamma in 0.05f64..2.0, beta_m in 0.0f64..3.0,
    ) {
        let oracle = build_bv_oracle(&secret, gamma, beta_m).unwrap();
        let out = kickback_outcome(&p, &oracle, &QueryMask::full(&oracle)).unwrap();
        let h = hamming_weight_population(&BVInstance::new(secret), gamma, &p, beta_m).unwrap();
        prop_assert!((h - out.p0_after).abs() <= 1e-14);
    }

    #[test]
    fn pinsker_inequality(p in 0.0f64..=1.0, q in 0.0f64..=1.0) {
        let (p, q) = (BinaryDistribution::new(p).unwrap(), BinaryDistribution::new(q).unwrap());
        let d = relative_entropy(&p, &q);
        prop_assert!(d >= 0.0);
        prop_assert!(d >= pinsker_lower_bound(&p, &q) - 1e-15);
        prop_assert_eq!(total_variation(&p, &q), total_variation(&q, &p));
    }

    #[test]
    fn pinsker_path_matches_threshold_bound(delta in 1e-6f64..0.9, t in 0.01f64..=1.0) {
        let p = BinaryDistribution::new(0.5 + t / 2.0).unwrap();
        let q = BinaryDistribution::new(0.5 - t / 2.0).unwrap();
        let tv = total_variation(&p, &q);
        let via_pinsker = chernoff_stein_samples(delta, pinsker_lower_bound(&p, &q)).unwrap();
        let direct = sample_bound_from_threshold(delta, tv).unwrap();
        prop_assert_eq!(via_pinsker, SampleBound::Samples(direct));
    }

    #[test]
    fn without_replacement_never_worse(n in 2u32..=24, k in 1u64..=12) {
        prop_assume!(k <= 1 << n);
        let with = classical_with_replacement_error(k).unwrap();
        let without = classical_without_replacement_error(n, k).unwrap();
        let larger = classical_without_replacement_error(n + 1, k).unwrap();
        prop_assert!(without <= with);
        prop_assert!(without <= larger && larger <= with);
    }

    #[test]
    fn neyman_pearson_respects_level(pb in 0.05f64..0.95, pc in 0.05f64..0.95, n in 1u64..200, delta in 0.01f64..0.5) {
        let (hb, hc) = (BinaryDistribution::new(pb).unwrap(), BinaryDistribution::new(pc).unwrap());
        let lam = neyman_pearson_threshold(&hb, &hc, n, delta).unwrap();
        let (fp, _) = exact_error_rates(&hb, &hc, n, lam).unwrap();
        prop_assert!(fp <= delta + 1e-12);
    }

    #[test]
    fn flip_probability_under_envelope(g in 0.01f64..5.0, d in -10.0f64..10.0, t in 0.0f64..100.0) {
        let eta = suppression_factor(g, d).unwrap();
        prop_assert!(eta > 0.0 && eta <= 1.0);
        prop_assert!(flip_probability(g, d, t).unwrap() <= eta);
    }

    #[test]
    fn suppression_decreases_with_detuning(g in 0.01f64..5.0, a in 0.0f64..10.0, b in 0.0f64..10.0) {
        prop_assume!(a < b);
        prop_assert!(suppression_factor(g, b).unwrap() < suppression_factor(g, a).unwrap());
    }

    #[test]
    fn detuned_temperature_monotone_in_eta(p in probe(), g in gaps(3), beta_m in 0.0f64..3.0, e1 in 0.01f64..1.0, e2 in 0.01f64..1.0) {
        let oracle = ThermalMachineOracle::custom(g, beta_m).unwrap();
        let (lo, hi) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
        prop_assume!(lo < hi);
        let a = detuned_probe_temperature(&p, &oracle, lo).unwrap().beta_prime.unwrap();
        let b = detuned_probe_temperature(&p, &oracle, hi).unwrap().beta_prime.unwrap();
        let one = detuned_probe_temperature(&p, &oracle, 1.0).unwrap().beta_prime.unwrap();
        match classify_regime(&p, &oracle) {
            Regime::Cooling => prop_assert!(p.beta() <= a && a <= b && b <= one),
            Regime::Heating => prop_assert!(p.beta() >= a && a >= b && b >= one),
            Regime::Neutral => prop_assert!((a - b).abs() < 1e-12),
        }
    }

    #[test]
    fn bit_string_round_trips(v in 0usize..1 << 12, w in 12usize..20) {
        let b = BitString::from_index(v, w);
        prop_assert_eq!(b.to_index(), v);
        let parsed: BitString = b.to_string().parse().unwrap();
        prop_assert_eq!(parsed, b);
    }
}

#[test]
fn enumerated_balanced_gap_sum() {
    for n in 1..=4 {
        let size = 1usize << n;
        for inst in enumerate_balanced_functions(n, None).unwrap() {
            let oracle = build_dj_oracle(inst.function(), 1.25, 0.5, 1.0).unwrap();
            assert_eq!(oracle.total_gap(), size as f64 / 2.0 * (1.25 + 0.5));
        }
    }
}

#[test]
fn dj_gap_sum_trichotomy() {
    let (e1, e2) = (0.75, 0.5);
    for n in 1..=3 {
        let size = 1usize << n;
        let c1 = build_dj_oracle(
            &BooleanFunctionTable::constant(n, true).unwrap(),
            e1,
            e2,
            1.0,
        )
        .unwrap();
        let c0 = build_dj_oracle(
            &BooleanFunctionTable::constant(n, false).unwrap(),
            e1,
            e2,
            1.0,
        )
        .unwrap();
        assert_eq!(c1.total_gap(), size as f64 * e1);
        assert_eq!(c0.total_gap(), size as f64 * e2);
    }
}
