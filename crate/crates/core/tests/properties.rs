use proptest::prelude::*;

use aoi_core::analysis::PropositionId;
use aoi_core::closed_form::{aaoi, conjecture_bounds, ratio, ClosedFormId, RateParams};
use aoi_core::desim::{simulate, Horizon, SimConfig};
use aoi_core::model::{Discipline, ModelId, Overflow, QueueModel};
use aoi_core::numfmt::sig12;
use aoi_core::shs::{
    build_finite_model, build_truncated_mm1, dump_table, parse_table, solve_age_system, stationary_distribution,
    ShsModel, TruncationSpec,
};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn rate() -> impl Strategy<Value = f64> {
    (-2.0f64..2.0).prop_map(|e| 10f64.powf(e))
}

fn finite_id() -> impl Strategy<Value = ClosedFormId> {
    prop::sample::select(ClosedFormId::FINITE.to_vec())
}

/// A small model of every builder family.
fn any_model() -> impl Strategy<Value = ShsModel> {
    prop_oneof![
        (finite_id(), rate(), rate())
            .prop_map(|(id, l, m)| build_finite_model(id, &RateParams::new(l, m).unwrap()).unwrap()),
        (prop::bool::ANY, 1usize..6, 0.05f64..0.95).prop_map(|(ps, n, rho)| {
            let d = if ps { Discipline::Ps } else { Discipline::Fgfs };
            build_truncated_mm1(d, &[rho], 1.0, 1, &TruncationSpec::new(n)).unwrap()
        }),
        (prop::bool::ANY, 1usize..4, rate(), rate(), 1usize..=2).prop_map(|(ps, n, l1, l2, soi)| {
            let d = if ps { Discipline::Ps } else { Discipline::Fgfs };
            build_truncated_mm1(d, &[l1, l2], 1.0, soi, &TruncationSpec::new(n)).unwrap()
        }),
    ]
}

fn with_permutation(m: ShsModel) -> impl Strategy<Value = (ShsModel, Vec<usize>, Vec<usize>)> {
    let states: Vec<usize> = (0..m.states().len()).collect();
    let trans: Vec<usize> = (0..m.transitions().len()).collect();
    (Just(m), Just(states).prop_shuffle(), Just(trans).prop_shuffle())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closed_forms_scale_with_time_unit(id in prop::sample::select(ClosedFormId::ALL.to_vec()), l in rate(), m in rate(), c in rate()) {
        let p = RateParams::new(l, m).unwrap();
        prop_assume!(id.check(&p).is_ok());
        let scaled = p.scaled(c).unwrap();
        prop_assert!(rel(aaoi(id, &scaled).unwrap() * c, aaoi(id, &p).unwrap()) <= 1e-12);
    }

    #[test]
    fn shs_scales_with_time_unit(id in finite_id(), l in rate(), m in rate(), c in rate()) {
        let p = RateParams::new(l, m).unwrap();
        let a = solve_age_system(&build_finite_model(id, &p).unwrap()).unwrap().aaoi;
        let b = solve_age_system(&build_finite_model(id, &p.scaled(c).unwrap()).unwrap()).unwrap().aaoi;
        prop_assert!(rel(b * c, a) <= 1e-12);
    }

    #[test]
    fn relabelling_does_not_change_the_solution((m, perm, order) in any_model().prop_flat_map(with_permutation)) {
        let base = solve_age_system(&m).unwrap();
        let permuted = solve_age_system(&m.permute_states(&perm).unwrap()).unwrap();
        let reordered = solve_age_system(&m.reorder_transitions(&order).unwrap()).unwrap();
        prop_assert!(rel(permuted.aaoi, base.aaoi) <= 1e-12);
        prop_assert!(rel(reordered.aaoi, base.aaoi) <= 1e-12);
        for (q, &p) in perm.iter().enumerate() {
            prop_assert!((permuted.pi[p] - base.pi[q]).abs() <= 1e-12 * base.pi[q].max(1e-300) + 1e-300);
        }
    }

    #[test]
    fn stationary_distribution_is_a_distribution(m in any_model()) {
        let pi = stationary_distribution(&m).unwrap();
        prop_assert!(pi.iter().all(|p| *p >= 0.0));
        prop_assert!((pi.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn age_vectors_are_nonnegative(m in any_model()) {
        let s = solve_age_system(&m).unwrap();
        prop_assert!(s.v.iter().flatten().all(|x| *x >= 0.0));
        prop_assert!(s.aaoi > 0.0);
    }

    #[test]
    fn table_round_trip(m in any_model()) {
        let text = dump_table(&m);
        let back = parse_table(&text).unwrap();
        prop_assert_eq!(dump_table(&back), text);
        prop_assert!(rel(solve_age_system(&back).unwrap().aaoi, solve_age_system(&m).unwrap().aaoi) <= 1e-12);
    }

    #[test]
    fn ratio_bounds_hold_at_any_load(rho in (-4.0f64..4.0).prop_map(|e| 10f64.powf(e))) {
        for prop in PropositionId::RATIOS {
            let b = prop.ratio_bound().unwrap();
            let r = ratio(b.num, b.den, &RateParams::new(rho, 1.0).unwrap()).unwrap();
            // The exact P12 maximum sits 2.8e-5 above its stated bound.
            let slack = if prop == PropositionId::P12Mm11Star { 3e-5 } else { 1e-9 };
            prop_assert!(r >= b.lower - 1e-9 && r <= b.upper + slack, "{} at {}: {}", prop, rho, r);
        }
    }

    #[test]
    fn truncation_reaches_the_infinite_buffer(rho in 0.05f64..0.6) {
        // Both disciplines lose mass like rho^N, so N = 30 is well inside 1e-6.
        let solve = |d| solve_age_system(&build_truncated_mm1(d, &[rho], 1.0, 1, &TruncationSpec::new(30)).unwrap()).unwrap().aaoi;
        let fgfs = aaoi(ClosedFormId::Mm1Fgfs, &RateParams::new(rho, 1.0).unwrap()).unwrap();
        prop_assert!(rel(solve(Discipline::Fgfs), fgfs) <= 1e-6);
        let ps = solve(Discipline::Ps);
        let b = conjecture_bounds(rho).unwrap();
        prop_assert!(ps > (1.0 - rho) / rho);
        prop_assert!(ps >= 1.0 / rho + 1.0 + b.lower && ps <= 1.0 / rho + 1.0 + b.upper);
    }

    #[test]
    fn sig12_is_within_half_ulp_of_twelve_digits(x in prop::num::f64::NORMAL) {
        let back: f64 = sig12(x).parse().unwrap();
        prop_assert!(rel(back, x) <= 5e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn simulation_is_deterministic(seed in any::<u64>(), id in prop::sample::select(ModelId::ALL.to_vec()), l in 0.2f64..3.0) {
        prop_assume!(id.queue().capacity.is_some() || l + 0.3 < 0.9);
        let c = SimConfig::new(id.queue(), vec![l, 0.3], 1.0, Horizon::Events(5_000), seed, 2);
        prop_assert_eq!(simulate(&c).unwrap(), simulate(&c).unwrap());
    }

    #[test]
    fn single_slot_disciplines_coincide(seed in any::<u64>(), l in 0.2f64..3.0, overflow in prop::sample::select(vec![Overflow::DropNew, Overflow::ReplaceNewest])) {
        let q = |discipline| QueueModel { discipline, capacity: Some(1), overflow };
        let ps = SimConfig::new(q(Discipline::Ps), vec![l], 1.0, Horizon::Events(5_000), seed, 2);
        let fgfs = SimConfig { queue: q(Discipline::Fgfs), ..ps.clone() };
        prop_assert_eq!(simulate(&ps).unwrap().sources, simulate(&fgfs).unwrap().sources);
    }
}
