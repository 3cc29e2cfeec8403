use std::sync::OnceLock;

use bt_arc::cocycle::{
    block_decomposition, blocks_to_word, cylinder, product, random_word, trial_rng, Word,
    WordPolicy,
};
use bt_arc::dimension::{ln_phi_branch, singular_values, PartitionTable, PhiBranch};
use bt_arc::gasket::{
    chart_alpha_beta, lengths_from_alpha_beta, render, Chart, RenderConfig, RenderMode,
};
use bt_arc::itm::{
    attractor_iterates, attractor_outcome, classify, AttractorOutcome, BtParams, Classification,
    LengthVector,
};
use bt_arc::renorm::{reconstruct, run_induction, InductionState, Perm, RunOutcome};
use bt_arc::Execution;
use num_bigint::BigInt;
use proptest::prelude::*;

fn lengths(max_den: i64) -> impl Strategy<Value = LengthVector> {
    any::<u64>().prop_map(move |seed| LengthVector::random(&mut trial_rng(seed, 0), max_den))
}

fn path(max_len: usize) -> impl Strategy<Value = Word> {
    (any::<u64>(), 1..=max_len)
        .prop_map(|(seed, n)| random_word(seed, n, &WordPolicy::UniformEdges).unwrap())
}

fn table() -> &'static PartitionTable {
    static TABLE: OnceLock<PartitionTable> = OnceLock::new();
    TABLE.get_or_init(|| PartitionTable::build(10, Execution::default()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn attractor_iterates_are_nested(l in lengths(200)) {
        let params = BtParams::from_lengths(&l).unwrap();
        let run = attractor_iterates(&params, 300).unwrap();
        for w in run.iterates.windows(2) {
            prop_assert!(w[1].is_subset_of(&w[0]));
            prop_assert!(w[1].measure() <= w[0].measure());
            prop_assert!(!w[1].is_empty());
        }
    }

    #[test]
    fn reconstruction_inverts_induction(l in lengths(10_000), steps in 1usize..200) {
        let run = run_induction(&InductionState::new(Perm::P123, l.clone()), steps);
        prop_assert_eq!(reconstruct(&run.word, &run.final_state.lengths).unwrap(), l);
    }

    #[test]
    fn random_words_are_admissible_unimodular_paths(w in path(60)) {
        prop_assert!(w.is_admissible(Perm::P123));
        prop_assert_eq!(w.end_state(Perm::P123), w.letters().last().unwrap().target());
        let m = product(&w).unwrap().matrix;
        prop_assert_eq!(m.det(), BigInt::from(1));
        prop_assert!(m.is_nonnegative());
        let (blocks, tail) = block_decomposition(&w).unwrap();
        prop_assert_eq!(blocks_to_word(&blocks, &tail), w.clone());
        prop_assert_eq!(w.to_string().parse::<Word>().unwrap(), w);
    }

    #[test]
    fn phi_is_continuous_at_branch_points(w in path(40)) {
        let t = singular_values(&product(&w).unwrap().matrix).unwrap();
        let d1 = ln_phi_branch(&t, 1.0, PhiBranch::Low) - ln_phi_branch(&t, 1.0, PhiBranch::Mid);
        let d2 = ln_phi_branch(&t, 2.0, PhiBranch::Mid) - ln_phi_branch(&t, 2.0, PhiBranch::High);
        prop_assert!(d1.abs() < 1e-12, "{}", d1);
        prop_assert!(d2.abs() < 1e-12, "{}", d2);
    }

    #[test]
    fn singular_values_multiply_to_one(w in path(60)) {
        let t = singular_values(&product(&w).unwrap().matrix).unwrap();
        prop_assert!(t.ln_product().abs() < 1e-10, "{}", t.ln_product());
        let [a1, a2, a3] = t.logs();
        prop_assert!(a1 >= a2 && a2 >= a3);
    }

    #[test]
    fn pressure_decreases(n in 1usize..=10, start in 0usize..60) {
        let s = start as f64 * 0.05;
        let here = table().pressure(n, s).unwrap();
        let next = table().pressure(n, s + 0.05).unwrap();
        prop_assert!(next < here, "P_{}({}) = {} <= {}", n, s, here, next);
    }

    #[test]
    fn alpha_beta_chart_round_trips(l in lengths(10_000)) {
        let (alpha, beta) = chart_alpha_beta(&l);
        prop_assert!(beta < alpha);
        prop_assert_eq!(lengths_from_alpha_beta(&alpha, &beta).unwrap(), l);
    }

    #[test]
    fn cylinder_barycentres_survive(w in path(20)) {
        let [p, q, r] = cylinder(&w).unwrap();
        let [p, q, r] = [p.to_array(), q.to_array(), r.to_array()];
        let centre = LengthVector::from_array(std::array::from_fn(|i| &p[i] + &q[i] + &r[i])).unwrap();
        let params = BtParams::from_lengths(&centre).unwrap();
        prop_assert_eq!(classify(&params, w.len()), Classification::InfiniteUpTo(w.len()));
        let run = run_induction(&InductionState::new(Perm::P123, centre), w.len());
        prop_assert_eq!(run.outcome, RunOutcome::Survived);
        prop_assert_eq!(run.word, w);
    }

    #[test]
    fn induction_and_attractor_agree(l in lengths(300)) {
        let params = BtParams::from_lengths(&l).unwrap();
        let verdict = classify(&params, 10_000);
        let attractor = attractor_outcome(&params, 10_000).unwrap();
        prop_assert!(!matches!(verdict, Classification::InfiniteUpTo(_)));
        if matches!(verdict, Classification::FiniteType(_)) {
            prop_assert!(matches!(attractor, AttractorOutcome::Stabilized(_)));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fill_and_carve_agree(depth in 0usize..=7, resolution in 16usize..=96, ab in any::<bool>()) {
        let chart = if ab { Chart::AlphaBeta } else { Chart::Simplex };
        let cfg = |mode| RenderConfig { depth, resolution, chart, mode };
        let fill = render(&cfg(RenderMode::Fill), Execution::Sequential).unwrap();
        let carve = render(&cfg(RenderMode::Carve), Execution::Parallel).unwrap();
        prop_assert_eq!(fill.to_ppm(), carve.to_ppm());
    }
}
