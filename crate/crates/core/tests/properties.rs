use std::sync::Arc;

use proptest::prelude::*;

use tapelearn::fixtures::{r_a, r_b, r_eps};
use tapelearn::game::{ess_verdict, payoff_matrix, replicate, EssVerdict, Population, UtilityMeasure};
use tapelearn::history::SystemHistory;
use tapelearn::random::{definite_table_set, random_table, random_tables, seeded, TableShape};
use tapelearn::{
    build_hybrid, decide_halt, learner_class, run, storage_size, HaltDecision, LanguageClass, LearnerSpec, ModeKind,
    Oracle, RuleTable, RunOutcome, StringUniverse,
};

const GUARD: u64 = 400;

fn universe(max_len: usize) -> Arc<StringUniverse> {
    StringUniverse::new(vec!['a', 'b'], max_len).unwrap()
}

fn small_table(seed: u64) -> RuleTable {
    random_table(&mut seeded(seed), "t", &['a', 'b'], '_', TableShape::default())
}

fn definite_set(seed: u64, u: &Arc<StringUniverse>) -> Vec<Arc<RuleTable>> {
    definite_table_set(&mut seeded(seed), "t", u, &Oracle::new(GUARD), 200).expect("definite table set")
}

fn input_strategy() -> impl Strategy<Value = String> {
    proptest::collection::vec(prop_oneof![Just('a'), Just('b')], 0..6).prop_map(|v| v.into_iter().collect())
}

/// Accepts a-prefixed strings and runs forever on b-prefixed ones.
fn r_a_hangs_on_b() -> RuleTable {
    RuleTable::parse(
        "name: R_A_HANG\nalphabet: a b\nblank: _\nstart: q0\naccept: acc\nreject: rej\n\
         q0 a -> acc a S\nq0 _ -> rej _ S\nq0 b -> spin b R\nspin a -> spin a R\nspin b -> spin b R\nspin _ -> spin _ R\n",
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn run_is_deterministic_and_bounded(seed in any::<u64>(), input in input_strategy(), budget in 1u64..300) {
        let t = small_table(seed);
        let first = run(&t, &input, budget).unwrap();
        prop_assert_eq!(first, run(&t, &input, budget).unwrap());
        prop_assert!(first.steps <= budget);
        prop_assert!(first.space >= 1);
        prop_assert!(first.space as u64 <= first.steps + 1);
        prop_assert!(first.space as u64 <= input.len().max(1) as u64 + first.steps);
    }

    #[test]
    fn halting_runs_are_budget_monotone(seed in any::<u64>(), input in input_strategy(), extra in 0u64..500) {
        let t = small_table(seed);
        let r = run(&t, &input, 300).unwrap();
        if r.outcome != RunOutcome::BudgetExhausted {
            prop_assert_eq!(run(&t, &input, r.steps + extra).unwrap(), r);
        }
    }

    #[test]
    fn source_round_trips(seed in any::<u64>()) {
        let t = small_table(seed);
        prop_assert_eq!(RuleTable::parse(&t.to_string()).unwrap(), t);
    }

    #[test]
    fn oracle_agrees_with_interpreter(seed in any::<u64>(), input in input_strategy()) {
        let t = small_table(seed);
        match decide_halt(&t, &input, GUARD).unwrap() {
            HaltDecision::HaltsAccept { steps } => {
                let r = run(&t, &input, steps).unwrap();
                prop_assert_eq!((r.outcome, r.steps), (RunOutcome::Accepted, steps));
                prop_assert!(steps >= 1);
            }
            HaltDecision::HaltsReject { steps } => {
                let r = run(&t, &input, steps).unwrap();
                prop_assert_eq!((r.outcome, r.steps), (RunOutcome::Rejected, steps));
            }
            HaltDecision::Diverges(_) => {
                prop_assert_eq!(run(&t, &input, 10 * GUARD).unwrap().outcome, RunOutcome::BudgetExhausted);
            }
            HaltDecision::Unknown => {}
        }
    }

    #[test]
    fn raising_the_guard_only_resolves_unknowns(seed in any::<u64>(), input in input_strategy(), guard in 1u64..60) {
        let t = small_table(seed);
        let low = decide_halt(&t, &input, guard).unwrap();
        let high = decide_halt(&t, &input, guard * 8).unwrap();
        if low != HaltDecision::Unknown {
            prop_assert_eq!(low.accepts(), high.accepts());
            prop_assert_eq!(low.diverges(), high.diverges());
            prop_assert_eq!(low.halts(), high.halts());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn class_relations_on_random_sets(seed in any::<u64>()) {
        let u = universe(4);
        let o = Oracle::new(GUARD);
        let tables = definite_set(seed, &u);
        let union = o.union_class(&tables, &u).unwrap();
        let core = o.sequential_class(&tables, &u).unwrap();
        prop_assert!(core.is_subset(&union));

        let par = LearnerSpec::parallel("Par", tables.clone(), GUARD).unwrap();
        prop_assert_eq!(learner_class(&par, &u, &o).unwrap(), union.clone());

        let seq = LearnerSpec::sequential("Seq", tables.clone(), GUARD).unwrap();
        let seq_class = learner_class(&seq, &u, &o).unwrap();
        prop_assert!(seq_class.is_subset(&union));
        prop_assert!(core.is_subset(&seq_class));

        let hyb = LearnerSpec::hybrid("Hyb", tables.clone(), &u, &o, GUARD).unwrap();
        prop_assert_eq!(learner_class(&hyb, &u, &o).unwrap(), union);

        prop_assert_eq!(storage_size(&par), storage_size(&seq));
        prop_assert_eq!(storage_size(&par), storage_size(&hyb));
    }

    #[test]
    fn hybrid_lanes_are_antichains(seed in any::<u64>()) {
        let u = universe(4);
        let o = Oracle::new(GUARD);
        let tables = definite_set(seed, &u);
        let plan = build_hybrid(&tables, &u, &o).unwrap();
        let mut covered: Vec<usize> = plan.lanes().iter().flatten().copied().collect();
        covered.sort_unstable();
        prop_assert_eq!(covered, (0..tables.len()).collect::<Vec<_>>());
        for (i, hang) in tables.iter().map(|t| o.hang_set(t, &u).unwrap()).enumerate() {
            for (j, t) in tables.iter().enumerate() {
                let related = !hang.intersection(&o.language_of(t, &u).unwrap()).is_empty();
                prop_assert_eq!(related, plan.hang_order().contains(&(i, j)));
            }
        }
        for lane in plan.lanes() {
            for &i in lane {
                for &j in lane {
                    prop_assert!(!plan.hang_order().contains(&(i, j)));
                }
            }
        }
    }

    #[test]
    fn time_and_space_decompositions(seed in any::<u64>()) {
        let u = universe(4);
        let tables = definite_set(seed, &u);
        let seq = LearnerSpec::sequential("Seq", tables.clone(), GUARD).unwrap();
        let par = LearnerSpec::parallel("Par", tables.clone(), GUARD).unwrap();
        for w in u.strings() {
            let s = seq.accept(w).unwrap();
            let p = par.accept(w).unwrap();
            prop_assert_eq!(s.time, s.per_table.iter().map(|r| r.result.steps).sum::<u64>());
            prop_assert_eq!(s.space, s.per_table.iter().map(|r| r.result.space).max().unwrap());
            prop_assert_eq!(p.space, p.per_table.iter().map(|r| r.result.space).sum::<usize>());
            let (Some(ks), Some(kp)) = (s.outcome.accepting_index(), p.outcome.accepting_index()) else { continue };
            // The accepting run of the sequential learner is its last entry.
            let accept_steps = s.per_table.last().unwrap().result.steps;
            prop_assert_eq!(p.time, p.per_table[kp].result.steps);
            prop_assert!(p.time <= s.time);
            prop_assert!(p.time <= accept_steps);
            let rejected: u64 = s.per_table[..ks].iter().map(|r| r.result.steps).sum();
            if kp == ks {
                prop_assert_eq!(s.time, rejected + p.time);
                let rejects_done = s.per_table[..ks].iter().all(|r| r.result.steps <= p.time);
                if rejects_done {
                    prop_assert!(s.space <= p.space);
                }
            }
        }
    }

    #[test]
    fn parallel_histories_are_filtrations(seed in any::<u64>()) {
        let u = universe(3);
        let o = Oracle::new(GUARD);
        let mut rng = seeded(seed);
        let pool: Vec<Arc<RuleTable>> = loop {
            let pool = random_tables(&mut rng, "r", 4, &['a', 'b'], '_');
            if pool.iter().all(|t| o.profile(t, &u).is_ok()) {
                break pool.into_iter().map(Arc::new).collect();
            }
        };
        let mut h = SystemHistory::new(&u, vec![pool[0].clone()], ModeKind::Parallel).unwrap();
        for t in &pool[1..] {
            h = h.add_rule(t.clone()).unwrap();
        }
        prop_assert!(h.is_filtration(&o).unwrap());
        for t in 1..h.len() {
            let occurred = h.learning_occurred(t - 1, t, &o).unwrap();
            prop_assert_eq!(occurred, !h.learned_set(t - 1, t, &o).unwrap().is_empty());
            prop_assert_eq!(Some(occurred), h.addition_adds_strings(t, &o).unwrap());
        }
    }

    #[test]
    fn measure_laws(weights in proptest::collection::vec(0.01f64..10.0, 15), a in any::<u16>(), b in any::<u16>()) {
        let u = universe(3);
        let named = u.strings().iter().cloned().zip(weights.iter().copied());
        let m = UtilityMeasure::weighted(&u, named).unwrap();
        let x = LanguageClass::from_indices(&u, (0..15).filter(|i| a >> i & 1 == 1));
        let y = LanguageClass::from_indices(&u, (0..15).filter(|i| b >> i & 1 == 1)).difference(&x);
        prop_assert_eq!(m.utility(&LanguageClass::empty(&u)).unwrap(), 0.0);
        let ux = m.utility(&x).unwrap();
        let uy = m.utility(&y).unwrap();
        let uxy = m.utility(&x.union(&y)).unwrap();
        prop_assert!((uxy - (ux + uy)).abs() < 1e-9);
        if !y.is_empty() {
            prop_assert!(ux < uxy);
        }
        prop_assert_eq!(ux == 0.0, x.is_empty());
    }

    #[test]
    fn replicator_stays_on_simplex(raw in proptest::collection::vec(0.0f64..1.0, 3), payoffs in proptest::collection::vec(-20.0f64..20.0, 3)) {
        prop_assume!(raw.iter().sum::<f64>() > 1e-3);
        let total: f64 = raw.iter().sum();
        let shares: Vec<f64> = raw.iter().map(|x| x / total).collect();
        let (p, q, r) = (payoffs[0], payoffs[1], payoffs[2]);
        let entries = vec![vec![0.0, p, q], vec![-p, 0.0, r], vec![-q, -r, 0.0]];
        let names: Vec<String> = ["x", "y", "z"].map(String::from).to_vec();
        let mx = tapelearn::game::PayoffMatrix::new(names.clone(), entries).unwrap();
        let pop = Population::new(names, shares).unwrap();
        for state in replicate(&mx, &pop, 100).unwrap() {
            prop_assert!((state.shares().iter().sum::<f64>() - 1.0).abs() < 1e-9);
            prop_assert!(state.shares().iter().all(|&s| s >= 0.0));
        }
    }

    #[test]
    fn strict_nash_share_grows(start in 0.001f64..0.999, gap in 0.5f64..30.0) {
        let names = vec!["top".to_string(), "low".to_string()];
        let mx = tapelearn::game::PayoffMatrix::new(names.clone(), vec![vec![0.0, gap], vec![-gap, 0.0]]).unwrap();
        prop_assert_eq!(ess_verdict(&mx, 0).unwrap(), EssVerdict::StrictNash);
        let traj = replicate(&mx, &Population::new(names, vec![start, 1.0 - start]).unwrap(), 30).unwrap();
        for w in traj.windows(2) {
            prop_assert!(w[1].shares()[0] > w[0].shares()[0] || w[1].shares()[0] == 1.0);
        }
    }
}

#[test]
fn superset_strategy_is_strict_nash_on_random_sets() {
    let u = universe(3);
    let o = Oracle::new(GUARD);
    let m = UtilityMeasure::counting(&u);
    let mut checked = 0;
    for seed in 0..60 {
        let tables = definite_set(seed, &u);
        let par = LearnerSpec::parallel("Par", tables.clone(), GUARD).unwrap();
        let mut strategies = vec![par];
        let mut order = tables.clone();
        for k in 0..tables.len() {
            order.rotate_left(1);
            strategies.push(LearnerSpec::sequential(format!("Seq{k}"), order.clone(), GUARD).unwrap());
        }
        if tapelearn::game::superset_implies_ess(&strategies, 0, &u, &m, &o).unwrap() {
            checked += 1;
            let mx = payoff_matrix(&strategies, &u, &m, &o).unwrap();
            assert_eq!(ess_verdict(&mx, 0).unwrap(), EssVerdict::StrictNash);
        }
    }
    assert!(checked > 0, "no random set exercised the hypothesis");
}

/// Each table hangs on strings the other accepts, so no dispatch order is
/// complete and there is nothing a reordering could fix. Only the oracle,
/// looking from outside the learner, can see which pairs hang.
#[test]
fn mutual_hangs_defeat_every_order() {
    let u = universe(3);
    let o = Oracle::new(GUARD);
    let tables = vec![Arc::new(r_a_hangs_on_b()), Arc::new(r_b())];
    let union = o.union_class(&tables, &u).unwrap();
    assert_eq!(union.len(), 14);
    for order in [vec![0, 1], vec![1, 0]] {
        let ordered = order.iter().map(|&i| tables[i].clone()).collect();
        let seq = LearnerSpec::sequential("Seq", ordered, GUARD).unwrap();
        let class = learner_class(&seq, &u, &o).unwrap();
        assert!(class.is_proper_subset(&union));
        assert_eq!(class.len(), 7);
    }
    assert!(o.sequential_class(&tables, &u).unwrap().is_empty());

    let plan = build_hybrid(&tables, &u, &o).unwrap();
    assert_eq!(plan.lanes().len(), 2);

    let m = UtilityMeasure::counting(&u);
    let strategies = vec![
        LearnerSpec::parallel("Par", tables.clone(), GUARD).unwrap(),
        LearnerSpec::sequential("Seq01", tables.clone(), GUARD).unwrap(),
        LearnerSpec::sequential("Seq10", vec![tables[1].clone(), tables[0].clone()], GUARD).unwrap(),
    ];
    let mx = payoff_matrix(&strategies, &u, &m, &o).unwrap();
    assert_eq!(ess_verdict(&mx, 0).unwrap(), EssVerdict::StrictNash);
    assert_eq!(ess_verdict(&mx, 1).unwrap(), EssVerdict::NotEss);
}

#[test]
fn fixture_orders_and_the_order_free_core() {
    let u = universe(3);
    let o = Oracle::new(GUARD);
    let core = o.sequential_class(&[r_a(), r_b(), r_eps()], &u).unwrap();
    let tables = [r_a(), r_b(), r_eps()].map(Arc::new);
    let orders = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    for order in orders {
        let seq = LearnerSpec::sequential("Seq", order.iter().map(|&i| tables[i].clone()).collect(), GUARD).unwrap();
        assert!(core.is_subset(&learner_class(&seq, &u, &o).unwrap()));
    }
}
