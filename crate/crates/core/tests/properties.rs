use proptest::prelude::*;

use delphic::equivalence::{RandomInstanceParams, Sampler};
use delphic::fixtures;
use delphic::formula::{parse_formula, Formula, Vocabulary};
use delphic::kripke::{bisimilar_k, EpistemicStateK};
use delphic::possibility::{decorate_state, EventualityStore, UpdateOptions};

fn sampler(seed: u64) -> Sampler {
    Sampler::new(
        RandomInstanceParams {
            seed,
            ..Default::default()
        },
        seed,
    )
}

fn vocab(atoms: usize, agents: usize) -> Vocabulary {
    let mut v = Vocabulary::new();
    for p in 0..atoms {
        v.add_atom(&format!("p{p}")).unwrap();
    }
    for i in 0..agents {
        v.add_agent(&format!("ag{i}")).unwrap();
    }
    v
}

struct Instance {
    atoms: usize,
    agents: usize,
    state: EpistemicStateK,
    formula: Formula,
}

fn instance(seed: u64) -> Instance {
    let mut smp = sampler(seed);
    let (atoms, agents) = smp.shape();
    let state = smp.state(atoms, agents);
    let formula = smp.formula(atoms, agents, 3);
    Instance {
        atoms,
        agents,
        state,
        formula,
    }
}

fn variants(s: &EpistemicStateK) -> Vec<EpistemicStateK> {
    let n = s.model().num_worlds() as u32;
    let rotate: Vec<u32> = (0..n).map(|w| (w + 1) % n).collect();
    vec![
        fixtures::doubled(s),
        fixtures::permuted(s, &rotate),
        s.contract(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn printed_formulas_parse_back(seed in any::<u64>()) {
        let x = instance(seed);
        let v = vocab(x.atoms, x.agents);
        let text = x.formula.render(&v);
        prop_assert_eq!(parse_formula(&text, &v).unwrap(), x.formula);
    }

    #[test]
    fn normalization_is_idempotent_and_sound(seed in any::<u64>()) {
        let x = instance(seed);
        let n = x.formula.normalize();
        prop_assert!(n.is_normal());
        prop_assert_eq!(n.normalize(), n.clone());
        prop_assert_eq!(x.state.eval(&n), x.state.eval(&x.formula));
    }

    #[test]
    fn truth_is_bisimulation_invariant(seed in any::<u64>()) {
        let x = instance(seed);
        let expected = x.state.eval(&x.formula);
        for s in variants(&x.state) {
            prop_assert!(bisimilar_k(&x.state, &s).unwrap().is_some());
            prop_assert_eq!(s.eval(&x.formula), expected);
            prop_assert_eq!(s.canonical_key(), x.state.canonical_key());
        }
    }

    #[test]
    fn truth_agrees_with_decoration(seed in any::<u64>()) {
        let x = instance(seed);
        let (store, spectrum) = decorate_state(&x.state);
        prop_assert_eq!(store.eval_spectrum(&spectrum, &x.formula), x.state.eval(&x.formula));
        prop_assert!(bisimilar_k(&store.picture(&spectrum), &x.state).unwrap().is_some());
    }

    #[test]
    fn contraction_is_minimal(seed in any::<u64>()) {
        let x = instance(seed);
        let c = x.state.contract();
        prop_assert_eq!(c.contract().model().num_worlds(), c.model().num_worlds());
        let d = fixtures::doubled(&x.state).contract();
        prop_assert_eq!(d.model().num_worlds(), c.model().num_worlds());
        let (mut store, spectrum) = decorate_state(&x.state);
        let pc = store.contract(&spectrum, 1);
        prop_assert_eq!(store.count_nodes(&pc).0, c.model().num_worlds());
        prop_assert_eq!(store.canonical_key(&pc), store.canonical_key(&spectrum));
    }

    #[test]
    fn updates_agree_across_semantics(seed in any::<u64>()) {
        let mut smp = sampler(seed);
        let (atoms, agents) = smp.shape();
        let s = smp.state(atoms, agents);
        let a = smp.applicable_action(&s);
        let product = s.product_update(&a).unwrap();
        let (mut store, spectrum) = decorate_state(&s);
        let mut evs = EventualityStore::new(agents);
        let e = evs.decorate_action(&a);
        let next = store.union_update(&evs, &spectrum, &e, 1, UpdateOptions::default()).unwrap();
        prop_assert!(bisimilar_k(&store.picture(&next), &product).unwrap().is_some());
        let f = smp.formula(atoms, agents, 2);
        prop_assert_eq!(store.eval_spectrum(&next, &f), product.eval(&f));
    }

    /// A repeated update at the same step returns the very same nodes, and
    /// turning memoization off changes ids but not the state.
    #[test]
    fn memoized_updates_are_shared(seed in any::<u64>()) {
        let mut smp = sampler(seed);
        let (atoms, agents) = smp.shape();
        let s = smp.state(atoms, agents);
        let a = smp.applicable_action(&s);
        let (mut store, spectrum) = decorate_state(&s);
        let mut evs = EventualityStore::new(agents);
        let e = evs.decorate_action(&a);
        let first = store.union_update(&evs, &spectrum, &e, 1, UpdateOptions::default()).unwrap();
        let size = store.len();
        let again = store.union_update(&evs, &spectrum, &e, 1, UpdateOptions::default()).unwrap();
        prop_assert_eq!(&again, &first);
        prop_assert_eq!(store.len(), size);
        let plain = UpdateOptions { reuse_idle: true, memoize: false };
        let fresh = store.union_update(&evs, &spectrum, &e, 1, plain).unwrap();
        prop_assert_eq!(store.canonical_key(&fresh), store.canonical_key(&first));
    }
}
