//! The coin example worked through both semantics by hand.

use delphic::fixtures;
use delphic::formula::parse_formula;
use delphic::kripke::{bisimilar_k, WorldId};
use delphic::possibility::{
    decorate_state, EvId, EventualityStore, OriginKey, PossId, UpdateOptions,
};

#[test]
fn product_update_tells_a_the_coin() {
    let fx = fixtures::coin();
    let next = fx.state.product_update(&fx.peek).unwrap();
    let m = next.model();
    assert_eq!(m.num_worlds(), 3);
    assert_eq!(next.designated().len(), 1);
    let knows = parse_formula("box(a,h)", &fx.vocab).unwrap();
    let b_knows_whether = parse_formula("box(b,or(box(a,h),box(a,neg(h))))", &fx.vocab).unwrap();
    assert!(next.eval(&knows));
    assert!(!next.eval(&b_knows_whether));
    // Before the peek nobody knows.
    assert!(!fx.state.eval(&knows));

    // Worlds are (w, e) pairs in lexicographic order of the surviving ones:
    // (w1,e1), (w1,e2), (w2,e2).
    let d = next.designated()[0];
    assert_eq!(d, WorldId(0));
    assert!(m.valuation_of(WorldId(0)).get(fx.h_atom));
    assert!(m.valuation_of(WorldId(1)).get(fx.h_atom));
    assert!(!m.valuation_of(WorldId(2)).get(fx.h_atom));
    let a_edges: Vec<_> = m
        .edges()
        .filter(|e| e.0 == fx.a)
        .map(|e| (e.1 .0, e.2 .0))
        .collect();
    assert_eq!(a_edges, [(0, 0), (1, 1), (1, 2), (2, 1), (2, 2)]);
    let b_edges: Vec<_> = m
        .edges()
        .filter(|e| e.0 == fx.b)
        .map(|e| (e.1 .0, e.2 .0))
        .collect();
    assert_eq!(b_edges, [(0, 1), (0, 2), (1, 1), (1, 2), (2, 1), (2, 2)]);
}

#[test]
fn union_update_points_back_at_the_original_nodes() {
    let fx = fixtures::coin();
    let (mut store, w) = decorate_state(&fx.state);
    let (w1, w2) = (PossId(0), PossId(1));
    assert_eq!(w.designated(), [w1]);
    assert_eq!(store.info(w1, fx.a), [w1, w2]);
    assert_eq!(store.info(w2, fx.b), [w1, w2]);

    let mut evs = EventualityStore::new(2);
    let f = evs.decorate_action(&fx.peek);
    assert_eq!(f.designated(), [EvId(0)]);
    let next = store
        .union_update(&evs, &w, &f, 1, UpdateOptions::default())
        .unwrap();
    assert_eq!(next.designated().len(), 1);
    let v3 = next.designated()[0];
    assert_eq!(store.info(v3, fx.a), [v3]);
    assert_eq!(store.info(v3, fx.b), [w1, w2]);
    assert_eq!(store.len(), 3);
    assert_eq!(
        store.node(v3).origin,
        OriginKey::Update {
            time: 1,
            parent: w1,
            event: EvId(0)
        }
    );

    let knows = parse_formula("box(a,h)", &fx.vocab).unwrap();
    assert!(store.eval_spectrum(&next, &knows));
    let product = fx.state.product_update(&fx.peek).unwrap();
    assert!(bisimilar_k(&store.picture(&next), &product)
        .unwrap()
        .is_some());
}

#[test]
fn without_reuse_the_update_copies_b_information() {
    let fx = fixtures::coin();
    let (mut store, w) = decorate_state(&fx.state);
    let mut evs = EventualityStore::new(2);
    let f = evs.decorate_action(&fx.peek);
    let plain = UpdateOptions {
        reuse_idle: false,
        memoize: false,
    };
    let next = store.union_update(&evs, &w, &f, 1, plain).unwrap();
    let v = next.designated()[0];
    assert!(store.info(v, fx.b).iter().all(|u| u.0 >= 2));
    assert_eq!(store.count_nodes(&next).0, 3);
    assert_eq!(store.len(), 5);
}
