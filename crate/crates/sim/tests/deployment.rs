use std::collections::BTreeSet;

use brasp_core::crypto::ShareIndex;
use brasp_core::protocol::RecoveryMode;
use brasp_core::spatial::HilbertValue;
use brasp_sim::eval::{adversary_linkage, forward_scan, logical_bitmaps, pbrq_oracle};
use brasp_sim::eval::linkage::Verdict;
use brasp_sim::fixtures::{sample_grid, sample_objects, sample_query};
use brasp_sim::{ActorId, Cadence, Deployment, Options, SimError};

fn sample(seed: u64, cadence: Cadence) -> Deployment {
    let opts = Options::new(sample_grid(), 512, seed).with_cadence(cadence);
    let mut d = Deployment::new(opts).unwrap();
    d.ingest(sample_objects().unwrap()).unwrap();
    d.build().unwrap();
    d
}

#[test]
fn sample_query_returns_only_object_four() {
    let mut d = sample(1, Cadence::AfterSearch);
    let q = sample_query().unwrap();
    let rs = d.search(&q).unwrap();
    assert_eq!(rs.ids, BTreeSet::from([4]));
    assert_eq!(rs.objects.len(), 1);
    assert_eq!(rs.objects[0], sample_objects().unwrap()[4]);
    assert_eq!(pbrq_oracle(d.truth(), &q), rs.ids);
    d.check_key_containment().unwrap();
    d.transcript().check_ordering().unwrap();
}

#[test]
fn same_seed_same_transcript() {
    let run = |seed| {
        let mut d = sample(seed, Cadence::AfterSearch);
        d.search(&sample_query().unwrap()).unwrap();
        d.insert(HilbertValue(7), ["w4", "w6"]).unwrap();
        d.transcript().clone()
    };
    assert_eq!(run(3), run(3));
    assert_ne!(run(3), run(4));
}

#[test]
fn shuffles_preserve_logical_bitmaps() {
    let mut d = sample(2, Cadence::Manual);
    let before = logical_bitmaps(&d).unwrap();
    for _ in 0..3 {
        d.shuffle().unwrap();
        assert_eq!(logical_bitmaps(&d).unwrap(), before);
    }
    assert_eq!(d.epoch(), 3);
}

#[test]
fn inserted_object_is_found_next_query() {
    let mut d = sample(5, Cadence::AfterSearch);
    let q = sample_query().unwrap();
    d.search(&q).unwrap();
    let id = d.insert(HilbertValue(50), ["w4", "w6", "fresh"]).unwrap();
    assert_eq!(id, 5);
    assert_eq!(d.search(&q).unwrap().ids, BTreeSet::from([4, 5]));
    let fresh = brasp_core::protocol::BooleanRangeQuery::new(
        brasp_core::spatial::SpatialRange::new(6, vec![(0, 63)]).unwrap(),
        ["fresh"],
    )
    .unwrap();
    assert_eq!(d.search(&fresh).unwrap().ids, BTreeSet::from([5]));
    for r in forward_scan(d.transcript(), d.config()).unwrap() {
        assert_eq!(r.links, 0, "{r:?}");
    }
    d.check_key_containment().unwrap();
}

#[test]
fn literal_mode_never_reports_a_false_match() {
    let opts = Options::new(sample_grid(), 512, 6).with_mode(RecoveryMode::Literal);
    let mut d = Deployment::new(opts).unwrap();
    d.ingest(sample_objects().unwrap()).unwrap();
    d.build().unwrap();
    // a match is seen only when all its bits fall in one share
    for _ in 0..4 {
        let q = sample_query().unwrap();
        let rs = d.search(&q).unwrap();
        assert!(rs.ids.is_subset(&pbrq_oracle(d.truth(), &q)));
    }
}

#[test]
fn repeated_queries_link_only_without_shuffles() {
    let q = sample_query().unwrap();
    let mut off = sample(7, Cadence::Manual);
    let mut on = sample(7, Cadence::AfterSearch);
    for _ in 0..3 {
        off.search(&q).unwrap();
        on.search(&q).unwrap();
    }
    for (d, linkable) in [(&off, true), (&on, false)] {
        let r = adversary_linkage(d.transcript(), ActorId::Cs1, d.config(), Some(d.history()), None).unwrap();
        let t = r.strategy("trapdoor_equality").unwrap();
        assert_eq!(t.trials, 3);
        assert_eq!(t.rate, if linkable { 1.0 } else { 0.0 });
        assert_eq!(r.verdict == Verdict::Linkable, linkable);
    }
}

#[test]
fn operations_out_of_order_are_rejected() {
    let opts = Options::new(sample_grid(), 512, 8);
    let mut d = Deployment::new(opts).unwrap();
    assert!(matches!(d.shuffle(), Err(SimError::Order(_))));
    assert!(matches!(d.query(&sample_query().unwrap()), Err(SimError::Order(_))));
    d.ingest(sample_objects().unwrap()).unwrap();
    d.build().unwrap();
    d.query(&sample_query().unwrap()).unwrap();
    assert!(matches!(d.shuffle(), Err(SimError::Order(_))));
    d.redistribute().unwrap();
    assert!(d.redistribute().is_err());
}

#[test]
fn servers_agree_on_epoch_and_size() {
    let mut d = sample(9, Cadence::AfterSearch);
    d.search(&sample_query().unwrap()).unwrap();
    d.insert(HilbertValue(1), ["w1"]).unwrap();
    let (a, b) = (d.server(ShareIndex::One), d.server(ShareIndex::Two));
    assert_eq!(a.epoch(), d.epoch());
    assert_eq!(b.epoch(), d.epoch());
    assert_eq!(a.object_count(), 6);
    assert_eq!(b.object_count(), 6);
    assert_eq!(a.indexes().unwrap().prefix.n, 6);
}
