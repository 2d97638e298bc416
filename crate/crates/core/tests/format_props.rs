mod common;

use std::collections::BTreeMap;

use beliefgraph_core::format::{
    from_json, parse_bgl, parse_json, render_bgl, to_json, to_json_pretty,
};
use beliefgraph_core::{BeliefNode, BeliefSystem};
use common::*;
use proptest::prelude::*;

/// `arb_system` with arbitrary node text and metadata.
fn arb_rich_system() -> impl Strategy<Value = BeliefSystem> {
    (
        arb_system(8, 0.3),
        prop::collection::vec(any::<String>(), 8),
        prop::collection::btree_map("[a-z_]{1,8}", any::<String>(), 0..4),
    )
        .prop_map(|(sys, texts, metadata)| {
            let nodes: Vec<BeliefNode> = sys
                .nodes()
                .iter()
                .zip(texts)
                .map(|(n, t)| BeliefNode {
                    content: t,
                    ..n.clone()
                })
                .collect();
            BeliefSystem::build(nodes, sys.edges().to_vec(), metadata).unwrap()
        })
}

fn without_metadata(sys: &BeliefSystem) -> BeliefSystem {
    BeliefSystem::build(sys.nodes().to_vec(), sys.edges().to_vec(), BTreeMap::new()).unwrap()
}

proptest! {
    #[test]
    fn json_round_trip(sys in arb_rich_system()) {
        let text = to_json(&sys);
        prop_assert_eq!(&from_json(&text).unwrap(), &sys);
        prop_assert_eq!(&from_json(&to_json_pretty(&sys)).unwrap(), &sys);
        let report = parse_json(&text).unwrap();
        prop_assert!(report.warnings.is_empty());
    }

    #[test]
    fn json_is_byte_deterministic(sys in arb_rich_system()) {
        let reordered = BeliefSystem::build(
            sys.nodes().iter().rev().cloned().collect(),
            sys.edges().iter().rev().cloned().collect(),
            sys.metadata().clone(),
        ).unwrap();
        prop_assert_eq!(to_json(&sys), to_json(&reordered));
        prop_assert_eq!(to_json(&sys), to_json(&from_json(&to_json(&sys)).unwrap()));
    }

    #[test]
    fn bgl_round_trip(sys in arb_rich_system()) {
        let text = render_bgl(&sys).unwrap();
        let report = parse_bgl(&text).unwrap();
        prop_assert!(report.warnings.is_empty());
        // metadata only survives as comments
        prop_assert_eq!(&report.system, &without_metadata(&sys));
        prop_assert_eq!(
            render_bgl(&report.system).unwrap(),
            render_bgl(&without_metadata(&sys)).unwrap()
        );
    }

    #[test]
    fn bgl_parser_never_panics(text in "[a-z{}\\[\\]:,=\" ->|~0-9.\n]{0,60}") {
        let _ = parse_bgl(&text);
    }

    #[test]
    fn json_parser_never_panics(text in any::<String>()) {
        let _ = from_json(&text);
    }
}
