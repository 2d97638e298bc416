mod common;

use std::collections::BTreeSet;

use beliefgraph_core::diagnostics::{ConfSource, DivergenceClass};
use beliefgraph_core::{
    audit_confidence_consistency, divergence_map, graph_report, graph_report_with, undermined_set,
    ConsistencyViolation, EdgeKind, GraphReport, NodeId, PropagationConfig, ReportOptions,
    Thresholds,
};
use common::*;
use proptest::prelude::*;

fn arb_thresholds() -> impl Strategy<Value = Thresholds> {
    (0.0..1.0f64, 0.0..1.0f64, 0.1..3.0f64).prop_filter_map("ordered", |(a, b, s)| {
        (a < b).then_some(Thresholds {
            tau_low: a,
            tau_high: b,
            sigma_strong: s,
        })
    })
}

fn with_class(
    entries: &[beliefgraph_core::DivergenceEntry],
    class: DivergenceClass,
) -> BTreeSet<NodeId> {
    entries
        .iter()
        .filter(|e| e.class == class)
        .map(|e| e.node.clone())
        .collect()
}

proptest! {
    #[test]
    fn divergence_covers_every_node_once(sys in arb_system(10, 0.3), th in arb_thresholds()) {
        let map = divergence_map(&sys, &th, ConfSource::Assigned).unwrap();
        let ids: BTreeSet<NodeId> = map.iter().map(|e| e.node.clone()).collect();
        prop_assert_eq!(map.len(), sys.node_count());
        prop_assert_eq!(ids.len(), sys.node_count());
        for w in map.windows(2) {
            let (a, b) = (w[0].delta.abs(), w[1].delta.abs());
            prop_assert!(a > b || (a == b && w[0].node < w[1].node));
        }
        for e in &map {
            let n = sys.node(&e.node).unwrap();
            prop_assert_eq!(e.delta, n.conf - n.cred);
            prop_assert_eq!(e.class, DivergenceClass::classify(n.cred, n.conf, &th));
        }
    }

    #[test]
    fn raising_tau_high_shrinks_divergence(
        sys in arb_system(10, 0.2),
        th in arb_thresholds(),
        lift in 0.0..1.0f64,
    ) {
        let raised = Thresholds { tau_high: th.tau_high + (1.0 - th.tau_high) * lift, ..th };
        let before = divergence_map(&sys, &th, ConfSource::Assigned).unwrap();
        let after = divergence_map(&sys, &raised, ConfSource::Assigned).unwrap();
        let cu = |m| with_class(m, DivergenceClass::CredibleUnsupported);
        let dr = |m| with_class(m, DivergenceClass::DubiousReinforced);
        prop_assert!(cu(&after).is_subset(&cu(&before)));
        prop_assert!(dr(&after).is_subset(&dr(&before)));
        // a DubiousReinforced entry survives exactly when its conf clears the new bar
        for e in before.iter().filter(|e| e.class == DivergenceClass::DubiousReinforced) {
            prop_assert_eq!(dr(&after).contains(&e.node), e.conf >= raised.tau_high);
        }
    }

    #[test]
    fn audit_matches_direct_evaluation(sys in arb_system(10, 0.3), th in arb_thresholds()) {
        let undermined = undermined_set(&sys);
        let mut expected = Vec::new();
        for n in sys.nodes() {
            if n.conf >= th.tau_high && undermined.contains(&n.id) {
                expected.push(ConsistencyViolation::UnderminedHighConf { node: n.id.clone(), conf: n.conf });
            }
            if n.conf <= th.tau_low {
                let mass: f64 = sys
                    .edges()
                    .iter()
                    .filter(|e| e.kind == EdgeKind::Support && e.target == n.id)
                    .filter_map(|e| {
                        let s = sys.node(&e.source).unwrap();
                        (s.conf >= th.tau_high && !undermined.contains(&s.id)).then_some(e.weight * s.conf)
                    })
                    .sum();
                if mass >= th.sigma_strong {
                    expected.push(ConsistencyViolation::StarvedLowConf {
                        node: n.id.clone(),
                        conf: n.conf,
                        support_mass: mass,
                    });
                }
            }
        }
        prop_assert_eq!(audit_confidence_consistency(&sys, &th).unwrap(), expected);
    }

    #[test]
    fn report_is_deterministic_and_serializable(sys in arb_system(9, 0.3)) {
        let th = Thresholds::default();
        let cfg = PropagationConfig::default();
        let a = graph_report(&sys, &th, &cfg).unwrap();
        let b = graph_report(&sys, &th, &cfg).unwrap();
        prop_assert_eq!(a.to_json(), b.to_json());
        prop_assert_eq!(a.to_text(), b.to_text());
        let back: GraphReport = serde_json::from_str(&a.to_json()).unwrap();
        prop_assert_eq!(back.to_json(), a.to_json());
        let threaded = graph_report_with(&sys, &ReportOptions { threads: 4, ..Default::default() }).unwrap();
        prop_assert_eq!(threaded.to_json(), a.to_json());
    }
}
