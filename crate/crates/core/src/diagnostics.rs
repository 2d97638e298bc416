//! Credibility/confidence diagnostics and whole-graph reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::coherence::{
    coherence_report, undermined_mask, CoherenceOptions, CoherenceReport, UnderminingPolicy,
};
use crate::error::{Error, Result};
use crate::extraction::coherent_islands;
use crate::graph::UnionFind;
use crate::model::{BeliefSystem, EdgeKind, NodeId};
use crate::propagation::{propagate_confidence, PropagationConfig, PropagationResult};

/// Cutoffs for "high", "low" and "strong".
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub tau_high: f64,
    pub tau_low: f64,
    /// Minimum support mass for "strong, consistent support".
    pub sigma_strong: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            tau_high: 0.7,
            tau_low: 0.3,
            sigma_strong: 1.0,
        }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<()> {
        let unit = 0.0..=1.0;
        if !unit.contains(&self.tau_high) || !unit.contains(&self.tau_low) {
            return Err(Error::InvalidParameter(format!(
                "tau_low and tau_high must lie in [0, 1], got {} and {}",
                self.tau_low, self.tau_high
            )));
        }
        if self.tau_low >= self.tau_high {
            return Err(Error::InvalidParameter(format!(
                "tau_low ({}) must be below tau_high ({})",
                self.tau_low, self.tau_high
            )));
        }
        if !(self.sigma_strong > 0.0 && self.sigma_strong.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sigma_strong must be a positive finite number, got {}",
                self.sigma_strong
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DivergenceClass {
    /// Trusted source, weak structural support.
    CredibleUnsupported,
    /// Dubious source, strong structural support.
    DubiousReinforced,
    Aligned,
    Indeterminate,
}

impl DivergenceClass {
    pub fn classify(cred: f64, conf: f64, th: &Thresholds) -> DivergenceClass {
        if cred >= th.tau_high && conf <= th.tau_low {
            DivergenceClass::CredibleUnsupported
        } else if cred <= th.tau_low && conf >= th.tau_high {
            DivergenceClass::DubiousReinforced
        } else if (conf - cred).abs() <= th.tau_high - th.tau_low {
            DivergenceClass::Aligned
        } else {
            DivergenceClass::Indeterminate
        }
    }

    pub fn is_divergent(self) -> bool {
        matches!(
            self,
            DivergenceClass::CredibleUnsupported | DivergenceClass::DubiousReinforced
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceEntry {
    pub node: NodeId,
    pub cred: f64,
    pub conf: f64,
    /// `conf - cred`
    pub delta: f64,
    pub class: DivergenceClass,
}

/// Where divergence analysis takes confidence from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConfSource {
    Assigned,
    Propagated(PropagationConfig),
}

pub fn divergence_map(
    sys: &BeliefSystem,
    th: &Thresholds,
    source: ConfSource,
) -> Result<Vec<DivergenceEntry>> {
    th.validate()?;
    match source {
        ConfSource::Assigned => Ok(divergence_from(sys, th, sys.nodes().iter().map(|n| n.conf))),
        ConfSource::Propagated(cfg) => {
            let prop = propagate_confidence(sys, &cfg)?;
            Ok(divergence_from(sys, th, prop.conf_out.values().copied()))
        }
    }
}

/// `conf` yields one value per node in id order.
fn divergence_from(
    sys: &BeliefSystem,
    th: &Thresholds,
    conf: impl Iterator<Item = f64>,
) -> Vec<DivergenceEntry> {
    let mut entries: Vec<DivergenceEntry> = sys
        .nodes()
        .iter()
        .zip(conf)
        .map(|(n, conf)| DivergenceEntry {
            node: n.id.clone(),
            cred: n.cred,
            conf,
            delta: conf - n.cred,
            class: DivergenceClass::classify(n.cred, conf, th),
        })
        .collect();
    entries.sort_by(|a, b| {
        b.delta
            .abs()
            .total_cmp(&a.delta.abs())
            .then_with(|| a.node.cmp(&b.node))
    });
    entries
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ConsistencyViolation {
    /// High confidence, yet undermined by an upstream contradiction.
    UnderminedHighConf { node: NodeId, conf: f64 },
    /// Low confidence, yet strongly supported by confident, un-undermined supporters.
    StarvedLowConf {
        node: NodeId,
        conf: f64,
        support_mass: f64,
    },
}

impl ConsistencyViolation {
    pub fn node(&self) -> &NodeId {
        match self {
            ConsistencyViolation::UnderminedHighConf { node, .. }
            | ConsistencyViolation::StarvedLowConf { node, .. } => node,
        }
    }
}

/// Confidence-consistency audit. An empty result means the system is
/// confidence-consistent under `th`.
pub fn audit_confidence_consistency(
    sys: &BeliefSystem,
    th: &Thresholds,
) -> Result<Vec<ConsistencyViolation>> {
    audit_with_policy(sys, th, UnderminingPolicy::SupportOnly)
}

pub fn audit_with_policy(
    sys: &BeliefSystem,
    th: &Thresholds,
    policy: UnderminingPolicy,
) -> Result<Vec<ConsistencyViolation>> {
    th.validate()?;
    let undermined = undermined_mask(sys, policy);
    Ok(audit_with(sys, th, &undermined))
}

fn audit_with(
    sys: &BeliefSystem,
    th: &Thresholds,
    undermined: &[bool],
) -> Vec<ConsistencyViolation> {
    let mut out = Vec::new();
    for (j, n) in sys.nodes().iter().enumerate() {
        if n.conf >= th.tau_high && undermined[j] {
            out.push(ConsistencyViolation::UnderminedHighConf {
                node: n.id.clone(),
                conf: n.conf,
            });
        }
        if n.conf <= th.tau_low {
            let support_mass: f64 = sys
                .in_edges(j)
                .iter()
                .filter(|&&ei| sys.edges()[ei].kind == EdgeKind::Support)
                .filter_map(|&ei| {
                    let i = sys.endpoints(ei).0;
                    let c = sys.nodes()[i].conf;
                    (c >= th.tau_high && !undermined[i]).then(|| sys.edges()[ei].weight * c)
                })
                .sum();
            if support_mass >= th.sigma_strong {
                out.push(ConsistencyViolation::StarvedLowConf {
                    node: n.id.clone(),
                    conf: n.conf,
                    support_mass,
                });
            }
        }
    }
    out
}

fn histogram(values: impl Iterator<Item = f64>) -> [usize; 10] {
    let mut bins = [0; 10];
    for v in values {
        let b = ((v * 10.0).floor() as usize).min(9);
        bins[b] += 1;
    }
    bins
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeCounts {
    pub support: usize,
    pub qualification: usize,
    pub contradiction: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub node_count: usize,
    pub edge_count: usize,
    pub edges_by_kind: EdgeCounts,
    /// Bin `k` counts scores in `[k/10, (k+1)/10)`; the last bin includes 1.0.
    pub cred_histogram: [usize; 10],
    pub conf_histogram: [usize; 10],
    /// Weakly connected components over all edges.
    pub component_count: usize,
    /// Component sizes, largest first.
    pub component_sizes: Vec<usize>,
}

pub fn summary_stats(sys: &BeliefSystem) -> SummaryStats {
    let [support, qualification, contradiction] = sys.kind_counts();
    let mut uf = UnionFind::new(sys.node_count());
    for ei in 0..sys.edge_count() {
        let (s, t) = sys.endpoints(ei);
        uf.union(s, t);
    }
    let mut component_sizes: Vec<usize> = uf.groups(|_| true).iter().map(Vec::len).collect();
    component_sizes.sort_unstable_by(|a, b| b.cmp(a));
    SummaryStats {
        node_count: sys.node_count(),
        edge_count: sys.edge_count(),
        edges_by_kind: EdgeCounts {
            support,
            qualification,
            contradiction,
        },
        cred_histogram: histogram(sys.nodes().iter().map(|n| n.cred)),
        conf_histogram: histogram(sys.nodes().iter().map(|n| n.conf)),
        component_count: component_sizes.len(),
        component_sizes,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagationSummary {
    pub iterations: usize,
    pub converged: bool,
    pub residual: f64,
    pub damping: f64,
}

impl From<&PropagationResult> for PropagationSummary {
    fn from(r: &PropagationResult) -> Self {
        PropagationSummary {
            iterations: r.iterations,
            converged: r.converged,
            residual: r.residual,
            damping: r.damping,
        }
    }
}

/// Human-readable statement of the audit rules in force.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRules {
    pub undermined_high_conf: String,
    pub starved_low_conf: String,
    pub support_mass: String,
}

impl AuditRules {
    fn describe(th: &Thresholds, policy: UnderminingPolicy) -> Self {
        let carriers = match policy {
            UnderminingPolicy::SupportOnly => "support",
            UnderminingPolicy::SupportAndQualification => "support and qualification",
        };
        AuditRules {
            undermined_high_conf: format!(
                "conf(n) >= {} and n is reachable from a contradiction target along {carriers} edges",
                th.tau_high
            ),
            starved_low_conf: format!("conf(n) <= {} and support_mass(n) >= {}", th.tau_low, th.sigma_strong),
            support_mass: format!(
                "sum of w(i,n)*conf(i) over support edges i->n with conf(i) >= {} and i not undermined",
                th.tau_high
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportOptions {
    pub thresholds: Thresholds,
    pub propagation: PropagationConfig,
    pub coherence: CoherenceOptions,
    /// Worker threads for independent sub-analyses; output is identical for any value.
    #[serde(skip)]
    pub threads: usize,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            thresholds: Thresholds::default(),
            propagation: PropagationConfig::default(),
            coherence: CoherenceOptions::default(),
            threads: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphReport {
    pub thresholds: Thresholds,
    pub propagation_config: PropagationConfig,
    pub coherence_options: CoherenceOptions,
    pub audit_rules: AuditRules,
    pub summary: SummaryStats,
    pub coherence: CoherenceReport,
    pub propagation: PropagationSummary,
    pub divergence_assigned: Vec<DivergenceEntry>,
    pub divergence_propagated: Vec<DivergenceEntry>,
    pub consistency_violations: Vec<ConsistencyViolation>,
    pub islands: Vec<Vec<NodeId>>,
}

pub fn graph_report(
    sys: &BeliefSystem,
    th: &Thresholds,
    cfg: &PropagationConfig,
) -> Result<GraphReport> {
    graph_report_with(
        sys,
        &ReportOptions {
            thresholds: *th,
            propagation: *cfg,
            ..Default::default()
        },
    )
}

pub fn graph_report_with(sys: &BeliefSystem, opts: &ReportOptions) -> Result<GraphReport> {
    let th = &opts.thresholds;
    th.validate()?;
    opts.propagation.validate()?;

    let (coherence, propagation) = if opts.threads > 1 {
        std::thread::scope(|s| {
            let coherence = s.spawn(|| coherence_report(sys, th, &opts.coherence));
            let propagation = propagate_confidence(sys, &opts.propagation);
            (
                coherence.join().expect("coherence worker panicked"),
                propagation,
            )
        })
    } else {
        (
            coherence_report(sys, th, &opts.coherence),
            propagate_confidence(sys, &opts.propagation),
        )
    };
    let coherence = coherence?;
    let propagation = propagation?;

    let undermined = undermined_mask(sys, opts.coherence.policy);
    Ok(GraphReport {
        thresholds: *th,
        propagation_config: opts.propagation,
        coherence_options: opts.coherence,
        audit_rules: AuditRules::describe(th, opts.coherence.policy),
        summary: summary_stats(sys),
        coherence,
        propagation: PropagationSummary::from(&propagation),
        divergence_assigned: divergence_from(sys, th, sys.nodes().iter().map(|n| n.conf)),
        divergence_propagated: divergence_from(sys, th, propagation.conf_out.values().copied()),
        consistency_violations: audit_with(sys, th, &undermined),
        islands: coherent_islands(sys),
    })
}

impl GraphReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Plain-text summary for terminals.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let s = &self.summary;
        let _ = writeln!(
            out,
            "{} nodes, {} edges ({} support, {} qualification, {} contradiction)",
            s.node_count,
            s.edge_count,
            s.edges_by_kind.support,
            s.edges_by_kind.qualification,
            s.edges_by_kind.contradiction
        );
        let _ = writeln!(
            out,
            "components: {} (sizes {:?})",
            s.component_count, s.component_sizes
        );
        let c = &self.coherence;
        let _ = writeln!(
            out,
            "globally coherent: {}",
            if c.globally_coherent { "yes" } else { "no" }
        );
        let _ = writeln!(out, "tension zones: {}", c.tension_zones.len());
        for zone in &c.tension_zones {
            let _ = writeln!(out, "  {}", join(zone));
        }
        if let Some(cycles) = &c.contradiction_cycles {
            let _ = writeln!(
                out,
                "contradiction cycles: {}{}",
                cycles.items.len(),
                if cycles.truncated { " (truncated)" } else { "" }
            );
        }
        if let Some(chains) = &c.contradiction_chains {
            let _ = writeln!(
                out,
                "contradiction chains: {}{}",
                chains.items.len(),
                if chains.truncated { " (truncated)" } else { "" }
            );
        }
        let _ = writeln!(out, "undermined: {}", join(&c.undermined));
        let _ = writeln!(out, "undersupported:");
        for u in &c.undersupported {
            let _ = writeln!(out, "  {} ({:?})", u.node, u.reason);
        }
        let _ = writeln!(out, "consistency violations:");
        for v in &self.consistency_violations {
            match v {
                ConsistencyViolation::UnderminedHighConf { node, conf } => {
                    let _ = writeln!(out, "  {node}: undermined with conf {conf}");
                }
                ConsistencyViolation::StarvedLowConf {
                    node,
                    conf,
                    support_mass,
                } => {
                    let _ = writeln!(
                        out,
                        "  {node}: conf {conf} despite support mass {support_mass:.3}"
                    );
                }
            }
        }
        let _ = writeln!(out, "divergent beliefs (assigned conf):");
        for e in self
            .divergence_assigned
            .iter()
            .filter(|e| e.class.is_divergent())
        {
            let _ = writeln!(
                out,
                "  {} cred={:.2} conf={:.2} {:?}",
                e.node, e.cred, e.conf, e.class
            );
        }
        let p = &self.propagation;
        let _ = writeln!(
            out,
            "propagation: {} after {} iterations (residual {:.3e}, damping {})",
            if p.converged {
                "converged"
            } else {
                "did not converge"
            },
            p.iterations,
            p.residual,
            p.damping
        );
        let _ = writeln!(out, "coherent islands: {}", self.islands.len());
        for island in &self.islands {
            let _ = writeln!(out, "  {}", join(island));
        }
        out
    }

    /// Divergence classes by node, from assigned confidence.
    pub fn classes(&self) -> BTreeMap<&NodeId, DivergenceClass> {
        self.divergence_assigned
            .iter()
            .map(|e| (&e.node, e.class))
            .collect()
    }
}

fn join(ids: &[NodeId]) -> String {
    ids.iter()
        .map(NodeId::as_str)
        .collect::<Vec<_>>()
        .join(", ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{graph, ids, scored};
    use EdgeKind::*;

    #[test]
    fn divergence_examples() {
        let th = Thresholds::default();
        assert_eq!(
            DivergenceClass::classify(0.9, 0.2, &th),
            DivergenceClass::CredibleUnsupported
        );
        assert_eq!(
            DivergenceClass::classify(0.2, 0.9, &th),
            DivergenceClass::DubiousReinforced
        );
        assert_eq!(
            DivergenceClass::classify(0.8, 0.8, &th),
            DivergenceClass::Aligned
        );
        assert_eq!(
            DivergenceClass::classify(0.9, 0.35, &th),
            DivergenceClass::Indeterminate
        );
    }

    #[test]
    fn divergence_map_sorts_by_magnitude() {
        let sys = scored(
            &[
                ("a", 0.8, 0.8),
                ("b", 0.9, 0.2),
                ("c", 0.2, 0.9),
                ("d", 0.5, 0.6),
            ],
            &[],
        );
        let m = divergence_map(&sys, &Thresholds::default(), ConfSource::Assigned).unwrap();
        let order: Vec<_> = m.iter().map(|e| e.node.as_str()).collect();
        assert_eq!(order, ["b", "c", "d", "a"]);
        assert_eq!(m[3].delta, 0.0);
        assert_eq!(m[3].class, DivergenceClass::Aligned);
    }

    #[test]
    fn propagated_divergence_uses_derived_conf() {
        let sys = scored(
            &[("s", 0.9, 0.1), ("t", 0.9, 0.9)],
            &[("s", "t", Support, 1.0)],
        );
        let m = divergence_map(
            &sys,
            &Thresholds::default(),
            ConfSource::Propagated(PropagationConfig::default()),
        )
        .unwrap();
        assert!(m
            .iter()
            .all(|e| e.class == DivergenceClass::CredibleUnsupported));
    }

    #[test]
    fn audit_flags_undermined_high_conf() {
        let sys = scored(
            &[("c", 0.5, 0.5), ("t", 0.5, 0.9)],
            &[("c", "t", Contradiction, 1.0)],
        );
        let v = audit_confidence_consistency(&sys, &Thresholds::default()).unwrap();
        assert_eq!(
            v,
            vec![ConsistencyViolation::UnderminedHighConf {
                node: ids(&["t"])[0].clone(),
                conf: 0.9
            }]
        );
    }

    #[test]
    fn audit_flags_starved_low_conf() {
        let sys = scored(
            &[("a", 0.5, 0.8), ("b", 0.5, 0.8), ("n", 0.5, 0.1)],
            &[("a", "n", Support, 1.0), ("b", "n", Support, 1.0)],
        );
        let v = audit_confidence_consistency(&sys, &Thresholds::default()).unwrap();
        assert_eq!(
            v,
            vec![ConsistencyViolation::StarvedLowConf {
                node: ids(&["n"])[0].clone(),
                conf: 0.1,
                support_mass: 1.6
            }]
        );
    }

    #[test]
    fn undermined_supporters_do_not_count_as_consistent_support() {
        let sys = scored(
            &[
                ("a", 0.5, 0.8),
                ("b", 0.5, 0.8),
                ("n", 0.5, 0.1),
                ("x", 0.5, 0.5),
            ],
            &[
                ("a", "n", Support, 1.0),
                ("b", "n", Support, 1.0),
                ("x", "b", Contradiction, 1.0),
            ],
        );
        let v = audit_confidence_consistency(&sys, &Thresholds::default()).unwrap();
        // b is now undermined and high-conf; n's mass drops to 0.8
        assert_eq!(
            v,
            vec![ConsistencyViolation::UnderminedHighConf {
                node: ids(&["b"])[0].clone(),
                conf: 0.8
            }]
        );
    }

    #[test]
    fn clean_graph_has_empty_audit() {
        let sys = graph(
            &["a", "b", "c"],
            &[("a", "b", Support), ("b", "c", Qualification)],
        );
        assert!(audit_confidence_consistency(&sys, &Thresholds::default())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn thresholds_are_validated() {
        let bad = [
            Thresholds {
                tau_high: 0.3,
                tau_low: 0.7,
                sigma_strong: 1.0,
            },
            Thresholds {
                tau_high: 1.2,
                tau_low: 0.3,
                sigma_strong: 1.0,
            },
            Thresholds {
                tau_high: 0.7,
                tau_low: 0.3,
                sigma_strong: 0.0,
            },
        ];
        for th in bad {
            assert!(th.validate().is_err());
        }
    }

    #[test]
    fn empty_report() {
        let r = graph_report(
            &BeliefSystem::empty(),
            &Thresholds::default(),
            &PropagationConfig::default(),
        )
        .unwrap();
        assert_eq!(r.summary.node_count, 0);
        assert_eq!(r.summary.component_count, 0);
        assert!(r.coherence.globally_coherent);
        assert!(r.coherence.tension_zones.is_empty());
        assert!(r.divergence_assigned.is_empty());
        assert!(r.consistency_violations.is_empty());
        assert!(r.islands.is_empty());
    }

    #[test]
    fn report_counts_components() {
        let sys = graph(
            &["a", "b", "c", "d"],
            &[("a", "b", Support), ("c", "d", Support)],
        );
        let r = graph_report(&sys, &Thresholds::default(), &PropagationConfig::default()).unwrap();
        assert_eq!(r.summary.component_count, 2);
        assert_eq!(r.summary.component_sizes, vec![2, 2]);
        assert_eq!(r.summary.cred_histogram[5], 4);
    }

    #[test]
    fn threaded_report_is_identical() {
        let sys = scored(
            &[("a", 0.9, 0.2), ("b", 0.1, 0.9), ("c", 0.5, 0.5)],
            &[
                ("a", "b", Contradiction, 1.0),
                ("b", "c", Support, 2.0),
                ("c", "a", Support, 1.0),
            ],
        );
        let one = graph_report_with(&sys, &ReportOptions::default()).unwrap();
        let four = graph_report_with(
            &sys,
            &ReportOptions {
                threads: 4,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(one.to_json(), four.to_json());
    }

    #[test]
    fn histogram_edges() {
        assert_eq!(
            histogram([0.0, 0.1, 0.3, 0.7, 0.99, 1.0].into_iter()),
            [1, 1, 0, 1, 0, 0, 0, 1, 0, 2]
        );
    }
}
