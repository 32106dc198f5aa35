//! Batch comparison: group many graphs by canonical code.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::canonical::{canonical_code, CanonError, CanonicalCode};
use crate::graph::FlowGraph;
use crate::recognizer::Verdict;

/// One input of a batch run.
#[derive(Debug, Clone)]
pub enum BatchItem {
    Graph(FlowGraph),
    /// Input that was rejected before a graph could be built.
    Rejected(Verdict),
    /// Input that could not be read or parsed.
    Unreadable(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReportEntry {
    pub name: String,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub contractions: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub code: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Cluster {
    /// The shared code line, or the diagnostic of an unrecognized graph.
    pub key: String,
    pub members: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairMapping {
    pub left: String,
    pub right: String,
    pub pairs: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SimilarityReport {
    pub entries: Vec<ReportEntry>,
    pub clusters: Vec<Cluster>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub mappings: Vec<PairMapping>,
}

impl SimilarityReport {
    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report serializes");
        out.push('\n');
        out
    }
}

enum Analysis {
    Coded(FlowGraph, CanonicalCode),
    Failed { status: String, diagnostic: String },
}

fn analyze(item: BatchItem) -> Analysis {
    match item {
        BatchItem::Graph(g) => match canonical_code(&g) {
            Ok(code) => Analysis::Coded(g, code),
            Err(CanonError::NotDijkstra(verdict)) => Analysis::Failed {
                status: verdict.status.to_string(),
                diagnostic: verdict.to_string(),
            },
            Err(other) => Analysis::Failed {
                status: "ERROR".into(),
                diagnostic: other.to_string(),
            },
        },
        BatchItem::Rejected(verdict) => Analysis::Failed {
            status: verdict.status.to_string(),
            diagnostic: verdict.to_string(),
        },
        BatchItem::Unreadable(message) => Analysis::Failed {
            status: "INPUT-ERROR".into(),
            diagnostic: message,
        },
    }
}

/// Codes every item (in parallel), clusters names with token-identical codes
/// and, if asked, adds a vertex mapping from the first member of each
/// multi-member cluster to every other member. Output order does not depend
/// on input order.
pub fn similarity_report(items: Vec<(String, BatchItem)>, with_mappings: bool) -> SimilarityReport {
    let mut analyzed: Vec<(String, Analysis)> = items
        .into_par_iter()
        .map(|(name, item)| (name, analyze(item)))
        .collect();
    analyzed.sort_by(|a, b| a.0.cmp(&b.0));

    let mut entries = Vec::with_capacity(analyzed.len());
    let mut by_code: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    let mut clusters = Vec::new();
    for (i, (name, analysis)) in analyzed.iter().enumerate() {
        match analysis {
            Analysis::Coded(_, code) => {
                let line = code.to_string();
                entries.push(ReportEntry {
                    name: name.clone(),
                    status: "DIJKSTRA".into(),
                    contractions: Some(code.contractions()),
                    code: Some(line.clone()),
                    diagnostic: None,
                });
                by_code.entry(line).or_default().push(i);
            }
            Analysis::Failed { status, diagnostic } => {
                entries.push(ReportEntry {
                    name: name.clone(),
                    status: status.clone(),
                    contractions: None,
                    code: None,
                    diagnostic: Some(diagnostic.clone()),
                });
                clusters.push(Cluster {
                    key: diagnostic.clone(),
                    members: vec![name.clone()],
                });
            }
        }
    }

    let mut mappings = Vec::new();
    for (line, members) in &by_code {
        clusters.push(Cluster {
            key: line.clone(),
            members: members.iter().map(|&i| analyzed[i].0.clone()).collect(),
        });
        if !with_mappings {
            continue;
        }
        let Analysis::Coded(g1, c1) = &analyzed[members[0]].1 else {
            unreachable!()
        };
        for &j in &members[1..] {
            let Analysis::Coded(g2, c2) = &analyzed[j].1 else {
                unreachable!()
            };
            let mapping = c1
                .mapping_to(g1, c2, g2)
                .expect("equal codes yield a valid mapping")
                .expect("codes are equal");
            mappings.push(PairMapping {
                left: analyzed[members[0]].0.clone(),
                right: analyzed[j].0.clone(),
                pairs: mapping
                    .pairs()
                    .iter()
                    .map(|&(a, b)| (g1.name(a).to_string(), g2.name(b).to_string()))
                    .collect(),
            });
        }
    }
    clusters.sort_by(|a, b| (&a.key, &a.members).cmp(&(&b.key, &b.members)));
    SimilarityReport {
        entries,
        clusters,
        mappings,
    }
}
