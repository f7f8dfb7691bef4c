use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::flows::FlowMatrix;
use crate::types::Region;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EdgeStyle {
    /// The region's top import source and top export destination coincide.
    Solid,
    Dotted,
}

impl EdgeStyle {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeStyle::Solid => "solid",
            EdgeStyle::Dotted => "dotted",
        }
    }
}

/// Directed for dotted edges (knowledge moves `from` -> `to`); solid edges are
/// bidirectional and stored with `from < to`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MaxFlowEdge {
    pub style: EdgeStyle,
    pub from: Region,
    pub to: Region,
    /// An argmax behind this edge was tied and resolved by region name.
    pub tied: bool,
}

/// Top off-diagonal partners of one region.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowPeak {
    pub region: Region,
    pub top_export: Option<Region>,
    pub export_tied: bool,
    pub top_import: Option<Region>,
    pub import_tied: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaxFlowReport {
    pub peaks: Vec<FlowPeak>,
    pub edges: Vec<MaxFlowEdge>,
    /// Regions with an all-zero off-diagonal row and column.
    pub omitted: Vec<Region>,
}

/// Largest value over `candidates`, smallest region name on ties.
fn argmax(regions: &[Region], candidates: impl Iterator<Item = (usize, u64)>) -> Option<(usize, bool)> {
    let mut best: Option<(usize, u64)> = None;
    let mut tied = false;
    for (i, v) in candidates {
        match best {
            None => best = Some((i, v)),
            Some((_, bv)) if v > bv => {
                best = Some((i, v));
                tied = false;
            }
            Some((b, bv)) if v == bv => {
                tied = true;
                if regions[i] < regions[b] {
                    best = Some((i, v));
                }
            }
            _ => {}
        }
    }
    best.filter(|&(_, v)| v > 0).map(|(i, _)| (i, tied))
}

/// For every region, its top export destination and top import source
/// (intra-regional flows ignored), and the graph edges they induce.
pub fn max_flow_edges(matrix: &FlowMatrix) -> MaxFlowReport {
    let regions = matrix.regions();
    let n = regions.len();
    let mut report = MaxFlowReport::default();
    let mut solid = BTreeSet::new();
    let mut dotted = BTreeSet::new();
    for a in 0..n {
        let export = argmax(regions, (0..n).filter(|&b| b != a).map(|b| (b, matrix.get(a, b))));
        let import = argmax(regions, (0..n).filter(|&b| b != a).map(|b| (b, matrix.get(b, a))));
        if export.is_none() && import.is_none() {
            report.omitted.push(regions[a].clone());
            continue;
        }
        report.peaks.push(FlowPeak {
            region: regions[a].clone(),
            top_export: export.map(|(b, _)| regions[b].clone()),
            export_tied: export.is_some_and(|(_, t)| t),
            top_import: import.map(|(b, _)| regions[b].clone()),
            import_tied: import.is_some_and(|(_, t)| t),
        });
        match (export, import) {
            (Some((e, et)), Some((i, it))) if e == i => {
                let (lo, hi) = if regions[a] < regions[e] { (a, e) } else { (e, a) };
                solid.insert((regions[lo].clone(), regions[hi].clone(), et || it));
            }
            _ => {
                if let Some((e, t)) = export {
                    dotted.insert((regions[a].clone(), regions[e].clone(), t));
                }
                if let Some((i, t)) = import {
                    dotted.insert((regions[i].clone(), regions[a].clone(), t));
                }
            }
        }
    }
    let solid_pairs: BTreeSet<(Region, Region)> =
        solid.iter().map(|(f, t, _)| (f.clone(), t.clone())).collect();
    let mut edges: BTreeSet<MaxFlowEdge> = BTreeSet::new();
    for (from, to, tied) in solid {
        edges.insert(MaxFlowEdge { style: EdgeStyle::Solid, from, to, tied });
    }
    for (from, to, tied) in dotted {
        let pair = if from < to { (from.clone(), to.clone()) } else { (to.clone(), from.clone()) };
        if !solid_pairs.contains(&pair) {
            edges.insert(MaxFlowEdge { style: EdgeStyle::Dotted, from, to, tied });
        }
    }
    // a tied and an untied copy of the same edge collapse to the tied one
    let mut out: Vec<MaxFlowEdge> = Vec::new();
    for e in edges {
        match out.last_mut() {
            Some(last) if last.style == e.style && last.from == e.from && last.to == e.to => {
                last.tied |= e.tied;
            }
            _ => out.push(e),
        }
    }
    report.edges = out;
    report
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Graphviz description of the edges.
pub fn to_dot(report: &MaxFlowReport) -> String {
    let mut s = String::from("digraph knowledge_flows {\n");
    for p in &report.peaks {
        let _ = writeln!(s, "  {};", quote(p.region.as_str()));
    }
    for e in &report.edges {
        let mut attrs = format!("style={}", e.style.as_str());
        if e.style == EdgeStyle::Solid {
            attrs.push_str(", dir=both");
        }
        if e.tied {
            attrs.push_str(", label=\"tie\"");
        }
        let _ = writeln!(
            s,
            "  {} -> {} [{}];",
            quote(e.from.as_str()),
            quote(e.to.as_str()),
            attrs
        );
    }
    s.push_str("}\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(names: &[&str], rows: &[Vec<u64>]) -> FlowMatrix {
        let rs: Vec<Region> = names.iter().map(|&n| Region::new(n)).collect();
        FlowMatrix::from_rows(&rs, rows).unwrap()
    }

    #[test]
    fn solid_when_partner_matches() {
        let r = max_flow_edges(&m(&["A", "B", "C"], &[vec![50, 9, 1], vec![8, 50, 1], vec![2, 3, 50]]));
        assert!(r.edges.contains(&MaxFlowEdge {
            style: EdgeStyle::Solid,
            from: "A".into(),
            to: "B".into(),
            tied: false
        }));
    }

    #[test]
    fn dotted_when_partners_differ() {
        // a cycle: every region exports to one neighbour and imports from the other
        let r = max_flow_edges(&m(&["A", "B", "C"], &[vec![0, 9, 1], vec![0, 0, 5], vec![7, 0, 0]]));
        let a = &r.peaks[0];
        assert_eq!(a.top_export.as_ref().unwrap().as_str(), "B");
        assert_eq!(a.top_import.as_ref().unwrap().as_str(), "C");
        let dotted: Vec<(&str, &str)> = r
            .edges
            .iter()
            .filter(|e| e.style == EdgeStyle::Dotted)
            .map(|e| (e.from.as_str(), e.to.as_str()))
            .collect();
        assert!(dotted.contains(&("A", "B")));
        assert!(dotted.contains(&("C", "A")));
        assert!(dotted.contains(&("B", "C")));
        assert!(r.edges.iter().all(|e| e.style == EdgeStyle::Dotted));
    }

    #[test]
    fn ties_flagged_and_broken_by_name() {
        let r = max_flow_edges(&m(&["A", "B", "C"], &[vec![0, 4, 4], vec![4, 0, 0], vec![4, 0, 0]]));
        let a = &r.peaks[0];
        assert_eq!(a.top_export.as_ref().unwrap().as_str(), "B");
        assert!(a.export_tied && a.import_tied);
    }

    #[test]
    fn degenerate_region_omitted() {
        let r = max_flow_edges(&m(&["A", "B", "Z"], &[vec![0, 1, 0], vec![1, 0, 0], vec![0, 0, 9]]));
        assert_eq!(r.omitted, vec![Region::new("Z")]);
        assert_eq!(r.peaks.len(), 2);
    }

    #[test]
    fn dot_output() {
        let r = max_flow_edges(&m(&["A", "B"], &[vec![0, 1], vec![1, 0]]));
        let dot = to_dot(&r);
        assert!(dot.contains("\"A\" -> \"B\" [style=solid, dir=both];"));
    }
}
