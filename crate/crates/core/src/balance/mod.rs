//! Regional balance of knowledge flows (RBKF), maximum-flow edges and rank
//! correlation diagnostics.
//!
//! For region `k` on a flow matrix, `a` is the off-diagonal row total (gains
//! generated by k's publications and appropriated elsewhere), `b` the
//! off-diagonal column total (gains k appropriates from elsewhere), and the
//! balance is `a - b`.

mod edges;
mod rank;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::ScMap;
use crate::error::{Error, Result};
use crate::flows::{FlowMatrix, RegionSummary};
use crate::types::{Region, ScCode};

pub use edges::{max_flow_edges, to_dot, EdgeStyle, FlowPeak, MaxFlowEdge, MaxFlowReport};
pub use rank::{average_ranks, pearson, spearman};

/// Label used in place of an SC for overall rows.
pub const ALL_SC: &str = "ALL";
/// Label for the convention that sums per-SC balances (full counting).
pub const SC_SUM: &str = "SC_SUM";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RbkfEntry {
    pub region: Region,
    pub sc: Option<ScCode>,
    /// Extra-regional gains generated (a).
    pub generated: u64,
    /// Gains earned from other regions (b).
    pub earned: u64,
    pub rbkf: i64,
    pub units_per_gain: u64,
}

impl RbkfEntry {
    pub fn new(region: Region, sc: Option<ScCode>, generated: u64, earned: u64) -> Self {
        RbkfEntry {
            region,
            sc,
            generated,
            earned,
            rbkf: generated as i64 - earned as i64,
            units_per_gain: 1,
        }
    }

    pub fn is_surplus(&self) -> bool {
        self.rbkf > 0
    }

    pub fn sc_label(&self) -> &str {
        self.sc.as_ref().map_or(ALL_SC, ScCode::as_str)
    }
}

fn entry_for(matrix: &FlowMatrix, k: usize) -> RbkfEntry {
    let diag = matrix.diagonal(k);
    let mut e = RbkfEntry::new(
        matrix.regions()[k].clone(),
        matrix.sc().cloned(),
        matrix.row_total(k) - diag,
        matrix.col_total(k) - diag,
    );
    e.units_per_gain = matrix.units_per_gain();
    e
}

/// One entry per region of the matrix, in matrix order.
pub fn rbkf_overall(matrix: &FlowMatrix) -> Vec<RbkfEntry> {
    (0..matrix.len()).map(|k| entry_for(matrix, k)).collect()
}

/// Per-region sums of the per-SC balances. With full counting this differs
/// from [`rbkf_overall`] and need not sum to zero across regions.
pub fn rbkf_sc_summed(matrices: &BTreeMap<ScCode, FlowMatrix>, regions: &[Region]) -> Vec<RbkfEntry> {
    regions
        .iter()
        .map(|r| {
            let (mut a, mut b, mut units) = (0, 0, 1);
            for m in matrices.values() {
                if let Some(k) = m.index_of(r.as_str()) {
                    let e = entry_for(m, k);
                    a += e.generated;
                    b += e.earned;
                    units = e.units_per_gain;
                }
            }
            let mut e = RbkfEntry::new(r.clone(), Some(ScCode::new(SC_SUM)), a, b);
            e.units_per_gain = units;
            e
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AreaTotal {
    pub area: String,
    pub generated: u64,
    pub earned: u64,
    pub rbkf: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScBalance {
    pub region: Region,
    /// One entry per SC of the map, in SC order.
    pub entries: Vec<RbkfEntry>,
    /// Sums of member-SC entries per macro-area, in area order.
    pub area_totals: Vec<AreaTotal>,
}

impl ScBalance {
    pub fn entry(&self, sc: &str) -> Option<&RbkfEntry> {
        self.entries
            .iter()
            .find(|e| e.sc.as_ref().is_some_and(|s| s.as_str() == sc))
    }

    pub fn area(&self, area: &str) -> Option<&AreaTotal> {
        self.area_totals.iter().find(|t| t.area == area)
    }
}

/// RBKF of one region in every subject category of `scmap`.
///
/// SCs without a matrix yield a zero entry. A matrix keyed by an SC outside
/// the map is an error.
pub fn rbkf_by_sc(
    matrices: &BTreeMap<ScCode, FlowMatrix>,
    region: &str,
    scmap: &ScMap,
) -> Result<ScBalance> {
    if let Some(sc) = matrices.keys().find(|sc| !scmap.contains(sc.as_str())) {
        return Err(Error::UnknownSc(sc.to_string()));
    }
    let mut entries = Vec::with_capacity(scmap.len());
    for sc in scmap.codes() {
        let entry = match matrices.get(sc) {
            Some(m) => {
                let k = m
                    .index_of(region)
                    .ok_or_else(|| Error::UnknownRegion(region.to_owned()))?;
                let mut e = entry_for(m, k);
                e.sc = Some(sc.clone());
                e
            }
            None => RbkfEntry::new(Region::new(region), Some(sc.clone()), 0, 0),
        };
        entries.push(entry);
    }
    let area_totals = scmap
        .areas()
        .into_iter()
        .map(|area| {
            let (a, b) = entries
                .iter()
                .filter(|e| e.sc.as_ref().and_then(|sc| scmap.area(sc.as_str())) == Some(area))
                .fold((0, 0), |(a, b), e| (a + e.generated, b + e.earned));
            AreaTotal {
                area: area.to_owned(),
                generated: a,
                earned: b,
                rbkf: a as i64 - b as i64,
            }
        })
        .collect();
    Ok(ScBalance {
        region: Region::new(region),
        entries,
        area_totals,
    })
}

/// Bilateral flows between two regions in one subject category.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairwiseEntry {
    pub sc: ScCode,
    /// Gains produced in x and appropriated by y.
    pub x_to_y: u64,
    /// Gains produced in y and appropriated by x.
    pub y_to_x: u64,
    /// `x_to_y - y_to_x`, the balance from x's perspective.
    pub balance: i64,
}

/// Per-SC bilateral balances from `x`'s perspective, ascending by balance
/// (ties by SC).
pub fn rbkf_pairwise(
    matrices: &BTreeMap<ScCode, FlowMatrix>,
    x: &str,
    y: &str,
) -> Result<Vec<PairwiseEntry>> {
    if x == y {
        return Err(Error::InvalidArgument(format!(
            "pairwise balance needs two distinct regions, got `{x}` twice"
        )));
    }
    let mut out = Vec::with_capacity(matrices.len());
    for (sc, m) in matrices {
        let xi = m.index_of(x).ok_or_else(|| Error::UnknownRegion(x.to_owned()))?;
        let yi = m.index_of(y).ok_or_else(|| Error::UnknownRegion(y.to_owned()))?;
        let x_to_y = m.get(xi, yi);
        let y_to_x = m.get(yi, xi);
        out.push(PairwiseEntry {
            sc: sc.clone(),
            x_to_y,
            y_to_x,
            balance: x_to_y as i64 - y_to_x as i64,
        });
    }
    out.sort_by(|a, b| a.balance.cmp(&b.balance).then_with(|| a.sc.cmp(&b.sc)));
    Ok(out)
}

/// Aggregates over all *other* regions, as shown next to each region in an
/// RBKF table. Informational: sums of the other regions' summary rows.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RestOfCountry {
    pub region: Region,
    pub cited_publications: u64,
    pub gains: u64,
}

pub fn rest_of_country(summary: &[RegionSummary]) -> Vec<RestOfCountry> {
    let cited: u64 = summary.iter().map(|s| s.cited).sum();
    let gains: u64 = summary.iter().map(|s| s.gains).sum();
    summary
        .iter()
        .map(|s| RestOfCountry {
            region: s.region.clone(),
            cited_publications: cited - s.cited,
            gains: gains - s.gains,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn regions(n: &[&str]) -> Vec<Region> {
        n.iter().map(|&s| Region::new(s)).collect()
    }

    #[test]
    fn two_region_matrix() {
        let m = FlowMatrix::from_rows(&regions(&["A", "B"]), &[vec![0, 5], vec![2, 0]]).unwrap();
        let e = rbkf_overall(&m);
        assert_eq!((e[0].generated, e[0].earned, e[0].rbkf), (5, 2, 3));
        assert_eq!(e[1].rbkf, -3);
    }

    #[test]
    fn symmetric_matrix_balances() {
        let rs = regions(&["A", "B", "C"]);
        let m = FlowMatrix::from_rows(&rs, &[vec![9, 1, 4], vec![1, 3, 7], vec![4, 7, 2]]).unwrap();
        assert!(rbkf_overall(&m).iter().all(|e| e.rbkf == 0));
        let mut ms = BTreeMap::new();
        ms.insert(ScCode::new("X"), m.clone().with_sc("X".into()));
        assert!(rbkf_pairwise(&ms, "A", "C").unwrap().iter().all(|e| e.balance == 0));
    }

    #[test]
    fn diagonal_is_excluded() {
        let m = FlowMatrix::from_rows(&regions(&["A", "B"]), &[vec![100, 5], vec![2, 50]]).unwrap();
        let e = rbkf_overall(&m);
        assert_eq!((e[0].generated, e[0].earned), (5, 2));
    }

    #[test]
    fn pairwise_rejects_same_region() {
        assert!(rbkf_pairwise(&BTreeMap::new(), "A", "A").is_err());
    }

    #[test]
    fn by_sc_absent_and_unknown() {
        let mut scmap = ScMap::new();
        scmap.insert("X", "Area1").unwrap();
        scmap.insert("Y", "Area1").unwrap();
        let rs = regions(&["A", "B"]);
        let mut ms = BTreeMap::new();
        ms.insert(
            ScCode::new("X"),
            FlowMatrix::from_rows(&rs, &[vec![0, 4], vec![1, 0]]).unwrap(),
        );
        let bal = rbkf_by_sc(&ms, "A", &scmap).unwrap();
        assert_eq!(bal.entry("Y").unwrap().rbkf, 0);
        assert_eq!(bal.entry("Y").unwrap().generated, 0);
        assert_eq!(bal.area("Area1").unwrap().rbkf, 3);
        assert!(matches!(rbkf_by_sc(&ms, "Q", &scmap), Err(Error::UnknownRegion(_))));
        ms.insert(ScCode::new("Z"), FlowMatrix::zeros(&rs));
        assert!(matches!(rbkf_by_sc(&ms, "A", &scmap), Err(Error::UnknownSc(s)) if s == "Z"));
    }

    #[test]
    fn rest_of_country_sums() {
        let s = vec![
            RegionSummary { region: "A".into(), cited: 3, gains: 10, ..Default::default() },
            RegionSummary { region: "B".into(), cited: 5, gains: 7, ..Default::default() },
        ];
        let r = rest_of_country(&s);
        assert_eq!((r[0].cited_publications, r[0].gains), (5, 7));
        assert_eq!((r[1].cited_publications, r[1].gains), (3, 10));
    }
}
