//! Benefits, gains and region-by-region flow matrices.
//!
//! A citation of a made-in publication by a publication with at least one
//! domestic address is a benefit. A benefit turns into one gain for every
//! pair of (producing region, citing region). A gain is intra-regional when
//! both regions coincide.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attribution::{MadeIn, MadeInMap};
use crate::corpus::{resolve_region, Corpus, Gazetteer, Publication};
use crate::error::{Error, Result};
use crate::types::{PubId, Region, ScCode};

/// How much a gain produced by a dual made-in publication counts in matrices
/// and tensors.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DualGainWeight {
    #[default]
    Full,
    Half,
}

impl DualGainWeight {
    /// Integer units that represent one whole gain.
    pub fn units_per_gain(self) -> u64 {
        match self {
            DualGainWeight::Full => 1,
            DualGainWeight::Half => 2,
        }
    }

    pub fn units(self, gain: &Gain) -> u64 {
        match (self, gain.dual) {
            (DualGainWeight::Half, true) => 1,
            _ => self.units_per_gain(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Benefit {
    pub cited_id: PubId,
    pub citing_id: PubId,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Gain {
    pub cited_id: PubId,
    pub citing_id: PubId,
    pub producing_region: Region,
    pub citing_region: Region,
    pub intra: bool,
    /// The cited publication is equally made in two regions.
    pub dual: bool,
}

/// Distinct domestic regions among a publication's addresses.
pub fn citing_regions(publication: &Publication, gazetteer: &Gazetteer) -> BTreeSet<Region> {
    publication
        .addresses
        .iter()
        .filter_map(|a| resolve_region(a, gazetteer).region().cloned())
        .collect()
}

struct GainIndex<'a> {
    by_cited: Vec<(&'a PubId, Vec<&'a PubId>)>,
    regions: HashMap<&'a PubId, BTreeSet<Region>>,
}

impl<'a> GainIndex<'a> {
    fn new(corpus: &'a Corpus) -> Self {
        let mut by_cited: BTreeMap<&PubId, Vec<&PubId>> = BTreeMap::new();
        for e in corpus.citations() {
            by_cited.entry(&e.cited_id).or_default().push(&e.citing_id);
        }
        let gazetteer = corpus.gazetteer();
        let regions = corpus
            .publications()
            .iter()
            .map(|p| (&p.id, citing_regions(p, gazetteer)))
            .collect();
        GainIndex {
            by_cited: by_cited.into_iter().collect(),
            regions,
        }
    }

    fn gains_for(&self, cited: &PubId, citers: &[&PubId], made_in: &MadeInMap, out: &mut Vec<Gain>) {
        let Some(m) = made_in.get(cited) else { return };
        let producing = m.regions();
        if producing.is_empty() {
            return;
        }
        let dual = m.is_dual();
        for citing in citers {
            let Some(citing_set) = self.regions.get(citing) else { continue };
            for p in &producing {
                for c in citing_set {
                    out.push(Gain {
                        cited_id: cited.clone(),
                        citing_id: (*citing).clone(),
                        producing_region: (*p).clone(),
                        citing_region: c.clone(),
                        intra: *p == c,
                        dual,
                    });
                }
            }
        }
    }
}

/// All gains of the corpus, sorted by (cited, citing, producing, citing region).
pub fn compute_gains(corpus: &Corpus, made_in: &MadeInMap) -> Vec<Gain> {
    let index = GainIndex::new(corpus);
    let mut out = Vec::new();
    for (cited, citers) in &index.by_cited {
        index.gains_for(cited, citers, made_in, &mut out);
    }
    out
}

/// Same result as [`compute_gains`], computed over `partitions` chunks of
/// cited publications in parallel and merged.
pub fn compute_gains_parallel(corpus: &Corpus, made_in: &MadeInMap, partitions: usize) -> Vec<Gain> {
    let index = GainIndex::new(corpus);
    let chunk = index.by_cited.len().div_ceil(partitions.max(1)).max(1);
    let parts: Vec<Vec<Gain>> = index
        .by_cited
        .par_chunks(chunk)
        .map(|slice| {
            let mut out = Vec::new();
            for (cited, citers) in slice {
                index.gains_for(cited, citers, made_in, &mut out);
            }
            out
        })
        .collect();
    let mut gains: Vec<Gain> = parts.into_iter().flatten().collect();
    gains.sort_unstable();
    gains
}

/// Distinct (cited, citing) pairs behind a gain list.
pub fn benefits(gains: &[Gain]) -> Vec<Benefit> {
    let set: BTreeSet<Benefit> = gains
        .iter()
        .map(|g| Benefit {
            cited_id: g.cited_id.clone(),
            citing_id: g.citing_id.clone(),
        })
        .collect();
    set.into_iter().collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowTotals {
    pub benefits: u64,
    pub gains: u64,
    pub intra_gains: u64,
}

pub fn flow_totals(gains: &[Gain]) -> FlowTotals {
    FlowTotals {
        benefits: benefits(gains).len() as u64,
        gains: gains.len() as u64,
        intra_gains: gains.iter().filter(|g| g.intra).count() as u64,
    }
}

/// Square matrix of gain counts: rows are producing regions, columns citing
/// regions. Cells hold integer units; with [`DualGainWeight::Half`] one gain
/// is two units so that halved dual gains stay integral.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowMatrix {
    regions: Vec<Region>,
    cells: Vec<u64>,
    units_per_gain: u64,
    sc: Option<ScCode>,
}

impl FlowMatrix {
    pub fn zeros(regions: &[Region]) -> Self {
        FlowMatrix {
            regions: regions.to_vec(),
            cells: vec![0; regions.len() * regions.len()],
            units_per_gain: 1,
            sc: None,
        }
    }

    /// Builds a matrix from explicit rows of whole-gain counts.
    pub fn from_rows(regions: &[Region], rows: &[Vec<u64>]) -> Result<Self> {
        let n = regions.len();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidArgument(format!(
                "flow matrix rows must be {n}x{n}"
            )));
        }
        Ok(FlowMatrix {
            regions: regions.to_vec(),
            cells: rows.concat(),
            units_per_gain: 1,
            sc: None,
        })
    }

    pub fn with_sc(mut self, sc: ScCode) -> Self {
        self.sc = Some(sc);
        self
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    pub fn sc(&self) -> Option<&ScCode> {
        self.sc.as_ref()
    }

    pub fn units_per_gain(&self) -> u64 {
        self.units_per_gain
    }

    pub fn index_of(&self, region: &str) -> Option<usize> {
        self.regions.iter().position(|r| r.as_str() == region)
    }

    /// Raw units in cell (row, col).
    pub fn get(&self, row: usize, col: usize) -> u64 {
        self.cells[row * self.regions.len() + col]
    }

    /// Cell value in gains.
    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.get(row, col) as f64 / self.units_per_gain as f64
    }

    pub fn row(&self, row: usize) -> &[u64] {
        let n = self.regions.len();
        &self.cells[row * n..(row + 1) * n]
    }

    pub fn row_total(&self, row: usize) -> u64 {
        self.row(row).iter().sum()
    }

    pub fn col_total(&self, col: usize) -> u64 {
        (0..self.regions.len()).map(|r| self.get(r, col)).sum()
    }

    pub fn diagonal(&self, i: usize) -> u64 {
        self.get(i, i)
    }

    pub fn grand_total(&self) -> u64 {
        self.cells.iter().sum()
    }

    /// Every cell multiplied by `factor`.
    pub fn scaled(&self, factor: u64) -> Self {
        FlowMatrix {
            cells: self.cells.iter().map(|c| c * factor).collect(),
            ..self.clone()
        }
    }

    fn add(&mut self, row: usize, col: usize, units: u64) {
        let n = self.regions.len();
        self.cells[row * n + col] += units;
    }
}

fn region_lookup(regions: &[Region]) -> HashMap<&str, usize> {
    regions
        .iter()
        .enumerate()
        .map(|(i, r)| (r.as_str(), i))
        .collect()
}

fn position(lookup: &HashMap<&str, usize>, region: &Region) -> Result<usize> {
    lookup
        .get(region.as_str())
        .copied()
        .ok_or_else(|| Error::UnknownRegion(region.to_string()))
}

/// Overall flow matrix over `regions`.
pub fn flow_matrix(gains: &[Gain], regions: &[Region], weight: DualGainWeight) -> Result<FlowMatrix> {
    let lookup = region_lookup(regions);
    let mut m = FlowMatrix::zeros(regions);
    m.units_per_gain = weight.units_per_gain();
    for g in gains {
        let r = position(&lookup, &g.producing_region)?;
        let c = position(&lookup, &g.citing_region)?;
        m.add(r, c, weight.units(g));
    }
    Ok(m)
}

/// Flow matrix restricted to gains whose cited publication carries `sc`
/// (full counting: a publication in k categories feeds k matrices).
pub fn flow_matrix_for_sc(
    gains: &[Gain],
    corpus: &Corpus,
    sc: &str,
    weight: DualGainWeight,
) -> Result<FlowMatrix> {
    if !corpus.scmap().contains(sc) {
        return Err(Error::UnknownSc(sc.to_owned()));
    }
    let in_sc: Vec<Gain> = gains
        .iter()
        .filter(|g| {
            corpus
                .publication(g.cited_id.as_str())
                .is_some_and(|p| p.sc_codes.iter().any(|c| c.as_str() == sc))
        })
        .cloned()
        .collect();
    Ok(flow_matrix(&in_sc, corpus.gazetteer().regions(), weight)?.with_sc(ScCode::new(sc)))
}

/// One matrix per subject category of the SC map, in SC order. Categories
/// without gains get a zero matrix.
pub fn sc_flow_matrices(
    gains: &[Gain],
    corpus: &Corpus,
    weight: DualGainWeight,
) -> Result<BTreeMap<ScCode, FlowMatrix>> {
    let regions = corpus.gazetteer().regions();
    let lookup = region_lookup(regions);
    let mut out: BTreeMap<ScCode, FlowMatrix> = corpus
        .scmap()
        .codes()
        .map(|sc| {
            let mut m = FlowMatrix::zeros(regions).with_sc(sc.clone());
            m.units_per_gain = weight.units_per_gain();
            (sc.clone(), m)
        })
        .collect();
    for g in gains {
        let p = corpus
            .publication(g.cited_id.as_str())
            .ok_or_else(|| Error::Invariant(format!("gain cites unknown `{}`", g.cited_id)))?;
        let r = position(&lookup, &g.producing_region)?;
        let c = position(&lookup, &g.citing_region)?;
        let mut seen = BTreeSet::new();
        for sc in &p.sc_codes {
            if !seen.insert(sc) {
                continue;
            }
            let m = out
                .get_mut(sc)
                .ok_or_else(|| Error::UnknownSc(sc.to_string()))?;
            m.add(r, c, weight.units(g));
        }
    }
    Ok(out)
}

/// Row-normalized view of a flow matrix. Zero rows stay zero.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PercentMatrix {
    pub counts: FlowMatrix,
    pub percent: Vec<Vec<f64>>,
}

pub fn row_percentages(matrix: &FlowMatrix) -> PercentMatrix {
    let percent = (0..matrix.len())
        .map(|r| {
            let total = matrix.row_total(r);
            matrix
                .row(r)
                .iter()
                .map(|&c| {
                    if total == 0 {
                        0.0
                    } else {
                        100.0 * c as f64 / total as f64
                    }
                })
                .collect()
        })
        .collect();
    PercentMatrix {
        counts: matrix.clone(),
        percent,
    }
}

/// Per-region publication, benefit and gain statistics.
///
/// `total_publications` counts publications with at least one address in the
/// region. Dual made-in publications count fully for both regions.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionSummary {
    pub region: Region,
    pub total_publications: u64,
    pub made_in: u64,
    /// Made-in publications with at least one citation in the corpus.
    pub cited: u64,
    pub benefits: u64,
    pub gains: u64,
    pub intra_gains: u64,
}

fn ratio(num: u64, den: u64) -> Option<Ratio<u64>> {
    (den != 0).then(|| Ratio::new(num, den))
}

impl RegionSummary {
    pub fn made_in_share(&self) -> Option<Ratio<u64>> {
        ratio(self.made_in, self.total_publications)
    }

    pub fn cited_share(&self) -> Option<Ratio<u64>> {
        ratio(self.cited, self.made_in)
    }

    pub fn benefits_per_cited(&self) -> Option<Ratio<u64>> {
        ratio(self.benefits, self.cited)
    }

    pub fn gains_per_benefit(&self) -> Option<Ratio<u64>> {
        ratio(self.gains, self.benefits)
    }

    pub fn intra_share(&self) -> Option<Ratio<u64>> {
        ratio(self.intra_gains, self.gains)
    }
}

pub fn region_summary(corpus: &Corpus, made_in: &MadeInMap, gains: &[Gain]) -> Vec<RegionSummary> {
    let gazetteer = corpus.gazetteer();
    let mut rows: BTreeMap<&Region, RegionSummary> = gazetteer
        .regions()
        .iter()
        .map(|r| {
            (
                r,
                RegionSummary {
                    region: r.clone(),
                    ..RegionSummary::default()
                },
            )
        })
        .collect();
    for p in corpus.publications() {
        for r in citing_regions(p, gazetteer) {
            if let Some(row) = rows.get_mut(&r) {
                row.total_publications += 1;
            }
        }
    }
    let cited: BTreeSet<&PubId> = corpus.citations().iter().map(|e| &e.cited_id).collect();
    for m in made_in.values() {
        let is_cited = cited.contains(&m.pub_id);
        for r in m.regions() {
            if let Some(row) = rows.get_mut(r) {
                row.made_in += 1;
                row.cited += u64::from(is_cited);
            }
        }
    }
    for b in benefits(gains) {
        let producing = made_in.get(&b.cited_id).map(MadeIn::regions).unwrap_or_default();
        for r in producing {
            if let Some(row) = rows.get_mut(r) {
                row.benefits += 1;
            }
        }
    }
    for g in gains {
        if let Some(row) = rows.get_mut(&g.producing_region) {
            row.gains += 1;
            row.intra_gains += u64::from(g.intra);
        }
    }
    gazetteer
        .regions()
        .iter()
        .map(|r| rows.remove(r).unwrap_or_default())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn regions(names: &[&str]) -> Vec<Region> {
        names.iter().map(|&n| Region::new(n)).collect()
    }

    fn gain(cited: &str, citing: &str, p: &str, c: &str) -> Gain {
        Gain {
            cited_id: cited.into(),
            citing_id: citing.into(),
            producing_region: p.into(),
            citing_region: c.into(),
            intra: p == c,
            dual: false,
        }
    }

    #[test]
    fn empty_gains_zero_matrix() {
        let m = flow_matrix(&[], &regions(&["A", "B"]), DualGainWeight::Full).unwrap();
        assert_eq!(m.grand_total(), 0);
    }

    #[test]
    fn matrix_orientation() {
        let gains = [gain("x", "y", "A", "B"), gain("x", "z", "A", "A")];
        let m = flow_matrix(&gains, &regions(&["A", "B"]), DualGainWeight::Full).unwrap();
        assert_eq!(m.get(0, 1), 1);
        assert_eq!(m.diagonal(0), 1);
        assert_eq!(m.get(1, 0), 0);
        assert_eq!(m.grand_total(), 2);
    }

    #[test]
    fn unknown_region_rejected() {
        let gains = [gain("x", "y", "A", "Q")];
        assert!(matches!(
            flow_matrix(&gains, &regions(&["A"]), DualGainWeight::Full),
            Err(Error::UnknownRegion(r)) if r == "Q"
        ));
    }

    #[test]
    fn half_weight_dual_gains() {
        let mut g = gain("x", "y", "A", "B");
        g.dual = true;
        let gains = [g, gain("w", "y", "A", "B")];
        let m = flow_matrix(&gains, &regions(&["A", "B"]), DualGainWeight::Half).unwrap();
        assert_eq!(m.get(0, 1), 3);
        assert_eq!(m.value(0, 1), 1.5);
    }

    #[test]
    fn percentages() {
        let rs = regions(&["A", "B", "C", "D"]);
        let m = FlowMatrix::from_rows(
            &rs,
            &[vec![5, 5, 5, 5], vec![0; 4], vec![4, 16, 0, 0], vec![0, 0, 0, 1]],
        )
        .unwrap();
        let p = row_percentages(&m);
        assert_eq!(p.percent[0], vec![25.0; 4]);
        assert_eq!(p.percent[1], vec![0.0; 4]);
        assert_eq!(p.percent[2], vec![20.0, 80.0, 0.0, 0.0]);
        assert_eq!(p.counts.row_total(2), 20);
    }

    #[test]
    fn uniform_row_over_twenty_regions() {
        let names: Vec<String> = (0..20).map(|i| format!("R{i:02}")).collect();
        let rs: Vec<Region> = names.iter().map(|n| Region::new(n.as_str())).collect();
        let mut rows = vec![vec![0u64; 20]; 20];
        rows[0] = vec![3; 20];
        let p = row_percentages(&FlowMatrix::from_rows(&rs, &rows).unwrap());
        assert!(p.percent[0].iter().all(|&v| (v - 5.0).abs() < 1e-12));
    }

    #[test]
    fn benefits_are_distinct_pairs() {
        let gains = [
            gain("x", "y", "A", "A"),
            gain("x", "y", "A", "B"),
            gain("x", "z", "A", "B"),
        ];
        assert_eq!(benefits(&gains).len(), 2);
        let t = flow_totals(&gains);
        assert_eq!((t.benefits, t.gains, t.intra_gains), (2, 3, 1));
    }
}
