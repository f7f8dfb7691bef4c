//! Knowledge outflow/inflow specialization indexes (KOSI/KISI).
//!
//! Both indexes apply the same transform to a region x subject-category gain
//! tensor: a Balassa revealed-comparative-advantage ratio `R` mapped through
//! `100 * tanh(ln R) = 100 * (R^2 - 1) / (R^2 + 1)` into [-100, 100]. KOSI
//! uses gains generated by each region, KISI gains earned by it.

use std::collections::BTreeSet;
use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::flows::{DualGainWeight, Gain};
use crate::types::{Region, ScCode};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// Gains generated by the region's publications (KOSI).
    Generated,
    /// Gains appropriated by the region (KISI).
    Earned,
}

impl Orientation {
    pub fn as_str(self) -> &'static str {
        match self {
            Orientation::Generated => "generated",
            Orientation::Earned => "earned",
        }
    }

    pub fn index_name(self) -> &'static str {
        match self {
            Orientation::Generated => "KOSI",
            Orientation::Earned => "KISI",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainScope {
    /// Intra- and extra-regional gains.
    #[default]
    All,
    ExtraOnly,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BalassaMode {
    /// Leave the focal SC out of the region totals and the focal region out of
    /// the reference group.
    #[default]
    ExcludeFocal,
    /// Classic index: region share over the whole-country share.
    IncludeFocal,
}

impl BalassaMode {
    pub fn as_str(self) -> &'static str {
        match self {
            BalassaMode::ExcludeFocal => "exclude_focal",
            BalassaMode::IncludeFocal => "include_focal",
        }
    }
}

/// Region x SC matrix of non-negative gain counts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GainTensor {
    regions: Vec<Region>,
    scs: Vec<ScCode>,
    values: Vec<u64>,
    orientation: Orientation,
}

impl GainTensor {
    pub fn new(
        regions: Vec<Region>,
        scs: Vec<ScCode>,
        rows: &[Vec<u64>],
        orientation: Orientation,
    ) -> Result<Self> {
        if rows.len() != regions.len() || rows.iter().any(|r| r.len() != scs.len()) {
            return Err(Error::InvalidArgument(format!(
                "gain tensor must be {}x{}",
                regions.len(),
                scs.len()
            )));
        }
        Ok(GainTensor {
            regions,
            scs,
            values: rows.concat(),
            orientation,
        })
    }

    /// Tensor over the corpus regions and SC map, with full counting of the
    /// cited publication's subject categories.
    pub fn from_gains(
        gains: &[Gain],
        corpus: &Corpus,
        orientation: Orientation,
        scope: GainScope,
        weight: DualGainWeight,
    ) -> Result<Self> {
        let regions = corpus.gazetteer().regions().to_vec();
        let scs: Vec<ScCode> = corpus.scmap().codes().cloned().collect();
        let mut t = GainTensor {
            values: vec![0; regions.len() * scs.len()],
            regions,
            scs,
            orientation,
        };
        for g in gains {
            if scope == GainScope::ExtraOnly && g.intra {
                continue;
            }
            let region = match orientation {
                Orientation::Generated => &g.producing_region,
                Orientation::Earned => &g.citing_region,
            };
            let k = t.region_index(region.as_str())?;
            let p = corpus
                .publication(g.cited_id.as_str())
                .ok_or_else(|| Error::Invariant(format!("gain cites unknown `{}`", g.cited_id)))?;
            let codes: BTreeSet<&ScCode> = p.sc_codes.iter().collect();
            for sc in codes {
                let j = t.sc_index(sc.as_str())?;
                let n = t.scs.len();
                t.values[k * n + j] += weight.units(g);
            }
        }
        Ok(t)
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn scs(&self) -> &[ScCode] {
        &self.scs
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn get(&self, k: usize, j: usize) -> u64 {
        self.values[k * self.scs.len() + j]
    }

    pub fn region_index(&self, region: &str) -> Result<usize> {
        self.regions
            .iter()
            .position(|r| r.as_str() == region)
            .ok_or_else(|| Error::UnknownRegion(region.to_owned()))
    }

    pub fn sc_index(&self, sc: &str) -> Result<usize> {
        self.scs
            .iter()
            .position(|s| s.as_str() == sc)
            .ok_or_else(|| Error::UnknownSc(sc.to_owned()))
    }

    pub fn scaled(&self, factor: u64) -> Self {
        GainTensor {
            values: self.values.iter().map(|v| v * factor).collect(),
            ..self.clone()
        }
    }
}

/// Exact Balassa ratio. Finite ratios keep numerator and denominator reduced
/// to lowest terms so that proportional tensors give identical values.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BalassaRatio {
    Finite { num: u128, den: u128 },
    Infinite,
    Undefined,
}

impl BalassaRatio {
    fn finite(num: u128, den: u128) -> Self {
        let g = num.gcd(&den).max(1);
        BalassaRatio::Finite {
            num: num / g,
            den: den / g,
        }
    }

    pub fn value(self) -> Option<f64> {
        match self {
            BalassaRatio::Finite { num, den } => Some(num as f64 / den as f64),
            BalassaRatio::Infinite => Some(f64::INFINITY),
            BalassaRatio::Undefined => None,
        }
    }

    /// `100 * tanh(ln R)`; `None` when undefined.
    pub fn index(self) -> Option<f64> {
        match self {
            BalassaRatio::Finite { num, den } => {
                let (p, q) = (num as f64, den as f64);
                Some(bounded(100.0 * ((p - q) * (p + q)) / (p * p + q * q)))
            }
            BalassaRatio::Infinite => Some(100.0),
            BalassaRatio::Undefined => None,
        }
    }
}

impl fmt::Display for BalassaRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BalassaRatio::Finite { num, den } => write!(f, "{num}/{den}"),
            BalassaRatio::Infinite => f.write_str("inf"),
            BalassaRatio::Undefined => f.write_str("NA"),
        }
    }
}

enum Part {
    Finite(u64, u64),
    Infinite,
    Undefined,
}

fn part(num: u64, den: u64) -> Part {
    match (num, den) {
        (0, 0) => Part::Undefined,
        (_, 0) => Part::Infinite,
        _ => Part::Finite(num, den),
    }
}

pub fn balassa_ratio_at(g: &GainTensor, k: usize, j: usize, mode: BalassaMode) -> BalassaRatio {
    let (nr, nc) = (g.regions.len(), g.scs.len());
    let focal = g.get(k, j);
    let region_total: u64 = (0..nc).map(|i| g.get(k, i)).sum();
    let sc_total: u64 = (0..nr).map(|z| g.get(z, j)).sum();
    let grand: u64 = g.values.iter().sum();
    let (a, b, c, d) = match mode {
        BalassaMode::ExcludeFocal => {
            let others_sc = sc_total - focal;
            let others_total = grand - region_total;
            (focal, region_total - focal, others_sc, others_total - others_sc)
        }
        BalassaMode::IncludeFocal => (focal, region_total, sc_total, grand),
    };
    match (part(a, b), part(c, d)) {
        (Part::Undefined, _) | (_, Part::Undefined) => BalassaRatio::Undefined,
        (Part::Infinite, Part::Infinite) => BalassaRatio::Undefined,
        (Part::Infinite, _) => BalassaRatio::Infinite,
        (Part::Finite(..), Part::Infinite) => BalassaRatio::finite(0, 1),
        (Part::Finite(a, b), Part::Finite(c, d)) => match (a, c) {
            (0, 0) => BalassaRatio::Undefined,
            (_, 0) => BalassaRatio::Infinite,
            _ => BalassaRatio::finite(a as u128 * d as u128, b as u128 * c as u128),
        },
    }
}

pub fn balassa_ratio(g: &GainTensor, region: &str, sc: &str, mode: BalassaMode) -> Result<BalassaRatio> {
    Ok(balassa_ratio_at(g, g.region_index(region)?, g.sc_index(sc)?, mode))
}

/// `100 * (R^2 - 1) / (R^2 + 1)` for a real ratio, evaluated so that it stays
/// accurate near `R = 1` and does not overflow for huge `R`.
pub fn index_of_ratio(r: f64) -> f64 {
    if r.is_nan() || r < 0.0 {
        return f64::NAN;
    }
    if r.is_infinite() {
        return 100.0;
    }
    if r > 1e150 {
        let q = 1.0 / r;
        return bounded(100.0 * ((1.0 - q) * (1.0 + q)) / (1.0 + q * q));
    }
    bounded(100.0 * ((r - 1.0) * (r + 1.0)) / (r * r + 1.0))
}

// rounding can land one ulp outside the range
fn bounded(v: f64) -> f64 {
    v.clamp(-100.0, 100.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpecIndexValue {
    pub region: Region,
    pub sc: ScCode,
    /// `None` when the underlying ratio is undefined.
    pub value: Option<f64>,
}

pub fn spec_index(g: &GainTensor, region: &str, sc: &str, mode: BalassaMode) -> Result<SpecIndexValue> {
    let ratio = balassa_ratio(g, region, sc, mode)?;
    Ok(SpecIndexValue {
        region: Region::new(region),
        sc: ScCode::new(sc),
        value: ratio.index(),
    })
}

/// Every (region, SC) cell, regions outer, SCs inner.
pub fn index_table(g: &GainTensor, mode: BalassaMode) -> Vec<SpecIndexValue> {
    let mut out = Vec::with_capacity(g.regions.len() * g.scs.len());
    for (k, region) in g.regions.iter().enumerate() {
        for (j, sc) in g.scs.iter().enumerate() {
            out.push(SpecIndexValue {
                region: region.clone(),
                sc: sc.clone(),
                value: balassa_ratio_at(g, k, j, mode).index(),
            });
        }
    }
    out
}

/// The `n` SCs with the highest index for `region`, descending, ties by SC.
pub fn top_specializations(
    g: &GainTensor,
    region: &str,
    n: usize,
    mode: BalassaMode,
) -> Result<Vec<(ScCode, f64)>> {
    if n == 0 {
        return Err(Error::InvalidArgument("top_specializations needs n >= 1".into()));
    }
    let k = g.region_index(region)?;
    let mut values: Vec<(ScCode, f64)> = g
        .scs
        .iter()
        .enumerate()
        .filter_map(|(j, sc)| balassa_ratio_at(g, k, j, mode).index().map(|v| (sc.clone(), v)))
        .collect();
    values.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    values.truncate(n);
    Ok(values)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldExtremes {
    pub sc: ScCode,
    pub max_region: Region,
    pub max_value: f64,
    pub max_tied: bool,
    pub min_region: Region,
    pub min_value: f64,
    pub min_tied: bool,
}

/// Regions with the highest and lowest index in one SC. `None` when no region
/// has a defined value.
pub fn field_extremes(g: &GainTensor, sc: &str, mode: BalassaMode) -> Result<Option<FieldExtremes>> {
    let j = g.sc_index(sc)?;
    let defined: Vec<(&Region, f64)> = g
        .regions
        .iter()
        .enumerate()
        .filter_map(|(k, r)| balassa_ratio_at(g, k, j, mode).index().map(|v| (r, v)))
        .collect();
    let pick = |better: fn(f64, f64) -> bool| {
        let mut best = defined[0];
        let mut tied = false;
        for &(r, v) in &defined[1..] {
            if better(v, best.1) {
                best = (r, v);
                tied = false;
            } else if v == best.1 {
                tied = true;
                if r < best.0 {
                    best = (r, v);
                }
            }
        }
        (best, tied)
    };
    if defined.is_empty() {
        return Ok(None);
    }
    let ((max_r, max_v), max_tied) = pick(|a, b| a > b);
    let ((min_r, min_v), min_tied) = pick(|a, b| a < b);
    Ok(Some(FieldExtremes {
        sc: ScCode::new(sc),
        max_region: max_r.clone(),
        max_value: max_v,
        max_tied,
        min_region: min_r.clone(),
        min_value: min_v,
        min_tied,
    }))
}
