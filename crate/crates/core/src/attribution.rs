//! Fractional regional authorship and the "made in" classification.
//!
//! Every author carries weight 1, split evenly over the addresses the author
//! is linked to. A publication is made in a region when that region holds at
//! least half of the authorship weight, and equally made in two regions when
//! each holds exactly half. All arithmetic is exact.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{resolve_region, Corpus, Gazetteer, Publication, Resolution};
use crate::error::{Error, Result};
use crate::types::{PubId, Region};

/// Exact authorship weight.
pub type Weight = Ratio<u64>;

/// Default made-in threshold: half of the authorship weight.
pub fn half() -> Weight {
    Ratio::new(1, 2)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionShares {
    pub pub_id: PubId,
    pub shares: BTreeMap<Region, Weight>,
    pub foreign_weight: Weight,
    pub unresolved_weight: Weight,
    /// Weight of authors without any affiliation link.
    pub unlinked_weight: Weight,
    pub total_authors: u64,
}

impl RegionShares {
    pub fn share(&self, region: &str) -> Weight {
        self.shares.get(region).copied().unwrap_or_default()
    }

    /// Sum of every weight bucket; always equals `total_authors`.
    pub fn total_weight(&self) -> Weight {
        self.shares.values().copied().sum::<Weight>()
            + self.foreign_weight
            + self.unresolved_weight
            + self.unlinked_weight
    }

    /// Exactly half of the weight is foreign. Such publications are not
    /// excluded as produced abroad but are worth flagging.
    pub fn is_half_foreign(&self) -> bool {
        self.foreign_weight * 2 == Weight::from_integer(self.total_authors)
    }
}

pub fn compute_shares(publication: &Publication, gazetteer: &Gazetteer) -> RegionShares {
    let resolved: Vec<Resolution> = publication
        .addresses
        .iter()
        .map(|a| resolve_region(a, gazetteer))
        .collect();
    let mut shares: BTreeMap<Region, Weight> = BTreeMap::new();
    let mut foreign = Weight::default();
    let mut unresolved = Weight::default();
    let mut unlinked = Weight::default();
    for i in 0..publication.authors.len() {
        let refs = publication.effective_refs(i);
        if refs.is_empty() {
            unlinked += 1;
            continue;
        }
        let part = Ratio::new(1, refs.len() as u64);
        for r in refs {
            match &resolved[r] {
                Resolution::Domestic(region) => *shares.entry(region.clone()).or_default() += part,
                Resolution::Foreign => foreign += part,
                Resolution::Unresolved => unresolved += part,
            }
        }
    }
    RegionShares {
        pub_id: publication.id.clone(),
        shares,
        foreign_weight: foreign,
        unresolved_weight: unresolved,
        unlinked_weight: unlinked,
        total_authors: publication.authors.len() as u64,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ExclusionReason {
    ForeignMajority,
    NoMajorityRegion,
    UnlinkedAuthors,
}

impl ExclusionReason {
    pub fn as_str(self) -> &'static str {
        match self {
            ExclusionReason::ForeignMajority => "foreign_majority",
            ExclusionReason::NoMajorityRegion => "no_majority_region",
            ExclusionReason::UnlinkedAuthors => "unlinked_authors",
        }
    }
}

impl fmt::Display for ExclusionReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Classification {
    Single(Region),
    /// Two distinct regions, lexicographically ordered.
    Dual(Region, Region),
    Excluded(ExclusionReason),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MadeIn {
    pub pub_id: PubId,
    pub classification: Classification,
}

impl MadeIn {
    /// Producing regions: one for single, two for dual, none when excluded.
    pub fn regions(&self) -> Vec<&Region> {
        match &self.classification {
            Classification::Single(r) => vec![r],
            Classification::Dual(a, b) => vec![a, b],
            Classification::Excluded(_) => Vec::new(),
        }
    }

    pub fn is_made_in(&self) -> bool {
        !matches!(self.classification, Classification::Excluded(_))
    }

    pub fn is_dual(&self) -> bool {
        matches!(self.classification, Classification::Dual(..))
    }
}

pub type MadeInMap = BTreeMap<PubId, MadeIn>;

pub fn classify_made_in(shares: &RegionShares, threshold: Weight) -> MadeIn {
    let total = Weight::from_integer(shares.total_authors);
    let classification = if shares.total_authors > 1 && shares.unlinked_weight > Weight::default() {
        Classification::Excluded(ExclusionReason::UnlinkedAuthors)
    } else if shares.foreign_weight * 2 > total {
        Classification::Excluded(ExclusionReason::ForeignMajority)
    } else {
        let bar = total * threshold;
        let hits: Vec<(&Region, &Weight)> =
            shares.shares.iter().filter(|(_, w)| **w >= bar).collect();
        match hits.as_slice() {
            [(r, _)] => Classification::Single((*r).clone()),
            // BTreeMap iteration already gives the canonical order.
            [(a, wa), (b, wb)] if **wa == bar && **wb == bar => {
                Classification::Dual((*a).clone(), (*b).clone())
            }
            _ => Classification::Excluded(ExclusionReason::NoMajorityRegion),
        }
    };
    MadeIn {
        pub_id: shares.pub_id.clone(),
        classification,
    }
}

pub fn check_threshold(threshold: Weight) -> Result<()> {
    if threshold <= Weight::default() || threshold > Weight::from_integer(1) {
        return Err(Error::InvalidArgument(format!(
            "made-in threshold {threshold} outside (0, 1]"
        )));
    }
    Ok(())
}

/// Classifies every publication of the corpus.
pub fn attribute_corpus(corpus: &Corpus, threshold: Weight) -> Result<MadeInMap> {
    check_threshold(threshold)?;
    let gazetteer = corpus.gazetteer();
    let classified: Vec<MadeIn> = corpus
        .publications()
        .par_iter()
        .map(|p| classify_made_in(&compute_shares(p, gazetteer), threshold))
        .collect();
    Ok(classified
        .into_iter()
        .map(|m| (m.pub_id.clone(), m))
        .collect())
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributionCounts {
    pub single: u64,
    pub dual: u64,
    pub excluded: BTreeMap<ExclusionReason, u64>,
    /// Made-in publications per region; dual publications count in both regions.
    pub per_region: BTreeMap<Region, u64>,
}

impl AttributionCounts {
    pub fn excluded_total(&self) -> u64 {
        self.excluded.values().sum()
    }
}

pub fn attribution_counts(made_in: &MadeInMap) -> AttributionCounts {
    let mut counts = AttributionCounts::default();
    for m in made_in.values() {
        match &m.classification {
            Classification::Single(_) => counts.single += 1,
            Classification::Dual(..) => counts.dual += 1,
            Classification::Excluded(reason) => *counts.excluded.entry(*reason).or_default() += 1,
        }
        for r in m.regions() {
            *counts.per_region.entry(r.clone()).or_default() += 1;
        }
    }
    counts
}
