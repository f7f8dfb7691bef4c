use serde::{Deserialize, Serialize};

use super::{resolve_region, Corpus, Resolution};
use crate::attribution::{classify_made_in, compute_shares, half, Classification, ExclusionReason};
use crate::types::PubId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PublicationStatus {
    Ok,
    /// Single author without links, counted against every address.
    AutoLinked,
    /// Will not be attributed to any region.
    Excluded(ExclusionReason),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationEntry {
    pub pub_id: PubId,
    pub unlinked_authors: usize,
    pub unresolved_domestic_addresses: usize,
    /// Foreign weight is exactly half of the authors.
    pub half_foreign: bool,
    pub status: PublicationStatus,
}

impl ValidationEntry {
    pub fn is_clean(&self) -> bool {
        self.unlinked_authors == 0
            && self.unresolved_domestic_addresses == 0
            && !self.half_foreign
            && self.status == PublicationStatus::Ok
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub entries: Vec<ValidationEntry>,
}

impl ValidationReport {
    pub fn excluded(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| matches!(e.status, PublicationStatus::Excluded(_)))
            .count()
    }

    pub fn excluded_for(&self, reason: ExclusionReason) -> usize {
        self.entries
            .iter()
            .filter(|e| e.status == PublicationStatus::Excluded(reason))
            .count()
    }

    pub fn auto_linked(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| e.status == PublicationStatus::AutoLinked)
            .count()
    }

    pub fn flagged(&self) -> impl Iterator<Item = &ValidationEntry> {
        self.entries.iter().filter(|e| !e.is_clean())
    }
}

/// Per-publication linkage and resolution diagnostics at the default threshold.
pub fn validate_corpus(corpus: &Corpus) -> ValidationReport {
    let gazetteer = corpus.gazetteer();
    let entries = corpus
        .publications()
        .iter()
        .map(|p| {
            let unresolved = p
                .addresses
                .iter()
                .filter(|a| resolve_region(a, gazetteer) == Resolution::Unresolved)
                .count();
            let shares = compute_shares(p, gazetteer);
            let status = match classify_made_in(&shares, half()).classification {
                Classification::Excluded(reason) => PublicationStatus::Excluded(reason),
                _ if p.is_auto_linked() => PublicationStatus::AutoLinked,
                _ => PublicationStatus::Ok,
            };
            ValidationEntry {
                pub_id: p.id.clone(),
                unlinked_authors: p.unlinked_authors(),
                unresolved_domestic_addresses: unresolved,
                half_foreign: shares.is_half_foreign(),
                status,
            }
        })
        .collect();
    ValidationReport { entries }
}
