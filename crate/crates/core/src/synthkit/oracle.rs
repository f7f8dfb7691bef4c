//! Brute-force reference implementation used to cross-check the pipeline.
//!
//! Deliberately naive: integer weights scaled by the lcm of affiliation
//! counts, and a literal loop over every (cited, edge) pair.

use std::collections::BTreeMap;

use num_integer::lcm;

use crate::corpus::{resolve_region, Corpus, Publication, Resolution};
use crate::flows::{Gain, RegionSummary};
use crate::types::{PubId, Region};

/// Made-in regions of one publication at threshold 1/2, empty if excluded.
pub fn brute_force_made_in(p: &Publication, corpus: &Corpus) -> Vec<Region> {
    let n = p.authors.len() as u64;
    if n == 0 {
        return vec![];
    }
    let mut refs: Vec<Vec<usize>> = p.authors.iter().map(|a| a.address_refs.clone()).collect();
    if n == 1 && refs[0].is_empty() {
        refs[0] = (0..p.addresses.len()).collect();
    }
    if refs.iter().any(Vec::is_empty) {
        return vec![];
    }
    let d = refs.iter().fold(1u64, |acc, r| lcm(acc, r.len() as u64));
    let total = n * d;
    let mut foreign = 0u64;
    let mut weights: BTreeMap<Region, u64> = BTreeMap::new();
    for r in &refs {
        let share = d / r.len() as u64;
        for &k in r {
            match resolve_region(&p.addresses[k], corpus.gazetteer()) {
                Resolution::Domestic(region) => *weights.entry(region).or_insert(0) += share,
                Resolution::Foreign => foreign += share,
                Resolution::Unresolved => {}
            }
        }
    }
    if 2 * foreign > total {
        return vec![];
    }
    let mut hits = vec![];
    for (region, w) in &weights {
        if 2 * w >= total {
            hits.push((region.clone(), *w));
        }
    }
    if hits.len() == 1 {
        return vec![hits[0].0.clone()];
    }
    if hits.len() == 2 && 2 * hits[0].1 == total && 2 * hits[1].1 == total {
        return vec![hits[0].0.clone(), hits[1].0.clone()];
    }
    vec![]
}

fn domestic_regions(p: &Publication, corpus: &Corpus) -> Vec<Region> {
    let mut out: Vec<Region> = vec![];
    for a in &p.addresses {
        if let Resolution::Domestic(r) = resolve_region(a, corpus.gazetteer()) {
            if !out.contains(&r) {
                out.push(r);
            }
        }
    }
    out.sort();
    out
}

/// Every gain in the corpus, sorted.
pub fn brute_force_gains(corpus: &Corpus) -> Vec<Gain> {
    let mut gains = vec![];
    for cited in corpus.publications() {
        let producing = brute_force_made_in(cited, corpus);
        if producing.is_empty() {
            continue;
        }
        for edge in corpus.citations() {
            if edge.cited_id != cited.id {
                continue;
            }
            let citing = corpus.publication(edge.citing_id.as_str()).expect("edge endpoints exist");
            for p in &producing {
                for c in domestic_regions(citing, corpus) {
                    gains.push(Gain {
                        cited_id: cited.id.clone(),
                        citing_id: citing.id.clone(),
                        producing_region: p.clone(),
                        intra: *p == c,
                        citing_region: c,
                        dual: producing.len() == 2,
                    });
                }
            }
        }
    }
    gains.sort();
    gains
}

/// Per-region summary recomputed from scratch, in gazetteer region order.
pub fn brute_force_region_summary(corpus: &Corpus) -> Vec<RegionSummary> {
    let gains = brute_force_gains(corpus);
    let mut out = vec![];
    for region in corpus.gazetteer().regions() {
        let mut row = RegionSummary {
            region: region.clone(),
            ..RegionSummary::default()
        };
        for p in corpus.publications() {
            if domestic_regions(p, corpus).contains(region) {
                row.total_publications += 1;
            }
            if brute_force_made_in(p, corpus).contains(region) {
                row.made_in += 1;
                if corpus.citations().iter().any(|e| e.cited_id == p.id) {
                    row.cited += 1;
                }
            }
        }
        let mut benefits: Vec<(&PubId, &PubId)> = vec![];
        for g in &gains {
            if &g.producing_region != region {
                continue;
            }
            row.gains += 1;
            if g.intra {
                row.intra_gains += 1;
            }
            if !benefits.contains(&(&g.cited_id, &g.citing_id)) {
                benefits.push((&g.cited_id, &g.citing_id));
            }
        }
        row.benefits = benefits.len() as u64;
        out.push(row);
    }
    out
}
