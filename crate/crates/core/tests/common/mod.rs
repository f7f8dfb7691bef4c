#![allow(dead_code)]

use std::path::PathBuf;

use kflow::corpus::GazetteerKind;
use kflow::{
    Address, Author, CitationEdge, Corpus, FlowMatrix, Gazetteer, LoadOptions, Publication, Region,
    ScMap,
};
use proptest::prelude::*;
use serde::de::DeserializeOwned;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn table<T: DeserializeOwned>(name: &str) -> Vec<T> {
    csv::Reader::from_path(fixture("tables").join(name))
        .unwrap()
        .deserialize()
        .collect::<Result<_, _>>()
        .unwrap()
}

/// Two-region matrix with the given off-diagonal flows.
pub fn pair_matrix(x: &str, y: &str, x_to_y: u64, y_to_x: u64) -> FlowMatrix {
    FlowMatrix::from_rows(&[Region::new(x), Region::new(y)], &[vec![0, x_to_y], vec![y_to_x, 0]])
        .unwrap()
}

pub const REGIONS: [&str; 3] = ["A", "B", "C"];
pub const SCS: [&str; 3] = ["S0", "S1", "S2"];

pub fn small_gazetteer() -> Gazetteer {
    let mut g = Gazetteer::new("IT");
    for r in REGIONS {
        g.insert(GazetteerKind::Province, &format!("P{r}"), None, r).unwrap();
    }
    g
}

pub fn small_scmap() -> ScMap {
    let mut m = ScMap::new();
    for (i, s) in SCS.iter().enumerate() {
        m.insert(s, if i < 2 { "Area1" } else { "Area2" }).unwrap();
    }
    m
}

/// 0..3 domestic regions, 3 foreign, 4 unresolved domestic.
pub fn address(kind: u8) -> Address {
    let (province, country) = match kind {
        0..=2 => (Some(format!("P{}", REGIONS[kind as usize])), "IT"),
        3 => (None, "FR"),
        _ => (Some("PX".to_string()), "IT"),
    };
    Address {
        institution: format!("Inst {kind}"),
        city: None,
        province,
        zip: None,
        country: country.into(),
    }
}

/// Address kinds plus, per author, a list of address indices (possibly empty).
pub fn arb_byline() -> impl Strategy<Value = (Vec<u8>, Vec<Vec<usize>>)> {
    prop::collection::vec(0u8..5, 1..5).prop_flat_map(|addrs| {
        let n = addrs.len();
        let author = prop::collection::btree_set(0..n, 0..=n.min(3))
            .prop_map(|s| s.into_iter().collect::<Vec<_>>());
        (Just(addrs), prop::collection::vec(author, 1..7))
    })
}

pub fn publication(id: &str, addrs: &[u8], authors: &[Vec<usize>], sc: usize) -> Publication {
    Publication {
        id: id.into(),
        year: 2011,
        addresses: addrs.iter().map(|&k| address(k)).collect(),
        authors: authors
            .iter()
            .enumerate()
            .map(|(i, refs)| Author {
                name: format!("Author {i}"),
                address_refs: refs.clone(),
            })
            .collect(),
        sc_codes: vec![SCS[sc % SCS.len()].into()],
    }
}

/// A small corpus mixing single, dual, excluded, foreign and unresolved pubs.
pub fn arb_corpus() -> impl Strategy<Value = Corpus> {
    (
        prop::collection::vec(arb_byline(), 2..25),
        prop::collection::vec((any::<prop::sample::Index>(), any::<prop::sample::Index>()), 0..80),
    )
        .prop_map(|(bylines, raw_edges)| {
            let n = bylines.len();
            let pubs: Vec<Publication> = bylines
                .iter()
                .enumerate()
                .map(|(i, (a, au))| publication(&format!("P{i:03}"), a, au, i))
                .collect();
            let edges: Vec<CitationEdge> = raw_edges
                .iter()
                .map(|(a, b)| (a.index(n), b.index(n)))
                .filter(|(a, b)| a != b)
                .map(|(a, b)| CitationEdge::new(format!("P{a:03}"), format!("P{b:03}")))
                .collect();
            Corpus::from_parts(pubs, edges, small_gazetteer(), small_scmap(), &LoadOptions::default())
                .unwrap()
        })
}
