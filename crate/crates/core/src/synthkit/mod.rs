//! Deterministic synthetic corpora with planted regional structure.
//!
//! The generator draws from a ChaCha8 stream seeded by the config, so the same
//! config yields byte-identical files on every platform. Alongside the corpus
//! it records the intended made-in classification of each publication and
//! the intended gains of each citation, computed from the planted author
//! locations rather than from the addresses.

mod oracle;

use std::collections::{BTreeMap, BTreeSet};
use std::io::BufWriter;
use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Poisson;
use serde::{Deserialize, Serialize};

use crate::attribution::{Classification, ExclusionReason};
use crate::corpus::{
    create_file, Address, Author, CitationEdge, Corpus, CorpusPaths, Gazetteer, GazetteerKind,
    LoadOptions, Publication, ScMap,
};
use crate::error::{Error, Result};
use crate::flows::Gain;
use crate::types::{PubId, Region, ScCode};

pub use oracle::{brute_force_gains, brute_force_made_in, brute_force_region_summary};

/// Name of the only supported random stream.
pub const RNG_NAME: &str = "chacha8";

const FOREIGN_COUNTRIES: [&str; 4] = ["US", "DE", "FR", "CN"];
const DOMESTIC_COUNTRY: &str = "IT";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuthorCount {
    pub min: u32,
    pub max: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    pub rng: String,
    pub seed: u64,
    pub n_regions: usize,
    pub n_pubs: usize,
    /// Authors per publication, uniform on `min..=max`.
    pub authors_per_pub: AuthorCount,
    /// Probability that an author carries a second affiliation.
    pub multi_affiliation_prob: f64,
    pub foreign_author_prob: f64,
    /// Probability that a domestic affiliation lies in a random region rather
    /// than the publication's home region.
    pub cross_region_prob: f64,
    /// Probability that one author of a multi-author publication is unlinked.
    pub unlinked_prob: f64,
    pub n_scs: usize,
    /// Expected citations received per publication (Poisson).
    pub citation_density: f64,
    /// Probability that a citing publication's region set includes the cited
    /// publication's made-in region.
    pub locality: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            rng: RNG_NAME.into(),
            seed: 1,
            n_regions: 5,
            n_pubs: 500,
            authors_per_pub: AuthorCount { min: 1, max: 6 },
            multi_affiliation_prob: 0.15,
            foreign_author_prob: 0.15,
            cross_region_prob: 0.2,
            unlinked_prob: 0.03,
            n_scs: 10,
            citation_density: 3.0,
            locality: 0.5,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.rng != RNG_NAME {
            return bad(format!("unsupported rng `{}` (only `{RNG_NAME}`)", self.rng));
        }
        if self.n_regions < 2 {
            return bad("n_regions must be at least 2".into());
        }
        if self.n_pubs == 0 || self.n_scs == 0 {
            return bad("n_pubs and n_scs must be positive".into());
        }
        if self.authors_per_pub.min == 0 || self.authors_per_pub.min > self.authors_per_pub.max {
            return bad("authors_per_pub needs 1 <= min <= max".into());
        }
        for (name, p) in [
            ("multi_affiliation_prob", self.multi_affiliation_prob),
            ("foreign_author_prob", self.foreign_author_prob),
            ("cross_region_prob", self.cross_region_prob),
            ("unlinked_prob", self.unlinked_prob),
            ("locality", self.locality),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} = {p} outside [0, 1]"));
            }
        }
        if !(self.citation_density >= 0.0 && self.citation_density.is_finite()) {
            return bad("citation_density must be a finite non-negative number".into());
        }
        Ok(())
    }
}

/// What the generator intended.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub made_in: BTreeMap<PubId, Classification>,
    /// Sorted the same way as the flows engine output.
    pub gains: Vec<Gain>,
}

#[derive(Clone, Debug)]
pub struct SyntheticCorpus {
    pub config: GeneratorConfig,
    pub corpus: Corpus,
    pub truth: GroundTruth,
}

impl SyntheticCorpus {
    /// Writes the four corpus files, `ground_truth.json` and `generator.json`.
    pub fn write_to_dir(&self, dir: &Path) -> Result<CorpusPaths> {
        let paths = self.corpus.write_to_dir(dir)?;
        let truth = dir.join("ground_truth.json");
        serde_json::to_writer_pretty(BufWriter::new(create_file(&truth)?), &self.truth)?;
        let cfg = dir.join("generator.json");
        serde_json::to_writer_pretty(BufWriter::new(create_file(&cfg)?), &self.config)?;
        Ok(paths)
    }
}

pub fn region_name(r: usize) -> String {
    format!("Region{r:02}")
}

pub fn sc_name(j: usize) -> String {
    format!("SC{j:02}")
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Location {
    Domestic(usize),
    Foreign(usize),
}

struct Planted {
    /// Authors' locations; `None` for an unlinked author.
    authors: Vec<Option<Vec<Location>>>,
}

impl Planted {
    fn domestic_regions(&self) -> BTreeSet<usize> {
        self.authors
            .iter()
            .flatten()
            .flatten()
            .filter_map(|l| match l {
                Location::Domestic(r) => Some(*r),
                Location::Foreign(_) => None,
            })
            .collect()
    }

    /// Made-in rule on planted locations, in half-author units (every author
    /// has at most two affiliations).
    fn made_in(&self) -> Classification {
        let n = self.authors.len() as u64;
        if n > 1 && self.authors.iter().any(Option::is_none) {
            return Classification::Excluded(ExclusionReason::UnlinkedAuthors);
        }
        let total = 2 * n;
        let mut foreign = 0;
        let mut weight = BTreeMap::<usize, u64>::new();
        for locs in self.authors.iter().flatten() {
            let each = 2 / locs.len() as u64;
            for l in locs {
                match l {
                    Location::Domestic(r) => *weight.entry(*r).or_default() += each,
                    Location::Foreign(_) => foreign += each,
                }
            }
        }
        if 2 * foreign > total {
            return Classification::Excluded(ExclusionReason::ForeignMajority);
        }
        let hits: Vec<(usize, u64)> = weight.into_iter().filter(|&(_, w)| 2 * w >= total).collect();
        match hits.as_slice() {
            [(r, _)] => Classification::Single(Region::new(region_name(*r))),
            [(a, wa), (b, wb)] if 2 * wa == total && 2 * wb == total => {
                Classification::Dual(Region::new(region_name(*a)), Region::new(region_name(*b)))
            }
            _ => Classification::Excluded(ExclusionReason::NoMajorityRegion),
        }
    }
}

fn gazetteer(n_regions: usize) -> Gazetteer {
    let mut g = Gazetteer::new(DOMESTIC_COUNTRY);
    for r in 0..n_regions {
        let name = region_name(r);
        let insert = |g: &mut Gazetteer, kind, k1: &str, k2: Option<&str>| {
            g.insert(kind, k1, k2, &name).expect("synthetic gazetteer keys are unique");
        };
        insert(&mut g, GazetteerKind::Zip, &format!("{:02}100", r + 10), None);
        insert(&mut g, GazetteerKind::City, &format!("City {r}"), Some(&format!("P{r}")));
        insert(&mut g, GazetteerKind::Province, &format!("P{r}"), None);
    }
    g
}

fn scmap(n_scs: usize) -> ScMap {
    let mut m = ScMap::new();
    for j in 0..n_scs {
        m.insert(&sc_name(j), &format!("Area{:02}", j % 13))
            .expect("synthetic SC codes are unique");
    }
    m
}

fn address(loc: Location, rng: &mut ChaCha8Rng) -> Address {
    match loc {
        Location::Foreign(c) => Address {
            institution: format!("Foreign Inst {c}"),
            city: Some(format!("Foreign City {c}")),
            province: None,
            zip: Some(format!("{}", 90000 + c)),
            country: FOREIGN_COUNTRIES[c].into(),
        },
        Location::Domestic(r) => {
            let mut a = Address {
                institution: format!("Univ {}", region_name(r)),
                city: None,
                province: None,
                zip: None,
                country: DOMESTIC_COUNTRY.into(),
            };
            // exercise every gazetteer route
            match rng.random_range(0..4) {
                0 => a.zip = Some(format!("{:02}100", r + 10)),
                1 => a.zip = Some(format!("I-{:02}100", r + 10)),
                2 => {
                    a.city = Some(format!("CITY  {r}"));
                    a.province = Some(format!("p{r}"));
                }
                _ => a.province = Some(format!("P{r}")),
            }
            a
        }
    }
}

struct Sampler<'a> {
    config: &'a GeneratorConfig,
    regions: WeightedIndex<f64>,
}

impl Sampler<'_> {
    fn location(&self, home: usize, rng: &mut ChaCha8Rng) -> Location {
        if rng.random_bool(self.config.foreign_author_prob) {
            Location::Foreign(rng.random_range(0..FOREIGN_COUNTRIES.len()))
        } else if rng.random_bool(self.config.cross_region_prob) {
            Location::Domestic(rng.random_range(0..self.config.n_regions))
        } else {
            Location::Domestic(home)
        }
    }

    fn publication(&self, i: usize, rng: &mut ChaCha8Rng) -> (Publication, Planted) {
        let c = self.config;
        let home = self.regions.sample(rng);
        let n_auth = rng.random_range(c.authors_per_pub.min..=c.authors_per_pub.max) as usize;
        let mut planted = Vec::with_capacity(n_auth);
        for _ in 0..n_auth {
            let first = self.location(home, rng);
            let mut locs = vec![first];
            if rng.random_bool(c.multi_affiliation_prob) {
                let second = self.location(home, rng);
                if second != first {
                    locs.push(second);
                }
            }
            planted.push(Some(locs));
        }
        if n_auth > 1 && rng.random_bool(c.unlinked_prob) {
            let k = rng.random_range(0..n_auth);
            planted[k] = None;
        }
        let mut order: Vec<Location> = Vec::new();
        for l in planted.iter().flatten().flatten() {
            if !order.contains(l) {
                order.push(*l);
            }
        }
        if order.is_empty() {
            // only possible for an unlinked author list; give it one address
            order.push(Location::Domestic(home));
        }
        let addresses = order.iter().map(|&l| address(l, rng)).collect();
        let authors = planted
            .iter()
            .enumerate()
            .map(|(a, locs)| Author {
                name: format!("Author {i}-{a}"),
                address_refs: locs
                    .iter()
                    .flatten()
                    .map(|l| order.iter().position(|o| o == l).expect("location indexed"))
                    .collect(),
            })
            .collect();
        let mut sc_codes = vec![if rng.random_bool(0.5) {
            ScCode::new(sc_name(home % c.n_scs))
        } else {
            ScCode::new(sc_name(rng.random_range(0..c.n_scs)))
        }];
        if c.n_scs > 1 && rng.random_bool(0.3) {
            let extra = ScCode::new(sc_name(rng.random_range(0..c.n_scs)));
            if !sc_codes.contains(&extra) {
                sc_codes.push(extra);
            }
        }
        let publication = Publication {
            id: PubId::new(format!("SYN{i:06}")),
            year: 2010 + (i % 3) as i32,
            addresses,
            authors,
            sc_codes,
        };
        (publication, Planted { authors: planted })
    }
}

fn truth_regions(c: &Classification) -> Vec<&Region> {
    match c {
        Classification::Single(r) => vec![r],
        Classification::Dual(a, b) => vec![a, b],
        Classification::Excluded(_) => vec![],
    }
}

/// Generates a corpus and the planted ground truth.
pub fn generate_corpus(config: &GeneratorConfig) -> Result<SyntheticCorpus> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let weights: Vec<f64> = (0..config.n_regions)
        .map(|r| 1.0 / ((r + 1) as f64).powf(1.5))
        .collect();
    let sampler = Sampler {
        config,
        regions: WeightedIndex::new(&weights).expect("positive weights"),
    };
    let mut publications = Vec::with_capacity(config.n_pubs);
    let mut planted = Vec::with_capacity(config.n_pubs);
    for i in 0..config.n_pubs {
        let (p, t) = sampler.publication(i, &mut rng);
        publications.push(p);
        planted.push(t);
    }
    let made_in: Vec<Classification> = planted.iter().map(Planted::made_in).collect();
    let domestic: Vec<BTreeSet<usize>> = planted.iter().map(Planted::domestic_regions).collect();

    let region_of = |name: &Region| -> usize {
        (0..config.n_regions)
            .find(|&r| region_name(r) == name.as_str())
            .expect("planted region")
    };
    let mut edges = BTreeSet::new();
    if config.citation_density > 0.0 {
        let poisson = Poisson::new(config.citation_density)
            .map_err(|e| Error::InvalidArgument(format!("citation_density: {e}")))?;
        let all: Vec<usize> = (0..config.n_pubs).collect();
        for (cited, planted) in made_in.iter().enumerate() {
            let q = poisson.sample(&mut rng) as usize;
            let producing: BTreeSet<usize> =
                truth_regions(planted).into_iter().map(region_of).collect();
            let (local, distant): (Vec<usize>, Vec<usize>) = all
                .iter()
                .copied()
                .filter(|&p| p != cited)
                .partition(|&p| !domestic[p].is_disjoint(&producing));
            for _ in 0..q {
                let pool = if producing.is_empty() {
                    &all
                } else if rng.random_bool(config.locality) {
                    &local
                } else {
                    &distant
                };
                let pool = if pool.is_empty() { &all } else { pool };
                let citing = pool[rng.random_range(0..pool.len())];
                if citing != cited {
                    edges.insert((citing, cited));
                }
            }
        }
    }

    let mut gains = Vec::new();
    for &(citing, cited) in &edges {
        let producing = truth_regions(&made_in[cited]);
        let dual = producing.len() == 2;
        for p in &producing {
            for &c in &domestic[citing] {
                let c = Region::new(region_name(c));
                gains.push(Gain {
                    cited_id: publications[cited].id.clone(),
                    citing_id: publications[citing].id.clone(),
                    producing_region: (*p).clone(),
                    intra: **p == c,
                    citing_region: c,
                    dual,
                });
            }
        }
    }
    gains.sort();

    let truth = GroundTruth {
        made_in: publications
            .iter()
            .zip(made_in)
            .map(|(p, m)| (p.id.clone(), m))
            .collect(),
        gains,
    };
    let citations: Vec<CitationEdge> = edges
        .into_iter()
        .map(|(citing, cited)| {
            CitationEdge::new(publications[citing].id.clone(), publications[cited].id.clone())
        })
        .collect();
    let corpus = Corpus::from_parts(
        publications,
        citations,
        gazetteer(config.n_regions),
        scmap(config.n_scs),
        &LoadOptions::default(),
    )?;
    Ok(SyntheticCorpus {
        config: config.clone(),
        corpus,
        truth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attribution::{attribute_corpus, half};
    use crate::flows::compute_gains;

    fn small(seed: u64) -> GeneratorConfig {
        GeneratorConfig {
            seed,
            n_pubs: 200,
            ..GeneratorConfig::default()
        }
    }

    #[test]
    fn same_seed_same_corpus() {
        let a = generate_corpus(&small(7)).unwrap();
        let b = generate_corpus(&small(7)).unwrap();
        assert_eq!(a.corpus.to_canonical_json().unwrap(), b.corpus.to_canonical_json().unwrap());
        assert_eq!(a.truth, b.truth);
        let c = generate_corpus(&small(8)).unwrap();
        assert_ne!(a.corpus.to_canonical_json().unwrap(), c.corpus.to_canonical_json().unwrap());
    }

    #[test]
    fn planted_truth_matches_pipeline() {
        for seed in 0..5 {
            let s = generate_corpus(&small(seed)).unwrap();
            let made_in = attribute_corpus(&s.corpus, half()).unwrap();
            for (id, m) in &made_in {
                assert_eq!(&m.classification, &s.truth.made_in[id], "{id}");
            }
            assert_eq!(compute_gains(&s.corpus, &made_in), s.truth.gains);
            assert_eq!(brute_force_gains(&s.corpus), s.truth.gains);
        }
    }

    fn local_config(locality: f64) -> GeneratorConfig {
        GeneratorConfig {
            n_pubs: 300,
            n_regions: 3,
            cross_region_prob: 0.0,
            locality,
            ..GeneratorConfig::default()
        }
    }

    #[test]
    fn full_locality_is_all_intra() {
        let s = generate_corpus(&local_config(1.0)).unwrap();
        assert!(!s.truth.gains.is_empty());
        assert!(s.truth.gains.iter().all(|g| g.intra));
    }

    #[test]
    fn zero_locality_has_no_intra() {
        let s = generate_corpus(&local_config(0.0)).unwrap();
        assert!(!s.truth.gains.is_empty());
        assert!(s.truth.gains.iter().all(|g| !g.intra));
    }

    #[test]
    fn rejects_bad_configs() {
        let bad = [
            GeneratorConfig { n_regions: 1, ..GeneratorConfig::default() },
            GeneratorConfig { n_scs: 0, ..GeneratorConfig::default() },
            GeneratorConfig { locality: 1.5, ..GeneratorConfig::default() },
            GeneratorConfig { rng: "pcg".into(), ..GeneratorConfig::default() },
            GeneratorConfig {
                authors_per_pub: AuthorCount { min: 3, max: 2 },
                ..GeneratorConfig::default()
            },
        ];
        for c in bad {
            assert!(generate_corpus(&c).is_err());
        }
    }
}
