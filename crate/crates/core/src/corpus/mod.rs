//! Publication/citation data model, file loading and structural validation.

mod gazetteer;
mod scmap;
mod validate;

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{PubId, ScCode};

pub use gazetteer::{
    normalize_key, normalize_zip, resolve_region, Gazetteer, GazetteerKind, Resolution,
};
pub(crate) use gazetteer::create_file;
use gazetteer::csv_open_error;
pub use scmap::ScMap;
pub use validate::{validate_corpus, PublicationStatus, ValidationEntry, ValidationReport};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Address {
    #[serde(default)]
    pub institution: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub city: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub province: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zip: Option<String>,
    pub country: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Author {
    pub name: String,
    /// Indices into the publication's address list. Empty means unlinked.
    #[serde(default)]
    pub address_refs: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Publication {
    pub id: PubId,
    pub year: i32,
    pub addresses: Vec<Address>,
    pub authors: Vec<Author>,
    pub sc_codes: Vec<ScCode>,
}

impl Publication {
    /// A lone author without affiliation links is linked to every address.
    pub fn is_auto_linked(&self) -> bool {
        self.authors.len() == 1 && self.authors[0].address_refs.is_empty()
    }

    /// Authors without any address link, after auto-linking.
    pub fn unlinked_authors(&self) -> usize {
        if self.is_auto_linked() {
            return 0;
        }
        self.authors
            .iter()
            .filter(|a| a.address_refs.is_empty())
            .count()
    }

    /// The address indices an author counts against, after auto-linking.
    pub fn effective_refs(&self, author: usize) -> Vec<usize> {
        if self.is_auto_linked() {
            (0..self.addresses.len()).collect()
        } else {
            self.authors[author].address_refs.clone()
        }
    }

    fn check(&self, domestic_country: &str) -> std::result::Result<(), String> {
        if self.id.as_str().trim().is_empty() {
            return Err("empty publication id".into());
        }
        if self.addresses.is_empty() {
            return Err(format!("publication `{}` has no addresses", self.id));
        }
        if self.authors.is_empty() {
            return Err(format!("publication `{}` has no authors", self.id));
        }
        if self.sc_codes.is_empty() {
            return Err(format!("publication `{}` has no subject categories", self.id));
        }
        for (i, a) in self.addresses.iter().enumerate() {
            if a.country.trim().is_empty() {
                return Err(format!("publication `{}` address {i}: empty country", self.id));
            }
            let located = [&a.city, &a.province, &a.zip]
                .iter()
                .any(|f| f.as_deref().is_some_and(|s| !s.trim().is_empty()));
            if a.country.trim().eq_ignore_ascii_case(domestic_country) && !located {
                return Err(format!(
                    "publication `{}` address {i}: domestic address without city, province or zip",
                    self.id
                ));
            }
        }
        for author in &self.authors {
            let mut seen = BTreeSet::new();
            for &r in &author.address_refs {
                if r >= self.addresses.len() {
                    return Err(format!(
                        "publication `{}` author `{}`: address ref {r} out of range",
                        self.id, author.name
                    ));
                }
                if !seen.insert(r) {
                    return Err(format!(
                        "publication `{}` author `{}`: duplicate address ref {r}",
                        self.id, author.name
                    ));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CitationEdge {
    pub citing_id: PubId,
    pub cited_id: PubId,
}

impl CitationEdge {
    pub fn new(citing: impl Into<PubId>, cited: impl Into<PubId>) -> Self {
        CitationEdge {
            citing_id: citing.into(),
            cited_id: cited.into(),
        }
    }
}

/// Ingest-time settings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadOptions {
    /// ISO 3166-1 alpha-2 code of the country whose regions are analysed.
    pub domestic_country: String,
    /// Inclusive publication-year window for cited publications. Edges whose
    /// cited publication falls outside are dropped at ingest.
    pub cited_years: Option<(i32, i32)>,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            domestic_country: "IT".into(),
            cited_years: None,
        }
    }
}

/// Counters collected while assembling the corpus.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadStats {
    pub citation_rows: u64,
    pub duplicate_edges: u64,
    pub dropped_unknown_citing: u64,
    pub dropped_unknown_cited: u64,
    pub dropped_out_of_window: u64,
}

#[derive(Clone, Debug)]
pub struct CorpusPaths {
    pub publications: PathBuf,
    pub citations: PathBuf,
    pub gazetteer: PathBuf,
    pub scmap: PathBuf,
}

impl CorpusPaths {
    /// The conventional file names inside one directory.
    pub fn in_dir(dir: &Path) -> Self {
        CorpusPaths {
            publications: dir.join("publications.jsonl"),
            citations: dir.join("citations.csv"),
            gazetteer: dir.join("gazetteer.csv"),
            scmap: dir.join("scmap.csv"),
        }
    }
}

/// Immutable, validated corpus.
#[derive(Clone, Debug, Serialize)]
pub struct Corpus {
    publications: Vec<Publication>,
    #[serde(skip)]
    index: BTreeMap<PubId, usize>,
    citations: Vec<CitationEdge>,
    gazetteer: Gazetteer,
    scmap: ScMap,
    stats: LoadStats,
}

impl Corpus {
    /// Assembles a corpus from in-memory parts, applying the same rules as
    /// [`load_corpus`]: unique ids, mapped subject categories, deduplicated
    /// edges, and edges with an unknown endpoint dropped and counted.
    pub fn from_parts(
        publications: Vec<Publication>,
        citations: impl IntoIterator<Item = CitationEdge>,
        gazetteer: Gazetteer,
        scmap: ScMap,
        options: &LoadOptions,
    ) -> Result<Self> {
        let mut index = BTreeMap::new();
        for (i, p) in publications.iter().enumerate() {
            p.check(gazetteer.domestic_country())
                .map_err(Error::InvalidArgument)?;
            if let Some(sc) = p.sc_codes.iter().find(|sc| !scmap.contains(sc.as_str())) {
                return Err(Error::UnknownSc(sc.to_string()));
            }
            if index.insert(p.id.clone(), i).is_some() {
                return Err(Error::DuplicateId(p.id.to_string()));
            }
        }
        let mut stats = LoadStats::default();
        let mut edges = BTreeSet::new();
        for e in citations {
            stats.citation_rows += 1;
            if e.citing_id == e.cited_id {
                return Err(Error::InvalidArgument(format!(
                    "citation edge from `{}` to itself",
                    e.citing_id
                )));
            }
            if !index.contains_key(&e.citing_id) {
                stats.dropped_unknown_citing += 1;
                continue;
            }
            let Some(&cited) = index.get(&e.cited_id) else {
                stats.dropped_unknown_cited += 1;
                continue;
            };
            if let Some((lo, hi)) = options.cited_years {
                let year = publications[cited].year;
                if year < lo || year > hi {
                    stats.dropped_out_of_window += 1;
                    continue;
                }
            }
            if !edges.insert(e) {
                stats.duplicate_edges += 1;
            }
        }
        Ok(Corpus {
            publications,
            index,
            citations: edges.into_iter().collect(),
            gazetteer,
            scmap,
            stats,
        })
    }

    pub fn publications(&self) -> &[Publication] {
        &self.publications
    }

    pub fn publication(&self, id: &str) -> Option<&Publication> {
        self.index.get(id).map(|&i| &self.publications[i])
    }

    /// Deduplicated edges, sorted by (citing, cited).
    pub fn citations(&self) -> &[CitationEdge] {
        &self.citations
    }

    pub fn gazetteer(&self) -> &Gazetteer {
        &self.gazetteer
    }

    pub fn scmap(&self) -> &ScMap {
        &self.scmap
    }

    pub fn stats(&self) -> &LoadStats {
        &self.stats
    }

    pub fn to_canonical_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn write_publications<W: Write>(&self, mut out: W) -> Result<()> {
        for p in &self.publications {
            serde_json::to_writer(&mut out, p)?;
            out.write_all(b"\n")
                .map_err(|e| Error::io("<publications>", e))?;
        }
        Ok(())
    }

    pub fn write_citations<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["citing_id", "cited_id"])?;
        for e in &self.citations {
            w.write_record([e.citing_id.as_str(), e.cited_id.as_str()])?;
        }
        w.flush().map_err(|e| Error::io("<citations>", e))?;
        Ok(())
    }

    /// Writes all four input files into `dir` using [`CorpusPaths::in_dir`] names.
    pub fn write_to_dir(&self, dir: &Path) -> Result<CorpusPaths> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let paths = CorpusPaths::in_dir(dir);
        self.write_publications(BufWriter::new(create_file(&paths.publications)?))?;
        self.write_citations(BufWriter::new(create_file(&paths.citations)?))?;
        self.gazetteer
            .write(BufWriter::new(create_file(&paths.gazetteer)?))?;
        self.scmap.write(BufWriter::new(create_file(&paths.scmap)?))?;
        Ok(paths)
    }
}

fn read_publications(path: &Path, options: &LoadOptions, scmap: &ScMap) -> Result<Vec<Publication>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut pubs = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line_no = i as u64 + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let p: Publication = serde_json::from_str(&line)
            .map_err(|e| Error::malformed(path, line_no, e.to_string()))?;
        p.check(&options.domestic_country)
            .map_err(|m| Error::malformed(path, line_no, m))?;
        if let Some(sc) = p.sc_codes.iter().find(|sc| !scmap.contains(sc.as_str())) {
            return Err(Error::malformed(
                path,
                line_no,
                format!("unknown subject category `{sc}`"),
            ));
        }
        if !seen.insert(p.id.clone()) {
            return Err(Error::DuplicateId(p.id.to_string()));
        }
        pubs.push(p);
    }
    Ok(pubs)
}

#[derive(Deserialize)]
struct CitationRow {
    citing_id: String,
    cited_id: String,
}

fn read_citations(path: &Path) -> Result<Vec<CitationEdge>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_open_error(path, e))?;
    let headers = reader.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["citing_id", "cited_id"] {
        return Err(Error::malformed(
            path,
            1,
            "expected header `citing_id,cited_id`",
        ));
    }
    let mut edges = Vec::new();
    for (i, row) in reader.deserialize::<CitationRow>().enumerate() {
        let line = i as u64 + 2;
        let row = row.map_err(|e| Error::malformed(path, line, e.to_string()))?;
        if row.citing_id.is_empty() || row.cited_id.is_empty() {
            return Err(Error::malformed(path, line, "empty publication id"));
        }
        if row.citing_id == row.cited_id {
            return Err(Error::malformed(path, line, "publication cites itself"));
        }
        edges.push(CitationEdge::new(row.citing_id, row.cited_id));
    }
    Ok(edges)
}

/// Loads and validates the four input files.
pub fn load_corpus(paths: &CorpusPaths, options: &LoadOptions) -> Result<Corpus> {
    let gazetteer = Gazetteer::load(&paths.gazetteer, &options.domestic_country)?;
    let scmap = ScMap::load(&paths.scmap)?;
    let publications = read_publications(&paths.publications, options, &scmap)?;
    let edges = read_citations(&paths.citations)?;
    Corpus::from_parts(publications, edges, gazetteer, scmap, options)
}
