use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

use super::Address;
use crate::error::{Error, Result};
use crate::types::Region;

/// Lowercases, strips diacritics and collapses internal whitespace.
pub fn normalize_key(raw: &str) -> String {
    let stripped: String = raw
        .nfd()
        .filter(|c| !is_combining_mark(*c))
        .flat_map(char::to_lowercase)
        .collect();
    stripped.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Normalizes a postal code, dropping a leading country prefix such as `I-`.
pub fn normalize_zip(raw: &str) -> String {
    let trimmed = raw.trim();
    let body = match trimmed.split_once('-') {
        Some((prefix, rest))
            if !prefix.is_empty() && prefix.chars().all(|c| c.is_ascii_alphabetic()) =>
        {
            rest
        }
        _ => trimmed,
    };
    normalize_key(body).replace(' ', "")
}

/// Outcome of mapping one address to a region.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Resolution {
    Domestic(Region),
    Foreign,
    Unresolved,
}

impl Resolution {
    pub fn region(&self) -> Option<&Region> {
        match self {
            Resolution::Domestic(r) => Some(r),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GazetteerKind {
    Zip,
    City,
    Province,
}

impl GazetteerKind {
    fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "zip" => Some(GazetteerKind::Zip),
            "city" => Some(GazetteerKind::City),
            "province" => Some(GazetteerKind::Province),
            _ => None,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            GazetteerKind::Zip => "zip",
            GazetteerKind::City => "city",
            GazetteerKind::Province => "province",
        }
    }
}

/// Lookup tables from postal code, city+province and province to region.
///
/// Keys are stored normalized. The region set keeps first-insertion order and
/// fixes the row/column order of every flow matrix built on top of it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gazetteer {
    domestic_country: String,
    regions: Vec<Region>,
    zip: BTreeMap<String, Region>,
    #[serde(with = "city_entries")]
    city: BTreeMap<(String, String), Region>,
    province: BTreeMap<String, Region>,
}

/// JSON objects need string keys, so the city table is a list of entries.
mod city_entries {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::types::Region;

    #[derive(Serialize, Deserialize)]
    struct Entry {
        city: String,
        province: String,
        region: Region,
    }

    pub fn serialize<S: Serializer>(
        map: &BTreeMap<(String, String), Region>,
        s: S,
    ) -> Result<S::Ok, S::Error> {
        let entries: Vec<Entry> = map
            .iter()
            .map(|((city, province), region)| Entry {
                city: city.clone(),
                province: province.clone(),
                region: region.clone(),
            })
            .collect();
        entries.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> Result<BTreeMap<(String, String), Region>, D::Error> {
        let entries = Vec::<Entry>::deserialize(d)?;
        Ok(entries
            .into_iter()
            .map(|e| ((e.city, e.province), e.region))
            .collect())
    }
}

#[derive(Deserialize)]
struct GazetteerRow {
    kind: String,
    key1: String,
    #[serde(default)]
    key2: Option<String>,
    region: String,
}

impl Gazetteer {
    pub fn new(domestic_country: &str) -> Self {
        Gazetteer {
            domestic_country: domestic_country.trim().to_ascii_uppercase(),
            regions: Vec::new(),
            zip: BTreeMap::new(),
            city: BTreeMap::new(),
            province: BTreeMap::new(),
        }
    }

    pub fn domestic_country(&self) -> &str {
        &self.domestic_country
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn region_index(&self, region: &str) -> Option<usize> {
        self.regions.iter().position(|r| r.as_str() == region)
    }

    pub fn contains_region(&self, region: &str) -> bool {
        self.region_index(region).is_some()
    }

    /// Registers a region without any lookup key. Order of first registration
    /// is the region order.
    pub fn add_region(&mut self, region: &str) -> Region {
        if let Some(r) = self.regions.iter().find(|r| r.as_str() == region) {
            return r.clone();
        }
        let r = Region::new(region);
        self.regions.push(r.clone());
        r
    }

    /// Adds one mapping. A key already mapped to a different region is an error.
    pub fn insert(
        &mut self,
        kind: GazetteerKind,
        key1: &str,
        key2: Option<&str>,
        region: &str,
    ) -> std::result::Result<(), String> {
        let region = Region::new(region.trim());
        let conflict = |prev: &Region| {
            Err(format!(
                "{} key `{}` mapped to both `{}` and `{}`",
                kind.as_str(),
                key1,
                prev,
                region
            ))
        };
        match kind {
            GazetteerKind::Zip => {
                let key = normalize_zip(key1);
                if key.is_empty() {
                    return Err("empty zip key".into());
                }
                if let Some(prev) = self.zip.get(&key).filter(|p| **p != region) {
                    return conflict(prev);
                }
                self.zip.insert(key, region.clone());
            }
            GazetteerKind::City => {
                let key = (
                    normalize_key(key1),
                    key2.map(normalize_key).unwrap_or_default(),
                );
                if key.0.is_empty() {
                    return Err("empty city key".into());
                }
                if let Some(prev) = self.city.get(&key).filter(|p| **p != region) {
                    return conflict(prev);
                }
                self.city.insert(key, region.clone());
            }
            GazetteerKind::Province => {
                let key = normalize_key(key1);
                if key.is_empty() {
                    return Err("empty province key".into());
                }
                if let Some(prev) = self.province.get(&key).filter(|p| **p != region) {
                    return conflict(prev);
                }
                self.province.insert(key, region.clone());
            }
        }
        self.add_region(region.as_str());
        Ok(())
    }

    pub fn load(path: &Path, domestic_country: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| csv_open_error(path, e))?;
        let mut gaz = Gazetteer::new(domestic_country);
        for (i, row) in reader.deserialize::<GazetteerRow>().enumerate() {
            let line = i as u64 + 2;
            let row = row.map_err(|e| Error::malformed(path, line, e.to_string()))?;
            let kind = GazetteerKind::parse(&row.kind).ok_or_else(|| {
                Error::malformed(path, line, format!("unknown gazetteer kind `{}`", row.kind))
            })?;
            if row.region.is_empty() {
                return Err(Error::malformed(path, line, "empty region"));
            }
            let key2 = row.key2.as_deref().filter(|s| !s.is_empty());
            gaz.insert(kind, &row.key1, key2, &row.region)
                .map_err(|m| Error::malformed(path, line, m))?;
        }
        Ok(gaz)
    }

    /// Writes the gazetteer back in its file format (normalized keys).
    pub fn write<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["kind", "key1", "key2", "region"])?;
        for (k, r) in &self.zip {
            w.write_record(["zip", k, "", r.as_str()])?;
        }
        for ((c, p), r) in &self.city {
            w.write_record(["city", c, p, r.as_str()])?;
        }
        for (k, r) in &self.province {
            w.write_record(["province", k, "", r.as_str()])?;
        }
        w.flush().map_err(|e| Error::io("<gazetteer>", e))?;
        Ok(())
    }

    fn lookup(&self, address: &Address) -> Option<&Region> {
        if let Some(zip) = address.zip.as_deref() {
            if let Some(r) = self.zip.get(&normalize_zip(zip)) {
                return Some(r);
            }
        }
        let province = address.province.as_deref().map(normalize_key);
        if let Some(city) = address.city.as_deref() {
            let city = normalize_key(city);
            let key = (city, province.clone().unwrap_or_default());
            if let Some(r) = self.city.get(&key) {
                return Some(r);
            }
            if province.is_some() {
                if let Some(r) = self.city.get(&(key.0, String::new())) {
                    return Some(r);
                }
            }
        }
        province.and_then(|p| self.province.get(&p))
    }
}

pub(crate) fn csv_open_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::malformed(path, 0, format!("{other:?}")),
    }
}

pub(crate) fn create_file(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| Error::io(path, e))
}

/// Maps an address to its region.
///
/// Non-domestic addresses are [`Resolution::Foreign`] without any lookup.
/// Domestic addresses try zip, then city+province, then province; the first
/// hit wins.
pub fn resolve_region(address: &Address, gazetteer: &Gazetteer) -> Resolution {
    if !address
        .country
        .trim()
        .eq_ignore_ascii_case(&gazetteer.domestic_country)
    {
        return Resolution::Foreign;
    }
    match gazetteer.lookup(address) {
        Some(r) => Resolution::Domestic(r.clone()),
        None => Resolution::Unresolved,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaz() -> Gazetteer {
        let mut g = Gazetteer::new("IT");
        g.insert(GazetteerKind::Zip, "00044", None, "Latium").unwrap();
        g.insert(GazetteerKind::City, "Frascati", Some("RM"), "Latium")
            .unwrap();
        g.insert(GazetteerKind::City, "Forlì", None, "Emilia Romagna")
            .unwrap();
        g.insert(GazetteerKind::Province, "PI", None, "Tuscany").unwrap();
        g.insert(GazetteerKind::Zip, "53100", None, "Tuscany").unwrap();
        g
    }

    fn addr(city: Option<&str>, province: Option<&str>, zip: Option<&str>, country: &str) -> Address {
        Address {
            institution: "x".into(),
            city: city.map(Into::into),
            province: province.map(Into::into),
            zip: zip.map(Into::into),
            country: country.into(),
        }
    }

    #[test]
    fn normalization() {
        assert_eq!(normalize_key("  Forlì   Cesena "), "forli cesena");
        assert_eq!(normalize_key("VALLE D’AOSTA"), "valle d’aosta");
        assert_eq!(normalize_zip("I-00044"), "00044");
        assert_eq!(normalize_zip(" 00044 "), "00044");
        assert_eq!(normalize_zip("CA 92697"), "ca92697");
    }

    #[test]
    fn frascati_resolves_to_latium() {
        let a = addr(Some("Frascati"), Some("RM"), Some("I-00044"), "IT");
        assert_eq!(resolve_region(&a, &gaz()), Resolution::Domestic("Latium".into()));
        let a = addr(Some("FRASCATI"), Some("rm"), None, "it");
        assert_eq!(resolve_region(&a, &gaz()), Resolution::Domestic("Latium".into()));
    }

    #[test]
    fn foreign_and_unresolved() {
        let g = gaz();
        assert_eq!(
            resolve_region(&addr(Some("Hangzhou"), None, Some("310027"), "CN"), &g),
            Resolution::Foreign
        );
        assert_eq!(
            resolve_region(&addr(Some("Nowhere"), Some("ZZ"), None, "IT"), &g),
            Resolution::Unresolved
        );
    }

    #[test]
    fn precedence_zip_over_city_over_province() {
        let g = gaz();
        // zip says Tuscany, city says Latium
        let a = addr(Some("Frascati"), Some("RM"), Some("53100"), "IT");
        assert_eq!(resolve_region(&a, &g), Resolution::Domestic("Tuscany".into()));
        // city beats province
        let a = addr(Some("Frascati"), Some("RM"), None, "IT");
        assert_eq!(resolve_region(&a, &g), Resolution::Domestic("Latium".into()));
        let a = addr(Some("Unknown"), Some("PI"), None, "IT");
        assert_eq!(resolve_region(&a, &g), Resolution::Domestic("Tuscany".into()));
        // city keyed without province matches any province
        let a = addr(Some("Forli"), Some("FC"), None, "IT");
        assert_eq!(resolve_region(&a, &g), Resolution::Domestic("Emilia Romagna".into()));
    }

    #[test]
    fn conflicting_keys_rejected() {
        let mut g = gaz();
        assert!(g.insert(GazetteerKind::Zip, "00044", None, "Tuscany").is_err());
        assert!(g.insert(GazetteerKind::Zip, "I-00044", None, "Latium").is_ok());
    }

    #[test]
    fn region_order_is_first_appearance() {
        let g = gaz();
        let names: Vec<_> = g.regions().iter().map(|r| r.as_str()).collect();
        assert_eq!(names, ["Latium", "Emilia Romagna", "Tuscany"]);
    }
}
