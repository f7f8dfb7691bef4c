use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::gazetteer::csv_open_error;
use crate::error::{Error, Result};
use crate::types::ScCode;

/// Subject category to macro-area assignment. Each SC belongs to exactly one area.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScMap {
    areas: BTreeMap<ScCode, String>,
}

#[derive(Deserialize)]
struct ScRow {
    sc_code: String,
    macro_area: String,
}

impl ScMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, sc: &str, area: &str) -> std::result::Result<(), String> {
        let sc = ScCode::new(sc.trim());
        match self.areas.get(&sc) {
            Some(prev) if prev != area => Err(format!(
                "subject category `{sc}` assigned to both `{prev}` and `{area}`"
            )),
            _ => {
                self.areas.insert(sc, area.trim().to_owned());
                Ok(())
            }
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| csv_open_error(path, e))?;
        let mut map = ScMap::new();
        for (i, row) in reader.deserialize::<ScRow>().enumerate() {
            let line = i as u64 + 2;
            let row = row.map_err(|e| Error::malformed(path, line, e.to_string()))?;
            if row.sc_code.is_empty() || row.macro_area.is_empty() {
                return Err(Error::malformed(path, line, "empty sc_code or macro_area"));
            }
            map.insert(&row.sc_code, &row.macro_area)
                .map_err(|m| Error::malformed(path, line, m))?;
        }
        Ok(map)
    }

    pub fn write<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["sc_code", "macro_area"])?;
        for (sc, area) in &self.areas {
            w.write_record([sc.as_str(), area])?;
        }
        w.flush().map_err(|e| Error::io("<scmap>", e))?;
        Ok(())
    }

    pub fn area(&self, sc: &str) -> Option<&str> {
        self.areas.get(sc).map(String::as_str)
    }

    pub fn contains(&self, sc: &str) -> bool {
        self.areas.contains_key(sc)
    }

    /// All SC codes in lexicographic order.
    pub fn codes(&self) -> impl Iterator<Item = &ScCode> {
        self.areas.keys()
    }

    pub fn len(&self) -> usize {
        self.areas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.areas.is_empty()
    }

    /// Distinct macro-areas in lexicographic order.
    pub fn areas(&self) -> Vec<&str> {
        let mut v: Vec<&str> = self.areas.values().map(String::as_str).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn members(&self, area: &str) -> Vec<&ScCode> {
        self.areas
            .iter()
            .filter(|(_, a)| a.as_str() == area)
            .map(|(sc, _)| sc)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_multi_assignment() {
        let mut m = ScMap::new();
        m.insert("Virology", "Biomedical research").unwrap();
        m.insert("Virology", "Biomedical research").unwrap();
        assert!(m.insert("Virology", "Biology").is_err());
        assert_eq!(m.area("Virology"), Some("Biomedical research"));
        assert_eq!(m.members("Biomedical research").len(), 1);
    }
}
