//! CSV writers for every pipeline output.
//!
//! Counts stored in half-gain units are written as gains (`0.5` steps).
//! Missing index values are written as `NA`.

use std::collections::BTreeMap;
use std::io::Write;

use crate::attribution::{Classification, MadeInMap};
use crate::balance::{MaxFlowReport, PairwiseEntry, RbkfEntry, ScBalance};
use crate::corpus::{PublicationStatus, ValidationReport};
use crate::error::Result;
use crate::flows::{FlowMatrix, Gain, PercentMatrix, RegionSummary};
use crate::specialization::{BalassaMode, FieldExtremes, Orientation, SpecIndexValue};
use crate::types::{Region, ScCode};

pub const NA: &str = "NA";

/// Formats `units` counted at `units_per_gain` per gain.
pub fn format_units(units: u64, units_per_gain: u64) -> String {
    if units_per_gain <= 1 {
        units.to_string()
    } else if units.is_multiple_of(units_per_gain) {
        (units / units_per_gain).to_string()
    } else {
        format!("{}", units as f64 / units_per_gain as f64)
    }
}

fn format_signed(units: i64, units_per_gain: u64) -> String {
    let s = format_units(units.unsigned_abs(), units_per_gain);
    if units < 0 {
        format!("-{s}")
    } else {
        s
    }
}

fn format_index(value: Option<f64>) -> String {
    value.map_or_else(|| NA.to_string(), |v| format!("{v:.1}"))
}

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().has_headers(false).from_writer(out)
}

pub fn write_attribution<W: Write>(made_in: &MadeInMap, out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["pub_id", "classification", "region1", "region2", "reason"])?;
    for m in made_in.values() {
        let id = m.pub_id.as_str();
        match &m.classification {
            Classification::Single(r) => w.write_record([id, "single", r.as_str(), "", ""])?,
            Classification::Dual(a, b) => w.write_record([id, "dual", a.as_str(), b.as_str(), ""])?,
            Classification::Excluded(reason) => {
                w.write_record([id, "excluded", "", "", reason.as_str()])?
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_gains<W: Write>(gains: &[Gain], out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["cited_id", "citing_id", "producing_region", "citing_region", "intra"])?;
    for g in gains {
        w.write_record([
            g.cited_id.as_str(),
            g.citing_id.as_str(),
            g.producing_region.as_str(),
            g.citing_region.as_str(),
            if g.intra { "1" } else { "0" },
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn matrix_header(regions: &[Region]) -> Vec<&str> {
    std::iter::once("producing\\citing")
        .chain(regions.iter().map(Region::as_str))
        .collect()
}

/// Producing regions as rows, citing regions as columns.
pub fn write_matrix<W: Write>(m: &FlowMatrix, out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(matrix_header(m.regions()))?;
    for (r, region) in m.regions().iter().enumerate() {
        let mut rec = vec![region.to_string()];
        rec.extend(m.row(r).iter().map(|&c| format_units(c, m.units_per_gain())));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Long format over every SC matrix; zero cells are skipped.
pub fn write_sc_matrices<W: Write>(matrices: &BTreeMap<ScCode, FlowMatrix>, out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["sc", "producing_region", "citing_region", "gains"])?;
    for (sc, m) in matrices {
        for (r, from) in m.regions().iter().enumerate() {
            for (c, to) in m.regions().iter().enumerate() {
                let v = m.get(r, c);
                if v > 0 {
                    w.write_record([
                        sc.as_str(),
                        from.as_str(),
                        to.as_str(),
                        &format_units(v, m.units_per_gain()),
                    ])?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Row percentages at one decimal place.
pub fn write_percent_matrix<W: Write>(p: &PercentMatrix, out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(matrix_header(p.counts.regions()))?;
    for (region, row) in p.counts.regions().iter().zip(&p.percent) {
        let mut rec = vec![region.to_string()];
        rec.extend(row.iter().map(|v| format!("{v:.1}")));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn rbkf_record(e: &RbkfEntry) -> [String; 5] {
    let u = e.units_per_gain;
    [
        e.region.to_string(),
        e.sc_label().to_string(),
        format_units(e.generated, u),
        format_units(e.earned, u),
        format_signed(e.rbkf, u),
    ]
}

/// `region,sc,a,b,rbkf` where `a` is generated and `b` earned extra-regional gains.
pub fn write_rbkf<W: Write>(entries: &[RbkfEntry], out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["region", "sc", "a", "b", "rbkf"])?;
    for e in entries {
        w.write_record(rbkf_record(e))?;
    }
    w.flush()?;
    Ok(())
}

/// Per region: per-SC rows followed by one row per macro-area
/// (`sc` = `area:<name>`).
pub fn write_sc_balances<W: Write>(balances: &[ScBalance], units_per_gain: u64, out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["region", "sc", "a", "b", "rbkf"])?;
    for balance in balances {
        for e in &balance.entries {
            w.write_record(rbkf_record(e))?;
        }
        for a in &balance.area_totals {
            w.write_record([
                balance.region.to_string(),
                format!("area:{}", a.area),
                format_units(a.generated, units_per_gain),
                format_units(a.earned, units_per_gain),
                format_signed(a.rbkf, units_per_gain),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_pairwise<W: Write>(
    x: &str,
    y: &str,
    entries: &[PairwiseEntry],
    units_per_gain: u64,
    out: W,
) -> Result<()> {
    let mut w = writer(out);
    let xy = format!("{x}_to_{y}");
    let yx = format!("{y}_to_{x}");
    w.write_record(["sc", xy.as_str(), yx.as_str(), "balance"])?;
    for e in entries {
        w.write_record([
            e.sc.to_string(),
            format_units(e.x_to_y, units_per_gain),
            format_units(e.y_to_x, units_per_gain),
            format_signed(e.balance, units_per_gain),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_index_table<W: Write>(
    values: &[SpecIndexValue],
    orientation: Orientation,
    mode: BalassaMode,
    out: W,
) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["region", "sc", "orientation", "mode", "value"])?;
    for v in values {
        w.write_record([
            v.region.as_str(),
            v.sc.as_str(),
            orientation.index_name(),
            mode.as_str(),
            &format_index(v.value),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_top<W: Write>(region: &str, top: &[(ScCode, f64)], out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["region", "rank", "sc", "value"])?;
    for (i, (sc, v)) in top.iter().enumerate() {
        w.write_record([region, &(i + 1).to_string(), sc.as_str(), &format!("{v:.1}")])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_field_extremes<W: Write>(rows: &[(ScCode, Option<FieldExtremes>)], out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["sc", "max_region", "max_value", "min_region", "min_value", "tied"])?;
    for (sc, e) in rows {
        match e {
            Some(e) => w.write_record([
                sc.as_str(),
                e.max_region.as_str(),
                &format!("{:.1}", e.max_value),
                e.min_region.as_str(),
                &format!("{:.1}", e.min_value),
                if e.max_tied || e.min_tied { "1" } else { "0" },
            ])?,
            None => w.write_record([sc.as_str(), "", NA, "", NA, "0"])?,
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_region_summary<W: Write>(rows: &[RegionSummary], out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record([
        "region",
        "total_publications",
        "made_in",
        "cited",
        "benefits",
        "gains",
        "intra_gains",
        "intra_pct",
    ])?;
    for r in rows {
        let pct = r
            .intra_share()
            .map(|s| format!("{:.1}", 100.0 * *s.numer() as f64 / *s.denom() as f64));
        w.write_record([
            r.region.to_string(),
            r.total_publications.to_string(),
            r.made_in.to_string(),
            r.cited.to_string(),
            r.benefits.to_string(),
            r.gains.to_string(),
            r.intra_gains.to_string(),
            pct.unwrap_or_else(|| NA.into()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_validation<W: Write>(report: &ValidationReport, out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record([
        "pub_id",
        "status",
        "unlinked_authors",
        "unresolved_domestic_addresses",
        "half_foreign",
    ])?;
    for e in &report.entries {
        let status = match e.status {
            PublicationStatus::Ok => "ok".to_string(),
            PublicationStatus::AutoLinked => "auto_linked".to_string(),
            PublicationStatus::Excluded(r) => format!("excluded:{}", r.as_str()),
        };
        w.write_record([
            e.pub_id.to_string(),
            status,
            e.unlinked_authors.to_string(),
            e.unresolved_domestic_addresses.to_string(),
            if e.half_foreign { "1" } else { "0" }.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row per max-flow edge.
pub fn write_edges<W: Write>(report: &MaxFlowReport, out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["style", "from", "to", "tied"])?;
    for e in &report.edges {
        w.write_record([
            e.style.as_str(),
            e.from.as_str(),
            e.to.as_str(),
            if e.tied { "1" } else { "0" },
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_formatting() {
        assert_eq!(format_units(7, 1), "7");
        assert_eq!(format_units(8, 2), "4");
        assert_eq!(format_units(7, 2), "3.5");
        assert_eq!(format_signed(-7, 2), "-3.5");
        assert_eq!(format_index(None), "NA");
        assert_eq!(format_index(Some(99.2248)), "99.2");
    }

    #[test]
    fn matrix_csv() {
        let regions = [Region::new("A"), Region::new("B")];
        let m = FlowMatrix::from_rows(&regions, &[vec![1, 2], vec![0, 3]]).unwrap();
        let mut buf = Vec::new();
        write_matrix(&m, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "producing\\citing,A,B\nA,1,2\nB,0,3\n");
    }
}
