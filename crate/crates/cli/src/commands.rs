//! Subcommand implementations. Each one loads the corpus, runs the stages it
//! needs, writes its exports and a manifest into the output directory.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::Context;
use kflow::attribution::{attribution_counts, AttributionCounts};
use kflow::balance::{pearson, rbkf_sc_summed, rest_of_country, to_dot, RestOfCountry};
use kflow::corpus::PublicationStatus;
use kflow::export;
use kflow::flows::{flow_totals, FlowTotals};
use kflow::specialization::{field_extremes, index_table};
use kflow::synthkit::{generate_corpus, GeneratorConfig};
use kflow::{
    attribute_corpus, compute_gains_parallel, flow_matrix, load_corpus, max_flow_edges, rbkf_by_sc,
    rbkf_overall, rbkf_pairwise, region_summary, row_percentages, sc_flow_matrices, spearman,
    top_specializations, validate_corpus, Corpus, Error, FlowMatrix, Gain, GainTensor, MadeInMap,
    MaxFlowReport, Orientation, RbkfEntry, RegionSummary, ScCode,
};
use serde::Serialize;

use crate::config::Resolved;
use crate::output::{config_hash, digest_inputs, sha256_hex, Manifest, Outputs};

pub const TOTAL_PUBLICATIONS_NOTE: &str =
    "total_publications counts publications with at least one address in the region";

/// Loaded corpus plus the attribution stage, shared by every command.
pub struct Session {
    pub cfg: Resolved,
    pub corpus: Corpus,
    pub made_in: MadeInMap,
    pub out: Outputs,
    counts: BTreeMap<String, u64>,
    warnings: Vec<String>,
}

impl Session {
    pub fn open(cfg: Resolved) -> anyhow::Result<Self> {
        let corpus = load_corpus(&cfg.paths, &cfg.load)?;
        let made_in = attribute_corpus(&corpus, cfg.threshold)?;
        let out = Outputs::new(&cfg.config.output_dir)?;
        let mut s = Session {
            cfg,
            corpus,
            made_in,
            out,
            counts: BTreeMap::new(),
            warnings: Vec::new(),
        };
        s.note_corpus();
        Ok(s)
    }

    fn note_corpus(&mut self) {
        let stats = self.corpus.stats().clone();
        self.count("publications", self.corpus.publications().len() as u64);
        self.count("citations", self.corpus.citations().len() as u64);
        for (what, n) in [
            ("duplicate citation rows", stats.duplicate_edges),
            ("citations with unknown citing id dropped", stats.dropped_unknown_citing),
            ("citations with unknown cited id dropped", stats.dropped_unknown_cited),
            ("citations outside the cited-year window dropped", stats.dropped_out_of_window),
        ] {
            if n > 0 {
                self.warnings.push(format!("{n} {what}"));
            }
        }
        let c = attribution_counts(&self.made_in);
        self.count("made_in_single", c.single);
        self.count("made_in_dual", c.dual);
        self.count("excluded", c.excluded_total());
        for (reason, n) in &c.excluded {
            self.count(&format!("excluded_{}", reason.as_str()), *n);
        }
    }

    pub fn count(&mut self, key: &str, n: u64) {
        self.counts.insert(key.to_owned(), n);
    }

    pub fn warn(&mut self, w: impl Into<String>) {
        self.warnings.push(w.into());
    }

    pub fn gains(&mut self) -> Vec<Gain> {
        let parts = match self.cfg.config.partitions {
            0 => std::thread::available_parallelism().map_or(1, |n| n.get()),
            n => n,
        };
        let gains = compute_gains_parallel(&self.corpus, &self.made_in, parts);
        let t = flow_totals(&gains);
        self.count("benefits", t.benefits);
        self.count("gains", t.gains);
        self.count("intra_gains", t.intra_gains);
        gains
    }

    pub fn matrix(&self, gains: &[Gain]) -> anyhow::Result<FlowMatrix> {
        let m = flow_matrix(gains, self.corpus.gazetteer().regions(), self.cfg.config.dual_gain_weight)?;
        check_matrix(&m, gains, self.cfg.config.dual_gain_weight.units_per_gain())?;
        Ok(m)
    }

    pub fn sc_matrices(&self, gains: &[Gain]) -> anyhow::Result<BTreeMap<ScCode, FlowMatrix>> {
        Ok(sc_flow_matrices(gains, &self.corpus, self.cfg.config.dual_gain_weight)?)
    }

    pub fn units(&self) -> u64 {
        self.cfg.config.dual_gain_weight.units_per_gain()
    }

    /// Writes `manifest_<command>.json` (or `manifest.json` for the report).
    pub fn finish(self, command: &str) -> anyhow::Result<()> {
        let p = &self.cfg.paths;
        let inputs = digest_inputs(&[&p.publications, &p.citations, &p.gazetteer, &p.scmap])?;
        let manifest = Manifest {
            tool: "kflow",
            version: env!("CARGO_PKG_VERSION"),
            command,
            config: &self.cfg.config,
            config_sha256: config_hash(&self.cfg.config)?,
            inputs,
            counts: &self.counts,
            warnings: &self.warnings,
            outputs: self.out.files().to_vec(),
        };
        let name = if command == "report" {
            "manifest.json".to_string()
        } else {
            format!("manifest_{command}.json")
        };
        let mut out = self.out;
        out.write_json(&name, &manifest)
    }
}

/// Engine self-checks; a failure is an internal error.
fn check_matrix(m: &FlowMatrix, gains: &[Gain], units: u64) -> anyhow::Result<()> {
    let expected: u64 = gains.len() as u64 * units - if units == 2 {
        gains.iter().filter(|g| g.dual).count() as u64
    } else {
        0
    };
    if m.grand_total() != expected {
        return Err(Error::Invariant(format!(
            "matrix total {} differs from {} gain units",
            m.grand_total(),
            expected
        ))
        .into());
    }
    let sum: i64 = rbkf_overall(m).iter().map(|e| e.rbkf).sum();
    if sum != 0 {
        return Err(Error::Invariant(format!("RBKF sums to {sum}, not 0")).into());
    }
    Ok(())
}

pub fn validate(mut s: Session) -> anyhow::Result<()> {
    let report = validate_corpus(&s.corpus);
    s.out.write("validation.csv", |w| export::write_validation(&report, w))?;
    let flagged = report.flagged().count() as u64;
    let half_foreign = report.entries.iter().filter(|e| e.half_foreign).count() as u64;
    let unresolved: u64 = report
        .entries
        .iter()
        .map(|e| e.unresolved_domestic_addresses as u64)
        .sum();
    s.count("auto_linked", report.auto_linked() as u64);
    s.count("flagged", flagged);
    s.count("half_foreign", half_foreign);
    s.count("unresolved_domestic_addresses", unresolved);
    if half_foreign > 0 {
        s.warn(format!(
            "{half_foreign} publications have exactly half foreign weight and were not excluded"
        ));
    }
    println!(
        "publications {}  excluded {}  auto-linked {}  flagged {}",
        report.entries.len(),
        report.excluded(),
        report.auto_linked(),
        flagged
    );
    for e in report.flagged().take(20) {
        let status = match e.status {
            PublicationStatus::Excluded(r) => r.as_str(),
            PublicationStatus::AutoLinked => "auto_linked",
            PublicationStatus::Ok => "ok",
        };
        println!(
            "  {}  {status}  unlinked={} unresolved={} half_foreign={}",
            e.pub_id, e.unlinked_authors, e.unresolved_domestic_addresses, e.half_foreign
        );
    }
    s.finish("validate")
}

pub fn assign(s: Session) -> anyhow::Result<()> {
    let mut s = s;
    s.out.write("attribution.csv", |w| export::write_attribution(&s.made_in, w))?;
    let c = attribution_counts(&s.made_in);
    println!("single {}  dual {}  excluded {}", c.single, c.dual, c.excluded_total());
    for (region, n) in &c.per_region {
        println!("  {region}: {n}");
    }
    s.finish("assign")
}

fn write_flows(s: &mut Session, gains: &[Gain], per_sc: bool) -> anyhow::Result<Vec<RegionSummary>> {
    let m = s.matrix(gains)?;
    let summary = region_summary(&s.corpus, &s.made_in, gains);
    s.out.write("gains.csv", |w| export::write_gains(gains, w))?;
    s.out.write("matrix.csv", |w| export::write_matrix(&m, w))?;
    let pct = row_percentages(&m);
    s.out.write("matrix_pct.csv", |w| export::write_percent_matrix(&pct, w))?;
    s.out.write("region_summary.csv", |w| export::write_region_summary(&summary, w))?;
    if per_sc {
        let ms = s.sc_matrices(gains)?;
        s.out.write("sc_matrices.csv", |w| export::write_sc_matrices(&ms, w))?;
    }
    s.warn(TOTAL_PUBLICATIONS_NOTE);
    Ok(summary)
}

fn print_totals(t: &FlowTotals) {
    println!(
        "benefits {}  gains {}  intra-regional {}",
        t.benefits, t.gains, t.intra_gains
    );
}

pub fn flows(mut s: Session, per_sc: bool) -> anyhow::Result<()> {
    let gains = s.gains();
    write_flows(&mut s, &gains, per_sc)?;
    print_totals(&flow_totals(&gains));
    s.finish("flows")
}

fn write_balance(
    s: &mut Session,
    gains: &[Gain],
    regions: &[String],
) -> anyhow::Result<(Vec<RbkfEntry>, Vec<RbkfEntry>)> {
    let m = s.matrix(gains)?;
    let ms = s.sc_matrices(gains)?;
    let overall = rbkf_overall(&m);
    let summed = rbkf_sc_summed(&ms, m.regions());
    let mut rows = overall.clone();
    rows.extend(summed.iter().cloned());
    s.out.write("rbkf.csv", |w| export::write_rbkf(&rows, w))?;
    let selected: Vec<String> = if regions.is_empty() {
        m.regions().iter().map(|r| r.to_string()).collect()
    } else {
        regions.to_vec()
    };
    let balances = selected
        .iter()
        .map(|r| rbkf_by_sc(&ms, r, s.corpus.scmap()))
        .collect::<Result<Vec<_>, _>>()?;
    let units = s.units();
    s.out.write("rbkf_by_sc.csv", |w| export::write_sc_balances(&balances, units, w))?;
    Ok((overall, summed))
}

pub fn balance(mut s: Session, regions: &[String]) -> anyhow::Result<()> {
    let gains = s.gains();
    let (overall, _) = write_balance(&mut s, &gains, regions)?;
    let units = s.units();
    for e in &overall {
        println!(
            "{:<28} a={:>10} b={:>10} rbkf={:>10}",
            e.region.as_str(),
            export::format_units(e.generated, units),
            export::format_units(e.earned, units),
            e.rbkf as f64 / units as f64
        );
    }
    s.finish("balance")
}

pub fn pairwise(mut s: Session, x: &str, y: &str, area: Option<&str>) -> anyhow::Result<()> {
    let gains = s.gains();
    let mut ms = s.sc_matrices(&gains)?;
    if let Some(area) = area {
        let scmap = s.corpus.scmap();
        if scmap.members(area).is_empty() {
            return Err(Error::InvalidArgument(format!("unknown macro-area `{area}`")).into());
        }
        ms.retain(|sc, _| scmap.area(sc.as_str()) == Some(area));
    }
    let entries = rbkf_pairwise(&ms, x, y)?;
    let units = s.units();
    s.out.write("pairwise.csv", |w| export::write_pairwise(x, y, &entries, units, w))?;
    let (out, back) = entries
        .iter()
        .fold((0, 0), |(a, b), e| (a + e.x_to_y, b + e.y_to_x));
    println!(
        "{x} -> {y}: {}   {y} -> {x}: {}",
        export::format_units(out, units),
        export::format_units(back, units)
    );
    s.finish("pairwise")
}

fn orientations(which: Option<Orientation>) -> Vec<Orientation> {
    match which {
        Some(o) => vec![o],
        None => vec![Orientation::Generated, Orientation::Earned],
    }
}

fn write_specialization(s: &mut Session, gains: &[Gain], which: Option<Orientation>, top: usize) -> anyhow::Result<()> {
    let c = s.cfg.config.clone();
    for o in orientations(which) {
        let g = GainTensor::from_gains(gains, &s.corpus, o, c.index_scope, c.dual_gain_weight)?;
        let name = o.index_name().to_ascii_lowercase();
        let table = index_table(&g, c.balassa_mode);
        s.out.write(&format!("index_{name}.csv"), |w| {
            export::write_index_table(&table, o, c.balassa_mode, w)
        })?;
        let mut buf = Vec::new();
        for (i, r) in g.regions().iter().enumerate() {
            let t = top_specializations(&g, r.as_str(), top, c.balassa_mode)?;
            let mut part = Vec::new();
            export::write_top(r.as_str(), &t, &mut part)?;
            // keep a single header
            let skip = if i == 0 { 0 } else { part.iter().position(|&b| b == b'\n').map_or(0, |p| p + 1) };
            buf.extend_from_slice(&part[skip..]);
        }
        s.out.write_bytes(&format!("top_{name}.csv"), &buf)?;
        let extremes = g
            .scs()
            .iter()
            .map(|sc| Ok((sc.clone(), field_extremes(&g, sc.as_str(), c.balassa_mode)?)))
            .collect::<kflow::Result<Vec<_>>>()?;
        s.out.write(&format!("extremes_{name}.csv"), |w| export::write_field_extremes(&extremes, w))?;
        let undefined = table.iter().filter(|v| v.value.is_none()).count() as u64;
        s.count(&format!("{name}_undefined_cells"), undefined);
    }
    Ok(())
}

pub fn specialize(mut s: Session, which: Option<Orientation>, top: usize) -> anyhow::Result<()> {
    if top == 0 {
        return Err(Error::InvalidArgument("--top must be at least 1".into()).into());
    }
    let gains = s.gains();
    write_specialization(&mut s, &gains, which, top)?;
    println!(
        "{} regions x {} subject categories",
        s.corpus.gazetteer().regions().len(),
        s.corpus.scmap().len()
    );
    s.finish("specialize")
}

fn write_edges(s: &mut Session, gains: &[Gain], sc: Option<&str>) -> anyhow::Result<MaxFlowReport> {
    let m = match sc {
        Some(sc) => s
            .sc_matrices(gains)?
            .remove(sc)
            .ok_or_else(|| Error::UnknownSc(sc.to_owned()))?,
        None => s.matrix(gains)?,
    };
    let report = max_flow_edges(&m);
    s.out.write("edges.csv", |w| export::write_edges(&report, w))?;
    s.out.write_bytes("edges.dot", to_dot(&report).as_bytes())?;
    if !report.omitted.is_empty() {
        let names: Vec<&str> = report.omitted.iter().map(|r| r.as_str()).collect();
        s.warn(format!("regions without extra-regional flows omitted from edges: {}", names.join(", ")));
    }
    Ok(report)
}

pub fn edges(mut s: Session, sc: Option<&str>) -> anyhow::Result<()> {
    let gains = s.gains();
    let report = write_edges(&mut s, &gains, sc)?;
    for e in &report.edges {
        println!(
            "{} {} -> {}{}",
            e.style.as_str(),
            e.from,
            e.to,
            if e.tied { " (tie)" } else { "" }
        );
    }
    s.finish("edges")
}

#[derive(Serialize)]
struct Correlation {
    x: &'static str,
    y: &'static str,
    method: &'static str,
    value: Option<f64>,
}

#[derive(Serialize)]
struct RegionRow {
    #[serde(flatten)]
    summary: RegionSummary,
    made_in_pct: Option<f64>,
    cited_pct: Option<f64>,
    intra_pct: Option<f64>,
}

#[derive(Serialize)]
struct Report {
    totals: FlowTotals,
    attribution: AttributionCounts,
    regions: Vec<RegionRow>,
    rbkf: Vec<RbkfEntry>,
    rbkf_sc_summed: Vec<RbkfEntry>,
    /// Informational sums over the other regions.
    rest_of_country: Vec<RestOfCountry>,
    correlations: Vec<Correlation>,
    edges: MaxFlowReport,
    notes: Vec<&'static str>,
}

fn pct(r: Option<kflow::Weight>) -> Option<f64> {
    r.map(|r| (1000.0 * *r.numer() as f64 / *r.denom() as f64).round() / 10.0)
}

fn correlations(summary: &[RegionSummary], rbkf: &[RbkfEntry]) -> anyhow::Result<Vec<Correlation>> {
    let col = |f: fn(&RegionSummary) -> f64| summary.iter().map(f).collect::<Vec<f64>>();
    let intra: Vec<f64> = summary
        .iter()
        .map(|s| s.intra_share().map_or(0.0, |r| *r.numer() as f64 / *r.denom() as f64))
        .collect();
    let balance: Vec<f64> = rbkf.iter().map(|e| e.rbkf as f64).collect();
    let made_in = col(|s| s.made_in as f64);
    let total = col(|s| s.total_publications as f64);
    let cited = col(|s| s.cited as f64);
    if summary.len() < 2 {
        return Ok(Vec::new());
    }
    Ok(vec![
        Correlation { x: "made_in", y: "intra_share", method: "spearman", value: spearman(&made_in, &intra)? },
        Correlation { x: "total_publications", y: "intra_share", method: "spearman", value: spearman(&total, &intra)? },
        Correlation { x: "made_in", y: "rbkf", method: "spearman", value: spearman(&made_in, &balance)? },
        Correlation { x: "cited", y: "rbkf", method: "pearson", value: pearson(&cited, &balance)? },
    ])
}

pub fn report(mut s: Session) -> anyhow::Result<()> {
    let validation = validate_corpus(&s.corpus);
    s.out.write("validation.csv", |w| export::write_validation(&validation, w))?;
    s.out.write("attribution.csv", |w| export::write_attribution(&s.made_in, w))?;
    let gains = s.gains();
    let summary = write_flows(&mut s, &gains, true)?;
    let (rbkf, summed) = write_balance(&mut s, &gains, &[])?;
    write_specialization(&mut s, &gains, None, 10)?;
    let edges = write_edges(&mut s, &gains, None)?;
    let totals = flow_totals(&gains);
    let report = Report {
        totals,
        attribution: attribution_counts(&s.made_in),
        regions: summary
            .iter()
            .map(|r| RegionRow {
                summary: r.clone(),
                made_in_pct: pct(r.made_in_share()),
                cited_pct: pct(r.cited_share()),
                intra_pct: pct(r.intra_share()),
            })
            .collect(),
        correlations: correlations(&summary, &rbkf)?,
        rest_of_country: rest_of_country(&summary),
        rbkf,
        rbkf_sc_summed: summed,
        edges,
        notes: vec![TOTAL_PUBLICATIONS_NOTE],
    };
    s.out.write_json("report.json", &report)?;
    let half_foreign = validation.entries.iter().filter(|e| e.half_foreign).count();
    if half_foreign > 0 {
        s.warn(format!(
            "{half_foreign} publications have exactly half foreign weight and were not excluded"
        ));
    }
    print_totals(&totals);
    println!("wrote {} files to {}", s.out.files().len() + 1, s.out.dir().display());
    s.finish("report")
}

#[derive(Serialize)]
struct SynthManifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    config: &'a GeneratorConfig,
    config_sha256: String,
    outputs: Vec<crate::output::FileDigest>,
}

pub fn synth(config: &GeneratorConfig, dir: &Path) -> anyhow::Result<()> {
    let syn = generate_corpus(config)?;
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    syn.write_to_dir(dir)?;
    let names = [
        "publications.jsonl",
        "citations.csv",
        "gazetteer.csv",
        "scmap.csv",
        "ground_truth.json",
        "generator.json",
    ];
    let paths: Vec<_> = names.iter().map(|n| dir.join(n)).collect();
    let mut outputs = digest_inputs(&paths.iter().map(|p| p.as_path()).collect::<Vec<_>>())?;
    for (o, n) in outputs.iter_mut().zip(names) {
        o.path = n.to_owned();
    }
    let manifest = SynthManifest {
        tool: "kflow",
        version: env!("CARGO_PKG_VERSION"),
        command: "synth",
        config,
        config_sha256: sha256_hex(&serde_json::to_vec(config)?),
        outputs,
    };
    let mut bytes = serde_json::to_vec_pretty(&manifest)?;
    bytes.push(b'\n');
    std::fs::write(dir.join("manifest_synth.json"), bytes)?;
    println!(
        "{} publications, {} citations, {} planted gains",
        syn.corpus.publications().len(),
        syn.corpus.citations().len(),
        syn.truth.gains.len()
    );
    Ok(())
}

/// Reads a generator config (TOML); missing keys take their defaults.
pub fn load_generator(path: &Path) -> anyhow::Result<GeneratorConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| crate::config::ConfigError(format!("{}: {e}", path.display())))?;
    toml::from_str(&text)
        .map_err(|e| crate::config::ConfigError(format!("{}: {e}", path.display())).into())
}

