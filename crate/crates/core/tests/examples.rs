//! Hand-checked examples and reference table arithmetic.

mod common;

use std::collections::BTreeMap;

use common::{fixture, pair_matrix, table};
use kflow::attribution::half;
use kflow::balance::{average_ranks, rbkf_overall, ALL_SC};
use kflow::flows::{benefits, flow_totals};
use kflow::{
    attribute_corpus, compute_gains, compute_shares, load_corpus, rbkf_by_sc, rbkf_pairwise,
    spearman, Classification, CorpusPaths, FlowMatrix, LoadOptions, RbkfEntry, Region, ScCode,
    ScMap, Weight,
};
use serde::Deserialize;

#[test]
fn worked_example_gains() {
    let corpus =
        load_corpus(&CorpusPaths::in_dir(&fixture("worked_gains")), &LoadOptions::default()).unwrap();
    let made_in = attribute_corpus(&corpus, half()).unwrap();
    assert_eq!(
        made_in["000209048200010"].classification,
        Classification::Single("Tuscany".into())
    );
    let shares = compute_shares(corpus.publication("000209048200010").unwrap(), corpus.gazetteer());
    assert_eq!(shares.share("Tuscany"), Weight::from_integer(3));
    assert_eq!(shares.share("Veneto"), Weight::from_integer(1));

    let gains = compute_gains(&corpus, &made_in);
    let totals = flow_totals(&gains);
    assert_eq!(benefits(&gains).len(), 6);
    assert_eq!(totals.gains, 20);
    assert_eq!(totals.intra_gains, 4);
    assert_eq!(totals.benefits, 6);
    assert!(gains
        .iter()
        .filter(|g| g.intra)
        .all(|g| g.producing_region.as_str() == "Tuscany" && g.citing_region.as_str() == "Tuscany"));
    // nine citations in total, the three foreign-only citers contribute nothing
    assert_eq!(corpus.citations().len(), 9);
}

#[test]
fn attribution_example_share() {
    let corpus = load_corpus(
        &CorpusPaths::in_dir(&fixture("attribution_example")),
        &LoadOptions::default(),
    )
    .unwrap();
    let p = corpus.publication("000309458000001").unwrap();
    let shares = compute_shares(p, corpus.gazetteer());
    assert_eq!(shares.share("Latium"), Weight::new(9, 2));
    assert_eq!(shares.foreign_weight, Weight::new(5, 2));
    assert_eq!(shares.total_weight(), Weight::from_integer(7));
    assert_eq!(shares.share("Latium") / shares.total_weight(), Weight::new(9, 14));
    let made_in = attribute_corpus(&corpus, half()).unwrap();
    assert_eq!(made_in[&p.id].classification, Classification::Single("Latium".into()));
}

#[derive(Deserialize)]
struct Table1Row {
    region: String,
    total_publications: u64,
    made_in: u64,
    cited: u64,
    benefits: u64,
    gains: u64,
    intra_gains: u64,
}

#[derive(Deserialize)]
struct Table2Row {
    region: String,
    a: u64,
    cited_extra: u64,
    gains_extra: u64,
    b: u64,
    rbkf: i64,
}

#[test]
fn table2_rbkf_is_a_minus_b() {
    let rows: Vec<Table2Row> = table("table2.csv");
    assert_eq!(rows.len(), 20);
    for r in &rows {
        let e = RbkfEntry::new(Region::new(&r.region), None, r.a, r.b);
        assert_eq!(e.rbkf, r.rbkf, "{}", r.region);
        assert_eq!(e.sc_label(), ALL_SC);
    }
    // the fixture column is conserved
    assert_eq!(rows.iter().map(|r| r.rbkf).sum::<i64>(), 0);
    let latium = rows.iter().find(|r| r.region == "Latium").unwrap();
    assert_eq!((latium.a, latium.b, latium.rbkf), (61876, 55862, 6014));
    assert!(rows.iter().all(|r| r.cited_extra > 0 && r.gains_extra > 0));
}

#[test]
fn table1_and_table2_agree_on_extra_regional_gains() {
    let t1: Vec<Table1Row> = table("table1.csv");
    let t2: Vec<Table2Row> = table("table2.csv");
    for (a, b) in t1.iter().zip(&t2) {
        assert_eq!(a.region, b.region);
        assert_eq!(a.gains - a.intra_gains, b.a, "{}", a.region);
        assert!(a.made_in <= a.total_publications && a.cited <= a.made_in);
        assert!(a.benefits <= a.gains);
    }
}

#[derive(Deserialize)]
struct Table4Row {
    sc: String,
    a: u64,
    b: u64,
    rbkf: i64,
}

#[test]
fn table4_area_total() {
    let rows: Vec<Table4Row> = table("table4.csv");
    let (total, rows) = rows.split_last().unwrap();
    assert_eq!(total.sc, "Total");
    let mut scmap = ScMap::new();
    let mut matrices = BTreeMap::new();
    for r in rows {
        scmap.insert(&r.sc, "Biomedical research").unwrap();
        matrices.insert(ScCode::new(&r.sc), pair_matrix("Tuscany", "Rest", r.a, r.b));
    }
    let balance = rbkf_by_sc(&matrices, "Tuscany", &scmap).unwrap();
    for r in rows {
        assert_eq!(balance.entry(&r.sc).unwrap().rbkf, r.rbkf, "{}", r.sc);
    }
    assert_eq!(balance.entry("Virology").unwrap().rbkf, 0);
    let area = balance.area("Biomedical research").unwrap();
    assert_eq!((area.generated, area.earned, area.rbkf), (9421, 8492, 929));
    assert_eq!((total.a, total.b, total.rbkf), (9421, 8492, 929));
}

#[derive(Deserialize)]
struct Table6Row {
    sc: String,
    latium_to_piedmont: u64,
    piedmont_to_latium: u64,
    rbkf: i64,
}

#[test]
fn table6_pairwise() {
    let rows: Vec<Table6Row> = table("table6.csv");
    let matrices: BTreeMap<ScCode, FlowMatrix> = rows
        .iter()
        .map(|r| {
            (
                ScCode::new(&r.sc),
                pair_matrix("Latium", "Piedmont", r.latium_to_piedmont, r.piedmont_to_latium),
            )
        })
        .collect();
    let lp = rbkf_pairwise(&matrices, "Latium", "Piedmont").unwrap();
    let pl = rbkf_pairwise(&matrices, "Piedmont", "Latium").unwrap();
    for r in &rows {
        let e = lp.iter().find(|e| e.sc.as_str() == r.sc).unwrap();
        assert_eq!(e.balance, r.rbkf, "{}", r.sc);
        let f = pl.iter().find(|e| e.sc.as_str() == r.sc).unwrap();
        assert_eq!(f.balance, -r.rbkf);
    }
    let out: u64 = lp.iter().map(|e| e.x_to_y).sum();
    let back: u64 = lp.iter().map(|e| e.y_to_x).sum();
    assert_eq!((out, back), (308, 306));
    // ascending order puts the deepest deficit first
    assert_eq!(lp[0].sc.as_str(), "Geosciences, multidisciplinary");
}

#[derive(Deserialize)]
struct Table7Row {
    sc: String,
    area: u32,
    lombardy_to_emilia_romagna: u64,
    emilia_romagna_to_lombardy: u64,
    rbkf: i64,
}

#[test]
fn table7_pairwise() {
    let rows: Vec<Table7Row> = table("table7.csv");
    let matrices: BTreeMap<ScCode, FlowMatrix> = rows
        .iter()
        .map(|r| {
            (
                ScCode::new(&r.sc),
                pair_matrix(
                    "Lombardy",
                    "Emilia Romagna",
                    r.lombardy_to_emilia_romagna,
                    r.emilia_romagna_to_lombardy,
                ),
            )
        })
        .collect();
    let entries = rbkf_pairwise(&matrices, "Lombardy", "Emilia Romagna").unwrap();
    let got: Vec<i64> = entries.iter().map(|e| e.balance).collect();
    let expected: Vec<i64> = rows.iter().map(|r| r.rbkf).collect();
    assert_eq!(got, expected, "table is already sorted by balance");
    assert!(rows.iter().all(|r| (1..=9).contains(&r.area)));
}

fn intra_share(r: &Table1Row) -> f64 {
    r.intra_gains as f64 / r.gains as f64
}

#[test]
fn table1_size_vs_intra_share() {
    let rows: Vec<Table1Row> = table("table1.csv");
    let share: Vec<f64> = rows.iter().map(intra_share).collect();
    let made_in: Vec<f64> = rows.iter().map(|r| r.made_in as f64).collect();
    let rho = spearman(&made_in, &share).unwrap().unwrap();
    assert!((rho - 0.608).abs() <= 0.02, "rho = {rho}");
    // one-decimal percentages are consistent with the raw counts
    let abruzzo = &rows[0];
    assert_eq!(format!("{:.1}", 100.0 * intra_share(abruzzo)), "39.6");
}

#[test]
fn rank_helper_handles_ties() {
    assert_eq!(average_ranks(&[3.0, 1.0, 3.0]), vec![2.5, 1.0, 2.5]);
}

#[test]
fn overall_rbkf_sums_to_zero_on_a_matrix() {
    let regions: Vec<Region> = ["A", "B", "C"].into_iter().map(Region::new).collect();
    let m = FlowMatrix::from_rows(&regions, &[vec![5, 3, 1], vec![2, 7, 4], vec![0, 6, 9]]).unwrap();
    let e = rbkf_overall(&m);
    assert_eq!(e.iter().map(|e| e.rbkf).sum::<i64>(), 0);
    assert_eq!(e[0].rbkf, 4 - 2);
}
