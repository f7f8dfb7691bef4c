use kflow::specialization::{balassa_ratio_at, index_of_ratio, index_table};
use kflow::{BalassaMode, BalassaRatio, GainTensor, Orientation, Region, ScCode};
use proptest::prelude::*;

const MODES: [BalassaMode; 2] = [BalassaMode::ExcludeFocal, BalassaMode::IncludeFocal];

fn tensor(rows: &[Vec<u64>], orientation: Orientation) -> GainTensor {
    let regions = (0..rows.len()).map(|i| Region::new(format!("R{i}"))).collect();
    let scs = (0..rows[0].len()).map(|j| ScCode::new(format!("S{j}"))).collect();
    GainTensor::new(regions, scs, rows, orientation).unwrap()
}

fn arb_rows() -> impl Strategy<Value = Vec<Vec<u64>>> {
    (1usize..6, 1usize..6).prop_flat_map(|(r, c)| {
        // mostly small values with plenty of zeros
        let cell = prop_oneof![3 => Just(0u64), 5 => 0u64..20, 1 => 0u64..1_000_000];
        prop::collection::vec(prop::collection::vec(cell, c), r)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn indexes_are_bounded_and_scale_free(rows in arb_rows()) {
        let g = tensor(&rows, Orientation::Generated);
        let scaled: Vec<Vec<u64>> = rows.iter().map(|r| r.iter().map(|v| v * 7).collect()).collect();
        let g7 = tensor(&scaled, Orientation::Generated);
        for mode in MODES {
            let a = index_table(&g, mode);
            let b = index_table(&g7, mode);
            prop_assert_eq!(&a, &b);
            for v in a.iter().filter_map(|v| v.value) {
                prop_assert!((-100.0..=100.0).contains(&v), "{v}");
            }
        }
    }

    #[test]
    fn orientation_does_not_change_values(rows in arb_rows()) {
        let kosi = tensor(&rows, Orientation::Generated);
        let kisi = tensor(&rows, Orientation::Earned);
        for mode in MODES {
            prop_assert_eq!(index_table(&kosi, mode), index_table(&kisi, mode));
        }
    }

    #[test]
    fn reciprocal_ratio_negates(rows in prop::collection::vec((1u64..1000, 1u64..1000), 2..6)) {
        // with two SCs, swapping the columns inverts every excluded-focal ratio
        let t: Vec<Vec<u64>> = rows.iter().map(|&(a, b)| vec![a, b]).collect();
        let s: Vec<Vec<u64>> = rows.iter().map(|&(a, b)| vec![b, a]).collect();
        let (t, s) = (tensor(&t, Orientation::Generated), tensor(&s, Orientation::Generated));
        for k in 0..rows.len() {
            let r = balassa_ratio_at(&t, k, 0, BalassaMode::ExcludeFocal);
            let q = balassa_ratio_at(&s, k, 0, BalassaMode::ExcludeFocal);
            if let (BalassaRatio::Finite { num, den }, BalassaRatio::Finite { num: n2, den: d2 }) = (r, q) {
                prop_assert_eq!((num, den), (d2, n2));
            }
            prop_assert_eq!(r.index().map(|v| -v), q.index());
        }
    }

    #[test]
    fn closed_form_matches_tanh_log(e in -6.0f64..6.0) {
        let r = 10f64.powf(e);
        let closed = index_of_ratio(r);
        let reference = 100.0 * r.ln().tanh();
        let tol = 1e-12 * reference.abs().max(f64::MIN_POSITIVE);
        prop_assert!((closed - reference).abs() <= tol, "R={r}: {closed} vs {reference}");
    }
}

#[test]
fn fixed_points() {
    assert_eq!(index_of_ratio(1.0), 0.0);
    assert_eq!(index_of_ratio(0.0), -100.0);
    assert_eq!(index_of_ratio(f64::INFINITY), 100.0);
    let g = tensor(&[vec![0, 5], vec![3, 4]], Orientation::Generated);
    assert_eq!(balassa_ratio_at(&g, 0, 0, BalassaMode::ExcludeFocal).index(), Some(-100.0));
}
