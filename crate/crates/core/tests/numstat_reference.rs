use approx::assert_abs_diff_eq;
use beliefcheck::numstat::{t_statistic, t_two_sided_pvalue};

const GRID: &str = include_str!("fixtures/t_pvalue_grid.csv");
const SAMPLES: &str = include_str!("fixtures/ttest_1samp.csv");

#[test]
fn two_sided_pvalue_matches_reference_grid() {
    let mut rdr = csv::Reader::from_reader(GRID.as_bytes());
    let mut n = 0;
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let df: u64 = rec[0].parse().unwrap();
        let t: f64 = rec[1].parse().unwrap();
        let want: f64 = rec[2].parse().unwrap();
        let got = t_two_sided_pvalue(t, df).unwrap();
        assert_abs_diff_eq!(got, want, epsilon = 1e-8);
        assert_abs_diff_eq!(t_two_sided_pvalue(-t, df).unwrap(), want, epsilon = 1e-8);
        n += 1;
    }
    assert_eq!(n, 30);
}

#[test]
fn zero_statistic_gives_one_exactly() {
    for df in [1, 2, 5, 10, 30, 100] {
        assert_eq!(t_two_sided_pvalue(0.0f64, df).unwrap(), 1.0);
        assert_eq!(t_two_sided_pvalue(0.0f32, df).unwrap(), 1.0);
    }
}

#[test]
fn one_sample_statistic_matches_reference() {
    let mut rdr = csv::Reader::from_reader(SAMPLES.as_bytes());
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let mu0: f64 = rec[0].parse().unwrap();
        let want_t: f64 = rec[1].parse().unwrap();
        let want_p: f64 = rec[2].parse().unwrap();
        let y: Vec<f64> = rec[3].split(' ').map(|v| v.parse().unwrap()).collect();
        let t = t_statistic(&y, mu0).unwrap();
        assert_abs_diff_eq!(t, want_t, epsilon = 1e-8);
        let p = t_two_sided_pvalue(t, y.len() as u64 - 1).unwrap();
        assert_abs_diff_eq!(p, want_p, epsilon = 1e-8);
    }
}

#[test]
fn translation_and_scale_invariance() {
    let y = [2.1, 3.4, 1.9, 4.4, 2.8, 3.3];
    let base = t_statistic(&y, 2.5).unwrap();
    for c in [-100.0, -1.5, 0.25, 7.0, 1e3] {
        let shifted: Vec<f64> = y.iter().map(|v| v + c).collect();
        assert_abs_diff_eq!(t_statistic(&shifted, 2.5 + c).unwrap(), base, epsilon = 1e-12);
    }
    for c in [0.5, 2.0, 10.0, 1e-2] {
        let scaled: Vec<f64> = y.iter().map(|v| v * c).collect();
        assert_abs_diff_eq!(t_statistic(&scaled, 2.5 * c).unwrap(), base, epsilon = 1e-12);
    }
}

#[test]
fn pvalue_in_range_and_decreasing_in_abs_t() {
    for df in [1, 3, 10, 50] {
        let mut prev = 1.0;
        for i in 0..200 {
            let t = i as f64 * 0.1;
            let p = t_two_sided_pvalue(t, df).unwrap();
            assert!((0.0..=1.0).contains(&p));
            assert!(p <= prev, "df={df} t={t}");
            prev = p;
        }
    }
}
