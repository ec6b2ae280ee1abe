use faltings::heights::{faltings_height, root_of_unity_bracket};
use faltings::poly::IntegerPolynomial;
use faltings::spectrum::{
    scan_cyclotomics, scan_polynomials, scan_polynomials_with, spectrum_report, spectrum_report_with, to_csv,
    ScanConfig, SpectrumOptions, CSV_HEADER,
};

const DEGREE_EIGHT: [i64; 9] = [1, -1, 1, -1, 1, -1, 2, -2, 1];

fn n_of(label: &str) -> u64 {
    label.strip_prefix("cyclotomic:").unwrap().parse().unwrap()
}

#[test]
fn cyclotomic_scan() {
    let e = scan_cyclotomics(30).unwrap();
    assert_eq!(e.len(), 30);
    let order: Vec<u64> = e.iter().map(|x| n_of(&x.label)).collect();
    assert_eq!(&order[..3], &[1, 6, 10]);
    let h = |n: u64| e.iter().find(|x| n_of(&x.label) == n).unwrap().height.total;
    assert!(h(2) > h(1));
    // n = 22 sits above n = 10 and inside its bracket.
    let (lo, hi) = root_of_unity_bracket(22).unwrap();
    assert!(h(22) > h(10) && lo <= h(22) && h(22) <= hi);
    for x in &e {
        let (lo, hi) = x.bracket.unwrap();
        assert!(lo <= x.height.total && x.height.total <= hi, "{}", x.label);
    }
    for w in e.windows(2) {
        assert!(w[0].height.total <= w[1].height.total);
    }
    assert!(scan_cyclotomics(0).is_err());
}

#[test]
fn polynomial_scan_finds_the_degree_eight_value() {
    let e = scan_polynomials(8, 2, -0.748623).unwrap();
    assert!(e.iter().any(|x| x.poly.coefficients() == DEGREE_EIGHT), "{:?}", e.iter().map(|x| &x.label).collect::<Vec<_>>());
    for x in &e {
        assert!(x.height.total <= -0.748623);
        // j = 0 aside, everything this low is an algebraic unit.
        assert!(x.poly.coefficients() == [0, 1] || x.is_unit(), "{} is not a unit", x.label);
    }
    for w in e.windows(2) {
        assert!(w[0].height.total <= w[1].height.total);
    }
    let first = e[0].poly.coefficients();
    assert_eq!(first, &[0, 1]);
}

#[test]
fn polynomial_scan_thresholds() {
    let e = scan_polynomials(8, 2, -0.7487).unwrap();
    assert_eq!(e.len(), 1);
    assert_eq!(e[0].poly.coefficients(), &[0, 1]);
    assert!(scan_polynomials(8, 2, -0.749).unwrap().is_empty());
    assert!(scan_polynomials(0, 2, 0.0).is_err());
    assert!(scan_polynomials(4, 0, 0.0).is_err());
}

#[test]
fn scans_are_deterministic_and_resume_from_checkpoints() {
    let dir = std::env::temp_dir().join(format!("spectrum-scan-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("checkpoint.json");
    let _ = std::fs::remove_file(&path);
    let cfg = ScanConfig { max_degree: 5, max_coeff: 2, threshold: -0.7486, checkpoint: Some(path.clone()) };
    let a = scan_polynomials_with(&cfg).unwrap();
    assert!(path.exists());
    let b = scan_polynomials_with(&cfg).unwrap();
    let c = scan_polynomials(5, 2, -0.7486).unwrap();
    assert_eq!(to_csv(&a), to_csv(&c));
    assert_eq!(to_csv(&b), to_csv(&c));
    let other = ScanConfig { threshold: -0.7485, ..cfg };
    assert!(scan_polynomials_with(&other).is_err());
    std::fs::remove_dir_all(&dir).unwrap();
    let csv = to_csv(&c);
    assert_eq!(csv.lines().next().unwrap(), CSV_HEADER);
    assert_eq!(csv.lines().count(), c.len() + 1);
}

#[test]
fn report_with_the_stated_upper_bound() {
    let r = spectrum_report(-0.74862278).unwrap();
    let iso: Vec<f64> = r.isolated.iter().map(|e| e.height.total).collect();
    let published = [-0.74875248, -0.74862817, -0.74862517, -0.74862366];
    assert_eq!(iso.len(), 4, "{:?}", r.isolated.iter().map(|e| &e.label).collect::<Vec<_>>());
    for (v, p) in iso.iter().zip(published) {
        assert!((v - p).abs() < 1e-7, "{v} vs {p}");
    }
    assert!(r.lower_bound >= -0.74862386);
    assert_eq!(r.density_interval_start, -0.74862278);
    let deg8 = IntegerPolynomial::new(DEGREE_EIGHT.to_vec()).unwrap();
    assert!(r.between_bounds.iter().any(|e| e.poly == deg8));
    for e in r.isolated.iter().chain(&r.between_bounds) {
        assert!(e.poly.coefficients() == [0, 1] || e.is_unit(), "{}", e.label);
        let again = faltings_height(&e.poly).unwrap().total;
        assert_eq!(again.to_bits(), e.height.total.to_bits());
    }
}

#[test]
fn report_below_every_height_is_empty() {
    let opts = SpectrumOptions { cyclotomic_order: 30, max_degree: 4, max_coeff: 2 };
    let r = spectrum_report_with(-0.748752485503338, &opts).unwrap();
    assert!(r.isolated.is_empty());
}
