//! File-level round trips for spectra and parameter files.

use std::path::PathBuf;

use proptest::prelude::*;
use pptk_core::io::{read_spectrum_csv, write_spectrum_csv};
use pptk_core::spectra::Spectrum;
use pptk_core::Complex64;

fn temp_path(tag: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("pptk-io-{}-{}.csv", std::process::id(), tag));
    p
}

#[test]
fn reflection_file_round_trip_is_bit_exact() {
    let grid = vec![7.2109e9, 7.21095e9, 7.211e9, 7.21105e9];
    let values = vec![
        Complex64::new(0.5952380952380952, 0.0),
        Complex64::new(1.0 / 3.0, -2.0 / 7.0),
        Complex64::new(-0.1234567890123456, 1e-300),
        Complex64::new(1.198333333333333, 3.3e-17),
    ];
    let s = Spectrum::new_reflection(grid.clone(), values.clone(), serde_json::json!({"tag": 1}))
        .unwrap();
    let path = temp_path("reflection");
    write_spectrum_csv(&s, &path).unwrap();
    let back = read_spectrum_csv(&path).unwrap();
    std::fs::remove_file(&path).ok();
    assert_eq!(back.grid_hz(), &grid[..]);
    assert_eq!(back.reflection_values().unwrap(), &values[..]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn random_psd_spectra_round_trip(
        start in 1e6f64..1e10,
        step in 1f64..1e6,
        values in proptest::collection::vec(0f64..1e3, 1..60),
    ) {
        let grid: Vec<f64> = (0..values.len()).map(|i| start + step * i as f64).collect();
        let s = Spectrum::new_psd(grid.clone(), values.clone(), serde_json::Value::Null).unwrap();
        let text = pptk_core::io::spectrum_to_csv(&s);
        let back = pptk_core::io::parse_spectrum_csv(&text).unwrap();
        prop_assert_eq!(back.grid_hz(), &grid[..]);
        prop_assert_eq!(back.psd_values().unwrap(), &values[..]);
    }

    #[test]
    fn random_reflection_spectra_round_trip(
        start in 1e6f64..1e10,
        step in 1f64..1e6,
        parts in proptest::collection::vec((-2f64..2.0, -2f64..2.0), 1..60),
    ) {
        let grid: Vec<f64> = (0..parts.len()).map(|i| start + step * i as f64).collect();
        let values: Vec<Complex64> = parts.iter().map(|(re, im)| Complex64::new(*re, *im)).collect();
        let s = Spectrum::new_reflection(grid.clone(), values.clone(), serde_json::Value::Null).unwrap();
        let text = pptk_core::io::spectrum_to_csv(&s);
        let back = pptk_core::io::parse_spectrum_csv(&text).unwrap();
        prop_assert_eq!(back.grid_hz(), &grid[..]);
        prop_assert_eq!(back.reflection_values().unwrap(), &values[..]);
    }
}
