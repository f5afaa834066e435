//! Acceptance suite: one test per criterion, each printing a PASS line
//! with the measured numbers (visible with `--nocapture`).
//!
//! Every tolerance is pinned in code; run times are asserted where the
//! criterion carries a budget.

use std::time::Instant;

use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha12Rng;

use pptk_core::backaction::{
    effective_linewidths, eigenfrequencies, nms_threshold, CouplingRegime,
};
use pptk_core::cooling::{effective_noise_occupations, final_occupations};
use pptk_core::fitting::{
    fit_psd, fit_reflection, FitModel, FitProblem, PsdContext,
};
use pptk_core::kerr::{gain_factor, gain_factor_signal};
use pptk_core::oracle::{compare_reflection, occupation_integrals};
use pptk_core::params::{angular, example_device, ordinary, CircuitParams, DriveState, PumpConfig};
use pptk_core::spectra::{
    add_reflection_noise, psd_output_quanta, s11_single_mode, symmetric_grid_hz, Spectrum,
};
use pptk_core::susceptibility::{chi_rf_bare, chi_rf_effective};
use pptk_core::BathOccupations;

fn fig1_drive(params: &CircuitParams, omega_i_over_kappa: f64) -> DriveState {
    let kappa_d = angular(300e3);
    DriveState::from_gain_target(params, -0.35, omega_i_over_kappa * kappa_d, Some(kappa_d))
        .unwrap()
}

#[test]
fn acceptance_01_trace_rule_on_random_parameter_sets() {
    let start = Instant::now();
    let mut rng = ChaCha12Rng::seed_from_u64(0xACCE_0001);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let kappa = angular(50e3 + 950e3 * rng.random::<f64>());
        let gamma0 = kappa / 3.0 * rng.random::<f64>().max(1e-3);
        let gain = -0.05 - 0.95 * rng.random::<f64>();
        let g_nms = (kappa - gamma0) / (4.0 * gain.abs().sqrt());
        let g = 0.999 * g_nms * rng.random::<f64>();
        let params = CircuitParams::from_angular(
            angular(452e6),
            gamma0,
            0.0,
            angular(7.211e9),
            kappa,
            0.25 * kappa,
            angular(175e3),
            angular(-5e3),
        )
        .unwrap();
        let drive = DriveState::from_gain_target(&params, gain, 20.0 * kappa, Some(kappa)).unwrap();
        let (geff, keff) = effective_linewidths(&params, &drive, g).unwrap();
        let total = kappa + gamma0;
        worst = worst.max(((geff + keff) - total).abs() / total);
    }
    let elapsed = start.elapsed();
    assert!(worst <= 1e-12, "worst relative trace defect {worst}");
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!(
        "ACCEPTANCE 01 PASS: trace rule Γeff+κeff = κ+Γ0 on 50 random sets \
         (worst defect {worst:.2e}, {elapsed:?})"
    );
}

#[test]
fn acceptance_02_decoupled_limits() {
    let params = example_device();
    let drive = fig1_drive(&params, 20.0);
    let pump = PumpConfig::off(&params, &drive);

    let (geff, keff) = effective_linewidths(&params, &drive, 0.0).unwrap();
    assert!((geff - params.gamma0).abs() <= 1e-12 * params.gamma0);
    assert!((keff - drive.kappa_driven).abs() <= 1e-12 * drive.kappa_driven);

    let mut worst_chi = 0.0f64;
    for k in -400..=400 {
        let omega = -params.omega_rf + params.gamma0 * k as f64 / 50.0;
        let eff = chi_rf_effective(omega, &params, &drive, &pump);
        let bare = chi_rf_bare(omega, params.gamma0, params.omega_rf);
        worst_chi = worst_chi.max((eff - bare).norm() / bare.norm());
    }
    assert!(worst_chi <= 1e-12, "χ̄0eff deviates by {worst_chi}");

    let baths = BathOccupations::uniform(13.0, 0.0, 0.0).unwrap();
    let occ = final_occupations(&params, &drive, 0.0, &baths);
    assert_eq!(occ.n_fin_rf, baths.n_th_rf);

    println!(
        "ACCEPTANCE 02 PASS: decoupled limits exact (linewidths, χ̄0eff to {worst_chi:.2e}, \
         nFinRF = nThRF)"
    );
}

#[test]
fn acceptance_03_nms_threshold_closed_form_vs_bisection() {
    let (kappa, gamma0, gain) = (angular(300e3), angular(45e3), -0.35);
    let radicand = |g: f64| (kappa - gamma0) * (kappa - gamma0) / 16.0 + gain * g * g;
    let (mut lo, mut hi) = (0.0f64, kappa);
    assert!(radicand(lo) > 0.0 && radicand(hi) < 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if radicand(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let bisected = 0.5 * (lo + hi);
    let closed = nms_threshold(kappa, gamma0, gain).unwrap();
    let rel = ((closed - bisected) / bisected).abs();
    assert!(rel <= 1e-9, "closed form vs bisection: {rel}");
    let khz = ordinary(closed) / 1e3;
    assert!((khz - 108.0).abs() < 1.0, "threshold {khz} kHz");
    println!(
        "ACCEPTANCE 03 PASS: NMS threshold closed form = bisection to {rel:.2e}, \
         |g−| = 2π·{khz:.2} kHz"
    );
}

#[test]
fn acceptance_04_strong_coupling_classification() {
    let params = example_device();
    let drive = fig1_drive(&params, 20.0);
    let drive = DriveState::from_gain_target(&params, -0.21, drive.omega_i, Some(angular(300e3)))
        .unwrap();
    // full splitting 2√|G||g−| = 2π·500 kHz fixes |g−|
    let g_minus = angular(500e3) / (2.0 * 0.21f64.sqrt());
    let pump =
        PumpConfig::from_g_minus(&params, &drive, 0.0, Complex64::new(g_minus, 0.0)).unwrap();
    let modes = eigenfrequencies(&params, &drive, &pump);
    assert_eq!(modes.regime, CouplingRegime::StrongCoupling);
    assert!(
        modes.splitting > modes.mean_linewidth,
        "splitting {} vs (κ+Γ0)/2 = {}",
        modes.splitting,
        modes.mean_linewidth
    );
    println!(
        "ACCEPTANCE 04 PASS: G = −0.21, 2√|G||g−| = 2π·500 kHz classifies strongCoupling, \
         splitting 2π·{:.1} kHz > (κ+Γ0)/2 = 2π·{:.1} kHz",
        ordinary(modes.splitting) / 1e3,
        ordinary(modes.mean_linewidth) / 1e3
    );
}

#[test]
fn acceptance_05_backaction_sign_inversion() {
    let params = example_device();
    let check = |gain: f64| -> f64 {
        let drive =
            DriveState::from_gain_target(&params, gain, angular(6e6), Some(angular(300e3)))
                .unwrap();
        let g_max = match nms_threshold(drive.kappa_driven, params.gamma0, gain) {
            Some(t) => 0.9 * t,
            None => drive.kappa_driven,
        };
        let mut sign_count = 0i32;
        for k in 1..=20 {
            let g = g_max * k as f64 / 20.0;
            let h = 1e-6 * g * g;
            let at = |g_sq: f64| {
                effective_linewidths(&params, &drive, g_sq.sqrt()).unwrap().0
            };
            let slope = (at(g * g + h) - at(g * g - h)) / (2.0 * h);
            sign_count += slope.signum() as i32;
        }
        sign_count as f64 / 20.0
    };
    // G < 0: damping grows with pump power (cooling from a blue pump)
    assert_eq!(check(-0.35), 1.0);
    // G > 0: damping shrinks (the standard blue-pump anti-damping)
    assert_eq!(check(1.2), -1.0);
    println!(
        "ACCEPTANCE 05 PASS: dΓeff/d|g−|² > 0 at 20 points for G = −0.35 and < 0 for G = +1.2"
    );
}

#[test]
fn acceptance_06_gain_sum_rule_scan() {
    let params = example_device();
    let mut checked = 0;
    let mut worst = 0.0f64;
    // 100-point scan over red detunings and photon numbers on both sides
    // of the unstable wedge (n < |Δ|/3|K| below, n > |Δ|/|K| above)
    for i in 0..10 {
        let delta_d = -angular(2e6) * (i + 1) as f64;
        let n_wedge = delta_d.abs() / params.kerr.abs();
        let below = [0.0, 0.2, 0.4, 0.6, 0.8].map(|f| f * n_wedge / 3.0);
        let above = [1.05, 1.3, 1.7, 2.2, 3.0].map(|f| f * n_wedge);
        for n_d in below.into_iter().chain(above) {
            let gi = gain_factor(delta_d, params.kerr, n_d).unwrap();
            let gs = gain_factor_signal(delta_d, params.kerr, n_d).unwrap();
            worst = worst.max((gi + gs - 1.0).abs());
            checked += 1;
        }
    }
    assert!(checked >= 100, "only {checked} valid scan points");
    assert!(worst <= 1e-12, "worst sum-rule defect {worst}");
    // undriven limit
    let undriven = gain_factor(-angular(1e6), params.kerr, 0.0).unwrap();
    assert_eq!(undriven, 1.0);
    println!(
        "ACCEPTANCE 06 PASS: Gs + Gi = 1 on {checked} working points \
         (worst defect {worst:.2e}), undriven Gi = 1"
    );
}

#[test]
fn acceptance_07_full_solve_vs_reduced_reflection() {
    let start = Instant::now();
    let params = example_device();
    let mut errors = Vec::new();
    for ratio in [3.0, 5.0, 10.0] {
        let drive = fig1_drive(&params, ratio);
        let pump = PumpConfig::from_g_minus(
            &params,
            &drive,
            0.0,
            Complex64::new(angular(50e3), 0.0),
        )
        .unwrap();
        let cmp = compare_reflection(&params, &drive, &pump, 201).unwrap();
        errors.push(cmp.max_rel_error_modulus);
    }
    assert!(errors[1] < 0.05, "5% budget exceeded at Ωi/κ = 5: {}", errors[1]);
    assert!(errors[2] < 0.05);
    assert!(
        errors[0] > errors[1] && errors[1] > errors[2],
        "errors not strictly decreasing: {errors:?}"
    );
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    println!(
        "ACCEPTANCE 07 PASS: full-solve vs reduced |S11| errors {:.4}/{:.4}/{:.4} \
         at Ωi/κ = 3/5/10, strictly decreasing ({elapsed:?})",
        errors[0], errors[1], errors[2]
    );
}

#[test]
fn acceptance_08_occupation_integrals() {
    let params = example_device();
    let drive = fig1_drive(&params, 20.0);
    let baths = BathOccupations::uniform(13.0, 0.0, 0.0).unwrap();
    let g_nms = nms_threshold(drive.kappa_driven, params.gamma0, drive.gain_g).unwrap();
    let mut worst = 0.0f64;
    for frac in [0.0, 0.5, 1.0, 1.5, 2.0] {
        let g = frac * g_nms;
        let pump =
            PumpConfig::from_g_minus(&params, &drive, 0.0, Complex64::new(g, 0.0)).unwrap();
        let (n_hf, n_rf) = occupation_integrals(&params, &drive, &pump, &baths, 40.0).unwrap();
        let closed = final_occupations(&params, &drive, g, &baths);
        worst = worst
            .max((n_rf - closed.n_fin_rf).abs() / closed.n_fin_rf)
            .max((n_hf - closed.n_fin_hf).abs() / closed.n_fin_hf);
    }
    assert!(worst < 0.01, "worst integral mismatch {worst}");

    let g_lim = 100.0 * drive.kappa_driven / drive.gain_g.abs().sqrt();
    let pump =
        PumpConfig::from_g_minus(&params, &drive, 0.0, Complex64::new(g_lim, 0.0)).unwrap();
    let (n_hf, n_rf) = occupation_integrals(&params, &drive, &pump, &baths, 120.0).unwrap();
    let closed = final_occupations(&params, &drive, g_lim, &baths);
    let lim_err = ((n_rf - closed.n_lim_rf).abs() / closed.n_lim_rf)
        .max((n_hf - closed.n_lim_hf).abs() / closed.n_lim_hf);
    assert!(lim_err < 0.005, "limit mismatch {lim_err}");
    println!(
        "ACCEPTANCE 08 PASS: (1/2π)∫Sn dΩ matches closed forms to {worst:.4} over 5 couplings; \
         g_eff = 100κ limits to {lim_err:.4}"
    );
}

#[test]
fn acceptance_09_blue_detuned_cooling_reproduction() {
    let params = example_device();
    let drive = fig1_drive(&params, 20.0);
    let baths = BathOccupations::uniform(13.0, 0.0, 0.0).unwrap();
    // locate the n_fin_rf = 3.5 crossing by bisection on |g−|
    let (mut lo, mut hi) = (0.0f64, angular(3e6));
    assert!(final_occupations(&params, &drive, hi, &baths).n_fin_rf < 3.5);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if final_occupations(&params, &drive, mid, &baths).n_fin_rf > 3.5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let occ = final_occupations(&params, &drive, 0.5 * (lo + hi), &baths);
    assert!((occ.n_fin_rf - 3.5).abs() < 1e-3);
    assert!(occ.n_fin_hf <= 1.05, "HF occupation {} at the crossing", occ.n_fin_hf);
    assert!(occ.n_lim_rf > occ.n_lim_hf, "no occupation imbalance");
    println!(
        "ACCEPTANCE 09 PASS: cooling 13 → 3.5 quanta at g_eff = 2π·{:.1} kHz with \
         nFinHF = {:.3} ≤ ~1; limits RF {:.3} > HF {:.3}",
        ordinary(occ.g_eff) / 1e3,
        occ.n_fin_hf,
        occ.n_lim_rf,
        occ.n_lim_hf
    );
}

fn synth_single(params: &CircuitParams, drive: &DriveState, n: usize) -> Spectrum {
    let grid = symmetric_grid_hz(ordinary(drive.omega_idler), 300e3, n, 8.0);
    s11_single_mode(
        &grid,
        drive.omega_idler,
        drive.kappa_driven,
        params.kappa_e,
        drive.gain_g,
    )
    .unwrap()
}

#[test]
fn acceptance_10_fit_round_trips_and_error_calibration() {
    let start = Instant::now();
    let params = example_device();
    let drive = fig1_drive(&params, 20.0);
    let mut worst_noiseless = 0.0f64;

    // single-mode reflection
    let data = synth_single(&params, &drive, 1001);
    let fit = fit_reflection(
        &FitProblem::new(FitModel::SingleModeS11, data)
            .free("omega0", drive.omega_idler + 0.2 * drive.kappa_driven)
            .free("kappa", 1.2 * drive.kappa_driven)
            .free("gainG", 0.8 * drive.gain_g)
            .fix("kappaE", params.kappa_e),
    )
    .unwrap();
    assert!(fit.converged);
    for (name, truth) in [
        ("omega0", drive.omega_idler),
        ("kappa", drive.kappa_driven),
        ("gainG", drive.gain_g),
    ] {
        worst_noiseless = worst_noiseless.max((fit.estimates[name] - truth).abs() / truth.abs());
    }

    // two-mode reflection
    let grid = symmetric_grid_hz(ordinary(drive.omega_d), ordinary(drive.omega_i), 1601, 1.6);
    let values: Vec<Complex64> = grid
        .iter()
        .map(|&f| {
            pptk_core::kerr::two_mode_reflection(
                angular(f),
                drive.omega_d,
                drive.omega_i,
                drive.kappa_driven,
                params.kappa_e,
                drive.gain_g,
            )
        })
        .collect();
    let data = Spectrum::new_reflection(grid, values, serde_json::Value::Null).unwrap();
    let fit = fit_reflection(
        &FitProblem::new(FitModel::TwoModeS11, data)
            .free("Omega0", 1.15 * drive.omega_i)
            .free("kappa", 0.85 * drive.kappa_driven)
            .free("gainG", 1.2 * drive.gain_g)
            .fix("omegaD", drive.omega_d)
            .fix("kappaE", params.kappa_e),
    )
    .unwrap();
    assert!(fit.converged);
    for (name, truth) in [
        ("Omega0", drive.omega_i),
        ("kappa", drive.kappa_driven),
        ("gainG", drive.gain_g),
    ] {
        worst_noiseless = worst_noiseless.max((fit.estimates[name] - truth).abs() / truth.abs());
    }

    // coupled factored reflection
    let g_minus = angular(70e3);
    let (gamma_eff, kappa_eff) = effective_linewidths(&params, &drive, g_minus).unwrap();
    let grid = symmetric_grid_hz(ordinary(drive.omega_idler), 300e3, 1201, 8.0);
    let values: Vec<Complex64> = grid
        .iter()
        .map(|&f| {
            Complex64::new(1.0, 0.0)
                - params.kappa_e
                    * pptk_core::susceptibility::chi_hf_effective_factored(
                        angular(f) - drive.omega_idler - params.omega_rf,
                        drive.gain_g,
                        params.gamma0,
                        gamma_eff,
                        kappa_eff,
                        params.omega_rf,
                    )
        })
        .collect();
    let data = Spectrum::new_reflection(grid, values, serde_json::Value::Null).unwrap();
    let fit = fit_reflection(
        &FitProblem::new(FitModel::CoupledS11Factored, data)
            .free("omega0", drive.omega_idler + 0.1 * drive.kappa_driven)
            .free("gammaEff", 1.2 * gamma_eff)
            .free("kappaEff", 0.8 * kappa_eff)
            .free("gainG", 0.8 * drive.gain_g)
            .fix("Gamma0", params.gamma0)
            .fix("kappaE", params.kappa_e),
    )
    .unwrap();
    assert!(fit.converged);
    for (name, truth) in [
        ("gammaEff", gamma_eff),
        ("kappaEff", kappa_eff),
        ("gainG", drive.gain_g),
    ] {
        worst_noiseless = worst_noiseless.max((fit.estimates[name] - truth).abs() / truth.abs());
    }

    // output PSD
    let pump =
        PumpConfig::from_g_minus(&params, &drive, 0.0, Complex64::new(angular(60e3), 0.0))
            .unwrap();
    let baths = BathOccupations::uniform(13.0, 0.0, 11.0).unwrap();
    let center = ordinary(pump.omega_p - params.omega_rf);
    let grid = symmetric_grid_hz(center, ordinary(drive.kappa_driven), 1001, 8.0);
    let data = psd_output_quanta(&grid, &params, &drive, &pump, &baths).unwrap();
    let ctx = PsdContext {
        params,
        drive,
        delta: 0.0,
    };
    let fit = fit_psd(
        &FitProblem::new(FitModel::PsdCooling(ctx), data)
            .free("gMinusSq", 1.3 * pump.g_sq())
            .free("nThRF", 9.0)
            .free("nAdd", 8.0)
            .fix("gainScale", 1.0),
    )
    .unwrap();
    assert!(fit.converged);
    for (name, truth) in [
        ("gMinusSq", pump.g_sq()),
        ("nThRF", 13.0),
        ("nAdd", 11.0),
    ] {
        worst_noiseless = worst_noiseless.max((fit.estimates[name] - truth).abs() / truth.abs());
    }
    assert!(
        worst_noiseless < 1e-6,
        "noiseless recovery error {worst_noiseless}"
    );

    // Monte-Carlo calibration of the standard errors, 200 seeds
    let clean = synth_single(&params, &drive, 401);
    let mut covered = 0usize;
    for seed in 0..200u64 {
        let noisy = add_reflection_noise(&clean, 0.01, seed).unwrap();
        let fit = fit_reflection(
            &FitProblem::new(FitModel::SingleModeS11, noisy)
                .free("omega0", drive.omega_idler + 0.1 * drive.kappa_driven)
                .free("kappa", 1.1 * drive.kappa_driven)
                .free("gainG", 0.9 * drive.gain_g)
                .fix("kappaE", params.kappa_e),
        )
        .unwrap();
        let err = (fit.estimates["gainG"] - drive.gain_g).abs();
        if err <= 3.0 * fit.standard_errors["gainG"] {
            covered += 1;
        }
    }
    let elapsed = start.elapsed();
    assert!(covered >= 190, "coverage {covered}/200");
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
    println!(
        "ACCEPTANCE 10 PASS: noiseless round trips to {worst_noiseless:.2e} across all four \
         models; 3σ coverage {covered}/200 ({elapsed:?})"
    );
}

#[test]
fn acceptance_11_effective_bath_identities() {
    // canonical correlators at unit gain
    for n_th in [0.0, 0.4, 7.0] {
        let (up, down) = effective_noise_occupations(1.0, n_th).unwrap();
        assert_eq!(up, n_th);
        assert_eq!(down, n_th + 1.0);
    }
    // the correlator difference is 1/G for every nonzero gain (1 at G=1)
    for gain in [1.0, -0.35, -1.0, 0.2, 2.5] {
        for n_th in [0.0, 0.6, 3.0] {
            let (up, down) = effective_noise_occupations(gain, n_th).unwrap();
            assert!(
                ((down - up) - 1.0 / gain).abs() <= 1e-12 / gain.abs(),
                "difference {} vs 1/G {}",
                down - up,
                1.0 / gain
            );
        }
    }
    // vacuum bath at G = −0.35: n_up = (G−1)/G = 27/7
    let (up, down) = effective_noise_occupations(-0.35, 0.0).unwrap();
    assert!((up - 27.0 / 7.0).abs() < 1e-12, "n_up = {up}");
    assert_eq!(down, 1.0);
    println!(
        "ACCEPTANCE 11 PASS: effective-bath identities (G = 1 thermal pair; \
         n_down − n_up = 1/G; n_up(0, −0.35) = 27/7 ≈ {:.6})",
        27.0 / 7.0
    );
}

#[test]
fn acceptance_12_bit_exact_csv_round_trips() {
    let mut rng = ChaCha12Rng::seed_from_u64(0xACCE_0012);
    for case in 0..10 {
        let n = 16 + (rng.random::<u64>() % 64) as usize;
        let start = 1e6 + 7.2e9 * rng.random::<f64>();
        let step = 1.0 + 1e5 * rng.random::<f64>();
        let grid: Vec<f64> = (0..n).map(|i| start + step * i as f64).collect();
        let spectrum = if case % 2 == 0 {
            let values: Vec<Complex64> = (0..n)
                .map(|_| {
                    Complex64::new(
                        4.0 * rng.random::<f64>() - 2.0,
                        4.0 * rng.random::<f64>() - 2.0,
                    )
                })
                .collect();
            Spectrum::new_reflection(grid.clone(), values, serde_json::Value::Null).unwrap()
        } else {
            let values: Vec<f64> = (0..n).map(|_| 1e3 * rng.random::<f64>()).collect();
            Spectrum::new_psd(grid.clone(), values, serde_json::Value::Null).unwrap()
        };
        let text = pptk_core::io::spectrum_to_csv(&spectrum);
        let back = pptk_core::io::parse_spectrum_csv(&text).unwrap();
        assert_eq!(back.grid_hz(), spectrum.grid_hz(), "case {case}");
        match (back.reflection_values(), spectrum.reflection_values()) {
            (Some(a), Some(b)) => assert_eq!(a, b, "case {case}"),
            _ => assert_eq!(
                back.psd_values().unwrap(),
                spectrum.psd_values().unwrap(),
                "case {case}"
            ),
        }
    }
    println!("ACCEPTANCE 12 PASS: bit-exact CSV round trips for 10 random spectra");
}
