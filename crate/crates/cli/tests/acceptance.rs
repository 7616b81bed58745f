//! Acceptance criteria, one line each. Run with `--nocapture` to see the report.

use std::f64::consts::{PI, TAU};
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::Rotation3;
use num_complex::Complex64;
use nvrelax_core::dipolar::{build_two_spin_hamiltonian, matrix_element, TwoSpinOperator};
use nvrelax_core::eta::{angular_average_rotated, ETA_PREFACTOR};
use nvrelax_core::relaxation::{laplace_polarization, log_spaced, rate_normalization};
use nvrelax_core::spin::operators::{hermiticity_defect, ket_0, ket_minus, ket_plus, Operator3};
use nvrelax_core::{
    build_hamiltonian, degeneracy_lift, diagonalize, eta_bar, fit_beta, fit_decay, fit_line_width,
    flip_flop_amplitude, odmr, spectral_overlap, transverse_field_scan, BasisChoice, DecayCurve,
    DecayModel, EtaScenario, FieldConfiguration, FieldOrientationScenario, FitOptions, LineProfile,
    LineShape, NvClass, NvClassFrame, PairGeometry, PhysicalConstants, Process, QuadratureSpec,
    Vector3, XMode, ZAngle,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    id: &'static str,
    pass: bool,
    detail: String,
}

fn nvrelax(args: &[&str]) -> (Vec<u8>, Duration) {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_nvrelax"))
        .env_remove("NVRELAX_OUT_DIR")
        .args(args)
        .output()
        .expect("spawn nvrelax");
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    (out.stdout, start.elapsed())
}

fn data_rows(csv: &[u8]) -> Vec<Vec<String>> {
    String::from_utf8(csv.to_vec())
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

fn criterion_1() -> Outcome {
    let (out, elapsed) = nvrelax(&["eta-table"]);
    let rows = data_rows(&out);
    let v: Vec<[f64; 3]> = rows
        .iter()
        .map(|r| {
            [
                r[1].parse().unwrap(),
                r[2].parse().unwrap(),
                r[3].parse().unwrap(),
            ]
        })
        .collect();
    let exact_mag = 2.0 / (3.0 * 3f64.sqrt());
    let exact_al = 4.0 / (3.0 * 3f64.sqrt());
    let expected = [
        [0.3849, 0.6507, 0.8328],
        [0.7110, 0.6828, 0.6828],
        [0.7698, 0.6951, 0.6951],
    ];
    let mut pass = rows.len() == 3
        && (v[0][0] - exact_mag).abs() < 1e-10
        && (v[2][0] - exact_al).abs() < 1e-10
        && elapsed < Duration::from_secs(30);
    for i in 0..3 {
        for j in 0..3 {
            pass &= within(v[i][j], expected[i][j], 0.002);
        }
    }
    Outcome {
        id: "1",
        pass,
        detail: format!(
            "eta-table MAG {:.4}/{:.4}/{:.4} NM-rand {:.4}/{:.4}/{:.4} NM-al {:.4}/{:.4}/{:.4}; \
             closed forms off by {:.1e}, {:.1e}; {:.2} s",
            v[0][0],
            v[0][1],
            v[0][2],
            v[1][0],
            v[1][1],
            v[1][2],
            v[2][0],
            v[2][1],
            v[2][2],
            (v[0][0] - exact_mag).abs(),
            (v[2][0] - exact_al).abs(),
            elapsed.as_secs_f64()
        ),
    }
}

fn criterion_2() -> Outcome {
    let (out, _) = nvrelax(&["multipliers"]);
    let rows = data_rows(&out);
    let get = |tag: &str| -> f64 {
        rows.iter()
            .find(|r| r[0] == tag)
            .map(|r| r[6].parse().unwrap())
            .unwrap()
    };
    let checks = [
        ("PLANE_100", 7.24, 0.1),
        ("PLANE_110", 10.0, 0.1),
        ("AXIS_111", 28.4, 0.2),
        ("AXIS_100", 42.8, 0.3),
        ("ZERO_FIELD", 51.4, 0.3),
    ];
    let mut pass = within(get("RANDOM"), 1.0, 1e-12);
    let mut detail = String::from("multipliers");
    for (tag, target, tol) in checks {
        let v = get(tag);
        pass &= within(v, target, tol);
        detail.push_str(&format!(" {tag}={v:.3}"));
    }
    let ratio = get("ZERO_FIELD") / get("AXIS_100");
    pass &= (1.18..=1.22).contains(&ratio);
    detail.push_str(&format!("; ZERO_FIELD/AXIS_100={ratio:.4}"));
    assert_eq!(
        FieldOrientationScenario::ALL.len(),
        rows.len(),
        "every scenario is listed"
    );
    Outcome {
        id: "2",
        pass,
        detail,
    }
}

fn criterion_3() -> Outcome {
    let q = QuadratureSpec::default();
    let targets = [
        (ZAngle::Same, 5.55e-2),
        (ZAngle::Close, 9.39e-2),
        (ZAngle::Far, 1.20e-1),
    ];
    let mut pass = true;
    let mut detail = String::from("MAGNETIC η̄");
    for (z, target) in targets {
        let v = eta_bar(
            &EtaScenario::flip_flop(BasisChoice::Magnetic, z, XMode::Random),
            &q,
        )
        .unwrap();
        pass &= within(v, target, 1e-3);
        detail.push_str(&format!(" {}={v:.5}", z.label()));
    }
    detail.push_str(&format!(" (prefactor {ETA_PREFACTOR:.6})"));
    Outcome {
        id: "3",
        pass,
        detail,
    }
}

fn criterion_4() -> Outcome {
    let consts = PhysicalConstants::default();
    let frame = NvClassFrame::canonical(NvClass::C1);
    let scan = transverse_field_scan(&frame, &frame.x, &[0.0, 150.0], 4.0, &consts).unwrap();
    let dnu0 = scan[0].splitting_mhz;
    let dnu = scan[1].splitting_mhz;
    let overlap = scan[1].matching;
    let splitting_ok = (65.0..=75.0).contains(&dnu) && within(dnu0, 8.0, 1e-6);
    let overlap_ok = overlap > 0.98;
    let mut detail = format!(
        "B⊥=150 G, E⊥=4 MHz: Δν={dnu:.3} MHz [{}], Δν(0)={dnu0:.9} MHz [{}], |⟨e|+⟩|²={overlap:.6} > 0.98 [{}]",
        if splitting_ok { "ok" } else { "FAIL" },
        if within(dnu0, 8.0, 1e-6) { "ok" } else { "FAIL" },
        if overlap_ok { "ok" } else { "FAIL" },
    );
    if !overlap_ok {
        // two-level mixing of |0⟩ with |+⟩: the bound is crossed just below 150 G
        let below = transverse_field_scan(&frame, &frame.x, &[149.0], 4.0, &consts).unwrap();
        detail.push_str(&format!(
            "; overlap at 149 G = {:.6}, the 0.98 bound is reached just below 150 G",
            below[0].matching
        ));
    }
    Outcome {
        id: "4",
        pass: splitting_ok && overlap_ok,
        detail,
    }
}

fn criterion_5() -> Outcome {
    let amps: Vec<f64> = (0..=400).map(|i| 0.1 * i as f64).collect();
    let rep = degeneracy_lift(
        &odmr::default_misaligned_direction(),
        &amps,
        odmr::DEFAULT_CR_RANGE_MHZ,
        0.0,
        &PhysicalConstants::default(),
    )
    .unwrap();
    let lift = rep.lift_gauss;
    Outcome {
        id: "5",
        pass: lift.is_some_and(|b| (10.0..=18.0).contains(&b)),
        detail: match lift {
            Some(b) => format!("24° off [100]: smallest splitting crosses 8.04 MHz at {b:.3} G"),
            None => "24° off [100]: smallest splitting never crosses 8.04 MHz below 40 G".into(),
        },
    }
}

fn criterion_6() -> Outcome {
    let t_char = 1.0;
    let mut worst: f64 = 0.0;
    for r in [0.01, 0.25, 1.0, 4.0, 100.0] {
        let got = laplace_polarization(r * t_char, t_char);
        worst = worst.max((got - (-r.sqrt()).exp()).abs());
    }
    let norm = (rate_normalization(t_char) - 1.0).abs();
    Outcome {
        id: "6",
        pass: worst < 1e-6 && norm < 1e-6,
        detail: format!("max Laplace error {worst:.2e}, normalization error {norm:.2e}"),
    }
}

fn criterion_7() -> Outcome {
    let d: Vec<f64> = (-200..=200).map(|i| 0.1 * i as f64).collect();
    let sigma = 1.3;
    let g = LineProfile::gaussian(sigma, 0.0);
    let l = LineProfile::lorentzian(sigma, 0.0);
    let wg = fit_line_width(
        &d,
        &spectral_overlap(&g, &g, &d).unwrap(),
        &LineShape::Gaussian,
    )
    .unwrap()
    .width_mhz;
    let wl = fit_line_width(
        &d,
        &spectral_overlap(&l, &l, &d).unwrap(),
        &LineShape::Lorentzian,
    )
    .unwrap()
    .width_mhz;
    let eg = wg / (2f64.sqrt() * sigma) - 1.0;
    let el = wl / (2.0 * sigma) - 1.0;
    Outcome {
        id: "7",
        pass: eg.abs() < 0.01 && el.abs() < 0.01,
        detail: format!(
            "σ={sigma}: G⊗G width {wg:.5} (rel {eg:+.1e}), L⊗L width {wl:.5} (rel {el:+.1e})"
        ),
    }
}

fn criterion_8() -> Outcome {
    let opts = FitOptions::default();
    let mut pass = true;
    let mut detail = String::new();
    for t1dd in [0.6e-3, 13.0e-3] {
        let truth = DecayModel::two_channel(1.0, t1dd, 3.62e-3);
        let tau = log_spaced(20e-3 * 1e-3, 20e-3, 60).unwrap();
        let curve = DecayCurve::synthetic(&truth, &tau, 0.0, 0).unwrap();
        let fit = fit_decay(&curve, Some(3.62e-3), &opts).unwrap();
        let rel = fit.model.t1_dd_s / t1dd - 1.0;
        pass &= rel.abs() < 0.02 && fit.converged;
        detail.push_str(&format!("T1_dd {:.1} ms → rel {rel:+.1e}; ", t1dd * 1e3));
    }
    for beta in [0.5, 1.0] {
        let truth = DecayModel::stretched(1.0, 1e-3, beta);
        let tau = log_spaced(1e-5, 10e-3, 50).unwrap();
        let curve = DecayCurve::synthetic(&truth, &tau, 0.0, 0).unwrap();
        let fit = fit_beta(&curve, &opts).unwrap();
        pass &= within(fit.model.beta, beta, 0.01);
        detail.push_str(&format!("β {beta} → {:.5}; ", fit.model.beta));
    }
    Outcome {
        id: "8",
        pass,
        detail: detail.trim_end_matches("; ").to_string(),
    }
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vector3<f64> {
    let c: f64 = rng.gen_range(-1.0..1.0);
    let p: f64 = rng.gen_range(0.0..TAU);
    let s = (1.0 - c * c).sqrt();
    Vector3::new(s * p.cos(), s * p.sin(), c)
}

fn random_frame(rng: &mut ChaCha8Rng) -> NvClassFrame {
    loop {
        let z = random_unit(rng);
        let h = random_unit(rng);
        let x = h - z * z.dot(&h);
        if x.norm() > 1e-3 {
            return NvClassFrame::from_axes(z, x.normalize()).unwrap();
        }
    }
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let consts = PhysicalConstants::default();

    // Hamiltonian trace and Hermiticity
    let mut ham_err: f64 = 0.0;
    for _ in 0..200 {
        let class = NvClass::from_index(rng.gen_range(0..4)).unwrap();
        let b = random_unit(&mut rng) * rng.gen_range(0.0..300.0);
        let f =
            FieldConfiguration::new(b, rng.gen_range(0.0..10.0), rng.gen_range(0.0..TAU)).unwrap();
        let h = build_hamiltonian(&NvClassFrame::in_field(class, &b), &f, &consts).unwrap();
        let tr = (h.trace() - Complex64::new(2.0 * consts.zfs_ghz, 0.0)).norm();
        ham_err = ham_err.max(tr).max(hermiticity_defect(&h));
        ham_err = ham_err.max(diagonalize(&h).unwrap().residual);
    }

    // η̄ frame invariance
    let q = QuadratureSpec::default();
    let scenarios = [
        EtaScenario::flip_flop(BasisChoice::Magnetic, ZAngle::Close, XMode::Random),
        EtaScenario::flip_flop(BasisChoice::Magnetic, ZAngle::Far, XMode::Random),
        EtaScenario::flip_flop(BasisChoice::NonMagnetic, ZAngle::Same, XMode::Random),
        EtaScenario::flip_flop(BasisChoice::NonMagnetic, ZAngle::Close, XMode::Aligned),
        EtaScenario::flip_flop(BasisChoice::NonMagnetic, ZAngle::Far, XMode::Random),
    ];
    let mut rot_err: f64 = 0.0;
    for s in scenarios {
        let base = angular_average_rotated(&s, &q, &Rotation3::identity()).unwrap();
        for _ in 0..5 {
            let r = Rotation3::from_euler_angles(
                rng.gen_range(-PI..PI),
                rng.gen_range(-PI / 2.0..PI / 2.0),
                rng.gen_range(-PI..PI),
            );
            rot_err = rot_err.max((angular_average_rotated(&s, &q, &r).unwrap() - base).abs());
        }
    }

    // basis conjugation
    let u1 = Operator3::from_columns(&[ket_minus(0.0), ket_0(), ket_plus(0.0)]);
    let uu = TwoSpinOperator::from_fn(|r, c| u1[(r / 3, c / 3)] * u1[(r % 3, c % 3)]);
    let mut conj_err: f64 = 0.0;
    for _ in 0..50 {
        let g = PairGeometry::new(
            random_unit(&mut rng),
            random_frame(&mut rng),
            random_frame(&mut rng),
        )
        .unwrap();
        let mag = build_two_spin_hamiltonian(&g, BasisChoice::Magnetic, true).unwrap();
        let nm = build_two_spin_hamiltonian(&g, BasisChoice::NonMagnetic, true).unwrap();
        conj_err = conj_err.max((uu.adjoint() * mag * uu - nm).norm());
    }

    // flip-flop against ½|1 − 3cos²θ|, the normalization whose sphere average is 2/(3√3)
    let mut ff_err: f64 = 0.0;
    let frame = NvClassFrame::canonical(NvClass::C1);
    for _ in 0..20 {
        let u = random_unit(&mut rng);
        let c = u.dot(&frame.z);
        let got = flip_flop_amplitude(
            &PairGeometry::new(u, frame, frame).unwrap(),
            BasisChoice::Magnetic,
        )
        .unwrap();
        ff_err = ff_err.max((got - 0.5 * (1.0 - 3.0 * c * c).abs()).abs());
    }

    // axial double flip
    let mut df: f64 = 0.0;
    for class in NvClass::ALL {
        let f = NvClassFrame::canonical(class);
        let g = PairGeometry::new(f.z, f, f).unwrap();
        df = df.max(
            matrix_element(&g, BasisChoice::Magnetic, Process::DoubleFlip, false)
                .unwrap()
                .norm(),
        );
    }

    let pass =
        ham_err < 1e-10 && rot_err < 1e-8 && conj_err < 1e-12 && ff_err < 1e-10 && df < 1e-15;
    Outcome {
        id: "9",
        pass,
        detail: format!(
            "trace/Hermiticity/residual {ham_err:.1e}, η̄ rotation {rot_err:.1e}, \
             basis conjugation {conj_err:.1e}, flip-flop {ff_err:.1e}, axial double-flip {df:.1e}"
        ),
    }
}

#[test]
fn acceptance() {
    let start = Instant::now();
    let mut outcomes = vec![
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(),
        criterion_9(),
    ];

    let args = ["eta-table"];
    let deterministic = nvrelax(&args).0 == nvrelax(&args).0
        && nvrelax(&["degeneracy"]).0 == nvrelax(&["degeneracy"]).0
        && criterion_8().detail == outcomes[7].detail;
    let elapsed = start.elapsed();
    outcomes.push(Outcome {
        id: "10",
        pass: deterministic && elapsed < Duration::from_secs(120),
        detail: format!(
            "suite {:.1} s (< 120 s), repeated runs identical: {deterministic}",
            elapsed.as_secs_f64()
        ),
    });

    println!();
    for o in &outcomes {
        println!(
            "criterion {:>2}: {} | {}",
            o.id,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    let failed: Vec<&str> = outcomes.iter().filter(|o| !o.pass).map(|o| o.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
