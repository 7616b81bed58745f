use nvrelax_core::analysis::{
    fit_line_width, sensitivity, spectral_overlap, LineProfile, LineShape,
};
use nvrelax_core::odmr::{
    all_transitions, default_misaligned_direction, degeneracy_lift, DEFAULT_CR_RANGE_MHZ,
};
use nvrelax_core::{PhysicalConstants, Vector3};

fn amplitudes(max: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| max * i as f64 / (n - 1) as f64).collect()
}

#[test]
fn transitions_in_band_and_continuous() {
    let c = PhysicalConstants::default();
    let grid = amplitudes(200.0, 401);
    let sets = all_transitions(&Vector3::new(0.3, -0.5, 0.8), &grid, 4.0, &c).unwrap();
    for s in &sets {
        assert!(s.flat().iter().all(|v| (2.0..=4.0).contains(v)));
    }
    // 0.5 G steps move a line by at most γ·0.5 G = 1.4 MHz
    for w in sets.windows(2) {
        for (a, b) in w[0].flat().iter().zip(w[1].flat()) {
            assert!((a - b).abs() * 1e3 < 1.41, "jump {a} -> {b}");
        }
    }
}

#[test]
fn multiset_independent_of_class_labels() {
    // reflecting the field through a mirror plane of the cube permutes the classes
    let c = PhysicalConstants::default();
    let b = Vector3::new(0.3, -0.5, 0.8);
    let mirrored = Vector3::new(b.y, b.x, b.z);
    let sort = |v: [f64; 8]| {
        let mut v = v.to_vec();
        v.sort_by(f64::total_cmp);
        v
    };
    let a = all_transitions(&b, &[37.0], 2.0, &c).unwrap();
    let m = all_transitions(&mirrored, &[37.0], 2.0, &c).unwrap();
    for (x, y) in sort(a[0].flat()).iter().zip(sort(m[0].flat())) {
        assert!((x - y).abs() < 1e-12);
    }
}

#[test]
fn default_direction_lift_in_band() {
    let c = PhysicalConstants::default();
    let r = degeneracy_lift(
        &default_misaligned_direction(),
        &amplitudes(40.0, 161),
        DEFAULT_CR_RANGE_MHZ,
        0.0,
        &c,
    )
    .unwrap();
    let lift = r.lift_gauss.unwrap();
    assert!((10.0..=18.0).contains(&lift), "{lift}");
    let earliest = r
        .curves
        .iter()
        .filter_map(|p| p.crossing_gauss)
        .fold(f64::INFINITY, f64::min);
    assert!(earliest <= lift);
    assert!((default_misaligned_direction().x.acos().to_degrees() - 24.0).abs() < 1e-12);
}

#[test]
fn cr_width_from_two_lorentzians() {
    let l = LineProfile::lorentzian(4.02, 2870.0);
    let d: Vec<f64> = (0..=200).map(|i| -60.0 + 0.6 * i as f64).collect();
    let s = spectral_overlap(&l, &l, &d).unwrap();
    let fit = fit_line_width(&d, &s, &LineShape::Lorentzian).unwrap();
    assert!((fit.width_mhz / 8.04 - 1.0).abs() < 0.01);
}

#[test]
fn magnetometry_sensitivity() {
    let eta = sensitivity(1.5e-6, 3e-3).unwrap();
    assert!((eta * 1e9 - 82.0).abs() <= 1.0);
}
