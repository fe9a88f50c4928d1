use approx::assert_relative_eq;
use vacshift_core::basis::{build_basis, BoxParams};
use vacshift_core::elements::build_table;
use vacshift_core::fock::{build_operators, ModeWindow, VacuumChoice};
use vacshift_core::potential::Potential;
use vacshift_core::vacuum::{vacuum_shift_report, Truncation};

fn setup(k_neg: usize, k_pos: usize, vac: VacuumChoice) -> (vacshift_core::fock::FockOperatorSet, vacshift_core::elements::MatrixElementTable) {
    let p = BoxParams::new(1.0, 0.0).unwrap();
    let b = build_basis(p, k_neg.max(k_pos)).unwrap();
    let w = ModeWindow::new(k_neg, k_pos).unwrap();
    let t = build_table(&b, &Potential::step_well(-1.0, 0.5, &p).unwrap(), w.index_window()).unwrap();
    (build_operators(&t, w, vac).unwrap(), t)
}

#[test]
fn standard_vacuum_matches_single_particle_sums() {
    let (ops, t) = setup(3, 3, VacuumChoice::Standard);
    let (e1, e2) = ops.pt_from_spectrum().unwrap();
    let r = vacuum_shift_report(&t, Truncation::new(3, 3, 0).unwrap()).unwrap();
    assert_relative_eq!(e1, r.e1, max_relative = 1e-12);
    assert_relative_eq!(e2, r.de2_qft_standard, max_relative = 1e-12);
    let spec = ops.free_sector_spectrum();
    assert_eq!(spec[0], 0.0);
    assert!(spec[1..].iter().all(|&e| e > 0.0));
}

#[test]
fn band_vacuum_matches_redefined_sum_and_hole_theory() {
    let vac = VacuumChoice::Band { l: 2 };
    let (ops, t) = setup(4, 3, vac);
    let (_, e2) = ops.pt_from_spectrum().unwrap();
    let r = vacuum_shift_report(&t, vac.truncation(ops.window())).unwrap();
    assert_relative_eq!(e2, r.de2_qft_redefined, max_relative = 1e-12);
    assert_relative_eq!(e2, r.de2_hole, max_relative = 1e-12);
}

#[test]
fn exact_shift_tracks_vacuum_not_ground_state() {
    let (ops, _) = setup(4, 3, VacuumChoice::Band { l: 2 });
    let e = ops.exact_vacuum_shift(0.05).unwrap();
    assert!(e.overlap > 0.9);
    assert!(e.sector_ground < e.shift);
}

#[test]
fn symmetric_window_has_no_cubic_term() {
    // particle-hole conjugation with complex conjugation maps V to -V
    let (ops, _) = setup(4, 4, VacuumChoice::Standard);
    let (e1, e2) = ops.pt_from_spectrum().unwrap();
    let res = |l: f64| (ops.exact_vacuum_shift(l).unwrap().shift - l * e1 - l * l * e2).abs();
    let slope = (res(0.1) / res(0.05)).log2();
    assert_relative_eq!(slope, 4.0, epsilon = 0.05);
}
