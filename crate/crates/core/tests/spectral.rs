use approx::assert_relative_eq;
use vacshift_core::basis::{build_basis, dispersion, dispersion_root_count, BoxParams};
use vacshift_core::lattice::verify_spectrum_lattice;

#[test]
fn massless_lattice_converges_at_second_order() {
    let b = build_basis(BoxParams::new(1.0, 0.0).unwrap(), 4).unwrap();
    let r = verify_spectrum_lattice(&b, 3, &[200, 400]).unwrap();
    assert!(r.grids.iter().all(|g| g.max_discrepancy < 1e-3));
    assert!(r.is_converging());
    assert_relative_eq!(r.observed_orders[0], 2.0, epsilon = 0.05);
}

#[test]
fn massive_lattice_extrapolates_to_analytic_levels() {
    let b = build_basis(BoxParams::new(1.0, 1.0).unwrap(), 4).unwrap();
    let r = verify_spectrum_lattice(&b, 3, &[400, 800, 1600]).unwrap();
    assert!(r.is_converging());
    let d = r.extrapolated_max_discrepancy().unwrap();
    assert!(d < 1e-6, "extrapolated discrepancy {d:e}");
}

#[test]
fn heavy_mass_still_converges() {
    let b = build_basis(BoxParams::new(1.0, 2.0).unwrap(), 3).unwrap();
    assert!(verify_spectrum_lattice(&b, 3, &[200, 400, 800]).unwrap().is_converging());
}

#[test]
fn massive_energies_solve_dispersion() {
    let p = BoxParams::new(0.7, 1.5).unwrap();
    let b = build_basis(p, 20).unwrap();
    for mode in b.iter() {
        assert!(dispersion(&p, mode.momentum).abs() < 1e-12 * (1.0 + mode.momentum));
        assert_relative_eq!(mode.energy.abs(), mode.momentum.hypot(p.m), max_relative = 1e-14);
    }
    let k_max = b.mode(20).unwrap().momentum + 1e-6;
    assert_eq!(dispersion_root_count(&p, k_max), 20);
}

#[test]
fn box_size_scales_massless_spectrum() {
    let e1 = build_basis(BoxParams::new(1.0, 0.0).unwrap(), 5).unwrap();
    let e2 = build_basis(BoxParams::new(2.0, 0.0).unwrap(), 5).unwrap();
    for n in e1.indices_up_to(5) {
        assert_relative_eq!(e1.energy(n).unwrap(), 2.0 * e2.energy(n).unwrap(), max_relative = 1e-14);
    }
}
