use proptest::prelude::*;
use vacshift_core::basis::{build_basis, BoxParams};
use vacshift_core::elements::{build_table, IndexWindow, MatrixElementTable};
use vacshift_core::fock::{build_operators, ModeWindow, VacuumChoice};
use vacshift_core::potential::{make_gauge_potential, ChiSpec, Potential, Profile};
use vacshift_core::vacuum::x_l1_antisymmetry;
use vacshift_core::Complex64;

fn random_table(l: usize, values: &[(f64, f64)]) -> MatrixElementTable {
    let window = IndexWindow::square(l, 0);
    let energies = (1..=l as i32).map(|j| (-j, -(j as f64) - 0.25 * j as f64 * j as f64)).collect();
    let n = window.rows.len();
    let mut v = vec![Complex64::new(0.0, 0.0); n * n];
    let mut k = 0;
    for i in 0..n {
        v[i * n + i] = Complex64::new(values[k % values.len()].0, 0.0);
        k += 1;
        for j in i + 1..n {
            let (re, im) = values[k % values.len()];
            v[i * n + j] = Complex64::new(re, im);
            v[j * n + i] = Complex64::new(re, -im);
            k += 1;
        }
    }
    MatrixElementTable::from_values(window, energies, v).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn x_l1_cancels_pairwise(l in 2usize..12, values in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 1..80)) {
        let x = x_l1_antisymmetry(&random_table(l, &values), l).unwrap();
        prop_assert!(x.pairwise_sum.abs() <= 1e-14 * x.abs_total);
    }

    #[test]
    fn basis_orthonormal(a in 0.3f64..3.0, m in 0.0f64..4.0) {
        let b = build_basis(BoxParams::new(a, m).unwrap(), 6).unwrap();
        prop_assert!(b.orthonormality_defect(6).unwrap() < 1e-10);
        prop_assert!(b.eigen_residual(41) < 1e-8 * (1.0 + m));
    }

    #[test]
    fn gauge_potential_hermitian(coeffs in prop::collection::vec(-2.0f64..2.0, 1..5), bump in any::<bool>()) {
        let p = BoxParams::new(1.0, 0.5).unwrap();
        let spec = if bump { ChiSpec::bump_polynomial(coeffs) } else { ChiSpec::sine_series(coeffs) };
        let pot = make_gauge_potential(spec, &p).unwrap();
        prop_assert_eq!(pot.hermiticity_defect(51), 0.0);
        let b = build_basis(p, 3).unwrap();
        let t = build_table(&b, &pot, IndexWindow::symmetric(3)).unwrap();
        prop_assert!(t.hermiticity_defect() < 1e-12);
    }

    #[test]
    fn fock_algebra_exact(k_neg in 1usize..5, k_pos in 1usize..5, depth in 0.2f64..3.0, band in any::<bool>()) {
        let p = BoxParams::new(1.0, 0.3).unwrap();
        let b = build_basis(p, k_neg.max(k_pos)).unwrap();
        let pot = Potential::general(Profile::Step { value: -depth, half_width: 0.4 }, Profile::Zero, &p).unwrap();
        let w = ModeWindow::new(k_neg, k_pos).unwrap();
        let vac = if band && k_neg > 1 { VacuumChoice::Band { l: k_neg - 1 } } else { VacuumChoice::Standard };
        let t = build_table(&b, &pot, w.index_window()).unwrap();
        let r = build_operators(&t, w, vac).unwrap().expectation_identities().unwrap();
        prop_assert_eq!(r.max_exact_defect(), 0.0);
        prop_assert!(r.vacuum_coupling < 1e-14);
    }
}

