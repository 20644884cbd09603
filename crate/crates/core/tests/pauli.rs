mod common;

use axial_qcd::pauli::*;
use axial_qcd::{Complex, Operator};
use common::*;
use proptest::prelude::*;

fn string(phase: u8, codes: &[u8]) -> PauliString {
    PauliString::new(phase, letters_from_codes(codes))
}

fn string_matrix(p: &PauliString) -> Dense {
    letters_matrix(&p.letters) * axial_qcd::scalar::i_pow::<f64>(p.phase)
}

#[test]
fn x_times_y_is_iz() {
    let a: Letters = "XI".parse().unwrap();
    let b: Letters = "YI".parse().unwrap();
    let p = PauliString::new(0, a).multiply(&PauliString::new(0, b)).unwrap();
    assert_eq!(p.phase, 1);
    assert_eq!(p.letters.to_string(), "ZI");
}

#[test]
fn mismatched_lengths_are_rejected() {
    let a = PauliString::new(0, Letters::identity(2));
    let b = PauliString::new(0, Letters::identity(3));
    assert!(a.multiply(&b).is_err());
}

#[test]
fn bit_flip_and_sign() {
    let z0 = PauliString::new(0, Letters::single(6, 0, Letter::Z));
    let (k, amp) = z0.apply_to_bitstring::<f64>(0b1);
    assert_eq!(k, 0b1);
    assert_eq!(amp, c(-1.0, 0.0));
    let x3 = PauliString::new(0, Letters::single(6, 3, Letter::X));
    let (k, amp) = x3.apply_to_bitstring::<f64>(0);
    assert_eq!(format_ket(k, 6), "001000");
    assert_eq!(amp, c(1.0, 0.0));
}

#[test]
fn identity_matrix_elements() {
    let id: Operator = PauliOperator::identity(4);
    assert_eq!(id.matrix_element(5, 5), c(1.0, 0.0));
    assert_eq!(id.matrix_element(5, 6), c(0.0, 0.0));
}

#[test]
fn annihilation_without_tail() {
    let a: Operator = jw_annihilation(0, 2).unwrap();
    let expect = PauliOperator::sigma_minus(2, 0);
    assert_eq!(a.clone().sub(&expect).pruned().len(), 0);
    assert!(jw_annihilation::<f64>(2, 2).is_err());
}

#[test]
fn two_site_tail() {
    let a: Operator = jw_annihilation(2, 3).unwrap();
    let tail = PauliOperator::from_string(&PauliString::new(0, "IZZ".parse().unwrap()), c(1.0, 0.0));
    let expect = tail.mul(&PauliOperator::sigma_minus(3, 2));
    assert_eq!(a.sub(&expect).pruned().len(), 0);
}

#[test]
fn canonical_anticommutation() {
    let n = 6;
    let ann: Vec<Operator> = (0..n).map(|i| jw_annihilation(i, n).unwrap()).collect();
    let cre: Vec<Operator> = (0..n).map(|i| jw_creation(i, n).unwrap()).collect();
    for i in 0..n {
        for j in 0..n {
            let ac = ann[i].anticommutator(&cre[j]).pruned();
            let expect: Operator = if i == j { PauliOperator::identity(n) } else { PauliOperator::zero(n) };
            assert_eq!(ac.sub(&expect).pruned().len(), 0, "{{a{i}, a+{j}}}");
            assert_eq!(ann[i].anticommutator(&ann[j]).pruned().len(), 0);
        }
    }
}

#[test]
fn canonical_anticommutation_twelve_modes_spot() {
    let n = 12;
    for (i, j) in [(0, 11), (5, 5), (11, 3), (7, 8)] {
        let ac = jw_annihilation::<f64>(i, n).unwrap().anticommutator(&jw_creation(j, n).unwrap()).pruned();
        let expect: Operator = if i == j { PauliOperator::identity(n) } else { PauliOperator::zero(n) };
        assert_eq!(ac.sub(&expect).pruned().len(), 0);
    }
}

#[test]
fn text_roundtrip() {
    let mut op: Operator = PauliOperator::zero(5);
    op.add_term("XIZYI".parse().unwrap(), c(0.25, -1.5));
    op.add_term("IIIIZ".parse().unwrap(), c(-3.0, 0.0));
    let back = Operator::from_text(&op.to_text()).unwrap();
    assert_eq!(back, op);
}

#[test]
fn hermitian_elements_are_conjugate() {
    let p = axial_qcd::model::ModelParams::new(3, 1, 1, 1.0, 1.0);
    let h = axial_qcd::model::build_hamiltonian::<f64>(&p).unwrap().physical();
    for a in [0b000111u64, 0b001110, 0b100011] {
        for b in [0b000111u64, 0b001110, 0b100011] {
            assert!((h.matrix_element(a, b) - h.matrix_element(b, a).conj()).norm() < 1e-14);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn associative_and_phase_exact(
        a in proptest::collection::vec(0u8..4, 1..=8),
        seed in any::<u64>(),
        pa in 0u8..4, pb in 0u8..4, pc in 0u8..4,
    ) {
        let n = a.len();
        let gen = |s: u64| (0..n).map(|q| ((s >> (2 * q)) & 3) as u8).collect::<Vec<u8>>();
        let x = string(pa, &a);
        let y = string(pb, &gen(seed));
        let z = string(pc, &gen(seed.rotate_left(17)));
        let left = x.multiply(&y).unwrap().multiply(&z).unwrap();
        let right = x.multiply(&y.multiply(&z).unwrap()).unwrap();
        prop_assert_eq!(&left, &right);
        prop_assert!(x.multiply(&x).unwrap().letters.is_identity());
        if n <= 5 {
            let dense = string_matrix(&x) * string_matrix(&y) * string_matrix(&z);
            prop_assert!(max_diff(&dense, &string_matrix(&left)) < 1e-14);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn six_qubit_products_match_kronecker(a in proptest::collection::vec(0u8..4, 6), b in proptest::collection::vec(0u8..4, 6)) {
        let x = string(0, &a);
        let y = string(0, &b);
        let prod = x.multiply(&y).unwrap();
        prop_assert!(max_diff(&(string_matrix(&x) * string_matrix(&y)), &string_matrix(&prod)) < 1e-14);
    }

    #[test]
    fn columns_rebuild_dense_matrix(a in proptest::collection::vec(0u8..4, 6), phase in 0u8..4) {
        let p = string(phase, &a);
        let dense = string_matrix(&p);
        for ket in 0..64u64 {
            let (out, amp) = p.apply_to_bitstring::<f64>(ket);
            for row in 0..64usize {
                let want: Complex = if row as u64 == out { amp } else { c(0.0, 0.0) };
                prop_assert!((dense[(row, ket as usize)] - want).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn operator_dense_form_matches(a in proptest::collection::vec(0u8..4, 4), b in proptest::collection::vec(0u8..4, 4), wa in -2.0f64..2.0, wb in -2.0f64..2.0) {
        let mut op: Operator = PauliOperator::zero(4);
        op.add_term(letters_from_codes(&a), c(wa, 0.5));
        op.add_term(letters_from_codes(&b), c(wb, 0.0));
        let ours = from_rows(&op.to_dense());
        prop_assert!(max_diff(&ours, &operator_matrix(&op)) < 1e-13);
        for bra in 0..16u64 {
            for ket in 0..16u64 {
                prop_assert!((op.matrix_element(bra, ket) - ours[(bra as usize, ket as usize)]).norm() < 1e-13);
            }
        }
    }
}
