mod common;

use axial_qcd::circuit::*;
use axial_qcd::evolution::{apply_circuit, circuit_unitary, max_abs_diff, run_on_register, StateVector};
use axial_qcd::model::*;
use axial_qcd::pauli::{Letter, Letters, PauliOperator};
use axial_qcd::sector::{enumerate_sector, SectorKey};
use axial_qcd::Operator;
use common::*;
use proptest::prelude::*;

fn p311() -> ModelParams {
    ModelParams::new(3, 1, 1, 1.0, 1.0)
}

fn term(p: &ModelParams, kind: TermKind, t: f64) -> Circuit {
    let opts = TrotterOptions::default();
    let mut c = Circuit::with_ancillas(p.nqubits(), usize::from(kind == TermKind::Kinetic && opts.uses_ancilla(p)));
    term_circuit(p, kind, t, &opts, &mut c).unwrap();
    c
}

#[test]
fn empty_circuit_counts_nothing() {
    assert_eq!(count_gates(&Circuit::new(4)), ResourceCount::default());
}

#[test]
fn mass_rotations() {
    let p = ModelParams::new(3, 2, 1, 1.0, 1.0);
    let c = term(&p, TermKind::Mass, 0.7);
    assert_eq!(count_gates(&c).rz, 12);
    let signs: Vec<f64> = c
        .gates
        .iter()
        .map(|g| match g {
            Gate::Rz { q, theta } => theta.signum() * if p.is_quark_qubit(*q) { 1.0 } else { -1.0 },
            _ => panic!("mass circuit holds only RZ"),
        })
        .collect();
    assert!(signs.windows(2).all(|w| w[0] == w[1]));
    let id = circuit_unitary(&term(&p311(), TermKind::Mass, 0.0)).unwrap();
    let want: Vec<Vec<axial_qcd::Complex>> =
        (0..64).map(|i| (0..64).map(|j| c_delta(i, j)).collect()).collect();
    assert!(max_abs_diff(&id, &want) < 1e-15);
}

fn c_delta(i: usize, j: usize) -> axial_qcd::Complex {
    c(if i == j { 1.0 } else { 0.0 }, 0.0)
}

#[test]
fn single_flavor_terms_equal_exponentials() {
    let p = p311();
    let h = build_hamiltonian::<f64>(&p).unwrap();
    for (kind, op, t) in [
        (TermKind::Mass, &h.mass, 0.7),
        (TermKind::Kinetic, &h.kinetic, 1.3),
        (TermKind::Electric, &h.electric, 0.9),
    ] {
        let u = from_rows(&circuit_unitary(&term(&p, kind, t)).unwrap());
        let exact = expm_hermitian(&operator_matrix(op), t);
        assert!(max_diff(&u, &exact) < 1e-12, "{kind:?}");
    }
}

#[test]
fn two_flavor_terms_equal_group_products() {
    let p = ModelParams::new(3, 2, 1, 1.0, 1.0);
    let t = 0.8;
    for kind in [TermKind::Mass, TermKind::Kinetic, TermKind::Electric] {
        let c = term(&p, kind, t);
        let opts = TrotterOptions::default().with_order(&[kind]);
        let gens = step_generators(&p, &opts).unwrap();
        // apply the ordered group exponentials to a few basis states
        for ket in [p.trivial_vacuum(), p.trivial_vacuum() ^ 0b1000_0000_1000, 0b0101_1010_0110] {
            let out = run_on_register(&StateVector::basis(12, ket).unwrap(), &c).unwrap();
            let mut want = StateVector::basis(12, ket).unwrap();
            for g in &gens {
                want = exp_commuting(g, &want, t);
            }
            let d = out.amps.iter().zip(&want.amps).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(d < 1e-12, "{kind:?} {d}");
        }
    }
}

/// `exp(−i t Σ_k c_k P_k)` for mutually commuting strings, one factor at a time.
fn exp_commuting(g: &Operator, s: &StateVector, t: f64) -> StateVector {
    let strings: Vec<(&Letters, f64)> = g.terms().map(|(l, w)| (l, w.re)).collect();
    for (i, (a, _)) in strings.iter().enumerate() {
        for (b, _) in &strings[i + 1..] {
            assert!(a.commutes_with(b));
        }
    }
    let mut amps = s.amps.clone();
    for (l, w) in strings {
        let mut next = amps.iter().map(|a| a * (w * t).cos()).collect::<Vec<_>>();
        for (k, a) in amps.iter().enumerate() {
            if a.norm() == 0.0 {
                continue;
            }
            let (out, ph) = l.apply(k as u64);
            next[out as usize] += a * axial_qcd::scalar::i_pow::<f64>(ph) * c(0.0, -(w * t).sin());
        }
        amps = next;
    }
    StateVector::from_amplitudes(s.nqubits, amps).unwrap()
}

#[test]
fn electric_groups_do_not_commute_for_two_flavors() {
    let p = ModelParams::new(3, 2, 1, 1.0, 1.0);
    let gens = step_generators(&p, &TrotterOptions::default().with_order(&[TermKind::Electric])).unwrap();
    let clash = gens.iter().enumerate().any(|(i, a)| gens[i + 1..].iter().any(|b| a.commutator(b).pruned().max_abs() > 1e-12));
    assert!(clash);
}

#[test]
fn kinetic_counts() {
    let r = tally_step(&p311()).unwrap();
    assert_eq!(r.kinetic.cnot, 24);
    let r = tally_step(&ModelParams::new(3, 2, 1, 1.0, 1.0)).unwrap();
    assert_eq!(r.kinetic.cnot, 56);
}

#[test]
fn one_step_totals() {
    let one = trotter_step(&ModelParams::new(3, 2, 1, 1.0, 1.0), 0.3, &TrotterOptions::default()).unwrap();
    assert_eq!(count_gates(&one).cnot, 114);
    let one = trotter_step(&p311(), 0.3, &TrotterOptions::default()).unwrap();
    assert_eq!(count_gates(&one).cnot, 30);
}

#[test]
fn closed_form_table_corners() {
    assert_eq!(resource_count_closed_form(3, 1, 1).unwrap().total().cnot, 30);
    assert_eq!(resource_count_closed_form(2, 1, 1).unwrap().total().cnot, 14);
    assert_eq!(resource_count_closed_form(3, 2, 100).unwrap().total().cnot, 3_646_086);
    assert!(resource_count_closed_form(1, 1, 1).is_err());
}

#[test]
fn tally_agrees_with_closed_form_on_small_grid() {
    for nc in [2, 3] {
        for nf in [1, 2, 3] {
            for l in [1, 2] {
                let p = ModelParams::new(nc, nf, l, 1.0, 1.0);
                let ours = tally_step(&p).unwrap();
                let closed = resource_count_closed_form(nc as u64, nf as u64, l as u64).unwrap();
                assert_eq!(ours.total(), closed.total(), "({nc},{nf},{l})");
                assert_eq!(ours.kinetic, closed.kinetic);
                assert_eq!(ours.electric, closed.electric);
            }
        }
    }
}

#[test]
fn constructed_circuits_are_unitary() {
    let p = p311();
    for kind in [TermKind::Mass, TermKind::Kinetic, TermKind::Electric] {
        let u = from_rows(&circuit_unitary(&term(&p, kind, 0.37)).unwrap());
        let id = Dense::identity(64, 64);
        assert!(max_diff(&(u.adjoint() * &u), &id) < 1e-12);
    }
}

#[test]
fn text_roundtrip() {
    let c = trotter_step(&ModelParams::new(2, 2, 1, 0.5, 1.2), 0.31, &TrotterOptions::default()).unwrap();
    let back = Circuit::from_text(&c.to_text()).unwrap();
    assert_eq!(back.gates.len(), c.gates.len());
    let u = circuit_unitary(&c).unwrap();
    let v = circuit_unitary(&back).unwrap();
    assert!(max_abs_diff(&u, &v) < 1e-12);
}

#[test]
fn cnot_conjugation_table() {
    let table = [
        ("XX", "IX", 1.0), ("XY", "IY", 1.0), ("YX", "ZY", 1.0), ("XZ", "XZ", 1.0),
        ("ZZ", "ZI", 1.0), ("YZ", "YI", 1.0), ("ZY", "YX", 1.0), ("YY", "ZX", -1.0),
        ("IX", "XX", 1.0), ("IY", "XY", 1.0), ("XI", "XI", 1.0), ("IZ", "IZ", 1.0),
        ("ZI", "ZZ", 1.0), ("YI", "YZ", 1.0), ("ZX", "YY", -1.0), ("II", "II", 1.0),
    ];
    for (from, to, sign) in table {
        let mut op: Operator = PauliOperator::zero(2);
        op.add_term(from.parse().unwrap(), c(1.0, 0.0));
        let out = conjugate_by_cnot(&op, 0, 1).unwrap();
        let l: Letters = to.parse().unwrap();
        assert_eq!(out.coefficient(&l), c(sign, 0.0), "{from}");
        assert_eq!(out.len(), 1);
    }
}

#[test]
fn twirl_partners_by_search() {
    let letters = [Letter::I, Letter::X, Letter::Y, Letter::Z];
    let mut cx = Circuit::new(2);
    cx.gate(Gate::Cnot { control: 0, target: 1 });
    let cx_m = from_rows(&circuit_unitary(&cx).unwrap());
    for &pc in &letters {
        for &pt in &letters {
            let before = letters_matrix(&Letters::from_pairs(2, &[(0, pc), (1, pt)]));
            let mut hits = 0;
            for &qc in &letters {
                for &qt in &letters {
                    let after = letters_matrix(&Letters::from_pairs(2, &[(0, qc), (1, qt)]));
                    let prod = &after * &cx_m * &before;
                    for s in [1.0, -1.0] {
                        if max_diff(&prod, &(&cx_m * c(s, 0.0))) < 1e-14 {
                            hits += 1;
                            assert_eq!(twirl_partner(pc, pt), (qc, qt, s));
                        }
                    }
                }
            }
            assert_eq!(hits, 1);
        }
    }
}

#[test]
fn twirled_ensemble_keeps_unitary() {
    let c0 = trotter_step(&p311(), 0.6, &TrotterOptions::default()).unwrap();
    let u0 = circuit_unitary(&c0).unwrap();
    for seed in 0..100 {
        let u = circuit_unitary(&pauli_twirl(&c0, seed)).unwrap();
        assert!(max_abs_diff(&u, &u0) < 1e-12, "seed {seed}");
    }
}

#[test]
fn identity_twirl_is_original() {
    let c0 = trotter_step(&p311(), 0.6, &TrotterOptions::default()).unwrap();
    let cnots = c0.gates.iter().filter(|g| matches!(g, Gate::Cnot { .. })).count();
    let tw = pauli_twirl(&c0, 7);
    assert_eq!(tw.gates.iter().filter(|g| matches!(g, Gate::Cnot { .. })).count(), cnots);
    assert_eq!(twirl_partner(Letter::I, Letter::I), (Letter::I, Letter::I, 1.0));
}

/// Projector onto the zero-charge color singlets of the single-flavor, single-site model.
fn singlet_space() -> (Vec<u64>, Dense) {
    let p = p311();
    let basis = enumerate_sector(&p, &SectorKey::uniform(3, 0, None)).unwrap();
    assert_eq!(basis.dim(), 8);
    let cas = restricted_matrix(&color_casimir::<f64>(&p).unwrap(), &basis.states);
    let eig = nalgebra::SymmetricEigen::new(cas);
    let n = basis.dim();
    let mut proj = Dense::zeros(n, n);
    for k in 0..n {
        if eig.eigenvalues[k].abs() < 1e-9 {
            let v = eig.eigenvectors.column(k);
            proj += &v * v.adjoint();
        }
    }
    (basis.states.clone(), proj)
}

#[test]
fn singlet_prep_at_zero_is_trivial_vacuum() {
    let (c, _) = vqe_singlet_prep(0.0, 0.0, 0.0).unwrap();
    let out = apply_circuit(&StateVector::basis(6, 0).unwrap(), &c).unwrap();
    assert!((out.probability(0b000111) - 1.0).abs() < 1e-14);
    let mirrors = c.gates.iter().filter(|g| matches!(g, Gate::Cnot { .. })).count();
    assert_eq!(mirrors, 3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn singlet_prep_stays_in_singlets(theta in -0.6f64..0.6, theta1 in -1.2f64..1.2, theta11 in -3.0f64..3.0) {
        let Ok((c, ang)) = vqe_singlet_prep(theta, theta1, theta11) else { return Ok(()) };
        prop_assert_eq!(ang.theta10, ang.theta01);
        let out = apply_circuit(&StateVector::basis(6, 0).unwrap(), &c).unwrap();
        let (kets, proj) = singlet_space();
        let inside: f64 = kets.iter().map(|&k| out.probability(k)).sum();
        prop_assert!((inside - 1.0).abs() < 1e-10);
        let v = nalgebra::DVector::from_iterator(kets.len(), kets.iter().map(|&k| out.amps[k as usize]));
        let outside = (&v - &proj * &v).norm();
        prop_assert!(outside < 1e-10, "{}", outside);
    }

    #[test]
    fn random_two_qubit_conjugation(a in 0u8..4, b in 0u8..4, w in -2.0f64..2.0) {
        let mut op: Operator = PauliOperator::zero(2);
        op.add_term(letters_from_codes(&[a, b]), c(w, 0.0));
        let out = conjugate_by_cnot(&op, 0, 1).unwrap();
        let mut cx = Circuit::new(2);
        cx.gate(Gate::Cnot { control: 0, target: 1 });
        let u = from_rows(&circuit_unitary(&cx).unwrap());
        let want = &u * operator_matrix(&op) * &u;
        prop_assert!(max_diff(&want, &operator_matrix(&out)) < 1e-14);
    }
}
