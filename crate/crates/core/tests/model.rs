mod common;

use axial_qcd::model::*;
use axial_qcd::pauli::{jw_annihilation, jw_creation, Letters, PauliOperator};
use axial_qcd::sector::{enumerate_sector, hadron_states, SectorState};
use axial_qcd::{Complex, Operator};
use common::*;
use proptest::prelude::*;

fn zero_op(op: &Operator, tol: f64) -> bool {
    op.max_abs() < tol || op.is_empty()
}

#[test]
fn generators_normalized() {
    for nc in 2..=5 {
        let t = su_n_generators::<f64>(nc).unwrap();
        assert_eq!(t.len(), nc * nc - 1);
        for a in 0..t.len() {
            for b in 0..t.len() {
                let mut tr = c(0.0, 0.0);
                for i in 0..nc {
                    for j in 0..nc {
                        tr += t[a][i][j] * t[b][j][i];
                    }
                }
                let want = if a == b { 0.5 } else { 0.0 };
                assert!((tr - c(want, 0.0)).norm() < 1e-14);
            }
        }
    }
    assert!(su_n_generators::<f64>(1).is_err());
}

#[test]
fn su2_generators_are_half_paulis() {
    let t = su_n_generators::<f64>(2).unwrap();
    let x = [[c(0.0, 0.0), c(0.5, 0.0)], [c(0.5, 0.0), c(0.0, 0.0)]];
    let y = [[c(0.0, 0.0), c(0.0, -0.5)], [c(0.0, 0.5), c(0.0, 0.0)]];
    let z = [[c(0.5, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-0.5, 0.0)]];
    for (g, want) in t.iter().zip([x, y, z]) {
        for i in 0..2 {
            for j in 0..2 {
                assert!((g[i][j] - want[i][j]).norm() < 1e-15);
            }
        }
    }
}

#[test]
fn fierz_identity() {
    for nc in 2..=5 {
        let t = su_n_generators::<f64>(nc).unwrap();
        for al in 0..nc {
            for be in 0..nc {
                for ga in 0..nc {
                    for de in 0..nc {
                        let sum: Complex = t.iter().map(|g| g[al][be] * g[ga][de]).sum();
                        let d = |x: usize, y: usize| if x == y { 1.0 } else { 0.0 };
                        let want = 0.5 * (d(al, de) * d(ga, be) - d(al, be) * d(ga, de) / nc as f64);
                        assert!((sum - c(want, 0.0)).norm() < 1e-14);
                    }
                }
            }
        }
    }
}

#[test]
fn su3_diagonal_charges() {
    let p = ModelParams::new(3, 1, 1, 1.0, 1.0);
    let n = p.nqubits();
    let q3: Operator = charge_operator(&p, 0, 0, 2).unwrap();
    let want3 = PauliOperator::z(n, 0).sub(&PauliOperator::z(n, 1)).scale_real(0.25);
    assert!(zero_op(&q3.sub(&want3), 1e-15));
    let q8: Operator = charge_operator(&p, 0, 0, 7).unwrap();
    let s = 1.0 / (4.0 * 3f64.sqrt());
    let want8 = PauliOperator::z(n, 0)
        .add(&PauliOperator::z(n, 1))
        .sub(&PauliOperator::z(n, 2).scale_real(2.0))
        .scale_real(s);
    assert!(zero_op(&q8.sub(&want8), 1e-15));
}

#[test]
fn su3_q4_carries_z_sandwich() {
    // Q^(4) couples colors 0 and 2 across color 1
    let p = ModelParams::new(3, 1, 1, 1.0, 1.0);
    let q4: Operator = charge_operator(&p, 0, 0, 3).unwrap();
    let xzx: Letters = "IIIXZX".parse().unwrap();
    let yzy: Letters = "IIIYZY".parse().unwrap();
    assert!((q4.coefficient(&xzx).norm() - 0.25).abs() < 1e-15);
    assert!((q4.coefficient(&yzy).norm() - 0.25).abs() < 1e-15);
}

/// `Σ ψ†_α T_αβ ψ_β` assembled from the fermion dictionary.
fn charge_from_modes(p: &ModelParams, n: usize, f: usize, a: usize) -> Operator {
    let t = su_n_generators::<f64>(p.nc).unwrap();
    let nq = p.nqubits();
    let mut op = PauliOperator::zero(nq);
    for al in 0..p.nc {
        for be in 0..p.nc {
            let w = t[a][al][be];
            if w.norm() == 0.0 {
                continue;
            }
            let term = jw_creation::<f64>(p.qubit(n, f, al), nq)
                .unwrap()
                .mul(&jw_annihilation(p.qubit(n, f, be), nq).unwrap());
            op = op.add(&term.scale(w));
        }
    }
    op.pruned()
}

#[test]
fn charges_match_mode_construction() {
    for (nc, nf) in [(2, 1), (2, 2), (3, 1), (3, 2)] {
        let p = ModelParams::new(nc, nf, 1, 1.0, 1.0);
        for n in 0..2 {
            for f in 0..nf {
                for a in 0..nc * nc - 1 {
                    let ours: Operator = charge_operator(&p, n, f, a).unwrap();
                    assert!(ours.is_hermitian(1e-15));
                    assert!(ours.trace_part().norm() < 1e-15);
                    let oracle = charge_from_modes(&p, n, f, a);
                    assert!(zero_op(&ours.sub(&oracle), 1e-14), "nc={nc} nf={nf} n={n} f={f} a={a}");
                }
            }
        }
    }
    let p = ModelParams::new(3, 1, 1, 1.0, 1.0);
    assert!(charge_operator::<f64>(&p, 2, 0, 0).is_err());
    assert!(charge_operator::<f64>(&p, 0, 0, 8).is_err());
}

#[test]
fn same_site_products() {
    let p = ModelParams::new(3, 1, 1, 1.0, 1.0);
    let n = p.nqubits();
    let ours: Operator = charge_product(&p, 0, 0, 0, 0).unwrap();
    let mut want: Operator = PauliOperator::constant(n, 1.0);
    for (a, b) in [(0, 1), (0, 2), (1, 2)] {
        want = want.sub(&PauliOperator::z(n, a).mul(&PauliOperator::z(n, b)).scale_real(1.0 / 3.0));
    }
    assert!(zero_op(&ours.sub(&want), 1e-15));

    let p2 = ModelParams::new(2, 1, 1, 1.0, 1.0);
    let ours: Operator = charge_product(&p2, 0, 0, 0, 0).unwrap();
    let n = p2.nqubits();
    let want = PauliOperator::constant(n, 3.0 / 8.0)
        .sub(&PauliOperator::z(n, 0).mul(&PauliOperator::z(n, 1)).scale_real(1.5 / 4.0));
    assert!(zero_op(&ours.sub(&want), 1e-15));
}

#[test]
fn products_match_charge_sums() {
    for (nc, nf) in [(2, 1), (2, 2), (3, 1), (3, 2)] {
        let p = ModelParams::new(nc, nf, 1, 1.0, 1.0);
        let blocks: Vec<(usize, usize)> = (0..2).flat_map(|n| (0..nf).map(move |f| (n, f))).collect();
        for &(n, f) in &blocks {
            for &(m, f2) in &blocks {
                let ours: Operator = charge_product(&p, n, f, m, f2).unwrap();
                let mut sum = PauliOperator::zero(p.nqubits());
                for a in 0..nc * nc - 1 {
                    sum = sum.add(&charge_operator::<f64>(&p, n, f, a).unwrap().mul(&charge_operator(&p, m, f2, a).unwrap()));
                }
                assert!(ours.is_hermitian(1e-15));
                assert!(zero_op(&ours.sub(&sum), 1e-13), "nc={nc} ({n},{f}) ({m},{f2})");
            }
        }
    }
}

#[test]
fn hamiltonian_is_hermitian_with_expected_width() {
    for (nc, nf, l) in [(2, 1, 1), (3, 1, 2), (3, 2, 1), (2, 3, 2)] {
        let p = ModelParams::new(nc, nf, l, 0.7, 1.3).with_h(1.5);
        let h = build_hamiltonian::<f64>(&p).unwrap();
        assert_eq!(p.nqubits(), 2 * l * nc * nf);
        for (name, op) in h.labelled() {
            assert_eq!(op.nqubits(), p.nqubits());
            assert!(op.is_hermitian(1e-14), "{name}");
        }
    }
}

#[test]
fn trivial_vacuum_costs_nothing_in_mass() {
    let p = ModelParams::new(3, 2, 1, 1.0, 1.0);
    let h = build_hamiltonian::<f64>(&p).unwrap();
    let vac = p.trivial_vacuum();
    assert_eq!(axial_qcd::pauli::format_ket(vac, 12), "000000111111");
    assert!(h.mass.matrix_element(vac, vac).norm() < 1e-15);
    assert!(h.electric.matrix_element(vac, vac).norm() < 1e-15);
}

#[test]
fn ground_state_of_dense_form() {
    let p = ModelParams::new(3, 2, 1, 1.0, 1.0);
    let vac = p.trivial_vacuum();
    let kets: Vec<u64> = (0..1u64 << 12).filter(|&k| axial_qcd::sector::ket_key(&p, k) == axial_qcd::sector::ket_key(&p, vac)).collect();
    let h = restricted_matrix(&build_hamiltonian::<f64>(&p).unwrap().physical(), &kets);
    let e = eigenvalues(&h);
    assert!((e[0] + 0.5491067).abs() < 1e-6);
}

#[test]
fn global_charges_commute_with_hamiltonian() {
    for (nc, nf, l) in [(2, 2, 2), (3, 1, 2), (3, 2, 1)] {
        let p = ModelParams::new(nc, nf, l, 1.0, 1.0).with_h(2.0);
        let h = build_hamiltonian::<f64>(&p).unwrap().total();
        for a in 0..nc * nc - 1 {
            let q: Operator = total_charge(&p, a).unwrap();
            assert!(zero_op(&h.commutator(&q).pruned(), 1e-12), "nc={nc} a={a}");
        }
    }
}

#[test]
fn penalty_on_singlets_and_single_quark() {
    let p = ModelParams::new(3, 2, 1, 1.0, 1.0).with_h(2.0);
    let states = hadron_states::<f64>(&p).unwrap();
    let pen = build_penalty::<f64>(&p).unwrap();
    assert!(axial_qcd::sector::expectation(&pen, &states.vacuum.state).abs() < 1e-10);

    let p1 = ModelParams::new(3, 1, 1, 1.0, 1.0).with_h(0.8);
    let one_quark = p1.trivial_vacuum() ^ 0b001;
    let pen1: Operator = build_penalty(&p1).unwrap();
    let v = pen1.matrix_element(one_quark, one_quark).re;
    assert!((v - 0.8 * 0.8 * 0.5 * 4.0 / 3.0).abs() < 1e-12, "{v}");
    let dense = operator_matrix(&pen1);
    let e = eigenvalues(&dense);
    assert!(e[0] > -1e-12);
}

#[test]
fn electric_profile_of_trivial_and_one_quark() {
    let p = ModelParams::new(3, 1, 1, 1.0, 1.0);
    let vac = p.trivial_vacuum();
    let basis = enumerate_sector(&p, &axial_qcd::sector::ket_key(&p, vac)).unwrap();
    let mut amps = vec![0.0; basis.dim()];
    amps[basis.index_of(vac).unwrap()] = 1.0;
    let s = SectorState { basis, amps };
    let prof = axial_qcd::sector::electric_field_profile::<f64>(&p, &s).unwrap();
    assert!(prof.iter().all(|v| v.abs() < 1e-14));

    let one = vac ^ 0b001;
    let basis = enumerate_sector(&p, &axial_qcd::sector::ket_key(&p, one)).unwrap();
    let mut amps = vec![0.0; basis.dim()];
    amps[basis.index_of(one).unwrap()] = 1.0;
    let s = SectorState { basis, amps };
    let prof = axial_qcd::sector::electric_field_profile::<f64>(&p, &s).unwrap();
    assert!((prof[0] - 4.0 / 3.0).abs() < 1e-12, "{prof:?}");
}

#[test]
fn penalty_shift_equal_for_triplet_and_antitriplet() {
    // with the mass shift each state gains h²/2 · 4/3 regardless of which triplet it carries
    let base = ModelParams::new(3, 1, 1, 1.0, 1.0);
    let quark = base.trivial_vacuum() ^ 0b001;
    let anti = base.trivial_vacuum() ^ 0b001000;
    for ket in [quark, anti] {
        let e0 = build_hamiltonian::<f64>(&base.clone().with_h(0.0)).unwrap().total().matrix_element(ket, ket).re;
        let e1 = build_hamiltonian::<f64>(&base.clone().with_h(0.8)).unwrap().total().matrix_element(ket, ket).re;
        assert!((e1 - e0 - 0.32 * 4.0 / 3.0).abs() < 1e-12);
    }
}

#[test]
fn cartan_charges_survive_pair_split() {
    // one Trotter group Σ_{b∈pair} Q^b_m Q^b_l keeps only the diagonal total charges
    let p = ModelParams::new(3, 1, 1, 1.0, 1.0);
    for pair in [(0, 1), (3, 4), (5, 6), (2, 7)] {
        let group: Operator = [pair.0, pair.1]
            .iter()
            .map(|&b| charge_operator::<f64>(&p, 0, 0, b).unwrap().mul(&charge_operator(&p, 1, 0, b).unwrap()))
            .fold(PauliOperator::zero(p.nqubits()), |acc, t| acc.add(&t));
        for a in 0..8 {
            let qa: Operator = total_charge(&p, a).unwrap();
            let vanishes = zero_op(&qa.commutator(&group).pruned(), 1e-12);
            assert_eq!(vanishes, a == 2 || a == 7, "pair {pair:?} a={}", a + 1);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_products_match_dense(nc in 2usize..=3, nf in 1usize..=2, n in 0usize..2, m in 0usize..2, f in 0usize..2, f2 in 0usize..2) {
        // keep the dense oracle at 8 qubits or fewer
        let nf = if nc == 3 { 1 } else { nf };
        let p = ModelParams::new(nc, nf, 1, 1.0, 1.0);
        let (f, f2) = (f % nf, f2 % nf);
        let ours = operator_matrix(&charge_product::<f64>(&p, n, f, m, f2).unwrap());
        let d = 1 << p.nqubits();
        let mut oracle = Dense::zeros(d, d);
        for a in 0..nc * nc - 1 {
            oracle += operator_matrix(&charge_operator(&p, n, f, a).unwrap()) * operator_matrix(&charge_operator(&p, m, f2, a).unwrap());
        }
        prop_assert!(max_diff(&ours, &oracle) < 1e-12);
    }
}
