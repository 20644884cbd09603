//! Dense oracles shared by the integration tests.
#![allow(dead_code)]

use axial_qcd::pauli::{Letter, Letters};
use axial_qcd::{Complex, Operator};
use nalgebra::{DMatrix, SymmetricEigen};

pub type Dense = DMatrix<Complex>;

pub fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

pub fn letter_matrix(l: Letter) -> Dense {
    let o = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    match l {
        Letter::I => Dense::from_row_slice(2, 2, &[one, o, o, one]),
        Letter::X => Dense::from_row_slice(2, 2, &[o, one, one, o]),
        Letter::Y => Dense::from_row_slice(2, 2, &[o, -i, i, o]),
        Letter::Z => Dense::from_row_slice(2, 2, &[one, o, o, -one]),
    }
}

/// Kronecker product with qubit 0 as the least significant index.
pub fn letters_matrix(l: &Letters) -> Dense {
    let mut m = Dense::from_element(1, 1, c(1.0, 0.0));
    for q in (0..l.nqubits()).rev() {
        m = m.kronecker(&letter_matrix(l.letter(q)));
    }
    m
}

pub fn operator_matrix(op: &Operator) -> Dense {
    let d = 1usize << op.nqubits();
    let mut m = Dense::zeros(d, d);
    for (l, &w) in op.terms() {
        m += letters_matrix(l) * w;
    }
    m
}

pub fn from_rows(rows: &[Vec<Complex>]) -> Dense {
    Dense::from_fn(rows.len(), rows.first().map_or(0, |r| r.len()), |i, j| rows[i][j])
}

/// `exp(−i t H)` of a hermitian matrix by eigendecomposition.
// Pade scaling and squaring; nalgebra's complex Hermitian eigensolver loses ~1e-6 here
pub fn expm_hermitian(h: &Dense, t: f64) -> Dense {
    (h * c(0.0, -t)).exp()
}

/// Through the real embedding [[A, -B], [B, A]], which doubles every eigenvalue.
pub fn eigenvalues(h: &Dense) -> Vec<f64> {
    let n = h.nrows();
    let real = nalgebra::DMatrix::<f64>::from_fn(2 * n, 2 * n, |i, j| {
        let z = h[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    let mut v: Vec<f64> = SymmetricEigen::new(real).eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v.into_iter().step_by(2).collect()
}

pub fn max_diff(a: &Dense, b: &Dense) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn letter_of(k: u8) -> Letter {
    [Letter::I, Letter::X, Letter::Y, Letter::Z][k as usize & 3]
}

pub fn letters_from_codes(codes: &[u8]) -> Letters {
    let pairs: Vec<(usize, Letter)> = codes.iter().enumerate().map(|(q, &k)| (q, letter_of(k))).collect();
    Letters::from_pairs(codes.len(), &pairs)
}

/// `⟨b|op|k⟩` on a list of kets, each column built from per-qubit 2×2 entries.
pub fn restricted_matrix(op: &Operator, kets: &[u64]) -> Dense {
    let n = kets.len();
    let index: std::collections::HashMap<u64, usize> = kets.iter().enumerate().map(|(i, &k)| (k, i)).collect();
    let singles: Vec<Dense> = (0..4).map(|k| letter_matrix(letter_of(k))).collect();
    let code = |l: Letter| match l {
        Letter::I => 0,
        Letter::X => 1,
        Letter::Y => 2,
        Letter::Z => 3,
    };
    let mut m = Dense::zeros(n, n);
    for (j, &k) in kets.iter().enumerate() {
        for (l, &w) in op.terms() {
            let mut b = k;
            let mut v = w;
            for q in 0..l.nqubits() {
                let kq = (k >> q & 1) as usize;
                let col = singles[code(l.letter(q))].column(kq);
                let bq = if col[0].norm() > 0.0 { 0 } else { 1 };
                v *= col[bq];
                b = (b & !(1 << q)) | ((bq as u64) << q);
            }
            if let Some(&i) = index.get(&b) {
                m[(i, j)] += v;
            }
        }
    }
    m
}

/// Largest entry of `|U_circuit − exp(−i t op)|` over the whole register, with the
/// exponential built sector by sector; `op` must conserve the sector labels.
pub fn circuit_vs_exponential(
    p: &axial_qcd::model::ModelParams,
    circuit: &axial_qcd::circuit::Circuit,
    op: &Operator,
    t: f64,
) -> f64 {
    use axial_qcd::evolution::{run_on_register, StateVector};
    use axial_qcd::sector::ket_key;
    let nq = p.nqubits();
    let mut sectors: std::collections::BTreeMap<Vec<i32>, Vec<u64>> = Default::default();
    for k in 0..1u64 << nq {
        let key = ket_key(p, k);
        let mut label = key.colors.clone();
        label.extend(key.twice_i3);
        sectors.entry(label).or_default().push(k);
    }
    let mut worst: f64 = 0.0;
    for kets in sectors.values() {
        let block = restricted_matrix(op, kets);
        // leakage would make the block exponential meaningless
        for &k in kets {
            let mut images: std::collections::HashMap<u64, Complex> = Default::default();
            for (b, a) in op.apply_ket(k) {
                *images.entry(b).or_default() += a;
            }
            for (b, a) in images {
                assert!(a.norm() < 1e-14 || ket_key(p, b) == ket_key(p, k), "operator leaves its sector: {k:b} -> {b:b} ({a})");
            }
        }
        let u = expm_hermitian(&block, t);
        for (j, &k) in kets.iter().enumerate() {
            let out = run_on_register(&StateVector::basis(nq, k).unwrap(), circuit).unwrap();
            let member: std::collections::HashSet<u64> = kets.iter().copied().collect();
            for (i, &b) in kets.iter().enumerate() {
                worst = worst.max((out.amps[b as usize] - u[(i, j)]).norm());
            }
            let outside: f64 = out.amps.iter().enumerate().filter(|(b, _)| !member.contains(&(*b as u64))).map(|(_, a)| a.norm_sqr()).sum();
            worst = worst.max(outside.sqrt());
        }
    }
    worst
}
