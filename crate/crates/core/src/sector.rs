//! Symmetry sectors, sparse diagonalization and static observables.

use crate::error::{Error, Result};
use crate::linalg::{lowest_eigenpairs, symmetric_eigen, CsrMatrix, EigenResult};
use crate::model::{
    build_hamiltonian, color_casimir, isospin_casimir, link_casimirs, occupation_operator, Hamiltonian,
    ModelParams,
};
use crate::pauli::{CompiledOperator, Ket, PauliOperator};
use crate::scalar::{Cplx, Scalar};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Conserved labels of a sector: net charge per color and twice the isospin projection.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SectorKey {
    /// Quarks minus antiquarks of each color.
    pub colors: Vec<i32>,
    /// `2·I₃`; `None` leaves isospin unconstrained.
    pub twice_i3: Option<i32>,
}

impl SectorKey {
    /// All colors carrying `net` quarks, i.e. baryon number `net` when colors are equal.
    pub fn uniform(nc: usize, net: i32, twice_i3: Option<i32>) -> Self {
        SectorKey { colors: vec![net; nc], twice_i3 }
    }

    pub fn baryon_number(&self) -> f64 {
        self.colors.iter().sum::<i32>() as f64 / self.colors.len() as f64
    }
}

/// Bit masks that read the conserved charges of a ket by popcount.
#[derive(Clone, Debug)]
struct ChargeMasks {
    quark: Vec<Ket>,
    anti: Vec<Ket>,
    flavor_quark: Vec<Ket>,
    flavor_anti: Vec<Ket>,
    nf: usize,
}

impl ChargeMasks {
    fn new(p: &ModelParams) -> Self {
        let mut m = ChargeMasks {
            quark: vec![0; p.nc],
            anti: vec![0; p.nc],
            flavor_quark: vec![0; p.nf],
            flavor_anti: vec![0; p.nf],
            nf: p.nf,
        };
        for n in 0..p.nsites() {
            for f in 0..p.nf {
                for c in 0..p.nc {
                    let bit: Ket = 1 << p.qubit(n, f, c);
                    if n % 2 == 0 {
                        m.quark[c] |= bit;
                        m.flavor_quark[f] |= bit;
                    } else {
                        m.anti[c] |= bit;
                        m.flavor_anti[f] |= bit;
                    }
                }
            }
        }
        m
    }

    fn color(&self, ket: Ket, c: usize) -> i32 {
        (self.quark[c] & !ket).count_ones() as i32 - (self.anti[c] & ket).count_ones() as i32
    }

    fn flavor(&self, ket: Ket, f: usize) -> i32 {
        (self.flavor_quark[f] & !ket).count_ones() as i32 - (self.flavor_anti[f] & ket).count_ones() as i32
    }

    fn twice_i3(&self, ket: Ket) -> i32 {
        (0..self.nf).map(|f| crate::model::isospin_sign(f) as i32 * self.flavor(ket, f)).sum()
    }

    fn key(&self, ket: Ket) -> SectorKey {
        SectorKey {
            colors: (0..self.quark.len()).map(|c| self.color(ket, c)).collect(),
            twice_i3: if self.nf >= 2 { Some(self.twice_i3(ket)) } else { None },
        }
    }

    fn matches(&self, ket: Ket, key: &SectorKey) -> bool {
        key.colors.iter().enumerate().all(|(c, &v)| self.color(ket, c) == v)
            && key.twice_i3.map_or(true, |t| self.twice_i3(ket) == t)
    }
}

/// Quantum numbers of a basis ket.
pub fn ket_key(p: &ModelParams, ket: Ket) -> SectorKey {
    ChargeMasks::new(p).key(ket)
}

/// Ordered kets sharing a [`SectorKey`].
#[derive(Clone, Debug, PartialEq)]
pub struct SectorBasis {
    pub key: SectorKey,
    pub nqubits: usize,
    pub states: Vec<Ket>,
}

impl SectorBasis {
    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn index_of(&self, ket: Ket) -> Option<usize> {
        self.states.binary_search(&ket).ok()
    }
}

/// Largest register enumerated by brute force.
pub const MAX_ENUMERATED_QUBITS: usize = 30;

pub fn enumerate_sector(p: &ModelParams, key: &SectorKey) -> Result<SectorBasis> {
    p.validate()?;
    let nq = p.nqubits();
    if nq > MAX_ENUMERATED_QUBITS {
        return Err(Error::TooLarge { what: "sector enumeration", size: nq, limit: MAX_ENUMERATED_QUBITS });
    }
    if key.colors.len() != p.nc {
        return Err(Error::Dimension { expected: p.nc, got: key.colors.len() });
    }
    let lim = (p.l * p.nf) as i32;
    if key.colors.iter().any(|c| c.abs() > lim) {
        return Ok(SectorBasis { key: key.clone(), nqubits: nq, states: vec![] });
    }
    let masks = ChargeMasks::new(p);
    let states: Vec<Ket> = (0..1u64 << nq).into_par_iter().filter(|&k| masks.matches(k, key)).collect();
    Ok(SectorBasis { key: key.clone(), nqubits: nq, states })
}

/// Every nonempty sector of a small model.
pub fn all_sectors(p: &ModelParams) -> Result<Vec<SectorBasis>> {
    let nq = p.nqubits();
    if nq > 16 {
        return Err(Error::TooLarge { what: "full sector decomposition", size: nq, limit: 16 });
    }
    let masks = ChargeMasks::new(p);
    let mut map: HashMap<SectorKey, Vec<Ket>> = HashMap::new();
    for k in 0..1u64 << nq {
        map.entry(masks.key(k)).or_default().push(k);
    }
    let mut out: Vec<SectorBasis> =
        map.into_iter().map(|(key, states)| SectorBasis { key, nqubits: nq, states }).collect();
    out.sort_by(|a, b| (&a.key.colors, a.key.twice_i3).cmp(&(&b.key.colors, b.key.twice_i3)));
    Ok(out)
}

/// Real matrix of `op` projected onto the sector, `A_ij = <s_i|op|s_j>`.
pub fn assemble_sparse<T: Scalar>(op: &PauliOperator<T>, basis: &SectorBasis) -> Result<CsrMatrix<T>> {
    if op.nqubits() != basis.nqubits {
        return Err(Error::Dimension { expected: basis.nqubits, got: op.nqubits() });
    }
    let c = op.compile();
    let tol = T::of(1e-10) * op.max_abs().max(T::one());
    let cols: Vec<Result<Vec<(u32, T)>>> = basis
        .states
        .par_iter()
        .map_init(Vec::new, |buf, &ket| {
            c.apply_ket(ket, buf);
            let mut col = Vec::with_capacity(buf.len());
            for &(out, a) in buf.iter() {
                if let Some(i) = basis.index_of(out) {
                    if a.im.abs() > tol {
                        return Err(Error::Params("operator has imaginary matrix elements".into()));
                    }
                    col.push((i as u32, a.re));
                }
            }
            Ok(col)
        })
        .collect();
    let mut rows: Vec<Vec<(u32, T)>> = vec![Vec::new(); basis.dim()];
    for (j, col) in cols.into_iter().enumerate() {
        for (i, v) in col? {
            rows[i as usize].push((j as u32, v));
        }
    }
    Ok(CsrMatrix::from_rows(basis.dim(), rows))
}

/// Real amplitudes over a sector basis.
#[derive(Clone, Debug)]
pub struct SectorState<T: Scalar> {
    pub basis: SectorBasis,
    pub amps: Vec<T>,
}

impl<T: Scalar> SectorState<T> {
    pub fn norm(&self) -> T {
        crate::linalg::norm(&self.amps)
    }

    pub fn kets(&self) -> impl Iterator<Item = (Ket, Cplx<T>)> + '_ {
        self.basis.states.iter().zip(&self.amps).map(|(&k, &a)| (k, Cplx::new(a, T::zero())))
    }
}

/// `<ψ|op|ψ>` for a state given as `(ket, amplitude)` pairs.
pub fn expectation_pairs<T: Scalar>(op: &CompiledOperator<T>, kets: &[Ket], amps: &[Cplx<T>]) -> Cplx<T> {
    let lookup: HashMap<Ket, usize> = kets.iter().enumerate().map(|(i, &k)| (k, i)).collect();
    let mut buf = Vec::new();
    let mut acc = Cplx::<T>::default();
    for (j, &ket) in kets.iter().enumerate() {
        if amps[j].norm_sqr() == T::zero() {
            continue;
        }
        op.apply_ket(ket, &mut buf);
        for &(out, a) in &buf {
            if let Some(&i) = lookup.get(&out) {
                acc += amps[i].conj() * a * amps[j];
            }
        }
    }
    acc
}

/// `<ψ|op|ψ>` for a real sector state.
pub fn expectation<T: Scalar>(op: &PauliOperator<T>, s: &SectorState<T>) -> T {
    expectation_compiled(&op.compile(), s)
}

pub fn expectation_compiled<T: Scalar>(op: &CompiledOperator<T>, s: &SectorState<T>) -> T {
    let parts: Vec<T> = s
        .basis
        .states
        .par_iter()
        .enumerate()
        .map_init(Vec::new, |buf, (j, &ket)| {
            if s.amps[j] == T::zero() {
                return T::zero();
            }
            op.apply_ket(ket, buf);
            let mut acc = T::zero();
            for &(out, a) in buf.iter() {
                if let Some(i) = s.basis.index_of(out) {
                    acc += s.amps[i] * a.re * s.amps[j];
                }
            }
            acc
        })
        .collect();
    parts.into_iter().sum()
}

/// One eigenstate with its symmetry diagnostics.
#[derive(Clone, Debug)]
pub struct Level<T: Scalar> {
    pub energy: T,
    pub state: SectorState<T>,
    /// Expectation of the total color Casimir.
    pub color_casimir: T,
    /// Expectation of `I²` (`None` for a single flavor).
    pub isospin: Option<T>,
    pub residual: T,
}

impl<T: Scalar> Level<T> {
    pub fn is_singlet(&self) -> bool {
        self.color_casimir.abs() < T::of(1e-6)
    }
}

/// Lowest `k` levels of `H + penalty` in a sector, with degenerate clusters
/// rotated to diagonalize the color and isospin Casimirs.
pub fn sector_levels<T: Scalar>(
    p: &ModelParams,
    ham: &Hamiltonian<T>,
    basis: &SectorBasis,
    k: usize,
) -> Result<Vec<Level<T>>> {
    if basis.dim() == 0 {
        return Ok(vec![]);
    }
    let h = assemble_sparse(&ham.total(), basis)?;
    let k = k.min(basis.dim());
    let eig = lowest_eigenpairs(&h, k, T::of(1e-10))?;
    let cas = color_casimir::<T>(p)?.compile();
    let iso = if p.nf >= 2 { Some(isospin_casimir::<T>(p)?.compile()) } else { None };
    let vecs = resolve_degeneracies(&eig, basis, &cas, iso.as_ref());
    Ok(eig
        .eigenvalues
        .iter()
        .zip(vecs)
        .zip(&eig.residuals)
        .map(|((&e, v), &r)| {
            let state = SectorState { basis: basis.clone(), amps: v };
            let color_casimir = expectation_compiled(&cas, &state);
            let isospin = iso.as_ref().map(|i| expectation_compiled(i, &state));
            Level { energy: e, state, color_casimir, isospin, residual: r }
        })
        .collect())
}

fn resolve_degeneracies<T: Scalar>(
    eig: &EigenResult<T>,
    basis: &SectorBasis,
    cas: &CompiledOperator<T>,
    iso: Option<&CompiledOperator<T>>,
) -> Vec<Vec<T>> {
    let mut vecs = eig.eigenvectors.clone();
    let vals = &eig.eigenvalues;
    let mut start = 0;
    while start < vals.len() {
        let mut end = start + 1;
        let scale = vals[start].abs().max(T::one());
        while end < vals.len() && (vals[end] - vals[start]).abs() < T::of(1e-8) * scale {
            end += 1;
        }
        if end - start > 1 {
            let sub: Vec<SectorState<T>> =
                (start..end).map(|i| SectorState { basis: basis.clone(), amps: vecs[i].clone() }).collect();
            let m = end - start;
            let mut mat = vec![vec![T::zero(); m]; m];
            for i in 0..m {
                for j in 0..m {
                    let mut v = matrix_between(cas, &sub[i], &sub[j]);
                    if let Some(op) = iso {
                        v += T::of(0.6180339887) * matrix_between(op, &sub[i], &sub[j]);
                    }
                    mat[i][j] = v;
                }
            }
            for i in 0..m {
                for j in 0..i {
                    let a = (mat[i][j] + mat[j][i]) * T::of(0.5);
                    mat[i][j] = a;
                    mat[j][i] = a;
                }
            }
            let (_, rot) = symmetric_eigen(&mat);
            for (r, coeffs) in rot.iter().enumerate() {
                let mut v = vec![T::zero(); basis.dim()];
                for (c, s) in coeffs.iter().zip(&sub) {
                    for (x, y) in v.iter_mut().zip(&s.amps) {
                        *x += *c * *y;
                    }
                }
                crate::linalg::fix_sign(&mut v);
                vecs[start + r] = v;
            }
        }
        start = end;
    }
    vecs
}

fn matrix_between<T: Scalar>(op: &CompiledOperator<T>, a: &SectorState<T>, b: &SectorState<T>) -> T {
    let mut buf = Vec::new();
    let mut acc = T::zero();
    for (j, &ket) in b.basis.states.iter().enumerate() {
        if b.amps[j] == T::zero() {
            continue;
        }
        op.apply_ket(ket, &mut buf);
        for &(out, x) in &buf {
            if let Some(i) = a.basis.index_of(out) {
                acc += a.amps[i] * x.re * b.amps[j];
            }
        }
    }
    acc
}

/// Vacuum, mesons and baryons extracted from sector spectra.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct HadronTable {
    pub e_vac: f64,
    /// Lowest excited isoscalar singlet (Nf=1: lowest excited singlet).
    pub m_sigma: Option<f64>,
    /// Lowest isovector singlet.
    pub m_pi: Option<f64>,
    /// Lowest baryon-number-one singlet (I=3/2 for Nf=2).
    pub m_delta: Option<f64>,
    /// Lowest baryon-number-two singlet (I=0 for Nf=2).
    pub m_deltadelta: Option<f64>,
    pub b_deltadelta: Option<f64>,
}

/// Eigenstates behind a [`HadronTable`].
#[derive(Clone, Debug)]
pub struct HadronStates<T: Scalar> {
    pub vacuum: Level<T>,
    pub sigma: Option<Level<T>>,
    pub pi: Option<Level<T>>,
    /// The `I₃ = 1` member of the pion triplet.
    pub pi_plus: Option<Level<T>>,
    pub delta: Option<Level<T>>,
    pub deltadelta: Option<Level<T>>,
}

fn near(x: f64, target: f64) -> bool {
    (x - target).abs() < 1e-4
}

/// Searches a sector for singlets passing `want`, enlarging the window until `count` are found.
pub fn find_singlets<T: Scalar>(
    p: &ModelParams,
    ham: &Hamiltonian<T>,
    basis: &SectorBasis,
    count: usize,
    want: impl Fn(&Level<T>) -> bool,
) -> Result<Vec<Level<T>>> {
    let mut k = 8.min(basis.dim());
    loop {
        let levels = sector_levels(p, ham, basis, k)?;
        let found: Vec<Level<T>> = levels.into_iter().filter(|l| l.is_singlet() && want(l)).take(count).collect();
        if found.len() >= count || k >= basis.dim() {
            return Ok(found);
        }
        k = (2 * k).min(basis.dim());
    }
}

/// Identifies hadrons; `Nf = 1` returns the meson and baryon analogues.
pub fn hadron_states<T: Scalar>(p: &ModelParams) -> Result<HadronStates<T>> {
    let ham = build_hamiltonian::<T>(p)?;
    let two = p.nf >= 2;
    let i3 = |x: i32| if two { Some(x) } else { None };
    let b0 = enumerate_sector(p, &SectorKey::uniform(p.nc, 0, i3(0)))?;
    let iso = |l: &Level<T>, target: f64| l.isospin.map_or(true, |v| near(v.as_f64(), target));
    let zero = find_singlets(p, &ham, &b0, 2, |l| iso(l, 0.0))?;
    let vacuum = zero.first().cloned().ok_or_else(|| Error::Missing("vacuum singlet".into()))?;
    let sigma = zero.get(1).cloned();
    let pi = if two { find_singlets(p, &ham, &b0, 1, |l| iso(l, 2.0))?.into_iter().next() } else { None };
    let pi_plus = if two {
        let b = enumerate_sector(p, &SectorKey::uniform(p.nc, 0, Some(2)))?;
        find_singlets(p, &ham, &b, 1, |l| iso(l, 2.0))?.into_iter().next()
    } else {
        None
    };
    let b1 = enumerate_sector(p, &SectorKey::uniform(p.nc, 1, i3(if two { 3 } else { 0 })))?;
    let delta = find_singlets(p, &ham, &b1, 1, |l| iso(l, 3.75))?.into_iter().next();
    let b2 = enumerate_sector(p, &SectorKey::uniform(p.nc, 2, i3(0)))?;
    let deltadelta = find_singlets(p, &ham, &b2, 1, |l| iso(l, 0.0))?.into_iter().next();
    Ok(HadronStates { vacuum, sigma, pi, pi_plus, delta, deltadelta })
}

impl<T: Scalar> HadronStates<T> {
    pub fn table(&self) -> HadronTable {
        let e0 = self.vacuum.energy.as_f64();
        let gap = |l: &Option<Level<T>>| l.as_ref().map(|l| l.energy.as_f64() - e0);
        let m_delta = gap(&self.delta);
        let m_dd = gap(&self.deltadelta);
        HadronTable {
            e_vac: e0,
            m_sigma: gap(&self.sigma),
            m_pi: gap(&self.pi),
            m_delta,
            m_deltadelta: m_dd,
            b_deltadelta: m_delta.zip(m_dd).map(|(a, b)| 2.0 * a - b),
        }
    }
}

pub fn hadron_spectrum(p: &ModelParams) -> Result<HadronTable> {
    Ok(hadron_states::<f64>(p)?.table())
}

/// `(<H_m>, <H_kin>, <H_el>)` of a state.
pub fn term_expectations<T: Scalar>(ham: &Hamiltonian<T>, s: &SectorState<T>) -> [T; 3] {
    [expectation(&ham.mass, s), expectation(&ham.kinetic, s), expectation(&ham.electric, s)]
}

/// Term-by-term energy of `state` relative to `vacuum`.
pub fn decompose_energy<T: Scalar>(ham: &Hamiltonian<T>, state: &SectorState<T>, vacuum: &SectorState<T>) -> [T; 3] {
    let a = term_expectations(ham, state);
    let b = term_expectations(ham, vacuum);
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Term-by-term binding `2(Δ − Ω) − (ΔΔ − Ω)`.
pub fn decompose_binding<T: Scalar>(
    ham: &Hamiltonian<T>,
    delta: &SectorState<T>,
    deltadelta: &SectorState<T>,
    vacuum: &SectorState<T>,
) -> [T; 3] {
    let d = decompose_energy(ham, delta, vacuum);
    let dd = decompose_energy(ham, deltadelta, vacuum);
    [0, 1, 2].map(|i| T::of(2.0) * d[i] - dd[i])
}

/// `1 − Tr ρ_q²` for the quark/antiquark bipartition of a state given as `(ket, amp)` pairs.
pub fn linear_entropy_pairs<T: Scalar>(p: &ModelParams, pairs: impl Iterator<Item = (Ket, Cplx<T>)>) -> T {
    let qmask: Ket = (0..p.nqubits()).filter(|&q| p.is_quark_qubit(q)).fold(0, |m, q| m | 1 << q);
    // Group by the quark part; the Gram matrix over antiquark parts has the same purity.
    let mut by_q: HashMap<Ket, Vec<(Ket, Cplx<T>)>> = HashMap::new();
    let mut norm = T::zero();
    for (k, a) in pairs {
        if a.norm_sqr() == T::zero() {
            continue;
        }
        norm += a.norm_sqr();
        by_q.entry(k & qmask).or_default().push((k & !qmask, a));
    }
    let mut gram: HashMap<(Ket, Ket), Cplx<T>> = HashMap::new();
    for list in by_q.values() {
        for &(a1, x) in list {
            for &(a2, y) in list {
                *gram.entry((a1, a2)).or_default() += x * y.conj();
            }
        }
    }
    let purity: T = gram.values().map(|g| g.norm_sqr()).sum::<T>() / (norm * norm);
    T::one() - purity
}

pub fn linear_entropy<T: Scalar>(p: &ModelParams, s: &SectorState<T>) -> T {
    linear_entropy_pairs(p, s.kets())
}

/// Expected number of quarks plus antiquarks.
pub fn occupation<T: Scalar>(p: &ModelParams, s: &SectorState<T>) -> T {
    expectation(&occupation_operator::<T>(p), s)
}

/// `<(Σ_{m≤n} Q_m)²>` for every link `n`.
pub fn electric_field_profile<T: Scalar>(p: &ModelParams, s: &SectorState<T>) -> Result<Vec<T>> {
    let nrm = s.norm();
    if (nrm - T::one()).abs() > T::of(1e-8) {
        return Err(Error::NotNormalized(nrm.as_f64()));
    }
    Ok(link_casimirs::<T>(p)?.iter().map(|op| expectation(op, s)).collect())
}

/// Every eigenvalue of `H + penalty` for a small model, by sector.
pub fn full_spectrum(p: &ModelParams) -> Result<Vec<f64>> {
    let ham = build_hamiltonian::<f64>(p)?;
    let total = ham.total();
    let mut all = Vec::new();
    for b in all_sectors(p)? {
        let m = assemble_sparse(&total, &b)?;
        let (vals, _) = symmetric_eigen(&m.to_dense());
        all.extend(vals);
    }
    all.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(all)
}
