//! Qubit Hamiltonian of 1+1D SU(Nc) gauge theory with Nf staggered flavors in axial gauge.
//!
//! Staggered site `n` runs over `0..2L`; even sites hold quarks, odd sites antiquarks.
//! Mode `(n, f, c)` sits on qubit `Nc·Nf·n + Nc·f + c`, so the colors of one
//! flavor on one site form a contiguous block.

use crate::error::{Error, Result};
use crate::pauli::{jw_annihilation, jw_creation, Letter, Letters, PauliOperator};
use crate::scalar::{Cplx, Scalar};
use serde::{Deserialize, Serialize};

/// One lattice model instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub nc: usize,
    pub nf: usize,
    pub l: usize,
    /// Per-flavor masses.
    pub masses: Vec<f64>,
    pub g: f64,
    #[serde(default)]
    pub mu_b: f64,
    #[serde(default)]
    pub mu_i: f64,
    /// Penalty coupling.
    #[serde(default)]
    pub h: f64,
    /// Adds the constant that makes every basis state's mass energy non-negative.
    #[serde(default = "yes")]
    pub mass_shift: bool,
}

fn yes() -> bool {
    true
}

impl ModelParams {
    /// Equal masses for all flavors, no chemical potentials, no penalty.
    pub fn new(nc: usize, nf: usize, l: usize, m: f64, g: f64) -> Self {
        ModelParams { nc, nf, l, masses: vec![m; nf], g, mu_b: 0.0, mu_i: 0.0, h: 0.0, mass_shift: true }
    }

    pub fn with_h(mut self, h: f64) -> Self {
        self.h = h;
        self
    }

    pub fn with_g(mut self, g: f64) -> Self {
        self.g = g;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.nc < 2 {
            return Err(Error::Params(format!("nc must be >= 2, got {}", self.nc)));
        }
        if self.nf < 1 || self.l < 1 {
            return Err(Error::Params("nf and l must be >= 1".into()));
        }
        if self.masses.len() != self.nf {
            return Err(Error::Params(format!("{} masses for {} flavors", self.masses.len(), self.nf)));
        }
        let finite = self.masses.iter().chain([&self.g, &self.mu_b, &self.mu_i, &self.h]).all(|v| v.is_finite());
        if !finite || self.g < 0.0 || self.h < 0.0 {
            return Err(Error::Params("g and h must be finite and non-negative".into()));
        }
        Ok(())
    }

    /// `2·L·Nc·Nf`.
    pub fn nqubits(&self) -> usize {
        2 * self.l * self.nc * self.nf
    }

    /// Number of staggered sites.
    pub fn nsites(&self) -> usize {
        2 * self.l
    }

    pub fn qubit(&self, n: usize, f: usize, c: usize) -> usize {
        self.nc * self.nf * n + self.nc * f + c
    }

    /// Qubits of the color block `(n, f)`.
    pub fn block(&self, n: usize, f: usize) -> Vec<usize> {
        (0..self.nc).map(|c| self.qubit(n, f, c)).collect()
    }

    pub fn is_quark_qubit(&self, q: usize) -> bool {
        (q / (self.nc * self.nf)) % 2 == 0
    }

    /// Ket with every site empty: quark qubits 1, antiquark qubits 0.
    pub fn trivial_vacuum(&self) -> u64 {
        assert!(self.nqubits() <= 64);
        (0..self.nqubits()).filter(|&q| self.is_quark_qubit(q)).fold(0, |k, q| k | 1 << q)
    }

    fn check_index(&self, n: usize, f: usize) -> Result<()> {
        if n >= self.nsites() || f >= self.nf {
            return Err(Error::Index(format!("site {n}, flavor {f}")));
        }
        Ok(())
    }
}

/// Generalized Gell-Mann matrices divided by two, `tr(T^a T^b) = δ_ab / 2`.
///
/// For each `j = 1..Nc` the pairs `(k, j)`, `k < j`, contribute a symmetric and an
/// antisymmetric generator, followed by the `j`-th diagonal one; for Nc = 3 this is
/// the usual λ1..λ8 numbering.
pub fn su_n_generators<T: Scalar>(nc: usize) -> Result<Vec<Vec<Vec<Cplx<T>>>>> {
    if nc < 2 {
        return Err(Error::Params(format!("nc must be >= 2, got {nc}")));
    }
    let zero = || vec![vec![Cplx::<T>::default(); nc]; nc];
    let half = T::of(0.5);
    let mut out = Vec::with_capacity(nc * nc - 1);
    for j in 1..nc {
        for k in 0..j {
            let mut s = zero();
            s[k][j] = Cplx::new(half, T::zero());
            s[j][k] = Cplx::new(half, T::zero());
            out.push(s);
            let mut a = zero();
            a[k][j] = Cplx::new(T::zero(), -half);
            a[j][k] = Cplx::new(T::zero(), half);
            out.push(a);
        }
        let mut d = zero();
        let norm = T::of((2.0 / (j * (j + 1)) as f64).sqrt()) * half;
        for (i, row) in d.iter_mut().enumerate().take(j) {
            row[i] = Cplx::new(norm, T::zero());
        }
        d[j][j] = Cplx::new(-T::of(j as f64) * norm, T::zero());
        out.push(d);
    }
    Ok(out)
}

/// `ψ†_a ψ_b` for modes `a < b` on qubits: `σ^+_a ⊗_{a<l<b}(-Z_l) σ^-_b`.
fn hop<T: Scalar>(n: usize, a: usize, b: usize) -> PauliOperator<T> {
    debug_assert!(a < b);
    let mut z = Letters::identity(n);
    for q in a + 1..b {
        z.set(q, Letter::Z);
    }
    let sign = if (b - a - 1) % 2 == 0 { T::one() } else { -T::one() };
    let mid = PauliOperator::<T>::from_string(&crate::pauli::PauliString::new(0, z), Cplx::new(sign, T::zero()));
    PauliOperator::sigma_plus(n, a).mul(&mid).mul(&PauliOperator::sigma_minus(n, b))
}

/// `Q^(a)_{n,f} = Σ_{cc'} ψ†_c T^a_{cc'} ψ_{c'}` on the block `(n, f)`.
pub fn charge_operator<T: Scalar>(p: &ModelParams, n: usize, f: usize, a: usize) -> Result<PauliOperator<T>> {
    p.check_index(n, f)?;
    if a >= p.nc * p.nc - 1 {
        return Err(Error::Index(format!("adjoint index {a}")));
    }
    let gens = su_n_generators::<T>(p.nc)?;
    let t = &gens[a];
    let nq = p.nqubits();
    let q = p.block(n, f);
    let mut op = PauliOperator::zero(nq);
    for c in 0..p.nc {
        if t[c][c].norm() > T::zero() {
            // T is traceless, so the identity part of the number operators cancels.
            op = op.add(&PauliOperator::z(nq, q[c]).scale(t[c][c] * T::of(0.5)));
        }
        for c2 in c + 1..p.nc {
            if t[c][c2].norm() > T::zero() {
                let term = hop::<T>(nq, q[c], q[c2]).scale(t[c][c2]);
                op = op.add(&term).add(&term.adjoint());
            }
        }
    }
    Ok(op.pruned())
}

/// `Σ_a Q^(a)_{n,f} Q^(a)_{m,f'}` in closed form.
///
/// Same block: `(Nc²−1)/8 − (1+1/Nc)/4 Σ_{c<c'} Z_c Z_c'`.
/// Different blocks: `½ Σ_{c<c'} (ψ†_c ψ_c')(ψ†'_c' ψ'_c) + h.c.  +  ⅛ Σ_{cc'} (δ_cc' − 1/Nc) Z_c Z'_c'`.
pub fn charge_product<T: Scalar>(p: &ModelParams, n: usize, f: usize, m: usize, f2: usize) -> Result<PauliOperator<T>> {
    p.check_index(n, f)?;
    p.check_index(m, f2)?;
    let nq = p.nqubits();
    let nc = p.nc as f64;
    let a = p.block(n, f);
    let mut op = PauliOperator::zero(nq);
    if (n, f) == (m, f2) {
        op.add_term(Letters::identity(nq), Cplx::new(T::of((nc * nc - 1.0) / 8.0), T::zero()));
        let w = T::of(-(1.0 + 1.0 / nc) / 4.0);
        for c in 0..p.nc {
            for c2 in c + 1..p.nc {
                op.add_term(Letters::from_pairs(nq, &[(a[c], Letter::Z), (a[c2], Letter::Z)]), Cplx::new(w, T::zero()));
            }
        }
        return Ok(op);
    }
    let b = p.block(m, f2);
    for c in 0..p.nc {
        for c2 in c + 1..p.nc {
            let t = hop::<T>(nq, a[c], a[c2]).mul(&hop::<T>(nq, b[c], b[c2]).adjoint());
            op = op.add(&t.clone().scale_real(T::of(0.5))).add(&t.adjoint().scale_real(T::of(0.5)));
        }
    }
    for c in 0..p.nc {
        for c2 in 0..p.nc {
            let d = if c == c2 { 1.0 } else { 0.0 };
            let w = T::of((d - 1.0 / nc) / 8.0);
            op.add_term(Letters::from_pairs(nq, &[(a[c], Letter::Z), (b[c2], Letter::Z)]), Cplx::new(w, T::zero()));
        }
    }
    Ok(op.pruned())
}

/// `(Σ_{(n,f) ∈ blocks} Q_{n,f})²` summed over the adjoint index.
pub fn block_casimir<T: Scalar>(p: &ModelParams, blocks: &[(usize, usize)]) -> Result<PauliOperator<T>> {
    let mut op = PauliOperator::zero(p.nqubits());
    for (i, &(n, f)) in blocks.iter().enumerate() {
        op = op.add(&charge_product::<T>(p, n, f, n, f)?);
        for &(m, f2) in &blocks[i + 1..] {
            op = op.add(&charge_product::<T>(p, n, f, m, f2)?.scale_real(T::of(2.0)));
        }
    }
    Ok(op.pruned())
}

/// Labelled Hamiltonian terms; the penalty is kept apart from the physical sum.
#[derive(Clone, Debug)]
pub struct Hamiltonian<T: Scalar> {
    pub kinetic: PauliOperator<T>,
    pub mass: PauliOperator<T>,
    pub electric: PauliOperator<T>,
    pub mu_b: PauliOperator<T>,
    pub mu_i: PauliOperator<T>,
    pub penalty: PauliOperator<T>,
}

impl<T: Scalar> Hamiltonian<T> {
    /// `H_kin + H_m + H_el + H_μB + H_μI`.
    pub fn physical(&self) -> PauliOperator<T> {
        self.kinetic.clone().add(&self.mass).add(&self.electric).add(&self.mu_b).add(&self.mu_i).pruned()
    }

    /// Physical sum plus penalty.
    pub fn total(&self) -> PauliOperator<T> {
        self.physical().add(&self.penalty).pruned()
    }

    pub fn labelled(&self) -> [(&'static str, &PauliOperator<T>); 6] {
        [
            ("kinetic", &self.kinetic),
            ("mass", &self.mass),
            ("electric", &self.electric),
            ("mu_b", &self.mu_b),
            ("mu_i", &self.mu_i),
            ("penalty", &self.penalty),
        ]
    }
}

/// Hopping between neighbouring staggered sites, `½ Σ (ψ†_i ψ_{i+NcNf} + h.c.)`.
pub fn kinetic_term<T: Scalar>(p: &ModelParams) -> PauliOperator<T> {
    let nq = p.nqubits();
    let stride = p.nc * p.nf;
    let mut op = PauliOperator::zero(nq);
    for i in 0..(p.nsites() - 1) * stride {
        let t = hop::<T>(nq, i, i + stride).scale_real(T::of(0.5));
        op = op.add(&t).add(&t.adjoint());
    }
    op.pruned()
}

/// `½ Σ m_f [(-1)^n Z + 1]`, the constant dropped when `mass_shift` is off.
pub fn mass_term<T: Scalar>(p: &ModelParams) -> PauliOperator<T> {
    let nq = p.nqubits();
    let mut op = PauliOperator::zero(nq);
    for n in 0..p.nsites() {
        let s = if n % 2 == 0 { 1.0 } else { -1.0 };
        for f in 0..p.nf {
            for q in p.block(n, f) {
                op.add_term(Letters::single(nq, q, Letter::Z), Cplx::new(T::of(0.5 * s * p.masses[f]), T::zero()));
                if p.mass_shift {
                    op.add_term(Letters::identity(nq), Cplx::new(T::of(0.5 * p.masses[f]), T::zero()));
                }
            }
        }
    }
    op.pruned()
}

/// One charge-charge product of the electric energy with its weight.
#[derive(Clone, Debug)]
pub struct ElectricPiece<T: Scalar> {
    pub first: (usize, usize),
    pub second: (usize, usize),
    pub weight: f64,
    /// `weight · Σ_a Q^(a)_first Q^(a)_second`.
    pub op: PauliOperator<T>,
}

impl<T: Scalar> ElectricPiece<T> {
    pub fn is_same_block(&self) -> bool {
        self.first == self.second
    }
}

/// Blocks `(n, f)` that carry electric flux, i.e. all but the last staggered site.
pub fn flux_blocks(p: &ModelParams) -> Vec<(usize, usize)> {
    (0..2 * p.l - 1).flat_map(|n| (0..p.nf).map(move |f| (n, f))).collect()
}

/// Same-block pieces in block order, then cross-block pieces in lexicographic pair order.
pub fn electric_pieces<T: Scalar>(p: &ModelParams) -> Result<Vec<ElectricPiece<T>>> {
    let mut out = Vec::new();
    for_each_electric_piece(p, |piece| {
        out.push(piece);
        Ok(())
    })?;
    Ok(out)
}

/// Visits the pieces of [`electric_pieces`] in the same order without holding them all.
pub fn for_each_electric_piece<T: Scalar>(p: &ModelParams, mut visit: impl FnMut(ElectricPiece<T>) -> Result<()>) -> Result<()> {
    p.validate()?;
    let g2 = p.g * p.g;
    let last = 2 * p.l - 1;
    let blocks = flux_blocks(p);
    for &(n, f) in &blocks {
        let weight = 0.5 * g2 * (last - n) as f64;
        let op = charge_product::<T>(p, n, f, n, f)?.scale_real(T::of(weight));
        visit(ElectricPiece { first: (n, f), second: (n, f), weight, op })?;
    }
    for (i, &(n, f)) in blocks.iter().enumerate() {
        for &(m, f2) in &blocks[i + 1..] {
            let weight = g2 * (last - m) as f64;
            let op = charge_product::<T>(p, n, f, m, f2)?.scale_real(T::of(weight));
            visit(ElectricPiece { first: (n, f), second: (m, f2), weight, op })?;
        }
    }
    Ok(())
}

/// Chromo-electric energy `g²/2 Σ_{links n} (Σ_{m≤n} Q_m)²` with open boundaries.
pub fn electric_term<T: Scalar>(p: &ModelParams) -> Result<PauliOperator<T>> {
    let mut op = PauliOperator::zero(p.nqubits());
    for piece in electric_pieces::<T>(p)? {
        op = op.add(&piece.op);
    }
    Ok(op.pruned())
}

/// `−μ_B/(2Nc) Σ Z`.
pub fn baryon_chemical_term<T: Scalar>(p: &ModelParams) -> PauliOperator<T> {
    let nq = p.nqubits();
    let mut op = PauliOperator::zero(nq);
    let w = -p.mu_b / (2.0 * p.nc as f64);
    for q in 0..nq {
        op.add_term(Letters::single(nq, q, Letter::Z), Cplx::new(T::of(w), T::zero()));
    }
    op.pruned()
}

/// Isospin sign of a flavor: `+1` for the first, `−1` for the second, 0 otherwise.
pub fn isospin_sign(f: usize) -> f64 {
    match f {
        0 => 1.0,
        1 => -1.0,
        _ => 0.0,
    }
}

/// `−μ_I/4 Σ (−1)^f Z` over the first two flavors.
pub fn isospin_chemical_term<T: Scalar>(p: &ModelParams) -> PauliOperator<T> {
    let nq = p.nqubits();
    let mut op = PauliOperator::zero(nq);
    for n in 0..p.nsites() {
        for f in 0..p.nf {
            for q in p.block(n, f) {
                let w = -p.mu_i / 4.0 * isospin_sign(f);
                op.add_term(Letters::single(nq, q, Letter::Z), Cplx::new(T::of(w), T::zero()));
            }
        }
    }
    op.pruned()
}

/// `(h²/2) (Σ_n Σ_f Q_{n,f})²`: vanishes on global color singlets.
pub fn build_penalty<T: Scalar>(p: &ModelParams) -> Result<PauliOperator<T>> {
    Ok(color_casimir::<T>(p)?.scale_real(T::of(0.5 * p.h * p.h)).pruned())
}

/// Quadratic Casimir of the total color charge.
pub fn color_casimir<T: Scalar>(p: &ModelParams) -> Result<PauliOperator<T>> {
    let blocks: Vec<(usize, usize)> = (0..p.nsites()).flat_map(|n| (0..p.nf).map(move |f| (n, f))).collect();
    block_casimir(p, &blocks)
}

pub fn build_hamiltonian<T: Scalar>(p: &ModelParams) -> Result<Hamiltonian<T>> {
    p.validate()?;
    Ok(Hamiltonian {
        kinetic: kinetic_term(p),
        mass: mass_term(p),
        electric: electric_term(p)?,
        mu_b: baryon_chemical_term(p),
        mu_i: isospin_chemical_term(p),
        penalty: build_penalty(p)?,
    })
}

/// Total charge `Σ_n Σ_f Q^(a)_{n,f}`.
pub fn total_charge<T: Scalar>(p: &ModelParams, a: usize) -> Result<PauliOperator<T>> {
    let mut op = PauliOperator::zero(p.nqubits());
    for n in 0..p.nsites() {
        for f in 0..p.nf {
            op = op.add(&charge_operator::<T>(p, n, f, a)?);
        }
    }
    Ok(op.pruned())
}

/// Per-link `(Σ_{m≤n} Q_m)²` operators for links `n = 0..2L−1`.
pub fn link_casimirs<T: Scalar>(p: &ModelParams) -> Result<Vec<PauliOperator<T>>> {
    (0..p.nsites() - 1)
        .map(|n| {
            let blocks: Vec<(usize, usize)> = (0..=n).flat_map(|m| (0..p.nf).map(move |f| (m, f))).collect();
            block_casimir(p, &blocks)
        })
        .collect()
}

/// Isospin Casimir `I² = ½(I⁺I⁻ + I⁻I⁺) + I₃²` built from the first two flavors.
pub fn isospin_casimir<T: Scalar>(p: &ModelParams) -> Result<PauliOperator<T>> {
    if p.nf < 2 {
        return Err(Error::Params("isospin needs at least two flavors".into()));
    }
    let nq = p.nqubits();
    let mut raise = PauliOperator::zero(nq);
    for n in 0..p.nsites() {
        for c in 0..p.nc {
            let u = p.qubit(n, 0, c);
            let d = p.qubit(n, 1, c);
            raise = raise.add(&jw_creation::<T>(u, nq)?.mul(&jw_annihilation::<T>(d, nq)?));
        }
    }
    let lower = raise.adjoint();
    let i3 = isospin_third(p);
    let half = T::of(0.5);
    Ok(raise.mul(&lower).add(&lower.mul(&raise)).scale_real(half).add(&i3.mul(&i3)).pruned())
}

/// `I₃ = ½ Σ (n_u − n_d)` with `n = (1+Z)/2`.
pub fn isospin_third<T: Scalar>(p: &ModelParams) -> PauliOperator<T> {
    let nq = p.nqubits();
    let mut op = PauliOperator::zero(nq);
    for n in 0..p.nsites() {
        for c in 0..p.nc {
            for f in 0..p.nf.min(2) {
                let w = 0.25 * isospin_sign(f);
                op.add_term(Letters::single(nq, p.qubit(n, f, c), Letter::Z), Cplx::new(T::of(w), T::zero()));
            }
        }
    }
    op.pruned()
}

/// Number of quarks plus antiquarks: `Σ_quark (1+Z)/2 + Σ_antiquark (1−Z)/2`.
pub fn occupation_operator<T: Scalar>(p: &ModelParams) -> PauliOperator<T> {
    let nq = p.nqubits();
    let mut op = PauliOperator::constant(nq, T::of(0.5 * nq as f64));
    for q in 0..nq {
        let s = if p.is_quark_qubit(q) { 0.5 } else { -0.5 };
        op.add_term(Letters::single(nq, q, Letter::Z), Cplx::new(T::of(s), T::zero()));
    }
    op.pruned()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qubit_layout() {
        let p = ModelParams::new(3, 2, 1, 1.0, 1.0);
        assert_eq!(p.nqubits(), 12);
        assert_eq!(p.qubit(1, 1, 0), 9);
        assert_eq!(p.trivial_vacuum(), 0b111111);
    }

    #[test]
    fn su3_diagonals() {
        let t = su_n_generators::<f64>(3).unwrap();
        assert_eq!(t.len(), 8);
        assert!((t[2][0][0].re - 0.5).abs() < 1e-15);
        let w = 1.0 / (2.0 * 3f64.sqrt());
        assert!((t[7][2][2].re + 2.0 * w).abs() < 1e-15);
    }
}
