//! Phase-exact Pauli strings, weighted Pauli sums and the Jordan–Wigner map.
//!
//! Letters are held in symplectic form: one x bit-plane and one z bit-plane,
//! packed 64 qubits per word. `I=(0,0)`, `X=(1,0)`, `Z=(0,1)`, `Y=(1,1)` and a
//! letter string with planes `(x,z)` denotes `i^{|x&z|} X^x Z^z`.
//! Qubit 0 is printed rightmost. Computational value 0 is spin-up.

use crate::error::{Error, Result};
use crate::scalar::{i_pow, Cplx, Scalar};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

/// Basis ket as a bit pattern; bit `q` is the value of qubit `q`.
pub type Ket = u64;

/// Coefficients smaller than this are dropped by [`PauliOperator::prune`].
pub const PRUNE_TOL: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    fn bits(self) -> (bool, bool) {
        match self {
            Letter::I => (false, false),
            Letter::X => (true, false),
            Letter::Y => (true, true),
            Letter::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Letter::I,
            (true, false) => Letter::X,
            (true, true) => Letter::Y,
            (false, true) => Letter::Z,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Letter::I => 'I',
            Letter::X => 'X',
            Letter::Y => 'Y',
            Letter::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(Letter::I),
            'X' => Some(Letter::X),
            'Y' => Some(Letter::Y),
            'Z' => Some(Letter::Z),
            _ => None,
        }
    }
}

fn words(n: usize) -> usize {
    n.div_ceil(64).max(1)
}

fn popcount(v: &[u64]) -> u32 {
    v.iter().map(|w| w.count_ones()).sum()
}

/// Phase-free letter string; the key type of [`PauliOperator`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letters {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
}

impl Letters {
    pub fn identity(n: usize) -> Self {
        Letters { n, x: vec![0; words(n)], z: vec![0; words(n)] }
    }

    pub fn single(n: usize, q: usize, l: Letter) -> Self {
        let mut s = Self::identity(n);
        s.set(q, l);
        s
    }

    /// Builds a string from `(qubit, letter)` pairs; later pairs overwrite earlier ones.
    pub fn from_pairs(n: usize, pairs: &[(usize, Letter)]) -> Self {
        let mut s = Self::identity(n);
        for &(q, l) in pairs {
            s.set(q, l);
        }
        s
    }

    /// Builds from bit masks (requires `n <= 64`).
    pub fn from_masks(n: usize, x: u64, z: u64) -> Self {
        assert!(n <= 64);
        let keep = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        Letters { n, x: vec![x & keep], z: vec![z & keep] }
    }

    pub fn nqubits(&self) -> usize {
        self.n
    }

    pub fn set(&mut self, q: usize, l: Letter) {
        assert!(q < self.n, "qubit {q} out of range for {} qubits", self.n);
        let (xb, zb) = l.bits();
        let (w, b) = (q / 64, q % 64);
        self.x[w] = (self.x[w] & !(1 << b)) | ((xb as u64) << b);
        self.z[w] = (self.z[w] & !(1 << b)) | ((zb as u64) << b);
    }

    pub fn letter(&self, q: usize) -> Letter {
        let (w, b) = (q / 64, q % 64);
        Letter::from_bits(self.x[w] >> b & 1 == 1, self.z[w] >> b & 1 == 1)
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&w| w == 0)
    }

    pub fn weight(&self) -> usize {
        self.x.iter().zip(&self.z).map(|(a, b)| (a | b).count_ones() as usize).sum()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.n).filter(|&q| self.letter(q) != Letter::I).collect()
    }

    pub fn is_diagonal(&self) -> bool {
        self.x.iter().all(|&w| w == 0)
    }

    /// x bit-plane as a single mask (requires `n <= 64`).
    pub fn x_mask(&self) -> u64 {
        debug_assert!(self.n <= 64);
        self.x[0]
    }

    /// z bit-plane as a single mask (requires `n <= 64`).
    pub fn z_mask(&self) -> u64 {
        debug_assert!(self.n <= 64);
        self.z[0]
    }

    fn y_count(&self) -> u32 {
        self.x.iter().zip(&self.z).map(|(a, b)| (a & b).count_ones()).sum()
    }

    /// Whether the two strings commute.
    pub fn commutes_with(&self, other: &Letters) -> bool {
        let s: u32 = (0..self.x.len())
            .map(|w| (self.x[w] & other.z[w]).count_ones() + (self.z[w] & other.x[w]).count_ones())
            .sum();
        s % 2 == 0
    }

    /// Product `self * other` as `(i^k, letters)`.
    pub fn mul(&self, other: &Letters) -> (u8, Letters) {
        assert_eq!(self.n, other.n);
        let x: Vec<u64> = self.x.iter().zip(&other.x).map(|(a, b)| a ^ b).collect();
        let z: Vec<u64> = self.z.iter().zip(&other.z).map(|(a, b)| a ^ b).collect();
        let cross: Vec<u64> = self.z.iter().zip(&other.x).map(|(a, b)| a & b).collect();
        let out = Letters { n: self.n, x, z };
        let k = self.y_count() as i64 + other.y_count() as i64 + 2 * popcount(&cross) as i64
            - out.y_count() as i64;
        (k.rem_euclid(4) as u8, out)
    }

    /// Image of a basis ket: `P|k> = i^phase |k'>` (requires `n <= 64`).
    pub fn apply(&self, ket: Ket) -> (Ket, u8) {
        let (x, z) = (self.x_mask(), self.z_mask());
        let sign = 2 * ((z & ket).count_ones() & 1);
        (ket ^ x, ((self.y_count() + sign) & 3) as u8)
    }

    /// Letters restricted to a subset of qubits, relabelled `0..qubits.len()`.
    pub fn restrict(&self, qubits: &[usize]) -> Letters {
        let mut out = Letters::identity(qubits.len());
        for (i, &q) in qubits.iter().enumerate() {
            out.set(i, self.letter(q));
        }
        out
    }
}

impl fmt::Display for Letters {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in (0..self.n).rev() {
            write!(f, "{}", self.letter(q).as_char())?;
        }
        Ok(())
    }
}

impl FromStr for Letters {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let chars: Vec<char> = s.trim().chars().collect();
        let n = chars.len();
        let mut out = Letters::identity(n);
        for (pos, c) in chars.iter().enumerate() {
            let l = Letter::from_char(*c).ok_or_else(|| Error::Parse(format!("bad letter {c:?}")))?;
            out.set(n - 1 - pos, l);
        }
        Ok(out)
    }
}

/// Letter string with an exact phase from `{1, i, -1, -i}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    /// Exponent `k` of the phase `i^k`, in `0..4`.
    pub phase: u8,
    pub letters: Letters,
}

impl PauliString {
    pub fn new(phase: u8, letters: Letters) -> Self {
        PauliString { phase: phase & 3, letters }
    }

    pub fn nqubits(&self) -> usize {
        self.letters.n
    }

    pub fn multiply(&self, other: &PauliString) -> Result<PauliString> {
        if self.nqubits() != other.nqubits() {
            return Err(Error::Dimension { expected: self.nqubits(), got: other.nqubits() });
        }
        let (k, letters) = self.letters.mul(&other.letters);
        Ok(PauliString::new(self.phase + other.phase + k, letters))
    }

    /// `(image ket, amplitude)` for a basis ket.
    pub fn apply_to_bitstring<T: Scalar>(&self, ket: Ket) -> (Ket, Cplx<T>) {
        let (out, k) = self.letters.apply(ket);
        (out, i_pow(k + self.phase))
    }

    /// Conjugation `C P C` by a CNOT (self-inverse), tracking the sign.
    pub fn conjugate_cnot(&self, control: usize, target: usize) -> PauliString {
        let l = &self.letters;
        let (xc, zc) = l.letter(control).bits();
        let (xt, zt) = l.letter(target).bits();
        let flip = xc && zt && !(xt ^ zc);
        let mut out = l.clone();
        out.set(control, Letter::from_bits(xc, zc ^ zt));
        out.set(target, Letter::from_bits(xt ^ xc, zt));
        PauliString::new(self.phase + if flip { 2 } else { 0 }, out)
    }

    /// Conjugation `H P H` by a Hadamard.
    pub fn conjugate_h(&self, q: usize) -> PauliString {
        let (x, z) = self.letters.letter(q).bits();
        let mut out = self.letters.clone();
        out.set(q, Letter::from_bits(z, x));
        PauliString::new(self.phase + if x && z { 2 } else { 0 }, out)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = ["+", "+i", "-", "-i"][self.phase as usize];
        write!(f, "{p}{}", self.letters)
    }
}

/// Weighted sum of Pauli strings on a fixed number of qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliOperator<T: Scalar> {
    n: usize,
    terms: BTreeMap<Letters, Cplx<T>>,
}

impl<T: Scalar> PauliOperator<T> {
    pub fn zero(n: usize) -> Self {
        PauliOperator { n, terms: BTreeMap::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self::constant(n, T::one())
    }

    pub fn constant(n: usize, c: T) -> Self {
        let mut op = Self::zero(n);
        op.add_term(Letters::identity(n), Cplx::new(c, T::zero()));
        op
    }

    pub fn from_string(p: &PauliString, c: Cplx<T>) -> Self {
        let mut op = Self::zero(p.nqubits());
        op.add_term(p.letters.clone(), c * i_pow::<T>(p.phase));
        op
    }

    pub fn single(n: usize, q: usize, l: Letter) -> Self {
        let mut op = Self::zero(n);
        op.add_term(Letters::single(n, q, l), Cplx::new(T::one(), T::zero()));
        op
    }

    pub fn z(n: usize, q: usize) -> Self {
        Self::single(n, q, Letter::Z)
    }

    /// `σ^+ = (X + iY)/2 = |0><1|`.
    pub fn sigma_plus(n: usize, q: usize) -> Self {
        let h = T::of(0.5);
        let mut op = Self::zero(n);
        op.add_term(Letters::single(n, q, Letter::X), Cplx::new(h, T::zero()));
        op.add_term(Letters::single(n, q, Letter::Y), Cplx::new(T::zero(), h));
        op
    }

    /// `σ^- = (X - iY)/2 = |1><0|`.
    pub fn sigma_minus(n: usize, q: usize) -> Self {
        Self::sigma_plus(n, q).adjoint()
    }

    pub fn nqubits(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Letters, &Cplx<T>)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, l: &Letters) -> Cplx<T> {
        self.terms.get(l).copied().unwrap_or_default()
    }

    pub fn add_term(&mut self, l: Letters, c: Cplx<T>) {
        assert_eq!(l.n, self.n, "qubit count mismatch");
        *self.terms.entry(l).or_default() += c;
    }

    /// Drops coefficients below `tol` in modulus.
    pub fn prune(mut self, tol: T) -> Self {
        self.terms.retain(|_, c| c.norm() > tol);
        self
    }

    pub fn pruned(self) -> Self {
        self.prune(T::of(PRUNE_TOL))
    }

    pub fn scale(mut self, c: Cplx<T>) -> Self {
        for v in self.terms.values_mut() {
            *v *= c;
        }
        self
    }

    pub fn scale_real(self, c: T) -> Self {
        self.scale(Cplx::new(c, T::zero()))
    }

    pub fn add(mut self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "qubit count mismatch");
        for (l, c) in &other.terms {
            self.add_term(l.clone(), *c);
        }
        self
    }

    pub fn sub(self, other: &Self) -> Self {
        self.add(&other.clone().scale_real(-T::one()))
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "qubit count mismatch");
        let mut out = Self::zero(self.n);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let (k, l) = a.mul(b);
                out.add_term(l, *ca * *cb * i_pow::<T>(k));
            }
        }
        out.pruned()
    }

    pub fn adjoint(&self) -> Self {
        PauliOperator { n: self.n, terms: self.terms.iter().map(|(l, c)| (l.clone(), c.conj())).collect() }
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self)).pruned()
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        self.mul(other).add(&other.mul(self)).pruned()
    }

    /// Largest coefficient modulus (0 for the empty sum).
    pub fn max_abs(&self) -> T {
        self.terms.values().map(|c| c.norm()).fold(T::zero(), T::max)
    }

    /// Sum of coefficient moduli; an upper bound on the operator norm.
    pub fn one_norm(&self) -> T {
        self.terms.values().map(|c| c.norm()).sum()
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.terms.values().all(|c| c.im.abs() <= tol)
    }

    /// Whether every term is diagonal in the computational basis.
    pub fn is_diagonal(&self) -> bool {
        self.terms.keys().all(Letters::is_diagonal)
    }

    /// Constant (identity) part.
    pub fn trace_part(&self) -> Cplx<T> {
        self.coefficient(&Letters::identity(self.n))
    }

    pub fn apply_ket(&self, ket: Ket) -> Vec<(Ket, Cplx<T>)> {
        self.terms
            .iter()
            .map(|(l, c)| {
                let (out, k) = l.apply(ket);
                (out, *c * i_pow::<T>(k))
            })
            .collect()
    }

    /// `<bra|op|ket>`.
    pub fn matrix_element(&self, bra: Ket, ket: Ket) -> Cplx<T> {
        let flip = bra ^ ket;
        self.terms
            .iter()
            .filter(|(l, _)| l.x_mask() == flip)
            .map(|(l, c)| *c * i_pow::<T>(l.apply(ket).1))
            .sum()
    }

    /// Dense row-major matrix (small qubit counts only).
    pub fn to_dense(&self) -> Vec<Vec<Cplx<T>>> {
        assert!(self.n <= 14, "dense form limited to 14 qubits");
        let d = 1usize << self.n;
        let mut m = vec![vec![Cplx::default(); d]; d];
        for col in 0..d {
            for (row, a) in self.apply_ket(col as Ket) {
                m[row as usize][col] += a;
            }
        }
        m
    }

    /// Groups terms by their flip pattern for fast repeated application.
    pub fn compile(&self) -> CompiledOperator<T> {
        let mut groups: BTreeMap<u64, Vec<(u64, Cplx<T>)>> = BTreeMap::new();
        for (l, c) in &self.terms {
            let k = l.y_count() as u8;
            groups.entry(l.x_mask()).or_default().push((l.z_mask(), *c * i_pow::<T>(k)));
        }
        CompiledOperator { n: self.n, groups: groups.into_iter().collect() }
    }

    /// Embeds into a larger register, mapping local qubit `i` to `map[i]`.
    pub fn embed(&self, n: usize, map: &[usize]) -> Self {
        let mut out = Self::zero(n);
        for (l, c) in &self.terms {
            let pairs: Vec<(usize, Letter)> = (0..self.n).map(|q| (map[q], l.letter(q))).collect();
            out.add_term(Letters::from_pairs(n, &pairs), *c);
        }
        out
    }

    /// Text form: one `re im LETTERS` line per term.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (l, c) in &self.terms {
            s.push_str(&format!("{:e} {:e} {}\n", c.re, c.im, l));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut op: Option<Self> = None;
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(Error::Parse(format!("expected 3 fields: {line:?}")));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse(format!("{s}: {e}")));
            let c = Cplx::new(T::of(num(parts[0])?), T::of(num(parts[1])?));
            let l: Letters = parts[2].parse()?;
            let o = op.get_or_insert_with(|| Self::zero(l.n));
            if o.n != l.n {
                return Err(Error::Dimension { expected: o.n, got: l.n });
            }
            o.add_term(l, c);
        }
        op.ok_or_else(|| Error::Parse("no terms".into()))
    }
}

impl<T: Scalar> fmt::Display for PauliOperator<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Operator grouped by flip mask: `O|k> = Σ_g (Σ_t c_t (-1)^{|z_t & k|}) |k ^ x_g>`.
#[derive(Clone, Debug)]
pub struct CompiledOperator<T: Scalar> {
    pub n: usize,
    pub groups: Vec<(u64, Vec<(u64, Cplx<T>)>)>,
}

impl<T: Scalar> CompiledOperator<T> {
    /// Nonzero images of a basis ket.
    pub fn apply_ket(&self, ket: Ket, out: &mut Vec<(Ket, Cplx<T>)>) {
        out.clear();
        for (x, zs) in &self.groups {
            let mut a = Cplx::<T>::default();
            for (z, c) in zs {
                if (z & ket).count_ones() & 1 == 1 {
                    a -= *c;
                } else {
                    a += *c;
                }
            }
            if a.norm_sqr() > T::of(1e-28) {
                out.push((ket ^ x, a));
            }
        }
    }

    /// Diagonal part evaluated on a ket.
    pub fn diagonal(&self, ket: Ket) -> Cplx<T> {
        let mut a = Cplx::<T>::default();
        for (x, zs) in &self.groups {
            if *x == 0 {
                for (z, c) in zs {
                    if (z & ket).count_ones() & 1 == 1 {
                        a -= *c;
                    } else {
                        a += *c;
                    }
                }
            }
        }
        a
    }
}

/// `ψ_idx = ⊗_{l<idx}(-Z_l) σ^-_idx`.
pub fn jw_annihilation<T: Scalar>(idx: usize, nqubits: usize) -> Result<PauliOperator<T>> {
    if idx >= nqubits {
        return Err(Error::Index(format!("mode {idx} >= {nqubits} qubits")));
    }
    let mut tail = Letters::identity(nqubits);
    for l in 0..idx {
        tail.set(l, Letter::Z);
    }
    let sign = if idx % 2 == 0 { T::one() } else { -T::one() };
    let string = PauliOperator::from_string(&PauliString::new(0, tail), Cplx::new(sign, T::zero()));
    Ok(string.mul(&PauliOperator::sigma_minus(nqubits, idx)))
}

/// `ψ†_idx`.
pub fn jw_creation<T: Scalar>(idx: usize, nqubits: usize) -> Result<PauliOperator<T>> {
    Ok(jw_annihilation(idx, nqubits)?.adjoint())
}

/// Parses a ket written with qubit 0 rightmost.
pub fn parse_ket(s: &str) -> Result<Ket> {
    let s = s.trim().trim_start_matches('|').trim_end_matches('>').trim_end_matches('⟩');
    if s.len() > 64 {
        return Err(Error::Parse("kets longer than 64 qubits are unsupported".into()));
    }
    u64::from_str_radix(s, 2).map_err(|e| Error::Parse(format!("{s}: {e}")))
}

/// Formats a ket with qubit 0 rightmost.
pub fn format_ket(k: Ket, n: usize) -> String {
    (0..n).rev().map(|q| if k >> q & 1 == 1 { '1' } else { '0' }).collect()
}
