//! State-vector simulation, exact evolution, Trotter scans and noisy sampling.

use crate::circuit::{pauli_twirl, step_generators, Circuit, Gate, TrotterOptions};
use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen;
use crate::model::{build_hamiltonian, ModelParams};
use crate::pauli::{Ket, PauliOperator};
use crate::sector::{assemble_sparse, enumerate_sector, ket_key, SectorBasis, SectorKey};
use crate::{Complex, Operator};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use std::collections::{BTreeMap, HashMap};

/// Largest register simulated as a dense state vector.
pub const MAX_STATE_QUBITS: usize = 26;

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    pub nqubits: usize,
    pub amps: Vec<Complex>,
}

impl StateVector {
    pub fn basis(nqubits: usize, ket: Ket) -> Result<Self> {
        if nqubits > MAX_STATE_QUBITS {
            return Err(Error::TooLarge { what: "state vector", size: nqubits, limit: MAX_STATE_QUBITS });
        }
        if ket >> nqubits != 0 {
            return Err(Error::Index(format!("ket {ket:#b} outside {nqubits} qubits")));
        }
        let mut amps = vec![Complex::new(0.0, 0.0); 1 << nqubits];
        amps[ket as usize] = Complex::new(1.0, 0.0);
        Ok(StateVector { nqubits, amps })
    }

    pub fn from_amplitudes(nqubits: usize, amps: Vec<Complex>) -> Result<Self> {
        if amps.len() != 1 << nqubits {
            return Err(Error::Dimension { expected: 1 << nqubits, got: amps.len() });
        }
        Ok(StateVector { nqubits, amps })
    }

    /// Embeds real amplitudes over sector kets.
    pub fn from_sector(basis: &SectorBasis, amps: &[f64]) -> Result<Self> {
        let mut s = StateVector::basis(basis.nqubits, 0)?;
        s.amps[0] = Complex::new(0.0, 0.0);
        for (&k, &a) in basis.states.iter().zip(amps) {
            s.amps[k as usize] = Complex::new(a, 0.0);
        }
        Ok(s)
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn probability(&self, ket: Ket) -> f64 {
        self.amps.get(ket as usize).map_or(0.0, |a| a.norm_sqr())
    }

    pub fn inner(&self, other: &StateVector) -> Complex {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// Nonzero `(ket, amplitude)` pairs.
    pub fn support(&self, tol: f64) -> Vec<(Ket, Complex)> {
        self.amps.iter().enumerate().filter(|(_, a)| a.norm() > tol).map(|(k, &a)| (k as Ket, a)).collect()
    }

    pub fn expectation(&self, op: &Operator) -> Result<Complex> {
        if op.nqubits() != self.nqubits {
            return Err(Error::Dimension { expected: self.nqubits, got: op.nqubits() });
        }
        let c = op.compile();
        let mut buf = Vec::new();
        let mut acc = Complex::new(0.0, 0.0);
        for (k, a) in self.amps.iter().enumerate() {
            if a.norm_sqr() == 0.0 {
                continue;
            }
            c.apply_ket(k as Ket, &mut buf);
            for &(out, x) in &buf {
                acc += self.amps[out as usize].conj() * x * a;
            }
        }
        Ok(acc)
    }

    /// Appends `k` ancilla wires in `|0⟩`.
    pub fn with_ancillas(&self, k: usize) -> StateVector {
        let mut amps = self.amps.clone();
        amps.resize(self.amps.len() << k, Complex::new(0.0, 0.0));
        StateVector { nqubits: self.nqubits + k, amps }
    }

    /// Drops the top `k` wires, which must be back in `|0⟩`.
    pub fn without_ancillas(&self, k: usize) -> Result<StateVector> {
        let keep = 1usize << (self.nqubits - k);
        let leak: f64 = self.amps[keep..].iter().map(|a| a.norm_sqr()).sum();
        if leak > 1e-20 {
            return Err(Error::Params(format!("ancilla left excited with weight {leak:e}")));
        }
        Ok(StateVector { nqubits: self.nqubits - k, amps: self.amps[..keep].to_vec() })
    }

    pub fn apply_gate(&mut self, g: &Gate) {
        let a = &mut self.amps;
        match *g {
            Gate::Rz { q, theta } => {
                let (lo, hi) = (Complex::from_polar(1.0, -theta / 2.0), Complex::from_polar(1.0, theta / 2.0));
                for (k, x) in a.iter_mut().enumerate() {
                    *x *= if k >> q & 1 == 0 { lo } else { hi };
                }
            }
            Gate::Ry { q, theta } => rotate_pairs(a, q, theta, |_| true),
            Gate::H(q) => {
                let r = std::f64::consts::FRAC_1_SQRT_2;
                for_pairs(a.len(), q, |i, j| {
                    let (x, y) = (a[i], a[j]);
                    a[i] = (x + y) * r;
                    a[j] = (x - y) * r;
                });
            }
            Gate::X(q) => for_pairs(a.len(), q, |i, j| a.swap(i, j)),
            Gate::Y(q) => for_pairs(a.len(), q, |i, j| {
                let (x, y) = (a[i], a[j]);
                a[i] = Complex::new(y.im, -y.re);
                a[j] = Complex::new(-x.im, x.re);
            }),
            Gate::Z(q) => {
                for (k, x) in a.iter_mut().enumerate() {
                    if k >> q & 1 == 1 {
                        *x = -*x;
                    }
                }
            }
            Gate::Cnot { control, target } => for_pairs(a.len(), target, |i, j| {
                if i >> control & 1 == 1 {
                    a.swap(i, j);
                }
            }),
            Gate::Cry { theta, target, ref controls } => {
                let ok = |k: usize| controls.iter().all(|c| (k >> c.qubit & 1 == 1) == c.on_one);
                rotate_pairs(a, target, theta, ok);
            }
        }
    }
}

fn for_pairs(len: usize, q: usize, mut f: impl FnMut(usize, usize)) {
    let bit = 1usize << q;
    for i in 0..len {
        if i & bit == 0 {
            f(i, i | bit);
        }
    }
}

fn rotate_pairs(a: &mut [Complex], q: usize, theta: f64, ok: impl Fn(usize) -> bool) {
    let (s, c) = (theta / 2.0).sin_cos();
    for_pairs(a.len(), q, |i, j| {
        if ok(i) {
            let (x, y) = (a[i], a[j]);
            a[i] = x * c - y * s;
            a[j] = x * s + y * c;
        }
    });
}

/// Applies every gate and the global phase.
pub fn apply_circuit(state: &StateVector, c: &Circuit) -> Result<StateVector> {
    if state.nqubits != c.nqubits {
        return Err(Error::Dimension { expected: c.nqubits, got: state.nqubits });
    }
    let mut s = state.clone();
    for g in &c.gates {
        s.apply_gate(g);
    }
    if c.global_phase != 0.0 {
        let ph = Complex::from_polar(1.0, c.global_phase);
        s.amps.iter_mut().for_each(|a| *a *= ph);
    }
    Ok(s)
}

/// Runs a circuit on a register without its ancillas, checking they return to `|0⟩`.
pub fn run_on_register(state: &StateVector, c: &Circuit) -> Result<StateVector> {
    if state.nqubits + c.ancillas != c.nqubits {
        return Err(Error::Dimension { expected: c.nqubits - c.ancillas, got: state.nqubits });
    }
    apply_circuit(&state.with_ancillas(c.ancillas), c)?.without_ancillas(c.ancillas)
}

/// Dense unitary of a circuit on its register (ancillas start and end in `|0⟩`); `U[row][col]`.
pub fn circuit_unitary(c: &Circuit) -> Result<Vec<Vec<Complex>>> {
    let n = c.nqubits - c.ancillas;
    if n > 12 {
        return Err(Error::TooLarge { what: "dense unitary", size: n, limit: 12 });
    }
    let dim = 1usize << n;
    let cols: Vec<Vec<Complex>> =
        (0..dim).map(|k| Ok(run_on_register(&StateVector::basis(n, k as Ket)?, c)?.amps)).collect::<Result<_>>()?;
    Ok((0..dim).map(|i| (0..dim).map(|j| cols[j][i]).collect()).collect())
}

/// Exact `exp(−i t op)` of a Hermitian operator on ≤ 12 qubits, via its dense spectrum.
pub fn dense_exponential(op: &Operator, t: f64) -> Result<Vec<Vec<Complex>>> {
    let n = op.nqubits();
    if n > 12 {
        return Err(Error::TooLarge { what: "dense exponential", size: n, limit: 12 });
    }
    let dim = 1usize << n;
    let m = op.to_dense();
    // Embed the Hermitian matrix as a real symmetric one of twice the size.
    let mut big = vec![vec![0.0; 2 * dim]; 2 * dim];
    for i in 0..dim {
        for j in 0..dim {
            let z = m[i][j];
            big[i][j] = z.re;
            big[i + dim][j + dim] = z.re;
            big[i][j + dim] = -z.im;
            big[i + dim][j] = z.im;
        }
    }
    let (vals, vecs) = symmetric_eigen(&big);
    let mut u = vec![vec![Complex::new(0.0, 0.0); dim]; dim];
    // Each eigenvalue appears twice, as (v_r, v_i) and (−v_i, v_r); half the sum is the projector.
    for (lam, v) in vals.iter().zip(&vecs) {
        let ph = Complex::from_polar(0.5, -lam * t);
        let w: Vec<Complex> = (0..dim).map(|i| Complex::new(v[i], v[i + dim])).collect();
        for i in 0..dim {
            let wi = w[i] * ph;
            for j in 0..dim {
                u[i][j] += wi * w[j].conj();
            }
        }
    }
    Ok(u)
}

/// Largest entry of `|A − B|`.
pub fn max_abs_diff(a: &[Vec<Complex>], b: &[Vec<Complex>]) -> f64 {
    a.iter().zip(b).flat_map(|(r, s)| r.iter().zip(s).map(|(x, y)| (x - y).norm())).fold(0.0, f64::max)
}

/// Sector basis and spectrum of `H` for each sector a state touches.
#[derive(Clone, Debug)]
pub struct ExactPropagator {
    nqubits: usize,
    blocks: Vec<(SectorBasis, Vec<f64>, Vec<Vec<f64>>)>,
}

/// Largest sector diagonalized densely for exact evolution.
pub const MAX_EXACT_SECTOR: usize = 4096;

impl ExactPropagator {
    pub fn new(p: &ModelParams, sectors: &[SectorKey]) -> Result<Self> {
        let h = build_hamiltonian::<f64>(p)?.total();
        let mut blocks = Vec::new();
        for key in sectors {
            let basis = enumerate_sector(p, key)?;
            if basis.dim() > MAX_EXACT_SECTOR {
                return Err(Error::TooLarge { what: "exact sector", size: basis.dim(), limit: MAX_EXACT_SECTOR });
            }
            let (vals, vecs) = symmetric_eigen(&assemble_sparse(&h, &basis)?.to_dense());
            blocks.push((basis, vals, vecs));
        }
        Ok(ExactPropagator { nqubits: p.nqubits(), blocks })
    }

    /// Covers every sector in which `state` has weight.
    pub fn for_state(p: &ModelParams, state: &StateVector) -> Result<Self> {
        let mut keys: Vec<SectorKey> = Vec::new();
        for (k, _) in state.support(0.0) {
            let key = ket_key(p, k);
            if !keys.contains(&key) {
                keys.push(key);
            }
        }
        Self::new(p, &keys)
    }

    pub fn evolve(&self, state: &StateVector, t: f64) -> Result<StateVector> {
        if state.nqubits != self.nqubits {
            return Err(Error::Dimension { expected: self.nqubits, got: state.nqubits });
        }
        let mut out = StateVector { nqubits: self.nqubits, amps: vec![Complex::new(0.0, 0.0); state.amps.len()] };
        let mut covered = 0.0;
        for (basis, vals, vecs) in &self.blocks {
            let psi: Vec<Complex> = basis.states.iter().map(|&k| state.amps[k as usize]).collect();
            covered += psi.iter().map(|a| a.norm_sqr()).sum::<f64>();
            let phi = propagate(vals, vecs, &psi, t);
            for (&k, a) in basis.states.iter().zip(phi) {
                out.amps[k as usize] = a;
            }
        }
        let total = state.norm().powi(2);
        if (covered - total).abs() > 1e-10 * total.max(1.0) {
            return Err(Error::Params("state has weight outside the prepared sectors".into()));
        }
        Ok(out)
    }
}

fn propagate(vals: &[f64], vecs: &[Vec<f64>], psi: &[Complex], t: f64) -> Vec<Complex> {
    let mut out = vec![Complex::new(0.0, 0.0); psi.len()];
    for (lam, v) in vals.iter().zip(vecs) {
        let c: Complex = v.iter().zip(psi).map(|(x, a)| a * x).sum::<Complex>() * Complex::from_polar(1.0, -lam * t);
        for (o, x) in out.iter_mut().zip(v) {
            *o += c * x;
        }
    }
    out
}

/// `exp(−iHt)ψ` with `H` including any penalty.
pub fn exact_evolve(p: &ModelParams, state: &StateVector, t: f64) -> Result<StateVector> {
    ExactPropagator::for_state(p, state)?.evolve(state, t)
}

#[derive(Clone, Debug)]
enum Factor {
    Phases(Vec<f64>),
    Spectral { vals: Vec<f64>, vecs: Vec<Vec<f64>> },
}

/// Trotter steps restricted to one sector: every step generator exponentiated exactly in the
/// sector, in circuit order. Agrees with the gate-level circuit on that sector.
#[derive(Clone, Debug)]
pub struct SectorTrotter {
    pub basis: SectorBasis,
    factors: Vec<Factor>,
}

impl SectorTrotter {
    pub fn new(p: &ModelParams, basis: SectorBasis, opts: &TrotterOptions) -> Result<Self> {
        let mut factors: Vec<Factor> = Vec::new();
        for g in step_generators(p, opts)? {
            let m = assemble_sparse(&g, &basis)?;
            if g.is_diagonal() {
                let d: Vec<f64> = (0..basis.dim()).map(|i| m.get(i, i)).collect();
                if let Some(Factor::Phases(prev)) = factors.last_mut() {
                    prev.iter_mut().zip(&d).for_each(|(a, b)| *a += b);
                } else {
                    factors.push(Factor::Phases(d));
                }
            } else {
                let (vals, vecs) = symmetric_eigen(&m.to_dense());
                factors.push(Factor::Spectral { vals, vecs });
            }
        }
        Ok(SectorTrotter { basis, factors })
    }

    pub fn step(&self, psi: &mut Vec<Complex>, dt: f64) {
        for f in &self.factors {
            match f {
                Factor::Phases(d) => psi.iter_mut().zip(d).for_each(|(a, e)| *a *= Complex::from_polar(1.0, -e * dt)),
                Factor::Spectral { vals, vecs } => *psi = propagate(vals, vecs, psi, dt),
            }
        }
    }

    /// `steps` steps of `t / steps` from `psi`.
    pub fn evolve(&self, psi: &[Complex], t: f64, steps: usize) -> Vec<Complex> {
        let mut v = psi.to_vec();
        let dt = t / steps as f64;
        for _ in 0..steps {
            self.step(&mut v, dt);
        }
        v
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Method {
    Exact,
    Trotter { steps: usize, options: TrotterOptions },
}

/// `|⟨target|U(t)|source⟩|²` between basis states of one sector.
pub fn transition_probability(p: &ModelParams, source: Ket, target: Ket, t: f64, method: &Method) -> Result<f64> {
    let key = ket_key(p, source);
    if ket_key(p, target) != key {
        return Ok(0.0);
    }
    let basis = enumerate_sector(p, &key)?;
    let (i, j) = (basis.index_of(source).unwrap(), basis.index_of(target).unwrap());
    let mut psi = vec![Complex::new(0.0, 0.0); basis.dim()];
    psi[i] = Complex::new(1.0, 0.0);
    let out = match method {
        Method::Exact => {
            let h = build_hamiltonian::<f64>(p)?.total();
            let (vals, vecs) = symmetric_eigen(&assemble_sparse(&h, &basis)?.to_dense());
            propagate(&vals, &vecs, &psi, t)
        }
        Method::Trotter { steps, options } => {
            if *steps == 0 {
                return Err(Error::Params("at least one Trotter step".into()));
            }
            SectorTrotter::new(p, basis, options)?.evolve(&psi, t, *steps)
        }
    };
    Ok(out[j].norm_sqr())
}

/// Transition probability curves from one basis state, exact and Trotterized.
#[derive(Clone, Debug)]
pub struct TrotterScan {
    trotter: SectorTrotter,
    vals: Vec<f64>,
    vecs: Vec<Vec<f64>>,
    source: usize,
    target: usize,
}

/// Fractional errors below this exact probability are measured against it instead.
pub const PROBABILITY_FLOOR: f64 = 1e-6;

impl TrotterScan {
    pub fn new(p: &ModelParams, source: Ket, target: Ket, opts: &TrotterOptions) -> Result<Self> {
        let key = ket_key(p, source);
        if ket_key(p, target) != key {
            return Err(Error::Params("source and target lie in different sectors".into()));
        }
        let basis = enumerate_sector(p, &key)?;
        let (source, target) = (basis.index_of(source).unwrap(), basis.index_of(target).unwrap());
        let h = build_hamiltonian::<f64>(p)?.total();
        let (vals, vecs) = symmetric_eigen(&assemble_sparse(&h, &basis)?.to_dense());
        Ok(TrotterScan { trotter: SectorTrotter::new(p, basis, opts)?, vals, vecs, source, target })
    }

    fn start(&self) -> Vec<Complex> {
        let mut psi = vec![Complex::new(0.0, 0.0); self.trotter.basis.dim()];
        psi[self.source] = Complex::new(1.0, 0.0);
        psi
    }

    pub fn exact(&self, t: f64) -> f64 {
        propagate(&self.vals, &self.vecs, &self.start(), t)[self.target].norm_sqr()
    }

    pub fn trotter(&self, t: f64, steps: usize) -> f64 {
        self.trotter.evolve(&self.start(), t, steps)[self.target].norm_sqr()
    }

    /// `|P_N − P| / max(P, floor)`.
    pub fn fractional_error(&self, t: f64, steps: usize) -> f64 {
        let ex = self.exact(t);
        (self.trotter(t, steps) - ex).abs() / ex.max(PROBABILITY_FLOOR)
    }

    /// Smallest `N` whose fractional error stays within `epsilon` at every grid time
    /// `k·spacing ≤ t`.
    pub fn required_steps(&self, t: f64, epsilon: f64, spacing: f64, start: usize, cap: usize) -> Result<usize> {
        if epsilon <= 0.0 || spacing <= 0.0 {
            return Err(Error::Params("epsilon and spacing must be positive".into()));
        }
        let npts = (t / spacing + 1e-9).floor() as usize;
        let grid: Vec<f64> = (1..=npts).rev().map(|k| k as f64 * spacing).collect();
        let exact: Vec<f64> = grid.iter().map(|&s| self.exact(s)).collect();
        let mut n = start.max(1);
        while n <= cap {
            let ok = grid.iter().zip(&exact).all(|(&s, &ex)| (self.trotter(s, n) - ex).abs() / ex.max(PROBABILITY_FLOOR) <= epsilon);
            if ok {
                return Ok(n);
            }
            n += 1;
        }
        Err(Error::NoConvergence { iterations: cap, residual: f64::NAN })
    }
}

/// Grid on which [`required_trotter_steps`] checks the fractional error.
pub const STEP_SCAN_SPACING: f64 = 0.5;

/// Largest step count [`required_trotter_steps`] tries.
pub const STEP_SCAN_CAP: usize = 100_000;

/// Steps needed for `epsilon` fractional accuracy of the `source → target` probability at every
/// [`STEP_SCAN_SPACING`] grid time up to `t`.
pub fn required_trotter_steps(p: &ModelParams, t: f64, epsilon: f64, source: Ket, target: Ket, opts: &TrotterOptions) -> Result<usize> {
    TrotterScan::new(p, source, target, opts)?.required_steps(t, epsilon, STEP_SCAN_SPACING, 1, STEP_SCAN_CAP)
}

/// `N = a t² + b t + c` with 95% intervals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadraticFit {
    pub coeffs: [f64; 3],
    pub intervals: [(f64, f64); 3],
    pub points: usize,
}

/// Least-squares quadratic through the points with `t ≥ t_min`.
pub fn fit_quadratic(points: &[(f64, f64)], t_min: f64) -> Result<QuadraticFit> {
    let pts: Vec<(f64, f64)> = points.iter().copied().filter(|&(t, _)| t >= t_min).collect();
    let n = pts.len();
    if n < 4 {
        return Err(Error::Params(format!("quadratic fit needs ≥ 4 points, got {n}")));
    }
    // fit in u = t/T so the normal equations stay well conditioned
    let big = pts.iter().fold(0.0f64, |m, p| m.max(p.0.abs())).max(f64::MIN_POSITIVE);
    let unscale = [1.0 / (big * big), 1.0 / big, 1.0];
    let mut ata = [[0.0; 3]; 3];
    let mut atb = [0.0; 3];
    for &(t, y) in &pts {
        let u = t / big;
        let row = [u * u, u, 1.0];
        for i in 0..3 {
            atb[i] += row[i] * y;
            for j in 0..3 {
                ata[i][j] += row[i] * row[j];
            }
        }
    }
    let inv = invert3(&ata).ok_or_else(|| Error::Degenerate("quadratic fit is rank deficient".into()))?;
    let coeffs: [f64; 3] = std::array::from_fn(|i| unscale[i] * (0..3).map(|j| inv[i][j] * atb[j]).sum::<f64>());
    let rss: f64 = pts.iter().map(|&(t, y)| (y - coeffs[0] * t * t - coeffs[1] * t - coeffs[2]).powi(2)).sum();
    let dof = (n - 3) as f64;
    let sigma2 = rss / dof;
    let q = StudentsT::new(0.0, 1.0, dof).map_err(|e| Error::Params(e.to_string()))?.inverse_cdf(0.975);
    let intervals = std::array::from_fn(|i| {
        let half = unscale[i] * q * (sigma2 * inv[i][i]).max(0.0).sqrt();
        (coeffs[i] - half, coeffs[i] + half)
    });
    Ok(QuadraticFit { coeffs, intervals, points: n })
}

fn invert3(m: &[[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let c = |i: usize, j: usize| {
        let (r0, r1) = ((i + 1) % 3, (i + 2) % 3);
        let (c0, c1) = ((j + 1) % 3, (j + 2) % 3);
        m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]
    };
    let det: f64 = (0..3).map(|j| m[0][j] * c(0, j)).sum();
    let scale = m.iter().flatten().fold(0.0f64, |a, x| a.max(x.abs())).powi(3);
    if det.abs() <= 1e-14 * scale {
        return None;
    }
    Some(std::array::from_fn(|i| std::array::from_fn(|j| c(j, i) / det)))
}

/// Two-qubit depolarizing noise after each CNOT.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Probability that a uniformly random two-qubit Pauli (identity included) follows a CNOT;
    /// 1 fully depolarizes the pair.
    pub strength: f64,
    pub seed: u64,
    /// Number of distinct twirled variants.
    pub ensemble: usize,
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.strength) {
            return Err(Error::Params(format!("noise strength {} outside [0, 1]", self.strength)));
        }
        if self.ensemble == 0 {
            return Err(Error::Params("ensemble needs at least one circuit".into()));
        }
        Ok(())
    }
}

pub type Histogram = BTreeMap<Ket, u64>;

fn shot_rng(seed: u64, variant: u64, shot: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(variant);
    r.set_word_pos(u128::from(shot) << 20);
    r
}

/// Samples `shots` outcomes of `circuit` on `|initial⟩` under twirling and CNOT depolarizing noise.
/// Each shot follows its own noise trajectory.
pub fn simulate_noisy_twirled(circuit: &Circuit, initial: Ket, noise: &NoiseSpec, shots: u64) -> Result<Histogram> {
    noise.validate()?;
    let start = StateVector::basis(circuit.nqubits - circuit.ancillas, initial)?.with_ancillas(circuit.ancillas);
    let variants: Vec<Circuit> = (0..noise.ensemble as u64).map(|v| pauli_twirl(circuit, noise.seed ^ (v << 32))).collect();
    let keep = circuit.nqubits - circuit.ancillas;
    let counts: Vec<Ket> = (0..shots)
        .into_par_iter()
        .map(|shot| {
            let v = shot % variants.len() as u64;
            let mut rng = shot_rng(noise.seed, v, shot);
            let mut s = start.clone();
            for g in &variants[v as usize].gates {
                s.apply_gate(g);
                if let Gate::Cnot { control, target } = *g {
                    if noise.strength > 0.0 && rng.gen::<f64>() < noise.strength {
                        for q in [control, target] {
                            match rng.gen_range(0..4) {
                                1 => s.apply_gate(&Gate::X(q)),
                                2 => s.apply_gate(&Gate::Y(q)),
                                3 => s.apply_gate(&Gate::Z(q)),
                                _ => {}
                            }
                        }
                    }
                }
            }
            let mut u: f64 = rng.gen();
            let mut out = 0;
            for (k, a) in s.amps.iter().enumerate() {
                u -= a.norm_sqr();
                if u < 0.0 {
                    out = k;
                    break;
                }
            }
            (out & ((1 << keep) - 1)) as Ket
        })
        .collect();
    let mut h = Histogram::new();
    for k in counts {
        *h.entry(k).or_default() += 1;
    }
    Ok(h)
}

/// Histogram restricted to one sector, with the retained fraction.
#[derive(Clone, Debug, PartialEq)]
pub struct PostSelected {
    pub counts: Histogram,
    pub kept: u64,
    pub total: u64,
}

impl PostSelected {
    pub fn retention(&self) -> f64 {
        self.kept as f64 / self.total as f64
    }

    pub fn probability(&self, ket: Ket) -> f64 {
        self.counts.get(&ket).copied().unwrap_or(0) as f64 / self.kept as f64
    }

    /// Binomial standard error of [`Self::probability`].
    pub fn std_error(&self, ket: Ket) -> f64 {
        let p = self.probability(ket);
        (p * (1.0 - p) / self.kept as f64).sqrt()
    }
}

pub fn post_select(h: &Histogram, p: &ModelParams, key: &SectorKey) -> Result<PostSelected> {
    let total: u64 = h.values().sum();
    let counts: Histogram = h.iter().filter(|(&k, _)| &ket_key(p, k) == key).map(|(&k, &c)| (k, c)).collect();
    let kept = counts.values().sum();
    if kept == 0 {
        return Err(Error::Missing("no shots survive post-selection".into()));
    }
    Ok(PostSelected { counts, kept, total })
}

/// Undoes a depolarizing contraction toward `floor`, calibrated by a circuit whose ideal outcome is 1.
pub fn mitigate_depolarizing(p_phys: f64, p_mit: f64, floor: f64) -> Result<f64> {
    let denom = p_mit - floor;
    if denom.abs() < 1e-12 {
        return Err(Error::Degenerate("mitigation probability sits on the decohered floor".into()));
    }
    Ok((p_phys - floor) * (1.0 - floor) / denom + floor)
}

/// Diagonal observable counts: `Σ_k P(k) f(k)` over a histogram.
pub fn histogram_mean(h: &Histogram, f: impl Fn(Ket) -> f64) -> f64 {
    let total: u64 = h.values().sum();
    h.iter().map(|(&k, &c)| c as f64 * f(k)).sum::<f64>() / total as f64
}

/// Probabilities of a noiseless run as a map.
pub fn probabilities(s: &StateVector, tol: f64) -> HashMap<Ket, f64> {
    s.amps.iter().enumerate().filter(|(_, a)| a.norm_sqr() > tol).map(|(k, a)| (k as Ket, a.norm_sqr())).collect()
}

/// `exp(−i Σ_a θ_a Q^(a))` on a state, with `Q^(a)` the total color charges.
pub fn color_rotation(p: &ModelParams, state: &StateVector, angles: &[f64]) -> Result<StateVector> {
    if angles.len() != p.nc * p.nc - 1 {
        return Err(Error::Dimension { expected: p.nc * p.nc - 1, got: angles.len() });
    }
    let mut gen: Operator = PauliOperator::zero(p.nqubits());
    for (a, &th) in angles.iter().enumerate() {
        gen = gen.add(&crate::model::total_charge::<f64>(p, a)?.scale_real(th));
    }
    let u = dense_exponential(&gen.pruned(), 1.0)?;
    let amps = u.iter().map(|row| row.iter().zip(&state.amps).map(|(x, y)| x * y).sum()).collect();
    StateVector::from_amplitudes(state.nqubits, amps)
}
