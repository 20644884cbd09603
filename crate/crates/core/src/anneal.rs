//! Annealing-style eigensolver: a projected Hamiltonian, fixed-point amplitudes encoded in
//! binaries, QUBO construction, samplers, zooming with restarts, and deflation.

use crate::error::{Error, Result};
use crate::linalg::{dot, symmetric_eigen};
use crate::model::{build_hamiltonian, ModelParams};
use crate::sector::{assemble_sparse, SectorBasis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Dense symmetric Hamiltonian over an orthonormal basis.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectedHamiltonian {
    pub h: Vec<Vec<f64>>,
}

const SYMMETRY_TOL: f64 = 1e-12;
const ORTHONORMAL_TOL: f64 = 1e-10;

impl ProjectedHamiltonian {
    pub fn new(h: Vec<Vec<f64>>) -> Result<Self> {
        let n = h.len();
        if let Some(row) = h.iter().find(|r| r.len() != n) {
            return Err(Error::Dimension { expected: n, got: row.len() });
        }
        let asym = (0..n).flat_map(|i| (0..i).map(move |j| (i, j))).map(|(i, j)| (h[i][j] - h[j][i]).abs()).fold(0.0, f64::max);
        if asym > SYMMETRY_TOL {
            return Err(Error::Params(format!("projected matrix asymmetric by {asym:e}")));
        }
        Ok(ProjectedHamiltonian { h })
    }

    pub fn dim(&self) -> usize {
        self.h.len()
    }

    pub fn apply(&self, a: &[f64]) -> Vec<f64> {
        self.h.iter().map(|row| dot(row, a)).collect()
    }

    /// `⟨a|h|a⟩ / ⟨a|a⟩`.
    pub fn rayleigh(&self, a: &[f64]) -> Result<f64> {
        let nn = dot(a, a);
        if nn == 0.0 {
            return Err(Error::NotNormalized(0.0));
        }
        Ok(dot(a, &self.apply(a)) / nn)
    }

    /// Ascending eigenvalues and eigenvectors.
    pub fn eigen(&self) -> (Vec<f64>, Vec<Vec<f64>>) {
        symmetric_eigen(&self.h)
    }
}

/// `⟨k|H̃|k'⟩` over the kets of a sector, penalty included.
pub fn project_hamiltonian(p: &ModelParams, basis: &SectorBasis) -> Result<ProjectedHamiltonian> {
    let h = build_hamiltonian::<f64>(p)?.total();
    ProjectedHamiltonian::new(assemble_sparse(&h, basis)?.to_dense())
}

fn check_orthonormal(vectors: &[Vec<f64>], dim: usize) -> Result<()> {
    let mut worst = 0.0f64;
    for (i, u) in vectors.iter().enumerate() {
        if u.len() != dim {
            return Err(Error::Dimension { expected: dim, got: u.len() });
        }
        for (j, v) in vectors.iter().enumerate().take(i + 1) {
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot(u, v) - want).abs());
        }
    }
    if worst > ORTHONORMAL_TOL {
        return Err(Error::NotOrthonormal(worst));
    }
    Ok(())
}

/// `h_{αβ} = ⟨v_α|H|v_β⟩` for explicit orthonormal vectors in the coordinates of `full`.
pub fn project_onto(full: &ProjectedHamiltonian, vectors: &[Vec<f64>]) -> Result<ProjectedHamiltonian> {
    check_orthonormal(vectors, full.dim())?;
    let hv: Vec<Vec<f64>> = vectors.iter().map(|v| full.apply(v)).collect();
    let n = vectors.len();
    let mut h = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let x = 0.5 * (dot(&vectors[i], &hv[j]) + dot(&vectors[j], &hv[i]));
            h[i][j] = x;
            h[j][i] = x;
        }
    }
    ProjectedHamiltonian::new(h)
}

/// `P H P + shift Σ|v⟩⟨v|` with `P` projecting off the found vectors.
pub fn deflate(hp: &ProjectedHamiltonian, found: &[Vec<f64>], shift: f64) -> Result<ProjectedHamiltonian> {
    let n = hp.dim();
    check_orthonormal(found, n)?;
    let project = |x: &mut Vec<f64>| {
        for v in found {
            let c = dot(v, x);
            x.iter_mut().zip(v).for_each(|(a, b)| *a -= c * b);
        }
    };
    // Columns of H P, then P applied on the left.
    let mut cols: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            project(&mut e);
            let mut c = hp.apply(&e);
            project(&mut c);
            c
        })
        .collect();
    for v in found {
        for (j, col) in cols.iter_mut().enumerate() {
            col.iter_mut().zip(v).for_each(|(a, b)| *a += shift * b * v[j]);
        }
    }
    let h = (0..n).map(|i| (0..n).map(|j| 0.5 * (cols[j][i] + cols[i][j])).collect()).collect();
    ProjectedHamiltonian::new(h)
}

/// A shift that lifts deflated states above the whole spectrum.
pub fn default_deflation_shift(hp: &ProjectedHamiltonian) -> f64 {
    let bound = hp.h.iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max);
    2.0 * bound + 1.0
}

/// Fixed-point digitization point: `a_α + Σ_i w_i q_i^α`, `w_i = ±2^{i−K−z}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZoomState {
    pub coeffs: Vec<f64>,
    pub zoom: u32,
    pub eta: f64,
    pub bits: usize,
}

impl ZoomState {
    /// Bit weights, the top bit negative.
    pub fn weights(&self) -> Vec<f64> {
        (1..=self.bits)
            .map(|i| {
                let w = 2f64.powi(i as i32 - self.bits as i32 - self.zoom as i32);
                if i == self.bits {
                    -w
                } else {
                    w
                }
            })
            .collect()
    }

    /// Coefficients after applying an assignment; variable `α·K + (i−1)` holds `q_i^α`.
    pub fn decode(&self, x: &[bool]) -> Vec<f64> {
        let w = self.weights();
        self.coeffs
            .iter()
            .enumerate()
            .map(|(a, c)| c + w.iter().enumerate().filter(|(i, _)| x[a * self.bits + i]).map(|(_, w)| w).sum::<f64>())
            .collect()
    }
}

/// `F(x) = Σ_ij q_ij x_i x_j + constant`, with `q` symmetric.
#[derive(Clone, Debug, PartialEq)]
pub struct Qubo {
    pub q: Vec<Vec<f64>>,
    pub constant: f64,
}

impl Qubo {
    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    /// Objective without the constant.
    pub fn value(&self, x: &[bool]) -> f64 {
        let on: Vec<usize> = (0..x.len()).filter(|&i| x[i]).collect();
        on.iter().map(|&i| on.iter().map(|&j| self.q[i][j]).sum::<f64>()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.q.iter().flatten().all(|&v| v == 0.0)
    }

    /// Upper-triangular `i j v` lines with `F = Σ_{i≤j} v_ij x_i x_j`.
    pub fn to_triplets(&self) -> String {
        let mut s = String::new();
        for i in 0..self.len() {
            for j in i..self.len() {
                let v = if i == j { self.q[i][i] } else { 2.0 * self.q[i][j] };
                if v != 0.0 {
                    let _ = writeln!(s, "{i} {j} {v:.17e}");
                }
            }
        }
        s
    }
}

/// QUBO of `⟨Ψ|H̃|Ψ⟩ − η⟨Ψ|Ψ⟩` over the binaries of one zoom step.
pub fn build_qubo(hp: &ProjectedHamiltonian, zs: &ZoomState) -> Result<Qubo> {
    let n = hp.dim();
    if zs.coeffs.len() != n {
        return Err(Error::Dimension { expected: n, got: zs.coeffs.len() });
    }
    if zs.bits == 0 {
        return Err(Error::Params("need at least one bit per coefficient".into()));
    }
    let k = zs.bits;
    let w = zs.weights();
    let shifted = |a: usize, b: usize| hp.h[a][b] - if a == b { zs.eta } else { 0.0 };
    let ha: Vec<f64> = (0..n).map(|a| (0..n).map(|b| shifted(a, b) * zs.coeffs[b]).sum()).collect();
    let mut q = vec![vec![0.0; n * k]; n * k];
    for a in 0..n {
        for b in 0..n {
            let h = shifted(a, b);
            for i in 0..k {
                for j in 0..k {
                    q[a * k + i][b * k + j] = w[i] * w[j] * h;
                }
            }
        }
        for i in 0..k {
            q[a * k + i][a * k + i] += 2.0 * w[i] * ha[a];
        }
    }
    let constant = dot(&zs.coeffs, &ha);
    Ok(Qubo { q, constant })
}

/// Largest instance the exhaustive sampler accepts.
pub const MAX_EXHAUSTIVE_BINARIES: usize = 24;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnealSchedule {
    pub reads: usize,
    pub sweeps: usize,
    /// Start and end temperatures relative to the largest diagonal entry.
    pub hot: f64,
    pub cold: f64,
    pub seed: u64,
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        AnnealSchedule { reads: 1000, sweeps: 16, hot: 1.0, cold: 1e-3, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampler {
    Exhaustive,
    Annealing(AnnealSchedule),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub bits: Vec<bool>,
    /// Objective without the constant.
    pub energy: f64,
    /// Every assignment is optimal (zero matrix).
    pub degenerate: bool,
}

pub fn sample_qubo(q: &Qubo, sampler: &Sampler) -> Result<Sample> {
    let degenerate = q.is_zero();
    if degenerate || q.is_empty() {
        return Ok(Sample { bits: vec![false; q.len()], energy: 0.0, degenerate: true });
    }
    let (bits, energy) = match sampler {
        Sampler::Exhaustive => exhaustive(q)?,
        Sampler::Annealing(s) => anneal(q, s)?,
    };
    Ok(Sample { bits, energy, degenerate })
}

fn exhaustive(q: &Qubo) -> Result<(Vec<bool>, f64)> {
    let n = q.len();
    if n > MAX_EXHAUSTIVE_BINARIES {
        return Err(Error::TooLarge { what: "exhaustive sampler", size: n, limit: MAX_EXHAUSTIVE_BINARIES });
    }
    // Gray-code walk: one flip per step with fields kept current.
    let mut x = vec![false; n];
    let mut field = vec![0.0; n];
    let (mut e, mut best, mut best_code) = (0.0, 0.0, 0u64);
    let mut code = 0u64;
    for step in 1..1u64 << n {
        let k = step.trailing_zeros() as usize;
        let delta = q.q[k][k] + 2.0 * field[k];
        let (delta, sign) = if x[k] { (-delta, -1.0) } else { (delta, 1.0) };
        x[k] = !x[k];
        code ^= 1 << k;
        e += delta;
        for (j, (f, qkj)) in field.iter_mut().zip(&q.q[k]).enumerate() {
            if j != k {
                *f += sign * qkj;
            }
        }
        if e < best {
            best = e;
            best_code = code;
        }
    }
    let bits: Vec<bool> = (0..n).map(|i| best_code >> i & 1 == 1).collect();
    let energy = q.value(&bits);
    Ok((bits, energy))
}

fn anneal(q: &Qubo, s: &AnnealSchedule) -> Result<(Vec<bool>, f64)> {
    if s.reads == 0 || s.sweeps == 0 || !(s.hot > 0.0 && s.cold > 0.0 && s.cold <= s.hot) {
        return Err(Error::Params("annealing needs reads, sweeps and 0 < cold ≤ hot".into()));
    }
    let n = q.len();
    let scale = (0..n).map(|i| q.q[i][i].abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let ratio = if s.sweeps > 1 { (s.cold / s.hot).powf(1.0 / (s.sweeps - 1) as f64) } else { 1.0 };
    let best = (0..s.reads as u64)
        .into_par_iter()
        .map(|read| {
            let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
            rng.set_stream(read);
            let mut x: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
            let mut field: Vec<f64> = (0..n).map(|i| (0..n).filter(|&j| j != i && x[j]).map(|j| q.q[i][j]).sum()).collect();
            let mut e = q.value(&x);
            let (mut best_e, mut best_x) = (e, x.clone());
            let mut temp = s.hot * scale;
            for _ in 0..s.sweeps {
                for k in 0..n {
                    let raw = q.q[k][k] + 2.0 * field[k];
                    let delta = if x[k] { -raw } else { raw };
                    if delta <= 0.0 || rng.gen::<f64>() < (-delta / temp).exp() {
                        let sign = if x[k] { -1.0 } else { 1.0 };
                        x[k] = !x[k];
                        e += delta;
                        for (j, (f, qkj)) in field.iter_mut().zip(&q.q[k]).enumerate() {
                            if j != k {
                                *f += sign * qkj;
                            }
                        }
                    }
                }
                if e < best_e {
                    best_e = e;
                    best_x.clone_from(&x);
                }
                temp *= ratio;
            }
            (best_e, read, best_x)
        })
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .expect("at least one read");
    let energy = q.value(&best.2);
    Ok((best.2, energy))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZoomConfig {
    pub bits: usize,
    pub zoom_steps: usize,
    /// Iterations after the first, each restarting from the previous solution.
    pub restarts: usize,
    /// Zoom level at which restart `r` begins is `r · restart_stride`.
    pub restart_stride: u32,
    pub eta0: f64,
    pub sampler: Sampler,
    /// Consecutive energy increases tolerated before giving up.
    pub patience: usize,
}

impl Default for ZoomConfig {
    fn default() -> Self {
        ZoomConfig { bits: 2, zoom_steps: 14, restarts: 2, restart_stride: 4, eta0: 0.0, sampler: Sampler::Exhaustive, patience: 6 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZoomRecord {
    pub iteration: usize,
    pub zoom: u32,
    pub eta: f64,
    pub energy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZoomOutcome {
    pub records: Vec<ZoomRecord>,
    /// Normalized best coefficients.
    pub coeffs: Vec<f64>,
    pub energy: f64,
}

impl ZoomOutcome {
    /// Best energy at the end of each iteration.
    pub fn iteration_energies(&self) -> Vec<f64> {
        let last = self.records.iter().map(|r| r.iteration).max().unwrap_or(0);
        (0..=last)
            .map(|it| self.records.iter().filter(|r| r.iteration <= it).map(|r| r.energy).fold(f64::INFINITY, f64::min))
            .collect()
    }
}

fn seeded(sampler: &Sampler, iteration: usize, step: usize) -> Sampler {
    match sampler {
        Sampler::Exhaustive => Sampler::Exhaustive,
        Sampler::Annealing(s) => {
            let mut s = s.clone();
            s.seed = s.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ ((iteration as u64) << 32 | step as u64);
            Sampler::Annealing(s)
        }
    }
}

/// Zooming minimization of `⟨Ψ|H̃|Ψ⟩ − η⟨Ψ|Ψ⟩`, η tracking the best Rayleigh quotient.
pub fn zoom_iterate(hp: &ProjectedHamiltonian, cfg: &ZoomConfig) -> Result<ZoomOutcome> {
    if cfg.bits == 0 || cfg.zoom_steps == 0 {
        return Err(Error::Params("zooming needs bits and steps".into()));
    }
    let n = hp.dim();
    let mut a = vec![0.0; n];
    let mut eta = cfg.eta0;
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut records = Vec::new();
    let mut rising = 0;
    let mut last = f64::INFINITY;
    for it in 0..=cfg.restarts {
        if let Some((_, b)) = &best {
            a.clone_from(b);
        }
        for step in 0..cfg.zoom_steps {
            let zoom = it as u32 * cfg.restart_stride + step as u32;
            let zs = ZoomState { coeffs: a.clone(), zoom, eta, bits: cfg.bits };
            let x = sample_qubo(&build_qubo(hp, &zs)?, &seeded(&cfg.sampler, it, step))?;
            let next = zs.decode(&x.bits);
            let Ok(energy) = hp.rayleigh(&next) else {
                records.push(ZoomRecord { iteration: it, zoom, eta, energy: f64::NAN });
                // null solution: no grid point beats η; lift it just past the lowest diagonal entry
                if best.is_none() {
                    let floor = (0..n).map(|i| hp.h[i][i]).fold(f64::INFINITY, f64::min);
                    eta = eta.max(floor + 1e-9 * (1.0 + floor.abs()));
                }
                continue;
            };
            a = next;
            rising = if energy > last + 1e-15 { rising + 1 } else { 0 };
            last = energy;
            if rising > cfg.patience {
                return Err(Error::NoConvergence { iterations: records.len(), residual: energy });
            }
            if best.as_ref().is_none_or(|(e, _)| energy < *e) {
                best = Some((energy, a.clone()));
            }
            eta = best.as_ref().map_or(eta, |b| b.0);
            records.push(ZoomRecord { iteration: it, zoom, eta, energy });
        }
    }
    let (energy, mut coeffs) = best.ok_or_else(|| Error::Missing("every zoom step returned the zero vector".into()))?;
    let nn = dot(&coeffs, &coeffs).sqrt();
    coeffs.iter_mut().for_each(|c| *c /= nn);
    Ok(ZoomOutcome { records, coeffs, energy })
}

/// `1 − |⟨u|v⟩|²` for normalized vectors.
pub fn infidelity(u: &[f64], v: &[f64]) -> f64 {
    1.0 - dot(u, v).powi(2) / (dot(u, u) * dot(v, v))
}
