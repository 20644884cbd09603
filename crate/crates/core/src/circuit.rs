//! Gate-level circuits for Trotter steps and singlet preparation, with resource tallies.

use crate::error::{Error, Result};
use crate::model::{
    baryon_chemical_term, for_each_electric_piece, isospin_chemical_term, mass_term, ModelParams,
};
use crate::pauli::{Letter, Letters, PauliOperator, PauliString};
use crate::Operator;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// A control qubit and the value it must hold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Control {
    pub qubit: usize,
    pub on_one: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    /// `exp(−iθZ/2)`.
    Rz { q: usize, theta: f64 },
    /// `exp(−iθY/2)`.
    Ry { q: usize, theta: f64 },
    H(usize),
    X(usize),
    Y(usize),
    Z(usize),
    Cnot { control: usize, target: usize },
    /// `RY(θ)` on `target` when every control holds its value; at most two controls.
    Cry { theta: f64, target: usize, controls: Vec<Control> },
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::Rz { q, .. } | Gate::Ry { q, .. } | Gate::H(q) | Gate::X(q) | Gate::Y(q) | Gate::Z(q) => vec![*q],
            Gate::Cnot { control, target } => vec![*control, *target],
            Gate::Cry { target, controls, .. } => {
                let mut v: Vec<usize> = controls.iter().map(|c| c.qubit).collect();
                v.push(*target);
                v
            }
        }
    }

    pub fn validate(&self, nqubits: usize) -> Result<()> {
        let qs = self.qubits();
        for (i, &q) in qs.iter().enumerate() {
            if q >= nqubits {
                return Err(Error::Index(format!("gate operand {q} outside {nqubits} qubits")));
            }
            if qs[..i].contains(&q) {
                return Err(Error::Index(format!("repeated gate operand {q}")));
            }
        }
        match self {
            Gate::Rz { theta, .. } | Gate::Ry { theta, .. } if !theta.is_finite() => {
                Err(Error::Params("non-finite angle".into()))
            }
            Gate::Cry { theta, controls, .. } => {
                if !theta.is_finite() {
                    return Err(Error::Params("non-finite angle".into()));
                }
                if controls.is_empty() || controls.len() > 2 {
                    return Err(Error::Params("controlled RY takes one or two controls".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn inverse(&self) -> Gate {
        match self {
            Gate::Rz { q, theta } => Gate::Rz { q: *q, theta: -theta },
            Gate::Ry { q, theta } => Gate::Ry { q: *q, theta: -theta },
            Gate::Cry { theta, target, controls } => Gate::Cry { theta: -theta, target: *target, controls: controls.clone() },
            g => g.clone(),
        }
    }

    fn is_clifford_frame(&self) -> bool {
        matches!(self, Gate::H(_) | Gate::Cnot { .. })
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::Rz { q, theta } => write!(f, "rz {theta:e} {q}"),
            Gate::Ry { q, theta } => write!(f, "ry {theta:e} {q}"),
            Gate::H(q) => write!(f, "h {q}"),
            Gate::X(q) => write!(f, "x {q}"),
            Gate::Y(q) => write!(f, "y {q}"),
            Gate::Z(q) => write!(f, "z {q}"),
            Gate::Cnot { control, target } => write!(f, "cnot {control} {target}"),
            Gate::Cry { theta, target, controls } => {
                write!(f, "cry {theta:e} {target}")?;
                for c in controls {
                    write!(f, " {}{}", if c.on_one { "" } else { "!" }, c.qubit)?;
                }
                Ok(())
            }
        }
    }
}

impl std::str::FromStr for Gate {
    type Err = Error;

    fn from_str(line: &str) -> Result<Gate> {
        let bad = || Error::Parse(format!("bad gate line `{line}`"));
        let mut it = line.split_whitespace();
        let kind = it.next().ok_or_else(bad)?;
        let rest: Vec<&str> = it.collect();
        let num = |i: usize| -> Result<usize> { rest.get(i).ok_or_else(bad)?.parse().map_err(|_| bad()) };
        let ang = || -> Result<f64> { rest.first().ok_or_else(bad)?.parse().map_err(|_| bad()) };
        let g = match kind {
            "rz" => Gate::Rz { theta: ang()?, q: num(1)? },
            "ry" => Gate::Ry { theta: ang()?, q: num(1)? },
            "h" => Gate::H(num(0)?),
            "x" => Gate::X(num(0)?),
            "y" => Gate::Y(num(0)?),
            "z" => Gate::Z(num(0)?),
            "cnot" => Gate::Cnot { control: num(0)?, target: num(1)? },
            "cry" => {
                let controls = rest
                    .get(2..)
                    .ok_or_else(bad)?
                    .iter()
                    .map(|s| {
                        let (on_one, digits) = match s.strip_prefix('!') {
                            Some(d) => (false, d),
                            None => (true, *s),
                        };
                        digits.parse().map(|qubit| Control { qubit, on_one }).map_err(|_| bad())
                    })
                    .collect::<Result<Vec<_>>>()?;
                Gate::Cry { theta: ang()?, target: num(1)?, controls }
            }
            _ => return Err(bad()),
        };
        Ok(g)
    }
}

/// Receives gates as a builder emits them.
pub trait GateSink {
    fn gate(&mut self, g: Gate);
    /// Multiplies the circuit by `exp(iφ)`.
    fn phase(&mut self, phi: f64);
}

/// Ordered gate list on `nqubits` wires, the last `ancillas` of which start and end in `|0⟩`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub nqubits: usize,
    pub ancillas: usize,
    pub gates: Vec<Gate>,
    pub global_phase: f64,
}

impl GateSink for Circuit {
    fn gate(&mut self, g: Gate) {
        debug_assert!(g.validate(self.nqubits).is_ok(), "{g}");
        self.gates.push(g);
    }

    fn phase(&mut self, phi: f64) {
        self.global_phase += phi;
    }
}

impl Circuit {
    pub fn new(nqubits: usize) -> Self {
        Circuit { nqubits, ancillas: 0, gates: Vec::new(), global_phase: 0.0 }
    }

    pub fn with_ancillas(nqubits: usize, ancillas: usize) -> Self {
        Circuit { nqubits: nqubits + ancillas, ancillas, gates: Vec::new(), global_phase: 0.0 }
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        self.gates.iter().try_for_each(|g| g.validate(self.nqubits))
    }

    /// Appends `other`, widening this circuit if `other` carries more wires.
    pub fn append(&mut self, other: &Circuit) {
        if other.nqubits > self.nqubits {
            self.ancillas += other.nqubits - self.nqubits;
            self.nqubits = other.nqubits;
        }
        self.gates.extend(other.gates.iter().cloned());
        self.global_phase += other.global_phase;
    }

    pub fn inverse(&self) -> Circuit {
        Circuit {
            nqubits: self.nqubits,
            ancillas: self.ancillas,
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
            global_phase: -self.global_phase,
        }
    }

    /// Removes pairs of identical adjacent CNOTs until none remain.
    pub fn cancel_adjacent_cnots(&self) -> Circuit {
        let mut out: Vec<Gate> = Vec::with_capacity(self.gates.len());
        for g in &self.gates {
            if matches!(g, Gate::Cnot { .. }) && out.last() == Some(g) {
                out.pop();
            } else {
                out.push(g.clone());
            }
        }
        Circuit { gates: out, ..self.clone() }
    }

    /// Rewrites controlled rotations over `{RY, CNOT, X}`.
    pub fn decompose(&self) -> Circuit {
        let mut out = Circuit { gates: Vec::new(), ..self.clone() };
        for g in &self.gates {
            decompose_gate(g, &mut out);
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("qubits {} {}\nphase {:e}\n", self.nqubits, self.ancillas, self.global_phase);
        for g in &self.gates {
            s.push_str(&g.to_string());
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Circuit> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let head = lines.next().ok_or_else(|| Error::Parse("empty circuit".into()))?;
        let parts: Vec<&str> = head.split_whitespace().collect();
        let parse = |s: Option<&&str>| -> Result<usize> {
            s.ok_or_else(|| Error::Parse(format!("bad header `{head}`")))?
                .parse()
                .map_err(|_| Error::Parse(format!("bad header `{head}`")))
        };
        if parts.first() != Some(&"qubits") {
            return Err(Error::Parse(format!("bad header `{head}`")));
        }
        let mut c = Circuit { nqubits: parse(parts.get(1))?, ancillas: parse(parts.get(2))?, gates: vec![], global_phase: 0.0 };
        for line in lines {
            if let Some(p) = line.strip_prefix("phase") {
                c.global_phase = p.trim().parse().map_err(|_| Error::Parse(format!("bad phase `{line}`")))?;
            } else {
                c.gates.push(line.parse()?);
            }
        }
        c.validate()?;
        Ok(c)
    }
}

fn decompose_gate(g: &Gate, out: &mut Circuit) {
    let Gate::Cry { theta, target, controls } = g else {
        out.gate(g.clone());
        return;
    };
    let flips: Vec<usize> = controls.iter().filter(|c| !c.on_one).map(|c| c.qubit).collect();
    for &q in &flips {
        out.gate(Gate::X(q));
    }
    let t = *target;
    let cry = |out: &mut Circuit, c: usize, th: f64| {
        out.gate(Gate::Ry { q: t, theta: th / 2.0 });
        out.gate(Gate::Cnot { control: c, target: t });
        out.gate(Gate::Ry { q: t, theta: -th / 2.0 });
        out.gate(Gate::Cnot { control: c, target: t });
    };
    match controls.as_slice() {
        [c] => cry(out, c.qubit, *theta),
        [a, b] => {
            cry(out, b.qubit, theta / 2.0);
            out.gate(Gate::Cnot { control: a.qubit, target: b.qubit });
            cry(out, b.qubit, -theta / 2.0);
            out.gate(Gate::Cnot { control: a.qubit, target: b.qubit });
            cry(out, a.qubit, theta / 2.0);
        }
        _ => unreachable!("validated control count"),
    }
    for &q in &flips {
        out.gate(Gate::X(q));
    }
}

/// Gate tally by kind.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceCount {
    pub rz: u64,
    pub ry: u64,
    pub hadamard: u64,
    pub cnot: u64,
    /// X, Y and Z gates.
    pub pauli: u64,
    /// Controlled rotations before decomposition.
    pub controlled_ry: u64,
}

impl std::ops::Add for ResourceCount {
    type Output = ResourceCount;

    fn add(self, o: ResourceCount) -> ResourceCount {
        ResourceCount {
            rz: self.rz + o.rz,
            ry: self.ry + o.ry,
            hadamard: self.hadamard + o.hadamard,
            cnot: self.cnot + o.cnot,
            pauli: self.pauli + o.pauli,
            controlled_ry: self.controlled_ry + o.controlled_ry,
        }
    }
}

impl std::iter::Sum for ResourceCount {
    fn sum<I: Iterator<Item = ResourceCount>>(it: I) -> Self {
        it.fold(ResourceCount::default(), |a, b| a + b)
    }
}

impl GateSink for ResourceCount {
    fn gate(&mut self, g: Gate) {
        match g {
            Gate::Rz { .. } => self.rz += 1,
            Gate::Ry { .. } => self.ry += 1,
            Gate::H(_) => self.hadamard += 1,
            Gate::X(_) | Gate::Y(_) | Gate::Z(_) => self.pauli += 1,
            Gate::Cnot { .. } => self.cnot += 1,
            Gate::Cry { .. } => {
                let mut c = Circuit::new(usize::MAX);
                decompose_gate(&g, &mut c);
                for d in c.gates {
                    self.gate(d);
                }
            }
        }
    }

    fn phase(&mut self, _phi: f64) {}
}

/// Post-decomposition tally; controlled rotations count two CNOTs and two RYs per control level.
pub fn count_gates(c: &Circuit) -> ResourceCount {
    let mut r = ResourceCount::default();
    for g in &c.gates {
        if matches!(g, Gate::Cry { .. }) {
            r.controlled_ry += 1;
        }
        r.gate(g.clone());
    }
    r
}

/// Conjugates `s` through a sequence of H and CNOT gates, `s ↦ g s g`.
fn conjugate_through(s: PauliString, frame: &[Gate]) -> PauliString {
    frame.iter().fold(s, |s, g| match *g {
        Gate::H(q) => s.conjugate_h(q),
        Gate::Cnot { control, target } => s.conjugate_cnot(control, target),
        _ => unreachable!("frames hold Clifford gates only"),
    })
}

/// Emits `exp(−i t Σ c_k P_k)` for mutually commuting strings that `frame` maps to Z-strings.
///
/// Strings touching `root` in the frame become a Gray-code parity network onto it; the others
/// become CNOT ladders onto their highest qubit.
fn emit_diagonalized<S: GateSink>(
    sink: &mut S,
    frame: &[Gate],
    terms: &[(Letters, f64)],
    t: f64,
    root: Option<usize>,
) {
    debug_assert!(frame.iter().all(Gate::is_clifford_frame));
    let mut rooted: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    let mut free: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    for (l, c) in terms {
        if l.is_identity() {
            sink.phase(-t * c);
            continue;
        }
        let d = conjugate_through(PauliString::new(0, l.clone()), frame);
        assert!(d.letters.is_diagonal(), "frame fails to diagonalize {l}");
        let sign = match d.phase {
            0 => 1.0,
            2 => -1.0,
            _ => unreachable!("Hermitian string picked up an imaginary phase"),
        };
        let mut z = d.letters.support();
        let angle = 2.0 * t * c * sign;
        match root.and_then(|r| z.iter().position(|&q| q == r)) {
            Some(i) => {
                z.remove(i);
                *rooted.entry(z).or_default() += angle;
            }
            None => *free.entry(z).or_default() += angle,
        }
    }
    for g in frame {
        sink.gate(g.clone());
    }
    if let Some(r) = root.filter(|_| !rooted.is_empty()) {
        let wires: Vec<usize> = rooted.keys().flatten().copied().collect::<BTreeSet<_>>().into_iter().collect();
        let subset = |gray: usize| -> Vec<usize> {
            wires.iter().enumerate().filter(|(i, _)| gray >> i & 1 == 1).map(|(_, &q)| q).collect()
        };
        sink.gate(Gate::Rz { q: r, theta: rooted.get(&Vec::new()).copied().unwrap_or(0.0) });
        let mut prev = 0usize;
        for i in 1..1usize << wires.len() {
            let gray = i ^ (i >> 1);
            let bit = (gray ^ prev).trailing_zeros() as usize;
            sink.gate(Gate::Cnot { control: wires[bit], target: r });
            sink.gate(Gate::Rz { q: r, theta: rooted.get(&subset(gray)).copied().unwrap_or(0.0) });
            prev = gray;
        }
        if prev != 0 {
            sink.gate(Gate::Cnot { control: wires[prev.trailing_zeros() as usize], target: r });
        }
    }
    for (qs, &angle) in &free {
        let (&last, rest) = qs.split_last().expect("non-identity string");
        for &q in rest {
            sink.gate(Gate::Cnot { control: q, target: last });
        }
        sink.gate(Gate::Rz { q: last, theta: angle });
        for &q in rest.iter().rev() {
            sink.gate(Gate::Cnot { control: q, target: last });
        }
    }
    for g in frame.iter().rev() {
        sink.gate(g.clone());
    }
}

fn real_terms(op: &Operator) -> Vec<(Letters, f64)> {
    op.terms()
        .map(|(l, c)| {
            debug_assert!(c.im.abs() < 1e-12, "non-Hermitian term {l}");
            (l.clone(), c.re)
        })
        .collect()
}

/// Emits `exp(−i t op)` for an operator of commuting single-Z terms and constants.
fn emit_single_z<S: GateSink>(sink: &mut S, op: &Operator, t: f64) {
    emit_diagonalized(sink, &[], &real_terms(op), t, None);
}

pub fn mass_circuit<S: GateSink>(p: &ModelParams, t: f64, sink: &mut S) {
    emit_single_z(sink, &mass_term::<f64>(p), t);
}

/// Keeps every qubit in the tally even where the chemical potential vanishes.
fn full_width_z(p: &ModelParams, op: &Operator) -> Operator {
    let mut out = op.clone();
    for q in 0..p.nqubits() {
        let l = Letters::single(p.nqubits(), q, Letter::Z);
        if out.coefficient(&l).norm() == 0.0 {
            out.add_term(l, crate::Complex::new(0.0, 0.0));
        }
    }
    out
}

pub fn baryon_chemical_circuit<S: GateSink>(p: &ModelParams, t: f64, sink: &mut S) {
    emit_single_z(sink, &full_width_z(p, &baryon_chemical_term::<f64>(p)), t);
}

pub fn isospin_chemical_circuit<S: GateSink>(p: &ModelParams, t: f64, sink: &mut S) {
    emit_single_z(sink, &full_width_z(p, &isospin_chemical_term::<f64>(p)), t);
}

/// Whether the kinetic circuit tracks JW parity in an ancilla by default.
pub fn default_kinetic_ancilla(p: &ModelParams) -> bool {
    p.nc * p.nf >= 4
}

/// The `(ψ†_a ψ_b + h.c.)/2` strings for the hop starting at mode `a`.
fn hop_terms(p: &ModelParams, a: usize) -> Vec<(Letters, f64)> {
    let nq = p.nqubits();
    let b = a + p.nc * p.nf;
    let sign = if (b - a - 1) % 2 == 0 { 1.0 } else { -1.0 };
    let mut xx = Letters::identity(nq);
    let mut yy = Letters::identity(nq);
    for q in a + 1..b {
        xx.set(q, Letter::Z);
        yy.set(q, Letter::Z);
    }
    for q in [a, b] {
        xx.set(q, Letter::X);
        yy.set(q, Letter::Y);
    }
    vec![(xx, 0.25 * sign), (yy, 0.25 * sign)]
}

/// `exp(−i t H_kin)` as one rotation pair per hop, hops in mode order.
///
/// Without an ancilla the JW string of each hop is folded into its first mode. With one,
/// the ancilla (wire `nqubits`) carries the parity of the sliding string between hops.
pub fn kinetic_circuit<S: GateSink>(p: &ModelParams, t: f64, ancilla: bool, sink: &mut S) {
    let stride = p.nc * p.nf;
    let hops = (p.nsites() - 1) * stride;
    let anc = p.nqubits();
    if ancilla {
        for q in 1..stride {
            sink.gate(Gate::Cnot { control: q, target: anc });
        }
    }
    for a in 0..hops {
        let b = a + stride;
        let mut terms = hop_terms(p, a);
        let mut frame = vec![Gate::Cnot { control: a, target: b }, Gate::H(a)];
        if ancilla {
            let wide = p.nqubits() + 1;
            for (l, _) in terms.iter_mut() {
                let mut pairs: Vec<(usize, Letter)> = [a, b].iter().map(|&q| (q, l.letter(q))).collect();
                pairs.push((anc, Letter::Z));
                *l = Letters::from_pairs(wide, &pairs);
            }
            frame.push(Gate::Cnot { control: anc, target: a });
        } else {
            frame.extend((a + 1..b).map(|q| Gate::Cnot { control: q, target: a }));
        }
        emit_diagonalized(sink, &frame, &terms, t, Some(a));
        if ancilla && a + 1 < hops {
            sink.gate(Gate::Cnot { control: a + 1, target: anc });
            sink.gate(Gate::Cnot { control: b, target: anc });
        }
    }
    if ancilla {
        let last = hops - 1;
        for q in last + 1..last + stride {
            sink.gate(Gate::Cnot { control: q, target: anc });
        }
    }
}

/// Ordering of the hop-hop groups inside one cross-block electric piece.
pub fn color_pairs(nc: usize) -> Vec<(usize, usize)> {
    (0..nc).flat_map(|c| (c + 1..nc).map(move |c2| (c, c2))).collect()
}

/// `exp(−i t H_el)`: same-block ZZ pairs, then each cross-block product diagonalized one
/// color pair at a time in a GHZ frame that absorbs the matching ZZ terms.
pub fn electric_circuit<S: GateSink>(p: &ModelParams, t: f64, sink: &mut S) -> Result<()> {
    for_each_electric_group(p, |g| emit_diagonalized(sink, &g.frame, &g.terms, t, g.root))
}

/// Commuting strings exponentiated together in one Clifford frame.
#[derive(Clone, Debug)]
struct FrameGroup {
    frame: Vec<Gate>,
    terms: Vec<(Letters, f64)>,
    root: Option<usize>,
}

fn cross_piece_groups(p: &ModelParams, op: &Operator, first: (usize, usize), second: (usize, usize)) -> Vec<FrameGroup> {
    let a = p.block(first.0, first.1);
    let b = p.block(second.0, second.1);
    let nc = p.nc;
    let mut zz: BTreeMap<(usize, usize), (Letters, f64)> = BTreeMap::new();
    let mut hops: BTreeMap<(usize, usize), Vec<(Letters, f64)>> = BTreeMap::new();
    for (l, c) in real_terms(op) {
        if l.is_diagonal() {
            let ca = a.iter().position(|&q| l.letter(q) == Letter::Z).expect("ZZ touches first block");
            let cb = b.iter().position(|&q| l.letter(q) == Letter::Z).expect("ZZ touches second block");
            zz.insert((ca, cb), (l, c));
        } else {
            let cs: Vec<usize> = (0..nc).filter(|&c| matches!(l.letter(a[c]), Letter::X | Letter::Y)).collect();
            hops.entry((cs[0], cs[1])).or_default().push((l, c));
        }
    }
    let take = |zz: &mut BTreeMap<(usize, usize), (Letters, f64)>, key, terms: &mut Vec<(Letters, f64)>| {
        if let Some(t) = zz.remove(&key) {
            terms.push(t);
        }
    };
    let pairs = color_pairs(nc);
    let mut out = Vec::with_capacity(pairs.len());
    for (i, &(c, c2)) in pairs.iter().enumerate() {
        let (qa, qb, qc, qd) = (a[c], a[c2], b[c], b[c2]);
        let mut terms = hops.remove(&(c, c2)).unwrap_or_default();
        take(&mut zz, (c, c2), &mut terms);
        take(&mut zz, (c2, c), &mut terms);
        // Path D–A–C–B absorbs the diagonal of `c`; path A–D–B–C that of `c2`.
        let diagonal_of_second = c2 != c + 1 && (c2 + 1) % nc == c;
        let mut frame = if diagonal_of_second {
            take(&mut zz, (c2, c2), &mut terms);
            vec![
                Gate::Cnot { control: qb, target: qc },
                Gate::Cnot { control: qd, target: qb },
                Gate::Cnot { control: qa, target: qd },
                Gate::H(qa),
            ]
        } else {
            if c2 == c + 1 {
                take(&mut zz, (c, c), &mut terms);
            }
            vec![
                Gate::Cnot { control: qc, target: qb },
                Gate::Cnot { control: qa, target: qc },
                Gate::Cnot { control: qa, target: qd },
                Gate::H(qa),
            ]
        };
        if i + 1 == pairs.len() {
            terms.extend(std::mem::take(&mut zz).into_values());
        }
        frame.extend((c + 1..c2).flat_map(|k| [a[k], b[k]]).map(|q| Gate::Cnot { control: q, target: qa }));
        out.push(FrameGroup { frame, terms, root: Some(qa) });
    }
    out
}

fn for_each_electric_group(p: &ModelParams, mut visit: impl FnMut(FrameGroup)) -> Result<()> {
    for_each_electric_piece::<f64>(p, |piece| {
        if piece.is_same_block() {
            visit(FrameGroup { frame: vec![], terms: real_terms(&piece.op), root: None });
        } else {
            cross_piece_groups(p, &piece.op, piece.first, piece.second).into_iter().for_each(&mut visit);
        }
        Ok(())
    })
}

fn electric_groups(p: &ModelParams) -> Result<Vec<FrameGroup>> {
    let mut out = Vec::new();
    for_each_electric_group(p, |g| out.push(g))?;
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermKind {
    Mass,
    BaryonChemical,
    IsospinChemical,
    Kinetic,
    Electric,
}

/// How a first-order Trotter step is assembled.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrotterOptions {
    /// Terms in the order they act on the state.
    pub order: Vec<TermKind>,
    /// `None` applies [`default_kinetic_ancilla`].
    pub kinetic_ancilla: Option<bool>,
    /// Cancel CNOT pairs that become adjacent across term boundaries.
    pub cancel_adjacent: bool,
    /// Emit chemical-potential rotations even when the potential vanishes.
    pub keep_zero_chemical: bool,
}

impl Default for TrotterOptions {
    fn default() -> Self {
        TrotterOptions {
            order: vec![
                TermKind::Mass,
                TermKind::BaryonChemical,
                TermKind::IsospinChemical,
                TermKind::Electric,
                TermKind::Kinetic,
            ],
            kinetic_ancilla: None,
            cancel_adjacent: false,
            keep_zero_chemical: false,
        }
    }
}

impl TrotterOptions {
    pub fn with_order(mut self, order: &[TermKind]) -> Self {
        self.order = order.to_vec();
        self
    }

    pub fn uses_ancilla(&self, p: &ModelParams) -> bool {
        self.kinetic_ancilla.unwrap_or_else(|| default_kinetic_ancilla(p))
    }
}

/// Emits one term's `exp(−i t H_term)`.
pub fn term_circuit<S: GateSink>(p: &ModelParams, kind: TermKind, t: f64, opts: &TrotterOptions, sink: &mut S) -> Result<()> {
    match kind {
        TermKind::Mass => mass_circuit(p, t, sink),
        TermKind::BaryonChemical => {
            if p.mu_b != 0.0 || opts.keep_zero_chemical {
                baryon_chemical_circuit(p, t, sink)
            }
        }
        TermKind::IsospinChemical => {
            if (p.mu_i != 0.0 && p.nf >= 2) || opts.keep_zero_chemical {
                isospin_chemical_circuit(p, t, sink)
            }
        }
        TermKind::Kinetic => kinetic_circuit(p, t, opts.uses_ancilla(p), sink),
        TermKind::Electric => electric_circuit(p, t, sink)?,
    }
    Ok(())
}

fn empty_for(p: &ModelParams, opts: &TrotterOptions) -> Circuit {
    let anc = opts.order.contains(&TermKind::Kinetic) && opts.uses_ancilla(p);
    Circuit::with_ancillas(p.nqubits(), usize::from(anc))
}

/// One first-order Trotter step of duration `dt`.
pub fn trotter_step(p: &ModelParams, dt: f64, opts: &TrotterOptions) -> Result<Circuit> {
    p.validate()?;
    let mut c = empty_for(p, opts);
    for &k in &opts.order {
        term_circuit(p, k, dt, opts, &mut c)?;
    }
    Ok(if opts.cancel_adjacent { c.cancel_adjacent_cnots() } else { c })
}

/// `steps` repetitions of a step of duration `t / steps`.
pub fn trotter_circuit(p: &ModelParams, t: f64, steps: usize, opts: &TrotterOptions) -> Result<Circuit> {
    if steps == 0 {
        return Err(Error::Params("at least one Trotter step".into()));
    }
    let step = trotter_step(p, t / steps as f64, &TrotterOptions { cancel_adjacent: false, ..opts.clone() })?;
    let mut c = empty_for(p, opts);
    for _ in 0..steps {
        c.append(&step);
    }
    Ok(if opts.cancel_adjacent { c.cancel_adjacent_cnots() } else { c })
}

/// Generators whose exact exponentials, applied in order, make up one step on the model
/// register; each generator is a sum of commuting strings.
pub fn step_generators(p: &ModelParams, opts: &TrotterOptions) -> Result<Vec<Operator>> {
    p.validate()?;
    let nq = p.nqubits();
    let to_op = |terms: &[(Letters, f64)]| {
        let mut op = PauliOperator::zero(nq);
        for (l, c) in terms {
            op.add_term(l.clone(), crate::Complex::new(*c, 0.0));
        }
        op
    };
    let mut out = Vec::new();
    for &k in &opts.order {
        match k {
            TermKind::Mass => out.push(mass_term::<f64>(p)),
            TermKind::BaryonChemical if p.mu_b != 0.0 => out.push(baryon_chemical_term::<f64>(p)),
            TermKind::IsospinChemical if p.mu_i != 0.0 && p.nf >= 2 => out.push(isospin_chemical_term::<f64>(p)),
            TermKind::BaryonChemical | TermKind::IsospinChemical => {}
            TermKind::Kinetic => {
                for a in 0..(p.nsites() - 1) * p.nc * p.nf {
                    out.push(to_op(&hop_terms(p, a)));
                }
            }
            TermKind::Electric => {
                for g in electric_groups(p)? {
                    out.push(to_op(&g.terms));
                }
            }
        }
    }
    Ok(out)
}

/// Gate counts per term of one step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepResources {
    pub mass: ResourceCount,
    pub baryon_chemical: ResourceCount,
    pub isospin_chemical: ResourceCount,
    pub kinetic: ResourceCount,
    pub electric: ResourceCount,
}

impl StepResources {
    /// Mass, kinetic and electric terms; the chemical potentials are reported apart.
    pub fn total(&self) -> ResourceCount {
        self.mass + self.kinetic + self.electric
    }

    pub fn total_with_chemical(&self) -> ResourceCount {
        self.total() + self.baryon_chemical + self.isospin_chemical
    }
}

/// Tallies the constructed circuits without storing them.
pub fn tally_step(p: &ModelParams) -> Result<StepResources> {
    let opts = TrotterOptions { keep_zero_chemical: true, ..Default::default() };
    let count = |k: TermKind| -> Result<ResourceCount> {
        let mut r = ResourceCount::default();
        term_circuit(p, k, 1.0, &opts, &mut r)?;
        Ok(r)
    };
    Ok(StepResources {
        mass: count(TermKind::Mass)?,
        baryon_chemical: count(TermKind::BaryonChemical)?,
        isospin_chemical: count(TermKind::IsospinChemical)?,
        kinetic: count(TermKind::Kinetic)?,
        electric: count(TermKind::Electric)?,
    })
}

/// Closed-form per-term counts of one step.
pub fn resource_count_closed_form(nc: u64, nf: u64, l: u64) -> Result<StepResources> {
    if nc < 2 || nf < 1 || l < 1 {
        return Err(Error::Params(format!("need Nc ≥ 2, Nf ≥ 1, L ≥ 1, got ({nc}, {nf}, {l})")));
    }
    let k = 2 * l - 1;
    let single = ResourceCount { rz: 2 * nc * nf * l, ..Default::default() };
    let hops = k * nc * nf;
    let kin_cnot = if nc * nf >= 4 { 2 * nc * nf * (8 * l - 3) - 4 } else { 2 * hops * (nc * nf + 1) };
    let kinetic = ResourceCount { rz: 2 * hops, hadamard: 2 * hops, cnot: kin_cnot, ..Default::default() };
    let b = k * nf;
    // Halved and sixthed products are integral; compute with signed arithmetic.
    let (nci, bi) = (nc as i64, b as i64);
    let el_rz = bi * nci * (3 - 4 * nci + bi * (5 * nci - 4)) / 2;
    let el_h = bi * (nci - 1) * nci * (bi - 1) / 2;
    let el_cnot = if nc == 2 {
        bi * (9 * bi - 7)
    } else {
        bi * (nci - 1) * nci * (bi * (2 * nci + 17) - 2 * nci - 11) / 6
    };
    let electric = ResourceCount { rz: el_rz as u64, hadamard: el_h as u64, cnot: el_cnot as u64, ..Default::default() };
    Ok(StepResources { mass: single, baryon_chemical: single, isospin_chemical: single, kinetic, electric })
}

/// `U† op U` for a CNOT `U` from `control` to `target`.
pub fn conjugate_by_cnot(op: &Operator, control: usize, target: usize) -> Result<Operator> {
    let n = op.nqubits();
    if control >= n || target >= n || control == target {
        return Err(Error::Index(format!("cnot ({control}, {target}) on {n} qubits")));
    }
    let mut out = PauliOperator::zero(n);
    for (l, c) in op.terms() {
        let s = PauliString::new(0, l.clone()).conjugate_cnot(control, target);
        out.add_term(s.letters.clone(), c * crate::scalar::i_pow::<f64>(s.phase));
    }
    Ok(out.pruned())
}

const PAULI_LETTERS: [Letter; 4] = [Letter::I, Letter::X, Letter::Y, Letter::Z];

fn pauli_gate(l: Letter, q: usize) -> Option<Gate> {
    match l {
        Letter::I => None,
        Letter::X => Some(Gate::X(q)),
        Letter::Y => Some(Gate::Y(q)),
        Letter::Z => Some(Gate::Z(q)),
    }
}

/// The pair `(P'_c, P'_t, sign)` with `P' · CX · P = sign · CX` for `P = pc ⊗ pt`.
pub fn twirl_partner(pc: Letter, pt: Letter) -> (Letter, Letter, f64) {
    let s = PauliString::new(0, Letters::from_pairs(2, &[(0, pc), (1, pt)])).conjugate_cnot(0, 1);
    let sign = if s.phase == 0 { 1.0 } else { -1.0 };
    (s.letters.letter(0), s.letters.letter(1), sign)
}

/// Wraps every CNOT in a random Pauli pair and its partner; the unitary is unchanged.
pub fn pauli_twirl(c: &Circuit, seed: u64) -> Circuit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Circuit { gates: Vec::with_capacity(c.gates.len() * 3), ..c.clone() };
    for g in &c.gates {
        let Gate::Cnot { control, target } = *g else {
            out.gates.push(g.clone());
            continue;
        };
        let pc = PAULI_LETTERS[rng.gen_range(0..4)];
        let pt = PAULI_LETTERS[rng.gen_range(0..4)];
        let (qc, qt, sign) = twirl_partner(pc, pt);
        out.gates.extend(pauli_gate(pc, control));
        out.gates.extend(pauli_gate(pt, target));
        out.gates.push(g.clone());
        out.gates.extend(pauli_gate(qc, control));
        out.gates.extend(pauli_gate(qt, target));
        if sign < 0.0 {
            out.global_phase += std::f64::consts::PI;
        }
    }
    out
}

/// Free and dependent angles of the singlet ansatz.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingletAngles {
    pub theta: f64,
    pub theta0: f64,
    pub theta1: f64,
    pub theta00: f64,
    pub theta01: f64,
    pub theta10: f64,
    pub theta11: f64,
}

fn asin_checked(x: f64) -> Result<f64> {
    if !x.is_finite() || x.abs() > 1.0 + 1e-12 {
        return Err(Error::Params(format!("dependent angle needs asin({x})")));
    }
    Ok(x.clamp(-1.0, 1.0).asin())
}

impl SingletAngles {
    /// Solves the singlet constraints for the dependent angles.
    pub fn from_free(theta: f64, theta1: f64, theta11: f64) -> Result<Self> {
        let theta0 = -2.0 * asin_checked((theta / 2.0).tan() * (theta1 / 2.0).cos())?;
        let theta01 = -2.0 * asin_checked((theta11 / 2.0).cos() * (theta1 / 2.0).tan())?;
        let theta00 = -2.0 * asin_checked((theta0 / 2.0).tan() * (theta01 / 2.0).cos())?;
        Ok(SingletAngles { theta, theta0, theta1, theta00, theta01, theta10: theta01, theta11 })
    }
}

/// Antiquark wires red, green, blue of the single-flavor, single-site model.
pub const SINGLET_WIRES: [usize; 3] = [3, 4, 5];

/// Six-qubit preparation of a real color-singlet state with zero net color.
///
/// Rotations build the antiquark amplitudes on red, then green controlled on red, then blue
/// controlled on both; each antiquark is mirrored onto its quark partner and the quark
/// register flipped so that all-zero angles give the trivial vacuum.
pub fn vqe_singlet_prep(theta: f64, theta1: f64, theta11: f64) -> Result<(Circuit, SingletAngles)> {
    let ang = SingletAngles::from_free(theta, theta1, theta11)?;
    let [r, g, b] = SINGLET_WIRES;
    let ctl = |qubit, on_one| Control { qubit, on_one };
    let mut c = Circuit::new(6);
    c.gate(Gate::Ry { q: r, theta: ang.theta });
    c.gate(Gate::Cry { theta: ang.theta0, target: g, controls: vec![ctl(r, false)] });
    c.gate(Gate::Cry { theta: ang.theta1, target: g, controls: vec![ctl(r, true)] });
    for (rv, gv, th) in [(false, false, ang.theta00), (false, true, ang.theta01), (true, false, ang.theta10), (true, true, ang.theta11)] {
        c.gate(Gate::Cry { theta: th, target: b, controls: vec![ctl(r, rv), ctl(g, gv)] });
    }
    for q in 0..3 {
        c.gate(Gate::Cnot { control: q + 3, target: q });
    }
    for q in 0..3 {
        c.gate(Gate::X(q));
    }
    Ok((c, ang))
}

/// Seeded random source shared by circuit randomization.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gate_text_roundtrip() {
        let g = Gate::Cry { theta: 0.25, target: 2, controls: vec![Control { qubit: 0, on_one: false }, Control { qubit: 1, on_one: true }] };
        assert_eq!(g.to_string().parse::<Gate>().unwrap(), g);
    }

    #[test]
    fn partner_of_xi_is_xx() {
        assert_eq!(twirl_partner(Letter::X, Letter::I), (Letter::X, Letter::X, 1.0));
    }
}
