//! Gate-level circuit representation over the gate set {X, Ry, CX}.
//!
//! Qubits are numbered from 1 and qubit 1 is the most significant bit of a
//! basis-state index, so `|b1 b2 .. bn>` has index `sum b_i 2^(n-i)`.

use serde::{Deserialize, Serialize};

use crate::error::{DickeError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "g", rename_all = "lowercase")]
pub enum Gate {
    X { q: usize },
    Ry { q: usize, theta: f64 },
    Cx { c: usize, t: usize },
}

impl Gate {
    pub fn x(q: usize) -> Self {
        Gate::X { q }
    }
    pub fn ry(q: usize, theta: f64) -> Self {
        Gate::Ry { q, theta }
    }
    pub fn cx(c: usize, t: usize) -> Self {
        Gate::Cx { c, t }
    }

    pub fn is_cx(&self) -> bool {
        matches!(self, Gate::Cx { .. })
    }

    pub fn touches(&self, q: usize) -> bool {
        match *self {
            Gate::X { q: a } | Gate::Ry { q: a, .. } => a == q,
            Gate::Cx { c, t } => c == q || t == q,
        }
    }

    fn check(&self, n: usize) -> Result<()> {
        let in_range = |q: usize| {
            if q == 0 || q > n {
                Err(DickeError::QubitOutOfRange { qubit: q, n })
            } else {
                Ok(())
            }
        };
        match *self {
            Gate::X { q } => in_range(q),
            Gate::Ry { q, theta } => {
                in_range(q)?;
                if theta.is_finite() {
                    Ok(())
                } else {
                    Err(DickeError::InvalidGate(format!("non-finite angle on qubit {q}")))
                }
            }
            Gate::Cx { c, t } => {
                in_range(c)?;
                in_range(t)?;
                if c == t {
                    Err(DickeError::InvalidGate(format!("CX with control == target == {c}")))
                } else {
                    Ok(())
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateCounts {
    pub cnot: usize,
    pub ry: usize,
    pub x: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Circuit {
    n: usize,
    gates: Vec<Gate>,
}

#[derive(Deserialize)]
struct RawCircuit {
    n: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(DickeError::InvalidParams("a circuit needs at least one qubit".into()));
        }
        Ok(Circuit { n, gates: Vec::new() })
    }

    pub fn from_gates(n: usize, gates: Vec<Gate>) -> Result<Self> {
        let mut c = Circuit::new(n)?;
        for (i, g) in gates.iter().enumerate() {
            g.check(n).map_err(|e| DickeError::InvalidGate(format!("gate {i}: {e}")))?;
        }
        c.gates = gates;
        Ok(c)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, g: Gate) -> Result<()> {
        g.check(self.n)?;
        self.gates.push(g);
        Ok(())
    }

    /// Builders only emit indices they derived from `n`; a bad one is a bug.
    pub(crate) fn push_valid(&mut self, g: Gate) {
        debug_assert!(g.check(self.n).is_ok(), "builder emitted {g:?} for n={}", self.n);
        self.gates.push(g);
    }

    pub(crate) fn gates_mut(&mut self) -> &mut Vec<Gate> {
        &mut self.gates
    }

    pub(crate) fn extend_valid(&mut self, gs: impl IntoIterator<Item = Gate>) {
        for g in gs {
            self.push_valid(g);
        }
    }

    pub fn counts(&self) -> GateCounts {
        let mut k = GateCounts::default();
        for g in &self.gates {
            match g {
                Gate::X { .. } => k.x += 1,
                Gate::Ry { .. } => k.ry += 1,
                Gate::Cx { .. } => k.cnot += 1,
            }
        }
        k
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("circuit serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: RawCircuit = serde_json::from_str(s)?;
        Circuit::from_gates(raw.n, raw.gates)
    }

    /// OpenQASM 2.0 text. Wire `q[i]` is qubit `i + 1`.
    pub fn to_qasm(&self, measure: bool) -> String {
        let mut s = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
        s.push_str(&format!("qreg q[{}];\n", self.n));
        if measure {
            s.push_str(&format!("creg c[{}];\n", self.n));
        }
        for g in &self.gates {
            match *g {
                Gate::X { q } => s.push_str(&format!("x q[{}];\n", q - 1)),
                Gate::Ry { q, theta } => s.push_str(&format!("ry({theta:?}) q[{}];\n", q - 1)),
                Gate::Cx { c, t } => s.push_str(&format!("cx q[{}],q[{}];\n", c - 1, t - 1)),
            }
        }
        if measure {
            s.push_str("measure q -> c;\n");
        }
        s
    }
}

// ---------------------------------------------------------------------------
// peephole

/// Can `g` be moved across `CX(c, t)` without changing the unitary?
fn commutes_with_cx(g: &Gate, c: usize, t: usize) -> bool {
    match *g {
        Gate::X { q } => q == t || (q != c && q != t),
        Gate::Ry { q, .. } => q != c && q != t,
        Gate::Cx { c: c2, t: t2 } => {
            if c2 == c && t2 == t {
                return true;
            }
            let disjoint = c2 != c && c2 != t && t2 != c && t2 != t;
            let share_ctrl = c2 == c && t2 != t && t2 != c && c2 != t;
            let share_targ = t2 == t && c2 != c && c2 != t && t2 != c;
            disjoint || share_ctrl || share_targ
        }
    }
}

/// Removes one cancelling CX pair if any; returns true on change.
fn cancel_one_pair(gates: &mut Vec<Gate>) -> bool {
    for i in 0..gates.len() {
        let Gate::Cx { c, t } = gates[i] else { continue };
        for j in i + 1..gates.len() {
            if gates[j] == gates[i] {
                gates.remove(j);
                gates.remove(i);
                return true;
            }
            if !commutes_with_cx(&gates[j], c, t) {
                break;
            }
        }
    }
    false
}

/// GF(2) action of a CX sequence on a list of wires, as row bitmasks.
fn linear_map(seq: &[(usize, usize)], wires: &[usize]) -> Vec<u32> {
    let pos = |q: usize| wires.iter().position(|&w| w == q).expect("wire listed");
    let mut rows: Vec<u32> = (0..wires.len()).map(|i| 1u32 << i).collect();
    for &(c, t) in seq {
        let (ci, ti) = (pos(c), pos(t));
        rows[ti] ^= rows[ci];
    }
    rows
}

/// Shortest CX sequence over `wires` realizing `target`, up to `max_len`.
fn shortest_equivalent(target: &[u32], wires: &[usize], max_len: usize) -> Option<Vec<(usize, usize)>> {
    let mut pairs = Vec::new();
    for &c in wires {
        for &t in wires {
            if c != t {
                pairs.push((c, t));
            }
        }
    }
    for len in 0..=max_len {
        let total = pairs.len().pow(len as u32);
        for code in 0..total {
            let mut seq = Vec::with_capacity(len);
            let mut r = code;
            for _ in 0..len {
                seq.push(pairs[r % pairs.len()]);
                r /= pairs.len();
            }
            seq.reverse();
            if linear_map(&seq, wires) == target {
                return Some(seq);
            }
        }
    }
    None
}

/// Rewrites one window of three consecutive CX gates on at most three wires
/// into a shorter equivalent sequence; returns true on change.
fn shorten_one_triple(gates: &mut Vec<Gate>) -> bool {
    for i in 0..gates.len().saturating_sub(2) {
        let mut seq = Vec::with_capacity(3);
        for g in &gates[i..i + 3] {
            match *g {
                Gate::Cx { c, t } => seq.push((c, t)),
                _ => break,
            }
        }
        if seq.len() < 3 {
            continue;
        }
        let mut wires: Vec<usize> = seq.iter().flat_map(|&(c, t)| [c, t]).collect();
        wires.sort_unstable();
        wires.dedup();
        if wires.len() > 3 {
            continue;
        }
        let target = linear_map(&seq, &wires);
        if let Some(short) = shortest_equivalent(&target, &wires, 2) {
            let repl: Vec<Gate> = short.into_iter().map(|(c, t)| Gate::cx(c, t)).collect();
            gates.splice(i..i + 3, repl);
            return true;
        }
    }
    false
}

/// Local CNOT reduction: cancels identical CX pairs separated only by gates
/// that commute with them, and shortens 3-CX windows on three wires to the
/// first equivalent 2-CX sequence. Runs to a fixed point.
pub fn cancel_adjacent_cnots(circuit: &Circuit) -> Circuit {
    let mut gates = circuit.gates.clone();
    loop {
        if cancel_one_pair(&mut gates) {
            continue;
        }
        if shorten_one_triple(&mut gates) {
            continue;
        }
        break;
    }
    Circuit { n: circuit.n, gates }
}
