//! CNOT maps, coupling architectures and layout search.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::dicke::{block_layout, DickeParams, Transform};
use crate::error::{DickeError, Result};
use crate::par::{self, Exec};

/// Largest graph accepted by the isomorphism and subgraph checks.
pub const MAX_GRAPH_NODES: usize = 12;

fn pair(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// Directed CNOT usage over qubits `1..=n`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CnotMap {
    pub n: usize,
    /// (control, target)
    pub directed: BTreeSet<(usize, usize)>,
}

impl CnotMap {
    pub fn new(n: usize) -> Self {
        CnotMap { n, directed: BTreeSet::new() }
    }

    /// Unordered coupled pairs, smaller label first.
    pub fn undirected(&self) -> BTreeSet<(usize, usize)> {
        self.directed.iter().map(|&(a, b)| pair(a, b)).collect()
    }

    pub fn degree(&self, q: usize) -> usize {
        self.undirected().iter().filter(|&&(a, b)| a == q || b == q).count()
    }

    /// DOT digraph of the directed edges.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph cnot_map {\n");
        for q in 1..=self.n {
            let _ = writeln!(s, "  q{q};");
        }
        for &(a, b) in &self.directed {
            let _ = writeln!(s, "  q{a} -> q{b};");
        }
        s.push_str("}\n");
        s
    }
}

/// A CNOT map with the number of CNOTs on each unordered pair.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct WeightedCnotMap {
    pub map: CnotMap,
    pub weights: BTreeMap<(usize, usize), usize>,
}

impl WeightedCnotMap {
    pub fn total(&self) -> usize {
        self.weights.values().sum()
    }

    /// DOT graph of the unordered pairs labelled with their CNOT counts.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph cnot_weights {\n");
        for q in 1..=self.map.n {
            let _ = writeln!(s, "  q{q};");
        }
        for (&(a, b), w) in &self.weights {
            let _ = writeln!(s, "  q{a} -- q{b} [label=\"{w}\"];");
        }
        s.push_str("}\n");
        s
    }
}

pub fn extract_map(c: &Circuit) -> WeightedCnotMap {
    let mut m = WeightedCnotMap { map: CnotMap::new(c.n()), weights: BTreeMap::new() };
    for g in c.gates() {
        if let Gate::Cx { c, t } = *g {
            m.map.directed.insert((c, t));
            *m.weights.entry(pair(c, t)).or_insert(0) += 1;
        }
    }
    m
}

/// Closed-form CNOT map of the reduced circuit for `(n, k)`, `k >= 2`.
///
/// Neighbour pairs (m-1, m) for m <= n-k+1 carry `mu_m` in both directions.
/// Every `M^l_m` with l <= n-k+1 couples l-1 and m; the ladder form also uses
/// l -> l-1. The first block contributes only n-k -> n.
pub fn gnk_map(p: DickeParams) -> Result<CnotMap> {
    if p.k < 2 {
        return Err(DickeError::InvalidParams("the closed-form map needs k >= 2".into()));
    }
    let (n, k) = (p.n, p.k);
    let mut cm = CnotMap::new(n);
    for b in block_layout(p) {
        for tr in &b.members {
            match *tr {
                Transform::Mu { m } if b.t + 1 >= k => {
                    cm.directed.insert((m - 1, m));
                    cm.directed.insert((m, m - 1));
                }
                Transform::Mu { .. } => {}
                Transform::M { l, .. } if l > n - k + 1 => {}
                Transform::M { l, m } if b.t == 0 => {
                    cm.directed.insert((l - 1, m));
                }
                Transform::M { l, m } => {
                    cm.directed.insert((l - 1, m));
                    cm.directed.insert((m, l - 1));
                    if !(b.t + 2 <= k && l == n - k + 1) {
                        cm.directed.insert((l, l - 1));
                    }
                }
            }
        }
    }
    Ok(cm)
}

// ---------------------------------------------------------------------------
// architectures

#[derive(Clone, Debug, PartialEq)]
pub struct Architecture {
    pub name: String,
    pub qubits: usize,
    /// Undirected couplers keyed (low, high), value = CNOT error rate.
    pub edges: BTreeMap<(usize, usize), f64>,
}

#[derive(Serialize, Deserialize)]
struct RawEdge {
    a: usize,
    b: usize,
    error: f64,
}

#[derive(Serialize, Deserialize)]
struct RawArch {
    name: String,
    qubits: usize,
    edges: Vec<RawEdge>,
}

/// Error rate given to bundled couplers. A placeholder, not calibration data.
pub const NOMINAL_ERROR: f64 = 0.01;

const BUNDLED: &[(&str, usize, &[(usize, usize)])] = &[
    ("a4", 4, &[(0, 1), (0, 2), (1, 2), (1, 3)]),
    ("ibmqx2", 5, &[(0, 1), (0, 2), (1, 2), (2, 3), (2, 4), (3, 4)]),
    ("ibmqx2-fig6", 5, &[(0, 1), (0, 2), (1, 2), (1, 3), (1, 4), (3, 4)]),
    ("ibmq-t5", 5, &[(0, 1), (1, 2), (1, 3), (3, 4)]),
    ("linear5", 5, &[(0, 1), (1, 2), (2, 3), (3, 4)]),
];

impl Architecture {
    pub fn new(name: &str, qubits: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        if qubits == 0 || qubits > 64 {
            return Err(DickeError::InvalidArchitecture(format!("{qubits} qubits, need 1..=64")));
        }
        let mut map = BTreeMap::new();
        for &(a, b, e) in edges {
            if a == b || a >= qubits || b >= qubits {
                return Err(DickeError::InvalidArchitecture(format!("bad coupler {a}-{b} for {qubits} qubits")));
            }
            if !(0.0..=1.0).contains(&e) {
                return Err(DickeError::InvalidArchitecture(format!("error rate {e} on {a}-{b} outside [0,1]")));
            }
            if map.insert(pair(a, b), e).is_some() {
                return Err(DickeError::InvalidArchitecture(format!("coupler {a}-{b} listed twice")));
            }
        }
        Ok(Architecture { name: name.to_string(), qubits, edges: map })
    }

    pub fn bundled(name: &str) -> Option<Self> {
        BUNDLED.iter().find(|(n, _, _)| *n == name).map(|&(n, q, es)| {
            let edges: Vec<_> = es.iter().map(|&(a, b)| (a, b, NOMINAL_ERROR)).collect();
            Architecture::new(n, q, &edges).expect("bundled architecture is valid")
        })
    }

    pub fn bundled_names() -> Vec<&'static str> {
        BUNDLED.iter().map(|(n, _, _)| *n).collect()
    }

    pub fn rate(&self, a: usize, b: usize) -> Option<f64> {
        self.edges.get(&pair(a, b)).copied()
    }

    /// Replaces the rates of existing couplers.
    pub fn with_rates(&self, rates: &BTreeMap<(usize, usize), f64>) -> Result<Self> {
        let mut out = self.clone();
        for (&(a, b), &e) in rates {
            let slot = out
                .edges
                .get_mut(&pair(a, b))
                .ok_or_else(|| DickeError::InvalidArchitecture(format!("no coupler {a}-{b} in {}", self.name)))?;
            if !(0.0..=1.0).contains(&e) {
                return Err(DickeError::InvalidArchitecture(format!("error rate {e} on {a}-{b} outside [0,1]")));
            }
            *slot = e;
        }
        Ok(out)
    }

    /// Same device with physical qubit `i` renamed `perm[i]`.
    pub fn relabeled(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.qubits];
        if perm.len() != self.qubits || perm.iter().any(|&p| p >= self.qubits || std::mem::replace(&mut seen[p], true)) {
            return Err(DickeError::InvalidArchitecture("relabeling is not a permutation".into()));
        }
        let edges: Vec<_> = self.edges.iter().map(|(&(a, b), &e)| (perm[a], perm[b], e)).collect();
        Architecture::new(&self.name, self.qubits, &edges)
    }

    pub fn to_json(&self) -> String {
        let raw = RawArch {
            name: self.name.clone(),
            qubits: self.qubits,
            edges: self.edges.iter().map(|(&(a, b), &error)| RawEdge { a, b, error }).collect(),
        };
        serde_json::to_string_pretty(&raw).expect("architecture serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: RawArch = serde_json::from_str(s)?;
        let edges: Vec<_> = raw.edges.iter().map(|e| (e.a, e.b, e.error)).collect();
        Architecture::new(&raw.name, raw.qubits, &edges)
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph architecture {\n");
        for q in 0..self.qubits {
            let _ = writeln!(s, "  p{q};");
        }
        for (&(a, b), e) in &self.edges {
            let _ = writeln!(s, "  p{a} -- p{b} [label=\"{e}\"];");
        }
        s.push_str("}\n");
        s
    }

    fn adjacency(&self) -> Vec<u64> {
        let mut adj = vec![0u64; self.qubits];
        for &(a, b) in self.edges.keys() {
            adj[a] |= 1 << b;
            adj[b] |= 1 << a;
        }
        adj
    }
}

// ---------------------------------------------------------------------------
// assignments

/// Logical qubit `q` (from 1) sits on physical qubit `phys[q - 1]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment {
    pub phys: Vec<usize>,
}

impl Assignment {
    pub fn physical(&self, q: usize) -> usize {
        self.phys[q - 1]
    }

    /// Parses `1:0,2:1,...`; every logical qubit 1..=n must appear once.
    pub fn parse(s: &str, n: usize) -> Result<Self> {
        let mut phys = vec![usize::MAX; n];
        for item in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
            let (q, p) = item
                .split_once(':')
                .ok_or_else(|| DickeError::InvalidAssignment(format!("expected q:p, got {item:?}")))?;
            let q: usize = q.trim().parse().map_err(|_| DickeError::InvalidAssignment(format!("bad qubit in {item:?}")))?;
            let p: usize = p.trim().parse().map_err(|_| DickeError::InvalidAssignment(format!("bad qubit in {item:?}")))?;
            if q == 0 || q > n || phys[q - 1] != usize::MAX {
                return Err(DickeError::InvalidAssignment(format!("logical qubit {q} invalid or repeated")));
            }
            phys[q - 1] = p;
        }
        if let Some(q) = phys.iter().position(|&p| p == usize::MAX) {
            return Err(DickeError::InvalidAssignment(format!("logical qubit {} unassigned", q + 1)));
        }
        let a = Assignment { phys };
        if !a.is_injective() {
            return Err(DickeError::InvalidAssignment("two logical qubits share a physical qubit".into()));
        }
        Ok(a)
    }

    fn is_injective(&self) -> bool {
        let set: BTreeSet<_> = self.phys.iter().collect();
        set.len() == self.phys.len()
    }
}

impl std::fmt::Display for Assignment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.phys.iter().enumerate().map(|(i, p)| format!("{}:{p}", i + 1)).collect();
        f.write_str(&parts.join(","))
    }
}

impl Serialize for Assignment {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let m: BTreeMap<String, usize> = self.phys.iter().enumerate().map(|(i, &p)| ((i + 1).to_string(), p)).collect();
        m.serialize(s)
    }
}

/// Re-checks an assignment coupler by coupler.
pub fn check_assignment(cm: &CnotMap, arch: &Architecture, asg: &Assignment) -> Result<()> {
    if asg.phys.len() != cm.n {
        return Err(DickeError::InvalidAssignment(format!("{} entries for {} qubits", asg.phys.len(), cm.n)));
    }
    if let Some(&p) = asg.phys.iter().find(|&&p| p >= arch.qubits) {
        return Err(DickeError::InvalidAssignment(format!("physical qubit {p} not in {}", arch.name)));
    }
    if !asg.is_injective() {
        return Err(DickeError::InvalidAssignment("not injective".into()));
    }
    for (a, b) in cm.undirected() {
        let (pa, pb) = (asg.physical(a), asg.physical(b));
        if arch.rate(pa, pb).is_none() {
            return Err(DickeError::InvalidAssignment(format!("pair ({a},{b}) lands on {pa}-{pb}, not a coupler")));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// search

/// Undirected pattern graph on nodes 0..n.
struct Pattern {
    n: usize,
    adj: Vec<u64>,
}

impl Pattern {
    fn from_map(cm: &CnotMap) -> Self {
        let mut adj = vec![0u64; cm.n];
        for (a, b) in cm.undirected() {
            adj[a - 1] |= 1 << (b - 1);
            adj[b - 1] |= 1 << (a - 1);
        }
        Pattern { n: cm.n, adj }
    }

    fn degree(&self, v: usize) -> u32 {
        self.adj[v].count_ones()
    }

    fn edge_count(&self) -> u32 {
        self.adj.iter().map(|a| a.count_ones()).sum::<u32>() / 2
    }

    /// Placement order: each next node has the most already-placed neighbours,
    /// then the highest degree, then the lowest index.
    fn order(&self) -> Vec<usize> {
        let mut placed = 0u64;
        let mut order = Vec::with_capacity(self.n);
        for _ in 0..self.n {
            let v = (0..self.n)
                .filter(|&v| placed & (1 << v) == 0)
                .max_by_key(|&v| ((self.adj[v] & placed).count_ones(), self.degree(v), std::cmp::Reverse(v)))
                .expect("unplaced node");
            placed |= 1 << v;
            order.push(v);
        }
        order
    }
}

struct Search<'a> {
    pat: &'a Pattern,
    target: &'a [u64],
    order: Vec<usize>,
    limit: usize,
}

impl Search<'_> {
    fn candidates(&self, depth: usize, asg: &[usize], used: u64) -> Vec<usize> {
        let v = self.order[depth];
        let need = self.pat.degree(v);
        (0..self.target.len())
            .filter(|&t| used & (1 << t) == 0 && self.target[t].count_ones() >= need)
            .filter(|&t| {
                self.order[..depth]
                    .iter()
                    .all(|&u| self.pat.adj[v] & (1 << u) == 0 || self.target[asg[u]] & (1 << t) != 0)
            })
            .collect()
    }

    fn run(&self, depth: usize, asg: &mut Vec<usize>, used: u64, out: &mut Vec<Vec<usize>>) {
        if out.len() >= self.limit {
            return;
        }
        if depth == self.order.len() {
            out.push(asg.clone());
            return;
        }
        let v = self.order[depth];
        for t in self.candidates(depth, asg, used) {
            asg[v] = t;
            self.run(depth + 1, asg, used | (1 << t), out);
            if out.len() >= self.limit {
                return;
            }
        }
    }
}

/// Injective maps pattern -> target preserving every pattern edge, sorted.
fn monomorphisms(pat: &Pattern, target: &[u64], limit: usize, exec: Exec) -> Vec<Vec<usize>> {
    if pat.n > target.len() {
        return Vec::new();
    }
    if pat.n == 0 {
        return vec![Vec::new()];
    }
    let s = Search { pat, target, order: pat.order(), limit };
    let first = s.candidates(0, &vec![0; pat.n], 0);
    let branches = par::map_slice(&first, exec, |&t| {
        let mut asg = vec![0; pat.n];
        asg[s.order[0]] = t;
        let mut out = Vec::new();
        s.run(1, &mut asg, 1 << t, &mut out);
        out
    });
    let mut all: Vec<Vec<usize>> = branches.into_iter().flatten().collect();
    all.sort();
    all.truncate(limit);
    all
}

/// Every placement of the circuit qubits on `arch` that puts each coupled
/// pair on a coupler. Empty when none exists. Sorted lexicographically.
pub fn find_mappings(cm: &CnotMap, arch: &Architecture) -> Vec<Assignment> {
    find_mappings_with(cm, arch, Exec::Auto)
}

pub fn find_mappings_with(cm: &CnotMap, arch: &Architecture, exec: Exec) -> Vec<Assignment> {
    let pat = Pattern::from_map(cm);
    monomorphisms(&pat, &arch.adjacency(), usize::MAX, exec)
        .into_iter()
        .map(|phys| Assignment { phys })
        .collect()
}

fn guard(cm: &CnotMap) -> Result<()> {
    if cm.n > MAX_GRAPH_NODES {
        return Err(DickeError::TooManyQubits { n: cm.n, max: MAX_GRAPH_NODES });
    }
    Ok(())
}

/// Isomorphism of the undirected collapses.
pub fn is_isomorphic(a: &CnotMap, b: &CnotMap) -> Result<bool> {
    guard(a)?;
    guard(b)?;
    let (pa, pb) = (Pattern::from_map(a), Pattern::from_map(b));
    if pa.n != pb.n || pa.edge_count() != pb.edge_count() {
        return Ok(false);
    }
    let mut da: Vec<u32> = (0..pa.n).map(|v| pa.degree(v)).collect();
    let mut db: Vec<u32> = (0..pb.n).map(|v| pb.degree(v)).collect();
    da.sort_unstable();
    db.sort_unstable();
    if da != db {
        return Ok(false);
    }
    // an injective edge-preserving map between graphs of equal size is onto
    Ok(!monomorphisms(&pa, &pb.adj, 1, Exec::Sequential).is_empty())
}

/// Is every coupled pair of `a` also a coupled pair of `b`, with qubit labels
/// kept as they are?
pub fn is_subgraph(a: &CnotMap, b: &CnotMap) -> Result<bool> {
    guard(a)?;
    guard(b)?;
    Ok(a.n <= b.n && a.undirected().is_subset(&b.undirected()))
}

/// Does some relabeling of `a` make it a subgraph of `b`?
pub fn embeds_into(a: &CnotMap, b: &CnotMap) -> Result<bool> {
    guard(a)?;
    guard(b)?;
    let (pa, pb) = (Pattern::from_map(a), Pattern::from_map(b));
    Ok(!monomorphisms(&pa, &pb.adj, 1, Exec::Sequential).is_empty())
}
