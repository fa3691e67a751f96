//! Real statevector simulation, measurement sampling and CNOT fault injection.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::error::{DickeError, Result};
use crate::par::{self, Exec};

pub const MAX_QUBITS: usize = 20;

const NORM_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<f64>,
}

impl StateVector {
    pub fn basis(n: usize, index: usize) -> Result<Self> {
        if n == 0 {
            return Err(DickeError::InvalidParams("state needs at least one qubit".into()));
        }
        if n > MAX_QUBITS {
            return Err(DickeError::TooManyQubits { n, max: MAX_QUBITS });
        }
        let dim = 1usize << n;
        if index >= dim {
            return Err(DickeError::InvalidParams(format!("basis index {index} out of range for {n} qubits")));
        }
        let mut amps = vec![0.0; dim];
        amps[index] = 1.0;
        Ok(StateVector { n, amps })
    }

    /// Builds a state from raw amplitudes; they must have unit norm.
    pub fn from_amps(n: usize, amps: Vec<f64>) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(DickeError::TooManyQubits { n, max: MAX_QUBITS });
        }
        if amps.len() != 1 << n {
            return Err(DickeError::InvalidParams(format!("expected {} amplitudes, got {}", 1usize << n, amps.len())));
        }
        let norm: f64 = amps.iter().map(|a| a * a).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(DickeError::InvalidParams(format!("state norm {norm} is not 1")));
        }
        Ok(StateVector { n, amps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amps(&self) -> &[f64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a * a).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a * a).collect()
    }

    /// Indices with |amplitude| above `tol`, ascending.
    pub fn support(&self, tol: f64) -> Vec<usize> {
        (0..self.amps.len()).filter(|&i| self.amps[i].abs() > tol).collect()
    }

    pub fn apply(&mut self, g: &Gate) {
        apply_gate(&mut self.amps, self.n, g);
    }
}

#[inline]
fn mask(n: usize, q: usize) -> usize {
    1usize << (n - q)
}

/// Applies one gate in place to a 2^n amplitude buffer.
pub(crate) fn apply_gate(amps: &mut [f64], n: usize, g: &Gate) {
    match *g {
        Gate::X { q } => {
            let m = mask(n, q);
            for i in 0..amps.len() {
                if i & m == 0 {
                    amps.swap(i, i | m);
                }
            }
        }
        Gate::Ry { q, theta } => {
            let m = mask(n, q);
            let (s, c) = (theta / 2.0).sin_cos();
            for i in 0..amps.len() {
                if i & m == 0 {
                    let a0 = amps[i];
                    let a1 = amps[i | m];
                    amps[i] = c * a0 - s * a1;
                    amps[i | m] = s * a0 + c * a1;
                }
            }
        }
        Gate::Cx { c, t } => {
            let (mc, mt) = (mask(n, c), mask(n, t));
            for i in 0..amps.len() {
                if i & mc != 0 && i & mt == 0 {
                    amps.swap(i, i | mt);
                }
            }
        }
    }
}

fn apply_z(amps: &mut [f64], n: usize, q: usize) {
    let m = mask(n, q);
    for (i, a) in amps.iter_mut().enumerate() {
        if i & m != 0 {
            *a = -*a;
        }
    }
}

/// Runs `c` on the basis state `initial`.
pub fn simulate(c: &Circuit, initial: usize) -> Result<StateVector> {
    let mut sv = StateVector::basis(c.n(), initial)?;
    for g in c.gates() {
        sv.apply(g);
        debug_assert!((sv.norm_sqr() - 1.0).abs() < NORM_TOL, "norm drift after {g:?}");
    }
    Ok(sv)
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u64 = 1;
    for i in 0..k {
        r = r * (n - i) as u64 / (i + 1) as u64;
    }
    r
}

/// |D^n_k>: equal amplitude on every weight-k basis state.
pub fn dicke_reference(n: usize, k: usize) -> Result<StateVector> {
    if k > n {
        return Err(DickeError::InvalidParams(format!("weight {k} exceeds {n} qubits")));
    }
    let mut sv = StateVector::basis(n, 0)?;
    let a = 1.0 / (binomial(n, k) as f64).sqrt();
    for (i, amp) in sv.amps.iter_mut().enumerate() {
        *amp = if i.count_ones() as usize == k { a } else { 0.0 };
    }
    Ok(sv)
}

pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    if a.n != b.n {
        return Err(DickeError::InvalidParams(format!("fidelity of {}- and {}-qubit states", a.n, b.n)));
    }
    let ip: f64 = a.amps.iter().zip(&b.amps).map(|(x, y)| x * y).sum();
    Ok((ip * ip).min(1.0))
}

// ---------------------------------------------------------------------------
// seeding

/// Stream tags for [`split_seed`].
pub const MEASURE_STREAM: u64 = 0x6d65_6173_7572_6531;
pub const FAULT_STREAM: u64 = 0x6661_756c_7473_3031;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives the seed of item `index` in `stream` from a master seed:
/// `splitmix64(splitmix64(seed ^ stream) ^ index)`. Each shot or trial gets
/// its own seed, so results do not depend on how work is scheduled.
pub fn split_seed(seed: u64, stream: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed ^ stream) ^ index)
}

fn unit_uniform(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

// ---------------------------------------------------------------------------
// measurement

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeasurementHistogram {
    pub n: usize,
    pub shots: u64,
    pub counts: BTreeMap<usize, u64>,
}

#[derive(Serialize, Deserialize)]
struct RawHistogram {
    n: usize,
    shots: u64,
    counts: BTreeMap<String, u64>,
}

impl MeasurementHistogram {
    pub fn new(n: usize, counts: BTreeMap<usize, u64>) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(DickeError::InvalidHistogram(format!("bad qubit count {n}")));
        }
        if let Some(&bad) = counts.keys().find(|&&i| i >= 1 << n) {
            return Err(DickeError::InvalidHistogram(format!("index {bad} out of range for {n} qubits")));
        }
        let shots = counts.values().sum();
        Ok(MeasurementHistogram { n, shots, counts })
    }

    pub fn count(&self, index: usize) -> u64 {
        self.counts.get(&index).copied().unwrap_or(0)
    }

    pub fn bitstring(n: usize, index: usize) -> String {
        format!("{index:0n$b}")
    }

    pub fn to_json(&self) -> String {
        let raw = RawHistogram {
            n: self.n,
            shots: self.shots,
            counts: self
                .counts
                .iter()
                .filter(|(_, &c)| c > 0)
                .map(|(&i, &c)| (Self::bitstring(self.n, i), c))
                .collect(),
        };
        serde_json::to_string_pretty(&raw).expect("histogram serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: RawHistogram = serde_json::from_str(s)?;
        let mut counts = BTreeMap::new();
        for (k, v) in raw.counts {
            if k.len() != raw.n || !k.bytes().all(|b| b == b'0' || b == b'1') {
                return Err(DickeError::InvalidHistogram(format!("bad bitstring {k:?} for n={}", raw.n)));
            }
            let idx = usize::from_str_radix(&k, 2).expect("checked binary digits");
            *counts.entry(idx).or_insert(0) += v;
        }
        let h = Self::new(raw.n, counts)?;
        if h.shots != raw.shots {
            return Err(DickeError::InvalidHistogram(format!("counts sum to {} but shots is {}", h.shots, raw.shots)));
        }
        Ok(h)
    }
}

fn cumulative(sv: &StateVector) -> Vec<f64> {
    let mut acc = 0.0;
    sv.amps
        .iter()
        .map(|a| {
            acc += a * a;
            acc
        })
        .collect()
}

/// Inverse-CDF lookup; skips zero-probability outcomes.
fn draw(cdf: &[f64], u: f64) -> usize {
    let total = *cdf.last().expect("non-empty state");
    let x = u * total;
    let i = cdf.partition_point(|&c| c <= x);
    i.min(cdf.len() - 1)
}

/// Multinomial sample of `shots` measurements. Shot `j` uses the uniform
/// derived from `split_seed(seed, MEASURE_STREAM, j)`.
pub fn sample(sv: &StateVector, shots: u64, seed: u64) -> Result<MeasurementHistogram> {
    if shots == 0 {
        return Err(DickeError::InvalidParams("shots must be at least 1".into()));
    }
    let cdf = cumulative(sv);
    let mut counts = BTreeMap::new();
    for j in 0..shots {
        let u = unit_uniform(split_seed(seed, MEASURE_STREAM, j));
        *counts.entry(draw(&cdf, u)).or_insert(0) += 1;
    }
    MeasurementHistogram::new(sv.n, counts)
}

// ---------------------------------------------------------------------------
// faults

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FaultAction {
    /// A uniformly random non-identity Pauli pair from {I,X,Z,XZ}^2.
    #[default]
    DepolarizingPair,
    /// X on both wires.
    BitFlipBoth,
}

/// Fault probability for every CNOT of a specific circuit, in gate order.
#[derive(Clone, Debug, PartialEq)]
pub struct FaultModel {
    probs: Vec<f64>,
    action: FaultAction,
}

impl FaultModel {
    /// `cnot_probs[i]` belongs to the i-th CX of the circuit it is used with.
    pub fn new(cnot_probs: Vec<f64>, action: FaultAction) -> Result<Self> {
        if let Some(p) = cnot_probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(DickeError::InvalidParams(format!("fault probability {p} outside [0,1]")));
        }
        Ok(FaultModel { probs: cnot_probs, action })
    }

    /// Looks up each CX's probability from its (control, target) pair.
    pub fn from_pairs(c: &Circuit, action: FaultAction, mut prob: impl FnMut(usize, usize) -> Option<f64>) -> Result<Self> {
        let mut probs = Vec::new();
        for g in c.gates() {
            if let Gate::Cx { c: a, t: b } = *g {
                let p = prob(a, b).ok_or_else(|| DickeError::InvalidAssignment(format!("no fault probability for CX({a},{b})")))?;
                probs.push(p);
            }
        }
        Self::new(probs, action)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn action(&self) -> FaultAction {
        self.action
    }

    /// Mean number of faulted CNOTs per run.
    pub fn expected_faults(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Variance of the per-run fault count.
    pub fn fault_variance(&self) -> f64 {
        self.probs.iter().map(|p| p * (1.0 - p)).sum()
    }
}

#[derive(Clone, Debug)]
pub struct MonteCarloConfig {
    pub trials: u64,
    pub seed: u64,
    /// Dicke weight used to score the pooled histogram.
    pub weight: usize,
    pub exec: Exec,
}

#[derive(Clone, Debug)]
pub struct MonteCarloResult {
    pub trials: u64,
    pub mean_faulty_cnots: f64,
    /// Standard error of the mean from the observed spread.
    pub std_error: f64,
    pub faulty_trials: u64,
    /// One measurement per trial, pooled.
    pub histogram: MeasurementHistogram,
    pub em: f64,
}

/// Each trial faults every CNOT independently with its probability, applies
/// the fault action right after a faulted CNOT, and measures once. Trial `j`
/// draws faults from a ChaCha8 stream seeded by `split_seed(seed,
/// FAULT_STREAM, j)` and its measurement from the same uniform `sample` uses
/// for shot `j`, so all-zero probabilities reproduce `sample` exactly.
pub fn fault_monte_carlo(c: &Circuit, fm: &FaultModel, cfg: &MonteCarloConfig) -> Result<MonteCarloResult> {
    if cfg.trials == 0 {
        return Err(DickeError::InvalidParams("trials must be at least 1".into()));
    }
    let cnots = c.counts().cnot;
    if fm.probs.len() != cnots {
        return Err(DickeError::InvalidAssignment(format!(
            "fault model covers {} CNOTs, circuit has {cnots}",
            fm.probs.len()
        )));
    }
    if cfg.weight > c.n() {
        return Err(DickeError::InvalidParams(format!("weight {} exceeds {} qubits", cfg.weight, c.n())));
    }
    let clean = simulate(c, 0)?;
    let clean_cdf = cumulative(&clean);
    let n = c.n();

    let outcomes: Vec<(u32, usize)> = par::map_range(cfg.trials as usize, cfg.exec, |j| {
        let j = j as u64;
        let mut rng = ChaCha8Rng::seed_from_u64(split_seed(cfg.seed, FAULT_STREAM, j));
        let mut faults: Vec<(usize, u8)> = Vec::new();
        for (i, &p) in fm.probs.iter().enumerate() {
            if p > 0.0 && rng.gen::<f64>() < p {
                let kind = match fm.action {
                    FaultAction::DepolarizingPair => rng.gen_range(1u8..16),
                    FaultAction::BitFlipBoth => 0b0101,
                };
                faults.push((i, kind));
            }
        }
        let u = unit_uniform(split_seed(cfg.seed, MEASURE_STREAM, j));
        if faults.is_empty() {
            return (0, draw(&clean_cdf, u));
        }
        let mut amps = vec![0.0; 1 << n];
        amps[0] = 1.0;
        let mut cx_index = 0;
        let mut next = 0;
        for g in c.gates() {
            apply_gate(&mut amps, n, g);
            if let Gate::Cx { c: ctl, t } = *g {
                if next < faults.len() && faults[next].0 == cx_index {
                    apply_pauli_pair(&mut amps, n, ctl, t, faults[next].1);
                    next += 1;
                }
                cx_index += 1;
            }
        }
        let sv = StateVector { n, amps };
        (faults.len() as u32, draw(&cumulative(&sv), u))
    });

    let mut counts = BTreeMap::new();
    let (mut sum, mut sum_sq, mut faulty) = (0u64, 0u64, 0u64);
    for &(f, idx) in &outcomes {
        let f = f as u64;
        sum += f;
        sum_sq += f * f;
        faulty += u64::from(f > 0);
        *counts.entry(idx).or_insert(0) += 1;
    }
    let t = cfg.trials as f64;
    let mean = sum as f64 / t;
    let var = (sum_sq as f64 / t - mean * mean).max(0.0);
    let histogram = MeasurementHistogram::new(n, counts)?;
    let em = crate::error_model::em_measure(&histogram, n, cfg.weight)?;
    Ok(MonteCarloResult {
        trials: cfg.trials,
        mean_faulty_cnots: mean,
        std_error: (var / t).sqrt(),
        faulty_trials: faulty,
        histogram,
        em,
    })
}

/// `kind` packs the control Pauli in bits 0-1 and the target Pauli in bits
/// 2-3, each as 0=I, 1=X, 2=Z, 3=XZ.
fn apply_pauli_pair(amps: &mut [f64], n: usize, ctl: usize, targ: usize, kind: u8) {
    for (q, p) in [(ctl, kind & 3), (targ, (kind >> 2) & 3)] {
        if p & 2 != 0 {
            apply_z(amps, n, q);
        }
        if p & 1 != 0 {
            apply_gate(amps, n, &Gate::x(q));
        }
    }
}
