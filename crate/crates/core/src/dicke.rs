//! Dicke-state preparation circuits.
//!
//! The unitary is a sequence of n-1 blocks. Block `t` (0-based) works on
//! `m = n - t` qubits and holds `mu_m` followed by `M^l_m` for
//! `l = m-1` down to `m - w + 1`, where `w = min(k, m-1)`:
//!
//! * `mu_m` on (m-1, m): CX(m-1,m), controlled rotation on m-1 by `theta^1_m`
//!   controlled from m, CX(m-1,m);
//! * `M^l_m` on (l-1, l, m): CX(l-1,m), doubly controlled rotation on l-1 by
//!   `theta^{m-l+1}_m` controlled from l and m, CX(l-1,m);
//!
//! with `theta^x_y = 2 acos(sqrt(x/y))`. The input is `|0..0 1..1>` with k
//! ones, prepared by X gates.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate, GateCounts};
use crate::error::{DickeError, Result};
use crate::synth::{ccry_ladder, decompose_cry, u0_sequence};

/// `2 acos(sqrt(x/y))`, the rotation that leaves amplitude `sqrt(x/y)` on |0>.
pub fn split_angle(x: usize, y: usize) -> f64 {
    2.0 * (x as f64 / y as f64).sqrt().acos()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DickeParams {
    pub n: usize,
    pub k: usize,
}

impl DickeParams {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if n < 2 {
            return Err(DickeError::InvalidParams(format!("n = {n}, need n >= 2")));
        }
        if k < 1 || k > n - 1 {
            return Err(DickeError::InvalidParams(format!("k = {k}, need 1 <= k <= {}", n - 1)));
        }
        Ok(DickeParams { n, k })
    }

    fn require_k2(&self) -> Result<()> {
        if self.k < 2 {
            return Err(DickeError::InvalidParams(format!(
                "k = {} has no M transformations; use the linear W builder",
                self.k
            )));
        }
        Ok(())
    }

    pub fn mask_len(&self) -> usize {
        (self.n - self.k).saturating_sub(1)
    }
}

/// One bit per block `t = 1 ..= n-k-1`. Bit `t-1` picks how the last `M` of
/// that block absorbs the CNOT it shares with the transformation before it:
///
/// * `false`: the default cancellation, `CX(b,c) CX(a,c) CX(b,a)` becomes
///   `CX(b,a) CX(a,c)`;
/// * `true`: keep `CX(b,c)` and drop `CX(a,c)`, which acts on a qubit `a`
///   still in |0>.
///
/// Here `a = n-t-k`, `b = a+1`, `c = n-t`. Both choices use the same number
/// of CNOTs and the same set of coupled pairs; only the per-pair counts move.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VariantMask(pub Vec<bool>);

impl VariantMask {
    pub fn zeros(p: DickeParams) -> Self {
        VariantMask(vec![false; p.mask_len()])
    }

    /// Parses a string of `0`/`1`; the empty string is the empty mask.
    pub fn parse(s: &str) -> Result<Self> {
        s.chars()
            .map(|ch| match ch {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(DickeError::InvalidParams(format!("mask {s:?} must contain only 0 and 1"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(VariantMask)
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn check(&self, p: DickeParams) -> Result<()> {
        if self.0.len() != p.mask_len() {
            return Err(DickeError::InvalidParams(format!(
                "mask has {} bits, ({}, {}) needs {}",
                self.0.len(),
                p.n,
                p.k,
                p.mask_len()
            )));
        }
        Ok(())
    }
}

impl std::fmt::Display for VariantMask {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Placement of the first two CNOTs that leave qubit n-k.
///
/// `Rewired` prepares qubit n with X omitted and replaces
/// `CX(n-k,n) CX(n-k,n-1)` by `CX(n-k,n-1) CX(n-1,n)`. The state is the same,
/// but the coupled pair (n-k, n) becomes (n-1, n).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Wiring {
    #[default]
    Standard,
    Rewired,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Transform {
    Mu { m: usize },
    M { l: usize, m: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BlockSpec {
    /// Block index, 0 for the first block.
    pub t: usize,
    pub m: usize,
    pub w: usize,
    pub members: Vec<Transform>,
}

/// Blocks in application order.
pub fn block_layout(p: DickeParams) -> Vec<BlockSpec> {
    (0..p.n - 1)
        .map(|t| {
            let m = p.n - t;
            let w = p.k.min(m - 1);
            let mut members = vec![Transform::Mu { m }];
            members.extend((m - w + 1..m).rev().map(|l| Transform::M { l, m }));
            BlockSpec { t, m, w, members }
        })
        .collect()
}

/// How an `M` is lowered.
#[derive(Clone, Copy, PartialEq)]
enum MForm {
    /// Outer CNOTs kept, 6 CNOT.
    Unmerged,
    /// Default cancellation with the previous transformation, 5 CNOT.
    Merged,
    /// Alternate cancellation, 5 CNOT.
    Alternate,
}

struct Emitter {
    c: Circuit,
}

impl Emitter {
    fn new(n: usize) -> Self {
        Emitter { c: Circuit::new(n).expect("n >= 2") }
    }

    fn push(&mut self, g: Gate) {
        self.c.push_valid(g);
    }

    fn extend(&mut self, gs: Vec<Gate>) {
        self.c.extend_valid(gs);
    }

    fn mu(&mut self, m: usize, cheap: bool) {
        let theta = split_angle(1, m);
        self.push(Gate::cx(m - 1, m));
        let inner = if cheap {
            u0_sequence(PI - theta, m, m - 1)
        } else {
            decompose_cry(theta, m, m - 1)
        };
        self.extend(inner.expect("distinct qubits"));
        self.push(Gate::cx(m - 1, m));
    }

    fn m_ladder(&mut self, l: usize, m: usize, form: MForm) {
        let ladder = ccry_ladder(split_angle(m - l + 1, m), l, m, l - 1).expect("distinct qubits");
        match form {
            MForm::Unmerged => {
                self.push(Gate::cx(l - 1, m));
                self.extend(ladder);
            }
            MForm::Merged => {
                // CX(l,m) CX(l-1,m) CX(l,l-1) == CX(l,l-1) CX(l-1,m)
                let prev = self.c.gates_mut().pop();
                debug_assert_eq!(prev, Some(Gate::cx(l, m)));
                self.push(ladder[0]);
                self.push(Gate::cx(l - 1, m));
                self.extend(ladder[1..].to_vec());
            }
            MForm::Alternate => {
                // CX(l-1,m) is dropped: qubit l-1 is still |0> here
                self.extend(ladder);
            }
        }
        self.push(Gate::cx(l - 1, m));
    }

    /// `M^{l}_{m}` when qubits l..m-1 are already known to be |1>: a single
    /// controlled rotation between l-1 and m.
    fn m_two_qubit(&mut self, l: usize, m: usize, theta: f64) {
        self.push(Gate::cx(l - 1, m));
        self.extend(u0_sequence(PI - theta, m, l - 1).expect("distinct qubits"));
        self.push(Gate::cx(l - 1, m));
    }

    fn finish(self) -> Circuit {
        self.c
    }
}

fn m_form(p: DickeParams, t: usize, l: usize, m: usize, mask: &VariantMask, merge: bool) -> MForm {
    if !merge {
        return MForm::Unmerged;
    }
    let last_of_block = l == m + 1 - p.k.min(m - 1);
    if last_of_block && t >= 1 && t <= mask.0.len() && mask.0[t - 1] {
        MForm::Alternate
    } else {
        MForm::Merged
    }
}

fn prepare_ones(e: &mut Emitter, from: usize, to: usize) {
    for q in from..=to {
        e.push(Gate::x(q));
    }
}

fn baseline_impl(p: DickeParams, mask: &VariantMask, merge: bool) -> Circuit {
    let mut e = Emitter::new(p.n);
    prepare_ones(&mut e, p.n - p.k + 1, p.n);
    for b in block_layout(p) {
        for tr in &b.members {
            match *tr {
                Transform::Mu { m } => e.mu(m, false),
                Transform::M { l, m } => e.m_ladder(l, m, m_form(p, b.t, l, m, mask, merge)),
            }
        }
    }
    e.finish()
}

/// Reference construction: every controlled rotation at full cost, 4 CNOT per
/// `mu` and 5 per `M`.
pub fn build_baseline(p: DickeParams) -> Circuit {
    baseline_impl(p, &VariantMask(vec![]), true)
}

/// [`build_baseline`] with the per-block cancellation choices of `mask`.
pub fn build_baseline_variant(p: DickeParams, mask: &VariantMask) -> Result<Circuit> {
    p.require_k2()?;
    mask.check(p)?;
    Ok(baseline_impl(p, mask, true))
}

/// Baseline with the outer CNOTs of every `M` left in place (6 CNOT each).
/// Used to cross-check the cancellation against the peephole pass.
pub fn build_baseline_unmerged(p: DickeParams) -> Circuit {
    baseline_impl(p, &VariantMask(vec![]), false)
}

fn optimized_impl(p: DickeParams, mask: &VariantMask, wiring: Wiring, merge: bool) -> Circuit {
    let (n, k) = (p.n, p.k);
    let mut e = Emitter::new(n);
    let last_x = if wiring == Wiring::Rewired { n - 1 } else { n };
    prepare_ones(&mut e, n - k + 1, last_x);

    for b in block_layout(p) {
        let (t, m) = (b.t, b.m);
        for tr in &b.members {
            match *tr {
                Transform::Mu { m } => {
                    // qubits m-1, m are both |1> until block k-1; mu is the identity there
                    if t + 1 >= k {
                        e.mu(m, true);
                    }
                }
                Transform::M { l, m: _ } if t + 2 <= k && l >= n - k + 2 => {}
                Transform::M { l, m: _ } if t == 0 && l == n - k + 1 => {
                    e.push(Gate::ry(n - k, split_angle(k, n)));
                    e.push(Gate::cx(n - k, n));
                }
                Transform::M { l, m: _ } if t + 2 <= k && l == n - k + 1 => {
                    e.m_two_qubit(l, m, split_angle(k - t, m));
                }
                Transform::M { l, m: _ } => e.m_ladder(l, m, m_form(p, t, l, m, mask, merge)),
            }
        }
    }
    let mut c = e.finish();
    if wiring == Wiring::Rewired {
        // block 0 ends with CX(n-k,n) and block 1 opens with CX(n-k,n-1)
        let gates = c.gates_mut();
        let i = gates.iter().position(|g| *g == Gate::cx(n - k, n)).expect("block 0 CNOT");
        assert_eq!(gates[i + 1], Gate::cx(n - k, n - 1), "block 1 opener");
        gates[i] = Gate::cx(n - k, n - 1);
        gates[i + 1] = Gate::cx(n - 1, n);
    }
    c
}

/// Reduced construction for `k >= 2`: cheap controlled rotations, identity
/// transformations of the first k-1 blocks removed, two-qubit forms where
/// controls are known to be |1>.
pub fn build_optimized(p: DickeParams, mask: &VariantMask) -> Result<Circuit> {
    build_optimized_wired(p, mask, Wiring::Standard)
}

pub fn build_optimized_wired(p: DickeParams, mask: &VariantMask, wiring: Wiring) -> Result<Circuit> {
    p.require_k2()?;
    mask.check(p)?;
    Ok(optimized_impl(p, mask, wiring, true))
}

/// [`build_optimized`] with 6-CNOT `M` transformations.
pub fn build_optimized_unmerged(p: DickeParams) -> Result<Circuit> {
    p.require_k2()?;
    Ok(optimized_impl(p, &VariantMask::zeros(p), Wiring::Standard, false))
}

/// Linear W-state circuit `|D^n_1>`: 2n-2 CNOT and 2n-2 Ry.
pub fn build_w_linear(n: usize) -> Result<Circuit> {
    if n < 2 {
        return Err(DickeError::InvalidParams(format!("n = {n}, need n >= 2")));
    }
    let mut e = Emitter::new(n);
    e.push(Gate::x(n));
    for m in (2..=n).rev() {
        // only |01> and |00> reach (m-1, m), so the leading CX of mu is idle
        e.extend(u0_sequence(PI - split_angle(1, m), m, m - 1).expect("distinct qubits"));
        e.push(Gate::cx(m - 1, m));
    }
    Ok(e.finish())
}

/// `|D^n_n>`, outside the block construction.
pub fn build_all_ones(n: usize) -> Result<Circuit> {
    let mut c = Circuit::new(n)?;
    for q in 1..=n {
        c.push(Gate::x(q))?;
    }
    Ok(c)
}

/// Cheapest circuit for `p`: the W circuit for k = 1, otherwise the reduced
/// construction with the default mask.
pub fn build_best(p: DickeParams) -> Circuit {
    if p.k == 1 {
        build_w_linear(p.n).expect("n >= 2")
    } else {
        optimized_impl(p, &VariantMask::zeros(p), Wiring::Standard, true)
    }
}

/// `|D^n_k>` as X on every qubit after the circuit for weight n-k.
pub fn build_via_complement(p: DickeParams) -> Result<Circuit> {
    let q = DickeParams::new(p.n, p.n - p.k)?;
    let mut c = build_best(q);
    for i in 1..=p.n {
        c.push(Gate::x(i))?;
    }
    Ok(c)
}

/// Closed-form counts. For `optimized` with k = 1 the W circuit counts are
/// returned.
pub fn predicted_counts(p: DickeParams, optimized: bool) -> GateCounts {
    let (n, k) = (p.n as i64, p.k as i64);
    let (cnot, ry) = if optimized && k == 1 {
        (2 * n - 2, 2 * n - 2)
    } else if optimized {
        (5 * n * k - 5 * k * k - 2 * n, 4 * n * k - 4 * k * k - 2 * n + 1)
    } else {
        let ms = n * k - k * (k + 1) / 2 - n + 1;
        (5 * ms + 4 * (n - 1), 4 * ms + 2 * (n - 1))
    };
    GateCounts { cnot: cnot as usize, ry: ry as usize, x: p.k }
}

/// All `2^(n-k-1)` masks in binary counting order, first bit most significant.
pub fn enumerate_variants(p: DickeParams) -> Result<Vec<VariantMask>> {
    p.require_k2()?;
    let len = p.mask_len();
    Ok((0..1u64 << len)
        .map(|code| VariantMask((0..len).map(|i| code >> (len - 1 - i) & 1 == 1).collect()))
        .collect())
}
