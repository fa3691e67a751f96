//! Output-distribution error (EM), expected CNOT error and variant selection.

use std::cmp::Ordering;
use std::str::FromStr;

use serde::Serialize;

use crate::dicke::{build_optimized_wired, enumerate_variants, DickeParams, VariantMask, Wiring};
use crate::error::{DickeError, Result};
use crate::par::{self, Exec};
use crate::sim::{binomial, FaultAction, FaultModel, MeasurementHistogram};
use crate::topology::{extract_map, find_mappings_with, Architecture, Assignment, WeightedCnotMap};
use crate::Circuit;

/// Half the L1 distance between the observed outcome frequencies and the
/// uniform distribution over weight-`w` outcomes. 0 is ideal, 1 is worst.
///
/// The sum is taken over integers scaled by `shots * C(n, w)` and divided
/// once, so no rounding accumulates across outcomes.
pub fn em_measure(h: &MeasurementHistogram, n: usize, w: usize) -> Result<f64> {
    if h.n != n {
        return Err(DickeError::InvalidHistogram(format!("histogram has {} qubits, expected {n}", h.n)));
    }
    if h.shots == 0 {
        return Err(DickeError::InvalidHistogram("no shots".into()));
    }
    if w > n {
        return Err(DickeError::InvalidParams(format!("weight {w} exceeds {n} qubits")));
    }
    let c = binomial(n, w) as u128;
    let s = h.shots as u128;
    let mut num: u128 = 0;
    let mut seen_good: u128 = 0;
    for (&idx, &cnt) in &h.counts {
        let cnt = cnt as u128;
        if idx.count_ones() as usize == w {
            seen_good += 1;
            num += (cnt * c).abs_diff(s);
        } else {
            num += cnt * c;
        }
    }
    // weight-w outcomes never observed each contribute |0 - 1/C| = s / (s C)
    num += (c - seen_good) * s;
    Ok(num as f64 / (2 * s * c) as f64)
}

// ---------------------------------------------------------------------------
// response functions

/// Monotone map from a coupler's error rate to a per-CNOT fault probability.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ResponseFunction {
    Identity,
    /// `a * e + b`
    Affine { a: f64, b: f64 },
    /// Piecewise linear through `(e, f)` points spanning e = 0 to e = 1.
    Tabulated { points: Vec<(f64, f64)> },
}

impl ResponseFunction {
    pub fn affine(a: f64, b: f64) -> Result<Self> {
        let f = ResponseFunction::Affine { a, b };
        f.validate()?;
        Ok(f)
    }

    pub fn tabulated(points: Vec<(f64, f64)>) -> Result<Self> {
        let f = ResponseFunction::Tabulated { points };
        f.validate()?;
        Ok(f)
    }

    /// Nondecreasing on [0, 1] with values in [0, 1].
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(DickeError::InvalidResponse(m));
        match self {
            ResponseFunction::Identity => Ok(()),
            ResponseFunction::Affine { a, b } => {
                if !(a.is_finite() && b.is_finite()) || *a < 0.0 || *b < 0.0 || a + b > 1.0 {
                    return bad(format!("affine {a}*e+{b} must have a >= 0, b >= 0, a + b <= 1"));
                }
                Ok(())
            }
            ResponseFunction::Tabulated { points } => {
                if points.len() < 2 {
                    return bad("a table needs at least two points".into());
                }
                if points[0].0 != 0.0 || points[points.len() - 1].0 != 1.0 {
                    return bad("table must start at e = 0 and end at e = 1".into());
                }
                for w in points.windows(2) {
                    if w[1].0 <= w[0].0 {
                        return bad(format!("breakpoints {} and {} are not increasing", w[0].0, w[1].0));
                    }
                    if w[1].1 < w[0].1 {
                        return bad(format!("values decrease between e = {} and e = {}", w[0].0, w[1].0));
                    }
                }
                if points.iter().any(|&(_, y)| !(0.0..=1.0).contains(&y)) {
                    return bad("table values must lie in [0, 1]".into());
                }
                Ok(())
            }
        }
    }

    pub fn eval(&self, e: f64) -> f64 {
        match self {
            ResponseFunction::Identity => e,
            ResponseFunction::Affine { a, b } => a * e + b,
            ResponseFunction::Tabulated { points } => {
                let i = points.partition_point(|&(x, _)| x <= e);
                if i == 0 {
                    return points[0].1;
                }
                if i == points.len() {
                    return points[i - 1].1;
                }
                let (x0, y0) = points[i - 1];
                let (x1, y1) = points[i];
                y0 + (y1 - y0) * (e - x0) / (x1 - x0)
            }
        }
    }
}

impl FromStr for ResponseFunction {
    type Err = DickeError;

    /// `identity`, `affine:A,B` or `table:E=F;E=F;...`.
    fn from_str(s: &str) -> Result<Self> {
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| DickeError::InvalidResponse(format!("bad number {t:?}")))
        };
        if s == "identity" {
            return Ok(ResponseFunction::Identity);
        }
        if let Some(rest) = s.strip_prefix("affine:") {
            let (a, b) = rest
                .split_once(',')
                .ok_or_else(|| DickeError::InvalidResponse("expected affine:A,B".into()))?;
            return ResponseFunction::affine(num(a)?, num(b)?);
        }
        if let Some(rest) = s.strip_prefix("table:") {
            let points = rest
                .split(';')
                .map(|pt| {
                    let (x, y) = pt
                        .split_once('=')
                        .ok_or_else(|| DickeError::InvalidResponse(format!("expected E=F, got {pt:?}")))?;
                    Ok((num(x)?, num(y)?))
                })
                .collect::<Result<Vec<_>>>()?;
            return ResponseFunction::tabulated(points);
        }
        Err(DickeError::InvalidResponse(format!("unknown response function {s:?}")))
    }
}

// ---------------------------------------------------------------------------
// expected error

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Contribution {
    /// Logical pair, smaller label first.
    pub pair: (usize, usize),
    pub physical: (usize, usize),
    pub weight: usize,
    pub rate: f64,
    pub term: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpectedError {
    pub value: f64,
    pub contributions: Vec<Contribution>,
}

/// Mean number of faulted CNOTs: the sum over coupled pairs of
/// `weight * f(rate of the coupler the pair lands on)`.
pub fn expected_cnot_error(
    wm: &WeightedCnotMap,
    asg: &Assignment,
    arch: &Architecture,
    f: &ResponseFunction,
) -> Result<ExpectedError> {
    f.validate()?;
    if asg.phys.len() < wm.map.n {
        return Err(DickeError::InvalidAssignment(format!("{} entries for {} qubits", asg.phys.len(), wm.map.n)));
    }
    let mut contributions = Vec::with_capacity(wm.weights.len());
    let mut value = 0.0;
    for (&(a, b), &weight) in &wm.weights {
        let physical = (asg.physical(a), asg.physical(b));
        let rate = arch.rate(physical.0, physical.1).ok_or_else(|| {
            DickeError::InvalidAssignment(format!("pair ({a},{b}) lands on {}-{}, not a coupler", physical.0, physical.1))
        })?;
        let term = weight as f64 * f.eval(rate);
        value += term;
        contributions.push(Contribution { pair: (a, b), physical, weight, rate, term });
    }
    Ok(ExpectedError { value, contributions })
}

/// Per-CNOT fault probabilities for running `c` under `asg` on `arch`.
pub fn fault_model_for(
    c: &Circuit,
    asg: &Assignment,
    arch: &Architecture,
    f: &ResponseFunction,
    action: FaultAction,
) -> Result<FaultModel> {
    f.validate()?;
    FaultModel::from_pairs(c, action, |a, b| arch.rate(asg.physical(a), asg.physical(b)).map(|e| f.eval(e)))
}

// ---------------------------------------------------------------------------
// selection

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Candidate {
    pub mask: VariantMask,
    pub wiring: Wiring,
    pub assignment: Assignment,
    pub expected_error: ExpectedError,
}

impl Candidate {
    fn key(&self) -> (&VariantMask, Wiring, &Assignment) {
        (&self.mask, self.wiring, &self.assignment)
    }
}

/// Errors closer than this (relative) are treated as ties.
const TIE_TOL: f64 = 1e-12;

fn ties(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIE_TOL * a.abs().max(b.abs()).max(1.0)
}

/// Every feasible (mask, wiring, assignment) for `p` on `arch`, best first.
/// Order: expected error, then mask, wiring (standard first) and assignment.
pub fn rank_candidates(p: DickeParams, arch: &Architecture, f: &ResponseFunction, exec: Exec) -> Result<Vec<Candidate>> {
    f.validate()?;
    let mut shapes = Vec::new();
    for mask in enumerate_variants(p)? {
        shapes.push((mask.clone(), Wiring::Standard));
        if p.n >= 3 {
            shapes.push((mask, Wiring::Rewired));
        }
    }
    let per_shape = par::map_slice(&shapes, exec, |(mask, wiring)| -> Result<Vec<Candidate>> {
        let c = build_optimized_wired(p, mask, *wiring)?;
        let wm = extract_map(&c);
        find_mappings_with(&wm.map, arch, Exec::Sequential)
            .into_iter()
            .map(|assignment| {
                let expected_error = expected_cnot_error(&wm, &assignment, arch, f)?;
                Ok(Candidate { mask: mask.clone(), wiring: *wiring, assignment, expected_error })
            })
            .collect()
    });
    let mut all = Vec::new();
    for r in per_shape {
        all.extend(r?);
    }
    all.sort_by(|a, b| {
        let (x, y) = (a.expected_error.value, b.expected_error.value);
        if ties(x, y) {
            a.key().cmp(&b.key())
        } else {
            x.partial_cmp(&y).unwrap_or(Ordering::Equal)
        }
    });
    Ok(all)
}

/// Lowest expected error over masks, wirings and assignments. Candidates
/// within a relative 1e-12 of the minimum tie and the least
/// (mask, wiring, assignment) wins.
pub fn select_best(p: DickeParams, arch: &Architecture, f: &ResponseFunction) -> Result<Candidate> {
    select_best_with(p, arch, f, Exec::Auto)
}

pub fn select_best_with(p: DickeParams, arch: &Architecture, f: &ResponseFunction, exec: Exec) -> Result<Candidate> {
    pick_best(rank_candidates(p, arch, f, exec)?)
        .ok_or_else(|| DickeError::Infeasible(format!("no valid mapping of ({}, {}) onto {}", p.n, p.k, arch.name)))
}

/// The selection rule of [`select_best`] applied to any candidate list. The
/// result does not depend on the order of `cands`.
pub fn pick_best(cands: Vec<Candidate>) -> Option<Candidate> {
    let min = cands
        .iter()
        .map(|c| c.expected_error.value)
        .fold(f64::INFINITY, f64::min);
    cands
        .into_iter()
        .filter(|c| ties(c.expected_error.value, min))
        .min_by(|a, b| a.key().cmp(&b.key()))
}
