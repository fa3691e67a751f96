//! Batch runs over parameter grids.

use serde::Serialize;

use crate::circuit::GateCounts;
use crate::dicke::{
    build_baseline, build_baseline_variant, build_optimized, build_w_linear, enumerate_variants, DickeParams,
    VariantMask,
};
use crate::par::{self, Exec};
use crate::sim::{dicke_reference, fidelity, simulate};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TableRow {
    pub n: usize,
    pub k: usize,
    pub baseline: GateCounts,
    pub optimized: GateCounts,
}

/// Built counts for `n_min <= n <= n_max`, `2 <= k <= n-1`.
pub fn count_table(n_min: usize, n_max: usize) -> Vec<TableRow> {
    let mut rows = Vec::new();
    for n in n_min.max(3)..=n_max {
        for k in 2..n {
            let p = DickeParams { n, k };
            rows.push(TableRow {
                n,
                k,
                baseline: build_baseline(p).counts(),
                optimized: build_optimized(p, &VariantMask::zeros(p)).expect("k >= 2").counts(),
            });
        }
    }
    rows
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Builder {
    Baseline,
    Optimized,
    WLinear,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExactnessRecord {
    pub n: usize,
    pub k: usize,
    pub builder: Builder,
    pub mask: Option<VariantMask>,
    pub fidelity: f64,
}

fn jobs(n_max: usize) -> Vec<(DickeParams, Builder, Option<VariantMask>)> {
    let mut out = Vec::new();
    for n in 2..=n_max {
        out.push((DickeParams { n, k: 1 }, Builder::Baseline, None));
        out.push((DickeParams { n, k: 1 }, Builder::WLinear, None));
        for k in 2..n {
            let p = DickeParams { n, k };
            for mask in enumerate_variants(p).expect("k >= 2") {
                out.push((p, Builder::Baseline, Some(mask.clone())));
                out.push((p, Builder::Optimized, Some(mask)));
            }
        }
    }
    out
}

/// Fidelity with `|D^n_k>` of every builder and mask for `2 <= n <= n_max`.
pub fn verify_exactness(n_max: usize, exec: Exec) -> Vec<ExactnessRecord> {
    let jobs = jobs(n_max);
    par::map_slice(&jobs, exec, |(p, builder, mask)| {
        let c = match (builder, mask) {
            (Builder::Baseline, None) => build_baseline(*p),
            (Builder::Baseline, Some(m)) => build_baseline_variant(*p, m).expect("valid mask"),
            (Builder::Optimized, Some(m)) => build_optimized(*p, m).expect("valid mask"),
            (Builder::WLinear, _) => build_w_linear(p.n).expect("n >= 2"),
            (Builder::Optimized, None) => unreachable!("optimized jobs carry a mask"),
        };
        let out = simulate(&c, 0).expect("n within simulator limit");
        let reference = dicke_reference(p.n, p.k).expect("k <= n");
        ExactnessRecord {
            n: p.n,
            k: p.k,
            builder: *builder,
            mask: mask.clone(),
            fidelity: fidelity(&out, &reference).expect("same size"),
        }
    })
}
