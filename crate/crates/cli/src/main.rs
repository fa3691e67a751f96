use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use dicke::dicke::{
    build_baseline, build_baseline_variant, build_optimized_wired, build_w_linear, predicted_counts, DickeParams,
    VariantMask, Wiring,
};
use dicke::error_model::{
    em_measure, expected_cnot_error, fault_model_for, rank_candidates, ResponseFunction,
};
use dicke::par::{self, Exec};
use dicke::sim::{dicke_reference, fault_monte_carlo, fidelity, sample, simulate, FaultAction, MeasurementHistogram, MonteCarloConfig};
use dicke::sweep::count_table;
use dicke::topology::{extract_map, find_mappings, gnk_map, Architecture, Assignment};
use dicke::{Circuit, DickeError};

#[derive(Parser)]
#[command(name = "dicke", version, about = "Dicke-state preparation circuits: build, count, simulate, map")]
struct Cli {
    /// Worker threads for parallel sweeps (0 = rayon default).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Run every batch job on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct CircuitArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    /// Unreduced construction.
    #[arg(long)]
    baseline: bool,
    /// Per-block cancellation choices, e.g. 010.
    #[arg(long)]
    mask: Option<String>,
    /// Move the first shared CNOT onto the (n-1, n) coupler.
    #[arg(long, conflicts_with = "baseline")]
    rewired: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Qasm,
}

#[derive(Clone, Copy, ValueEnum)]
enum Export {
    /// Weighted coupling map of the built circuit.
    Circuit,
    /// Directed coupling graph G^(n,k).
    Gnk,
    /// The architecture given with --arch.
    Arch,
}

#[derive(Subcommand)]
enum Cmd {
    /// Emit a circuit as JSON or OpenQASM 2.0.
    Build {
        #[command(flatten)]
        c: CircuitArgs,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        /// Append measurements (QASM only).
        #[arg(long)]
        measure: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare built gate counts with the closed forms.
    Counts {
        #[command(flatten)]
        c: CircuitArgs,
    },
    /// CNOT / Ry counts for every (n, k).
    Table {
        #[arg(long, default_value_t = 2)]
        nmin: usize,
        #[arg(long, default_value_t = 8)]
        nmax: usize,
        #[arg(long)]
        csv: bool,
    },
    /// Fidelity of the output with the ideal state.
    Simulate {
        #[command(flatten)]
        c: CircuitArgs,
    },
    /// Ideal measurement histogram and its error measure.
    Sample {
        #[command(flatten)]
        c: CircuitArgs,
        #[arg(long, default_value_t = 8192)]
        shots: u64,
        #[arg(long, env = "DICKE_SEED", default_value_t = 0)]
        seed: u64,
    },
    /// Qubit assignments that realize the circuit on an architecture.
    Map {
        #[command(flatten)]
        c: CircuitArgs,
        /// Bundled name or JSON file.
        #[arg(long)]
        arch: String,
    },
    /// Rank every variant, wiring and assignment by expected CNOT error.
    Variants {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        arch: String,
        /// "0-1=0.02,1-2=0.03" or a JSON file of {"a","b","error"} entries.
        #[arg(long)]
        rates: Option<String>,
        /// identity | affine:A,B | table:E=F;E=F...
        #[arg(long, default_value = "identity")]
        response: ResponseArg,
        /// Print only the best candidate.
        #[arg(long)]
        best: bool,
    },
    /// Expected CNOT error of one placement, optionally checked by Monte Carlo.
    ExpectedError {
        #[command(flatten)]
        c: CircuitArgs,
        #[arg(long)]
        arch: String,
        #[arg(long)]
        rates: Option<String>,
        /// "1:0,2:1,..." logical:physical, defaults to the first feasible one.
        #[arg(long)]
        assignment: Option<String>,
        #[arg(long, default_value = "identity")]
        response: ResponseArg,
        /// Monte Carlo trials (0 = skip).
        #[arg(long, default_value_t = 0)]
        trials: u64,
        #[arg(long, env = "DICKE_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        bitflip: bool,
    },
    /// Error measure of a histogram file.
    Em {
        #[arg(long)]
        hist: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        w: usize,
    },
    /// Graphviz output.
    Export {
        #[arg(long, value_enum)]
        what: Export,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        baseline: bool,
        #[arg(long)]
        mask: Option<String>,
        #[arg(long)]
        rewired: bool,
        #[arg(long)]
        arch: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone)]
struct ResponseArg(ResponseFunction);

impl std::str::FromStr for ResponseArg {
    type Err = DickeError;
    fn from_str(s: &str) -> Result<Self, DickeError> {
        s.parse().map(ResponseArg)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        par::set_threads(cli.threads);
    }
    let exec = if cli.sequential { Exec::Sequential } else { Exec::Auto };
    match run(cli.cmd, exec) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<DickeError>() {
                Some(DickeError::Infeasible(_)) => ExitCode::from(3),
                Some(
                    DickeError::InvalidParams(_)
                    | DickeError::QubitOutOfRange { .. }
                    | DickeError::TooManyQubits { .. }
                    | DickeError::InvalidAssignment(_)
                    | DickeError::InvalidResponse(_),
                ) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn build(a: &CircuitArgs) -> dicke::Result<Circuit> {
    let p = DickeParams::new(a.n, a.k)?;
    let mask = a.mask.as_deref().map(VariantMask::parse).transpose()?;
    let wiring = if a.rewired { Wiring::Rewired } else { Wiring::Standard };
    match (a.baseline, p.k, mask) {
        (true, _, None) => Ok(build_baseline(p)),
        (true, _, Some(m)) => build_baseline_variant(p, &m),
        (false, 1, None) if !a.rewired => build_w_linear(p.n),
        (false, _, m) => build_optimized_wired(p, &m.unwrap_or_else(|| VariantMask::zeros(p)), wiring),
    }
}

fn write_out(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_arch(spec: &str, rates: Option<&str>) -> anyhow::Result<Architecture> {
    let arch = match Architecture::bundled(spec) {
        Some(a) => a,
        None => {
            let text = fs::read_to_string(spec).with_context(|| {
                format!("{spec:?} is neither a bundled architecture ({}) nor a readable file", Architecture::bundled_names().join(", "))
            })?;
            Architecture::from_json(&text)?
        }
    };
    match rates {
        None => Ok(arch),
        Some(r) => Ok(arch.with_rates(&parse_rates(r)?)?),
    }
}

fn parse_rates(s: &str) -> anyhow::Result<BTreeMap<(usize, usize), f64>> {
    if Path::new(s).is_file() {
        let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(s)?).context("rates file")?;
        let bad = || anyhow!("rates file must be a list of {{\"a\", \"b\", \"error\"}} objects");
        return v
            .as_array()
            .ok_or_else(bad)?
            .iter()
            .map(|e| {
                let idx = |key| e[key].as_u64().map(|x| x as usize).ok_or_else(bad);
                let (a, b) = (idx("a")?, idx("b")?);
                Ok(((a.min(b), a.max(b)), e["error"].as_f64().ok_or_else(bad)?))
            })
            .collect();
    }
    s.split(',')
        .map(|item| {
            let (pair, e) = item.split_once('=').ok_or_else(|| anyhow!("expected A-B=RATE, got {item:?}"))?;
            let (a, b) = pair.split_once('-').ok_or_else(|| anyhow!("expected A-B=RATE, got {item:?}"))?;
            let (a, b): (usize, usize) = (a.trim().parse()?, b.trim().parse()?);
            Ok(((a.min(b), a.max(b)), e.trim().parse()?))
        })
        .collect()
}

fn run(cmd: Cmd, exec: Exec) -> anyhow::Result<ExitCode> {
    match cmd {
        Cmd::Build { c, format, measure, out } => {
            let circ = build(&c)?;
            let text = match format {
                Format::Json => circ.to_json() + "\n",
                Format::Qasm => circ.to_qasm(measure),
            };
            write_out(out.as_deref(), &text)?;
        }
        Cmd::Counts { c } => {
            let circ = build(&c)?;
            let p = DickeParams::new(c.n, c.k)?;
            let got = circ.counts();
            let want = predicted_counts(p, !c.baseline);
            let ok = got.cnot == want.cnot && got.ry == want.ry;
            println!(
                "built {} CNOT, {} Ry, {} X; predicted {} CNOT, {} Ry: {}",
                got.cnot,
                got.ry,
                got.x,
                want.cnot,
                want.ry,
                if ok { "OK" } else { "MISMATCH" }
            );
            if !ok {
                return Ok(ExitCode::from(1));
            }
        }
        Cmd::Table { nmin, nmax, csv } => {
            if nmin < 2 || nmax < nmin {
                bail!(DickeError::InvalidParams(format!("need 2 <= nmin <= nmax, got {nmin}..{nmax}")));
            }
            let rows = count_table(nmin, nmax);
            if csv {
                println!("n,k,baseline_cnot,baseline_ry,optimized_cnot,optimized_ry");
                for r in &rows {
                    println!(
                        "{},{},{},{},{},{}",
                        r.n, r.k, r.baseline.cnot, r.baseline.ry, r.optimized.cnot, r.optimized.ry
                    );
                }
            } else {
                println!("{:>3} {:>3} {:>9} {:>7} {:>9} {:>7}", "n", "k", "base CX", "base Ry", "opt CX", "opt Ry");
                for r in &rows {
                    println!(
                        "{:>3} {:>3} {:>9} {:>7} {:>9} {:>7}",
                        r.n, r.k, r.baseline.cnot, r.baseline.ry, r.optimized.cnot, r.optimized.ry
                    );
                }
            }
        }
        Cmd::Simulate { c } => {
            let circ = build(&c)?;
            let sv = simulate(&circ, 0)?;
            let f = fidelity(&sv, &dicke_reference(c.n, c.k)?)?;
            println!("fidelity {f:.15}");
            println!("support {}", sv.support(1e-12).len());
        }
        Cmd::Sample { c, shots, seed } => {
            let circ = build(&c)?;
            let h = sample(&simulate(&circ, 0)?, shots, seed)?;
            let em = em_measure(&h, c.n, c.k)?;
            let hist: serde_json::Value = serde_json::from_str(&h.to_json())?;
            println!("{}", serde_json::to_string_pretty(&json!({ "seed": seed, "em": em, "histogram": hist }))?);
        }
        Cmd::Map { c, arch } => {
            let circ = build(&c)?;
            let arch = load_arch(&arch, None)?;
            let wm = extract_map(&circ);
            let found = find_mappings(&wm.map, &arch);
            if found.is_empty() {
                return Err(DickeError::Infeasible(format!("no assignment of the circuit onto {}", arch.name)).into());
            }
            for a in &found {
                println!("{a}");
            }
        }
        Cmd::Variants { n, k, arch, rates, response, best } => {
            let p = DickeParams::new(n, k)?;
            let arch = load_arch(&arch, rates.as_deref())?;
            let ranked = rank_candidates(p, &arch, &response.0, exec)?;
            let shown = if best { &ranked[..1] } else { &ranked[..] };
            for c in shown {
                let wiring = match c.wiring {
                    Wiring::Standard => "standard",
                    Wiring::Rewired => "rewired",
                };
                println!("{:.6e}  mask={}  {}  {}", c.expected_error.value, c.mask, wiring, c.assignment);
            }
        }
        Cmd::ExpectedError { c, arch, rates, assignment, response, trials, seed, bitflip } => {
            let circ = build(&c)?;
            let arch = load_arch(&arch, rates.as_deref())?;
            let wm = extract_map(&circ);
            let asg = match assignment {
                Some(s) => Assignment::parse(&s, c.n)?,
                None => find_mappings(&wm.map, &arch)
                    .into_iter()
                    .next()
                    .ok_or_else(|| DickeError::Infeasible(format!("no assignment onto {}", arch.name)))?,
            };
            let ee = expected_cnot_error(&wm, &asg, &arch, &response.0)?;
            let mut report = json!({
                "n": c.n,
                "k": c.k,
                "architecture": arch.name,
                "assignment": asg,
                "response": response.0,
                "expected_error": ee.value,
                "contributions": ee.contributions,
            });
            if trials > 0 {
                let action = if bitflip { FaultAction::BitFlipBoth } else { FaultAction::DepolarizingPair };
                let fm = fault_model_for(&circ, &asg, &arch, &response.0, action)?;
                let cfg = MonteCarloConfig { trials, seed, weight: c.k, exec };
                let r = fault_monte_carlo(&circ, &fm, &cfg)?;
                let sigma = (fm.fault_variance() / trials as f64).sqrt();
                report["monte_carlo"] = json!({
                    "trials": r.trials,
                    "seed": seed,
                    "mean_faulty_cnots": r.mean_faulty_cnots,
                    "std_error": r.std_error,
                    "z": if sigma > 0.0 { (r.mean_faulty_cnots - ee.value) / sigma } else { 0.0 },
                    "faulty_trials": r.faulty_trials,
                    "em": r.em,
                });
            }
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        Cmd::Em { hist, n, w } => {
            let text = fs::read_to_string(&hist).with_context(|| format!("reading {}", hist.display()))?;
            let h = MeasurementHistogram::from_json(&text)?;
            if h.n != n {
                bail!(DickeError::InvalidParams(format!("histogram has {} qubits, --n is {n}", h.n)));
            }
            println!("{}", em_measure(&h, n, w)?);
        }
        Cmd::Export { what, n, k, baseline, mask, rewired, arch, out } => {
            let need = |what: &str| DickeError::InvalidParams(format!("{what} required for this export"));
            let nk = || n.zip(k).ok_or_else(|| need("--n and --k"));
            let dot = match what {
                Export::Circuit => {
                    let (n, k) = nk()?;
                    extract_map(&build(&CircuitArgs { n, k, baseline, mask, rewired })?).to_dot()
                }
                Export::Gnk => {
                    let (n, k) = nk()?;
                    gnk_map(DickeParams::new(n, k)?)?.to_dot()
                }
                Export::Arch => load_arch(arch.as_deref().ok_or_else(|| need("--arch"))?, None)?.to_dot(),
            };
            write_out(out.as_deref(), &dot)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}
