use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde_json::Value;

use revchain::composition::{GibbsComponent, ProductSpec};
use revchain::dominance::{default_gap_tol, noise_floor, DominanceOptions, DEFAULT_WITNESS_BUDGET};
use revchain::matrix::default_structure_tol;
use revchain::simulate::McEstimate;
use revchain::spectral::spectral_decompose_with_tol;
use revchain::{
    asym_var_autocov, asym_var_resolvent, asym_var_spectral, block_gap_eigs,
    component_improvement_verdict, efficiency_dominates, eigen_dominates, gibbs_component,
    is_antithetic, mc_asym_var, peskun_dominates, random_scan_gibbs, replace_block,
    resolvent_gap_spectrum, trace_certificate, trace_lower_bound, validate_structure, ChainError,
    Functional, Route, TargetDistribution, TransitionMatrix,
};

use crate::chainfile::{inline_or_file, parse_matrix, parse_vector, ChainFile};
use crate::error::CliError;
use crate::report::{num, num_matrix, num_vec, Doc};

/// Outcome of a successful command, before it is wrapped into a report.
pub struct Outcome {
    pub command: &'static str,
    pub inputs: Value,
    pub tolerances: Doc,
    pub result: Value,
}

fn path_value(p: &Path) -> Value {
    Value::String(p.display().to_string())
}

fn load_chain(path: &Path) -> Result<(ChainFile, TransitionMatrix), CliError> {
    let file = ChainFile::load(path)?;
    let p = file.matrix()?.clone();
    Ok((file, p))
}

fn read_functional(arg: &str, n: usize) -> Result<Functional, CliError> {
    let values = parse_vector(&inline_or_file(arg)?, "f")?;
    if values.len() != n {
        return Err(CliError::Validation(format!(
            "f has {} entries but the chain has {n} states",
            values.len()
        )));
    }
    Ok(Functional::new(values))
}

fn structure_doc(p: &TransitionMatrix, pi: &TargetDistribution, tol: f64) -> Result<Value, CliError> {
    let s = validate_structure(p, pi, tol)?;
    Ok(Doc::new()
        .set("reversible", s.reversible)
        .set("irreducible", s.irreducible)
        .set("period", s.period)
        .set("stationary", s.stationary_ok)
        .set("max_balance_violation", num(s.max_balance_violation))
        .build())
}

pub fn spectrum(path: &Path, tol: Option<f64>) -> Result<Outcome, CliError> {
    let (file, p) = load_chain(path)?;
    let tol = tol.unwrap_or_else(|| default_structure_tol(p.n()));
    let structure = structure_doc(&p, &file.pi, tol)?;
    let spec = spectral_decompose_with_tol(&p, &file.pi, tol)?;
    let trace = p.trace();
    let bound = trace_lower_bound(&file.pi);
    Ok(Outcome {
        command: "spectrum",
        inputs: Doc::new().set("chain", path_value(path)).build(),
        tolerances: Doc::new().set("structure", num(tol)),
        result: Doc::new()
            .set("n", p.n())
            .set("eigenvalues", num_vec(spec.eigenvalues()))
            .set("structure", structure)
            .set("pi_max", num(file.pi.max()))
            .set("trace", num(trace))
            .set("trace_lower_bound", num(bound))
            .set("trace_minimal", (trace - bound).abs() <= tol)
            .build(),
    })
}

pub fn certify_minimal(path: &Path, tol: Option<f64>) -> Result<Outcome, CliError> {
    let (file, p) = load_chain(path)?;
    let n = p.n();
    let tol = tol.unwrap_or_else(|| default_structure_tol(n));
    p.ensure_reversible(&file.pi, default_structure_tol(n))?;
    if !p.is_irreducible() {
        return Err(ChainError::NotIrreducible.into());
    }
    let cert = trace_certificate(&p, &file.pi, tol)?;
    let spec = spectral_decompose_with_tol(&p, &file.pi, default_structure_tol(n))?;
    let status = if cert.non_dominated {
        "CERTIFIED non-dominated: the trace attains its lower bound, so no other reversible chain can efficiency-dominate this one".to_string()
    } else {
        format!(
            "not certified: trace {} is above the bound {}, so the trace theorem does not apply",
            cert.trace, cert.lower_bound
        )
    };
    Ok(Outcome {
        command: "certify-minimal",
        inputs: Doc::new().set("chain", path_value(path)).build(),
        tolerances: Doc::new().set("trace", num(tol)),
        result: Doc::new()
            .set("trace", num(cert.trace))
            .set("lower_bound", num(cert.lower_bound))
            .set("pi_max", num(cert.pi_max))
            .set("minimal", cert.minimal)
            .set("non_dominated", cert.non_dominated)
            .set("eigenvalues", num_vec(spec.eigenvalues()))
            .set("antithetic", is_antithetic(&spec, 1e-12)?)
            .set("certificate", status)
            .build(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum RouteArg {
    Auto,
    Spectral,
    Resolvent,
    Autocov,
    All,
}

pub struct McArgs {
    pub steps: usize,
    pub reps: usize,
    pub seed: u64,
}

fn mc_doc(est: &McEstimate, exact: Option<f64>) -> Value {
    let mut d = Doc::new()
        .set("estimate", num(est.asym_var_estimate))
        .set("std_error", num(est.std_error))
        .set("mean_estimate", num(est.mean_estimate))
        .set("steps", est.steps)
        .set("replications", est.replications)
        .set("seed", est.seed);
    if let Some(v) = exact {
        d.put("exact", num(v));
        if est.std_error > 0.0 {
            d.put("z_score", num((est.asym_var_estimate - v) / est.std_error));
        }
    }
    d.build()
}

pub fn variance(
    path: &Path,
    f_arg: &str,
    route: RouteArg,
    tail_tol: f64,
    mc: Option<McArgs>,
    tol: Option<f64>,
) -> Result<Outcome, CliError> {
    let (file, p) = load_chain(path)?;
    let pi = &file.pi;
    let f = read_functional(f_arg, p.n())?;
    let tol = tol.unwrap_or_else(|| default_structure_tol(p.n()));
    p.ensure_reversible(pi, tol)?;
    if !p.is_irreducible() {
        return Err(ChainError::NotIrreducible.into());
    }
    let spec = spectral_decompose_with_tol(&p, pi, tol)?;
    let routes: Vec<Route> = match route {
        RouteArg::Auto | RouteArg::Spectral => vec![Route::Spectral],
        RouteArg::Resolvent => vec![Route::Resolvent],
        RouteArg::Autocov => vec![Route::Autocov],
        RouteArg::All => vec![Route::Spectral, Route::Resolvent, Route::Autocov],
    };
    let mut values = Doc::new();
    let mut refused = Doc::new();
    let mut any_refused = false;
    let mut spectral_value = None;
    for r in routes {
        let outcome = match r {
            Route::Spectral => asym_var_spectral(&spec, &f),
            Route::Resolvent => asym_var_resolvent(&p, pi, &f),
            Route::Autocov => asym_var_autocov(&spec, &f, tail_tol),
        };
        match outcome {
            Ok(v) => {
                if r == Route::Spectral {
                    spectral_value = Some(v.value);
                }
                values.put(r.name(), num(v.value));
            }
            Err(e @ ChainError::PeriodicChain { .. }) if route == RouteArg::All => {
                refused.put(r.name(), e.to_string());
                any_refused = true;
            }
            Err(e) => return Err(e.into()),
        }
    }
    let mut result = Doc::new()
        .set("f", num_vec(f.values()))
        .set("pi_mean", num(pi.mean(f.values())))
        .set("period", p.period())
        .set("variance", values);
    if any_refused {
        result.put("refused", refused);
    }
    if let Some(m) = mc {
        let exact = match spectral_value {
            Some(v) => v,
            None => asym_var_spectral(&spec, &f)?.value,
        };
        let est = mc_asym_var(&p, pi, &f, m.steps, m.reps, m.seed)?;
        result.put("monte_carlo", mc_doc(&est, Some(exact)));
    }
    Ok(Outcome {
        command: "variance",
        inputs: Doc::new()
            .set("chain", path_value(path))
            .set("route", format!("{route:?}").to_lowercase())
            .build(),
        tolerances: Doc::new()
            .set("structure", num(tol))
            .set("autocov_tail", num(tail_tol)),
        result: result.build(),
    })
}

pub fn simulate(path: &Path, f_arg: &str, m: McArgs) -> Result<Outcome, CliError> {
    let (file, p) = load_chain(path)?;
    let f = read_functional(f_arg, p.n())?;
    let est = mc_asym_var(&p, &file.pi, &f, m.steps, m.reps, m.seed)?;
    Ok(Outcome {
        command: "simulate",
        inputs: Doc::new().set("chain", path_value(path)).build(),
        tolerances: Doc::new(),
        result: Doc::new()
            .set("f", num_vec(f.values()))
            .set("pi_mean", num(file.pi.mean(f.values())))
            .set("monte_carlo", mc_doc(&est, None))
            .build(),
    })
}

fn shared_pi(a: &ChainFile, b: &ChainFile) -> Result<(), CliError> {
    let (x, y) = (a.pi.probs(), b.pi.probs());
    if x.len() != y.len() {
        return Err(CliError::Validation(format!(
            "the chains have {} and {} states",
            x.len(),
            y.len()
        )));
    }
    let tol = default_structure_tol(x.len());
    if let Some(i) = (0..x.len()).find(|&i| (x[i] - y[i]).abs() > tol) {
        return Err(CliError::Validation(format!(
            "the two files disagree on pi at state {i}: {} versus {}",
            x[i], y[i]
        )));
    }
    Ok(())
}

pub fn compare(
    first: &Path,
    second: &Path,
    budget: usize,
    seed: u64,
    tol: Option<f64>,
) -> Result<Outcome, CliError> {
    let (fa, p) = load_chain(first)?;
    let (fb, q) = load_chain(second)?;
    shared_pi(&fa, &fb)?;
    let pi = &fa.pi;
    let n = p.n();
    let structure_tol = default_structure_tol(n);
    let opts = DominanceOptions {
        tol,
        witness_budget: budget,
        seed,
    };
    let verdict = efficiency_dominates(&p, &q, pi, &opts)?;
    let gap_tol = verdict.tolerance_used;
    let sp = spectral_decompose_with_tol(&p, pi, structure_tol)?;
    let sq = spectral_decompose_with_tol(&q, pi, structure_tol)?;
    let resolvent_gap = resolvent_gap_spectrum(&p, &q, pi)?;
    let witness = match &verdict.witness {
        Some(w) => Doc::new()
            .set("f", num_vec(w.f.values()))
            .set("var_first", num(w.var_first))
            .set("var_second", num(w.var_second))
            .build(),
        None => Value::Null,
    };
    Ok(Outcome {
        command: "compare",
        inputs: Doc::new()
            .set("first", path_value(first))
            .set("second", path_value(second))
            .build(),
        tolerances: Doc::new()
            .set("gap", num(gap_tol))
            .set("noise_floor", num(noise_floor(n, &verdict.gap_eigenvalues)))
            .set("structure", num(structure_tol))
            .set("witness_budget", budget)
            .set("seed", seed),
        result: Doc::new()
            .set("verdict", verdict.relation.name())
            .set("gap_spectrum", num_vec(&verdict.gap_eigenvalues))
            .set("resolvent_gap_spectrum", num_vec(&resolvent_gap))
            .set(
                "peskun",
                Doc::new()
                    .set("first_over_second", peskun_dominates(&p, &q, structure_tol)?)
                    .set("second_over_first", peskun_dominates(&q, &p, structure_tol)?),
            )
            .set(
                "eigen",
                Doc::new()
                    .set("first_over_second", eigen_dominates(&sp, &sq, gap_tol)?)
                    .set("second_over_first", eigen_dominates(&sq, &sp, gap_tol)?),
            )
            .set(
                "trace",
                Doc::new()
                    .set("first", num(p.trace()))
                    .set("second", num(q.trace()))
                    .set("first_strictly_smaller", p.trace() < q.trace()),
            )
            .set("witness", witness)
            .build(),
    })
}

pub enum GibbsAction {
    Build {
        component: Option<usize>,
        out: Option<PathBuf>,
    },
    ReplaceBlock {
        component: usize,
        block: usize,
        matrix: String,
        out: Option<PathBuf>,
    },
    CheckImprovement {
        replacement: Option<(usize, usize, String)>,
    },
}

/// Converts a 1-based CLI index to 0-based, rejecting 0.
fn zero_based(index: usize, what: &str) -> Result<usize, CliError> {
    index
        .checked_sub(1)
        .ok_or_else(|| CliError::Validation(format!("{what} indices start at 1")))
}

/// 1-based `--component` to a 0-based index, checked against the product.
fn component_index(k: usize, prod: &ProductSpec) -> Result<usize, CliError> {
    let count = prod.components();
    if k == 0 || k > count {
        return Err(CliError::Validation(format!(
            "component {k} does not exist; the product has components 1 to {count}"
        )));
    }
    Ok(k - 1)
}

fn read_block(arg: &str) -> Result<DMatrix<f64>, CliError> {
    let rows = parse_matrix(&inline_or_file(arg)?, "matrix")?;
    let n = rows.len();
    if let Some(r) = rows.iter().find(|r| r.len() != n) {
        return Err(CliError::Validation(format!(
            "block matrix must be square: {n} rows but a row has {} entries",
            r.len()
        )));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn state_names(file: &ChainFile, states: &[usize]) -> Value {
    match &file.states {
        Some(labels) => Value::Array(states.iter().map(|&s| Value::String(labels[s].clone())).collect()),
        None => Value::Array(states.iter().map(|&s| Value::from(s)).collect()),
    }
}

fn component_doc(file: &ChainFile, comp: &GibbsComponent) -> Value {
    let blocks: Vec<Value> = comp
        .blocks()
        .iter()
        .enumerate()
        .map(|(b, blk)| {
            let rows: Vec<Vec<f64>> = blk.kernel.row_iter().map(|r| r.iter().copied().collect()).collect();
            Doc::new()
                .set("block", b + 1)
                .set("states", state_names(file, &blk.states))
                .set("conditional", num_vec(&blk.conditional))
                .set("kernel", num_matrix(&rows))
                .build()
        })
        .collect();
    Doc::new()
        .set("component", comp.component() + 1)
        .set("P", num_matrix(&comp.kernel().rows()))
        .set("blocks", Value::Array(blocks))
        .build()
}

fn write_chain(file: &ChainFile, p: &TransitionMatrix, out: &Option<PathBuf>) -> Result<(), CliError> {
    if let Some(path) = out {
        let doc = file.with_matrix(p.clone()).to_value();
        let text = serde_json::to_string_pretty(&doc).expect("serializable");
        fs::write(path, text + "\n")
            .map_err(|e| CliError::Validation(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

pub fn gibbs(path: &Path, action: GibbsAction, tol: Option<f64>) -> Result<Outcome, CliError> {
    let file = ChainFile::load(path)?;
    let prod = file.product()?.clone();
    let pi = &file.pi;
    let mut tolerances = Doc::new();
    let (command, result) = match action {
        GibbsAction::Build { component, out } => match component {
            Some(k) => {
                let comp = gibbs_component(pi, &prod, component_index(k, &prod)?)?;
                write_chain(&file, comp.kernel(), &out)?;
                ("gibbs build", component_doc(&file, &comp))
            }
            None => {
                let (p, comps) = random_scan_gibbs(pi, &prod)?;
                write_chain(&file, &p, &out)?;
                let structure_tol = default_structure_tol(p.n());
                tolerances.put("structure", num(structure_tol));
                let s = validate_structure(&p, pi, structure_tol)?;
                let result = Doc::new()
                    .set("P", num_matrix(&p.rows()))
                    .set("reversible", s.reversible)
                    .set("irreducible", s.irreducible)
                    .set(
                        "components",
                        Value::Array(comps.iter().map(|c| component_doc(&file, c)).collect()),
                    )
                    .build();
                ("gibbs build", result)
            }
        },
        GibbsAction::ReplaceBlock {
            component,
            block,
            matrix,
            out,
        } => {
            let comp = gibbs_component(pi, &prod, component_index(component, &prod)?)?;
            let new_block = read_block(&matrix)?;
            let block_tol = tol.unwrap_or_else(|| default_structure_tol(new_block.nrows()));
            tolerances.put("block", num(block_tol));
            let replaced = replace_block(&comp, zero_based(block, "block")?, &new_block, block_tol)
                .map_err(|e| block_error(e, component))?;
            write_chain(&file, replaced.kernel(), &out)?;
            ("gibbs replace-block", component_doc(&file, &replaced))
        }
        GibbsAction::CheckImprovement { replacement } => {
            let l = prod.components();
            let old: Vec<GibbsComponent> = (0..l)
                .map(|k| gibbs_component(pi, &prod, k))
                .collect::<Result<_, _>>()?;
            let mut new = old.clone();
            if let Some((k, b, matrix)) = replacement {
                let k0 = component_index(k, &prod)?;
                let new_block = read_block(&matrix)?;
                let block_tol = default_structure_tol(new_block.nrows());
                tolerances.put("block", num(block_tol));
                new[k0] = replace_block(&old[k0], zero_based(b, "block")?, &new_block, block_tol)
                    .map_err(|e| block_error(e, k))?;
            }
            let weights = vec![1.0 / l as f64; l];
            let kernels = |cs: &[GibbsComponent]| cs.iter().map(|c| c.kernel().clone()).collect::<Vec<_>>();
            let report = component_improvement_verdict(&kernels(&old), &kernels(&new), &weights, pi, tol)?;
            let mut block_gaps = Vec::new();
            for (a, b) in old.iter().zip(&new) {
                for (id, eigs) in block_gap_eigs(a, b)?.into_iter().enumerate() {
                    block_gaps.push(
                        Doc::new()
                            .set("component", a.component() + 1)
                            .set("block", id + 1)
                            .set("eigenvalues", num_vec(&eigs))
                            .build(),
                    );
                }
            }
            tolerances.put("gap", num(report.verdict.tolerance_used));
            let component_tols: Vec<f64> = report
                .component_gaps
                .iter()
                .map(|g| tol.unwrap_or_else(|| default_gap_tol(g)))
                .collect();
            tolerances.put("component_gap", num_vec(&component_tols));
            let result = Doc::new()
                .set("verdict", report.verdict.relation.name())
                .set("direct_verdict", report.direct_relation.name())
                .set("components_certify", report.components_certify)
                .set("consistent", report.consistent)
                .set("block_gap_eigenvalues", Value::Array(block_gaps))
                .set(
                    "component_gap_spectra",
                    Value::Array(report.component_gaps.iter().map(|g| num_vec(g)).collect()),
                )
                .set("mixture_gap_spectrum", num_vec(&report.verdict.gap_eigenvalues))
                .build();
            ("gibbs check-improvement", result)
        }
    };
    Ok(Outcome {
        command,
        inputs: Doc::new().set("target", path_value(path)).build(),
        tolerances,
        result,
    })
}

/// Rephrases block errors with 1-based component and block numbers.
fn block_error(e: ChainError, component: usize) -> CliError {
    match e {
        ChainError::NotReversibleForConditional {
            block,
            row,
            col,
            violation,
        } => CliError::Validation(format!(
            "component {component}, block {}: replacement is not reversible for the block's conditional distribution (detailed balance off by {violation} at block entries ({row}, {col}), 0-based)",
            block + 1
        )),
        ChainError::BadBlockIndex { index, count } => CliError::Validation(format!(
            "block {} does not exist; component {component} has {count} blocks",
            index + 1
        )),
        other => other.into(),
    }
}

pub const DEFAULT_BUDGET: usize = DEFAULT_WITNESS_BUDGET;
