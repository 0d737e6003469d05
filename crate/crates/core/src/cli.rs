//! Command-line front end. Every command prints one JSON report on standard
//! output and exits with 0 (positive answer), 1 (negative answer), or 2
//! (usage, format, or hypothesis errors).

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::assemblage::{
    self, build_functional, classify_line, column_labels, evaluate_functional, evaluate_functional_exact,
    inflexible_oracle, inflexible_structural, label_text, lhs_bound, lhs_membership, pure_entries, row_labels,
    validate_assemblage_with_tol, Assemblage, Inflexibility, LhsOptions, LhsResult, PureEntry,
};
use crate::entangle::{self, Realization, TripartiteState, JordanBlock, SELF_TEST_EPS};
use crate::error::{Error, Result};
use crate::exact::{format_rational, int, to_f64};
use crate::io;
use crate::orthograph::{build_graph_with_cap, check_clique, constraint_cliques, Clique, CliqueSet};
use crate::polytope::{
    self, build_constraints_with_cap, enumerate_deterministic_with_cap, enumerate_vertices_with_cap, is_vertex,
    local_membership, separate_with, validate_box, BoxVector, Membership, RowKind, DEFAULT_DIMENSION_CAP,
    DEFAULT_ENUMERATION_CAP, FLOAT_TOL,
};
use crate::scenario::SequentialScenario;
use crate::thetabody::{theta_membership, theta_optimize, ThetaOptions, ThetaStatus};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

/// Above this trusted dimension the steering commands warn about cost.
const DESK_DIM_C: usize = 8;

#[derive(Debug, Parser)]
#[command(name = "nscert", version, about = "Certify no-signaling boxes and steering assemblages")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct ScenarioArgs {
    /// Scenario JSON file; overrides the numeric flags.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Sequential runs per party.
    #[arg(long, default_value_t = 1)]
    pub runs: usize,
    #[arg(long, default_value_t = 2)]
    pub inputs: usize,
    #[arg(long, default_value_t = 2)]
    pub outputs: usize,
}

impl ScenarioArgs {
    fn load(&self) -> Result<SequentialScenario> {
        match &self.scenario {
            Some(p) => io::scenario_from_json(&io::read(p)?),
            None => SequentialScenario::new(self.runs, self.inputs, self.outputs),
        }
    }
}

#[derive(Debug, Args, Clone)]
pub struct ThetaArgs {
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 50_000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub infeasibility_threshold: f64,
    /// JSON list of additional cliques (lists of event indices).
    #[arg(long)]
    pub extra_cliques: Option<PathBuf>,
}

impl ThetaArgs {
    fn options(&self) -> ThetaOptions {
        ThetaOptions {
            tol: self.tol,
            max_iter: self.max_iter,
            infeasibility_threshold: self.infeasibility_threshold,
            ..ThetaOptions::default()
        }
    }

    fn tolerances(&self) -> Value {
        let o = self.options();
        json!({
            "tol": o.tol,
            "max_iter": o.max_iter,
            "infeasibility_threshold": o.infeasibility_threshold,
            "window": o.window,
            "stall_ratio": o.stall_ratio,
        })
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Describe a scenario.
    Scenario(ScenarioArgs),
    /// Count the constraint rows of the time-ordered no-signaling polytope.
    Constraints {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, default_value_t = DEFAULT_DIMENSION_CAP)]
        cap: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a box against the polytope constraints.
    ValidateBox {
        #[arg(long = "box")]
        box_path: PathBuf,
    },
    /// Tight-row rank test for extremality.
    VertexCheck {
        #[arg(long = "box")]
        box_path: PathBuf,
    },
    /// Enumerate the vertices of the polytope.
    EnumVertices {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
        cap: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Enumerate the local deterministic boxes.
    EnumDeterministic {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, default_value_t = DEFAULT_DIMENSION_CAP)]
        cap: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide membership in the local polytope with an exact LP.
    LocalCheck {
        #[arg(long = "box")]
        box_path: PathBuf,
        /// Functional to test first, as `{"entries":[...]}`.
        #[arg(long)]
        functional: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_DIMENSION_CAP)]
        cap: usize,
    },
    /// Orthogonality graph of the scenario.
    Graph {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, default_value_t = DEFAULT_DIMENSION_CAP)]
        cap: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Theta-body membership of a box.
    ThetaCheck {
        #[arg(long = "box")]
        box_path: PathBuf,
        #[command(flatten)]
        theta: ThetaArgs,
    },
    /// Maximize a linear functional over the theta body (CHSH by default).
    ThetaOpt {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Functional as `{"entries":[...]}`.
        #[arg(long)]
        functional: Option<PathBuf>,
        #[command(flatten)]
        theta: ThetaArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check positivity, no-signaling, and normalization of an assemblage.
    AsmValidate {
        #[arg(long)]
        assemblage: PathBuf,
        #[arg(long, default_value_t = assemblage::VALIDATION_TOL)]
        tol: f64,
    },
    /// Assemblage of a state and measurements (the GHZ example by default).
    AsmRealize {
        /// `{"state":...,"pvms_a":...,"pvms_b":...}`.
        #[arg(long)]
        realization: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Line types of a rank-one assemblage.
    AsmClassify {
        #[arg(long)]
        assemblage: PathBuf,
    },
    /// Structural and exhaustive inflexibility checks.
    AsmInflexible {
        #[arg(long)]
        assemblage: PathBuf,
    },
    /// Steering functional of a reference assemblage and its LHS bound.
    AsmFunctional {
        #[arg(long)]
        assemblage: PathBuf,
        /// Evaluate this functional instead of building one.
        #[arg(long)]
        functional: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search for a local-hidden-state decomposition.
    AsmLhs {
        #[arg(long)]
        assemblage: PathBuf,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 50_000)]
        max_iter: usize,
        #[arg(long, default_value_t = 1e-4)]
        infeasibility_threshold: f64,
    },
    /// Genuine tripartite entanglement of a pure state.
    StateGenuine {
        #[arg(long)]
        state: PathBuf,
    },
    /// Conditioning basis on the first party.
    StateBasis {
        #[arg(long)]
        state: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Measurements producing an inflexible assemblage from a state.
    StateBuild {
        #[arg(long)]
        state: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Jordan decomposition of two projections `{"p":...,"q":...}`.
    Jordan {
        #[arg(long)]
        projections: PathBuf,
    },
    /// Compare a realization with the reference one (GHZ by default).
    SelfTest {
        #[arg(long)]
        realization: PathBuf,
        #[arg(long)]
        reference: Option<PathBuf>,
        #[arg(long, default_value_t = SELF_TEST_EPS)]
        tol: f64,
    },
    /// Reproduce the GHZ steering example end to end.
    GhzDemo,
}

/// Result of a command before it is printed.
pub struct Outcome {
    pub report: Value,
    pub positive: bool,
    /// File contents for `--out`, when the command produces an artifact.
    pub artifact: Option<String>,
}

impl Outcome {
    fn new(report: Value, positive: bool) -> Self {
        Outcome {
            report,
            positive,
            artifact: None,
        }
    }

    fn with_artifact(mut self, artifact: String) -> Self {
        self.artifact = Some(artifact);
        self
    }
}

/// Parses `argv` and runs the command, printing to standard streams.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let out = output_path(&cli.command);
    match execute(&cli.command) {
        Ok(outcome) => {
            if let (Some(path), Some(text)) = (out, outcome.artifact.as_ref()) {
                if let Err(e) = io::write(path, text) {
                    eprintln!("error: {e}");
                    return EXIT_ERROR;
                }
            }
            print!("{}", io::pretty(&outcome.report));
            if outcome.positive {
                EXIT_OK
            } else {
                EXIT_NEGATIVE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

fn output_path(cmd: &Command) -> Option<&Path> {
    match cmd {
        Command::Constraints { out, .. }
        | Command::EnumVertices { out, .. }
        | Command::EnumDeterministic { out, .. }
        | Command::Graph { out, .. }
        | Command::ThetaOpt { out, .. }
        | Command::AsmRealize { out, .. }
        | Command::AsmFunctional { out, .. }
        | Command::StateBuild { out, .. } => out.as_deref(),
        _ => None,
    }
}

fn mode_of(p: &BoxVector) -> &'static str {
    if p.is_rational() {
        "rational"
    } else {
        "float"
    }
}

fn asm_mode(s: &Assemblage) -> &'static str {
    if s.is_exact() {
        "rational"
    } else {
        "float"
    }
}

fn warn_dim_c(d: usize) {
    if d > DESK_DIM_C {
        log::warn!("trusted dimension {d} exceeds {DESK_DIM_C}; expect slow solves");
    }
}

fn load_box(path: &Path) -> Result<BoxVector> {
    io::box_from_json(&io::read(path)?)
}

fn load_assemblage(path: &Path) -> Result<Assemblage> {
    let s = io::assemblage_from_json(&io::read(path)?)?;
    warn_dim_c(s.dim_c());
    Ok(s)
}

fn load_state(path: &Path) -> Result<TripartiteState> {
    io::state_from_json(&io::read(path)?)
}

fn boxes_to_json(boxes: &[BoxVector]) -> String {
    io::pretty(&Value::Array(boxes.iter().map(io::box_to_value).collect()))
}

fn cliques_for(g: &crate::orthograph::OrthogonalityGraph, theta: &ThetaArgs) -> Result<CliqueSet> {
    let cs = build_constraints_with_cap(&g.scenario, DEFAULT_DIMENSION_CAP)?;
    let mut cliques = constraint_cliques(&cs, g)?;
    if let Some(path) = &theta.extra_cliques {
        let extra: Vec<Vec<usize>> =
            serde_json::from_str(&io::read(path)?).map_err(|e| Error::schema("extra_cliques", e.to_string()))?;
        for vertices in extra {
            if let Some(&v) = vertices.iter().find(|&&v| v >= g.vertex_count()) {
                return Err(Error::LabelOutOfRange(format!("clique vertex {v}")));
            }
            check_clique(g, &vertices)?;
            cliques.cliques.push(Clique {
                kind: RowKind::Tons,
                vertices,
            });
        }
    }
    Ok(cliques)
}

fn entry_json(e: &PureEntry) -> Value {
    match &e.state {
        None => json!({ "weight": 0.0 }),
        Some(v) => json!({
            "weight": e.weight,
            "state": v.iter().map(|z| json!([z.re, z.im])).collect::<Vec<_>>(),
        }),
    }
}

fn inflexibility_json(s: &Assemblage) -> Result<(bool, bool, Value)> {
    let structural = inflexible_structural(s)?;
    let oracle = inflexible_oracle(s)?;
    let (unique, kernel) = match &oracle {
        Inflexibility::Unique => (true, json!([])),
        Inflexibility::Flexible(k) => (false, json!(k)),
    };
    Ok((structural, unique, kernel))
}

/// Runs a parsed command.
pub fn execute(cmd: &Command) -> Result<Outcome> {
    match cmd {
        Command::Scenario(args) => {
            let s = args.load()?;
            Ok(Outcome::new(
                json!({
                    "mode": "rational",
                    "tolerances": {},
                    "scenario": s,
                    "n_seq": s.n_seq(),
                    "contexts": s.contexts(),
                }),
                true,
            ))
        }
        Command::Constraints { scenario, cap, .. } => {
            let s = scenario.load()?;
            let cs = build_constraints_with_cap(&s, *cap)?;
            let rows: Vec<Value> = cs
                .rows
                .iter()
                .map(|r| json!({ "kind": r.kind.name(), "coeffs": r.coeffs, "rhs": r.rhs }))
                .collect();
            let report = json!({
                "mode": "rational",
                "tolerances": {},
                "scenario": s,
                "n_seq": cs.n_seq(),
                "nonneg": cs.count(RowKind::NonNeg),
                "norm": cs.count(RowKind::Norm),
                "tons": cs.count(RowKind::Tons),
                "affine_dimension": cs.affine_dimension(),
            });
            Ok(Outcome::new(report, true).with_artifact(io::pretty(&json!({ "scenario": s, "rows": rows }))))
        }
        Command::ValidateBox { box_path } => {
            let p = load_box(box_path)?;
            let cs = build_constraints_with_cap(p.scenario(), DEFAULT_DIMENSION_CAP)?;
            let report = validate_box(&cs, &p)?;
            let violations: Vec<Value> = report
                .violations
                .iter()
                .map(|v| json!({ "row": v.row, "kind": v.kind.name(), "residual": v.residual }))
                .collect();
            Ok(Outcome::new(
                json!({
                    "mode": mode_of(&p),
                    "tolerances": { "float": FLOAT_TOL },
                    "valid": report.is_valid(),
                    "violations": violations,
                }),
                report.is_valid(),
            ))
        }
        Command::VertexCheck { box_path } => {
            let p = load_box(box_path)?;
            let cs = build_constraints_with_cap(p.scenario(), DEFAULT_DIMENSION_CAP)?;
            let r = is_vertex(&cs, &p)?;
            Ok(Outcome::new(
                json!({
                    "mode": mode_of(&p),
                    "tolerances": { "float": FLOAT_TOL },
                    "is_vertex": r.is_vertex,
                    "rank": r.rank,
                    "n_seq": r.n_seq,
                    "tight_rows": r.tight_row_count,
                    "min_eigenvalue": r.min_eigenvalue,
                }),
                r.is_vertex,
            ))
        }
        Command::EnumVertices { scenario, cap, .. } => {
            let s = scenario.load()?;
            let cs = build_constraints_with_cap(&s, DEFAULT_DIMENSION_CAP)?;
            let vs = enumerate_vertices_with_cap(&cs, *cap)?;
            let nonlocal = vs.iter().filter(|v| v.nonlocal).count();
            let boxes: Vec<BoxVector> = vs.iter().map(|v| v.vertex.clone()).collect();
            let report = json!({
                "mode": "rational",
                "tolerances": {},
                "count": vs.len(),
                "local": vs.len() - nonlocal,
                "nonlocal": nonlocal,
                "vertices": vs.iter().map(|v| json!({
                    "nonlocal": v.nonlocal,
                    "entries": io::box_to_value(&v.vertex)["entries"].clone(),
                })).collect::<Vec<_>>(),
            });
            Ok(Outcome::new(report, true).with_artifact(boxes_to_json(&boxes)))
        }
        Command::EnumDeterministic { scenario, cap, .. } => {
            let s = scenario.load()?;
            let boxes = enumerate_deterministic_with_cap(&s, *cap)?;
            let report = json!({ "mode": "rational", "tolerances": {}, "count": boxes.len() });
            Ok(Outcome::new(report, true).with_artifact(boxes_to_json(&boxes)))
        }
        Command::LocalCheck { box_path, functional, cap } => {
            let p = load_box(box_path)?;
            let ldbs = enumerate_deterministic_with_cap(p.scenario(), *cap)?;
            let mut membership = None;
            if let Some(path) = functional {
                let f = io::box_functional_from_json(&io::read(path)?)?;
                membership = separate_with(&f, &p, &ldbs)?;
            }
            let membership = match membership {
                Some(m) => m,
                None => local_membership(&p, &ldbs)?,
            };
            Ok(match membership {
                Membership::InHull(w) => Outcome::new(
                    json!({ "mode": "rational", "tolerances": {}, "local": true, "weights": io::rationals_to_value(&w) }),
                    true,
                ),
                Membership::Separated {
                    functional,
                    classical_bound,
                    value,
                } => Outcome::new(
                    json!({
                        "mode": "rational",
                        "tolerances": {},
                        "local": false,
                        "functional": io::rationals_to_value(&functional),
                        "classical_bound": format_rational(&classical_bound),
                        "value": format_rational(&value),
                    }),
                    false,
                ),
            })
        }
        Command::Graph { scenario, cap, .. } => {
            let s = scenario.load()?;
            let g = build_graph_with_cap(&s, *cap)?;
            let gj = g.to_json();
            let report = json!({
                "mode": "rational",
                "tolerances": {},
                "n": gj.n,
                "edge_count": gj.edges.len(),
            });
            Ok(Outcome::new(report, true).with_artifact(io::pretty(&gj)))
        }
        Command::ThetaCheck { box_path, theta } => {
            let p = load_box(box_path)?;
            let g = build_graph_with_cap(p.scenario(), DEFAULT_DIMENSION_CAP)?;
            let cliques = cliques_for(&g, theta)?;
            let cert = theta_membership(&g, &cliques, &p, &theta.options())?;
            let report = json!({
                "mode": "float",
                "tolerances": theta.tolerances(),
                "status": cert.status.name(),
                "residual": cert.residual,
                "iterations": cert.iterations,
                "violated_clique": cert.violated_clique,
                "pi": cert.pi.as_ref().map(io::real_matrix_to_value),
            });
            Ok(Outcome::new(report, cert.status == ThetaStatus::Feasible))
        }
        Command::ThetaOpt {
            scenario,
            functional,
            theta,
            ..
        } => {
            let s = scenario.load()?;
            let f: Vec<f64> = match functional {
                Some(path) => io::box_functional_from_json(&io::read(path)?)?.iter().map(to_f64).collect(),
                None if s == SequentialScenario::chsh() => polytope::chsh_functional().iter().map(to_f64).collect(),
                None => return Err(Error::schema("functional", "required outside the CHSH scenario")),
            };
            let g = build_graph_with_cap(&s, DEFAULT_DIMENSION_CAP)?;
            let cliques = cliques_for(&g, theta)?;
            let opt = theta_optimize(&g, &cliques, &f, &theta.options())?;
            let report = json!({
                "mode": "float",
                "tolerances": theta.tolerances(),
                "value": opt.value,
                "status": opt.certificate.status.name(),
                "residual": opt.certificate.residual,
                "argmax": io::box_to_value(&opt.argmax)["entries"].clone(),
            });
            Ok(Outcome::new(report, true).with_artifact(io::box_to_json(&opt.argmax)))
        }
        Command::AsmValidate { assemblage, tol } => {
            let s = load_assemblage(assemblage)?;
            let r = validate_assemblage_with_tol(&s, *tol);
            let violations: Vec<Value> = r
                .violations
                .iter()
                .map(|v| json!({ "condition": v.condition.describe(), "residual": v.residual }))
                .collect();
            Ok(Outcome::new(
                json!({
                    "mode": asm_mode(&s),
                    "tolerances": { "validation": tol },
                    "valid": r.is_valid(),
                    "violations": violations,
                }),
                r.is_valid(),
            ))
        }
        Command::AsmRealize { realization, .. } => {
            let s = match realization {
                Some(path) => io::realization_from_json(&io::read(path)?)?.assemblage()?,
                None => assemblage::ghz_assemblage(),
            };
            let report = json!({
                "mode": asm_mode(&s),
                "tolerances": {},
                "assemblage": io::assemblage_to_value(&s),
            });
            Ok(Outcome::new(report, true).with_artifact(io::assemblage_to_json(&s)))
        }
        Command::AsmClassify { assemblage } => {
            let s = load_assemblage(assemblage)?;
            let entries = pure_entries(&s)?;
            let line = |labels: [usize; 4]| -> Result<Value> {
                let l = labels.map(|k| entries[k].clone());
                let t = classify_line(&l).map(|t| t.name()).unwrap_or("Unclassifiable");
                Ok(json!({
                    "labels": labels.iter().map(|&k| label_text(k)).collect::<Vec<_>>(),
                    "type": t,
                    "entries": l.iter().map(entry_json).collect::<Vec<_>>(),
                }))
            };
            let rows = (0..4).map(|r| line(row_labels(r))).collect::<Result<Vec<_>>>()?;
            let cols = (0..4).map(|c| line(column_labels(c))).collect::<Result<Vec<_>>>()?;
            Ok(Outcome::new(
                json!({
                    "mode": "float",
                    "tolerances": { "fidelity": 1e-9, "rank": 1e-9, "weight": 1e-9 },
                    "rows": rows,
                    "columns": cols,
                }),
                true,
            ))
        }
        Command::AsmInflexible { assemblage } => {
            let s = load_assemblage(assemblage)?;
            let (structural, unique, kernel) = inflexibility_json(&s)?;
            Ok(Outcome::new(
                json!({
                    "mode": "float",
                    "tolerances": { "kernel_cutoff": 1e-9 },
                    "structural": structural,
                    "unique": unique,
                    "kernel": kernel,
                }),
                unique,
            ))
        }
        Command::AsmFunctional {
            assemblage,
            functional,
            ..
        } => {
            let s = load_assemblage(assemblage)?;
            let f = match functional {
                Some(path) => io::functional_from_json(&io::read(path)?)?,
                None => build_functional(&s)?,
            };
            let value = evaluate_functional(&f, &s)?;
            let exact_value = evaluate_functional_exact(&f, &s)?;
            let bound = lhs_bound(&f);
            let mut report = json!({
                "mode": if exact_value.is_some() { "rational" } else { "float" },
                "tolerances": { "tie_break": 1e-12 },
                "value": value,
                "lhs_bound": bound.value,
                "lhs_responses": bound.responses,
                "lhs_operator": io::matrix_to_value(&bound.operator),
                "steering_gap": value - bound.value,
            });
            if let Some(v) = &exact_value {
                report["value_exact"] = json!(format_rational(v));
            }
            if let Some(sd) = &bound.exact {
                report["lhs_bound_exact"] = json!(sd.to_string());
            }
            let positive = value > bound.value;
            Ok(Outcome::new(report, positive).with_artifact(io::functional_to_json(&f)))
        }
        Command::AsmLhs {
            assemblage,
            tol,
            max_iter,
            infeasibility_threshold,
        } => {
            let s = load_assemblage(assemblage)?;
            let opts = LhsOptions {
                tol: *tol,
                max_iter: *max_iter,
                infeasibility_threshold: *infeasibility_threshold,
                ..LhsOptions::default()
            };
            let tolerances = json!({
                "tol": opts.tol,
                "max_iter": opts.max_iter,
                "infeasibility_threshold": opts.infeasibility_threshold,
                "window": opts.window,
                "stall_ratio": opts.stall_ratio,
            });
            Ok(match lhs_membership(&s, &opts)? {
                LhsResult::Lhs(d) => Outcome::new(
                    json!({
                        "mode": "float",
                        "tolerances": tolerances,
                        "lhs": true,
                        "residual": d.residual,
                        "iterations": d.iterations,
                        "weights": d.weights,
                        "responses": d.boxes,
                        "states": d.states.iter().map(io::matrix_to_value).collect::<Vec<_>>(),
                    }),
                    true,
                ),
                LhsResult::NotLhs { residual, iterations } => Outcome::new(
                    json!({
                        "mode": "float",
                        "tolerances": tolerances,
                        "lhs": false,
                        "residual": residual,
                        "iterations": iterations,
                    }),
                    false,
                ),
            })
        }
        Command::StateGenuine { state } => {
            let s = load_state(state)?;
            let ranks: Vec<usize> = (0..3).map(|p| crate::linalg::numeric_rank(&s.reduced(p), 1e-9)).collect();
            let genuine = entangle::genuine_entangled(&s);
            Ok(Outcome::new(
                json!({ "mode": "float", "tolerances": { "rank": 1e-9 }, "genuine": genuine, "reduced_ranks": ranks }),
                genuine,
            ))
        }
        Command::StateBasis { state, seed } => {
            let s = load_state(state)?;
            let b = entangle::find_basis(&s, *seed)?;
            let vec_json = |v: &crate::linalg::CVec| v.iter().map(|z| json!([z.re, z.im])).collect::<Vec<_>>();
            Ok(Outcome::new(
                json!({
                    "mode": "float",
                    "tolerances": { "schmidt": 1e-8 },
                    "seed": seed,
                    "basis": [vec_json(&b.phi[0]), vec_json(&b.phi[1])],
                    "attempts": b.attempts,
                    "complex_fallback": b.complex_fallback,
                }),
                true,
            ))
        }
        Command::StateBuild { state, seed, .. } => {
            let s = load_state(state)?;
            warn_dim_c(s.dims()[2]);
            let built = entangle::build_inflexible_assemblage(&s, *seed)?;
            let realization = Realization {
                state: s,
                pvms_a: built.pvms_a.clone(),
                pvms_b: built.pvms_b.clone(),
            };
            let (structural, unique, _) = inflexibility_json(&built.assemblage)?;
            let f = build_functional(&built.assemblage)?;
            Ok(Outcome::new(
                json!({
                    "mode": "float",
                    "tolerances": { "kernel_cutoff": 1e-9 },
                    "seed": seed,
                    "attempts": built.attempts,
                    "structural": structural,
                    "unique": unique,
                    "lhs_bound": f.lhs_bound,
                    "realization": io::realization_to_value(&realization),
                    "assemblage": io::assemblage_to_value(&built.assemblage),
                }),
                true,
            )
            .with_artifact(io::realization_to_json(&realization)))
        }
        Command::Jordan { projections } => {
            let (p, q) = io::projection_pair_from_json(&io::read(projections)?)?;
            let j = entangle::jordan_decompose(&p, &q)?;
            let (pr, qr) = j.reconstruct();
            let residual = crate::linalg::distance(&pr, &p).max(crate::linalg::distance(&qr, &q));
            let blocks: Vec<Value> = j
                .blocks
                .iter()
                .map(|b| match *b {
                    JordanBlock::One { p, q } => json!({ "dim": 1, "p": p, "q": q }),
                    JordanBlock::Two { theta } => json!({ "dim": 2, "theta": theta }),
                })
                .collect();
            Ok(Outcome::new(
                json!({
                    "mode": "float",
                    "tolerances": { "projection": 1e-10 },
                    "blocks": blocks,
                    "basis_change": io::matrix_to_value(&j.basis_change),
                    "residual": residual,
                }),
                true,
            ))
        }
        Command::SelfTest {
            realization,
            reference,
            tol,
        } => {
            let candidate = io::realization_from_json(&io::read(realization)?)?;
            let reference = match reference {
                Some(path) => io::realization_from_json(&io::read(path)?)?,
                None => Realization::ghz(),
            };
            let f = build_functional(&reference.assemblage()?)?;
            let r = entangle::self_test_check(&f, &reference, &candidate, *tol)?;
            Ok(Outcome::new(
                json!({
                    "mode": "float",
                    "tolerances": { "eps": tol },
                    "f_value": r.f_value,
                    "equivalent": r.equivalent,
                    "fidelity": r.fidelity,
                    "operator_error": r.operator_error,
                    "local_maps": r.local_maps.as_ref().map(|(a, b)| json!([io::matrix_to_value(a), io::matrix_to_value(b)])),
                }),
                r.equivalent,
            ))
        }
        Command::GhzDemo => ghz_demo(),
    }
}

fn drift(what: &str, detail: String) -> Error {
    Error::HypothesisFailed(format!("GHZ example drifted: {what} ({detail})"))
}

/// Realize, validate, classify, check inflexibility, and bound the GHZ
/// assemblage; any deviation from the expected numbers is an error.
pub fn ghz_demo() -> Result<Outcome> {
    let s = assemblage::ghz_assemblage();
    let report = assemblage::validate_assemblage(&s);
    if !report.is_valid() {
        return Err(drift("validity", format!("{} violations", report.violations.len())));
    }
    let structural = inflexible_structural(&s)?;
    let unique = inflexible_oracle(&s)? == Inflexibility::Unique;
    if !structural || !unique {
        return Err(drift("inflexibility", format!("structural={structural}, unique={unique}")));
    }
    let f = build_functional(&s)?;
    let value = evaluate_functional_exact(&f, &s)?.ok_or_else(|| drift("exact mode", "missing".into()))?;
    if value != int(4) {
        return Err(drift("F", format_rational(&value)));
    }
    let bound = lhs_bound(&f);
    let expected = (4.0 + 10f64.sqrt()) / 2.0;
    if (bound.value - expected).abs() > 1e-9 {
        return Err(drift("LHS bound", bound.value.to_string()));
    }
    let lhs = lhs_membership(&s, &LhsOptions::default())?;
    if !matches!(lhs, LhsResult::NotLhs { .. }) {
        return Err(drift("LHS membership", "decomposition found".into()));
    }
    let exact_bound = bound.exact.as_ref().map(|b| b.to_string());
    Ok(Outcome::new(
        json!({
            "mode": "rational",
            "tolerances": { "lhs_bound": 1e-9 },
            "F": format_rational(&value),
            "c": bound.value,
            "c_exact": exact_bound,
            "lhs_responses": bound.responses,
            "inflexible": true,
            "lhs": false,
        }),
        true,
    ))
}
