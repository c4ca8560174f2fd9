//! The `coarsekit` command line.
//!
//! Exit codes: 0 on success or a valid certificate, 1 when a certificate is
//! invalid or a rewrite fails, 2 on usage errors. Certificates are verified
//! before they are written; nothing is written when that check fails.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::coarse::CoarseMapWitness;
use crate::dot::{space_to_dot, window_to_dot};
use crate::generate;
use crate::groups::{enumerate_ball, enumerate_relative_window, relative_ball, GroupSpec, GroupWindow};
use crate::io::{
    parse_space, space_to_doc, subspace_from_file, subspace_to_file, Certificate, SubspaceFile,
};
use crate::metric::{Dist, FiniteMetricSpace, Subspace};
use crate::pipeline::extend_group_chain;
use crate::search::{asdim_profile, oracle_min_k_with, heuristic_decompose, DRule, SearchBudget, SearchError, SearchMode};
use crate::witness::{
    chain_from_kfold, merge_union_witnesses, pad_witness, restrict_chain, restrict_to_subspace, string_chains,
    transfer_chain, transfer_witness, union_assemble, DecompositionWitness, FamilyWitness,
};

#[derive(Parser, Debug)]
#[command(name = "coarsekit", version, about = "Decomposition certificates for finite metric spaces and group windows")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a test space (path, cycle, grid, complete graph, random metric)
    GenSpace {
        #[arg(value_enum)]
        kind: SpaceKind,
        /// Number of points (path, cycle, complete, random)
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        rows: usize,
        #[arg(long, default_value_t = 3)]
        cols: usize,
        /// Seed for random metrics
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        max_weight: Dist,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Enumerate the word-metric ball of radius N
    GenBall {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long = "N")]
        radius: u64,
        /// Keep only elements with at most this many syllables
        #[arg(long)]
        syllables: Option<usize>,
        /// Metric of the exported space
        #[arg(long, value_enum, default_value_t = MetricKind::Word)]
        metric: MetricKind,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The relative ball B(n) inside a window of radius N
    RelBall {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long = "N")]
        radius: u64,
        #[arg(long)]
        n: Dist,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Find a (k, r)-decomposition into pieces of diameter at most D
    Search {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        r: Dist,
        #[arg(long = "D")]
        d: Dist,
        #[arg(long, default_value_t = 4)]
        max_k: u32,
        #[arg(long, default_value_t = crate::search::DEFAULT_MAX_POINTS)]
        max_points: usize,
        #[arg(long, value_enum, default_value_t = Mode::Auto)]
        mode: Mode,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Colors needed at each scale, with D = mul·r + add or a constant D
    Profile {
        #[arg(long)]
        space: PathBuf,
        #[arg(long, value_parser = parse_scales)]
        scales: Scales,
        #[arg(long, default_value_t = 2)]
        d_mul: Dist,
        #[arg(long, default_value_t = 0)]
        d_add: Dist,
        /// Use this D at every scale instead
        #[arg(long)]
        d_const: Option<Dist>,
        #[arg(long, default_value_t = 4)]
        max_k: u32,
        #[arg(long, default_value_t = crate::search::DEFAULT_MAX_POINTS)]
        max_points: usize,
        #[arg(long, value_enum, default_value_t = Mode::Auto)]
        mode: Mode,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify a witness, family, chain, map or pipeline report
    Verify {
        /// Certificate file; the kind is detected from its fields
        file: Option<PathBuf>,
        #[arg(long, conflicts_with = "file")]
        witness: Option<PathBuf>,
        #[arg(long, conflicts_with_all = ["file", "witness"])]
        chain: Option<PathBuf>,
    },
    /// Rewrite certificates
    Transform {
        #[command(subcommand)]
        kind: Transform,
    },
    /// Run the relative-graph-to-group pipeline on a free product
    RhgDemo {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        window: u64,
        #[arg(long)]
        rel_radius: Dist,
        #[arg(long, value_parser = parse_scales)]
        scales: Scales,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the relative Cayley graph of the window
        #[arg(long)]
        emit_dot: Option<PathBuf>,
    },
    /// Graphviz output of a space or a group window
    ExportDot {
        #[arg(long, required_unless_present = "spec")]
        space: Option<PathBuf>,
        #[arg(long, conflicts_with = "space", requires = "radius")]
        spec: Option<PathBuf>,
        #[arg(long = "N")]
        radius: Option<u64>,
        /// Fill nodes by the colors of this witness
        #[arg(long)]
        witness: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
pub enum Transform {
    /// k-fold family witness (or single witness) to a chain of two-fold steps
    ChainFromKfold {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Concatenate two chains, relabeling a same-scale head
    String {
        #[arg(long)]
        head: PathBuf,
        #[arg(long)]
        tail: PathBuf,
        #[arg(long, value_parser = parse_scales)]
        head_scales: Option<Scales>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Add empty colors up to k
    Pad {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Witness for the union of two spaces; the first wins on overlaps
    MergeUnion {
        #[arg(long)]
        first: PathBuf,
        #[arg(long)]
        second: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Two-fold witness from a set Y and parts that are r-disjoint off Y
    UnionAssemble {
        #[arg(long = "part", required = true)]
        parts: Vec<PathBuf>,
        #[arg(long)]
        y: PathBuf,
        #[arg(long)]
        r: Dist,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pull a witness or chain back along a coarse embedding
    Transfer {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Restrict a witness or chain to a subspace
    Restrict {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        subspace: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SpaceKind {
    Path,
    Cycle,
    Grid,
    Complete,
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MetricKind {
    Word,
    Relative,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Mode {
    Exhaustive,
    Heuristic,
    Auto,
}

impl From<Mode> for SearchMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Exhaustive => SearchMode::Exhaustive,
            Mode::Heuristic => SearchMode::Heuristic,
            Mode::Auto => SearchMode::Auto,
        }
    }
}

/// Comma-separated scales.
#[derive(Clone, Debug)]
pub struct Scales(pub Vec<Dist>);

fn parse_scales(s: &str) -> Result<Scales, String> {
    s.split(',')
        .map(|t| t.trim().parse::<Dist>().map_err(|e| format!("bad scale {t:?}: {e}")))
        .collect::<Result<Vec<_>, _>>()
        .map(Scales)
}

/// Why a command did not succeed.
#[derive(Debug)]
pub enum Failure {
    Usage(anyhow::Error),
    Invalid(anyhow::Error),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Invalid(_) => 1,
        }
    }
}

fn usage(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Usage(e.into())
}

fn invalid(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Invalid(e.into())
}

type Outcome = Result<(), Failure>;

/// Parses `argv` and runs the command; returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(f) => {
            let (Failure::Usage(e) | Failure::Invalid(e)) = &f;
            eprintln!("error: {e:#}");
            f.code()
        }
    }
}

fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).map_err(usage)?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display())).map_err(usage)
}

fn read_space(path: &Path) -> Result<Arc<FiniteMetricSpace>, Failure> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).map_err(usage)?;
    parse_space(&text).with_context(|| format!("loading space from {}", path.display())).map_err(usage)
}

fn read_spec(path: &Path) -> Result<GroupSpec, Failure> {
    let spec: GroupSpec = serde_json::from_value(read_json(path)?)
        .with_context(|| format!("{} is not a group spec", path.display()))
        .map_err(usage)?;
    spec.validate().map_err(usage)?;
    Ok(spec)
}

fn read_certificate(path: &Path) -> Result<Certificate, Failure> {
    Certificate::from_json(&read_json(path)?)
        .with_context(|| format!("loading certificate from {}", path.display()))
        .map_err(usage)
}

fn read_subspace(path: &Path) -> Result<Subspace, Failure> {
    let doc: SubspaceFile = serde_json::from_value(read_json(path)?)
        .with_context(|| format!("{} is not a subspace document", path.display()))
        .map_err(usage)?;
    subspace_from_file(&doc).map_err(usage)
}

fn check_paths(inputs: &[&Path], out: Option<&Path>) -> Outcome {
    if let Some(out) = out {
        if inputs.contains(&out) {
            return Err(usage(anyhow!("output path {} is also an input", out.display())));
        }
    }
    Ok(())
}

fn emit_text(text: &str, out: Option<&Path>) -> Outcome {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())).map_err(usage),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json(v: &Value, out: Option<&Path>) -> Outcome {
    let mut text = serde_json::to_string_pretty(v).expect("json values serialize");
    text.push('\n');
    emit_text(&text, out)
}

/// Verifies, then writes. On failure the report goes to stdout and nothing
/// is written.
fn emit_certificate(c: &Certificate, out: Option<&Path>) -> Outcome {
    let (valid, report) = c.verify();
    if !valid {
        println!("{}", json!({ "kind": c.kind(), "valid": false, "report": report }));
        return Err(invalid(anyhow!("refusing to write an invalid {}", c.kind())));
    }
    emit_json(&c.to_json(), out)
}

fn execute(cmd: Command) -> Outcome {
    match cmd {
        Command::GenSpace { kind, n, rows, cols, seed, max_weight, out } => {
            if max_weight == 0 {
                return Err(usage(anyhow!("--max-weight must be positive")));
            }
            let s = match kind {
                SpaceKind::Path => generate::path(n),
                SpaceKind::Cycle => generate::cycle(n),
                SpaceKind::Grid => generate::grid(rows, cols),
                SpaceKind::Complete => generate::complete(n),
                SpaceKind::Random => generate::random_space(seed, n, max_weight),
            };
            emit_json(&serde_json::to_value(space_to_doc(&s)).expect("doc"), out.as_deref())
        }
        Command::GenBall { spec, radius, syllables, metric, out } => {
            check_paths(&[&spec], out.as_deref())?;
            let w = window(&read_spec(&spec)?, radius, syllables)?;
            let space = match metric {
                MetricKind::Word => w.s_space().clone(),
                MetricKind::Relative => w.rel_space().map_err(usage)?.clone(),
            };
            emit_json(&serde_json::to_value(space_to_doc(&space)).expect("doc"), out.as_deref())
        }
        Command::RelBall { spec, radius, n, out } => {
            check_paths(&[&spec], out.as_deref())?;
            let w = window(&read_spec(&spec)?, radius, None)?;
            let ball = relative_ball(&w, n).map_err(usage)?;
            emit_json(&serde_json::to_value(subspace_to_file(&ball)).expect("doc"), out.as_deref())
        }
        Command::Search { space, r, d, max_k, max_points, mode, out } => {
            check_paths(&[&space], out.as_deref())?;
            let s = Subspace::whole(read_space(&space)?);
            let w = search(&s, r, d, max_k, max_points, mode)?;
            emit_certificate(&Certificate::Witness(w), out.as_deref())
        }
        Command::Profile { space, scales, d_mul, d_add, d_const, max_k, max_points, mode, out } => {
            check_paths(&[&space], out.as_deref())?;
            let s = Subspace::whole(read_space(&space)?);
            let rule = match d_const {
                Some(d) => DRule::Constant(d),
                None => DRule::Linear { mul: d_mul, add: d_add },
            };
            let budget = SearchBudget { max_k, max_points, mode: mode.into() };
            let rows = asdim_profile(&s, &scales.0, rule, budget).map_err(search_failure)?;
            let mut list = Vec::new();
            for row in rows {
                let cert = Certificate::Witness(row.witness);
                if !cert.verify().0 {
                    return Err(invalid(anyhow!("profile witness at r = {} failed verification", row.r)));
                }
                list.push(json!({ "r": row.r, "d": row.d, "k": row.k, "exact": row.exact, "witness": cert.to_json() }));
            }
            emit_json(&Value::Array(list), out.as_deref())
        }
        Command::Verify { file, witness, chain } => {
            let path = file.or(witness).or(chain).ok_or_else(|| usage(anyhow!("no certificate given")))?;
            verify(&path)
        }
        Command::Transform { kind } => transform(kind),
        Command::RhgDemo { spec, window, rel_radius, scales, out, emit_dot } => {
            check_paths(&[&spec], out.as_deref())?;
            if emit_dot.is_some() && emit_dot == out {
                return Err(usage(anyhow!("--emit-dot and --out must differ")));
            }
            let g = read_spec(&spec)?;
            if !matches!(g, GroupSpec::FreeProduct { .. }) {
                return Err(usage(anyhow!("rhg-demo needs a free_product spec")));
            }
            let report = extend_group_chain(&g, window, rel_radius, &scales.0);
            emit_json(&serde_json::to_value(&report).expect("report"), out.as_deref())?;
            if let Some(path) = emit_dot {
                let w = enumerate_ball(&g, window).map_err(usage)?;
                emit_text(&window_to_dot(&w, None), Some(&path))?;
            }
            if report.overall {
                Ok(())
            } else {
                let failed = report.stages.iter().find(|s| !s.valid).map(|s| s.name.as_str()).unwrap_or("?");
                Err(invalid(anyhow!("pipeline failed at stage {failed}")))
            }
        }
        Command::ExportDot { space, spec, radius, witness, out } => {
            let w = witness.as_deref().map(read_certificate).transpose()?;
            let w = match w {
                None => None,
                Some(Certificate::Witness(w)) => Some(w),
                Some(c) => return Err(usage(anyhow!("expected a witness, got a {}", c.kind()))),
            };
            let text = match (space, spec) {
                (Some(path), _) => {
                    let s = read_space(&path)?;
                    let w = w.filter(|w| w.space.ambient().id() == s.id());
                    space_to_dot(&s, w.as_ref())
                        .ok_or_else(|| usage(anyhow!("{} has no graph structure", path.display())))?
                }
                (None, Some(path)) => {
                    let win = window(&read_spec(&path)?, radius.expect("required by clap"), None)?;
                    let w = w.filter(|w| w.space.ambient().id() == win.s_space().id());
                    window_to_dot(&win, w.as_ref())
                }
                (None, None) => return Err(usage(anyhow!("give --space or --spec"))),
            };
            emit_text(&text, out.as_deref())
        }
    }
}

fn window(spec: &GroupSpec, radius: u64, syllables: Option<usize>) -> Result<GroupWindow, Failure> {
    match syllables {
        Some(m) => enumerate_relative_window(spec, radius, m),
        None => enumerate_ball(spec, radius),
    }
    .map_err(usage)
}

fn search_failure(e: SearchError) -> Failure {
    match e {
        SearchError::TooLarge { .. } => usage(anyhow!("{e}; use --mode heuristic or raise --max-points")),
        SearchError::NotFound { .. } => invalid(e),
    }
}

fn search(s: &Subspace, r: Dist, d: Dist, max_k: u32, max_points: usize, mode: Mode) -> Result<DecompositionWitness, Failure> {
    let exhaustive = match mode {
        Mode::Exhaustive => true,
        Mode::Heuristic => false,
        Mode::Auto => s.len() <= max_points,
    };
    if exhaustive {
        return oracle_min_k_with(s, r, d, max_k, max_points).map(|o| o.witness).map_err(search_failure);
    }
    let w = heuristic_decompose(s, r, d);
    if w.k > max_k {
        return Err(invalid(anyhow!("heuristic needed {} colors, more than --max-k {max_k}", w.k)));
    }
    Ok(w)
}

fn verify(path: &Path) -> Outcome {
    let v = read_json(path)?;
    if let Some(stages) = v.get("stages").and_then(Value::as_array) {
        let mut all = v.get("overall").and_then(Value::as_bool).unwrap_or(false);
        for stage in stages {
            let name = stage.get("name").and_then(Value::as_str).unwrap_or("?");
            match stage.get("certificate").filter(|c| !c.is_null()) {
                Some(c) => {
                    let cert = Certificate::from_json(c).with_context(|| format!("stage {name}")).map_err(usage)?;
                    let (valid, report) = cert.verify();
                    all &= valid;
                    println!("{}", json!({ "stage": name, "kind": cert.kind(), "valid": valid, "report": report }));
                }
                None => {
                    let claimed = stage.get("valid").and_then(Value::as_bool).unwrap_or(false);
                    all &= claimed;
                    println!("{}", json!({ "stage": name, "kind": null, "valid": claimed }));
                }
            }
        }
        return if all { Ok(()) } else { Err(invalid(anyhow!("report does not verify"))) };
    }
    let cert = Certificate::from_json(&v).with_context(|| format!("loading {}", path.display())).map_err(usage)?;
    let (valid, report) = cert.verify();
    let mut line = json!({ "kind": cert.kind(), "valid": valid, "report": report });
    if let Certificate::Witness(w) = &cert {
        line["violations"] = json!(w.verify().messages());
    }
    println!("{line}");
    if valid {
        Ok(())
    } else {
        Err(invalid(anyhow!("{} does not verify", cert.kind())))
    }
}

fn as_family(c: Certificate) -> Result<FamilyWitness, Failure> {
    match c {
        Certificate::Family(f) => Ok(f),
        Certificate::Witness(w) => Ok(FamilyWitness::new(w.r, vec![w])),
        other => Err(usage(anyhow!("expected a witness or family, got a {}", other.kind()))),
    }
}

fn as_witness(c: Certificate) -> Result<DecompositionWitness, Failure> {
    match c {
        Certificate::Witness(w) => Ok(w),
        other => Err(usage(anyhow!("expected a witness, got a {}", other.kind()))),
    }
}

fn as_map(c: Certificate) -> Result<CoarseMapWitness, Failure> {
    match c {
        Certificate::Map(m) => Ok(m),
        other => Err(usage(anyhow!("expected a map, got a {}", other.kind()))),
    }
}

fn transform(kind: Transform) -> Outcome {
    match kind {
        Transform::ChainFromKfold { input, out } => {
            check_paths(&[&input], out.as_deref())?;
            let fw = as_family(read_certificate(&input)?)?;
            let c = chain_from_kfold(&fw).map_err(invalid)?;
            emit_certificate(&Certificate::Chain(c), out.as_deref())
        }
        Transform::String { head, tail, head_scales, out } => {
            check_paths(&[&head, &tail], out.as_deref())?;
            let (Certificate::Chain(h), Certificate::Chain(t)) = (read_certificate(&head)?, read_certificate(&tail)?) else {
                return Err(usage(anyhow!("--head and --tail must be chains")));
            };
            let c = string_chains(&h, &t, head_scales.as_ref().map(|s| s.0.as_slice())).map_err(invalid)?;
            emit_certificate(&Certificate::Chain(c), out.as_deref())
        }
        Transform::Pad { input, k, out } => {
            check_paths(&[&input], out.as_deref())?;
            let w = as_witness(read_certificate(&input)?)?;
            let w = pad_witness(&w, k).map_err(invalid)?;
            emit_certificate(&Certificate::Witness(w), out.as_deref())
        }
        Transform::MergeUnion { first, second, out } => {
            check_paths(&[&first, &second], out.as_deref())?;
            let a = as_witness(read_certificate(&first)?)?;
            let b = as_witness(read_certificate(&second)?)?;
            let w = merge_union_witnesses(&a, &b).map_err(invalid)?;
            emit_certificate(&Certificate::Witness(w), out.as_deref())
        }
        Transform::UnionAssemble { parts, y, r, out } => {
            let mut inputs: Vec<&Path> = parts.iter().map(PathBuf::as_path).collect();
            inputs.push(&y);
            check_paths(&inputs, out.as_deref())?;
            let y = read_subspace(&y)?;
            let parts = parts
                .iter()
                .map(|p| read_subspace(p).and_then(|s| relocate_to(&s, y.ambient())))
                .collect::<Result<Vec<_>, _>>()?;
            let w = union_assemble(&parts, &y, r).map_err(invalid)?;
            emit_certificate(&Certificate::Witness(w), out.as_deref())
        }
        Transform::Transfer { map, input, out } => {
            check_paths(&[&map, &input], out.as_deref())?;
            let m = as_map(read_certificate(&map)?)?;
            let cert = match read_certificate(&input)? {
                Certificate::Witness(w) => Certificate::Witness(transfer_witness(&w, &m).map_err(invalid)?),
                Certificate::Chain(c) => Certificate::Chain(transfer_chain(&c, &m).map_err(invalid)?),
                other => return Err(usage(anyhow!("cannot transfer a {}", other.kind()))),
            };
            emit_certificate(&cert, out.as_deref())
        }
        Transform::Restrict { input, subspace, out } => {
            check_paths(&[&input, &subspace], out.as_deref())?;
            let s = read_subspace(&subspace)?;
            let cert = match read_certificate(&input)? {
                Certificate::Witness(w) => {
                    let s = relocate_to(&s, w.space.ambient())?;
                    Certificate::Witness(restrict_to_subspace(&w, &s).map_err(invalid)?)
                }
                Certificate::Chain(c) => {
                    let amb = c.start.first().map(|m| m.ambient().clone()).unwrap_or_else(|| s.ambient().clone());
                    let s = relocate_to(&s, &amb)?;
                    Certificate::Chain(restrict_chain(&c, &s).map_err(invalid)?)
                }
                other => return Err(usage(anyhow!("cannot restrict a {}", other.kind()))),
            };
            emit_certificate(&cert, out.as_deref())
        }
    }
}

/// Re-reads a subspace in an equal ambient loaded from another file, so
/// that sets from separate documents can be compared.
fn relocate_to(s: &Subspace, amb: &Arc<FiniteMetricSpace>) -> Result<Subspace, Failure> {
    if Arc::ptr_eq(s.ambient(), amb) {
        return Ok(s.clone());
    }
    let other = s.ambient();
    let same = other.id() == amb.id()
        && other.names() == amb.names()
        && (0..amb.len()).all(|a| (a + 1..amb.len()).all(|b| other.dist(a, b) == amb.dist(a, b)));
    if !same {
        return Err(usage(anyhow!("subspace lives in {:?}, expected {:?}", other.id(), amb.id())));
    }
    Subspace::new(amb.clone(), s.points().to_vec()).map_err(usage)
}
