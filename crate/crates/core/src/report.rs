//! JSON ingestion and the command implementations behind the CLI.
//!
//! Every command returns a [`CommandOutput`]: a JSON document plus the
//! process exit code. Exit codes are 0 on success or witness found, 1 when
//! no witness was found, 2 on invalid input and 3 on numerical failure.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::circulant::{build_circulant, CirculantSpec};
use crate::error::{Error, Result};
use crate::families::{
    circulant_twin_edge_family, complete_graph, k4n_remove_matching, quarter_weight_edges,
    verify_family_with, FamilyInstance,
};
use crate::graph::{
    build_graph, laplacian, list_twin_pairs, perturb_edge, random_graph_with_twins, rank_one_m,
    EdgePerturbation, WeightedGraph,
};
use crate::matrix::{max_abs, unitarity_defect, RealMatrix};
use crate::walk::{
    check_lpst, check_periodic, laplacian_spectrum, perturbed_propagator, pgst_scan, propagator,
    pst_time_scan, verify_factorization, PgstWitness, TransferKind, TransferReport,
    DEFAULT_EPSILONS, DEFAULT_GRID, DEFAULT_LPST_TOL, DEFAULT_Q_MAX,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_FOUND: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

const TIME_DIGITS: usize = 15;
const FIDELITY_DIGITS: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutput {
    pub json: Value,
    pub exit_code: i32,
}

impl CommandOutput {
    fn new(json: Value, ok: bool) -> Self {
        Self {
            json,
            exit_code: if ok { EXIT_OK } else { EXIT_NOT_FOUND },
        }
    }

    pub fn from_error(e: &Error) -> Self {
        Self {
            json: json!({ "error": e.to_string() }),
            exit_code: exit_code_for(e),
        }
    }
}

pub fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::ConvergenceFailure { .. } => EXIT_NUMERICAL,
        Error::WitnessFailed { .. } => EXIT_NOT_FOUND,
        _ => EXIT_INPUT,
    }
}

/// Rounds to `digits` significant decimal digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", digits - 1, x).parse().unwrap_or(x)
}

fn t(x: f64) -> f64 {
    round_sig(x, TIME_DIGITS)
}

fn f(x: f64) -> f64 {
    round_sig(x, FIDELITY_DIGITS)
}

/// A time given either as a plain real or as `{"pi_multiple": x}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeSpec {
    Raw(f64),
    PiMultiple(f64),
}

impl TimeSpec {
    pub fn seconds(&self) -> f64 {
        match *self {
            TimeSpec::Raw(x) => x,
            TimeSpec::PiMultiple(m) => m * PI,
        }
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        if let Some(x) = v.as_f64() {
            return Ok(TimeSpec::Raw(x));
        }
        v.get("pi_multiple")
            .and_then(Value::as_f64)
            .map(TimeSpec::PiMultiple)
            .ok_or_else(|| {
                Error::Parse(format!(
                    "expected a number or {{\"pi_multiple\": x}}, got {v}"
                ))
            })
    }

    /// Accepts `1.25` or `{"pi_multiple": 0.5}`.
    pub fn parse(s: &str) -> Result<Self> {
        let v: Value =
            serde_json::from_str(s.trim()).map_err(|e| Error::Parse(format!("time {s:?}: {e}")))?;
        Self::from_json(&v)
    }
}

fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

fn as_index(v: &Value, what: &str) -> Result<usize> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| Error::Parse(format!("{what}: expected a non-negative integer, got {v}")))
}

fn as_pairs(v: Option<&Value>, what: &str) -> Result<Vec<(usize, usize)>> {
    let arr = v
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse(format!("{what}: expected an array of pairs")))?;
    arr.iter()
        .map(|p| match p.as_array().map(Vec::as_slice) {
            Some([a, b]) => Ok((as_index(a, what)?, as_index(b, what)?)),
            _ => Err(Error::Parse(format!("{what}: expected [a, b], got {p}"))),
        })
        .collect()
}

fn circulant_from_json(c: &Value) -> Result<CirculantSpec> {
    let n = c
        .get("n")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::Parse("circulant: missing integer \"n\"".into()))?;
    let s = c
        .get("S")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse("circulant: missing array \"S\"".into()))?
        .iter()
        .map(|x| {
            x.as_i64()
                .ok_or_else(|| Error::Parse(format!("circulant: bad residue {x}")))
        })
        .collect::<Result<Vec<_>>>()?;
    CirculantSpec::new(n, s)
}

/// Graph from `{"n": .., "edges": [[u, v, w?], ..]}` or
/// `{"circulant": {"n": .., "S": [..]}}`.
pub fn graph_from_json(v: &Value) -> Result<WeightedGraph> {
    if let Some(c) = v.get("circulant") {
        return Ok(build_circulant(&circulant_from_json(c)?));
    }
    let n = v
        .get("n")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::Parse("graph: missing integer \"n\"".into()))? as usize;
    let edges = match v.get("edges") {
        None => Vec::new(),
        Some(e) => e
            .as_array()
            .ok_or_else(|| Error::Parse("graph: \"edges\" must be an array".into()))?
            .iter()
            .map(|edge| match edge.as_array().map(Vec::as_slice) {
                Some([u, v]) => Ok((as_index(u, "edge")?, as_index(v, "edge")?, 1.0)),
                Some([u, v, w]) => Ok((
                    as_index(u, "edge")?,
                    as_index(v, "edge")?,
                    w.as_f64().ok_or_else(|| {
                        Error::Parse(format!("edge weight must be a number, got {w}"))
                    })?,
                )),
                _ => Err(Error::Parse(format!(
                    "edge must be [u, v] or [u, v, w], got {edge}"
                ))),
            })
            .collect::<Result<Vec<_>>>()?,
    };
    build_graph(n, &edges)
}

pub fn graph_from_str(text: &str) -> Result<WeightedGraph> {
    graph_from_json(&parse_json(text)?)
}

fn base_graph(v: &Value) -> Result<WeightedGraph> {
    match v {
        Value::String(s) => {
            let n = s
                .strip_prefix('K')
                .and_then(|k| k.parse::<usize>().ok())
                .ok_or_else(|| {
                    Error::Parse(format!(
                        "base: expected \"K<n>\" or a graph object, got {s:?}"
                    ))
                })?;
            complete_graph(n)
        }
        other => graph_from_json(other),
    }
}

/// Family from `{"family": "k4n_matching" | "quarter_weight" | "circulant_twin", ..}`.
pub fn family_from_json(v: &Value) -> Result<FamilyInstance> {
    let family = v
        .get("family")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::Parse("family: missing string \"family\"".into()))?;
    match family {
        "k4n_matching" => {
            let size = match (v.get("size"), v.get("n")) {
                (Some(s), _) => as_index(s, "size")?,
                (None, Some(k)) => 4 * as_index(k, "n")?,
                (None, None) => {
                    return Err(Error::Parse("k4n_matching: need \"n\" or \"size\"".into()))
                }
            };
            k4n_remove_matching(size, &as_pairs(v.get("matching"), "matching")?)
        }
        "quarter_weight" => {
            let base = v
                .get("base")
                .ok_or_else(|| Error::Parse("quarter_weight: missing \"base\"".into()))?;
            quarter_weight_edges(&base_graph(base)?, &as_pairs(v.get("pairs"), "pairs")?)
        }
        "circulant_twin" => {
            let spec = circulant_from_json(v)?;
            circulant_twin_edge_family(&spec, &as_pairs(v.get("pairs"), "pairs")?)
        }
        other => Err(Error::Parse(format!("unknown family {other:?}"))),
    }
}

pub fn report_json(r: &TransferReport) -> Value {
    json!({
        "kind": r.kind.as_str(),
        "from": r.from,
        "to": r.to,
        "time": t(r.time),
        "fidelity": f(r.fidelity),
        "phase_re": t(r.phase.re),
        "phase_im": t(r.phase.im),
        "tolerance": r.tolerance,
    })
}

pub fn witness_json(w: &PgstWitness) -> Value {
    let improvements: Vec<Value> =
        w.qs.iter()
            .zip(&w.times)
            .zip(&w.fidelities)
            .map(|((q, &time), &fid)| json!({ "q": q, "time": t(time), "fidelity": f(fid) }))
            .collect();
    let ladder: Vec<Value> = w
        .epsilon_ladder
        .iter()
        .map(|h| {
            json!({
                "epsilon": h.epsilon,
                "q": h.q,
                "time": h.time.map(t),
                "fidelity": h.fidelity.map(f),
            })
        })
        .collect();
    json!({
        "mode": "pgst",
        "from": w.from,
        "to": w.to,
        "q_max": w.q_max,
        "best": {
            "q": w.qs.last(),
            "time": w.best_time().map(t),
            "fidelity": f(w.best_fidelity()),
        },
        "epsilon_ladder": ladder,
        "improvements": improvements,
        "alignment_defect": if w.alignment_defect.is_finite() { Some(f(w.alignment_defect)) } else { None },
        "complete": w.complete(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanMode {
    Pst,
    Pgst,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Twins,
    Check,
    Scan,
    Family,
    VerifyIdentities,
}

/// Everything a CLI invocation needs, validated before any work starts.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    /// Raw JSON text of the input file, if any.
    pub input: Option<String>,
    pub from: Option<usize>,
    pub to: Option<usize>,
    pub time: Option<TimeSpec>,
    pub mode: ScanMode,
    pub lpst_tol: f64,
    pub t_max: TimeSpec,
    pub grid: usize,
    pub q_max: u64,
    pub epsilons: Vec<f64>,
    pub seed: u64,
    pub trials: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: Command::Twins,
            input: None,
            from: None,
            to: None,
            time: None,
            mode: ScanMode::Pst,
            lpst_tol: DEFAULT_LPST_TOL,
            t_max: TimeSpec::PiMultiple(2.0),
            grid: DEFAULT_GRID,
            q_max: DEFAULT_Q_MAX,
            epsilons: DEFAULT_EPSILONS.to_vec(),
            seed: 0,
            trials: 10,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.lpst_tol.is_nan() || self.lpst_tol <= 0.0 {
            return bad(format!("tolerance must be positive, got {}", self.lpst_tol));
        }
        if self.grid < 2 {
            return bad(format!("grid must be at least 2, got {}", self.grid));
        }
        if self.epsilons.windows(2).any(|w| w[1] >= w[0]) {
            return bad("epsilons must be strictly decreasing".into());
        }
        if self.command == Command::VerifyIdentities && self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        Ok(())
    }

    fn input_json(&self) -> Result<Value> {
        parse_json(
            self.input
                .as_deref()
                .ok_or_else(|| Error::InvalidArgument("--input is required".into()))?,
        )
    }

    fn endpoints(&self) -> Result<(usize, usize)> {
        match (self.from, self.to) {
            (Some(a), Some(b)) => Ok((a, b)),
            _ => Err(Error::InvalidArgument(
                "--from and --to are required".into(),
            )),
        }
    }
}

pub fn run(cfg: &RunConfig) -> CommandOutput {
    let result = cfg.validate().and_then(|_| match cfg.command {
        Command::Twins => graph_from_json(&cfg.input_json()?).map(|g| cmd_twins(&g)),
        Command::Check => {
            let g = graph_from_json(&cfg.input_json()?)?;
            let (a, b) = cfg.endpoints()?;
            let time = cfg.time.ok_or_else(|| {
                Error::InvalidArgument("--time or --pi-multiple is required".into())
            })?;
            cmd_check(&g, a, b, time.seconds(), cfg.lpst_tol)
        }
        Command::Scan => {
            let g = graph_from_json(&cfg.input_json()?)?;
            let (a, b) = cfg.endpoints()?;
            cmd_scan(&g, a, b, cfg)
        }
        Command::Family => {
            let fi = family_from_json(&cfg.input_json()?)?;
            cmd_family(&fi, cfg.lpst_tol, cfg.q_max, &cfg.epsilons)
        }
        Command::VerifyIdentities => {
            let g = match &cfg.input {
                Some(_) => Some(graph_from_json(&cfg.input_json()?)?),
                None => None,
            };
            cmd_verify_identities(g.as_ref(), cfg.seed, cfg.trials)
        }
    });
    result.unwrap_or_else(|e| CommandOutput::from_error(&e))
}

pub fn cmd_twins(g: &WeightedGraph) -> CommandOutput {
    let pairs: Vec<[usize; 2]> = list_twin_pairs(g).iter().map(|p| [p.a, p.b]).collect();
    CommandOutput::new(json!({ "twin_pairs": pairs }), true)
}

/// Transfer check from `a` to `b`; periodicity when `a == b`.
pub fn cmd_check(
    g: &WeightedGraph,
    a: usize,
    b: usize,
    time: f64,
    tol: f64,
) -> Result<CommandOutput> {
    let r = if a == b {
        check_periodic(g, a, time, tol)?
    } else {
        check_lpst(g, a, b, time, tol)?
    };
    Ok(CommandOutput::new(
        report_json(&r),
        r.kind != TransferKind::None,
    ))
}

pub fn cmd_scan(g: &WeightedGraph, a: usize, b: usize, cfg: &RunConfig) -> Result<CommandOutput> {
    match cfg.mode {
        ScanMode::Pst => {
            let r = pst_time_scan(g, a, b, cfg.t_max.seconds(), cfg.grid)?;
            let mut v = report_json(&r);
            v["mode"] = json!("pst");
            v["t_max"] = json!(t(cfg.t_max.seconds()));
            v["grid"] = json!(cfg.grid);
            Ok(CommandOutput::new(v, r.kind != TransferKind::None))
        }
        ScanMode::Pgst => {
            let w = pgst_scan(g, a, b, cfg.q_max, &cfg.epsilons)?;
            Ok(CommandOutput::new(witness_json(&w), w.complete()))
        }
    }
}

pub fn cmd_family(
    fi: &FamilyInstance,
    tol: f64,
    q_max: u64,
    epsilons: &[f64],
) -> Result<CommandOutput> {
    let mut v = json!({
        "provenance": fi.provenance,
        "warnings": fi.warnings,
        "expected": fi.expected_witnesses.len(),
    });
    match verify_family_with(fi, tol, q_max, epsilons) {
        Ok(reports) => {
            v["passed"] = json!(true);
            v["reports"] = Value::Array(reports.iter().map(report_json).collect());
            Ok(CommandOutput::new(v, true))
        }
        Err(Error::WitnessFailed { index, report }) => {
            v["passed"] = json!(false);
            v["failed_index"] = json!(index);
            v["failed_report"] = report_json(&report);
            Ok(CommandOutput::new(v, false))
        }
        Err(e) => Err(e),
    }
}

/// Largest deviation seen for each algebraic identity.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IdentityDeviations {
    pub commutator: f64,
    pub rank_one_powers: f64,
    pub perturbed_laplacian: f64,
    pub twin_swap: f64,
    pub factorization: f64,
    pub untouched_columns: f64,
    pub entry_symmetry: f64,
    pub unitarity: f64,
}

impl IdentityDeviations {
    const LIMITS: [(&'static str, f64); 8] = [
        ("commutator", 1e-12),
        ("rank_one_powers", 1e-12),
        ("perturbed_laplacian", 1e-12),
        ("twin_swap", 1e-15),
        ("factorization", 1e-8),
        ("untouched_columns", 1e-12),
        ("entry_symmetry", 1e-9),
        ("unitarity", 1e-9),
    ];

    fn values(&self) -> [f64; 8] {
        [
            self.commutator,
            self.rank_one_powers,
            self.perturbed_laplacian,
            self.twin_swap,
            self.factorization,
            self.untouched_columns,
            self.entry_symmetry,
            self.unitarity,
        ]
    }

    pub fn passed(&self) -> bool {
        self.values()
            .iter()
            .zip(Self::LIMITS)
            .all(|(v, (_, limit))| *v < limit)
    }

    fn to_json(self) -> Value {
        let mut map = serde_json::Map::new();
        for (v, (name, limit)) in self.values().iter().zip(Self::LIMITS) {
            map.insert(
                name.into(),
                json!({ "max": round_sig(*v, 6), "limit": limit }),
            );
        }
        Value::Object(map)
    }

    fn absorb(&mut self, other: &IdentityDeviations) {
        self.commutator = self.commutator.max(other.commutator);
        self.rank_one_powers = self.rank_one_powers.max(other.rank_one_powers);
        self.perturbed_laplacian = self.perturbed_laplacian.max(other.perturbed_laplacian);
        self.twin_swap = self.twin_swap.max(other.twin_swap);
        self.factorization = self.factorization.max(other.factorization);
        self.untouched_columns = self.untouched_columns.max(other.untouched_columns);
        self.entry_symmetry = self.entry_symmetry.max(other.entry_symmetry);
        self.unitarity = self.unitarity.max(other.unitarity);
    }
}

/// Checks every twin-pair identity on `g` for one random `(alpha, t)` per pair.
pub fn identity_deviations<R: Rng + ?Sized>(
    g: &WeightedGraph,
    rng: &mut R,
) -> Result<(IdentityDeviations, usize)> {
    let n = g.n();
    let l_sym = laplacian(g);
    let l = l_sym.to_dense();
    let spectrum = laplacian_spectrum(g)?;
    let pairs = list_twin_pairs(g);
    let mut dev = IdentityDeviations::default();
    for tw in &pairs {
        let (a, b) = (tw.a, tw.b);
        let alpha: f64 = rng.random_range(-2.0..=2.0);
        let time: f64 = rng.random_range(0.0..=10.0);
        let m_sym = rank_one_m(n, a, b)?;
        let m = m_sym.to_dense();

        let mut d = IdentityDeviations {
            commutator: max_abs(&(&l * &m - &m * &l)),
            ..Default::default()
        };
        let mut power = m.clone();
        for k in 1..=6 {
            d.rank_one_powers = d
                .rank_one_powers
                .max(max_abs(&(&power - &m * 2f64.powi(k - 1))));
            power = &power * &m;
        }
        let shifted = laplacian(&perturb_edge(g, EdgePerturbation::new(a, b, alpha)?)?);
        d.perturbed_laplacian =
            max_abs(&(shifted.to_dense() - l_sym.add_scaled(alpha, &m_sym).to_dense()));
        let mut swap = RealMatrix::identity(n, n);
        swap.swap_rows(a, b);
        d.twin_swap = max_abs(&(&swap * &l * &swap - &l));

        d.factorization = verify_factorization(g, tw, alpha, &[time])?;
        let base = propagator(&spectrum, time);
        let pert = perturbed_propagator(&base, &m_sym, alpha);
        for q in (0..n).filter(|&q| q != a && q != b) {
            let col = (pert.matrix.column(q) - base.matrix.column(q))
                .map(|z| z.norm())
                .max();
            d.untouched_columns = d.untouched_columns.max(col);
            d.entry_symmetry = d
                .entry_symmetry
                .max((pert.entry(a, q) - pert.entry(b, q)).norm());
        }
        d.unitarity = unitarity_defect(&pert.matrix);
        dev.absorb(&d);
    }
    Ok((dev, pairs.len()))
}

/// Runs the identity suite on `g` (or on random graphs with a planted twin
/// pair when `g` is `None`), seeded for reproducibility.
pub fn cmd_verify_identities(
    g: Option<&WeightedGraph>,
    seed: u64,
    trials: usize,
) -> Result<CommandOutput> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total = IdentityDeviations::default();
    let mut pairs_checked = 0;
    for _ in 0..trials {
        let owned;
        let graph = match g {
            Some(g) => g,
            None => {
                let n = rng.random_range(3..=10);
                owned = random_graph_with_twins(&mut rng, n);
                &owned
            }
        };
        let (d, count) = identity_deviations(graph, &mut rng)?;
        total.absorb(&d);
        pairs_checked += count;
    }
    let passed = total.passed();
    let v = json!({
        "seed": seed,
        "trials": trials,
        "twin_pairs_checked": pairs_checked,
        "max_deviation": total.to_json(),
        "passed": passed,
    });
    Ok(CommandOutput {
        json: v,
        exit_code: if passed { EXIT_OK } else { EXIT_NUMERICAL },
    })
}
