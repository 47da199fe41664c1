//! Continuous-time quantum walks on graph Laplacians.
//!
//! The propagator `U(t) = exp(-itL)` is assembled from spectral projectors.
//! For a twin pair `(a, b)` the matrix `M = (e_a - e_b)(e_a - e_b)^T`
//! commutes with `L` and `M^2 = 2M`, so the walk on `L + alpha M` factors as
//!
//! ```text
//! U_alpha(t) = U(t) [I + (exp(-2i alpha t) - 1) / 2 * M]
//! ```
//!
//! Fidelity between a source `a` and a target `b` is `|U[b][a]|`; the
//! report's phase is `U[b][a] / |U[b][a]|`.

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use crate::error::{Error, Result};
use crate::graph::{is_twin_pair, laplacian, rank_one_m, rank_one_pair, TwinPair, WeightedGraph};
use crate::matrix::{max_abs_complex, Complex64, ComplexMatrix, SymmetricMatrix};
use crate::spectral::{eigendecompose, matrix_exp_oracle, Spectrum, DEFAULT_CLUSTER_TOL};

pub const DEFAULT_LPST_TOL: f64 = 1e-9;
pub const DEFAULT_GRID: usize = 20_000;
pub const DEFAULT_Q_MAX: u64 = 1_000_000;
pub const DEFAULT_EPSILONS: [f64; 3] = [1e-1, 1e-2, 1e-3];

/// Candidates closer than this in fidelity count as ties; the earlier wins.
const TIE_TOL: f64 = 1e-12;
const REFINE_WINDOW: f64 = 1e-10;
const REFINE_MAX_ITERS: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct Propagator {
    pub time: f64,
    pub matrix: ComplexMatrix,
}

impl Propagator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `U[row][col]`.
    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[(row, col)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransferKind {
    Lpst,
    Periodic,
    Pgst,
    None,
}

impl TransferKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            TransferKind::Lpst => "LPST",
            TransferKind::Periodic => "PERIODIC",
            TransferKind::Pgst => "PGST",
            TransferKind::None => "NONE",
        }
    }
}

impl fmt::Display for TransferKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransferReport {
    pub kind: TransferKind,
    pub from: usize,
    pub to: usize,
    pub time: f64,
    pub fidelity: f64,
    pub phase: Complex64,
    pub tolerance: f64,
}

impl fmt::Display for TransferReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}->{} at t={} (fidelity {}, tol {:e})",
            self.kind, self.from, self.to, self.time, self.fidelity, self.tolerance
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonHit {
    pub epsilon: f64,
    /// First scan index `q` reaching `1 - epsilon`, if any.
    pub q: Option<u64>,
    pub time: Option<f64>,
    pub fidelity: Option<f64>,
}

/// Best-so-far record of a scan over `t_q = (4q + 1) pi / 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct PgstWitness {
    pub from: usize,
    pub to: usize,
    pub q_max: u64,
    /// Times at which the running best fidelity improved.
    pub times: Vec<f64>,
    pub qs: Vec<u64>,
    /// Running best fidelity at each entry of `times`, strictly increasing.
    pub fidelities: Vec<f64>,
    pub epsilon_ladder: Vec<EpsilonHit>,
    /// `max_j |exp(-i mu_j t) - 1|` at the best time.
    pub alignment_defect: f64,
}

impl PgstWitness {
    pub fn best_fidelity(&self) -> f64 {
        self.fidelities.last().copied().unwrap_or(0.0)
    }

    pub fn best_time(&self) -> Option<f64> {
        self.times.last().copied()
    }

    /// Whether every requested epsilon was reached.
    pub fn complete(&self) -> bool {
        self.epsilon_ladder.iter().all(|h| h.q.is_some())
    }
}

/// `sum_j exp(-i mu_j t) E_j`. Exactly the identity at `t = 0`.
pub fn propagator(s: &Spectrum, t: f64) -> Propagator {
    let n = s.dim();
    if t == 0.0 {
        return Propagator {
            time: t,
            matrix: ComplexMatrix::identity(n, n),
        };
    }
    let mut u = ComplexMatrix::zeros(n, n);
    for (e, &mu) in s.projectors().iter().zip(s.values()) {
        let phase = Complex64::new(0.0, -mu * t).exp();
        u.zip_apply(e, |z, x| *z += phase * x);
    }
    Propagator { time: t, matrix: u }
}

/// Closed-form walk on `L + alpha M` from the walk on `L`. Assumes `M`'s
/// pair is a twin pair of the base graph; see
/// [`perturbed_propagator_validated`].
pub fn perturbed_propagator(base: &Propagator, m: &SymmetricMatrix, alpha: f64) -> Propagator {
    let n = base.dim();
    let t = base.time;
    let c = (Complex64::new(0.0, -2.0 * alpha * t).exp() - 1.0) * 0.5;
    if c == Complex64::new(0.0, 0.0) {
        return base.clone();
    }
    let mut bracket = m.to_complex() * c;
    for i in 0..n {
        bracket[(i, i)] += 1.0;
    }
    Propagator {
        time: t,
        matrix: &base.matrix * bracket,
    }
}

/// As [`perturbed_propagator`], first checking that `M`'s pair are twins in `g`.
pub fn perturbed_propagator_validated(
    base: &Propagator,
    g: &WeightedGraph,
    m: &SymmetricMatrix,
    alpha: f64,
) -> Result<Propagator> {
    let (a, b) = rank_one_pair(m).ok_or_else(|| {
        Error::InvalidArgument(
            "perturbation matrix is not of the form (e_a - e_b)(e_a - e_b)^T".into(),
        )
    })?;
    if !is_twin_pair(g, a, b)? {
        return Err(Error::TwinViolation(a, b));
    }
    Ok(perturbed_propagator(base, m, alpha))
}

/// `(|U[b][a]|, U[b][a] / |U[b][a]|)`; the phase is 1 when the entry vanishes.
pub fn fidelity(u: &Propagator, a: usize, b: usize) -> Result<(f64, Complex64)> {
    let n = u.dim();
    for v in [a, b] {
        if v >= n {
            return Err(Error::IndexOutOfRange { vertex: v, n });
        }
    }
    Ok(polar_split(u.entry(b, a)))
}

fn polar_split(z: Complex64) -> (f64, Complex64) {
    let r = z.norm();
    if r < 1e-15 {
        (r, Complex64::new(1.0, 0.0))
    } else {
        (r, z / r)
    }
}

/// Spectrum of the Laplacian of `g` with the default clustering tolerance.
pub fn laplacian_spectrum(g: &WeightedGraph) -> Result<Spectrum> {
    eigendecompose(&laplacian(g), DEFAULT_CLUSTER_TOL)
}

fn report(
    kind: TransferKind,
    from: usize,
    to: usize,
    time: f64,
    z: Complex64,
    tolerance: f64,
) -> TransferReport {
    let (fidelity, phase) = polar_split(z);
    TransferReport {
        kind,
        from,
        to,
        time,
        fidelity,
        phase,
        tolerance,
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )))
    }
}

/// Decides perfect state transfer from `a` to `b` at time `t`.
pub fn check_lpst(
    g: &WeightedGraph,
    a: usize,
    b: usize,
    t: f64,
    tol: f64,
) -> Result<TransferReport> {
    g.check_vertex(a)?;
    g.check_vertex(b)?;
    if a == b {
        return Err(Error::EqualVertices(a));
    }
    check_tol(tol)?;
    let u = propagator(&laplacian_spectrum(g)?, t);
    let z = u.entry(b, a);
    let kind = if z.norm() >= 1.0 - tol {
        TransferKind::Lpst
    } else {
        TransferKind::None
    };
    Ok(report(kind, a, b, t, z, tol))
}

/// Decides whether the walk returns to vertex `p` at time `t`.
pub fn check_periodic(g: &WeightedGraph, p: usize, t: f64, tol: f64) -> Result<TransferReport> {
    g.check_vertex(p)?;
    check_tol(tol)?;
    let u = propagator(&laplacian_spectrum(g)?, t);
    let z = u.entry(p, p);
    let kind = if z.norm() >= 1.0 - tol {
        TransferKind::Periodic
    } else {
        TransferKind::None
    };
    Ok(report(kind, p, p, t, z, tol))
}

/// `max_t |U[a][q] - U[b][q]|` for the walk on `g` itself.
pub fn mixed_pair_entry_symmetry(
    g: &WeightedGraph,
    tw: &TwinPair,
    q: usize,
    times: &[f64],
) -> Result<f64> {
    g.check_vertex(tw.a)?;
    g.check_vertex(tw.b)?;
    g.check_vertex(q)?;
    if q == tw.a || q == tw.b {
        return Err(Error::InvalidArgument(format!(
            "vertex {q} belongs to the twin pair ({}, {})",
            tw.a, tw.b
        )));
    }
    let s = laplacian_spectrum(g)?;
    Ok(times
        .iter()
        .map(|&t| {
            let u = propagator(&s, t);
            (u.entry(tw.a, q) - u.entry(tw.b, q)).norm()
        })
        .fold(0.0, f64::max))
}

/// `U[row][col](t)` as a short exponential sum.
#[derive(Debug, Clone)]
pub struct AmplitudeSeries {
    frequencies: Vec<f64>,
    weights: Vec<f64>,
}

impl AmplitudeSeries {
    pub fn new(s: &Spectrum, row: usize, col: usize) -> Self {
        let (frequencies, weights) = s
            .values()
            .iter()
            .zip(s.entry_weights(row, col))
            .filter(|(_, w)| *w != 0.0)
            .map(|(&mu, w)| (mu, w))
            .unzip();
        Self {
            frequencies,
            weights,
        }
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        self.frequencies
            .iter()
            .zip(&self.weights)
            .map(|(&mu, &w)| Complex64::new(0.0, -mu * t).exp() * w)
            .sum()
    }
}

fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut iters = 0;
    while hi - lo >= REFINE_WINDOW && iters < REFINE_MAX_ITERS {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
        iters += 1;
    }
    let mid = 0.5 * (lo + hi);
    (mid, f(mid))
}

/// Searches `(0, t_max]` for the time of largest fidelity from `a` to `b`.
///
/// The uniform grid locates every local maximum; each is refined by
/// golden-section search. Ties within `1e-12` resolve to the earliest time.
pub fn pst_time_scan(
    g: &WeightedGraph,
    a: usize,
    b: usize,
    t_max: f64,
    grid: usize,
) -> Result<TransferReport> {
    g.check_vertex(a)?;
    g.check_vertex(b)?;
    if t_max.is_nan() || t_max <= 0.0 || grid < 2 {
        return Err(Error::InvalidArgument(format!(
            "scan needs t_max > 0 and grid >= 2, got t_max={t_max}, grid={grid}"
        )));
    }
    let s = laplacian_spectrum(g)?;
    let series = AmplitudeSeries::new(&s, b, a);
    let fid = |t: f64| series.eval(t).norm();

    let times: Vec<f64> = (0..=grid).map(|i| t_max * i as f64 / grid as f64).collect();
    let values: Vec<f64> = times.iter().map(|&t| fid(t)).collect();

    let mut best: Option<(f64, f64)> = None;
    for i in 1..=grid {
        let left_ok = i == 1 || values[i] >= values[i - 1];
        let right_ok = i == grid || values[i] >= values[i + 1];
        if !(left_ok && right_ok) {
            continue;
        }
        // never refine into t -> 0, where the walk is trivially at its source
        let lo = times[(i - 1).max(1)];
        let hi = times[(i + 1).min(grid)];
        let (mut t, mut f) = (times[i], values[i]);
        if hi > lo {
            let (rt, rf) = golden_max(fid, lo, hi);
            if rf > f {
                t = rt;
                f = rf;
            }
        }
        match best {
            Some((_, bf)) if f <= bf + TIE_TOL => {}
            _ => best = Some((t, f)),
        }
    }
    let (t, _) = best.expect("grid has at least one local maximum");
    let z = series.eval(t);
    let kind = match (a == b, z.norm() >= 1.0 - DEFAULT_LPST_TOL) {
        (false, true) => TransferKind::Lpst,
        (true, true) => TransferKind::Periodic,
        _ => TransferKind::None,
    };
    Ok(report(kind, a, b, t, z, DEFAULT_LPST_TOL))
}

/// Time `(4q + 1) pi / 2`.
pub fn odd_quarter_time(q: u64) -> f64 {
    (4 * q + 1) as f64 * FRAC_PI_2
}

/// Scans `t_q = (4q + 1) pi / 2`, `q = 0..=q_max`, for fidelity from `a`
/// to `b` approaching 1. With `a == b` this measures almost periodicity.
pub fn pgst_scan(
    g: &WeightedGraph,
    a: usize,
    b: usize,
    q_max: u64,
    epsilons: &[f64],
) -> Result<PgstWitness> {
    g.check_vertex(a)?;
    g.check_vertex(b)?;
    if q_max < 1 {
        return Err(Error::InvalidArgument("q_max must be at least 1".into()));
    }
    if epsilons.iter().any(|&e| !(e > 0.0 && e < 1.0)) || epsilons.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(Error::InvalidArgument(
            "epsilons must be strictly decreasing in (0, 1)".into(),
        ));
    }
    let s = laplacian_spectrum(g)?;
    let series = AmplitudeSeries::new(&s, b, a);

    let mut witness = PgstWitness {
        from: a,
        to: b,
        q_max,
        times: Vec::new(),
        qs: Vec::new(),
        fidelities: Vec::new(),
        epsilon_ladder: epsilons
            .iter()
            .map(|&epsilon| EpsilonHit {
                epsilon,
                q: None,
                time: None,
                fidelity: None,
            })
            .collect(),
        alignment_defect: f64::NAN,
    };
    let mut best = f64::NEG_INFINITY;
    let mut next_eps = 0;
    for q in 0..=q_max {
        let t = odd_quarter_time(q);
        let f = series.eval(t).norm();
        if f > best {
            best = f;
            witness.times.push(t);
            witness.qs.push(q);
            witness.fidelities.push(f);
            // epsilons decrease, so hits occur in ladder order
            while next_eps < epsilons.len() && f >= 1.0 - epsilons[next_eps] {
                let hit = &mut witness.epsilon_ladder[next_eps];
                hit.q = Some(q);
                hit.time = Some(t);
                hit.fidelity = Some(f);
                next_eps += 1;
            }
        }
    }
    if let Some(t) = witness.best_time() {
        witness.alignment_defect = s
            .values()
            .iter()
            .map(|&mu| (Complex64::new(0.0, -mu * t).exp() - 1.0).norm())
            .fold(0.0, f64::max);
    }
    Ok(witness)
}

/// `max_t ||closed-form perturbed propagator - exp(-it(L + alpha M))||_max`.
pub fn verify_factorization(
    g: &WeightedGraph,
    tw: &TwinPair,
    alpha: f64,
    times: &[f64],
) -> Result<f64> {
    if !is_twin_pair(g, tw.a, tw.b)? {
        return Err(Error::TwinViolation(tw.a, tw.b));
    }
    let l = laplacian(g);
    let m = rank_one_m(g.n(), tw.a, tw.b)?;
    let perturbed = l.add_scaled(alpha, &m);
    let s = eigendecompose(&l, DEFAULT_CLUSTER_TOL)?;
    let mut worst: f64 = 0.0;
    for &t in times {
        let closed = perturbed_propagator(&propagator(&s, t), &m, alpha);
        let oracle = matrix_exp_oracle(&perturbed, t);
        worst = worst.max(max_abs_complex(&(closed.matrix - oracle)));
    }
    Ok(worst)
}
