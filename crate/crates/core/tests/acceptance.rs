//! Acceptance gate: one pass/fail line per criterion, non-zero exit on any failure.

use std::collections::BTreeSet;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use twinwalk::circulant::{
    adjacency_eigenvalues, almost_periodicity_applicable, build_circulant, is_gcd_set,
    mod4_condition, twin_condition, CirculantSpec,
};
use twinwalk::families::complete_graph;
use twinwalk::graph::{
    build_graph, laplacian, list_twin_pairs, perturb_edge, random_graph_with_twins, rank_one_m,
    twin_pair, EdgePerturbation, WeightedGraph,
};
use twinwalk::matrix::{max_abs, max_abs_complex, SymmetricMatrix};
use twinwalk::spectral::{eigendecompose, matrix_exp_oracle, DEFAULT_CLUSTER_TOL};
use twinwalk::walk::{
    check_lpst, check_periodic, laplacian_spectrum, mixed_pair_entry_symmetry, pgst_scan,
    propagator, verify_factorization, AmplitudeSeries, TransferKind, DEFAULT_EPSILONS,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn planted_graphs(seed: u64, count: usize) -> Vec<WeightedGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.random_range(3..=12);
            random_graph_with_twins(&mut rng, n)
        })
        .collect()
}

fn factorization_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for g in planted_graphs(101, 30) {
        let n = g.n();
        let tw = twin_pair(&g, n - 2, n - 1)
            .map_err(e)?
            .ok_or_else(|| format!("planted pair ({}, {}) is not twin", n - 2, n - 1))?;
        let alpha = rng.random_range(-2.0..=2.0);
        let times: Vec<f64> = (0..10).map(|_| rng.random_range(0.0..=10.0)).collect();
        worst = worst.max(verify_factorization(&g, &tw, alpha, &times).map_err(e)?);
    }
    ensure(worst < 1e-8, || format!("max deviation {worst:e} >= 1e-8"))?;
    Ok(format!("30 graphs x 10 times, max deviation {worst:.2e}"))
}

fn commutation() -> Outcome {
    let mut graphs = planted_graphs(101, 30);
    graphs.push(complete_graph(8).map_err(e)?);
    graphs.push(build_circulant(
        &CirculantSpec::new(16, [1, 7, 9, 15]).map_err(e)?,
    ));
    let mut worst = 0.0f64;
    let mut pairs = 0;
    for g in &graphs {
        let l = laplacian(g).to_dense();
        for tw in list_twin_pairs(g) {
            let m = rank_one_m(g.n(), tw.a, tw.b).map_err(e)?.to_dense();
            worst = worst.max(max_abs(&(&l * &m - &m * &l)));
            pairs += 1;
        }
    }
    ensure(worst < 1e-12, || {
        format!("twin commutator {worst:e} >= 1e-12")
    })?;

    // (0, 3) is swapped by the reflection of P_4 but is not a twin pair
    let p4 = build_graph(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)]).map_err(e)?;
    ensure(twin_pair(&p4, 0, 3).map_err(e)?.is_none(), || {
        "P_4 (0,3) unexpectedly twin".into()
    })?;
    let l = laplacian(&p4).to_dense();
    let m = rank_one_m(4, 0, 3).map_err(e)?.to_dense();
    let control = max_abs(&(&l * &m - &m * &l));
    ensure(control > 0.5, || {
        format!("P_4 control commutator {control} <= 0.5")
    })?;
    Ok(format!(
        "{pairs} twin pairs, max {worst:.2e}; P_4 (0,3) control {control}"
    ))
}

fn perfect_matching(rng: &mut ChaCha8Rng, n: usize) -> Vec<(usize, usize)> {
    let mut v: Vec<usize> = (0..n).collect();
    v.shuffle(rng);
    v.chunks(2)
        .map(|c| (c[0].min(c[1]), c[0].max(c[1])))
        .collect()
}

fn check_k_minus_matching(
    size: usize,
    matching: &[(usize, usize)],
    tol: f64,
) -> Result<f64, String> {
    let mut g = complete_graph(size).map_err(e)?;
    let mut worst = 1.0f64;
    // successive closure: every prefix of the matching is itself a witness
    for (k, &(a, b)) in matching.iter().enumerate() {
        g = perturb_edge(&g, EdgePerturbation::new(a, b, -1.0).map_err(e)?).map_err(e)?;
        let removed = &matching[..=k];
        let used: BTreeSet<usize> = removed.iter().flat_map(|&(x, y)| [x, y]).collect();
        for &(x, y) in removed {
            let r = check_lpst(&g, x, y, FRAC_PI_2, tol).map_err(e)?;
            ensure(r.kind == TransferKind::Lpst, || {
                format!(
                    "K_{size} minus {removed:?}: ({x},{y}) fidelity {}",
                    r.fidelity
                )
            })?;
            worst = worst.min(r.fidelity);
        }
        for p in (0..size).filter(|p| !used.contains(p)) {
            let r = check_periodic(&g, p, FRAC_PI_2, tol).map_err(e)?;
            ensure(r.kind == TransferKind::Periodic, || {
                format!(
                    "K_{size} minus {removed:?}: vertex {p} not periodic ({})",
                    r.fidelity
                )
            })?;
            worst = worst.min(r.fidelity);
        }
    }
    Ok(worst)
}

fn k4n_matchings() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 1.0f64;
    let mut tested = 0;
    for size in [4, 8, 12] {
        let mut matchings = vec![(0..size / 2).map(|i| (i, i + size / 2)).collect::<Vec<_>>()];
        matchings.extend((0..5).map(|_| perfect_matching(&mut rng, size)));
        for m in &matchings {
            worst = worst.min(check_k_minus_matching(size, m, 1e-9)?);
            tested += 1;
        }
    }
    let k6 = perturb_edge(
        &complete_graph(6).map_err(e)?,
        EdgePerturbation::new(0, 1, -1.0).map_err(e)?,
    )
    .map_err(e)?;
    let control = check_lpst(&k6, 0, 1, FRAC_PI_2, 1e-9).map_err(e)?.fidelity;
    ensure(control < 0.999, || {
        format!("K_6 minus edge control fidelity {control} >= 0.999")
    })?;
    Ok(format!(
        "{tested} matchings, min fidelity {worst:.15}; K_6 control {control:.6}"
    ))
}

fn set_weight(g: &WeightedGraph, a: usize, b: usize, w: f64) -> Result<WeightedGraph, String> {
    perturb_edge(
        g,
        EdgePerturbation::new(a, b, w - g.weight(a, b)).map_err(e)?,
    )
    .map_err(e)
}

fn quarter_weight() -> Outcome {
    let tau = 2.0 * PI;
    let k3 = set_weight(&complete_graph(3).map_err(e)?, 0, 2, 0.25)?;
    let mut k5 = complete_graph(5).map_err(e)?;
    k5 = set_weight(&k5, 0, 2, 0.25)?;
    k5 = set_weight(&k5, 1, 3, 0.25)?;
    let mut worst = 1.0f64;
    for (name, g, pairs) in [
        ("K_3", &k3, vec![(0, 2)]),
        ("K_5", &k5, vec![(0, 2), (1, 3)]),
    ] {
        let used: BTreeSet<usize> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
        for &(a, b) in &pairs {
            let r = check_lpst(g, a, b, tau, 1e-9).map_err(e)?;
            ensure(r.kind == TransferKind::Lpst, || {
                format!("{name} ({a},{b}) fidelity {}", r.fidelity)
            })?;
            worst = worst.min(r.fidelity);
        }
        for p in (0..g.n()).filter(|p| !used.contains(p)) {
            let r = check_periodic(g, p, tau, 1e-9).map_err(e)?;
            ensure(r.kind == TransferKind::Periodic, || {
                format!("{name} vertex {p} not periodic")
            })?;
            worst = worst.min(r.fidelity);
        }
    }
    Ok(format!("min fidelity {worst:.15}"))
}

fn cycle_with_chord() -> Outcome {
    let c4 = build_graph(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (0, 3, 1.0)]).map_err(e)?;
    let g = perturb_edge(&c4, EdgePerturbation::new(0, 2, 2.0).map_err(e)?).map_err(e)?;
    let r = check_lpst(&g, 0, 2, FRAC_PI_2, 1e-9).map_err(e)?;
    ensure(r.kind == TransferKind::Lpst, || {
        format!("fidelity {}", r.fidelity)
    })?;
    Ok(format!(
        "fidelity {:.15}, phase {:.6}{:+.6}i",
        r.fidelity, r.phase.re, r.phase.im
    ))
}

fn complete_graph_bound() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut detail = Vec::new();
    for n in 4..=10usize {
        let g = complete_graph(n).map_err(e)?;
        let s = laplacian_spectrum(&g).map_err(e)?;
        let amp = AmplitudeSeries::new(&s, 1, 0);
        let bound = 2.0 / n as f64 + 1e-9;
        let max = (0..10_000)
            .map(|_| amp.eval(rng.random_range(0.0..=2.0 * PI)).norm())
            .fold(0.0, f64::max);
        ensure(max <= bound, || {
            format!("K_{n}: max fidelity {max} > {bound}")
        })?;
        detail.push(format!("K_{n} {max:.6}"));
    }
    Ok(detail.join(", "))
}

fn mixed_pair_obstruction() -> Outcome {
    let g = perturb_edge(
        &complete_graph(8).map_err(e)?,
        EdgePerturbation::new(0, 4, -1.0).map_err(e)?,
    )
    .map_err(e)?;
    let tw = twin_pair(&g, 0, 4)
        .map_err(e)?
        .ok_or("(0,4) is not a twin pair")?;
    let s = laplacian_spectrum(&g).map_err(e)?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let times: Vec<f64> = (0..100).map(|_| rng.random_range(0.0..=10.0)).collect();
    let mut diff = 0.0f64;
    let mut fid = 0.0f64;
    for q in [1, 2, 3, 5, 6, 7] {
        diff = diff.max(mixed_pair_entry_symmetry(&g, &tw, q, &times).map_err(e)?);
        let amp = AmplitudeSeries::new(&s, q, 0);
        fid = times
            .iter()
            .map(|&t| amp.eval(t).norm())
            .fold(fid, f64::max);
    }
    ensure(diff < 1e-9, || format!("entry difference {diff:e} >= 1e-9"))?;
    let bound = FRAC_1_SQRT_2 + 1e-6;
    ensure(fid <= bound, || format!("fidelity 0->q {fid} > {bound}"))?;
    Ok(format!(
        "max |U[0][q]-U[4][q]| {diff:.2e}, max fidelity 0->q {fid:.6}"
    ))
}

fn circulant_successive_edges() -> Outcome {
    let mut g = build_circulant(&CirculantSpec::new(8, [1, 3, 5, 7]).map_err(e)?);
    let added = [(0, 4), (1, 5), (2, 6), (3, 7)];
    let mut worst = 1.0f64;
    for k in 0..added.len() {
        let (a, b) = added[k];
        g = perturb_edge(&g, EdgePerturbation::new(a, b, 1.0).map_err(e)?).map_err(e)?;
        for &(x, y) in &added[..=k] {
            let r = check_lpst(&g, x, y, FRAC_PI_2, 1e-9).map_err(e)?;
            ensure(r.kind == TransferKind::Lpst, || {
                format!("step {k}: ({x},{y}) fidelity {}", r.fidelity)
            })?;
            worst = worst.min(r.fidelity);
        }
    }
    Ok(format!("4 steps, min fidelity {worst:.15}"))
}

fn pgst_scan_criterion() -> Outcome {
    let spec = CirculantSpec::new(16, [1, 7, 9, 15]).map_err(e)?;
    ensure(spec.n().is_power_of_two(), || "n not a power of two".into())?;
    ensure(twin_condition(&spec).map_err(e)?, || "S != n/2 - S".into())?;
    ensure(mod4_condition(&spec), || {
        "mod-4 class condition fails".into()
    })?;
    ensure(almost_periodicity_applicable(&spec), || {
        "not applicable".into()
    })?;
    let g = perturb_edge(
        &build_circulant(&spec),
        EdgePerturbation::new(0, 8, 1.0).map_err(e)?,
    )
    .map_err(e)?;
    let w = pgst_scan(&g, 0, 8, 1_000_000, &DEFAULT_EPSILONS).map_err(e)?;
    ensure(w.fidelities.windows(2).all(|p| p[0] <= p[1]), || {
        "best-so-far fidelity decreased".into()
    })?;
    ensure(w.qs.windows(2).all(|p| p[0] < p[1]), || {
        "improvement indices not increasing".into()
    })?;
    for (&q, &t) in w.qs.iter().zip(&w.times) {
        let want = (4 * q + 1) as f64 * FRAC_PI_2;
        ensure((t - want).abs() <= 1e-9 * want.max(1.0), || {
            format!("time {t} not (4*{q}+1) pi/2")
        })?;
    }
    let hit = w
        .epsilon_ladder
        .iter()
        .find(|h| h.epsilon == 1e-3)
        .and_then(|h| h.q.zip(h.fidelity))
        .ok_or("no time with fidelity >= 1 - 1e-3")?;
    ensure(hit.1 >= 1.0 - 1e-3, || {
        format!("ladder fidelity {} < 0.999", hit.1)
    })?;
    Ok(format!(
        "1e-3 reached at q={} (fidelity {:.6}); best {:.9} over q <= 1e6",
        hit.0,
        hit.1,
        w.best_fidelity()
    ))
}

fn symmetric_sets(n: u64) -> Vec<Vec<i64>> {
    let reps: Vec<u64> = (1..=n / 2).collect();
    (0..1u32 << reps.len())
        .map(|mask| {
            let mut s = Vec::new();
            for (i, &x) in reps.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    s.push(x as i64);
                    s.push(-(x as i64));
                }
            }
            s
        })
        .collect()
}

fn integral_iff_gcd_set() -> Outcome {
    let mut sets = 0;
    let mut integral = 0;
    let mut counterexamples = Vec::new();
    for n in 3..=10u64 {
        for s in symmetric_sets(n) {
            let spec = CirculantSpec::new(n, s).map_err(e)?;
            let is_int = adjacency_eigenvalues(&spec)
                .iter()
                .all(|x| (x - x.round()).abs() <= 1e-6);
            let gcd = is_gcd_set(n, spec.connection_set());
            sets += 1;
            integral += is_int as usize;
            if is_int != gcd {
                counterexamples.push(format!("n={n} S={:?}", spec.connection_set()));
            }
        }
    }
    ensure(counterexamples.is_empty(), || {
        format!("counterexamples: {counterexamples:?}")
    })?;
    Ok(format!(
        "{sets} connection sets, {integral} integral, 0 counterexamples"
    ))
}

fn random_symmetric(rng: &mut ChaCha8Rng, k: usize) -> SymmetricMatrix {
    let n = rng.random_range(1..=16);
    let mut m = SymmetricMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            let x = match k % 3 {
                // small integers give repeated eigenvalues
                0 => rng.random_range(-2i32..=2) as f64,
                1 => rng.random_range(-1.0..=1.0),
                _ => rng.random_range(-50.0..=50.0),
            };
            m.set(i, j, x);
        }
    }
    m
}

fn spectral_invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst_dev = 0.0f64;
    let mut worst_check = 0.0f64;
    for k in 0..100 {
        let m = random_symmetric(&mut rng, k);
        let s = eigendecompose(&m, DEFAULT_CLUSTER_TOL).map_err(e)?;
        let c = s.check(&m);
        ensure(c.holds(), || format!("matrix {k} (n={}): {c:?}", m.dim()))?;
        worst_check = worst_check.max(c.idempotency.max(c.orthogonality).max(c.completeness));
        for _ in 0..3 {
            let t = rng.random_range(0.0..=10.0);
            let dev = max_abs_complex(&(propagator(&s, t).matrix - matrix_exp_oracle(&m, t)));
            ensure(dev < 1e-8, || {
                format!("matrix {k}: oracle deviation {dev:e} at t={t}")
            })?;
            worst_dev = worst_dev.max(dev);
        }
    }
    Ok(format!("100 matrices, max projector defect {worst_check:.2e}, max oracle deviation {worst_dev:.2e}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("factorization identity", factorization_identity),
        ("commutation with rank-one term", commutation),
        ("K_4n minus matchings", k4n_matchings),
        ("quarter-weight construction", quarter_weight),
        ("C_4 plus weighted chord", cycle_with_chord),
        ("complete-graph fidelity bound", complete_graph_bound),
        ("mixed-pair obstruction", mixed_pair_obstruction),
        (
            "circulant successive antipodal edges",
            circulant_successive_edges,
        ),
        ("pretty good transfer scan", pgst_scan_criterion),
        ("integral iff gcd-set", integral_iff_gcd_set),
        ("spectral invariants", spectral_invariants),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(format!(
                "panicked: {:?}",
                p.downcast_ref::<String>()
                    .map(String::as_str)
                    .or(p.downcast_ref::<&str>().copied())
            ))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("[PASS] {:>2} {name} ({secs:.2}s): {detail}", i + 1),
            Err(why) => {
                failures += 1;
                println!("[FAIL] {:>2} {name} ({secs:.2}s): {why}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
