//! Graph constructions that carry known transfer witnesses.
//!
//! Each generator returns the perturbed graph together with the witnesses it
//! is expected to admit. [`verify_family`] recomputes every witness through
//! the walk engine; nothing here is taken on faith.

use std::collections::BTreeSet;
use std::f64::consts::{FRAC_PI_2, PI};

use log::warn;

use crate::circulant::{
    almost_periodicity_applicable, build_circulant, is_gcd_set, twin_condition, CirculantSpec,
};
use crate::error::{Error, Result};
use crate::graph::{build_graph, is_twin_pair, perturb_edge, EdgePerturbation, WeightedGraph};
use crate::spectral::{is_integral_spectrum, DEFAULT_INT_TOL};
use crate::walk::{
    check_lpst, check_periodic, laplacian_spectrum, pgst_scan, TransferKind, TransferReport,
    DEFAULT_EPSILONS, DEFAULT_Q_MAX,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectedWitness {
    pub kind: TransferKind,
    pub from: usize,
    pub to: usize,
    /// Certification time; for `Pgst` the first time of the scanned sequence.
    pub time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyInstance {
    pub graph: WeightedGraph,
    pub expected_witnesses: Vec<ExpectedWitness>,
    pub provenance: String,
    pub warnings: Vec<String>,
}

pub fn complete_graph(n: usize) -> Result<WeightedGraph> {
    let mut edges = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for u in 0..n {
        for v in u + 1..n {
            edges.push((u, v, 1.0));
        }
    }
    build_graph(n, &edges)
}

fn check_disjoint(n: usize, pairs: &[(usize, usize)]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for &(a, b) in pairs {
        for v in [a, b] {
            if v >= n {
                return Err(Error::IndexOutOfRange { vertex: v, n });
            }
        }
        if a == b {
            return Err(Error::EqualVertices(a));
        }
        for v in [a, b] {
            if !seen.insert(v) {
                return Err(Error::NotDisjoint(v));
            }
        }
    }
    Ok(())
}

fn touched(pairs: &[(usize, usize)]) -> BTreeSet<usize> {
    pairs.iter().flat_map(|&(a, b)| [a, b]).collect()
}

fn witnesses_for(
    n: usize,
    pairs: &[(usize, usize)],
    kind: TransferKind,
    time: f64,
    periodic_rest: bool,
) -> Vec<ExpectedWitness> {
    let mut out: Vec<ExpectedWitness> = pairs
        .iter()
        .map(|&(a, b)| ExpectedWitness {
            kind,
            from: a,
            to: b,
            time,
        })
        .collect();
    if periodic_rest {
        let used = touched(pairs);
        out.extend(
            (0..n)
                .filter(|p| !used.contains(p))
                .map(|p| ExpectedWitness {
                    kind: TransferKind::Periodic,
                    from: p,
                    to: p,
                    time,
                }),
        );
    }
    out
}

/// `K_size` with the edges of `matching` removed.
///
/// When `size` is a multiple of 4 every removed pair is expected to transfer
/// perfectly at `pi/2` and every untouched vertex to be periodic there.
/// Other sizes still yield the graph, with a warning and no witnesses.
pub fn k4n_remove_matching(size: usize, matching: &[(usize, usize)]) -> Result<FamilyInstance> {
    check_disjoint(size, matching)?;
    let mut g = complete_graph(size)?;
    for &(a, b) in matching {
        g = perturb_edge(&g, EdgePerturbation::new(a, b, -1.0)?)?;
    }
    let mut warnings = Vec::new();
    let expected_witnesses = if size.is_multiple_of(4) {
        witnesses_for(size, matching, TransferKind::Lpst, FRAC_PI_2, true)
    } else {
        let msg = Error::SizeNotMultipleOf4(size).to_string();
        warn!("{msg}; no witnesses expected");
        warnings.push(msg);
        Vec::new()
    };
    Ok(FamilyInstance {
        graph: g,
        expected_witnesses,
        provenance: format!("K_{size} minus a matching of {} edges", matching.len()),
        warnings,
    })
}

/// Resets the weight of the twin edge `{a, b}` of a Laplacian-integral graph
/// to `1/4`; transfer is then expected between `a` and `b` at `2 pi`.
pub fn quarter_weight_edge(g: &WeightedGraph, a: usize, b: usize) -> Result<FamilyInstance> {
    quarter_weight_edges(g, &[(a, b)])
}

/// Applies [`quarter_weight_edge`] to disjoint pairs one after another.
///
/// Integrality is required of `g` only; each later pair must be a twin pair
/// of the graph produced so far.
pub fn quarter_weight_edges(g: &WeightedGraph, pairs: &[(usize, usize)]) -> Result<FamilyInstance> {
    check_disjoint(g.n(), pairs)?;
    if !is_integral_spectrum(&laplacian_spectrum(g)?, DEFAULT_INT_TOL) {
        return Err(Error::NotIntegral);
    }
    let tau = 2.0 * PI;
    let mut current = g.clone();
    for &(a, b) in pairs {
        if !is_twin_pair(&current, a, b)? {
            return Err(Error::NotTwins(a, b));
        }
        let alpha = 0.25 - current.weight(a, b);
        // exp(-2 i alpha tau) = -1 needs 2 alpha tau / pi = 4 alpha to be an odd integer
        let k = 2.0 * alpha * tau / PI;
        if (k - k.round()).abs() > 1e-9 || (k.round() as i64).rem_euclid(2) != 1 {
            return Err(Error::PreconditionFailed(format!(
                "2 alpha tau / pi = {k} is not an odd integer for edge ({a}, {b})"
            )));
        }
        current = perturb_edge(&current, EdgePerturbation::new(a, b, alpha)?)?;
    }
    Ok(FamilyInstance {
        expected_witnesses: witnesses_for(g.n(), pairs, TransferKind::Lpst, tau, true),
        graph: current,
        provenance: format!("quarter-weight twin edges on {} pair(s)", pairs.len()),
        warnings: Vec::new(),
    })
}

/// Adds a unit edge on each antipodal pair `(x, x + n/2)` of a circulant.
///
/// Integral circulants (gcd connection sets) are expected to transfer
/// perfectly at `pi/2`; the rest are expected to show pretty good transfer
/// along `(4q + 1) pi / 2`.
pub fn circulant_twin_edge_family(
    spec: &CirculantSpec,
    pairs: &[(usize, usize)],
) -> Result<FamilyInstance> {
    let n = spec.n() as usize;
    if !almost_periodicity_applicable(spec) {
        return Err(Error::PreconditionFailed(
            "almost periodicity needs n a power of two and |S ∩ S_n(d)| ≡ 0 mod 4".into(),
        ));
    }
    if !twin_condition(spec)? {
        return Err(Error::PreconditionFailed(
            "twin condition S = n/2 - S".into(),
        ));
    }
    let half = n / 2;
    let normalized: Vec<(usize, usize)> =
        pairs.iter().map(|&(x, y)| (x.min(y), x.max(y))).collect();
    for &(x, y) in &normalized {
        if y >= n || y - x != half {
            return Err(Error::PreconditionFailed(format!(
                "pair ({x}, {y}) is not of the form (x, x + {half})"
            )));
        }
    }
    check_disjoint(n, &normalized).map_err(|e| Error::PreconditionFailed(e.to_string()))?;

    let mut g = build_circulant(spec);
    for &(x, y) in &normalized {
        if g.weight(x, y) != 0.0 {
            return Err(Error::PreconditionFailed(format!(
                "({x}, {y}) is already an edge"
            )));
        }
        g = perturb_edge(&g, EdgePerturbation::new(x, y, 1.0)?)?;
    }
    let integral = is_gcd_set(spec.n(), spec.connection_set());
    let expected_witnesses = if integral {
        witnesses_for(n, &normalized, TransferKind::Lpst, FRAC_PI_2, true)
    } else {
        witnesses_for(n, &normalized, TransferKind::Pgst, FRAC_PI_2, false)
    };
    Ok(FamilyInstance {
        graph: g,
        expected_witnesses,
        provenance: format!(
            "Cay(Z_{}, {:?}) plus {} antipodal edge(s), {}",
            spec.n(),
            spec.connection_set(),
            normalized.len(),
            if integral { "integral" } else { "non-integral" }
        ),
        warnings: Vec::new(),
    })
}

/// Re-derives every expected witness. PGST witnesses use the default
/// epsilon ladder and `q_max`.
pub fn verify_family(fi: &FamilyInstance, tol: f64) -> Result<Vec<TransferReport>> {
    verify_family_with(fi, tol, DEFAULT_Q_MAX, &DEFAULT_EPSILONS)
}

pub fn verify_family_with(
    fi: &FamilyInstance,
    tol: f64,
    q_max: u64,
    epsilons: &[f64],
) -> Result<Vec<TransferReport>> {
    let mut reports = Vec::with_capacity(fi.expected_witnesses.len());
    for (index, w) in fi.expected_witnesses.iter().enumerate() {
        let report = match w.kind {
            TransferKind::Lpst => check_lpst(&fi.graph, w.from, w.to, w.time, tol)?,
            TransferKind::Periodic => check_periodic(&fi.graph, w.from, w.time, tol)?,
            TransferKind::Pgst => pgst_report(&fi.graph, w.from, w.to, q_max, epsilons)?,
            TransferKind::None => continue,
        };
        if report.kind != w.kind {
            return Err(Error::WitnessFailed {
                index,
                report: Box::new(report),
            });
        }
        reports.push(report);
    }
    Ok(reports)
}

fn pgst_report(
    g: &WeightedGraph,
    a: usize,
    b: usize,
    q_max: u64,
    epsilons: &[f64],
) -> Result<TransferReport> {
    let witness = pgst_scan(g, a, b, q_max, epsilons)?;
    let smallest = epsilons.last().copied().unwrap_or(1.0);
    let time = witness
        .epsilon_ladder
        .last()
        .and_then(|h| h.time)
        .or(witness.best_time())
        .unwrap_or(FRAC_PI_2);
    let spectrum = laplacian_spectrum(g)?;
    let z = crate::walk::AmplitudeSeries::new(&spectrum, b, a).eval(time);
    let fidelity = z.norm();
    Ok(TransferReport {
        kind: if witness.complete() {
            TransferKind::Pgst
        } else {
            TransferKind::None
        },
        from: a,
        to: b,
        time,
        fidelity,
        phase: if fidelity < 1e-15 {
            1.0.into()
        } else {
            z / fidelity
        },
        tolerance: smallest,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lpst_pairs(fi: &FamilyInstance) -> Vec<(usize, usize)> {
        fi.expected_witnesses
            .iter()
            .filter(|w| w.kind == TransferKind::Lpst)
            .map(|w| (w.from, w.to))
            .collect()
    }

    #[test]
    fn complete_graph_examples() {
        assert_eq!(complete_graph(3).unwrap().edge_count(), 3);
        assert_eq!(complete_graph(8).unwrap().edge_count(), 28);
        let l = crate::graph::laplacian(&complete_graph(4).unwrap()).to_dense();
        let expected = nalgebra::DMatrix::from_fn(4, 4, |i, j| if i == j { 3.0 } else { -1.0 });
        assert_eq!(l, expected);
        assert!(complete_graph(0).is_err());
    }

    #[test]
    fn k8_single_edge() {
        let fi = k4n_remove_matching(8, &[(0, 4)]).unwrap();
        assert_eq!(lpst_pairs(&fi), vec![(0, 4)]);
        assert_eq!(fi.expected_witnesses.len(), 1 + 6);
        let reports = verify_family(&fi, 1e-9).unwrap();
        assert_eq!(reports.len(), 7);
    }

    #[test]
    fn k8_full_matching() {
        let m = [(0, 4), (1, 5), (2, 6), (3, 7)];
        let fi = k4n_remove_matching(8, &m).unwrap();
        assert_eq!(fi.graph.edge_count(), 24);
        let reports = verify_family(&fi, 1e-9).unwrap();
        assert_eq!(
            reports
                .iter()
                .filter(|r| r.kind == TransferKind::Lpst)
                .count(),
            4
        );
    }

    #[test]
    fn k4_single_edge() {
        let fi = k4n_remove_matching(4, &[(0, 1)]).unwrap();
        assert!(verify_family(&fi, 1e-9).is_ok());
    }

    #[test]
    fn matching_errors() {
        assert_eq!(
            k4n_remove_matching(8, &[(0, 1), (1, 2)]),
            Err(Error::NotDisjoint(1))
        );
        let fi = k4n_remove_matching(6, &[(0, 1)]).unwrap();
        assert!(fi.expected_witnesses.is_empty());
        assert_eq!(fi.warnings.len(), 1);
        let r = check_lpst(&fi.graph, 0, 1, FRAC_PI_2, 1e-9).unwrap();
        assert_eq!(r.kind, TransferKind::None);
    }

    #[test]
    fn quarter_weight_examples() {
        let k3 = complete_graph(3).unwrap();
        let fi = quarter_weight_edge(&k3, 0, 2).unwrap();
        assert_eq!(fi.graph.weight(0, 2), 0.25);
        assert_eq!(verify_family(&fi, 1e-9).unwrap().len(), 2);

        let k5 = complete_graph(5).unwrap();
        let fi = quarter_weight_edges(&k5, &[(0, 2), (1, 3)]).unwrap();
        assert_eq!(lpst_pairs(&fi), vec![(0, 2), (1, 3)]);
        let reports = verify_family(&fi, 1e-9).unwrap();
        assert_eq!(
            reports
                .iter()
                .filter(|r| r.kind == TransferKind::Lpst)
                .count(),
            2
        );

        let c4 = crate::circulant::build_circulant(&CirculantSpec::new(4, [1, 3]).unwrap());
        let fi = quarter_weight_edge(&c4, 0, 2).unwrap();
        assert_eq!(fi.graph.weight(0, 2), 0.25);
        assert!(verify_family(&fi, 1e-9).is_ok());
    }

    #[test]
    fn quarter_weight_errors() {
        let c5 = crate::circulant::build_circulant(&CirculantSpec::new(5, [1, 4]).unwrap());
        assert_eq!(quarter_weight_edge(&c5, 0, 2), Err(Error::NotIntegral));
        let p3 = build_graph(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        // P_3 spectrum {0, 1, 3} is integral; (0, 1) are not twins
        assert_eq!(quarter_weight_edge(&p3, 0, 1), Err(Error::NotTwins(0, 1)));
        assert!(quarter_weight_edge(&p3, 0, 2).is_ok());
        let k4 = complete_graph(4).unwrap();
        assert_eq!(
            quarter_weight_edges(&k4, &[(0, 1), (1, 2)]),
            Err(Error::NotDisjoint(1))
        );
    }

    #[test]
    fn circulant_family_examples() {
        let sp = CirculantSpec::new(8, [1, 3, 5, 7]).unwrap();
        let fi = circulant_twin_edge_family(&sp, &[(0, 4)]).unwrap();
        assert_eq!(lpst_pairs(&fi), vec![(0, 4)]);
        assert!(verify_family(&fi, 1e-9).is_ok());

        let all = [(0, 4), (1, 5), (2, 6), (3, 7)];
        let fi = circulant_twin_edge_family(&sp, &all).unwrap();
        let reports = verify_family(&fi, 1e-9).unwrap();
        assert_eq!(
            reports
                .iter()
                .filter(|r| r.kind == TransferKind::Lpst)
                .count(),
            4
        );
    }

    #[test]
    fn circulant_family_non_integral() {
        let sp = CirculantSpec::new(16, [1, 7, 9, 15]).unwrap();
        let fi = circulant_twin_edge_family(&sp, &[(0, 8)]).unwrap();
        assert_eq!(fi.expected_witnesses.len(), 1);
        assert_eq!(fi.expected_witnesses[0].kind, TransferKind::Pgst);
        let reports = verify_family_with(&fi, 1e-9, 10_000, &DEFAULT_EPSILONS).unwrap();
        assert_eq!(reports[0].kind, TransferKind::Pgst);
        assert!(reports[0].fidelity >= 1.0 - 1e-3);
    }

    #[test]
    fn circulant_family_preconditions() {
        let bad = CirculantSpec::new(8, [2, 6]).unwrap();
        assert!(matches!(
            circulant_twin_edge_family(&bad, &[(0, 4)]),
            Err(Error::PreconditionFailed(_))
        ));
        // mod-4 classes hold but 8 - {1,3,13,15} = {7,5,11,9}
        let not_twin = CirculantSpec::new(16, [1, 3, 13, 15]).unwrap();
        assert!(almost_periodicity_applicable(&not_twin));
        assert!(matches!(
            circulant_twin_edge_family(&not_twin, &[(0, 8)]),
            Err(Error::PreconditionFailed(_))
        ));
        let sp = CirculantSpec::new(8, [1, 3, 5, 7]).unwrap();
        assert!(circulant_twin_edge_family(&sp, &[(0, 4), (4, 0)]).is_err());
    }

    #[test]
    fn empty_witness_list_verifies_trivially() {
        let fi = FamilyInstance {
            graph: complete_graph(3).unwrap(),
            expected_witnesses: Vec::new(),
            provenance: String::new(),
            warnings: Vec::new(),
        };
        assert!(verify_family(&fi, 1e-9).unwrap().is_empty());
    }

    #[test]
    fn failed_witness_is_reported() {
        let fi = FamilyInstance {
            graph: complete_graph(5).unwrap(),
            expected_witnesses: vec![ExpectedWitness {
                kind: TransferKind::Lpst,
                from: 0,
                to: 1,
                time: FRAC_PI_2,
            }],
            provenance: String::new(),
            warnings: Vec::new(),
        };
        assert!(matches!(
            verify_family(&fi, 1e-9),
            Err(Error::WitnessFailed { index: 0, .. })
        ));
    }

    #[test]
    fn quarter_weight_alpha_is_odd_multiple() {
        // adjacent: alpha = -3/4, non-adjacent: alpha = 1/4; 4 alpha in {-3, 1}
        for w in [0.0, 1.0] {
            let alpha: f64 = 0.25 - w;
            let k = 2.0 * alpha * 2.0 * PI / PI;
            assert_eq!(k.round().rem_euclid(2.0), 1.0);
        }
    }
}
