//! Circulant graphs `Cay(Z_n, S)` and their number-theoretic predicates.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use num_integer::Integer;

use crate::error::{Error, Result};
use crate::graph::{build_graph, WeightedGraph};

/// Modulus and connection set, validated: `0 ∉ S`, `S = -S`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CirculantSpec {
    n: u64,
    s: BTreeSet<u64>,
}

impl CirculantSpec {
    /// Residues are reduced mod `n` first, so `-1` means `n - 1`.
    pub fn new(n: u64, residues: impl IntoIterator<Item = i64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidModulus(n));
        }
        let s: BTreeSet<u64> = residues
            .into_iter()
            .map(|r| r.rem_euclid(n as i64) as u64)
            .collect();
        if s.contains(&0) {
            return Err(Error::ContainsZero);
        }
        for &x in &s {
            let neg = (n - x) % n;
            if !s.contains(&neg) {
                return Err(Error::AsymmetricSet { n, s: x, neg });
            }
        }
        Ok(Self { n, s })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn connection_set(&self) -> &BTreeSet<u64> {
        &self.s
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GcdClass {
    pub n: u64,
    pub d: u64,
    pub members: BTreeSet<u64>,
}

pub fn build_circulant(spec: &CirculantSpec) -> WeightedGraph {
    let n = spec.n;
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if spec.s.contains(&((v - u) % n)) {
                edges.push((u as usize, v as usize, 1.0));
            }
        }
    }
    build_graph(n as usize, &edges).expect("circulant edges are valid")
}

pub fn proper_divisors(n: u64) -> Vec<u64> {
    (1..n).filter(|d| n.is_multiple_of(*d)).collect()
}

/// `S_n(d) = {x in Z_n : gcd(x, n) = d}`.
pub fn gcd_class(n: u64, d: u64) -> Result<GcdClass> {
    if d == 0 || d >= n || !n.is_multiple_of(d) {
        return Err(Error::NotProperDivisor { n, d });
    }
    let members = (1..n).filter(|x| x.gcd(&n) == d).collect();
    Ok(GcdClass { n, d, members })
}

/// True iff `s` is a union of complete classes `S_n(d)`.
pub fn is_gcd_set(n: u64, s: &BTreeSet<u64>) -> bool {
    let divisors: BTreeSet<u64> = s.iter().map(|x| x.gcd(&n)).collect();
    let mut rebuilt = BTreeSet::new();
    for d in divisors {
        match gcd_class(n, d) {
            Ok(class) => rebuilt.extend(class.members),
            Err(_) => return false,
        }
    }
    &rebuilt == s
}

/// `theta_l = sum_{s in S} cos(2 pi l s / n)`, `l = 0..n`.
///
/// Laplacian eigenvalues are `|S| - theta_l`.
pub fn adjacency_eigenvalues(spec: &CirculantSpec) -> Vec<f64> {
    let n = spec.n;
    (0..n)
        .map(|l| {
            spec.s
                .iter()
                .map(|&s| {
                    // reduce before scaling so the angle stays in [0, 2 pi)
                    let k = ((l as u128 * s as u128) % n as u128) as f64;
                    (2.0 * PI * k / n as f64).cos()
                })
                .sum()
        })
        .collect()
}

pub fn laplacian_eigenvalues(spec: &CirculantSpec) -> Vec<f64> {
    let degree = spec.s.len() as f64;
    adjacency_eigenvalues(spec)
        .into_iter()
        .map(|theta| degree - theta)
        .collect()
}

/// `S = n/2 - S`, which makes every `(x, x + n/2)` a twin pair.
pub fn twin_condition(spec: &CirculantSpec) -> Result<bool> {
    let n = spec.n;
    if n % 2 == 1 {
        return Err(Error::OddModulus(n));
    }
    let half = n / 2;
    let reflected: BTreeSet<u64> = spec.s.iter().map(|&s| (half + n - s) % n).collect();
    Ok(reflected == spec.s)
}

/// `|S ∩ S_n(d)| ≡ 0 (mod 4)` for every proper divisor `d` of `n`.
pub fn mod4_condition(spec: &CirculantSpec) -> bool {
    proper_divisors(spec.n).into_iter().all(|d| {
        let count = spec.s.iter().filter(|x| x.gcd(&spec.n) == d).count();
        count % 4 == 0
    })
}

/// Power-of-two modulus plus [`mod4_condition`]: the hypotheses under which
/// the circulant is almost periodic along times `(4Z + 1) pi / 2`.
pub fn almost_periodicity_applicable(spec: &CirculantSpec) -> bool {
    spec.n.is_power_of_two() && mod4_condition(spec)
}
