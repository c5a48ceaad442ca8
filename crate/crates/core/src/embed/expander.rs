//! Checking the two `(n, d)`-expander conditions:
//! 1. `|N(X)| ≥ d|X|` for `1 ≤ |X| < ⌈n/2d⌉`;
//! 2. an edge between any two disjoint sets of size `⌈n/2d⌉`.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::EmbedError;
use crate::graph::{neighborhood, Graph, VertexSet};
use crate::hole::{alpha_star_exact_capped, alpha_star_lower_bound};
use crate::rng::{rng_from, Rng};

pub const EXPANDER_EXACT_CAP: usize = 22;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpanderMode {
    Exact,
    Heuristic,
}

/// Inputs for the heuristic mode.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeuristicCheck {
    /// Random sets sampled per size for condition 1.
    pub samples: usize,
    /// Restarts for the hole search used against condition 2.
    pub hole_budget: usize,
    /// A known strict upper bound on `α*` (no `(a, a)`-hole), if any.
    pub alpha_bound: Option<usize>,
    pub seed: u64,
}

impl Default for HeuristicCheck {
    fn default() -> Self {
        HeuristicCheck { samples: 64, hole_budget: 8, alpha_bound: None, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpanderViolation {
    /// Condition 1 fails at `x`.
    SmallSet { x: Vec<usize>, neighborhood: usize },
    /// Condition 2 fails: no edge between `x` and `y`.
    NoEdge { x: Vec<usize>, y: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpanderCertificate {
    pub n: usize,
    pub d: f64,
    pub mode: ExpanderMode,
    pub checked_sets: u64,
    pub violation: Option<ExpanderViolation>,
    /// Set sizes for which condition 1 follows from the minimum degree or
    /// from `alpha_bound` rather than from sampling.
    pub certified_sizes: usize,
    /// True when condition 2 follows from `alpha_bound`.
    pub hole_certified: bool,
}

impl ExpanderCertificate {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

/// `⌈n / 2d⌉`.
pub fn expander_threshold(n: usize, d: f64) -> usize {
    (n as f64 / (2.0 * d)).ceil() as usize
}

pub fn check_expander(g: &Graph, d: f64, mode: ExpanderMode, heuristic: HeuristicCheck) -> Result<ExpanderCertificate, EmbedError> {
    if !(d > 0.0) {
        return Err(EmbedError::BadInput(format!("d must be positive, got {d}")));
    }
    match mode {
        ExpanderMode::Exact => check_exact(g, d),
        ExpanderMode::Heuristic => Ok(check_heuristic(g, d, heuristic)),
    }
}

fn small_set_ok(g: &Graph, x: &VertexSet, d: f64) -> Option<ExpanderViolation> {
    let nb = neighborhood(g, x, None).len();
    ((nb as f64) < d * x.len() as f64).then(|| ExpanderViolation::SmallSet { x: x.to_vec(), neighborhood: nb })
}

fn check_exact(g: &Graph, d: f64) -> Result<ExpanderCertificate, EmbedError> {
    let n = g.vertex_count();
    if n > EXPANDER_EXACT_CAP {
        return Err(EmbedError::TooLarge { size: n, cap: EXPANDER_EXACT_CAP });
    }
    let m = expander_threshold(n, d);
    let mut cert = ExpanderCertificate {
        n,
        d,
        mode: ExpanderMode::Exact,
        checked_sets: 0,
        violation: None,
        certified_sizes: m.saturating_sub(1),
        hole_certified: true,
    };
    let nb: Vec<u32> = (0..n).map(|v| g.neighbors(v).iter().fold(0u32, |a, &w| a | 1 << w)).collect();
    for mask in 1u32..(1u32 << n) {
        let size = mask.count_ones() as usize;
        if size >= m {
            continue;
        }
        cert.checked_sets += 1;
        let mut union = 0u32;
        let mut rest = mask;
        while rest != 0 {
            union |= nb[rest.trailing_zeros() as usize];
            rest &= rest - 1;
        }
        let count = (union & !mask).count_ones() as usize;
        if (count as f64) < d * size as f64 {
            let x: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            cert.violation = Some(ExpanderViolation::SmallSet { x, neighborhood: count });
            return Ok(cert);
        }
    }
    if m >= 1 && 2 * m <= n {
        let hole = alpha_star_exact_capped(g, EXPANDER_EXACT_CAP).expect("size already capped");
        cert.checked_sets += 1;
        if hole.value >= m {
            let w = hole.witness.expect("positive hole has a witness");
            cert.violation = Some(ExpanderViolation::NoEdge {
                x: w.s_side.iter().take(m).collect(),
                y: w.t_side.iter().take(m).collect(),
            });
        }
    }
    Ok(cert)
}

/// Condition 1 at size `s` follows without search when
/// `s ≤ δ/(d+1)` (then `|N(X)| ≥ δ − s ≥ ds`), or when `α* < a ≤ s` and
/// `s ≤ (n − a)/(d+1)` (a subset `Z ⊆ X` of size `a` misses fewer than `a`
/// vertices, so `|N(X)| ≥ n − s − a ≥ ds`).
fn size_certified(n: usize, min_degree: usize, d: f64, s: usize, alpha: Option<usize>) -> bool {
    let s_f = s as f64;
    if s_f * (d + 1.0) <= min_degree as f64 {
        return true;
    }
    match alpha {
        Some(a) => s >= a && s_f * (d + 1.0) + a as f64 <= n as f64,
        None => false,
    }
}

fn check_heuristic(g: &Graph, d: f64, h: HeuristicCheck) -> ExpanderCertificate {
    let n = g.vertex_count();
    let m = expander_threshold(n, d);
    let mut rng: Rng = rng_from(h.seed);
    let mut cert = ExpanderCertificate {
        n,
        d,
        mode: ExpanderMode::Heuristic,
        checked_sets: 0,
        violation: None,
        certified_sizes: 0,
        hole_certified: false,
    };
    let min_degree = g.min_degree();
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&v| (g.degree(v), v));
    for s in 1..m {
        if size_certified(n, min_degree, d, s, h.alpha_bound) {
            cert.certified_sizes += 1;
            continue;
        }
        // Low-degree vertices and their neighbors are the likeliest violators.
        let mut probes = Vec::with_capacity(h.samples + 2);
        probes.push(VertexSet::from_iter(n, by_degree.iter().take(s).copied()));
        let v0 = by_degree[0];
        let mut ball: Vec<usize> = std::iter::once(v0).chain(g.neighbors(v0).iter().copied()).collect();
        ball.truncate(s);
        if ball.len() == s {
            probes.push(VertexSet::from_iter(n, ball));
        }
        let mut all: Vec<usize> = (0..n).collect();
        for _ in 0..h.samples {
            all.shuffle(&mut rng);
            probes.push(VertexSet::from_iter(n, all.iter().take(s).copied()));
        }
        for x in probes {
            cert.checked_sets += 1;
            if let Some(v) = small_set_ok(g, &x, d) {
                cert.violation = Some(v);
                return cert;
            }
        }
    }
    if m >= 1 && 2 * m <= n {
        if h.alpha_bound.is_some_and(|a| a <= m) {
            cert.hole_certified = true;
        } else {
            let lb = alpha_star_lower_bound(g, h.hole_budget.max(1), h.seed).expect("budget is positive");
            cert.checked_sets += h.hole_budget.max(1) as u64;
            if lb.value >= m {
                let w = lb.witness.expect("positive hole has a witness");
                cert.violation = Some(ExpanderViolation::NoEdge {
                    x: w.s_side.iter().take(m).collect(),
                    y: w.t_side.iter().take(m).collect(),
                });
            }
        }
    }
    cert
}
