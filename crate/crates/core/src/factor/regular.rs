//! Monte Carlo falsifier for `ε`-regularity of a pair.

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::graph::{Graph, VertexSet};
use crate::rng::rng_from;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularPairReport {
    pub density: f64,
    pub max_deviation: f64,
    pub samples: usize,
    /// The probe pair with the largest deviation.
    pub worst: Option<(Vec<usize>, Vec<usize>)>,
    pub dense_enough: bool,
    pub passed: bool,
}

fn density(g: &Graph, x: &[usize], y: &VertexSet) -> f64 {
    if x.is_empty() || y.is_empty() {
        return 0.0;
    }
    let e: usize = x.iter().map(|&v| g.degree_into(v, y)).sum();
    e as f64 / (x.len() * y.len()) as f64
}

/// Samples subpairs `X′ ⊆ X`, `Y′ ⊆ Y` with `|X′| ≥ ε|X|`, `|Y′| ≥ ε|Y|`
/// and reports the largest `|d(X′,Y′) − d(X,Y)|`. Besides uniform samples it
/// probes the `ε`-fractions of highest and lowest degree on each side, which
/// catches pairs made of a dense half and an empty half. Passing means no
/// deviation above `eps` was seen and `d(X,Y) ≥ d`; it certifies nothing.
pub fn regular_pair_check(g: &Graph, x: &VertexSet, y: &VertexSet, eps: f64, d: f64, samples: usize, seed: u64) -> RegularPairReport {
    let mut rng = rng_from(seed);
    let xs: Vec<usize> = x.iter().collect();
    let ys: Vec<usize> = y.iter().collect();
    let base = density(g, &xs, y);
    let min_x = ((eps * xs.len() as f64).ceil() as usize).clamp(1, xs.len().max(1));
    let min_y = ((eps * ys.len() as f64).ceil() as usize).clamp(1, ys.len().max(1));
    let mut probes: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    let mut x_sorted = xs.clone();
    x_sorted.sort_by_key(|&v| (g.degree_into(v, y), v));
    let mut y_sorted = ys.clone();
    y_sorted.sort_by_key(|&v| (g.degree_into(v, x), v));
    let x_ends = [x_sorted[..min_x].to_vec(), x_sorted[xs.len() - min_x..].to_vec(), xs.clone()];
    let y_ends = [y_sorted[..min_y].to_vec(), y_sorted[ys.len() - min_y..].to_vec(), ys.clone()];
    for xe in &x_ends {
        for ye in &y_ends {
            probes.push((xe.clone(), ye.clone()));
        }
    }
    for _ in 0..samples {
        let sx = rng.gen_range(min_x..=xs.len());
        let sy = rng.gen_range(min_y..=ys.len());
        let px: Vec<usize> = xs.choose_multiple(&mut rng, sx).copied().collect();
        let py: Vec<usize> = ys.choose_multiple(&mut rng, sy).copied().collect();
        probes.push((px, py));
    }
    let mut max_deviation = 0.0;
    let mut worst = None;
    for (px, py) in probes {
        let pyset = VertexSet::from_iter(g.vertex_count(), py.iter().copied());
        let dev = (density(g, &px, &pyset) - base).abs();
        if dev > max_deviation {
            max_deviation = dev;
            worst = Some((px, py));
        }
    }
    let dense_enough = base >= d;
    RegularPairReport {
        density: base,
        max_deviation,
        samples,
        worst,
        dense_enough,
        passed: dense_enough && max_deviation <= eps,
    }
}
