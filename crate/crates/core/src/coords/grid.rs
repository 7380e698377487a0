use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{norm, Chart, TangentSample};
use crate::error::{Error, Result};

/// How base points are drawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum BaseSampling {
    /// Regular lattice `lo..=hi` with `per_axis` nodes on every axis.
    Lattice { lo: f64, hi: f64, per_axis: usize },
    /// `count` uniform draws from the cube `[lo, hi]ⁿ`, redrawn until they
    /// pass the chart and norm filters.
    Random { count: usize, lo: f64, hi: f64 },
    /// Explicit base points.
    Points { points: Vec<Vec<f64>> },
}

/// How fiber vectors are attached to each base point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum FiberSampling {
    /// `fibers_per_base` random unit vectors inside the chart's cone.
    RandomUnit,
    /// The listed vectors at every base point (inadmissible ones dropped).
    Fixed { directions: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub base: BaseSampling,
    #[serde(default = "default_fibers")]
    pub fibers_per_base: usize,
    #[serde(default = "default_fiber")]
    pub fiber: FiberSampling,
    #[serde(default)]
    pub min_base_norm: f64,
    #[serde(default)]
    pub max_base_norm: Option<f64>,
    #[serde(default)]
    pub seed: u64,
}

fn default_fibers() -> usize {
    1
}

fn default_fiber() -> FiberSampling {
    FiberSampling::RandomUnit
}

impl GridSpec {
    /// `count` samples with random base points in `|x| ≤ max_norm` and one
    /// random unit fiber each.
    pub fn random_ball(count: usize, max_norm: f64, seed: u64) -> Self {
        GridSpec {
            base: BaseSampling::Random {
                count,
                lo: -max_norm,
                hi: max_norm,
            },
            fibers_per_base: 1,
            fiber: FiberSampling::RandomUnit,
            min_base_norm: 0.0,
            max_base_norm: Some(max_norm),
            seed,
        }
    }

    fn base_ok(&self, chart: &Chart, x: &[f64]) -> bool {
        let r = norm(x);
        chart.contains_base(x) && r >= self.min_base_norm && self.max_base_norm.is_none_or(|m| r <= m)
    }
}

const MAX_ATTEMPTS_PER_SAMPLE: usize = 1000;

/// Admissible samples described by `spec`, reproducible for a fixed seed.
pub fn sample_grid(chart: &Chart, spec: &GridSpec) -> Result<Vec<TangentSample>> {
    let n = chart.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let bases: Vec<Vec<f64>> = match &spec.base {
        BaseSampling::Lattice { lo, hi, per_axis } => {
            let nodes: Vec<f64> = match per_axis {
                0 => Vec::new(),
                1 => vec![*lo],
                k => (0..*k).map(|i| lo + (hi - lo) * i as f64 / (*k - 1) as f64).collect(),
            };
            let mut out = Vec::new();
            if !nodes.is_empty() {
                let mut index = vec![0usize; n];
                'outer: loop {
                    out.push(index.iter().map(|&i| nodes[i]).collect::<Vec<_>>());
                    for axis in (0..n).rev() {
                        index[axis] += 1;
                        if index[axis] < nodes.len() {
                            continue 'outer;
                        }
                        index[axis] = 0;
                    }
                    break;
                }
            }
            out.retain(|x| spec.base_ok(chart, x));
            out
        }
        BaseSampling::Random { count, lo, hi } => {
            let mut out = Vec::with_capacity(*count);
            let mut attempts = 0;
            while out.len() < *count && attempts < count * MAX_ATTEMPTS_PER_SAMPLE {
                attempts += 1;
                let x: Vec<f64> = (0..n).map(|_| rng.random_range(*lo..=*hi)).collect();
                if spec.base_ok(chart, &x) {
                    out.push(x);
                }
            }
            out
        }
        BaseSampling::Points { points } => points.iter().filter(|x| spec.base_ok(chart, x)).cloned().collect(),
    };

    let mut samples = Vec::new();
    for x in bases {
        match &spec.fiber {
            FiberSampling::RandomUnit => {
                let mut taken = 0;
                let mut attempts = 0;
                while taken < spec.fibers_per_base && attempts < spec.fibers_per_base * MAX_ATTEMPTS_PER_SAMPLE {
                    attempts += 1;
                    let raw: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
                    let len = norm(&raw);
                    if len < 1e-12 {
                        continue;
                    }
                    let y: Vec<f64> = raw.iter().map(|c| c / len).collect();
                    if chart.contains_fiber(&x, &y) {
                        samples.push(TangentSample { x: x.clone(), y });
                        taken += 1;
                    }
                }
            }
            FiberSampling::Fixed { directions } => {
                for y in directions {
                    if chart.contains_fiber(&x, y) {
                        samples.push(TangentSample {
                            x: x.clone(),
                            y: y.clone(),
                        });
                    }
                }
            }
        }
    }

    if samples.is_empty() {
        return Err(Error::EmptyGrid);
    }
    Ok(samples)
}
