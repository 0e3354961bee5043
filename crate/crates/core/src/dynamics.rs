//! Better-response dynamics and the exact potential for decreasing patterns.
//!
//! For patterns `1^k 0*` the game is an exact potential game. With the vertex
//! good used by inactive players and edge goods used by active endpoints,
//! Rosenthal's potential doubled to stay integral is
//!
//! ```text
//! 2Φ(s) = 2·Σ_{uv ∈ E} w_uv·s_u·s_v + Σ_v (2k_v − 1)·(1 − s_v)
//! ```
//!
//! Every improving flip lowers it by at least one.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{Game, Profile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleKind {
    /// Scan cyclically, starting just after the last flipped vertex.
    RoundRobin,
    /// Pick uniformly among violators with a seeded ChaCha8 generator.
    UniformRandom,
    /// Always the smallest violating vertex.
    FirstViolator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Schedule {
    pub kind: ScheduleKind,
    /// Only used by [`ScheduleKind::UniformRandom`].
    pub seed: u64,
}

impl Schedule {
    pub fn round_robin() -> Self {
        Schedule { kind: ScheduleKind::RoundRobin, seed: 0 }
    }

    pub fn first_violator() -> Self {
        Schedule { kind: ScheduleKind::FirstViolator, seed: 0 }
    }

    pub fn random(seed: u64) -> Self {
        Schedule { kind: ScheduleKind::UniformRandom, seed }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Step {
    pub vertex: usize,
    pub value: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DynamicsTrace {
    pub initial: Profile,
    pub final_profile: Profile,
    pub steps: Vec<Step>,
    /// `2Φ` before the first step and after every step; present only when
    /// every pattern is decreasing.
    pub potential_series: Option<Vec<i128>>,
    pub converged: bool,
}

impl DynamicsTrace {
    /// Applies the recorded flips to the initial profile.
    pub fn replay(&self) -> Profile {
        let mut s = self.initial.clone();
        for step in &self.steps {
            s.set(step.vertex, step.value);
        }
        s
    }
}

/// Leading-ones counts, clamped to `weighted_degree + 1`. Clamping does not
/// change any best response: such a vertex always wants to act.
pub fn decreasing_thresholds(g: &Game) -> Result<Vec<u64>> {
    (0..g.n())
        .map(|v| {
            let k = g.pattern(v).decreasing_k().ok_or_else(|| Error::NotDecreasing {
                vertex: v + 1,
                pattern: g.pattern(v).to_string(),
            })?;
            Ok(k.min(g.weighted_degree(v) + 1))
        })
        .collect()
}

/// Doubled potential `2Φ(s)`.
pub fn potential(g: &Game, s: &Profile) -> Result<i128> {
    g.check_profile(s)?;
    let ks = decreasing_thresholds(g)?;
    Ok(potential_with(g, &ks, s))
}

fn potential_with(g: &Game, ks: &[u64], s: &Profile) -> i128 {
    let edges: i128 = g
        .edges()
        .iter()
        .filter(|e| s[e.u] && s[e.v])
        .map(|e| 2 * e.weight as i128)
        .sum();
    let vertices: i128 = ks
        .iter()
        .enumerate()
        .filter(|&(v, _)| !s[v])
        .map(|(_, &k)| 2 * k as i128 - 1)
        .sum();
    edges + vertices
}

/// Upper bound `2(W + k_max·n)` on the number of improving flips, with `W`
/// the total edge weight and `k_max` the largest clamped threshold.
pub fn step_bound(g: &Game) -> Result<u64> {
    let ks = decreasing_thresholds(g)?;
    let k_max = ks.iter().copied().max().unwrap_or(0);
    Ok(2 * (g.total_weight() + k_max * g.n() as u64))
}

/// Runs better-response dynamics from `s0` for at most `max_steps` flips.
///
/// Only flips count as steps; scanning over best-responding vertices is free.
pub fn run_dynamics(g: &Game, s0: &Profile, schedule: Schedule, max_steps: u64) -> Result<DynamicsTrace> {
    g.check_profile(s0)?;
    let n = g.n();
    let ks = decreasing_thresholds(g).ok();
    let mut s = s0.clone();
    let mut degree: Vec<u64> = (0..n).map(|v| g.active_degree(&s, v)).collect();
    let mut potentials = ks.as_ref().map(|ks| vec![potential_with(g, ks, &s)]);
    let mut rng = ChaCha8Rng::seed_from_u64(schedule.seed);
    let mut cursor = 0usize;
    let mut steps = Vec::new();

    let violates = |s: &Profile, degree: &[u64], v: usize| g.pattern(v).eval(degree[v]) != s[v];

    let converged = loop {
        let pick = match schedule.kind {
            ScheduleKind::FirstViolator => (0..n).find(|&v| violates(&s, &degree, v)),
            ScheduleKind::RoundRobin => (0..n).map(|i| (cursor + i) % n).find(|&v| violates(&s, &degree, v)),
            ScheduleKind::UniformRandom => {
                let violators: Vec<usize> = (0..n).filter(|&v| violates(&s, &degree, v)).collect();
                (!violators.is_empty()).then(|| violators[rng.random_range(0..violators.len())])
            }
        };
        let Some(v) = pick else { break true };
        if steps.len() as u64 >= max_steps {
            break false;
        }
        s.flip(v);
        let value = s[v];
        for &(u, w) in g.neighbors(v) {
            if value {
                degree[u] += w;
            } else {
                degree[u] -= w;
            }
        }
        steps.push(Step { vertex: v, value });
        cursor = (v + 1) % n;
        if let (Some(series), Some(ks)) = (potentials.as_mut(), ks.as_ref()) {
            series.push(potential_with(g, ks, &s));
        }
    };

    Ok(DynamicsTrace { initial: s0.clone(), final_profile: s, steps, potential_series: potentials, converged })
}
