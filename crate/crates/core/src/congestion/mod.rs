//! Congestion-game representation of games with decreasing patterns.
//!
//! Each vertex `v` becomes a good with constant delay `k_v − ½` and each edge
//! `e` a good with delay `w_e·(x − 1)`. Player `v` either takes its own vertex
//! good (inactive) or all incident edge goods (active). All values are kept
//! doubled so arithmetic stays integral.

mod threshold;

pub use threshold::{parse_threshold, write_threshold, KRule, Side, ThresholdGame, ThresholdMapping};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{Game, Profile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GoodKind {
    Vertex(usize),
    /// Index into [`Game::edges`].
    Edge(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Delay {
    /// Constant `doubled / 2`; always odd, `2k − 1`.
    ConstantHalf { doubled: u64 },
    /// `slope·(x − 1)`.
    Affine { slope: u64 },
}

impl Delay {
    /// Twice the delay at load `load >= 1`.
    pub fn doubled_at(self, load: u64) -> i128 {
        match self {
            Delay::ConstantHalf { doubled } => doubled as i128,
            Delay::Affine { slope } => 2 * slope as i128 * (load as i128 - 1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Good {
    pub kind: GoodKind,
    pub delay: Delay,
}

/// A congestion game where every player has exactly two strategies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CongestionGame {
    pub goods: Vec<Good>,
    /// `strategies[v][0]` is the image of "inactive", `[1]` of "active".
    pub strategies: Vec<[Vec<usize>; 2]>,
}

impl CongestionGame {
    pub fn players(&self) -> usize {
        self.strategies.len()
    }

    /// Number of players using each good when player `v` plays strategy `choice[v]`.
    pub fn loads(&self, choice: &Profile) -> Vec<u64> {
        let mut loads = vec![0; self.goods.len()];
        for (v, strat) in self.strategies.iter().enumerate() {
            for &g in &strat[choice[v] as usize] {
                loads[g] += 1;
            }
        }
        loads
    }

    /// Twice the cost player `v` pays under `choice`.
    pub fn doubled_cost(&self, choice: &Profile, v: usize) -> i128 {
        let loads = self.loads(choice);
        self.doubled_cost_with(&loads, choice, v)
    }

    fn doubled_cost_with(&self, loads: &[u64], choice: &Profile, v: usize) -> i128 {
        self.strategies[v][choice[v] as usize]
            .iter()
            .map(|&g| self.goods[g].delay.doubled_at(loads[g]))
            .sum()
    }

    /// Twice Rosenthal's potential `Σ_g Σ_{ℓ=1}^{x_g} d_g(ℓ)`.
    pub fn doubled_potential(&self, choice: &Profile) -> i128 {
        self.loads(choice)
            .iter()
            .zip(&self.goods)
            .map(|(&x, good)| (1..=x).map(|l| good.delay.doubled_at(l)).sum::<i128>())
            .sum()
    }

    /// No player can strictly lower its cost by switching strategy.
    pub fn is_pne(&self, choice: &Profile) -> bool {
        let loads = self.loads(choice);
        (0..self.players()).all(|v| {
            let mut alt = choice.clone();
            alt.flip(v);
            self.doubled_cost_with(&loads, choice, v) <= self.doubled_cost(&alt, v)
        })
    }
}

fn leading_ones(g: &Game) -> Result<Vec<u64>> {
    (0..g.n())
        .map(|v| {
            g.pattern(v).decreasing_k().ok_or_else(|| Error::NotDecreasing {
                vertex: v + 1,
                pattern: g.pattern(v).to_string(),
            })
        })
        .collect()
}

/// Builds the congestion game isomorphic to the consistent representation of `g`.
pub fn build_congestion_game(g: &Game) -> Result<CongestionGame> {
    let ks = leading_ones(g)?;
    let n = g.n();
    let mut goods: Vec<Good> = ks
        .iter()
        .enumerate()
        .map(|(v, &k)| Good { kind: GoodKind::Vertex(v), delay: Delay::ConstantHalf { doubled: 2 * k - 1 } })
        .collect();
    let mut strategies: Vec<[Vec<usize>; 2]> = (0..n).map(|v| [vec![v], Vec::new()]).collect();
    for (i, e) in g.edges().iter().enumerate() {
        goods.push(Good { kind: GoodKind::Edge(i), delay: Delay::Affine { slope: e.weight } });
        strategies[e.u][1].push(n + i);
        strategies[e.v][1].push(n + i);
    }
    Ok(CongestionGame { goods, strategies })
}

/// Twice the utility of `v` in the consistent representation:
/// `−(2k_v − 1)` when inactive and `−2·x_v` when active.
pub fn pgg_utility(g: &Game, s: &Profile, v: usize) -> Result<i128> {
    g.check_profile(s)?;
    let k = g.pattern(v).decreasing_k().ok_or_else(|| Error::NotDecreasing {
        vertex: v + 1,
        pattern: g.pattern(v).to_string(),
    })?;
    Ok(if s[v] { -2 * g.active_degree(s, v) as i128 } else { -(2 * k as i128 - 1) })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub profile: Profile,
    pub vertex: usize,
    pub pgg_utility: i128,
    pub congestion_cost: i128,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IsomorphismReport {
    pub profiles_checked: u64,
    pub exhaustive: bool,
    pub first_counterexample: Option<Counterexample>,
    /// `Some` when the PNE sets were compared (small games only).
    pub pne_sets_equal: Option<bool>,
    pub seed: u64,
}

impl IsomorphismReport {
    pub fn ok(&self) -> bool {
        self.first_counterexample.is_none() && self.pne_sets_equal != Some(false)
    }
}

/// Largest vertex count for which PNE sets are compared by enumeration.
pub const PNE_COMPARE_MAX_N: usize = 12;

/// Checks utility equality and strict best-response preference under the
/// strategy bijection, on all profiles when `n <= exhaustive_n` and on
/// `sample_count` seeded random profiles otherwise.
pub fn verify_isomorphism(g: &Game, sample_count: u64, seed: u64, exhaustive_n: usize) -> Result<IsomorphismReport> {
    let cg = build_congestion_game(g)?;
    let n = g.n();
    let exhaustive = n <= exhaustive_n && n < 63;
    let profiles: Vec<Profile> = if exhaustive {
        (0..1u64 << n).map(|m| Profile::from_fn(n, |v| m >> v & 1 == 1)).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..sample_count).map(|_| Profile::from_fn(n, |_| rng.random_bool(0.5))).collect()
    };

    let failures: Vec<Option<Counterexample>> =
        profiles.par_iter().map(|s| check_profile(g, &cg, s)).collect::<Result<_>>()?;
    let first_counterexample = failures.into_iter().flatten().next();

    let pne_sets_equal = (n <= PNE_COMPARE_MAX_N)
        .then(|| -> Result<bool> {
            let pgg = g.enumerate_pne(None)?;
            let mut cong: Vec<Profile> = (0..1u64 << n)
                .map(|m| Profile::from_fn(n, |v| m >> (n - 1 - v) & 1 == 1))
                .filter(|s| cg.is_pne(s))
                .collect();
            cong.sort();
            Ok(pgg == cong)
        })
        .transpose()?;

    Ok(IsomorphismReport {
        profiles_checked: profiles.len() as u64,
        exhaustive,
        first_counterexample,
        pne_sets_equal,
        seed,
    })
}

fn check_profile(g: &Game, cg: &CongestionGame, s: &Profile) -> Result<Option<Counterexample>> {
    for v in 0..g.n() {
        let u = pgg_utility(g, s, v)?;
        let c = cg.doubled_cost(s, v);
        if u != -c {
            return Ok(Some(Counterexample {
                profile: s.clone(),
                vertex: v,
                pgg_utility: u,
                congestion_cost: c,
                reason: "utility differs from negated congestion cost".into(),
            }));
        }
        let br = g.best_response(s, v).response;
        let mut best = s.clone();
        best.set(v, br);
        let mut other = s.clone();
        other.set(v, !br);
        if -cg.doubled_cost(&best, v) <= -cg.doubled_cost(&other, v) {
            return Ok(Some(Counterexample {
                profile: s.clone(),
                vertex: v,
                pgg_utility: u,
                congestion_cost: c,
                reason: "best response is not strictly preferred".into(),
            }));
        }
    }
    Ok(None)
}
