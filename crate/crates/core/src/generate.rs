//! Seeded random game generation.

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{Edge, Game, Profile};
use crate::pattern::Pattern;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphModel {
    /// Each of the `n(n-1)/2` edges independently with probability `p`.
    Gnp {
        n: usize,
        #[serde(serialize_with = "ratio_text")]
        p: Ratio<u64>,
    },
    /// Complete graph with weights uniform in `1..=wmax`.
    CompleteWeighted { n: usize, wmax: u64 },
}

fn ratio_text<S: serde::Serializer>(r: &Ratio<u64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatternSpec {
    Homogeneous(Pattern),
    /// Every vertex draws uniformly from the list.
    RandomFrom(Vec<Pattern>),
}

pub fn generate_instance(model: &GraphModel, patterns: &PatternSpec, seed: u64) -> Result<Game> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = match model {
        GraphModel::Gnp { n, .. } | GraphModel::CompleteWeighted { n, .. } => *n,
    };
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let mut edges = Vec::new();
    match model {
        GraphModel::Gnp { p, .. } => {
            if p > &Ratio::from_integer(1) {
                return Err(Error::InvalidParameter(format!("edge probability {p} exceeds 1")));
            }
            for u in 0..n {
                for v in u + 1..n {
                    if rng.random_range(0..*p.denom()) < *p.numer() {
                        edges.push(Edge::new(u, v));
                    }
                }
            }
        }
        GraphModel::CompleteWeighted { wmax, .. } => {
            if *wmax == 0 {
                return Err(Error::InvalidParameter("wmax must be at least 1".into()));
            }
            for u in 0..n {
                for v in u + 1..n {
                    edges.push(Edge::weighted(u, v, rng.random_range(1..=*wmax)));
                }
            }
        }
    }
    let patterns = match patterns {
        PatternSpec::Homogeneous(p) => vec![p.clone(); n],
        PatternSpec::RandomFrom(list) if list.is_empty() => {
            return Err(Error::InvalidParameter("pattern list is empty".into()));
        }
        PatternSpec::RandomFrom(list) => (0..n).map(|_| list[rng.random_range(0..list.len())].clone()).collect(),
    };
    Game::new(patterns, edges)
}

/// Uniform random profile on `n` vertices, drawn from ChaCha8 seeded with `seed`.
pub fn random_profile(n: usize, seed: u64) -> Profile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Profile::from_fn(n, |_| rng.random_bool(0.5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::{parse_game, write_game};

    fn gnp(n: usize, num: u64, den: u64) -> GraphModel {
        GraphModel::Gnp { n, p: Ratio::new(num, den) }
    }

    #[test]
    fn random_profiles_are_seeded() {
        assert_eq!(random_profile(40, 3), random_profile(40, 3));
        assert_ne!(random_profile(40, 3), random_profile(40, 4));
    }

    #[test]
    fn extreme_probabilities() {
        let p = PatternSpec::Homogeneous(Pattern::decreasing(1));
        assert!(generate_instance(&gnp(4, 0, 1), &p, 1).unwrap().edges().is_empty());
        assert_eq!(generate_instance(&gnp(4, 1, 1), &p, 1).unwrap().edges().len(), 6);
    }

    #[test]
    fn reproducible_weights() {
        let m = GraphModel::CompleteWeighted { n: 3, wmax: 2 };
        let p = PatternSpec::Homogeneous(Pattern::decreasing(2));
        let a = generate_instance(&m, &p, 99).unwrap();
        assert_eq!(a, generate_instance(&m, &p, 99).unwrap());
        assert!(a.edges().iter().all(|e| (1..=2).contains(&e.weight)));
    }

    #[test]
    fn invalid_parameters() {
        let p = PatternSpec::Homogeneous(Pattern::decreasing(1));
        assert!(generate_instance(&gnp(0, 1, 2), &p, 0).is_err());
        assert!(generate_instance(&gnp(3, 3, 2), &p, 0).is_err());
        assert!(generate_instance(&GraphModel::CompleteWeighted { n: 3, wmax: 0 }, &p, 0).is_err());
        assert!(generate_instance(&gnp(3, 1, 2), &PatternSpec::RandomFrom(vec![]), 0).is_err());
    }

    #[test]
    fn generated_games_round_trip() {
        let list = ["10*", "1010*", "(10)*", "0(1)*"].map(|s| s.parse().unwrap()).to_vec();
        for seed in 0..20 {
            let g = generate_instance(&gnp(9, 1, 3), &PatternSpec::RandomFrom(list.clone()), seed).unwrap();
            assert_eq!(parse_game(&write_game(&g)).unwrap(), g);
        }
    }
}
