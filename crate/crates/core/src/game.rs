//! The public goods game model and its PNE predicates.
//!
//! Vertices are 0-based in the Rust API. The text formats and the CLI use
//! 1-based ids.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pattern::Pattern;

/// Largest vertex count accepted by exhaustive profile enumeration.
pub const MAX_BRUTE_FORCE_N: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: u64,
}

impl Edge {
    pub fn new(u: usize, v: usize) -> Self {
        Edge { u, v, weight: 1 }
    }

    pub fn weighted(u: usize, v: usize, weight: u64) -> Self {
        Edge { u, v, weight }
    }
}

/// An edge-weighted binary public goods game on an undirected simple graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Game {
    patterns: Vec<Pattern>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(usize, u64)>>,
}

impl Game {
    /// Validates and builds a game. Edge order is preserved.
    pub fn new(patterns: Vec<Pattern>, edges: Vec<Edge>) -> Result<Self> {
        let n = patterns.len();
        let mut adjacency = vec![Vec::new(); n];
        for e in &edges {
            if e.u >= n || e.v >= n {
                return Err(Error::InvalidGame(format!(
                    "edge {}-{} references a vertex outside 1..={n}",
                    e.u + 1,
                    e.v + 1
                )));
            }
            if e.u == e.v {
                return Err(Error::InvalidGame(format!("self-loop at vertex {}", e.u + 1)));
            }
            if e.weight == 0 {
                return Err(Error::InvalidGame(format!("edge {}-{} has weight 0", e.u + 1, e.v + 1)));
            }
            if adjacency[e.u].iter().any(|&(x, _)| x == e.v) {
                return Err(Error::InvalidGame(format!("duplicate edge {}-{}", e.u + 1, e.v + 1)));
            }
            adjacency[e.u].push((e.v, e.weight));
            adjacency[e.v].push((e.u, e.weight));
        }
        Ok(Game { patterns, edges, adjacency })
    }

    /// Same pattern on every vertex.
    pub fn homogeneous(n: usize, pattern: Pattern, edges: Vec<Edge>) -> Result<Self> {
        Game::new(vec![pattern; n], edges)
    }

    pub fn n(&self) -> usize {
        self.patterns.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn patterns(&self) -> &[Pattern] {
        &self.patterns
    }

    pub fn pattern(&self, v: usize) -> &Pattern {
        &self.patterns[v]
    }

    /// `(neighbor, weight)` pairs of `v`.
    pub fn neighbors(&self, v: usize) -> &[(usize, u64)] {
        &self.adjacency[v]
    }

    /// Sum of incident edge weights, i.e. the largest achievable active degree.
    pub fn weighted_degree(&self, v: usize) -> u64 {
        self.adjacency[v].iter().map(|&(_, w)| w).sum()
    }

    pub fn total_weight(&self) -> u64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    pub fn is_unweighted(&self) -> bool {
        self.edges.iter().all(|e| e.weight == 1)
    }

    pub(crate) fn check_profile(&self, s: &Profile) -> Result<()> {
        if s.len() != self.n() {
            return Err(Error::ProfileLength { expected: self.n(), got: s.len() });
        }
        Ok(())
    }

    /// Weighted number of active neighbors of `v`.
    pub fn active_degree(&self, s: &Profile, v: usize) -> u64 {
        self.adjacency[v].iter().filter(|&&(u, _)| s[u]).map(|&(_, w)| w).sum()
    }

    pub fn best_response(&self, s: &Profile, v: usize) -> BestResponse {
        let degree = self.active_degree(s, v);
        BestResponse { degree, response: self.patterns[v].eval(degree) }
    }

    pub fn is_pne(&self, s: &Profile) -> Result<PneReport> {
        self.check_profile(s)?;
        let violators: Vec<usize> =
            (0..self.n()).filter(|&v| self.best_response(s, v).response != s[v]).collect();
        Ok(PneReport { is_pne: violators.is_empty(), violators })
    }

    /// All PNE in lexicographic order of `(s_1, .., s_n)`, truncated to
    /// `max_count`. Refuses games with more than [`MAX_BRUTE_FORCE_N`] vertices.
    pub fn enumerate_pne(&self, max_count: Option<usize>) -> Result<Vec<Profile>> {
        let n = self.n();
        if n > MAX_BRUTE_FORCE_N {
            return Err(Error::Capacity(format!(
                "exhaustive enumeration supports at most {MAX_BRUTE_FORCE_N} vertices, game has {n}"
            )));
        }
        let limit = max_count.unwrap_or(usize::MAX);
        if limit == 0 {
            return Ok(Vec::new());
        }
        // vertex v lives in bit n-1-v so numeric order is lexicographic order
        let checker = MaskChecker::new(self);
        let total: u64 = 1 << n;
        let chunk: u64 = 1 << 14;
        let chunks = total.div_ceil(chunk);
        let batch = (rayon::current_num_threads() as u64 * 4).max(1);

        let mut found = Vec::new();
        let mut start = 0;
        while start < chunks && found.len() < limit {
            let end = (start + batch).min(chunks);
            let parts: Vec<Vec<u32>> = (start..end)
                .into_par_iter()
                .map(|c| {
                    let lo = c * chunk;
                    let hi = (lo + chunk).min(total);
                    (lo..hi).map(|m| m as u32).filter(|&m| checker.is_pne(m)).collect()
                })
                .collect();
            for m in parts.into_iter().flatten() {
                if found.len() == limit {
                    break;
                }
                found.push(Profile::from_fn(n, |v| m >> (n - 1 - v) & 1 == 1));
            }
            start = end;
        }
        Ok(found)
    }
}

struct MaskChecker<'g> {
    n: usize,
    game: &'g Game,
    neighbor_masks: Option<Vec<u32>>,
}

impl<'g> MaskChecker<'g> {
    fn new(game: &'g Game) -> Self {
        let n = game.n();
        let neighbor_masks = game.is_unweighted().then(|| {
            (0..n)
                .map(|v| game.neighbors(v).iter().fold(0u32, |m, &(u, _)| m | 1 << (n - 1 - u)))
                .collect()
        });
        MaskChecker { n, game, neighbor_masks }
    }

    fn is_pne(&self, mask: u32) -> bool {
        let n = self.n;
        (0..n).all(|v| {
            let degree = match &self.neighbor_masks {
                Some(nm) => (mask & nm[v]).count_ones() as u64,
                None => self
                    .game
                    .neighbors(v)
                    .iter()
                    .filter(|&&(u, _)| mask >> (n - 1 - u) & 1 == 1)
                    .map(|&(_, w)| w)
                    .sum(),
            };
            self.game.pattern(v).eval(degree) == (mask >> (n - 1 - v) & 1 == 1)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BestResponse {
    /// Weighted active degree the response was evaluated at.
    pub degree: u64,
    pub response: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PneReport {
    pub is_pne: bool,
    /// Sorted 0-based ids of vertices not playing their best response.
    pub violators: Vec<usize>,
}

/// One bit per vertex; `true` means active.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Profile(Vec<bool>);

impl Profile {
    pub fn zeros(n: usize) -> Self {
        Profile(vec![false; n])
    }

    pub fn ones(n: usize) -> Self {
        Profile(vec![true; n])
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize) -> bool) -> Self {
        Profile((0..n).map(f).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn set(&mut self, v: usize, value: bool) {
        self.0[v] = value;
    }

    pub fn flip(&mut self, v: usize) {
        self.0[v] = !self.0[v];
    }

    pub fn active(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, &b)| b).map(|(v, _)| v)
    }

    pub fn count_active(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }
}

impl From<Vec<bool>> for Profile {
    fn from(bits: Vec<bool>) -> Self {
        Profile(bits)
    }
}

impl std::ops::Index<usize> for Profile {
    type Output = bool;
    fn index(&self, v: usize) -> &bool {
        &self.0[v]
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Profile {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        s.trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::InvalidParameter(format!("bad profile character {c:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Profile)
    }
}

impl TryFrom<String> for Profile {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Profile> for String {
    fn from(p: Profile) -> String {
        p.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pat(s: &str) -> Pattern {
        s.parse().unwrap()
    }

    fn prof(s: &str) -> Profile {
        s.parse().unwrap()
    }

    fn path3(p: &str) -> Game {
        Game::homogeneous(3, pat(p), vec![Edge::new(0, 1), Edge::new(1, 2)]).unwrap()
    }

    fn triangle(p: &str) -> Game {
        Game::homogeneous(3, pat(p), vec![Edge::new(0, 1), Edge::new(1, 2), Edge::new(0, 2)]).unwrap()
    }

    #[test]
    fn rejects_malformed_graphs() {
        let p = pat("10*");
        assert!(Game::homogeneous(2, p.clone(), vec![Edge::new(0, 0)]).is_err());
        assert!(Game::homogeneous(2, p.clone(), vec![Edge::new(0, 1), Edge::new(1, 0)]).is_err());
        assert!(Game::homogeneous(2, p.clone(), vec![Edge::new(0, 2)]).is_err());
        assert!(Game::homogeneous(2, p, vec![Edge::weighted(0, 1, 0)]).is_err());
    }

    #[test]
    fn best_response_examples() {
        let g = path3("10*");
        assert_eq!(g.best_response(&prof("010"), 0), BestResponse { degree: 1, response: false });

        let t = triangle("1010*");
        assert_eq!(t.best_response(&prof("111"), 0), BestResponse { degree: 2, response: true });

        let w = Game::homogeneous(2, pat("110*"), vec![Edge::weighted(0, 1, 3)]).unwrap();
        assert_eq!(w.best_response(&prof("01"), 0), BestResponse { degree: 3, response: false });
    }

    #[test]
    fn is_pne_examples() {
        let g = Game::homogeneous(2, pat("10*"), vec![Edge::new(0, 1)]).unwrap();
        assert!(g.is_pne(&prof("10")).unwrap().is_pne);
        assert_eq!(g.is_pne(&prof("11")).unwrap().violators, vec![0, 1]);
        assert!(g.is_pne(&prof("1")).is_err());

        for k in 2..5 {
            let t = triangle(&Pattern::picky(k).to_string());
            for s in ["100", "010", "001"] {
                assert!(t.is_pne(&prof(s)).unwrap().is_pne);
            }
        }
    }

    #[test]
    fn enumerate_examples() {
        assert_eq!(path3("10*").enumerate_pne(None).unwrap(), vec![prof("010"), prof("101")]);
        assert_eq!(
            triangle("1010*").enumerate_pne(None).unwrap(),
            vec![prof("001"), prof("010"), prof("100"), prof("111")]
        );
        let iso = Game::homogeneous(2, pat("0*"), vec![]).unwrap();
        assert_eq!(iso.enumerate_pne(None).unwrap(), vec![prof("00")]);
        assert_eq!(triangle("1010*").enumerate_pne(Some(2)).unwrap().len(), 2);
    }

    #[test]
    fn enumerate_refuses_large_games() {
        let g = Game::homogeneous(31, pat("10*"), vec![]).unwrap();
        assert!(matches!(g.enumerate_pne(Some(1)), Err(Error::Capacity(_))));
    }

    #[test]
    fn weighted_enumeration_uses_weights() {
        // with weight 2 the single active neighbor already reaches degree 2
        let g = Game::homogeneous(2, pat("110*"), vec![Edge::weighted(0, 1, 2)]).unwrap();
        assert_eq!(g.enumerate_pne(None).unwrap(), vec![prof("01"), prof("10")]);
    }

    /// Maximal independent sets by direct definition.
    fn maximal_independent_sets(n: usize, edges: &[Edge]) -> Vec<Profile> {
        let adj = |a: usize, b: usize| edges.iter().any(|e| (e.u, e.v) == (a, b) || (e.u, e.v) == (b, a));
        let mut out = Vec::new();
        for mask in 0u32..1 << n {
            let inset = |v: usize| mask >> v & 1 == 1;
            let independent = edges.iter().all(|e| !(inset(e.u) && inset(e.v)));
            let maximal = (0..n).all(|v| inset(v) || (0..n).any(|u| inset(u) && adj(u, v)));
            if independent && maximal {
                out.push(Profile::from_fn(n, inset));
            }
        }
        out.sort();
        out
    }

    fn random_graph() -> impl Strategy<Value = (usize, Vec<Edge>)> {
        (1usize..=8).prop_flat_map(|n| {
            let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
            let m = pairs.len();
            (Just(n), prop::collection::vec(any::<bool>(), m)).prop_map(move |(n, keep)| {
                let edges = pairs.iter().zip(keep).filter(|(_, k)| *k).map(|(&(u, v), _)| Edge::new(u, v)).collect();
                (n, edges)
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn single_one_pattern_pne_are_maximal_independent_sets((n, edges) in random_graph()) {
            let g = Game::homogeneous(n, pat("10*"), edges.clone()).unwrap();
            prop_assert_eq!(g.enumerate_pne(None).unwrap(), maximal_independent_sets(n, &edges));
        }

        #[test]
        fn is_pne_agrees_with_enumeration((n, edges) in random_graph(), pidx in prop::collection::vec(0usize..5, 8)) {
            let choices = ["10*", "1010*", "110*", "(10)*", "0(1)*"];
            let patterns = (0..n).map(|v| pat(choices[pidx[v]])).collect();
            let g = Game::new(patterns, edges).unwrap();
            let all = g.enumerate_pne(None).unwrap();
            for mask in 0u32..1 << n {
                let s = Profile::from_fn(n, |v| mask >> v & 1 == 1);
                prop_assert_eq!(g.is_pne(&s).unwrap().is_pne, all.contains(&s));
            }
        }

        #[test]
        fn best_response_invariant_under_relabeling((n, edges) in random_graph(), seed in any::<u64>(), bits in any::<u32>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let g = Game::homogeneous(n, pat("1010*"), edges.clone()).unwrap();
            let relabeled = Game::homogeneous(
                n,
                pat("1010*"),
                edges.iter().map(|e| Edge::new(perm[e.u], perm[e.v])).collect(),
            ).unwrap();
            let s = Profile::from_fn(n, |v| bits >> v & 1 == 1);
            let mut t = Profile::zeros(n);
            for v in 0..n {
                t.set(perm[v], s[v]);
            }
            for v in 0..n {
                prop_assert_eq!(g.best_response(&s, v), relabeled.best_response(&t, perm[v]));
            }
        }
    }
}
