//! Exact PNE existence by backtracking search.
//!
//! Every vertex carries an interval `[committed, committed + residual]` of
//! active degrees its final profile can still reach. A vertex whose own value
//! cannot match its pattern anywhere in that interval is a conflict; an
//! unassigned vertex with only one matching value is fixed to it.
//!
//! Search branches on the unassigned vertex of largest weighted degree, trying
//! the value its pattern suggests at the committed degree first. Conflicts are
//! explained back to the decisions that caused them, and the search jumps over
//! decisions not involved, so failures local to one part of the graph do not
//! enumerate choices made in unrelated parts.

mod cnf;

pub use cnf::{export_cnf, CnfFormula};

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{Game, Profile};

pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", content = "profile", rename_all = "kebab-case")]
pub enum Decision {
    Exists(Profile),
    NotExists,
    BudgetExceeded,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SolveOutcome {
    pub decision: Decision,
    /// Branch attempts made.
    pub nodes: u64,
}

/// Partial assignment with per-vertex degree intervals.
#[derive(Debug, Clone)]
pub struct SearchState<'g> {
    game: &'g Game,
    value: Vec<Option<bool>>,
    committed: Vec<u64>,
    residual: Vec<u64>,
    level: Vec<u32>,
    /// Vertex whose constraint forced the assignment; `None` for decisions.
    reason: Vec<Option<usize>>,
    position: Vec<usize>,
    trail: Vec<usize>,
    current_level: u32,
}

enum Search {
    Found,
    Conflict(BTreeSet<u32>),
    Budget,
}

impl<'g> SearchState<'g> {
    pub fn new(game: &'g Game) -> Self {
        let n = game.n();
        SearchState {
            game,
            value: vec![None; n],
            committed: vec![0; n],
            residual: (0..n).map(|v| game.weighted_degree(v)).collect(),
            level: vec![0; n],
            reason: vec![None; n],
            position: vec![0; n],
            trail: Vec::with_capacity(n),
            current_level: 0,
        }
    }

    pub fn value(&self, v: usize) -> Option<bool> {
        self.value[v]
    }

    /// Weighted degree already contributed by active neighbors.
    pub fn committed(&self, v: usize) -> u64 {
        self.committed[v]
    }

    /// Weighted degree of still unassigned neighbors.
    pub fn residual(&self, v: usize) -> u64 {
        self.residual[v]
    }

    pub fn assignment(&self) -> Vec<Option<bool>> {
        self.value.clone()
    }

    /// Can `v` end up playing `b` as a best response?
    pub fn feasible(&self, v: usize, b: bool) -> bool {
        let lo = self.committed[v];
        self.game.pattern(v).takes_value_in(b, lo, lo + self.residual[v])
    }

    /// Assigns `v` as a decision at the current level, without propagating.
    pub fn fix(&mut self, v: usize, b: bool) {
        assert!(self.value[v].is_none(), "vertex {v} already assigned");
        self.assign(v, b, None);
    }

    fn assign(&mut self, v: usize, b: bool, reason: Option<usize>) {
        self.value[v] = Some(b);
        self.level[v] = self.current_level;
        self.reason[v] = reason;
        self.position[v] = self.trail.len();
        self.trail.push(v);
        for &(u, w) in self.game.neighbors(v) {
            self.residual[u] -= w;
            if b {
                self.committed[u] += w;
            }
        }
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let v = self.trail.pop().unwrap();
            let b = self.value[v].take().unwrap();
            for &(u, w) in self.game.neighbors(v) {
                self.residual[u] += w;
                if b {
                    self.committed[u] -= w;
                }
            }
        }
    }

    /// Propagates every vertex to a fixpoint. Returns `false` on conflict,
    /// leaving the forced assignments in place.
    pub fn propagate(&mut self) -> bool {
        let all: Vec<usize> = (0..self.game.n()).collect();
        self.propagate_from(all).is_ok()
    }

    /// Returns the conflicting vertex on failure.
    fn propagate_from(&mut self, mut queue: Vec<usize>) -> std::result::Result<(), usize> {
        let mut queued = vec![false; self.game.n()];
        for &v in &queue {
            queued[v] = true;
        }
        while let Some(c) = queue.pop() {
            queued[c] = false;
            match self.value[c] {
                Some(b) => {
                    if !self.feasible(c, b) {
                        return Err(c);
                    }
                }
                None => {
                    let (f0, f1) = (self.feasible(c, false), self.feasible(c, true));
                    if !f0 && !f1 {
                        return Err(c);
                    }
                    if f0 != f1 {
                        self.assign(c, f1, Some(c));
                        for &(u, _) in self.game.neighbors(c) {
                            if !queued[u] {
                                queued[u] = true;
                                queue.push(u);
                            }
                        }
                        queue.push(c);
                        queued[c] = true;
                    }
                }
            }
        }
        Ok(())
    }

    fn touch_after_assign(&self, v: usize) -> Vec<usize> {
        let mut q: Vec<usize> = self.game.neighbors(v).iter().map(|&(u, _)| u).collect();
        q.push(v);
        q
    }

    /// Decision levels responsible for a conflict at the constraint of `c`.
    fn conflict_levels(&self, c: usize) -> BTreeSet<u32> {
        let mut levels = BTreeSet::new();
        let mut seen = vec![false; self.game.n()];
        let mut work: Vec<usize> = Vec::new();
        let closed = |v: usize| std::iter::once(v).chain(self.game.neighbors(v).iter().map(|&(u, _)| u));
        for x in closed(c) {
            if self.value[x].is_some() && !seen[x] {
                seen[x] = true;
                work.push(x);
            }
        }
        while let Some(x) = work.pop() {
            match self.reason[x] {
                None => {
                    levels.insert(self.level[x]);
                }
                Some(r) => {
                    for y in closed(r) {
                        if y != x && self.value[y].is_some() && self.position[y] < self.position[x] && !seen[y] {
                            seen[y] = true;
                            work.push(y);
                        }
                    }
                }
            }
        }
        levels
    }
}

/// Options for [`decide_pne_with`].
#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub budget: u64,
    /// Vertices whose value is fixed before search starts.
    pub fixed: Vec<Option<bool>>,
}

struct Solver<'g> {
    state: SearchState<'g>,
    order: Vec<usize>,
    nodes: u64,
    budget: u64,
}

impl Solver<'_> {
    fn pick(&self) -> Option<usize> {
        self.order.iter().copied().find(|&v| self.state.value[v].is_none())
    }

    fn search(&mut self, level: u32) -> Search {
        let Some(v) = self.pick() else { return Search::Found };
        let first = self.state.game.pattern(v).eval(self.state.committed[v]);
        let mut acc = BTreeSet::new();
        for b in [first, !first] {
            if self.nodes >= self.budget {
                return Search::Budget;
            }
            self.nodes += 1;
            let mark = self.state.trail.len();
            self.state.current_level = level;
            self.state.assign(v, b, None);
            let queue = self.state.touch_after_assign(v);
            let result = match self.state.propagate_from(queue) {
                Err(c) => Search::Conflict(self.state.conflict_levels(c)),
                Ok(()) => self.search(level + 1),
            };
            match result {
                Search::Found => return Search::Found,
                Search::Budget => return Search::Budget,
                Search::Conflict(mut set) => {
                    self.state.undo_to(mark);
                    if !set.remove(&level) {
                        return Search::Conflict(set);
                    }
                    acc.append(&mut set);
                }
            }
        }
        Search::Conflict(acc)
    }
}

/// Decides whether `g` has a PNE, exploring at most `budget` branches.
pub fn decide_pne(g: &Game, budget: u64) -> SolveOutcome {
    decide_pne_with(g, &SolveOptions { budget, fixed: vec![None; g.n()] }).expect("no fixed vertices")
}

/// Like [`decide_pne`], restricted to profiles agreeing with `options.fixed`.
pub fn decide_pne_with(g: &Game, options: &SolveOptions) -> Result<SolveOutcome> {
    if options.fixed.len() != g.n() {
        return Err(Error::ProfileLength { expected: g.n(), got: options.fixed.len() });
    }
    let mut state = SearchState::new(g);
    for (v, b) in options.fixed.iter().enumerate() {
        if let Some(b) = *b {
            state.fix(v, b);
        }
    }
    if !state.propagate() {
        return Ok(SolveOutcome { decision: Decision::NotExists, nodes: 0 });
    }
    let mut order: Vec<usize> = (0..g.n()).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(g.weighted_degree(v)), v));
    let mut solver = Solver { state, order, nodes: 0, budget: options.budget };
    let decision = match solver.search(1) {
        Search::Found => {
            let profile = Profile::from_fn(g.n(), |v| solver.state.value[v].unwrap());
            assert!(g.is_pne(&profile)?.is_pne, "solver produced a non-equilibrium");
            Decision::Exists(profile)
        }
        Search::Conflict(_) => Decision::NotExists,
        Search::Budget => Decision::BudgetExceeded,
    };
    Ok(SolveOutcome { decision, nodes: solver.nodes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::Edge;
    use crate::pattern::Pattern;
    use proptest::prelude::*;

    fn triangle(p: Pattern) -> Game {
        Game::homogeneous(3, p, vec![Edge::new(0, 1), Edge::new(1, 2), Edge::new(0, 2)]).unwrap()
    }

    #[test]
    fn edgeless_single_one_pattern() {
        let g = Game::homogeneous(5, Pattern::decreasing(1), vec![]).unwrap();
        assert_eq!(decide_pne(&g, DEFAULT_BUDGET).decision, Decision::Exists(Profile::ones(5)));
    }

    #[test]
    fn picky_triangle_has_single_active() {
        match decide_pne(&triangle(Pattern::picky(2)), DEFAULT_BUDGET).decision {
            Decision::Exists(s) => assert_eq!(s.count_active(), 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn copycat_pair_has_no_pne() {
        let g = Game::new(vec!["10*".parse().unwrap(), "0(1)*".parse().unwrap()], vec![Edge::new(0, 1)]).unwrap();
        assert_eq!(decide_pne(&g, DEFAULT_BUDGET).decision, Decision::NotExists);
    }

    #[test]
    fn budget_is_reported() {
        let g = Game::homogeneous(4, "1010*".parse().unwrap(), vec![Edge::new(0, 1), Edge::new(2, 3)]).unwrap();
        let out = decide_pne(&g, 0);
        assert_eq!(out.decision, Decision::BudgetExceeded);
        assert_eq!(out.nodes, 0);
    }

    #[test]
    fn fixed_vertices_restrict_search() {
        let g = triangle(Pattern::picky(2));
        let out = decide_pne_with(&g, &SolveOptions { budget: 100, fixed: vec![None, Some(true), None] }).unwrap();
        assert_eq!(out.decision, Decision::Exists("010".parse().unwrap()));
        let out =
            decide_pne_with(&g, &SolveOptions { budget: 100, fixed: vec![Some(true), Some(true), None] }).unwrap();
        assert_eq!(out.decision, Decision::NotExists);
        assert!(decide_pne_with(&g, &SolveOptions { budget: 100, fixed: vec![None] }).is_err());
    }

    const CHOICES: [&str; 7] = ["10*", "110*", "1010*", "10010*", "(10)*", "0(1)*", "01(0)*"];

    fn random_game(max_n: usize) -> impl Strategy<Value = Game> {
        (1..=max_n).prop_flat_map(|n| {
            let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
            let m = pairs.len();
            (
                prop::collection::vec(0..CHOICES.len(), n),
                prop::collection::vec(prop::option::weighted(0.4, 1u64..=3), m),
            )
                .prop_map(move |(pats, ws)| {
                    let patterns = pats.iter().map(|&i| CHOICES[i].parse().unwrap()).collect();
                    let edges =
                        pairs.iter().zip(ws).filter_map(|(&(u, v), w)| w.map(|w| Edge::weighted(u, v, w))).collect();
                    Game::new(patterns, edges).unwrap()
                })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn agrees_with_enumeration(g in random_game(10)) {
            let all = g.enumerate_pne(None).unwrap();
            match decide_pne(&g, DEFAULT_BUDGET).decision {
                Decision::Exists(s) => prop_assert!(all.contains(&s)),
                Decision::NotExists => prop_assert!(all.is_empty()),
                Decision::BudgetExceeded => prop_assert!(false),
            }
        }

        /// Forced values agree with every equilibrium extending the partial
        /// assignment, and conflicts only arise without such equilibria.
        #[test]
        fn propagation_is_sound(g in random_game(10), partial in prop::collection::vec(prop::option::weighted(0.3, any::<bool>()), 10)) {
            let n = g.n();
            let mut state = SearchState::new(&g);
            for v in 0..n {
                if let Some(b) = partial[v] {
                    state.fix(v, b);
                }
            }
            let consistent = state.propagate();
            let extensions: Vec<Profile> = g
                .enumerate_pne(None)
                .unwrap()
                .into_iter()
                .filter(|s| (0..n).all(|v| partial[v].is_none_or(|b| s[v] == b)))
                .collect();
            if !consistent {
                prop_assert!(extensions.is_empty());
            } else {
                for s in &extensions {
                    for v in 0..n {
                        if let Some(b) = state.value(v) {
                            prop_assert_eq!(s[v], b);
                        }
                    }
                }
            }
        }
    }
}
