//! Shared helpers for integration tests: random games and an independent
//! projected model enumerator for CNF formulas.

#![allow(dead_code)]

use pgg_core::solver::CnfFormula;
use pgg_core::{Edge, Game, Pattern, Profile};
use rand::Rng;

/// Patterns mixing every class the library distinguishes.
pub const MIXED_PATTERNS: [&str; 10] =
    ["10*", "110*", "1110*", "1010*", "10010*", "(10)*", "0(1)*", "01(0)*", "1(01)*", "0*"];

pub fn random_mixed_game(rng: &mut impl Rng, n: usize, edge_percent: u32, max_weight: u64) -> Game {
    let patterns = (0..n).map(|_| MIXED_PATTERNS[rng.random_range(0..MIXED_PATTERNS.len())].parse().unwrap()).collect();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_range(0..100) < edge_percent {
                edges.push(Edge::weighted(u, v, rng.random_range(1..=max_weight)));
            }
        }
    }
    Game::new(patterns, edges).unwrap()
}

/// Unweighted game with `1^{k_v} 0*` patterns, `k_v` uniform in `1..=k_max`.
pub fn random_decreasing_game(rng: &mut impl Rng, n: usize, edge_percent: u32, k_max: u64) -> Game {
    let patterns = (0..n).map(|_| Pattern::decreasing(rng.random_range(1..=k_max))).collect();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_range(0..100) < edge_percent {
                edges.push(Edge::new(u, v));
            }
        }
    }
    Game::new(patterns, edges).unwrap()
}

/// Edge lists of every labelled simple graph on `n` vertices.
pub fn all_graphs(n: usize) -> impl Iterator<Item = Vec<Edge>> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    (0u64..1 << pairs.len()).map(move |mask| {
        pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &(u, v))| Edge::new(u, v)).collect()
    })
}

/// DPLL with unit propagation over occurrence lists. Branches on the vertex
/// variables first and collects every distinct projection of a model onto
/// them, in lexicographic order.
pub fn projected_models(f: &CnfFormula) -> Vec<Profile> {
    let mut d = Dpll::new(f);
    let mut out = Vec::new();
    if d.initial_units() {
        d.enumerate(0, &mut out);
    }
    out.sort();
    out
}

struct Dpll<'a> {
    f: &'a CnfFormula,
    /// Clauses containing each literal, indexed by `2·(var−1) + negated`.
    occurrences: Vec<Vec<usize>>,
    value: Vec<Option<bool>>,
    trail: Vec<usize>,
}

fn index(lit: i32) -> usize {
    2 * (lit.unsigned_abs() as usize - 1) + usize::from(lit < 0)
}

impl<'a> Dpll<'a> {
    fn new(f: &'a CnfFormula) -> Self {
        let vars = f.num_vars as usize;
        let mut occurrences = vec![Vec::new(); 2 * vars];
        for (ci, c) in f.clauses.iter().enumerate() {
            for &l in c {
                occurrences[index(l)].push(ci);
            }
        }
        Dpll { f, occurrences, value: vec![None; vars], trail: Vec::new() }
    }

    fn lit_value(&self, lit: i32) -> Option<bool> {
        self.value[lit.unsigned_abs() as usize - 1].map(|b| b == (lit > 0))
    }

    fn set(&mut self, lit: i32) {
        let var = lit.unsigned_abs() as usize - 1;
        self.value[var] = Some(lit > 0);
        self.trail.push(var);
    }

    fn undo(&mut self, mark: usize) {
        for var in self.trail.drain(mark..) {
            self.value[var] = None;
        }
    }

    fn initial_units(&mut self) -> bool {
        let start = self.trail.len();
        let f = self.f;
        for c in &f.clauses {
            match c.as_slice() {
                [] => return false,
                [l] => match self.lit_value(*l) {
                    Some(false) => return false,
                    Some(true) => {}
                    None => self.set(*l),
                },
                _ => {}
            }
        }
        self.propagate(start)
    }

    /// Processes the trail from `head`; returns `false` on conflict.
    fn propagate(&mut self, mut head: usize) -> bool {
        let f = self.f;
        while head < self.trail.len() {
            let var = self.trail[head];
            head += 1;
            let lit = var as i32 + 1;
            let falsified = if self.value[var] == Some(true) { -lit } else { lit };
            for ci in 0..self.occurrences[index(falsified)].len() {
                let clause = &f.clauses[self.occurrences[index(falsified)][ci]];
                let mut unassigned = None;
                let mut free = 0;
                let mut satisfied = false;
                for &l in clause {
                    match self.lit_value(l) {
                        Some(true) => {
                            satisfied = true;
                            break;
                        }
                        Some(false) => {}
                        None => {
                            free += 1;
                            unassigned = Some(l);
                        }
                    }
                }
                if satisfied {
                    continue;
                }
                match free {
                    0 => return false,
                    1 => self.set(unassigned.unwrap()),
                    _ => {}
                }
            }
        }
        true
    }

    fn branch(&mut self, var: usize, then: &mut dyn FnMut(&mut Self) -> bool) -> bool {
        for b in [false, true] {
            let mark = self.trail.len();
            let lit = if b { var as i32 + 1 } else { -(var as i32 + 1) };
            self.set(lit);
            let stop = self.propagate(mark) && then(self);
            self.undo(mark);
            if stop {
                return true;
            }
        }
        false
    }

    fn enumerate(&mut self, v: usize, out: &mut Vec<Profile>) {
        if v == self.f.num_vertices {
            if self.satisfiable() {
                out.push(Profile::from_fn(v, |i| self.value[i].unwrap()));
            }
            return;
        }
        if self.value[v].is_some() {
            self.enumerate(v + 1, out);
            return;
        }
        self.branch(v, &mut |d| {
            d.enumerate(v + 1, out);
            false
        });
    }

    /// Whether the remaining auxiliary variables can be completed.
    fn satisfiable(&mut self) -> bool {
        match self.value.iter().position(Option::is_none) {
            None => true,
            Some(var) => self.branch(var, &mut |d| d.satisfiable()),
        }
    }
}
