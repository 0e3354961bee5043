//! CNF encoding of PNE existence.
//!
//! Variable `v + 1` is true iff vertex `v` is active. For each vertex the
//! active weighted degree `S` over its neighbors `u_1..u_m` is tracked by a
//! weighted sequential counter with auxiliary variables `c[i][j] <=> S_i >= j`,
//! where `S_i` sums the first `i` neighbors. Then for each reachable degree `d`,
//! `S = d` forces the vertex to play the pattern's value at `d`.

use std::fmt::Write;

use crate::game::Game;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfFormula {
    pub num_vars: u32,
    /// Vertices `0..n` map to variables `1..=n`.
    pub num_vertices: usize,
    pub clauses: Vec<Vec<i32>>,
}

impl CnfFormula {
    /// Evaluates under a full assignment, where `assignment[i]` is variable `i + 1`.
    pub fn evaluate(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|c| {
            c.iter().any(|&l| {
                let value = assignment[l.unsigned_abs() as usize - 1];
                if l > 0 { value } else { !value }
            })
        })
    }

    pub fn to_dimacs(&self) -> String {
        let mut out = String::new();
        writeln!(out, "c PNE existence encoding").unwrap();
        writeln!(out, "c variable v (1..={}) is true iff vertex v is active", self.num_vertices).unwrap();
        writeln!(out, "c variables above {} are counter auxiliaries", self.num_vertices).unwrap();
        for v in 1..=self.num_vertices {
            writeln!(out, "c vertex {v} -> var {v}").unwrap();
        }
        writeln!(out, "p cnf {} {}", self.num_vars, self.clauses.len()).unwrap();
        for c in &self.clauses {
            for l in c {
                write!(out, "{l} ").unwrap();
            }
            writeln!(out, "0").unwrap();
        }
        out
    }
}

#[derive(Clone, Copy)]
enum Lit {
    True,
    False,
    Var(i32),
}

impl Lit {
    fn not(self) -> Lit {
        match self {
            Lit::True => Lit::False,
            Lit::False => Lit::True,
            Lit::Var(x) => Lit::Var(-x),
        }
    }
}

struct Builder {
    next_var: i32,
    clauses: Vec<Vec<i32>>,
}

impl Builder {
    fn clause(&mut self, lits: &[Lit]) {
        let mut out = Vec::with_capacity(lits.len());
        for l in lits {
            match *l {
                Lit::True => return,
                Lit::False => {}
                Lit::Var(x) => out.push(x),
            }
        }
        self.clauses.push(out);
    }
}

pub fn export_cnf(g: &Game) -> CnfFormula {
    let n = g.n();
    let mut b = Builder { next_var: n as i32 + 1, clauses: Vec::new() };
    for v in 0..n {
        let nbrs = g.neighbors(v);
        // prefix[i] = total weight of the first i neighbors
        let mut prefix = vec![0u64];
        for &(_, w) in nbrs {
            prefix.push(prefix.last().unwrap() + w);
        }
        // counter[i][j - 1] is the variable for S_i >= j
        let mut counter: Vec<Vec<i32>> = vec![Vec::new()];
        for &d in &prefix[1..] {
            let row = (0..d).map(|k| b.next_var + k as i32).collect();
            b.next_var += d as i32;
            counter.push(row);
        }
        let at = |i: usize, j: i64| -> Lit {
            if j <= 0 {
                Lit::True
            } else if j as u64 > prefix[i] {
                Lit::False
            } else {
                Lit::Var(counter[i][j as usize - 1])
            }
        };
        for (i, &(u, w)) in nbrs.iter().enumerate().map(|(i, x)| (i + 1, x)) {
            let s = Lit::Var(u as i32 + 1);
            let w = w as i64;
            for j in 1..=prefix[i] as i64 {
                let c = at(i, j);
                b.clause(&[at(i - 1, j).not(), c]);
                b.clause(&[s.not(), at(i - 1, j - w).not(), c]);
                b.clause(&[c.not(), at(i - 1, j), s]);
                b.clause(&[c.not(), at(i - 1, j), at(i - 1, j - w)]);
            }
        }
        let m = nbrs.len();
        let own = Lit::Var(v as i32 + 1);
        for d in 0..=prefix[m] {
            let play = if g.pattern(v).eval(d) { own } else { own.not() };
            b.clause(&[at(m, d as i64).not(), at(m, d as i64 + 1), play]);
        }
    }
    CnfFormula { num_vars: (b.next_var - 1) as u32, num_vertices: n, clauses: b.clauses }
}
