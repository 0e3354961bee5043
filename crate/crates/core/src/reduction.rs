//! POSITIVE-1-IN-3-SAT to PNE existence for the picky pattern `1 0^k 1 0*`.
//!
//! Every clause becomes a CLAUSE gadget on three fresh vertices `t`, any two
//! occurrences of the same variable are tied by an EQUIV gadget, and every
//! constant-false position gets a FALSE gadget.
//!
//! Input format:
//!
//! ```text
//! p 1in3 <variables> <clauses>
//! <a> <b> <c>        # one line per clause; 1-based variable or 0 for false
//! ```

use std::collections::BTreeMap;
use std::fmt::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::content_lines;
use crate::gadgets::{build_gadget, Composer, Gadget, GadgetKind, Placement};
use crate::game::{Game, Profile};
use crate::pattern::Pattern;
use crate::solver::{decide_pne_with, Decision, SolveOptions, DEFAULT_BUDGET};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Literal {
    /// 0-based variable index.
    Var(usize),
    /// Constant false.
    Bottom,
}

impl Literal {
    fn from_token(x: usize) -> Literal {
        if x == 0 {
            Literal::Bottom
        } else {
            Literal::Var(x - 1)
        }
    }

    fn to_token(self) -> usize {
        match self {
            Literal::Var(i) => i + 1,
            Literal::Bottom => 0,
        }
    }

    pub fn value(self, sigma: &[bool]) -> bool {
        match self {
            Literal::Var(i) => sigma[i],
            Literal::Bottom => false,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Var(i) => write!(f, "x{}", i + 1),
            Literal::Bottom => f.write_str("⊥"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OneInThreeInstance {
    pub num_vars: usize,
    pub clauses: Vec<[Literal; 3]>,
}

impl OneInThreeInstance {
    pub fn new(num_vars: usize, clauses: Vec<[Literal; 3]>) -> Result<Self> {
        for c in &clauses {
            for l in c {
                if let Literal::Var(i) = *l {
                    if i >= num_vars {
                        return Err(Error::InvalidParameter(format!("variable {} exceeds count {num_vars}", i + 1)));
                    }
                }
            }
        }
        Ok(OneInThreeInstance { num_vars, clauses })
    }

    /// Variables (0-based) that occur in no clause.
    pub fn unused_vars(&self) -> Vec<usize> {
        let mut used = vec![false; self.num_vars];
        for l in self.clauses.iter().flatten() {
            if let Literal::Var(i) = *l {
                used[i] = true;
            }
        }
        (0..self.num_vars).filter(|&i| !used[i]).collect()
    }

    /// Exactly one literal of every clause is true.
    pub fn is_satisfied_by(&self, sigma: &[bool]) -> bool {
        sigma.len() == self.num_vars
            && self.clauses.iter().all(|c| c.iter().filter(|l| l.value(sigma)).count() == 1)
    }

    /// Every satisfying assignment, in lexicographic order.
    pub fn satisfying_assignments(&self) -> Vec<Vec<bool>> {
        assert!(self.num_vars < 32, "brute force limited to 31 variables");
        let m = self.num_vars;
        (0u64..1 << m)
            .map(|mask| (0..m).map(|i| mask >> (m - 1 - i) & 1 == 1).collect::<Vec<bool>>())
            .filter(|s| self.is_satisfied_by(s))
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("p 1in3 {} {}\n", self.num_vars, self.clauses.len());
        for c in &self.clauses {
            writeln!(out, "{} {} {}", c[0].to_token(), c[1].to_token(), c[2].to_token()).unwrap();
        }
        out
    }
}

pub fn parse_1in3(text: &str) -> Result<OneInThreeInstance> {
    let err = |line: usize, msg: String| Error::Parse { line, msg };
    // DIMACS-style `c` comment lines are skipped along with `#` comments
    let mut lines = content_lines(text).filter(|(_, t)| t[0] != "c");
    let (hline, header) = lines.next().ok_or_else(|| err(1, "empty input, expected `p 1in3 <m> <l>`".into()))?;
    let (m, l) = match header.as_slice() {
        ["p", "1in3", m, l] => (
            m.parse::<usize>().map_err(|_| err(hline, format!("bad variable count {m:?}")))?,
            l.parse::<usize>().map_err(|_| err(hline, format!("bad clause count {l:?}")))?,
        ),
        _ => return Err(err(hline, "expected header `p 1in3 <m> <l>`".into())),
    };
    let mut clauses = Vec::with_capacity(l);
    for (line, tokens) in lines {
        if tokens.len() != 3 {
            return Err(err(line, format!("expected 3 literals, found {}", tokens.len())));
        }
        let mut clause = [Literal::Bottom; 3];
        for (slot, tok) in clause.iter_mut().zip(&tokens) {
            let x: usize = tok.parse().map_err(|_| err(line, format!("bad literal {tok:?}")))?;
            if x > m {
                return Err(err(line, format!("variable {x} out of range 0..={m}")));
            }
            *slot = Literal::from_token(x);
        }
        clauses.push(clause);
    }
    if clauses.len() != l {
        return Err(err(hline, format!("header announces {l} clauses, found {}", clauses.len())));
    }
    OneInThreeInstance::new(m, clauses)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReductionOptions {
    /// Tie consecutive occurrences of each variable instead of every pair.
    pub equiv_chain: bool,
}

/// Everything needed to translate between assignments and profiles.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionCertificate {
    pub k: u64,
    pub num_vars: usize,
    /// Clause literals in file notation: 1-based variable or 0 for false.
    pub clauses: Vec<[usize; 3]>,
    /// Vertex (0-based) of the `j`-th position of clause `i`.
    pub t_vertices: Vec<[usize; 3]>,
    pub equiv_chain: bool,
    pub num_vertices: usize,
    pub num_edges: usize,
    /// Gadgets in construction order.
    pub gadgets: Vec<Placement>,
}

impl ReductionCertificate {
    pub fn instance(&self) -> Result<OneInThreeInstance> {
        let clauses = self.clauses.iter().map(|c| c.map(Literal::from_token)).collect();
        OneInThreeInstance::new(self.num_vars, clauses)
    }

    /// Rebuilds the compiled game from the gadget inventory alone.
    pub fn rebuild(&self) -> Result<Game> {
        let pattern = Pattern::picky(self.k);
        let mut composer = Composer::new();
        let mut cache: BTreeMap<(GadgetKind, usize), Gadget> = BTreeMap::new();
        for p in &self.gadgets {
            let needed = p.operands.iter().copied().max().map_or(0, |m| m + 1);
            while composer.n() < needed {
                composer.add_vertex(pattern.clone());
            }
            let g = match cache.entry((p.kind, p.arity)) {
                std::collections::btree_map::Entry::Occupied(e) => e.into_mut(),
                std::collections::btree_map::Entry::Vacant(e) => e.insert(build_gadget(p.kind, self.k, Some(p.arity))?),
            };
            let placed = composer.place(g, &p.operands)?;
            if placed != p {
                return Err(Error::Gadget(format!("inventory entry {p:?} does not replay")));
            }
        }
        while composer.n() < self.num_vertices {
            composer.add_vertex(pattern.clone());
        }
        Ok(composer.finish()?.0)
    }
}

/// Builds the game for `inst` with pattern `1 0^k 1 0*` on every vertex.
pub fn compile_reduction(
    inst: &OneInThreeInstance,
    k: u64,
    options: ReductionOptions,
) -> Result<(Game, ReductionCertificate)> {
    let pattern = Pattern::picky(k);
    let clause = build_gadget(GadgetKind::Clause, k, None)?;
    let equiv = build_gadget(GadgetKind::Equiv, k, None)?;
    let falsity = build_gadget(GadgetKind::False, k, None)?;

    let mut composer = Composer::new();
    let mut t_vertices = Vec::with_capacity(inst.clauses.len());
    for _ in &inst.clauses {
        let ts = [0; 3].map(|_| composer.add_vertex(pattern.clone()));
        composer.place(&clause, &ts)?;
        t_vertices.push(ts);
    }

    let mut occurrences: Vec<Vec<(usize, usize)>> = vec![Vec::new(); inst.num_vars];
    for (i, c) in inst.clauses.iter().enumerate() {
        for (j, l) in c.iter().enumerate() {
            if let Literal::Var(x) = *l {
                occurrences[x].push((i, j));
            }
        }
    }
    let mut pairs = Vec::new();
    for occ in &occurrences {
        if options.equiv_chain {
            pairs.extend(occ.windows(2).map(|w| (w[0], w[1])));
        } else {
            for (a, &p) in occ.iter().enumerate() {
                pairs.extend(occ[a + 1..].iter().map(|&q| (p, q)));
            }
        }
    }
    pairs.sort();
    for ((i, j), (i2, j2)) in pairs {
        composer.place(&equiv, &[t_vertices[i][j], t_vertices[i2][j2]])?;
    }

    for (i, c) in inst.clauses.iter().enumerate() {
        for (j, l) in c.iter().enumerate() {
            if *l == Literal::Bottom {
                composer.place(&falsity, &[t_vertices[i][j]])?;
            }
        }
    }

    let (game, gadgets) = composer.finish()?;
    let cert = ReductionCertificate {
        k,
        num_vars: inst.num_vars,
        clauses: inst.clauses.iter().map(|c| c.map(Literal::to_token)).collect(),
        t_vertices,
        equiv_chain: options.equiv_chain,
        num_vertices: game.n(),
        num_edges: game.edges().len(),
        gadgets,
    };
    Ok((game, cert))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WitnessProfile {
    pub profile: Profile,
    /// Set when the hand-written completions failed and search filled the
    /// gadgets instead. That indicates a bug in the witnesses.
    pub fallback_used: bool,
}

/// Turns a satisfying assignment into a PNE of the compiled game.
pub fn assignment_to_profile(
    inst: &OneInThreeInstance,
    cert: &ReductionCertificate,
    sigma: &[bool],
) -> Result<WitnessProfile> {
    if sigma.len() != inst.num_vars {
        return Err(Error::Assignment(format!("expected {} values, got {}", inst.num_vars, sigma.len())));
    }
    if let Some(i) = inst.clauses.iter().position(|c| c.iter().filter(|l| l.value(sigma)).count() != 1) {
        return Err(Error::Assignment(format!("clause {} does not have exactly one true literal", i + 1)));
    }
    let game = cert.rebuild()?;
    let mut s = Profile::zeros(game.n());
    for (c, ts) in inst.clauses.iter().zip(&cert.t_vertices) {
        for (l, &t) in c.iter().zip(ts) {
            s.set(t, l.value(sigma));
        }
    }
    let mut cache: BTreeMap<(GadgetKind, usize), Gadget> = BTreeMap::new();
    let mut complete = true;
    for p in &cert.gadgets {
        let g = match cache.entry((p.kind, p.arity)) {
            std::collections::btree_map::Entry::Occupied(e) => e.into_mut(),
            std::collections::btree_map::Entry::Vacant(e) => e.insert(build_gadget(p.kind, cert.k, Some(p.arity))?),
        };
        let operands: Vec<bool> = p.operands.iter().map(|&h| s[h]).collect();
        match g.witness(&operands) {
            Some(w) => {
                for (local, host) in p.vertex_map().into_iter().enumerate().skip(p.arity) {
                    s.set(host, w[local]);
                }
            }
            None => complete = false,
        }
    }
    if complete && game.is_pne(&s)?.is_pne {
        return Ok(WitnessProfile { profile: s, fallback_used: false });
    }

    let mut fixed = vec![None; game.n()];
    for &t in cert.t_vertices.iter().flatten() {
        fixed[t] = Some(s[t]);
    }
    match decide_pne_with(&game, &SolveOptions { budget: DEFAULT_BUDGET, fixed })?.decision {
        Decision::Exists(profile) => Ok(WitnessProfile { profile, fallback_used: true }),
        Decision::NotExists => Err(Error::Assignment("no equilibrium extends the assignment".into())),
        Decision::BudgetExceeded => Err(Error::Capacity("search budget exhausted while filling gadgets".into())),
    }
}

/// Reads the assignment off the `t` vertices of a PNE. Variables occurring
/// nowhere are reported false.
pub fn profile_to_assignment(
    inst: &OneInThreeInstance,
    cert: &ReductionCertificate,
    s: &Profile,
) -> Result<Vec<bool>> {
    let game = cert.rebuild()?;
    let report = game.is_pne(s)?;
    if !report.is_pne {
        return Err(Error::NotPne { violators: report.violators.iter().map(|v| v + 1).collect() });
    }
    let mut sigma: Vec<Option<bool>> = vec![None; inst.num_vars];
    for (i, (c, ts)) in inst.clauses.iter().zip(&cert.t_vertices).enumerate() {
        for (j, (l, &t)) in c.iter().zip(ts).enumerate() {
            match *l {
                Literal::Var(x) => match sigma[x] {
                    Some(b) if b != s[t] => {
                        return Err(Error::Assignment(format!(
                            "variable x{} read inconsistently at clause {} position {}",
                            x + 1,
                            i + 1,
                            j + 1
                        )));
                    }
                    _ => sigma[x] = Some(s[t]),
                },
                Literal::Bottom if s[t] => {
                    return Err(Error::Assignment(format!("false position {} of clause {} is active", j + 1, i + 1)));
                }
                Literal::Bottom => {}
            }
        }
    }
    let sigma: Vec<bool> = sigma.into_iter().map(|b| b.unwrap_or(false)).collect();
    if !inst.is_satisfied_by(&sigma) {
        return Err(Error::Assignment("read-back assignment does not satisfy every clause".into()));
    }
    Ok(sigma)
}
