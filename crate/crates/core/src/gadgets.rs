//! Gadgets for the picky pattern `1 0^k 1 0*` and a verifier for their
//! contracts.
//!
//! Every gadget has operand vertices (numbered first) that get identified with
//! host vertices, and non-operand vertices that never see anything outside the
//! gadget. Non-operands adjacent to an operand form the membrane.
//!
//! A contract describes which operand vectors the gadget lets through:
//! * restrictive: a forbidden vector has no completion in which every checked
//!   vertex best-responds,
//! * permissive: every allowed vector has one, with a silent membrane when
//!   the contract asks for it,
//! * safe: the membrane is inactive in every completion.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::write_game_with_comments;
use crate::game::{Edge, Game, MAX_BRUTE_FORCE_N};
use crate::pattern::Pattern;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GadgetKind {
    NearOr,
    True,
    False,
    Equiv,
    Clause,
}

impl GadgetKind {
    pub fn name(self) -> &'static str {
        match self {
            GadgetKind::NearOr => "near-or",
            GadgetKind::True => "true",
            GadgetKind::False => "false",
            GadgetKind::Equiv => "equiv",
            GadgetKind::Clause => "clause",
        }
    }

    /// Operand count, fixed for every kind except NEAR-OR.
    pub fn fixed_arity(self) -> Option<usize> {
        match self {
            GadgetKind::NearOr => None,
            GadgetKind::True | GadgetKind::False => Some(1),
            GadgetKind::Equiv => Some(2),
            GadgetKind::Clause => Some(3),
        }
    }
}

impl fmt::Display for GadgetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GadgetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "near-or" | "nearor" => Ok(GadgetKind::NearOr),
            "true" => Ok(GadgetKind::True),
            "false" => Ok(GadgetKind::False),
            "equiv" => Ok(GadgetKind::Equiv),
            "clause" => Ok(GadgetKind::Clause),
            _ => Err(Error::Gadget(format!("unknown gadget kind {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    Operand,
    Membrane,
    Internal,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Child {
    gadget: Gadget,
    /// Child-local id to parent-local id.
    map: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gadget {
    kind: GadgetKind,
    k: u64,
    arity: usize,
    labels: Vec<String>,
    edges: Vec<(usize, usize)>,
    roles: Vec<Role>,
    children: Vec<Child>,
}

impl Gadget {
    fn start(kind: GadgetKind, k: u64, operands: &[&str]) -> Self {
        Gadget {
            kind,
            k,
            arity: operands.len(),
            labels: operands.iter().map(|s| s.to_string()).collect(),
            edges: Vec::new(),
            roles: Vec::new(),
            children: Vec::new(),
        }
    }

    fn fresh(&mut self, label: impl Into<String>) -> usize {
        self.labels.push(label.into());
        self.labels.len() - 1
    }

    fn edge(&mut self, a: usize, b: usize) {
        self.edges.push((a, b));
    }

    /// Copies `child` in, identifying its operands with `operands`.
    fn embed(&mut self, child: Gadget, operands: &[usize], prefix: &str) {
        assert_eq!(child.arity, operands.len());
        let mut map = operands.to_vec();
        for label in &child.labels[child.arity..] {
            map.push(self.fresh(format!("{prefix}.{label}")));
        }
        for &(a, b) in &child.edges {
            self.edges.push((map[a], map[b]));
        }
        self.children.push(Child { gadget: child, map });
    }

    fn finish(mut self) -> Self {
        let n = self.labels.len();
        let mut roles = vec![Role::Internal; n];
        roles[..self.arity].fill(Role::Operand);
        for &(a, b) in &self.edges {
            if a < self.arity && b >= self.arity {
                roles[b] = Role::Membrane;
            }
            if b < self.arity && a >= self.arity {
                roles[a] = Role::Membrane;
            }
        }
        self.roles = roles;
        self
    }

    pub fn kind(&self) -> GadgetKind {
        self.kind
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn non_operand_count(&self) -> usize {
        self.n() - self.arity
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn roles(&self) -> &[Role] {
        &self.roles
    }

    pub fn membrane(&self) -> Vec<usize> {
        (0..self.n()).filter(|&v| self.roles[v] == Role::Membrane).collect()
    }

    /// The picky pattern every gadget vertex carries.
    pub fn pattern(&self) -> Pattern {
        Pattern::picky(self.k)
    }

    /// The gadget as a standalone game, operands included.
    pub fn to_game(&self) -> Game {
        let edges = self.edges.iter().map(|&(a, b)| Edge::new(a, b)).collect();
        Game::homogeneous(self.n(), self.pattern(), edges).expect("gadget graphs are simple")
    }

    /// Game text with a comment block listing each vertex's label and role.
    pub fn emit(&self) -> String {
        let mut comments = vec![format!("gadget {} k={} arity={}", self.kind, self.k, self.arity)];
        for v in 0..self.n() {
            let role = match self.roles[v] {
                Role::Operand => "operand",
                Role::Membrane => "membrane",
                Role::Internal => "internal",
            };
            comments.push(format!("vertex {} {} {}", v + 1, self.labels[v], role));
        }
        write_game_with_comments(&self.to_game(), &comments)
    }

    /// Checks role bookkeeping against the edge set.
    pub fn check_structure(&self) -> Result<()> {
        let n = self.n();
        let mut membrane = vec![false; n];
        let mut seen = BTreeSet::new();
        for &(a, b) in &self.edges {
            if a >= n || b >= n || a == b || !seen.insert((a.min(b), a.max(b))) {
                return Err(Error::Gadget(format!("bad edge {a}-{b} in {}", self.kind)));
            }
            for (x, y) in [(a, b), (b, a)] {
                if x < self.arity && y >= self.arity {
                    membrane[y] = true;
                }
            }
        }
        for v in 0..n {
            let expected = if v < self.arity {
                Role::Operand
            } else if membrane[v] {
                Role::Membrane
            } else {
                Role::Internal
            };
            if self.roles[v] != expected {
                return Err(Error::Gadget(format!("vertex {} ({}) has role {:?}", v, self.labels[v], self.roles[v])));
            }
        }
        Ok(())
    }

    /// Hand-written completion for the given operand values. `None` for a
    /// forbidden vector or a wrong operand count.
    pub fn witness(&self, operands: &[bool]) -> Option<Vec<bool>> {
        if operands.len() != self.arity {
            return None;
        }
        let mut s = vec![false; self.n()];
        s[..self.arity].copy_from_slice(operands);
        self.fill(&mut s)?;
        Some(s)
    }

    fn fill(&self, s: &mut [bool]) -> Option<()> {
        let (l, k) = (self.arity, self.k as usize);
        match self.kind {
            GadgetKind::NearOr | GadgetKind::True => {
                if k == 1 {
                    // w y z y' q z'
                    s[l + 4] = true;
                } else {
                    s[l + 3..l + 3 + 2 * k].fill(true);
                }
            }
            GadgetKind::False => s[1..=k].fill(true),
            GadgetKind::Equiv => s[3..3 + k].fill(true),
            GadgetKind::Clause => {
                let active: Vec<usize> = (0..3).filter(|&j| s[j]).collect();
                let [j] = active[..] else { return None };
                if k == 1 {
                    // path groups after the embedded NEAR-OR: t1-t2, t2-t3, t1-t3
                    let group = match j {
                        0 => 1,
                        1 => 2,
                        _ => 0,
                    };
                    let base = 3 + 6 + 3 * group;
                    s[base..base + 3].fill(true);
                }
            }
        }
        for child in &self.children {
            let mut cs: Vec<bool> = child.map.iter().map(|&p| s[p]).collect();
            cs[child.gadget.arity..].fill(false);
            child.gadget.fill(&mut cs)?;
            for i in child.gadget.arity..child.gadget.n() {
                s[child.map[i]] = cs[i];
            }
        }
        Some(())
    }
}

fn near_or(kind: GadgetKind, k: u64, arity: usize) -> Gadget {
    let operands: Vec<String> = if arity == 1 {
        vec!["x".into()]
    } else {
        (1..=arity).map(|i| format!("x{i}")).collect()
    };
    let refs: Vec<&str> = operands.iter().map(String::as_str).collect();
    let mut g = Gadget::start(kind, k, &refs);
    let w = g.fresh("w");
    let y = g.fresh("y");
    let z = g.fresh("z");
    if k == 1 {
        let y2 = g.fresh("y'");
        let q = g.fresh("q");
        let z2 = g.fresh("z'");
        for (a, b) in [(w, y), (y, y2), (y2, q), (q, y), (y, z), (z, q), (q, z2), (z2, z), (z, w)] {
            g.edge(a, b);
        }
    } else {
        for (a, b) in [(w, y), (y, z), (z, w)] {
            g.edge(a, b);
        }
        for i in 1..=k {
            let leaf = g.fresh(format!("Y{i}"));
            g.edge(y, leaf);
        }
        for i in 1..=k {
            let leaf = g.fresh(format!("Z{i}"));
            g.edge(z, leaf);
        }
    }
    for x in 0..arity {
        g.edge(x, w);
    }
    g.finish()
}

fn false_gadget(k: u64) -> Gadget {
    let mut g = Gadget::start(GadgetKind::False, k, &["x"]);
    let ys: Vec<usize> = (1..=k).map(|i| g.fresh(format!("y{i}"))).collect();
    let mut outer = vec![0];
    outer.extend(&ys);
    g.embed(near_or(GadgetKind::NearOr, k, k as usize + 1), &outer, "or");
    for (i, &y) in ys.iter().enumerate() {
        g.embed(near_or(GadgetKind::True, k, 1), &[y], &format!("true{}", i + 1));
    }
    g.finish()
}

fn equiv_gadget(k: u64) -> Gadget {
    let mut g = Gadget::start(GadgetKind::Equiv, k, &["x1", "x2"]);
    let y = g.fresh("y");
    let zs: Vec<usize> = (1..=k).map(|i| g.fresh(format!("z{i}"))).collect();
    g.edge(y, 0);
    g.edge(y, 1);
    for &z in &zs {
        g.edge(y, z);
    }
    g.embed(false_gadget(k), &[y], "false");
    for (i, &z) in zs.iter().enumerate() {
        g.embed(near_or(GadgetKind::True, k, 1), &[z], &format!("true{}", i + 1));
    }
    g.finish()
}

fn clause_gadget(k: u64) -> Gadget {
    let mut g = Gadget::start(GadgetKind::Clause, k, &["t1", "t2", "t3"]);
    if k == 1 {
        g.embed(near_or(GadgetKind::NearOr, 1, 3), &[0, 1, 2], "or");
        for (name, a, b) in [("x", 0, 1), ("y", 1, 2), ("z", 0, 2)] {
            for i in 1..=3 {
                let v = g.fresh(format!("{name}{i}"));
                g.edge(a, v);
                g.edge(v, b);
            }
        }
    } else {
        g.edge(0, 1);
        g.edge(1, 2);
        g.edge(0, 2);
    }
    g.finish()
}

/// Builds a gadget. `arity` is required for NEAR-OR and must match the fixed
/// operand count for every other kind when given.
pub fn build_gadget(kind: GadgetKind, k: u64, arity: Option<usize>) -> Result<Gadget> {
    if k == 0 {
        return Err(Error::Gadget("k must be at least 1".into()));
    }
    let arity = match (kind.fixed_arity(), arity) {
        (None, Some(l)) if l >= 1 => l,
        (None, _) => return Err(Error::Gadget("near-or needs an arity of at least 1".into())),
        (Some(f), Some(l)) if l != f => {
            return Err(Error::Gadget(format!("{kind} has arity {f}, not {l}")));
        }
        (Some(f), _) => f,
    };
    Ok(match kind {
        GadgetKind::NearOr | GadgetKind::True => near_or(kind, k, arity),
        GadgetKind::False => false_gadget(k),
        GadgetKind::Equiv => equiv_gadget(k),
        GadgetKind::Clause => clause_gadget(k),
    })
}

/// Which vertices must best-respond during verification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OperandModel {
    /// Operands are driven by an unknown host; only non-operands are checked.
    Exempt,
    /// Operands have no outside neighbors and are checked too.
    Isolated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Permissiveness {
    /// Allowed vectors need a completion with every membrane vertex inactive.
    QuietMembrane,
    AnyCompletion,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Allowed {
    Sums(BTreeSet<usize>),
    Vectors(BTreeSet<Vec<bool>>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GadgetContract {
    pub allowed: Allowed,
    pub safe: bool,
    pub permissiveness: Permissiveness,
    pub operand_model: OperandModel,
}

impl GadgetContract {
    /// The contract each gadget is built to satisfy.
    pub fn standard(g: &Gadget) -> Self {
        let quiet = |allowed| GadgetContract {
            allowed,
            safe: true,
            permissiveness: Permissiveness::QuietMembrane,
            operand_model: OperandModel::Exempt,
        };
        match g.kind {
            GadgetKind::NearOr | GadgetKind::True => {
                let banned = [0, g.k as usize + 1];
                quiet(Allowed::Sums((0..=g.arity).filter(|s| !banned.contains(s)).collect()))
            }
            GadgetKind::False => quiet(Allowed::Sums([0].into())),
            GadgetKind::Equiv => quiet(Allowed::Vectors([vec![false, false], vec![true, true]].into())),
            GadgetKind::Clause => GadgetContract {
                allowed: Allowed::Vectors((0..3).map(|j| (0..3).map(|i| i == j).collect()).collect()),
                safe: false,
                permissiveness: Permissiveness::AnyCompletion,
                operand_model: OperandModel::Isolated,
            },
        }
    }

    pub fn allows(&self, operands: &[bool]) -> bool {
        match &self.allowed {
            Allowed::Sums(sums) => sums.contains(&operands.iter().filter(|&&b| b).count()),
            Allowed::Vectors(vs) => vs.contains(operands),
        }
    }

    pub fn describe(&self) -> String {
        let allowed = match &self.allowed {
            Allowed::Sums(s) => format!("operand sum in {s:?}"),
            Allowed::Vectors(vs) => {
                let vs: Vec<String> = vs.iter().map(|v| bits(v)).collect();
                format!("operand vector in {{{}}}", vs.join(", "))
            }
        };
        format!("{allowed}{}", if self.safe { "; safe" } else { "" })
    }
}

fn bits(v: &[bool]) -> String {
    v.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerifyMode {
    Exact,
    /// TRUE and FALSE sub-gadgets are replaced by their guaranteed effect:
    /// the operand is fixed and the sub-gadget contributes nothing.
    Compositional,
}

impl FromStr for VerifyMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(VerifyMode::Exact),
            "compositional" => Ok(VerifyMode::Compositional),
            _ => Err(Error::InvalidParameter(format!("unknown verification mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ContractReport {
    pub kind: GadgetKind,
    pub k: u64,
    pub arity: usize,
    pub mode: VerifyMode,
    pub contract: String,
    /// Vertices in the enumerated graph; the state space is `2^vertices`.
    pub vertices: usize,
    /// Search nodes visited.
    pub nodes: u64,
    /// Operand vectors with at least one completion.
    pub realized: Vec<String>,
    pub forbidden_realized: Vec<String>,
    pub allowed_missing: Vec<String>,
    pub unsafe_vectors: Vec<String>,
    pub restrictive: bool,
    pub permissive: bool,
    pub safe: Option<bool>,
    /// The hand-written witnesses are valid completions for all allowed vectors.
    pub witnesses_valid: bool,
    pub sub_reports: Vec<ContractReport>,
    pub passed: bool,
}

/// A reduced copy of a gadget prepared for enumeration.
struct Frame {
    adj: Vec<Vec<usize>>,
    arity: usize,
    fixed: Vec<Option<bool>>,
    checked: Vec<bool>,
    membrane: Vec<usize>,
}

impl Frame {
    fn new(g: &Gadget, mode: VerifyMode, model: OperandModel) -> (Frame, Vec<&Gadget>) {
        let n = g.n();
        let mut keep = vec![true; n];
        let mut fixed = vec![None; n];
        let mut abstracted = Vec::new();
        if mode == VerifyMode::Compositional {
            for child in &g.children {
                let value = match child.gadget.kind {
                    GadgetKind::True => true,
                    GadgetKind::False => false,
                    _ => continue,
                };
                fixed[child.map[0]] = Some(value);
                for &v in &child.map[child.gadget.arity..] {
                    keep[v] = false;
                }
                abstracted.push(&child.gadget);
            }
        }
        let mut new_id = vec![usize::MAX; n];
        let mut count = 0;
        for v in 0..n {
            if keep[v] {
                new_id[v] = count;
                count += 1;
            }
        }
        let mut adj = vec![Vec::new(); count];
        for &(a, b) in &g.edges {
            if keep[a] && keep[b] {
                adj[new_id[a]].push(new_id[b]);
                adj[new_id[b]].push(new_id[a]);
            }
        }
        let pick = |v: usize| keep[v].then_some(new_id[v]);
        let fixed_new: Vec<Option<bool>> = (0..n).filter(|&v| keep[v]).map(|v| fixed[v]).collect();
        let checked = (0..count).map(|v| v >= g.arity || model == OperandModel::Isolated).collect();
        let membrane = g.membrane().into_iter().filter_map(pick).collect();
        (Frame { adj, arity: g.arity, fixed: fixed_new, checked, membrane }, abstracted)
    }

    fn n(&self) -> usize {
        self.adj.len()
    }
}

#[derive(Debug, Default, Clone, Copy)]
struct VectorOutcome {
    any: bool,
    quiet: bool,
    membrane_active: bool,
    nodes: u64,
}

struct Enumerator<'a> {
    frame: &'a Frame,
    pattern: Pattern,
    order: Vec<usize>,
    /// `checks[i]` become decidable once the first `i` free vertices are set.
    checks: Vec<Vec<usize>>,
}

impl<'a> Enumerator<'a> {
    fn new(frame: &'a Frame, pattern: Pattern) -> Self {
        let n = frame.n();
        // breadth-first from the pre-assigned vertices so neighborhoods close early
        let mut pos = vec![usize::MAX; n];
        let mut order = Vec::new();
        let mut queue = std::collections::VecDeque::new();
        for v in 0..n {
            if v < frame.arity || frame.fixed[v].is_some() {
                pos[v] = 0;
                queue.push_back(v);
            }
        }
        loop {
            while let Some(v) = queue.pop_front() {
                let mut nbrs = frame.adj[v].clone();
                nbrs.sort_unstable();
                for u in nbrs {
                    if pos[u] == usize::MAX {
                        order.push(u);
                        pos[u] = order.len();
                        queue.push_back(u);
                    }
                }
            }
            match (0..n).find(|&v| pos[v] == usize::MAX) {
                Some(v) => {
                    order.push(v);
                    pos[v] = order.len();
                    queue.push_back(v);
                }
                None => break,
            }
        }
        let mut checks = vec![Vec::new(); order.len() + 1];
        for c in 0..n {
            if frame.checked[c] {
                let ready = frame.adj[c].iter().map(|&u| pos[u]).chain([pos[c]]).max().unwrap();
                checks[ready].push(c);
            }
        }
        Enumerator { frame, pattern, order, checks }
    }

    fn ok(&self, s: &[bool], c: usize) -> bool {
        let d = self.frame.adj[c].iter().filter(|&&u| s[u]).count() as u64;
        self.pattern.eval(d) == s[c]
    }

    fn outcome(&self, operands: &[bool]) -> VectorOutcome {
        let mut s = vec![false; self.frame.n()];
        s[..self.frame.arity].copy_from_slice(operands);
        for (v, f) in self.frame.fixed.iter().enumerate() {
            if let Some(b) = f {
                s[v] = *b;
            }
        }
        let mut out = VectorOutcome::default();
        if self.checks[0].iter().all(|&c| self.ok(&s, c)) {
            self.dfs(0, &mut s, &mut out);
        }
        out
    }

    /// Returns `true` once nothing more can be learned for this vector.
    fn dfs(&self, i: usize, s: &mut [bool], out: &mut VectorOutcome) -> bool {
        out.nodes += 1;
        if i == self.order.len() {
            out.any = true;
            if self.frame.membrane.iter().any(|&m| s[m]) {
                out.membrane_active = true;
            } else {
                out.quiet = true;
            }
            return out.quiet && (out.membrane_active || self.frame.membrane.is_empty());
        }
        let v = self.order[i];
        for b in [false, true] {
            s[v] = b;
            if self.checks[i + 1].iter().all(|&c| self.ok(s, c)) && self.dfs(i + 1, s, out) {
                s[v] = false;
                return true;
            }
        }
        s[v] = false;
        false
    }
}

fn all_vectors(arity: usize) -> Vec<Vec<bool>> {
    (0u32..1 << arity).map(|m| (0..arity).map(|i| m >> (arity - 1 - i) & 1 == 1).collect()).collect()
}

fn witness_ok(g: &Gadget, contract: &GadgetContract, operands: &[bool]) -> bool {
    let Some(s) = g.witness(operands) else { return false };
    let game = g.to_game();
    let profile = crate::game::Profile::from_fn(g.n(), |v| s[v]);
    let checked_ok = (0..g.n())
        .filter(|&v| v >= g.arity || contract.operand_model == OperandModel::Isolated)
        .all(|v| game.best_response(&profile, v).response == s[v]);
    let quiet = g.membrane().iter().all(|&m| !s[m]);
    checked_ok && (quiet || contract.permissiveness == Permissiveness::AnyCompletion)
}

/// Machine-checks `contract` for `g` by enumerating every operand vector and
/// every completion of the remaining vertices.
pub fn verify_contract(g: &Gadget, contract: &GadgetContract, mode: VerifyMode) -> Result<ContractReport> {
    let (frame, abstracted) = Frame::new(g, mode, contract.operand_model);
    if frame.n() > MAX_BRUTE_FORCE_N {
        return Err(Error::Capacity(format!(
            "{} k={} has {} vertices in {:?} mode; enumeration is limited to {MAX_BRUTE_FORCE_N}",
            g.kind,
            g.k,
            frame.n(),
            mode
        )));
    }
    let mut sub_reports: Vec<ContractReport> = Vec::new();
    for sub in abstracted {
        if sub_reports.iter().any(|r| r.kind == sub.kind && r.k == sub.k && r.arity == sub.arity) {
            continue;
        }
        sub_reports.push(verify_contract(sub, &GadgetContract::standard(sub), mode)?);
    }

    let enumerator = Enumerator::new(&frame, g.pattern());
    let vectors = all_vectors(g.arity);
    let outcomes: Vec<VectorOutcome> = vectors.par_iter().map(|v| enumerator.outcome(v)).collect();

    let mut report = ContractReport {
        kind: g.kind,
        k: g.k,
        arity: g.arity,
        mode,
        contract: contract.describe(),
        vertices: frame.n(),
        nodes: outcomes.iter().map(|o| o.nodes).sum(),
        realized: Vec::new(),
        forbidden_realized: Vec::new(),
        allowed_missing: Vec::new(),
        unsafe_vectors: Vec::new(),
        restrictive: true,
        permissive: true,
        safe: contract.safe.then_some(true),
        witnesses_valid: true,
        sub_reports,
        passed: false,
    };
    for (v, o) in vectors.iter().zip(&outcomes) {
        let allowed = contract.allows(v);
        if o.any {
            report.realized.push(bits(v));
        }
        if !allowed && o.any {
            report.restrictive = false;
            report.forbidden_realized.push(bits(v));
        }
        let enough = match contract.permissiveness {
            Permissiveness::QuietMembrane => o.quiet,
            Permissiveness::AnyCompletion => o.any,
        };
        if allowed && !enough {
            report.permissive = false;
            report.allowed_missing.push(bits(v));
        }
        if contract.safe && o.membrane_active {
            report.safe = Some(false);
            report.unsafe_vectors.push(bits(v));
        }
        if allowed && !witness_ok(g, contract, v) {
            report.witnesses_valid = false;
        }
    }
    report.passed = report.restrictive
        && report.permissive
        && report.safe != Some(false)
        && report.witnesses_valid
        && report.sub_reports.iter().all(|r| r.passed);
    Ok(report)
}

/// Where a gadget was placed inside a composed game.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    pub kind: GadgetKind,
    pub k: u64,
    pub arity: usize,
    /// Host vertices (0-based) identified with the operands.
    pub operands: Vec<usize>,
    /// The non-operands occupy `first_fresh..first_fresh + fresh`.
    pub first_fresh: usize,
    pub fresh: usize,
}

impl Placement {
    /// Composed-game id of every gadget vertex, operands first.
    pub fn vertex_map(&self) -> Vec<usize> {
        self.operands.iter().copied().chain(self.first_fresh..self.first_fresh + self.fresh).collect()
    }
}

/// Incrementally builds a game out of host vertices and gadgets.
#[derive(Debug, Clone, Default)]
pub struct Composer {
    patterns: Vec<Pattern>,
    edges: Vec<Edge>,
    placements: Vec<Placement>,
}

impl Composer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_game(host: &Game) -> Self {
        Composer { patterns: host.patterns().to_vec(), edges: host.edges().to_vec(), placements: Vec::new() }
    }

    pub fn n(&self) -> usize {
        self.patterns.len()
    }

    pub fn add_vertex(&mut self, pattern: Pattern) -> usize {
        self.patterns.push(pattern);
        self.patterns.len() - 1
    }

    pub fn place(&mut self, gadget: &Gadget, operands: &[usize]) -> Result<&Placement> {
        if operands.len() != gadget.arity {
            return Err(Error::Gadget(format!(
                "{} has {} operands, {} host vertices given",
                gadget.kind,
                gadget.arity,
                operands.len()
            )));
        }
        let pattern = gadget.pattern();
        for (i, &h) in operands.iter().enumerate() {
            if h >= self.n() {
                return Err(Error::Gadget(format!("host vertex {} does not exist", h + 1)));
            }
            if operands[..i].contains(&h) {
                return Err(Error::Gadget(format!("host vertex {} used for two operands", h + 1)));
            }
            if self.patterns[h] != pattern {
                return Err(Error::Gadget(format!(
                    "host vertex {} has pattern {} but the gadget needs {pattern}",
                    h + 1,
                    self.patterns[h]
                )));
            }
        }
        let first_fresh = self.n();
        for _ in 0..gadget.non_operand_count() {
            self.patterns.push(pattern.clone());
        }
        let placement = Placement {
            kind: gadget.kind,
            k: gadget.k,
            arity: gadget.arity,
            operands: operands.to_vec(),
            first_fresh,
            fresh: gadget.non_operand_count(),
        };
        let map = placement.vertex_map();
        self.edges.extend(gadget.edges.iter().map(|&(a, b)| Edge::new(map[a], map[b])));
        self.placements.push(placement);
        Ok(self.placements.last().unwrap())
    }

    pub fn finish(self) -> Result<(Game, Vec<Placement>)> {
        Ok((Game::new(self.patterns, self.edges)?, self.placements))
    }
}

/// Identifies the operands of `gadget` with `operand_map` in `host` and adds
/// fresh non-operand vertices after the host's.
pub fn attach_gadget(host: &Game, gadget: &Gadget, operand_map: &[usize]) -> Result<(Game, Placement)> {
    let mut c = Composer::from_game(host);
    c.place(gadget, operand_map)?;
    let (game, mut placements) = c.finish()?;
    Ok((game, placements.pop().unwrap()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn build(kind: GadgetKind, k: u64, arity: Option<usize>) -> Gadget {
        build_gadget(kind, k, arity).unwrap()
    }

    fn count_roles(g: &Gadget, role: Role) -> usize {
        g.roles().iter().filter(|&&r| r == role).count()
    }

    #[test]
    fn near_or_k1_shape() {
        let g = build(GadgetKind::NearOr, 1, Some(3));
        assert_eq!(g.non_operand_count(), 6);
        assert_eq!(count_roles(&g, Role::Membrane), 1);
        assert_eq!(count_roles(&g, Role::Internal), 5);
        let operand_edges = g.edges().iter().filter(|&&(a, b)| a < 3 || b < 3).count();
        assert_eq!(operand_edges, 3);
        assert_eq!(g.edges().len() - operand_edges, 9);
        g.check_structure().unwrap();
    }

    #[test]
    fn true_k2_shape() {
        let g = build(GadgetKind::True, 2, None);
        assert_eq!(g.non_operand_count(), 7);
        assert_eq!(g.edges().len(), 3 + 4 + 1);
        assert_eq!(g.membrane(), vec![1]);
    }

    #[test]
    fn clause_k2_is_triangle() {
        let g = build(GadgetKind::Clause, 2, None);
        assert_eq!((g.arity(), g.non_operand_count(), g.edges().len()), (3, 0, 3));
    }

    #[test]
    fn sizes() {
        assert_eq!(build(GadgetKind::False, 1, None).n(), 14);
        assert_eq!(build(GadgetKind::False, 2, None).n(), 24);
        assert_eq!(build(GadgetKind::Equiv, 1, None).n(), 23);
        assert_eq!(build(GadgetKind::Clause, 1, None).n(), 18);
        for kind in [GadgetKind::NearOr, GadgetKind::True, GadgetKind::False, GadgetKind::Equiv, GadgetKind::Clause] {
            for k in 1..=3 {
                build(kind, k, Some(kind.fixed_arity().unwrap_or(2))).check_structure().unwrap();
            }
        }
    }

    #[test]
    fn equiv_membrane_is_single_vertex_adjacent_to_both() {
        let g = build(GadgetKind::Equiv, 1, None);
        let m = g.membrane();
        assert_eq!(m.len(), 1);
        assert_eq!(g.labels()[m[0]], "y");
        assert!(g.edges().contains(&(m[0], 0)) && g.edges().contains(&(m[0], 1)));
    }

    #[test]
    fn bad_parameters() {
        assert!(build_gadget(GadgetKind::NearOr, 1, None).is_err());
        assert!(build_gadget(GadgetKind::NearOr, 0, Some(2)).is_err());
        assert!(build_gadget(GadgetKind::Equiv, 1, Some(3)).is_err());
        assert!("bogus".parse::<GadgetKind>().is_err());
        assert_eq!("NEAR_OR".parse::<GadgetKind>().unwrap(), GadgetKind::NearOr);
    }

    #[test]
    fn near_or_k1_exact_contract_and_q_witness() {
        let g = build(GadgetKind::NearOr, 1, Some(3));
        let contract = GadgetContract::standard(&g);
        assert_eq!(contract.allowed, Allowed::Sums([1, 3].into()));
        let r = verify_contract(&g, &contract, VerifyMode::Exact).unwrap();
        assert!(r.passed, "{r:?}");
        assert_eq!(r.vertices, 9);
        for v in [[true, false, false], [true, true, true]] {
            let w = g.witness(&v).unwrap();
            let active: Vec<&str> = (3..9).filter(|&i| w[i]).map(|i| g.labels()[i].as_str()).collect();
            assert_eq!(active, vec!["q"]);
        }
    }

    #[test]
    fn clause_k1_realizes_unit_vectors() {
        let g = build(GadgetKind::Clause, 1, None);
        let r = verify_contract(&g, &GadgetContract::standard(&g), VerifyMode::Exact).unwrap();
        assert!(r.passed, "{r:?}");
        assert_eq!(r.realized, vec!["001", "010", "100"]);
    }

    #[test]
    fn clause_k1_needs_checked_operands() {
        // with operands left unchecked, all three may be active together
        let g = build(GadgetKind::Clause, 1, None);
        let mut c = GadgetContract::standard(&g);
        c.operand_model = OperandModel::Exempt;
        let r = verify_contract(&g, &c, VerifyMode::Exact).unwrap();
        assert!(!r.restrictive);
        assert!(r.forbidden_realized.contains(&"111".to_string()));
    }

    #[test]
    fn false_k2_both_modes() {
        let g = build(GadgetKind::False, 2, None);
        let c = GadgetContract::standard(&g);
        let comp = verify_contract(&g, &c, VerifyMode::Compositional).unwrap();
        let exact = verify_contract(&g, &c, VerifyMode::Exact).unwrap();
        assert!(comp.passed && exact.passed);
        assert_eq!(comp.realized, exact.realized);
        assert_eq!(exact.vertices, 24);
        assert!(comp.vertices < 24);
    }

    #[test]
    fn equiv_k2_exact_exceeds_capacity() {
        let g = build(GadgetKind::Equiv, 2, None);
        let c = GadgetContract::standard(&g);
        assert!(matches!(verify_contract(&g, &c, VerifyMode::Exact), Err(Error::Capacity(_))));
        assert!(verify_contract(&g, &c, VerifyMode::Compositional).unwrap().passed);
    }

    #[test]
    fn wrong_contract_fails() {
        let g = build(GadgetKind::NearOr, 1, Some(2));
        let mut c = GadgetContract::standard(&g);
        c.allowed = Allowed::Sums([0, 1, 2].into());
        let r = verify_contract(&g, &c, VerifyMode::Exact).unwrap();
        assert!(!r.permissive && !r.passed);
        assert_eq!(r.allowed_missing, vec!["00", "11"]);
    }

    #[test]
    fn attach_counts_and_neighbors() {
        let host = Game::homogeneous(1, Pattern::picky(1), vec![]).unwrap();
        let t = build(GadgetKind::True, 1, None);
        let (g, p) = attach_gadget(&host, &t, &[0]).unwrap();
        assert_eq!(g.n(), 7);
        let nbrs: Vec<usize> = g.neighbors(0).iter().map(|&(u, _)| u).collect();
        assert_eq!(nbrs, vec![p.first_fresh]);

        let two = Game::homogeneous(2, Pattern::picky(1), vec![]).unwrap();
        let (g1, _) = attach_gadget(&two, &t, &[0]).unwrap();
        let (g2, _) = attach_gadget(&g1, &t, &[1]).unwrap();
        assert_eq!(g2.n(), 2 + 6 + 6);
    }

    #[test]
    fn attach_rejects_pattern_mismatch() {
        let host = Game::homogeneous(2, Pattern::picky(2), vec![]).unwrap();
        let t = build(GadgetKind::True, 1, None);
        assert!(matches!(attach_gadget(&host, &t, &[0]), Err(Error::Gadget(_))));
        let e = build(GadgetKind::Equiv, 2, None);
        assert!(attach_gadget(&host, &e, &[0, 0]).is_err());
        assert!(attach_gadget(&host, &e, &[0, 5]).is_err());
        assert!(attach_gadget(&host, &e, &[0, 1]).is_ok());
    }

    #[test]
    fn emit_parses_back() {
        let g = build(GadgetKind::False, 1, None);
        let text = g.emit();
        assert!(text.contains("# vertex 1 x operand"));
        assert_eq!(crate::format::parse_game(&text).unwrap(), g.to_game());
    }
}
