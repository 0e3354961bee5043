//! Threshold games and their reduction to weighted games.
//!
//! A threshold game has one "out" good per player with constant delay
//! `θ_i > 0` and one "in" good per pair with delay `a_ij·(x − 1)`. Player `i`
//! either takes its out good or every in good it shares with another player.

use std::fmt::Write;

use num_rational::Ratio;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::format::content_lines;
use crate::game::{Edge, Game, PneReport, Profile};
use crate::pattern::Pattern;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThresholdGame {
    thetas: Vec<Ratio<u64>>,
    /// Symmetric, zero diagonal.
    costs: Vec<Vec<u64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    In,
    Out,
}

/// How the number of leading ones is derived from `θ_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KRule {
    /// `k_i = ⌊θ_i⌋ + 1`: active iff `x_i <= ⌊θ_i⌋`, which preserves equilibria.
    #[default]
    FloorPlusOne,
    /// `k_i = ⌊θ_i⌋`, a literal reading that loses equilibria for fractional `θ`.
    Floor,
}

impl KRule {
    pub fn leading_ones(self, theta: Ratio<u64>) -> u64 {
        match self {
            KRule::FloorPlusOne => theta.to_integer() + 1,
            KRule::Floor => theta.to_integer(),
        }
    }
}

/// Bit `1` of the weighted game corresponds to `In`, bit `0` to `Out`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ThresholdMapping {
    pub rule: KRule,
}

impl ThresholdMapping {
    pub fn to_threshold(&self, s: &Profile) -> Vec<Side> {
        s.bits().iter().map(|&b| if b { Side::In } else { Side::Out }).collect()
    }

    pub fn to_pgg(&self, sides: &[Side]) -> Profile {
        Profile::from_fn(sides.len(), |i| sides[i] == Side::In)
    }
}

impl ThresholdGame {
    pub fn new(thetas: Vec<Ratio<u64>>, costs: Vec<Vec<u64>>) -> Result<Self> {
        let n = thetas.len();
        if let Some(i) = thetas.iter().position(|t| *t.numer() == 0) {
            return Err(Error::InvalidGame(format!("theta of player {} must be positive", i + 1)));
        }
        if costs.len() != n || costs.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidGame("cost matrix must be n x n".into()));
        }
        for i in 0..n {
            for j in 0..n {
                if costs[i][j] != costs[j][i] {
                    return Err(Error::InvalidGame(format!("costs of pair {}-{} are not symmetric", i + 1, j + 1)));
                }
                if i != j && costs[i][j] == 0 {
                    return Err(Error::InvalidGame(format!("pair {}-{} needs a positive cost", i + 1, j + 1)));
                }
            }
        }
        Ok(ThresholdGame { thetas, costs })
    }

    pub fn n(&self) -> usize {
        self.thetas.len()
    }

    pub fn theta(&self, i: usize) -> Ratio<u64> {
        self.thetas[i]
    }

    pub fn cost(&self, i: usize, j: usize) -> u64 {
        self.costs[i][j]
    }

    /// What player `i` pays for "in" given everyone else's side.
    fn in_cost(&self, sides: &[Side], i: usize) -> u64 {
        (0..self.n()).filter(|&j| j != i && sides[j] == Side::In).map(|j| self.costs[i][j]).sum()
    }

    /// Complete weighted graph with `w_ij = a_ij` and `T^i = 1^{k_i} 0*`.
    pub fn to_pgg(&self, rule: KRule) -> Result<(Game, ThresholdMapping)> {
        let n = self.n();
        if n < 2 {
            return Err(Error::InvalidParameter("threshold reduction needs at least 2 players".into()));
        }
        let patterns = self.thetas.iter().map(|&t| Pattern::decreasing(rule.leading_ones(t))).collect();
        let edges = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).map(|(i, j)| Edge::weighted(i, j, self.costs[i][j])).collect();
        Ok((Game::new(patterns, edges)?, ThresholdMapping { rule }))
    }

    /// Exact equilibrium check; a player indifferent between sides is stable.
    pub fn pne_check(&self, sides: &[Side]) -> Result<PneReport> {
        if sides.len() != self.n() {
            return Err(Error::ProfileLength { expected: self.n(), got: sides.len() });
        }
        let violators: Vec<usize> = (0..self.n())
            .filter(|&i| {
                let inside = Ratio::from_integer(self.in_cost(sides, i));
                match sides[i] {
                    Side::In => self.thetas[i] < inside,
                    Side::Out => inside < self.thetas[i],
                }
            })
            .collect();
        Ok(PneReport { is_pne: violators.is_empty(), violators })
    }
}

impl Serialize for ThresholdGame {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&write_threshold(self))
    }
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_ratio(tok: &str, line: usize) -> Result<Ratio<u64>> {
    let (p, q) = tok.split_once('/').unwrap_or((tok, "1"));
    let p: u64 = p.parse().map_err(|_| perr(line, format!("bad numerator in {tok:?}")))?;
    let q: u64 = q.parse().map_err(|_| perr(line, format!("bad denominator in {tok:?}")))?;
    if q == 0 {
        return Err(perr(line, "zero denominator"));
    }
    if p == 0 {
        return Err(perr(line, "theta must be positive"));
    }
    Ok(Ratio::new(p, q))
}

/// Parses `threshold <n>`, `theta <i> <p>/<q>` and `a <i> <j> <int>` lines.
/// Every theta and every pair cost must be given exactly once.
pub fn parse_threshold(text: &str) -> Result<ThresholdGame> {
    let mut lines = content_lines(text);
    let (hline, header) = lines.next().ok_or_else(|| perr(1, "empty input, expected `threshold <n>`"))?;
    let n: usize = match header.as_slice() {
        ["threshold", n] => n.parse().map_err(|_| perr(hline, format!("bad player count {n:?}")))?,
        _ => return Err(perr(hline, "expected header `threshold <n>`")),
    };
    let vertex = |tok: &str, line| crate::format::parse_vertex(tok, n, line);
    let mut thetas: Vec<Option<Ratio<u64>>> = vec![None; n];
    let mut costs: Vec<Vec<Option<u64>>> = vec![vec![None; n]; n];
    for (line, tokens) in lines {
        match tokens.as_slice() {
            ["theta", i, r] => {
                let i = vertex(i, line)?;
                if thetas[i].replace(parse_ratio(r, line)?).is_some() {
                    return Err(perr(line, format!("duplicate theta for player {}", i + 1)));
                }
            }
            ["a", i, j, c] => {
                let (i, j) = (vertex(i, line)?, vertex(j, line)?);
                if i == j {
                    return Err(perr(line, "pair cost needs two distinct players"));
                }
                let c: u64 = match c.parse() {
                    Ok(c) if c >= 1 => c,
                    _ => return Err(perr(line, format!("pair cost must be a positive integer, got {c:?}"))),
                };
                if costs[i][j].is_some() {
                    return Err(perr(line, format!("duplicate cost for pair {}-{}", i + 1, j + 1)));
                }
                costs[i][j] = Some(c);
                costs[j][i] = Some(c);
            }
            [kw, ..] => return Err(perr(line, format!("unknown or malformed directive {kw:?}"))),
            [] => unreachable!(),
        }
    }
    let thetas = thetas
        .into_iter()
        .enumerate()
        .map(|(i, t)| t.ok_or_else(|| Error::InvalidGame(format!("missing theta for player {}", i + 1))))
        .collect::<Result<Vec<_>>>()?;
    let mut full = vec![vec![0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                full[i][j] = costs[i][j]
                    .ok_or_else(|| Error::InvalidGame(format!("missing cost for pair {}-{}", i.min(j) + 1, i.max(j) + 1)))?;
            }
        }
    }
    ThresholdGame::new(thetas, full)
}

pub fn write_threshold(t: &ThresholdGame) -> String {
    let mut out = format!("threshold {}\n", t.n());
    for (i, th) in t.thetas.iter().enumerate() {
        writeln!(out, "theta {} {}/{}", i + 1, th.numer(), th.denom()).unwrap();
    }
    for i in 0..t.n() {
        for j in i + 1..t.n() {
            writeln!(out, "a {} {} {}", i + 1, j + 1, t.costs[i][j]).unwrap();
        }
    }
    out
}
