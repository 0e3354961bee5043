//! Line-oriented game text format.
//!
//! ```text
//! pgg <n>
//! patterns <pattern>         # default for every vertex
//! pattern <v> <pattern>      # override, v in 1..=n
//! edge <u> <v> [<weight>]    # weight defaults to 1
//! ```
//!
//! `#` starts a comment. Parsing is strict.

use std::collections::HashMap;
use std::fmt::Write;

use crate::error::{Error, Result};
use crate::game::{Edge, Game};
use crate::pattern::Pattern;

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// Meaningful lines with comments stripped, paired with 1-based line numbers.
pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let body = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = body.split_whitespace().collect();
        (!tokens.is_empty()).then_some((i + 1, tokens))
    })
}

pub(crate) fn parse_vertex(tok: &str, n: usize, line: usize) -> Result<usize> {
    let v: usize = tok.parse().map_err(|_| err(line, format!("bad vertex id {tok:?}")))?;
    if v == 0 || v > n {
        return Err(err(line, format!("vertex {v} out of range 1..={n}")));
    }
    Ok(v - 1)
}

pub fn parse_game(text: &str) -> Result<Game> {
    let mut lines = content_lines(text);
    let (hline, header) = lines.next().ok_or_else(|| err(1, "empty input, expected `pgg <n>`"))?;
    let n: usize = match header.as_slice() {
        ["pgg", n] => n.parse().map_err(|_| err(hline, format!("bad vertex count {n:?}")))?,
        _ => return Err(err(hline, "expected header `pgg <n>`")),
    };

    let mut default: Option<Pattern> = None;
    let mut overrides: Vec<Option<Pattern>> = vec![None; n];
    let mut edges = Vec::new();
    let mut seen: HashMap<(usize, usize), usize> = HashMap::new();

    for (line, tokens) in lines {
        let pattern = |tok: &str| -> Result<Pattern> {
            tok.parse().map_err(|e| err(line, format!("{e}")))
        };
        match tokens.as_slice() {
            ["patterns", p] => {
                if default.is_some() {
                    return Err(err(line, "duplicate `patterns` line"));
                }
                default = Some(pattern(p)?);
            }
            ["pattern", v, p] => {
                let v = parse_vertex(v, n, line)?;
                if overrides[v].is_some() {
                    return Err(err(line, format!("duplicate pattern for vertex {}", v + 1)));
                }
                overrides[v] = Some(pattern(p)?);
            }
            ["edge", u, v, rest @ ..] if rest.len() <= 1 => {
                let u = parse_vertex(u, n, line)?;
                let v = parse_vertex(v, n, line)?;
                if u == v {
                    return Err(err(line, format!("self-loop at vertex {}", u + 1)));
                }
                let weight = match rest {
                    [w] => match w.parse::<u64>() {
                        Ok(w) if w >= 1 => w,
                        _ => return Err(err(line, format!("weight must be a positive integer, got {w:?}"))),
                    },
                    _ => 1,
                };
                if let Some(prev) = seen.insert((u.min(v), u.max(v)), line) {
                    return Err(err(line, format!("duplicate edge {}-{} (first on line {prev})", u + 1, v + 1)));
                }
                edges.push(Edge::weighted(u, v, weight));
            }
            [kw, ..] => return Err(err(line, format!("unknown or malformed directive {kw:?}"))),
            [] => unreachable!(),
        }
    }

    let patterns = overrides
        .into_iter()
        .enumerate()
        .map(|(v, p)| {
            p.or_else(|| default.clone())
                .ok_or_else(|| Error::InvalidGame(format!("vertex {} has no pattern", v + 1)))
        })
        .collect::<Result<Vec<_>>>()?;
    Game::new(patterns, edges)
}

/// Canonical text of a game. `parse_game(&write_game(g)) == g`.
pub fn write_game(g: &Game) -> String {
    write_game_with_comments(g, &[])
}

/// Like [`write_game`], with `# `-prefixed comment lines after the header.
pub fn write_game_with_comments(g: &Game, comments: &[String]) -> String {
    let mut out = String::new();
    writeln!(out, "pgg {}", g.n()).unwrap();
    for c in comments {
        writeln!(out, "# {c}").unwrap();
    }
    if let Some(default) = most_common(g.patterns()) {
        writeln!(out, "patterns {default}").unwrap();
        for (v, p) in g.patterns().iter().enumerate() {
            if p != default {
                writeln!(out, "pattern {} {p}", v + 1).unwrap();
            }
        }
    }
    for e in g.edges() {
        if e.weight == 1 {
            writeln!(out, "edge {} {}", e.u + 1, e.v + 1).unwrap();
        } else {
            writeln!(out, "edge {} {} {}", e.u + 1, e.v + 1, e.weight).unwrap();
        }
    }
    out
}

/// Most frequent pattern; ties go to the one appearing first.
fn most_common(patterns: &[Pattern]) -> Option<&Pattern> {
    let mut counts: HashMap<&Pattern, (usize, usize)> = HashMap::new();
    for (i, p) in patterns.iter().enumerate() {
        counts.entry(p).or_insert((0, i)).0 += 1;
    }
    counts
        .into_iter()
        .max_by(|a, b| a.1 .0.cmp(&b.1 .0).then(b.1 .1.cmp(&a.1 .1)))
        .map(|(p, _)| p)
}
