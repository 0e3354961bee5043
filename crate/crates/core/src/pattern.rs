//! Best-response patterns.
//!
//! A pattern is an infinite binary sequence `T` where `T[d]` is the action a
//! vertex prefers when its (weighted) active degree is `d`. Only eventually
//! zero and eventually periodic sequences are representable; both are stored
//! as a finite prefix followed by a tail.
//!
//! The text syntax is `bits? ("0*" | "(" bits ")*")`, e.g. `10*`, `10010*`,
//! `(10)*` or `1(01)*`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// What follows the finite prefix of a pattern.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Tail {
    ZeroForever,
    /// A primitive, not all-zero word repeated forever.
    Periodic(Vec<bool>),
}

/// A best-response pattern in canonical form.
///
/// Canonical means the prefix is as short as possible and a periodic word is
/// primitive and contains a one, so two patterns are equal exactly when they
/// denote the same infinite sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Pattern {
    prefix: Vec<bool>,
    tail: Tail,
}

impl Pattern {
    /// Builds the canonical pattern for `prefix` followed by `tail`.
    pub fn new(mut prefix: Vec<bool>, tail: Tail) -> Self {
        let tail = match tail {
            Tail::Periodic(word) if word.iter().any(|&b| b) => {
                let mut word = primitive_root(word);
                while prefix.last() == word.last() && !prefix.is_empty() {
                    prefix.pop();
                    word.rotate_right(1);
                }
                Tail::Periodic(word)
            }
            _ => {
                while prefix.last() == Some(&false) {
                    prefix.pop();
                }
                Tail::ZeroForever
            }
        };
        Pattern { prefix, tail }
    }

    /// `1^k 0*`: act iff fewer than `k` neighbors act.
    pub fn decreasing(k: u64) -> Self {
        Pattern::new(vec![true; k as usize], Tail::ZeroForever)
    }

    /// `1 0^k 1 0*`: act iff exactly 0 or exactly `k + 1` neighbors act.
    pub fn picky(k: u64) -> Self {
        let mut prefix = vec![true];
        prefix.extend(std::iter::repeat_n(false, k as usize));
        prefix.push(true);
        Pattern::new(prefix, Tail::ZeroForever)
    }

    pub fn prefix(&self) -> &[bool] {
        &self.prefix
    }

    pub fn tail(&self) -> &Tail {
        &self.tail
    }

    /// The response to exactly `degree` active neighbors.
    pub fn eval(&self, degree: u64) -> bool {
        let p = self.prefix.len() as u64;
        if degree < p {
            return self.prefix[degree as usize];
        }
        match &self.tail {
            Tail::ZeroForever => false,
            Tail::Periodic(word) => word[((degree - p) % word.len() as u64) as usize],
        }
    }

    /// Smallest index `d >= from` with `eval(d) == value`.
    pub fn next_index_of(&self, value: bool, from: u64) -> Option<u64> {
        let p = self.prefix.len() as u64;
        if let Some(i) = (from..p).find(|&d| self.prefix[d as usize] == value) {
            return Some(i);
        }
        let start = from.max(p);
        match &self.tail {
            Tail::ZeroForever => (!value).then_some(start),
            Tail::Periodic(word) => {
                (start..start + word.len() as u64).find(|&d| self.eval(d) == value)
            }
        }
    }

    /// Whether some degree in `lo..=hi` produces `value`.
    pub fn takes_value_in(&self, value: bool, lo: u64, hi: u64) -> bool {
        lo <= hi && self.next_index_of(value, lo).is_some_and(|d| d <= hi)
    }

    /// Number of leading ones `k` if the pattern is `1^k 0*` with `k >= 1`.
    pub fn decreasing_k(&self) -> Option<u64> {
        (self.tail == Tail::ZeroForever && !self.prefix.is_empty() && self.prefix.iter().all(|&b| b))
            .then_some(self.prefix.len() as u64)
    }

    /// The `k` of a picky pattern `1 0^k 1 0*`, `k >= 1`.
    pub fn picky_k(&self) -> Option<u64> {
        let p = &self.prefix;
        let ok = self.tail == Tail::ZeroForever
            && p.len() >= 3
            && p[0]
            && p[p.len() - 1]
            && p[1..p.len() - 1].iter().all(|&b| !b);
        ok.then(|| p.len() as u64 - 2)
    }

    /// All complexity-table classes this pattern belongs to. Classes overlap,
    /// so more than one entry may be returned; an empty result means the
    /// pattern is unclassified.
    pub fn classify(&self) -> Vec<Classification> {
        PatternClass::ALL
            .into_iter()
            .filter(|c| c.contains(self))
            .map(|class| Classification { class, verdict: class.verdict() })
            .collect()
    }
}

fn primitive_root(word: Vec<bool>) -> Vec<bool> {
    let n = word.len();
    for d in 1..n {
        if n.is_multiple_of(d) && (d..n).all(|i| word[i] == word[i % d]) {
            return word[..d].to_vec();
        }
    }
    word
}

fn bits_to_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&bits_to_string(&self.prefix))?;
        match &self.tail {
            Tail::ZeroForever => f.write_str("0*"),
            Tail::Periodic(word) => write!(f, "({})*", bits_to_string(word)),
        }
    }
}

fn parse_bits(text: &str, offset: usize) -> Result<Vec<bool>> {
    text.chars()
        .enumerate()
        .map(|(i, c)| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(Error::PatternSyntax {
                pos: offset + i + 1,
                msg: format!("unexpected character {c:?}, expected 0 or 1"),
            }),
        })
        .collect()
}

impl FromStr for Pattern {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let s = text.trim();
        let lead = text.len() - text.trim_start().len();
        if let Some(body) = s.strip_suffix(")*") {
            let open = body.find('(').ok_or_else(|| Error::PatternSyntax {
                pos: lead + s.len() - 1,
                msg: "unmatched ')'".into(),
            })?;
            let prefix = parse_bits(&body[..open], lead)?;
            let word = parse_bits(&body[open + 1..], lead + open + 1)?;
            if word.is_empty() {
                return Err(Error::PatternSyntax {
                    pos: lead + open + 2,
                    msg: "empty periodic word".into(),
                });
            }
            Ok(Pattern::new(prefix, Tail::Periodic(word)))
        } else if let Some(body) = s.strip_suffix("0*") {
            Ok(Pattern::new(parse_bits(body, lead)?, Tail::ZeroForever))
        } else {
            Err(Error::PatternSyntax {
                pos: lead + s.len().max(1),
                msg: "pattern must end in \"0*\" or \"(bits)*\"".into(),
            })
        }
    }
}

impl TryFrom<String> for Pattern {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Pattern> for String {
    fn from(p: Pattern) -> String {
        p.to_string()
    }
}

/// Pattern classes of the complexity table for homogeneous games.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum PatternClass {
    /// `1^+0^+`
    Decreasing,
    /// `(10)^*`
    Alternating,
    /// `10^+10^*`
    Picky,
    /// `(10)^+10^*`
    TruncatedAlternating,
    /// `11.^*0.^*10^*`
    DoubleOneLaterOne,
    /// `10^+11.^*0^+`
    OneZerosDoubleOne,
}

/// Decision complexity of PNE existence for a pattern class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Verdict {
    AlwaysExists,
    Polynomial,
    NpComplete,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::AlwaysExists => "PNE always exists, O(1)",
            Verdict::Polynomial => "polynomial",
            Verdict::NpComplete => "NP-complete",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Classification {
    pub class: PatternClass,
    pub verdict: Verdict,
}

impl PatternClass {
    pub const ALL: [PatternClass; 6] = [
        PatternClass::Decreasing,
        PatternClass::Alternating,
        PatternClass::Picky,
        PatternClass::TruncatedAlternating,
        PatternClass::DoubleOneLaterOne,
        PatternClass::OneZerosDoubleOne,
    ];

    pub fn notation(self) -> &'static str {
        match self {
            PatternClass::Decreasing => "1^+0^+",
            PatternClass::Alternating => "(10)^*",
            PatternClass::Picky => "10^+10^*",
            PatternClass::TruncatedAlternating => "(10)^+10^*",
            PatternClass::DoubleOneLaterOne => "11.^*0.^*10^*",
            PatternClass::OneZerosDoubleOne => "10^+11.^*0^+",
        }
    }

    pub fn verdict(self) -> Verdict {
        match self {
            PatternClass::Decreasing => Verdict::AlwaysExists,
            PatternClass::Alternating => Verdict::Polynomial,
            _ => Verdict::NpComplete,
        }
    }

    pub fn contains(self, p: &Pattern) -> bool {
        let prefix = p.prefix();
        let finite = *p.tail() == Tail::ZeroForever;
        match self {
            PatternClass::Decreasing => p.decreasing_k().is_some(),
            PatternClass::Alternating => prefix.is_empty() && *p.tail() == Tail::Periodic(vec![true, false]),
            PatternClass::Picky => p.picky_k().is_some(),
            PatternClass::TruncatedAlternating => {
                // (10)^j 1 with j >= 1
                finite
                    && prefix.len() >= 3
                    && prefix.len() % 2 == 1
                    && prefix.iter().enumerate().all(|(i, &b)| b == (i % 2 == 0))
            }
            PatternClass::DoubleOneLaterOne => {
                p.eval(0)
                    && p.eval(1)
                    && p.next_index_of(false, 2)
                        .and_then(|z| p.next_index_of(true, z + 1))
                        .is_some()
            }
            PatternClass::OneZerosDoubleOne => {
                // 1 0^a 1 1 .* then zeros forever, a >= 1
                if !finite || prefix.len() < 4 || !prefix[0] || prefix[1] {
                    return false;
                }
                let first_one = prefix[1..].iter().position(|&b| b).map(|i| i + 1);
                first_one.is_some_and(|i| i + 1 < prefix.len() && prefix[i + 1])
            }
        }
    }
}

impl fmt::Display for PatternClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.notation())
    }
}
