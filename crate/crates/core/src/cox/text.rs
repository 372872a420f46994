//! Polynomial text format.
//!
//! A polynomial is a sum of terms separated by `+` or `-`. A term is an
//! optional coefficient (`7`, `3/2`) followed by variable factors `zI` or
//! `zI^E` (1-based `I`), separated by `*` or whitespace. Whitespace is
//! ignored everywhere else. Like terms are combined.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

/// Sparse exponent vector keyed by 0-based variable index.
pub type SparseExponents = BTreeMap<usize, u32>;

struct Cursor {
    chars: Vec<char>,
    pos: usize,
}

impl Cursor {
    fn new(src: &str) -> Self {
        Self {
            chars: src.chars().collect(),
            pos: 0,
        }
    }

    fn location(&self, pos: usize) -> (usize, usize) {
        let mut line = 1;
        let mut col = 1;
        for &c in &self.chars[..pos.min(self.chars.len())] {
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
        }
        (line, col)
    }

    fn error(&self, pos: usize, message: impl Into<String>) -> ParseError {
        let (line, column) = self.location(pos);
        ParseError {
            line,
            column,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn digits(&mut self) -> Option<String> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        (self.pos > start).then(|| self.chars[start..self.pos].iter().collect())
    }
}

pub fn parse_terms(src: &str) -> Result<Vec<(SparseExponents, BigRational)>, ParseError> {
    let mut cur = Cursor::new(src);
    let mut acc: BTreeMap<Vec<(usize, u32)>, BigRational> = BTreeMap::new();
    let mut first = true;
    loop {
        let Some(c) = cur.peek() else {
            if first {
                return Err(cur.error(cur.pos, "empty polynomial"));
            }
            break;
        };
        let mut negative = false;
        if c == '+' || c == '-' {
            negative = c == '-';
            cur.pos += 1;
        } else if !first {
            return Err(cur.error(cur.pos, format!("expected '+' or '-', found '{c}'")));
        }
        first = false;
        let (exps, coeff) = parse_term(&mut cur)?;
        let coeff = if negative { -coeff } else { coeff };
        let key: Vec<(usize, u32)> = exps.into_iter().collect();
        *acc.entry(key).or_insert_with(BigRational::zero) += coeff;
    }
    Ok(acc
        .into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|(k, c)| (k.into_iter().collect(), c))
        .collect())
}

fn parse_term(cur: &mut Cursor) -> Result<(SparseExponents, BigRational), ParseError> {
    let mut coeff = BigRational::one();
    let mut exps = SparseExponents::new();
    let mut saw_anything = false;
    if let Some(c) = cur.peek() {
        if c.is_ascii_digit() {
            let start = cur.pos;
            let num: BigInt = cur.digits().unwrap().parse().unwrap();
            let mut value = BigRational::from_integer(num);
            if cur.peek() == Some('/') {
                cur.pos += 1;
                let at = cur.pos;
                let den: BigInt = cur
                    .digits()
                    .ok_or_else(|| cur.error(at, "expected denominator"))?
                    .parse()
                    .unwrap();
                if den.is_zero() {
                    return Err(cur.error(start, "zero denominator"));
                }
                value /= BigRational::from_integer(den);
            }
            coeff = value;
            saw_anything = true;
        }
    }
    loop {
        match cur.peek() {
            Some('*') if saw_anything => {
                cur.pos += 1;
                if cur.peek() != Some('z') {
                    return Err(cur.error(cur.pos, "expected a variable after '*'"));
                }
            }
            Some('z') => {
                let at = cur.pos;
                cur.pos += 1;
                // The index must follow the 'z' directly.
                let start = cur.pos;
                while cur.pos < cur.chars.len() && cur.chars[cur.pos].is_ascii_digit() {
                    cur.pos += 1;
                }
                if cur.pos == start {
                    return Err(cur.error(at, "expected variable index after 'z'"));
                }
                let idx: usize = cur.chars[start..cur.pos]
                    .iter()
                    .collect::<String>()
                    .parse()
                    .map_err(|_| cur.error(start, "variable index too large"))?;
                if idx == 0 {
                    return Err(cur.error(start, "variable indices start at 1"));
                }
                let mut e: u32 = 1;
                if cur.peek() == Some('^') {
                    cur.pos += 1;
                    let at = cur.pos;
                    e = cur
                        .digits()
                        .ok_or_else(|| cur.error(at, "expected exponent"))?
                        .parse()
                        .map_err(|_| cur.error(at, "exponent too large"))?;
                }
                *exps.entry(idx - 1).or_insert(0) += e;
                saw_anything = true;
            }
            Some(c) if c == '+' || c == '-' => break,
            None => break,
            Some(c) => return Err(cur.error(cur.pos, format!("unexpected character '{c}'"))),
        }
    }
    if !saw_anything {
        return Err(cur.error(cur.pos, "expected a term"));
    }
    exps.retain(|_, e| *e > 0);
    Ok((exps, coeff))
}

/// Writes one monomial, e.g. `z1^2*z3`; empty for the constant monomial.
pub fn format_monomial(exps: &[u32]) -> String {
    exps.iter()
        .enumerate()
        .filter(|(_, &e)| e > 0)
        .map(|(i, &e)| {
            if e == 1 {
                format!("z{}", i + 1)
            } else {
                format!("z{}^{}", i + 1, e)
            }
        })
        .collect::<Vec<_>>()
        .join("*")
}

/// Formats `(exponents, coefficient)` pairs in the given order.
pub fn format_terms<'a>(terms: impl Iterator<Item = (&'a [u32], &'a BigRational)>) -> String {
    let mut out = String::new();
    for (k, (exps, c)) in terms.enumerate() {
        let mono = format_monomial(exps);
        let mag = c.abs();
        let body = match (mono.is_empty(), mag.is_one()) {
            (true, _) => mag.to_string(),
            (false, true) => mono,
            (false, false) => format!("{mag}*{mono}"),
        };
        match (k, c.is_negative()) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        out.push_str(&body);
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}
