//! Recursive-descent parser for the formula language. Atoms are quoted
//! strings without escapes, keywords are unquoted words, negation binds
//! tighter than conjunction, and conjunction associates to the left.

use crate::pctl::{Comparison, PathFormula, QueryMode, StateFormula};
use crate::{Error, Result};

pub fn parse_formula(input: &str) -> Result<StateFormula> {
    let mut p = Parser { chars: input.chars().collect(), pos: 0 };
    let f = p.state_formula()?;
    p.skip_ws();
    if p.pos < p.chars.len() {
        return Err(p.err("end of input"));
    }
    Ok(f)
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    /// Positions in errors are 1-based character columns.
    fn err(&self, expected: &str) -> Error {
        Error::SyntaxError { position: self.pos + 1, expected: expected.to_string() }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: char) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("`{c}`")))
        }
    }

    fn word(&mut self) -> String {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphabetic()) {
            self.pos += 1;
        }
        self.chars[start..self.pos].iter().collect()
    }

    fn state_formula(&mut self) -> Result<StateFormula> {
        let mut left = self.unary()?;
        loop {
            self.skip_ws();
            if self.peek() == Some('&') {
                self.pos += 1;
                let right = self.unary()?;
                left = StateFormula::And(Box::new(left), Box::new(right));
            } else {
                return Ok(left);
            }
        }
    }

    fn unary(&mut self) -> Result<StateFormula> {
        self.skip_ws();
        match self.peek() {
            Some('!') => {
                self.pos += 1;
                Ok(StateFormula::Not(Box::new(self.unary()?)))
            }
            Some('(') => {
                self.pos += 1;
                let inner = self.state_formula()?;
                self.skip_ws();
                self.eat(')')?;
                Ok(inner)
            }
            Some('"') => Ok(StateFormula::Atom(self.atom()?)),
            Some(c) if c.is_ascii_alphabetic() => {
                let at = self.pos;
                match self.word().as_str() {
                    "true" => Ok(StateFormula::True),
                    "P" => self.prob_tail(),
                    "Pmin" => self.query_tail(QueryMode::Min),
                    "Pmax" => self.query_tail(QueryMode::Max),
                    _ => {
                        self.pos = at;
                        Err(self.err("`true`, `P`, `Pmin`, or `Pmax`"))
                    }
                }
            }
            _ => Err(self.err("a state formula")),
        }
    }

    fn atom(&mut self) -> Result<String> {
        self.eat('"')?;
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c == '"' {
                let name: String = self.chars[start..self.pos].iter().collect();
                self.pos += 1;
                return Ok(name);
            }
            self.pos += 1;
        }
        Err(self.err("a closing `\"`"))
    }

    fn prob_tail(&mut self) -> Result<StateFormula> {
        self.skip_ws();
        match self.peek() {
            Some('=') => self.query_tail(QueryMode::Plain),
            Some('<') | Some('>') => {
                let cmp = self.comparator()?;
                self.skip_ws();
                let threshold = self.number()?;
                if !(0.0..=1.0).contains(&threshold) {
                    return Err(Error::ThresholdOutOfRange(threshold));
                }
                let path = self.bracketed_path()?;
                Ok(StateFormula::Prob { cmp, threshold, path: Box::new(path) })
            }
            _ => Err(self.err("`=?` or a comparator")),
        }
    }

    fn query_tail(&mut self, mode: QueryMode) -> Result<StateFormula> {
        self.skip_ws();
        self.eat('=')?;
        self.eat('?')?;
        let path = self.bracketed_path()?;
        Ok(StateFormula::ProbQuery { mode, path: Box::new(path) })
    }

    fn comparator(&mut self) -> Result<Comparison> {
        match self.peek() {
            Some('<') => {
                self.pos += 1;
                if self.peek() == Some('=') {
                    self.pos += 1;
                    Ok(Comparison::Le)
                } else {
                    Ok(Comparison::Lt)
                }
            }
            Some('>') => {
                self.pos += 1;
                if self.peek() == Some('=') {
                    self.pos += 1;
                    Ok(Comparison::Ge)
                } else {
                    Ok(Comparison::Gt)
                }
            }
            _ => Err(self.err("a comparator")),
        }
    }

    fn number(&mut self) -> Result<f64> {
        let start = self.pos;
        self.digits("a number")?;
        if self.peek() == Some('.') {
            self.pos += 1;
            self.digits("digits after `.`")?;
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            self.pos += 1;
            if matches!(self.peek(), Some('+' | '-')) {
                self.pos += 1;
            }
            self.digits("an exponent")?;
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        text.parse().map_err(|_| self.err("a number"))
    }

    fn digits(&mut self, expected: &str) -> Result<()> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err(expected));
        }
        Ok(())
    }

    fn bracketed_path(&mut self) -> Result<PathFormula> {
        self.skip_ws();
        self.eat('[')?;
        let p = self.path_formula()?;
        self.skip_ws();
        self.eat(']')?;
        Ok(p)
    }

    fn path_formula(&mut self) -> Result<PathFormula> {
        self.skip_ws();
        if matches!(self.peek(), Some(c) if c.is_ascii_alphabetic()) {
            let at = self.pos;
            match self.word().as_str() {
                "X" => return Ok(PathFormula::Next(self.state_formula()?)),
                "G" => {
                    let bound = self.bound()?;
                    return Ok(PathFormula::Globally {
                        inner: self.state_formula()?,
                        bound,
                    });
                }
                _ => self.pos = at,
            }
        }
        let lhs = self.state_formula()?;
        self.skip_ws();
        let at = self.pos;
        if self.word() != "U" {
            self.pos = at;
            return Err(self.err("`U`"));
        }
        let bound = self.bound()?;
        let rhs = self.state_formula()?;
        Ok(PathFormula::Until { lhs, rhs, bound })
    }

    fn bound(&mut self) -> Result<Option<u32>> {
        self.skip_ws();
        if self.peek() != Some('<') {
            return Ok(None);
        }
        self.pos += 1;
        self.eat('=')?;
        self.skip_ws();
        let start = self.pos;
        self.digits("a step bound")?;
        let text: String = self.chars[start..self.pos].iter().collect();
        text.parse()
            .map(Some)
            .map_err(|_| self.err("a step bound that fits in 32 bits"))
    }
}
