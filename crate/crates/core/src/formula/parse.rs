//! Recursive-descent parser for the formula grammar
//!
//! ```text
//! expr  := or
//! or    := xor ('|' xor)*
//! xor   := and ('^' and)*
//! and   := unary ('&' unary)*
//! unary := '!' unary | '(' expr ')' | var
//! var   := 'x' digits        (1-based in text, 0-based in the tree)
//! ```
//!
//! Binary operators associate to the left.

use core::fmt;

use super::{Formula, Operator};

const MAX_NESTING: usize = 512;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnexpectedEnd,
    UnexpectedChar(char),
    ExpectedClosingParen,
    TrailingInput,
    BadVariable,
    VariableOutOfRange { index: usize, width: usize },
    TooDeep,
}

/// Syntax error at byte offset `position`.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{kind} at position {position}")]
pub struct ParseError {
    pub position: usize,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::UnexpectedEnd => f.write_str("unexpected end of input"),
            ParseErrorKind::UnexpectedChar(c) => write!(f, "unexpected character {c:?}"),
            ParseErrorKind::ExpectedClosingParen => f.write_str("expected ')'"),
            ParseErrorKind::TrailingInput => f.write_str("trailing input"),
            ParseErrorKind::BadVariable => f.write_str("variables are written x1, x2, ..."),
            ParseErrorKind::VariableOutOfRange { index, width } => {
                write!(f, "variable x{index} exceeds width {width}")
            }
            ParseErrorKind::TooDeep => f.write_str("nesting too deep"),
        }
    }
}

pub fn parse(text: &str) -> Result<Formula, ParseError> {
    parse_inner(text, crate::MAX_WIDTH)
}

/// Parses and rejects variables that do not fit in `width` positions.
pub fn parse_with_width(text: &str, width: usize) -> Result<Formula, ParseError> {
    parse_inner(text, width)
}

fn parse_inner(text: &str, width: usize) -> Result<Formula, ParseError> {
    let mut parser = Parser {
        src: text.as_bytes(),
        pos: 0,
        width,
        depth: 0,
    };
    let f = parser.or()?;
    parser.skip_ws();
    if parser.pos < parser.src.len() {
        return Err(parser.error(ParseErrorKind::TrailingInput));
    }
    Ok(f)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    width: usize,
    depth: usize,
}

impl Parser<'_> {
    fn error(&self, kind: ParseErrorKind) -> ParseError {
        ParseError {
            position: self.pos,
            kind,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, token: u8) -> bool {
        if self.peek() == Some(token) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn chain(
        &mut self,
        op: Operator,
        next: fn(&mut Self) -> Result<Formula, ParseError>,
    ) -> Result<Formula, ParseError> {
        let mut left = next(self)?;
        while self.eat(op.token() as u8) {
            let right = next(self)?;
            left = Formula::binary(op, left, right);
        }
        Ok(left)
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        self.chain(Operator::Or, Self::xor)
    }

    fn xor(&mut self) -> Result<Formula, ParseError> {
        self.chain(Operator::Xor, Self::and)
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        self.chain(Operator::And, Self::unary)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        self.depth += 1;
        if self.depth > MAX_NESTING {
            return Err(self.error(ParseErrorKind::TooDeep));
        }
        let result = match self.peek() {
            None => Err(self.error(ParseErrorKind::UnexpectedEnd)),
            Some(b'!') => {
                self.pos += 1;
                self.unary().map(Formula::not)
            }
            Some(b'(') => {
                self.pos += 1;
                let inner = self.or()?;
                if self.eat(b')') {
                    Ok(inner)
                } else if self.peek().is_none() {
                    Err(self.error(ParseErrorKind::UnexpectedEnd))
                } else {
                    Err(self.error(ParseErrorKind::ExpectedClosingParen))
                }
            }
            Some(b'x') => self.var(),
            Some(other) => Err(self.error(ParseErrorKind::UnexpectedChar(other as char))),
        };
        self.depth -= 1;
        result
    }

    fn var(&mut self) -> Result<Formula, ParseError> {
        let start = self.pos;
        self.pos += 1;
        let digits_start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let digits = core::str::from_utf8(&self.src[digits_start..self.pos]).unwrap_or("");
        let index: usize = match digits.parse() {
            Ok(i) if i >= 1 => i,
            _ => {
                return Err(ParseError {
                    position: start,
                    kind: ParseErrorKind::BadVariable,
                })
            }
        };
        if index > self.width {
            return Err(ParseError {
                position: start,
                kind: ParseErrorKind::VariableOutOfRange {
                    index,
                    width: self.width,
                },
            });
        }
        Ok(Formula::Var(index - 1))
    }
}
