use super::expr::{Func, ScalarExpr};
use crate::error::{FinjetError, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => out.push((Tok::Plus, start)),
            b'-' => out.push((Tok::Minus, start)),
            b'*' => out.push((Tok::Star, start)),
            b'/' => out.push((Tok::Slash, start)),
            b'^' => out.push((Tok::Caret, start)),
            b'(' => out.push((Tok::LParen, start)),
            b')' => out.push((Tok::RParen, start)),
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let lit = &text[start..i];
                let v: f64 = lit.parse().map_err(|_| FinjetError::Syntax {
                    offset: start,
                    message: format!("malformed number `{lit}`"),
                })?;
                out.push((Tok::Num(v), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].to_string()), start));
                continue;
            }
            _ => {
                return Err(FinjetError::Syntax {
                    offset: start,
                    message: format!("unexpected character `{}`", text[start..].chars().next().unwrap_or('?')),
                })
            }
        }
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
    base_dim: usize,
    fiber: bool,
    _src: &'a str,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(_, o)| *o).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(FinjetError::Syntax { offset: self.offset(), message: format!("expected {what}") })
        }
    }

    fn expr(&mut self) -> Result<ScalarExpr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    lhs = ScalarExpr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    lhs = ScalarExpr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<ScalarExpr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    lhs = ScalarExpr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    lhs = ScalarExpr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<ScalarExpr> {
        if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            return Ok(ScalarExpr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<ScalarExpr> {
        let mut base = self.primary()?;
        while self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            let negative = if self.peek() == Some(&Tok::Minus) {
                self.pos += 1;
                true
            } else {
                false
            };
            let at = self.offset();
            match self.bump() {
                Some(Tok::Num(v)) if v.fract() == 0.0 && v.abs() <= i32::MAX as f64 => {
                    let e = v as i32;
                    base = ScalarExpr::Pow(Box::new(base), if negative { -e } else { e });
                }
                _ => {
                    return Err(FinjetError::Syntax {
                        offset: at,
                        message: "exponent must be an integer literal".into(),
                    })
                }
            }
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<ScalarExpr> {
        let at = self.offset();
        match self.bump() {
            Some(Tok::Num(v)) => Ok(ScalarExpr::Num(v)),
            Some(Tok::LParen) => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                if let Some(func) = Func::from_name(&name) {
                    self.expect(Tok::LParen, "`(` after function name")?;
                    let arg = self.expr()?;
                    self.expect(Tok::RParen, "`)`")?;
                    return Ok(ScalarExpr::Func(func, Box::new(arg)));
                }
                self.variable(&name, at)
            }
            Some(_) => Err(FinjetError::Syntax { offset: at, message: "unexpected token".into() }),
            None => Err(FinjetError::Syntax { offset: at, message: "unexpected end of input".into() }),
        }
    }

    fn variable(&self, name: &str, at: usize) -> Result<ScalarExpr> {
        let unknown = || FinjetError::UnknownIdentifier { name: name.to_string(), offset: at };
        let (kind, digits) = name.split_at(1);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(unknown());
        }
        let index: usize = digits.parse().map_err(|_| unknown())?;
        let out_of_range = || FinjetError::VariableOutOfRange { name: name.to_string(), dim: self.base_dim };
        if index == 0 || index > self.base_dim {
            return Err(out_of_range());
        }
        match kind {
            "x" => Ok(ScalarExpr::X(index - 1)),
            "y" if self.fiber => Ok(ScalarExpr::Y(index - 1)),
            "y" => Err(FinjetError::UnknownIdentifier {
                name: format!("{name} (fiber variables are not allowed here)"),
                offset: at,
            }),
            _ => Err(unknown()),
        }
    }
}

/// Parses a coefficient expression over `x1..x{base_dim}` (and `y1..` when
/// `fiber` is set).
pub fn parse_expr(text: &str, base_dim: usize, fiber: bool) -> Result<ScalarExpr> {
    let toks = lex(text)?;
    if toks.is_empty() {
        return Err(FinjetError::Syntax { offset: 0, message: "empty expression".into() });
    }
    let mut p = Parser { toks, pos: 0, end: text.len(), base_dim, fiber, _src: text };
    let e = p.expr()?;
    if p.pos < p.toks.len() {
        return Err(FinjetError::Syntax { offset: p.offset(), message: "trailing input".into() });
    }
    Ok(e)
}
