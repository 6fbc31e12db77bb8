//! Recursive-descent parser for the STL concrete syntax.

use thiserror::Error;

use super::{AffineAtom, Cmp, Formula, Interval};

#[derive(Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown comparator `{cmp}` at position {pos}")]
    UnknownComparator { pos: usize, cmp: String },
    #[error("invalid interval at position {pos}: {msg}")]
    Interval { pos: usize, msg: String },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(f64),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Star,
    Plus,
    Minus,
    Cmp(Cmp),
    BadCmp(String),
    Implies,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(usize, Tok)>, ParseError> {
        let mut lx = Lexer { src: src.as_bytes(), pos: 0 };
        let mut out = Vec::new();
        while let Some((pos, tok)) = lx.next_token()? {
            out.push((pos, tok));
        }
        Ok(out)
    }

    fn next_token(&mut self) -> Result<Option<(usize, Tok)>, ParseError> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if self.pos >= self.src.len() {
            return Ok(None);
        }
        let start = self.pos;
        let c = self.src[self.pos];
        let tok = match c {
            b'(' => {
                self.pos += 1;
                Tok::LParen
            }
            b')' => {
                self.pos += 1;
                Tok::RParen
            }
            b'[' => {
                self.pos += 1;
                Tok::LBracket
            }
            b']' => {
                self.pos += 1;
                Tok::RBracket
            }
            b',' => {
                self.pos += 1;
                Tok::Comma
            }
            b'*' => {
                self.pos += 1;
                Tok::Star
            }
            b'+' => {
                self.pos += 1;
                Tok::Plus
            }
            b'-' => {
                self.pos += 1;
                Tok::Minus
            }
            b'<' => {
                self.pos += 1;
                if self.peek() == Some(b'=') {
                    self.pos += 1;
                    Tok::BadCmp("<=".into())
                } else {
                    Tok::Cmp(Cmp::Lt)
                }
            }
            b'>' => {
                self.pos += 1;
                if self.peek() == Some(b'=') {
                    self.pos += 1;
                    Tok::BadCmp(">=".into())
                } else {
                    Tok::Cmp(Cmp::Gt)
                }
            }
            b'=' => {
                self.pos += 1;
                match self.peek() {
                    Some(b'=') => {
                        self.pos += 1;
                        Tok::Cmp(Cmp::Eq)
                    }
                    Some(b'>') => {
                        self.pos += 1;
                        Tok::Implies
                    }
                    _ => Tok::BadCmp("=".into()),
                }
            }
            b'!' => {
                self.pos += 1;
                if self.peek() == Some(b'=') {
                    self.pos += 1;
                    Tok::Cmp(Cmp::Ne)
                } else {
                    Tok::BadCmp("!".into())
                }
            }
            b'0'..=b'9' | b'.' => {
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_digit()
                        || self.src[self.pos] == b'.'
                        || self.src[self.pos] == b'e'
                        || self.src[self.pos] == b'E'
                        || ((self.src[self.pos] == b'+' || self.src[self.pos] == b'-')
                            && matches!(self.src[self.pos - 1], b'e' | b'E')))
                {
                    self.pos += 1;
                }
                let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                let v = text.parse::<f64>().map_err(|_| ParseError::Syntax {
                    pos: start,
                    msg: format!("malformed number `{text}`"),
                })?;
                Tok::Number(v)
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                Tok::Ident(std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_string())
            }
            other => {
                return Err(ParseError::Syntax {
                    pos: start,
                    msg: format!("unexpected character `{}`", other as char),
                })
            }
        };
        Ok(Some((start, tok)))
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    idx: usize,
    end: usize,
}

/// Parses a formula; `pretty-print(parse(text))` reparses to a structurally
/// equal AST. `a => b` desugars to `(not a) or b`.
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let toks = Lexer::tokens(text)?;
    let end = text.len();
    let mut p = Parser { toks, idx: 0, end };
    let f = p.implies()?;
    if let Some((pos, tok)) = p.peek_at() {
        return Err(ParseError::Syntax { pos, msg: format!("unexpected trailing {tok:?}") });
    }
    Ok(f)
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|(_, t)| t)
    }

    fn peek_at(&self) -> Option<(usize, &Tok)> {
        self.toks.get(self.idx).map(|(p, t)| (*p, t))
    }

    fn pos(&self) -> usize {
        self.toks.get(self.idx).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.idx).map(|(_, t)| t.clone());
        self.idx += 1;
        t
    }

    fn expect(&mut self, want: &Tok, what: &str) -> Result<(), ParseError> {
        let pos = self.pos();
        match self.bump() {
            Some(ref t) if t == want => Ok(()),
            other => Err(ParseError::Syntax { pos, msg: format!("expected {what}, found {other:?}") }),
        }
    }

    // implies := or ('=>' implies)?   (right associative, desugars)
    fn implies(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.or()?;
        if matches!(self.peek(), Some(Tok::Implies)) {
            self.bump();
            let rhs = self.implies()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.and()?;
        while matches!(self.peek(), Some(Tok::Ident(k)) if k == "or") {
            self.bump();
            let rhs = self.and()?;
            lhs = Formula::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        while matches!(self.peek(), Some(Tok::Ident(k)) if k == "and") {
            self.bump();
            let rhs = self.unary()?;
            lhs = Formula::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Some(Tok::Ident(k)) if k == "not" => {
                self.bump();
                Ok(Formula::Not(Box::new(self.unary()?)))
            }
            Some(Tok::Ident(k)) if k == "always" || k == "eventually" => {
                let always = k == "always";
                self.bump();
                let iv = self.interval()?;
                let child = Box::new(self.unary()?);
                Ok(if always { Formula::Always(iv, child) } else { Formula::Eventually(iv, child) })
            }
            Some(Tok::LParen) => {
                self.bump();
                let f = self.implies()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(f)
            }
            _ => self.atom(),
        }
    }

    fn interval(&mut self) -> Result<Interval, ParseError> {
        let open_pos = self.pos();
        self.expect(&Tok::LBracket, "`[`")?;
        let start = self.signed_number()?;
        self.expect(&Tok::Comma, "`,`")?;
        let end = self.signed_number()?;
        self.expect(&Tok::RBracket, "`]`")?;
        if !(0.0 <= start && start <= end) {
            return Err(ParseError::Interval {
                pos: open_pos,
                msg: format!("need 0 <= a <= b, got [{start},{end}]"),
            });
        }
        for v in [start, end] {
            let steps = v / 0.01;
            if (steps - steps.round()).abs() > 1e-6 {
                return Err(ParseError::Interval {
                    pos: open_pos,
                    msg: format!("endpoint {v} is not a multiple of 0.01"),
                });
            }
        }
        Ok(Interval { start, end })
    }

    fn signed_number(&mut self) -> Result<f64, ParseError> {
        let pos = self.pos();
        let mut sign = 1.0;
        loop {
            match self.peek() {
                Some(Tok::Minus) => {
                    sign = -sign;
                    self.bump();
                }
                Some(Tok::Plus) => {
                    self.bump();
                }
                _ => break,
            }
        }
        match self.bump() {
            Some(Tok::Number(v)) => Ok(sign * v),
            other => Err(ParseError::Syntax { pos, msg: format!("expected number, found {other:?}") }),
        }
    }

    // atom := ['abs' '('] affine [')'] cmp signed_number
    fn atom(&mut self) -> Result<Formula, ParseError> {
        let start_pos = self.pos();
        let abs = matches!(self.peek(), Some(Tok::Ident(k)) if k == "abs");
        if abs {
            self.bump();
            self.expect(&Tok::LParen, "`(` after abs")?;
        }
        let (terms, offset) = self.affine()?;
        if abs {
            self.expect(&Tok::RParen, "`)` closing abs")?;
        }
        let cmp = match self.bump() {
            Some(Tok::Cmp(c)) => c,
            Some(Tok::BadCmp(c)) => {
                return Err(ParseError::UnknownComparator { pos: start_pos, cmp: c })
            }
            other => {
                return Err(ParseError::Syntax {
                    pos: start_pos,
                    msg: format!("expected comparator, found {other:?}"),
                })
            }
        };
        let constant = self.signed_number()?;
        if terms.is_empty() {
            return Err(ParseError::Syntax {
                pos: start_pos,
                msg: "atom needs at least one signal term".into(),
            });
        }
        Ok(Formula::Atom(AffineAtom { terms, offset, abs, cmp, constant }))
    }

    // affine := sign? term (('+'|'-') term)*
    // term   := number ('*' ident)? | ident
    fn affine(&mut self) -> Result<(Vec<(f64, String)>, f64), ParseError> {
        let mut terms = Vec::new();
        let mut offset = 0.0;
        let mut sign = 1.0;
        if matches!(self.peek(), Some(Tok::Minus)) {
            self.bump();
            sign = -1.0;
        } else if matches!(self.peek(), Some(Tok::Plus)) {
            self.bump();
        }
        loop {
            let pos = self.pos();
            match self.bump() {
                Some(Tok::Number(v)) => {
                    if matches!(self.peek(), Some(Tok::Star)) {
                        self.bump();
                        match self.bump() {
                            Some(Tok::Ident(name)) => terms.push((sign * v, name)),
                            other => {
                                return Err(ParseError::Syntax {
                                    pos,
                                    msg: format!("expected name after `*`, found {other:?}"),
                                })
                            }
                        }
                    } else {
                        offset += sign * v;
                    }
                }
                Some(Tok::Ident(name)) => {
                    if is_reserved(&name) {
                        return Err(ParseError::Syntax {
                            pos,
                            msg: format!("reserved word `{name}` cannot be a signal name"),
                        });
                    }
                    terms.push((sign, name));
                }
                other => {
                    return Err(ParseError::Syntax {
                        pos,
                        msg: format!("expected affine term, found {other:?}"),
                    })
                }
            }
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    sign = 1.0;
                }
                Some(Tok::Minus) => {
                    self.bump();
                    sign = -1.0;
                }
                _ => break,
            }
        }
        Ok((terms, offset))
    }
}

fn is_reserved(name: &str) -> bool {
    matches!(name, "not" | "and" | "or" | "always" | "eventually" | "abs")
}
