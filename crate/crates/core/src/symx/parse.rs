use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_bigint::BigInt;

use super::expr::{Expr, Func, Symbol};
use super::Rational;
use crate::{Error, Result};

/// The set of names an expression may reference.
///
/// Interning through the vocabulary lets all occurrences of a name share one
/// allocation.
#[derive(Clone, Debug, Default)]
pub struct Vocabulary {
    names: BTreeMap<String, Symbol>,
}

impl Vocabulary {
    pub fn new<I, S>(names: I) -> Vocabulary
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut v = Vocabulary::default();
        for n in names {
            v.insert(n.as_ref());
        }
        v
    }

    pub fn insert(&mut self, name: &str) -> Symbol {
        self.names
            .entry(name.to_string())
            .or_insert_with(|| Symbol::from(name))
            .clone()
    }

    pub fn get(&self, name: &str) -> Option<&Symbol> {
        self.names.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.names.contains_key(name)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(BigInt),
    Plus,
    Minus,
    Star,
    Slash,
    StarStar,
    LParen,
    RParen,
    Comma,
    End,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '^'
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let mut out = Vec::new();
    let bytes: Vec<(usize, char)> = text.char_indices().collect();
    let mut i = 0;
    while i < bytes.len() {
        let (pos, c) = bytes[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if is_ident_start(c) {
            let start = i;
            while i < bytes.len() && is_ident_char(bytes[i].1) {
                i += 1;
            }
            let s: String = bytes[start..i].iter().map(|(_, c)| *c).collect();
            out.push((pos, Tok::Ident(s)));
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].1.is_ascii_digit() {
                i += 1;
            }
            let s: String = bytes[start..i].iter().map(|(_, c)| *c).collect();
            let n = s.parse::<BigInt>().map_err(|_| Error::Syntax {
                pos,
                msg: "bad integer literal".to_string(),
            })?;
            if i < bytes.len() && (is_ident_start(bytes[i].1) || bytes[i].1 == '.') {
                return Err(Error::Syntax {
                    pos: bytes[i].0,
                    msg: format!("unexpected `{}` after number", bytes[i].1),
                });
            }
            out.push((pos, Tok::Int(n)));
            continue;
        }
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => {
                if i + 1 < bytes.len() && bytes[i + 1].1 == '*' {
                    i += 1;
                    Tok::StarStar
                } else {
                    Tok::Star
                }
            }
            '/' => Tok::Slash,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            _ => {
                return Err(Error::Syntax {
                    pos,
                    msg: format!("unexpected character `{}`", c),
                })
            }
        };
        out.push((pos, tok));
        i += 1;
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    at: usize,
    vocab: &'a Vocabulary,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].1.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn fail<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            pos: self.pos(),
            msg: msg.into(),
        })
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<()> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.fail(format!("expected {}", what))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut terms = Vec::new();
        terms.push(self.term()?);
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    terms.push(self.term()?);
                }
                Tok::Minus => {
                    self.bump();
                    terms.push(-self.term()?);
                }
                _ => break,
            }
        }
        Ok(Expr::sum(terms))
    }

    fn term(&mut self) -> Result<Expr> {
        let mut factors = Vec::new();
        factors.push(self.unary()?);
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    factors.push(self.unary()?);
                }
                Tok::Slash => {
                    self.bump();
                    factors.push(self.unary()?.recip());
                }
                _ => break,
            }
        }
        Ok(Expr::product(factors))
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                Ok(-self.unary()?)
            }
            Tok::Plus => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if *self.peek() != Tok::StarStar {
            return Ok(base);
        }
        self.bump();
        let k = self.exponent()?;
        if base.is_zero_literal() && k < 0 {
            return Err(Error::DivisionByZero);
        }
        Ok(base.pow(k))
    }

    /// Signed integer literal, optionally parenthesized.
    fn exponent(&mut self) -> Result<i32> {
        let paren = *self.peek() == Tok::LParen;
        if paren {
            self.bump();
        }
        let neg = match self.peek() {
            Tok::Minus => {
                self.bump();
                true
            }
            Tok::Plus => {
                self.bump();
                false
            }
            _ => false,
        };
        let k = match self.bump() {
            Tok::Int(n) => {
                let n = if neg { -n } else { n };
                match i32::try_from(n) {
                    Ok(k) => k,
                    Err(_) => return self.fail("exponent out of range"),
                }
            }
            _ => {
                self.at -= 1;
                return self.fail("exponent must be an integer literal");
            }
        };
        if paren {
            self.expect(Tok::RParen, "`)`")?;
        }
        Ok(k)
    }

    fn atom(&mut self) -> Result<Expr> {
        let pos = self.pos();
        match self.bump() {
            Tok::Int(n) => Ok(Expr::constant(Rational::from_integer(n))),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if *self.peek() == Tok::LParen {
                    return self.call(&name, pos);
                }
                match self.vocab.get(&name) {
                    Some(sym) => Ok(Expr::var(sym.clone())),
                    None => Err(Error::Undeclared(name)),
                }
            }
            Tok::End => Err(Error::Syntax {
                pos,
                msg: "unexpected end of input".to_string(),
            }),
            t => Err(Error::Syntax {
                pos,
                msg: format!("unexpected token {:?}", t),
            }),
        }
    }

    fn call(&mut self, name: &str, pos: usize) -> Result<Expr> {
        self.expect(Tok::LParen, "`(`")?;
        if name == "root" {
            let arg = self.expr()?;
            self.expect(Tok::Comma, "`,`")?;
            let k = self.exponent()?;
            self.expect(Tok::RParen, "`)`")?;
            if k < 1 {
                return Err(Error::Syntax {
                    pos,
                    msg: "root index must be a positive integer".to_string(),
                });
            }
            return Ok(arg.root(k as u32));
        }
        let f = match Func::from_name(name) {
            Some(f) => f,
            None => {
                return Err(Error::Syntax {
                    pos,
                    msg: format!("unknown function `{}`", name),
                })
            }
        };
        let arg = self.expr()?;
        self.expect(Tok::RParen, "`)`")?;
        Ok(Expr::apply(f, arg))
    }
}

/// Parse `text` over the declared names in `vocab`.
///
/// Grammar: `+ - * /`, `**` with an integer literal exponent, parentheses,
/// `sin cos exp ln` calls and `root(e, k)`. Unary minus binds looser than
/// `**`, so `-x**2` is `-(x**2)`.
pub fn parse(text: &str, vocab: &Vocabulary) -> Result<Expr> {
    let toks = lex(text)?;
    let mut p = Parser { toks, at: 0, vocab };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.fail("trailing input");
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn vocab() -> Vocabulary {
        Vocabulary::new([
            "x", "y", "x3", "x4", "x5", "x2^1", "mu", "psi_d", "I_q", "tau_L", "J",
        ])
    }

    #[test]
    fn precedence() {
        let v = vocab();
        let e = parse("-x**2", &v).unwrap();
        assert_eq!(e, -(Expr::var("x").pow(2)));
        let e = parse("x3*x4 - x5", &v).unwrap();
        assert_eq!(e, Expr::var("x3") * Expr::var("x4") - Expr::var("x5"));
        assert_eq!(parse("2/4", &v).unwrap(), Expr::frac(1, 2));
        assert_eq!(parse("x**(-2)", &v).unwrap(), Expr::var("x").pow(-2));
        assert_eq!(parse("x**-2", &v).unwrap(), Expr::var("x").pow(-2));
    }

    #[test]
    fn caret_names() {
        let v = vocab();
        assert_eq!(parse("x2^1 + 1", &v).unwrap().to_string(), "x2^1 + 1");
    }

    #[test]
    fn errors_carry_position() {
        let v = vocab();
        assert!(matches!(
            parse("x + ", &v),
            Err(Error::Syntax { pos: 4, .. })
        ));
        assert!(matches!(
            parse("x $ y", &v),
            Err(Error::Syntax { pos: 2, .. })
        ));
        assert_eq!(parse("z", &v), Err(Error::Undeclared("z".into())));
        assert!(matches!(parse("foo(x)", &v), Err(Error::Syntax { .. })));
        assert!(matches!(parse("x**y", &v), Err(Error::Syntax { .. })));
        assert!(matches!(parse("(x", &v), Err(Error::Syntax { .. })));
    }

    #[test]
    fn motor_line() {
        let v = vocab();
        let e = parse("mu*psi_d*I_q - tau_L/J", &v).unwrap();
        assert_eq!(e.to_string(), "mu*psi_d*I_q - tau_L/J");
        assert_eq!(parse(&e.to_string(), &v).unwrap(), e);
    }
}
