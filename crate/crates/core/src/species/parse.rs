//! Prefix notation for species expressions.
//!
//! ```text
//! expr  := "one" | "x"
//!        | ("seq" | "set") sizes? ("{" weight "}")?
//!        | "sum" "(" expr ("," expr)* ")"
//!        | "prod" "(" expr ("," expr)+ ")"
//!        | "subst" "(" expr "," expr ")"
//!        | "deriv" "(" expr ")" | "point" "(" expr ")"
//!        | "restrict" sizes "(" expr ")"
//!        | "scale" "[" ratio "]" "(" expr ")"
//!        | "fix" "(" name "," expr ")"
//!        | "blocks" sizes? | "nonsep" sizes? | "diss" | name
//! sizes := "[" ( "=" n | n? ".." n? ) "]"
//! ```
//!
//! Weights: `unit`, `factorial` (`k!`), `invfactorial` (`1/k!`).
//! `blocks[..B]` is the catalog `B'` of blocks with at most `B` atoms,
//! `nonsep[..E]` the rooted nonseparable maps with at most `E` edges and
//! `diss` the uniform dissections `D = X + SEQ_{≥2}(D)`.

use num_bigint::BigInt;
use num_traits::One;

use super::catalog::{block_catalog, nonseparable_map_catalog};
use super::presets::dissection_leaf_form;
use super::{Expr, Ratio, SizeSet, WeightFn};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(String),
    Sym(char),
    DotDot,
}

fn lex(s: &str) -> Result<Vec<Tok>> {
    let cs: Vec<char> = s.chars().collect();
    let mut i = 0;
    let mut out = Vec::new();
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_alphabetic() || c == '_' {
            let st = i;
            while i < cs.len() && (cs[i].is_ascii_alphanumeric() || cs[i] == '_' || cs[i] == '-') {
                i += 1;
            }
            out.push(Tok::Ident(cs[st..i].iter().collect()));
        } else if c.is_ascii_digit() {
            let st = i;
            while i < cs.len() && (cs[i].is_ascii_digit() || cs[i] == '/') {
                i += 1;
            }
            out.push(Tok::Num(cs[st..i].iter().collect()));
        } else if c == '.' && cs.get(i + 1) == Some(&'.') {
            out.push(Tok::DotDot);
            i += 2;
        } else if "()[]{},=".contains(c) {
            out.push(Tok::Sym(c));
            i += 1;
        } else {
            return Err(Error::Parse(format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Result<Tok> {
        let t = self.toks.get(self.pos).cloned().ok_or_else(|| Error::Parse("unexpected end of input".into()))?;
        self.pos += 1;
        Ok(t)
    }

    fn expect(&mut self, c: char) -> Result<()> {
        match self.next()? {
            Tok::Sym(d) if d == c => Ok(()),
            t => Err(Error::Parse(format!("expected `{c}`, found {t:?}"))),
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn number(&mut self) -> Result<usize> {
        match self.next()? {
            Tok::Num(s) => s.parse().map_err(|_| Error::Parse(format!("bad size `{s}`"))),
            t => Err(Error::Parse(format!("expected a number, found {t:?}"))),
        }
    }

    fn sizes(&mut self) -> Result<Option<SizeSet>> {
        if !self.eat('[') {
            return Ok(None);
        }
        let s = if self.eat('=') {
            SizeSet::exactly(self.number()?)
        } else {
            let min = if matches!(self.peek(), Some(Tok::Num(_))) { self.number()? } else { 0 };
            match self.next()? {
                Tok::DotDot => {}
                t => return Err(Error::Parse(format!("expected `..`, found {t:?}"))),
            }
            let max = if matches!(self.peek(), Some(Tok::Num(_))) { Some(self.number()?) } else { None };
            SizeSet { min, max }
        };
        self.expect(']')?;
        Ok(Some(s))
    }

    fn weight(&mut self) -> Result<Option<WeightFn>> {
        if !self.eat('{') {
            return Ok(None);
        }
        let name = match self.next()? {
            Tok::Ident(s) => s,
            t => return Err(Error::Parse(format!("expected a weight name, found {t:?}"))),
        };
        self.expect('}')?;
        let fact = |k: usize| Ratio::from_integer((1..=k).map(BigInt::from).product());
        let w = match name.as_str() {
            "unit" => WeightFn::new("unit", |_| Ratio::one()),
            "factorial" => WeightFn::new("factorial", fact),
            "invfactorial" => WeightFn::new("invfactorial", move |k| fact(k).recip()),
            other => return Err(Error::Unknown { kind: "weight", name: other.into() }),
        };
        Ok(Some(w))
    }

    fn args(&mut self) -> Result<Vec<Expr>> {
        self.expect('(')?;
        let mut v = vec![self.expr()?];
        while self.eat(',') {
            v.push(self.expr()?);
        }
        self.expect(')')?;
        Ok(v)
    }

    fn expr(&mut self) -> Result<Expr> {
        let head = match self.next()? {
            Tok::Ident(s) => s,
            t => return Err(Error::Parse(format!("expected an expression, found {t:?}"))),
        };
        let arity = |v: &Vec<Expr>, n: usize| {
            if v.len() == n {
                Ok(())
            } else {
                Err(Error::Parse(format!("`{head}` takes {n} argument(s)")))
            }
        };
        Ok(match head.as_str() {
            "one" => Expr::one(),
            "x" => Expr::atom(),
            "seq" | "set" => {
                let s = self.sizes()?.unwrap_or(SizeSet::ALL);
                let w = self.weight()?;
                match (head.as_str(), w) {
                    ("seq", None) => Expr::seq(s),
                    ("seq", Some(w)) => Expr::weighted_seq(s, w),
                    (_, None) => Expr::set(s),
                    (_, Some(w)) => Expr::weighted_set(s, w),
                }
            }
            "sum" => Expr::sum(self.args()?),
            "prod" => {
                let mut v = self.args()?;
                if v.len() < 2 {
                    return Err(Error::Parse("`prod` takes at least 2 arguments".into()));
                }
                let mut acc = v.pop().expect("nonempty");
                while let Some(e) = v.pop() {
                    acc = Expr::prod(e, acc);
                }
                acc
            }
            "subst" => {
                let mut v = self.args()?;
                arity(&v, 2)?;
                let g = v.pop().expect("two");
                Expr::subst(v.pop().expect("two"), g)?
            }
            "deriv" | "point" => {
                let mut v = self.args()?;
                arity(&v, 1)?;
                let e = v.pop().expect("one");
                if head == "deriv" {
                    Expr::derivative(e)
                } else {
                    Expr::pointing(e)
                }
            }
            "restrict" => {
                let s = self.sizes()?.ok_or_else(|| Error::Parse("`restrict` needs sizes".into()))?;
                let mut v = self.args()?;
                arity(&v, 1)?;
                Expr::restrict(v.pop().expect("one"), s)
            }
            "scale" => {
                self.expect('[')?;
                let r: Ratio = match self.next()? {
                    Tok::Num(s) => s.parse().map_err(|_| Error::Parse(format!("bad ratio `{s}`")))?,
                    t => return Err(Error::Parse(format!("expected a ratio, found {t:?}"))),
                };
                self.expect(']')?;
                let mut v = self.args()?;
                arity(&v, 1)?;
                Expr::scale(v.pop().expect("one"), r)
            }
            "fix" => {
                self.expect('(')?;
                let name = match self.next()? {
                    Tok::Ident(s) => s,
                    t => return Err(Error::Parse(format!("expected a name, found {t:?}"))),
                };
                self.expect(',')?;
                let body = self.expr()?;
                self.expect(')')?;
                Expr::fix(name, body)
            }
            "blocks" => {
                let s = self.sizes()?.unwrap_or(SizeSet::at_most(4));
                Expr::catalog(block_catalog(s.max.unwrap_or(4), |_| Ratio::one())?)
            }
            "nonsep" => {
                let s = self.sizes()?.unwrap_or(SizeSet::at_most(3));
                Expr::catalog(nonseparable_map_catalog(s.max.unwrap_or(3))?)
            }
            "diss" => dissection_leaf_form("unit", |_| Ratio::one()),
            _ => Expr::reference(head),
        })
    }
}

/// Parse an expression in the prefix notation above.
pub fn parse_expr(s: &str) -> Result<Expr> {
    let mut p = Parser { toks: lex(s)?, pos: 0 };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(Error::Parse(format!("trailing input after `{e}`")));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::species::egf_coefficients_exact;

    #[test]
    fn display_round_trip() {
        for s in [
            "seq",
            "set[2..]",
            "seq[..3]{factorial}",
            "sum(x, prod(x, x))",
            "subst(seq, seq[1..])",
            "fix(t, prod(x, subst(set, t)))",
            "restrict[=3](point(set))",
            "scale[1/2](deriv(set[=4]))",
        ] {
            let e = parse_expr(s).unwrap();
            let again = parse_expr(&e.to_string()).unwrap();
            assert!(e.same_as(&again), "{s} -> {e}");
        }
    }

    #[test]
    fn dissection_shorthand() {
        let e = parse_expr("subst(seq, diss)").unwrap();
        let c = egf_coefficients_exact(&e, 3).unwrap();
        // [z^2] SEQ(D) = d_2 + d_1^2.
        assert_eq!(c[1], Ratio::one());
        assert_eq!(c[2], Ratio::from_integer(2.into()));
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_expr("seq(").is_err());
        assert!(parse_expr("subst(set, one)").is_err());
        assert!(parse_expr("seq{nope}").is_err());
    }
}
