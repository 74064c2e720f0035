//! Text syntax for series, expansions and presentation elements.
//!
//! Grammar: `+ - * / ^`, parentheses, implicit multiplication (`2b`,
//! `3(1+b)`), integer literals, named parameters, and the atoms
//! `a`, `b`, `s`, `log(s)`, `e1 .. ek`, `inv(x)`. A series acts on an expansion
//! from the left: `(z + b)*s^(-1/2)` is the module action of `z + b`.
//! Products involving `a` are Ore products, so `a*b` and `b*a` differ.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::ab_algebra::{ore_mul, OreOperator};
use crate::error::{Error, Result};
use crate::series::{fmt_rational, to_i64, Rational, TruncSeries};
use crate::theme::ThemeElement;
use crate::xi::{exponent_class, log_power, XiElement};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            out.push(Tok::Num(s.parse().unwrap()));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^(),".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(Error::Parse(format!("unexpected character {c:?} in {src:?}")));
        }
    }
    Ok(out)
}

/// Parsed expression tree.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(BigInt),
    Ident(String),
    Call(String, Vec<Expr>),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(Error::Parse(format!("expected {c:?} at token {}", self.pos)))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else if matches!(self.peek(), Some(Tok::Ident(_)) | Some(Tok::Num(_)) | Some(Tok::Op('('))) {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.power()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat('^') {
            let exp = if self.eat('-') { Expr::Neg(Box::new(self.atom()?)) } else { self.atom()? };
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(Expr::Num(n))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if self.eat('(') {
                    let mut args = vec![self.expr()?];
                    while self.eat(',') {
                        args.push(self.expr()?);
                    }
                    self.expect(')')?;
                    Ok(Expr::Call(name, args))
                } else {
                    Ok(Expr::Ident(name))
                }
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            other => Err(Error::Parse(format!("unexpected token {other:?}"))),
        }
    }
}

/// Parses an expression.
pub fn parse_expr(src: &str) -> Result<Expr> {
    let toks = tokenize(src)?;
    if toks.is_empty() {
        return Err(Error::Parse("empty expression".into()));
    }
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(Error::Parse(format!("trailing input after token {} in {src:?}", p.pos)));
    }
    Ok(e)
}

/// `series(b) * s^r (Log s)^j`.
#[derive(Clone, Debug)]
struct Term {
    series: TruncSeries,
    r: Rational,
    j: usize,
}

#[derive(Clone, Debug)]
enum Value {
    Series(TruncSeries),
    Expansion(Vec<Term>),
    Theme(BTreeMap<usize, TruncSeries>),
    Operator(OreOperator),
}

/// Parameter values and the working precision.
#[derive(Clone, Debug)]
pub struct Env {
    pub params: BTreeMap<String, Rational>,
    pub prec: usize,
}

impl Env {
    pub fn new(prec: usize) -> Self {
        Env { params: BTreeMap::new(), prec }
    }

    pub fn with(mut self, name: &str, v: Rational) -> Self {
        self.params.insert(name.to_string(), v);
        self
    }
}

fn kind(v: &Value) -> &'static str {
    match v {
        Value::Series(_) => "a series",
        Value::Expansion(_) => "an expansion",
        Value::Theme(_) => "a presentation element",
        Value::Operator(_) => "an operator",
    }
}

fn is_pure(terms: &[Term]) -> bool {
    terms.iter().all(|t| t.series.is_constant())
}

fn as_constant(v: &Value) -> Result<Rational> {
    match v {
        Value::Series(s) if s.is_constant() => Ok(s.coeffs()[0].clone()),
        _ => Err(Error::Parse(format!("expected a constant, found {}", kind(v)))),
    }
}

fn act(s: &TruncSeries, v: Value) -> Value {
    match v {
        Value::Series(t) => Value::Series(s * &t),
        Value::Expansion(terms) => {
            Value::Expansion(terms.into_iter().map(|t| Term { series: s * &t.series, ..t }).collect())
        }
        Value::Theme(m) => Value::Theme(m.into_iter().map(|(j, t)| (j, s * &t)).collect()),
        Value::Operator(o) => Value::Operator(o.left_scale(s)),
    }
}

fn add(x: Value, y: Value) -> Result<Value> {
    match (x, y) {
        (Value::Series(a), Value::Series(b)) => Ok(Value::Series(&a + &b)),
        (Value::Expansion(mut a), Value::Expansion(b)) => {
            a.extend(b);
            Ok(Value::Expansion(a))
        }
        (Value::Theme(mut a), Value::Theme(b)) => {
            for (j, t) in b {
                let e = a.remove(&j);
                a.insert(j, match e {
                    Some(s) => &s + &t,
                    None => t,
                });
            }
            Ok(Value::Theme(a))
        }
        (Value::Operator(a), Value::Operator(b)) => Ok(Value::Operator(a.add(&b))),
        (Value::Operator(o), Value::Series(z)) | (Value::Series(z), Value::Operator(o)) => {
            Ok(Value::Operator(o.add(&OreOperator::series(z))))
        }
        (Value::Series(z), other) | (other, Value::Series(z)) if z.is_zero() => Ok(other),
        (a, b) => Err(Error::Parse(format!("cannot add {} and {}", kind(&a), kind(&b)))),
    }
}

fn mul(x: Value, y: Value) -> Result<Value> {
    match (x, y) {
        (Value::Operator(p), Value::Operator(q)) => Ok(Value::Operator(ore_mul(&p, &q))),
        (Value::Operator(p), Value::Series(s)) => Ok(Value::Operator(ore_mul(&p, &OreOperator::series(s)))),
        (Value::Series(s), v) => Ok(act(&s, v)),
        (v, Value::Series(s)) if s.is_constant() => Ok(act(&s, v)),
        (Value::Expansion(a), Value::Expansion(b)) if is_pure(&a) && is_pure(&b) => {
            let mut out = Vec::new();
            for t in &a {
                for u in &b {
                    out.push(Term { series: &t.series * &u.series, r: &t.r + &u.r, j: t.j + u.j });
                }
            }
            Ok(Value::Expansion(out))
        }
        (a, b) => Err(Error::Parse(format!(
            "cannot multiply {} by {} (write series factors on the left of expansions)",
            kind(&a),
            kind(&b)
        ))),
    }
}

fn eval(e: &Expr, env: &Env) -> Result<Value> {
    let prec = env.prec;
    Ok(match e {
        Expr::Num(n) => Value::Series(TruncSeries::constant(Rational::from_integer(n.clone()), prec)),
        Expr::Ident(name) => match name.as_str() {
            "b" => Value::Series(TruncSeries::monomial(Rational::one(), 1, prec)),
            "a" if !env.params.contains_key("a") => Value::Operator(OreOperator::a(prec)),
            "s" => Value::Expansion(vec![Term { series: TruncSeries::one(prec), r: Rational::one(), j: 0 }]),
            _ => {
                if let Some(v) = env.params.get(name) {
                    Value::Series(TruncSeries::constant(v.clone(), prec))
                } else if let Some(j) = name.strip_prefix('e').and_then(|d| d.parse::<usize>().ok()).filter(|j| *j >= 1) {
                    Value::Theme(BTreeMap::from([(j, TruncSeries::one(prec))]))
                } else {
                    return Err(Error::Parse(format!("unknown name {name:?}")));
                }
            }
        },
        Expr::Call(f, args) => match (f.as_str(), args.as_slice()) {
            ("log", [Expr::Ident(s)]) if s == "s" => {
                Value::Expansion(vec![Term { series: TruncSeries::one(prec), r: Rational::zero(), j: 1 }])
            }
            ("inv", [x]) => match eval(x, env)? {
                Value::Series(s) => Value::Series(s.invert().map_err(|_| Error::Parse("inv() of a non-unit".into()))?),
                v => return Err(Error::Parse(format!("inv() needs a series, found {}", kind(&v)))),
            },
            _ => return Err(Error::Parse(format!("unknown function {f}()"))),
        },
        Expr::Neg(x) => act(&TruncSeries::constant(-Rational::one(), prec), eval(x, env)?),
        Expr::Add(x, y) => add(eval(x, env)?, eval(y, env)?)?,
        Expr::Sub(x, y) => {
            let y = act(&TruncSeries::constant(-Rational::one(), prec), eval(y, env)?);
            add(eval(x, env)?, y)?
        }
        Expr::Mul(x, y) => mul(eval(x, env)?, eval(y, env)?)?,
        Expr::Div(x, y) => match eval(y, env)? {
            Value::Series(s) => {
                let inv = s.invert().map_err(|_| Error::Parse("division by a non-unit series".into()))?;
                match eval(x, env)? {
                    Value::Operator(o) => Value::Operator(ore_mul(&o, &OreOperator::series(inv))),
                    v => act(&inv, v),
                }
            }
            v => return Err(Error::Parse(format!("cannot divide by {}", kind(&v)))),
        },
        Expr::Pow(x, y) => {
            let exp = as_constant(&eval(y, env)?)?;
            match eval(x, env)? {
                Value::Series(s) => {
                    let n = to_i64(&exp)
                        .filter(|n| *n >= 0)
                        .ok_or_else(|| Error::Parse(format!("series power {} is not a natural number", fmt_rational(&exp))))?;
                    let mut acc = TruncSeries::one(prec);
                    for _ in 0..n {
                        acc = &acc * &s;
                    }
                    Value::Series(acc)
                }
                Value::Operator(o) => {
                    let n = to_i64(&exp)
                        .filter(|n| *n >= 0)
                        .ok_or_else(|| Error::Parse(format!("operator power {} is not a natural number", fmt_rational(&exp))))?;
                    let mut acc = OreOperator::series(TruncSeries::one(prec));
                    for _ in 0..n {
                        acc = ore_mul(&acc, &o);
                    }
                    Value::Operator(acc)
                }
                Value::Expansion(terms) if terms.len() == 1 && is_pure(&terms) => {
                    let t = &terms[0];
                    if t.j > 0 || !t.series.coeffs()[0].is_one() {
                        return Err(Error::Parse("only s itself can be raised to a rational power".into()));
                    }
                    Value::Expansion(vec![Term { series: t.series.clone(), r: &t.r * &exp, j: 0 }])
                }
                v => return Err(Error::Parse(format!("cannot raise {} to a power", kind(&v)))),
            }
        }
    })
}

/// Evaluates an operator such as `(a - 5/2 b) * inv(1 + 2 b^3) * (a - 7/2 b)`.
/// A plain series is accepted as an operator of degree zero.
pub fn eval_operator(src: &str, env: &Env) -> Result<OreOperator> {
    match eval(&parse_expr(src)?, env)? {
        Value::Operator(o) => Ok(o),
        Value::Series(s) => Ok(OreOperator::series(s)),
        v => Err(Error::Parse(format!("{src:?} is {}, expected an operator in a and b", kind(&v)))),
    }
}

/// Evaluates a series expression (`1 + alpha*b^2`, `inv(1 - b)`).
pub fn eval_series(src: &str, env: &Env) -> Result<TruncSeries> {
    match eval(&parse_expr(src)?, env)? {
        Value::Series(s) => Ok(s.truncate(env.prec)),
        v => Err(Error::Parse(format!("{src:?} is {}, expected a series", kind(&v)))),
    }
}

/// Evaluates an expansion such as `s^(1/2)*log(s) + (z + b)*s^(-1/2)` with
/// log-degree bound at least `n`.
pub fn eval_expansion(src: &str, env: &Env, n: usize) -> Result<XiElement> {
    let terms = match eval(&parse_expr(src)?, env)? {
        Value::Expansion(t) => t,
        v => return Err(Error::Parse(format!("{src:?} is {}, expected an expansion in s", kind(&v)))),
    };
    let mut lambda: Option<Rational> = None;
    for t in &terms {
        let mu = &t.r + Rational::one();
        if mu <= Rational::zero() {
            return Err(Error::Parse(format!("s^{} is not in a module with positive exponents", fmt_rational(&t.r))));
        }
        let c = exponent_class(&mu);
        if lambda.as_ref().is_some_and(|l| *l != c) {
            return Err(Error::Parse("terms belong to different exponent classes".into()));
        }
        lambda = Some(c);
    }
    let lambda = lambda.ok_or_else(|| Error::Parse("empty expansion".into()))?;
    let n = terms.iter().map(|t| t.j).max().unwrap_or(0).max(n);
    let mut acc = XiElement::zero(&lambda, n, env.prec)?;
    for t in &terms {
        let x = log_power(&(&t.r + Rational::one()), t.j, &lambda, n, env.prec)?.series_mul(&t.series);
        acc = acc.add(&x)?;
    }
    Ok(acc)
}

/// Evaluates `e2 - 5*b*e1` in a presentation of the given rank.
pub fn eval_theme_element(src: &str, env: &Env, rank: usize) -> Result<ThemeElement> {
    let map = match eval(&parse_expr(src)?, env)? {
        Value::Theme(m) => m,
        Value::Series(s) if s.is_zero() => BTreeMap::new(),
        v => return Err(Error::Parse(format!("{src:?} is {}, expected a combination of e1..e{rank}", kind(&v)))),
    };
    let mut comps = vec![TruncSeries::zero(env.prec); rank];
    for (j, s) in map {
        if j > rank {
            return Err(Error::Parse(format!("e{j} does not exist in rank {rank}")));
        }
        comps[j - 1] = s.truncate(env.prec);
    }
    Ok(ThemeElement { comps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{int, rat};
    use crate::xi::power_monomial;

    #[test]
    fn series_expressions() {
        let env = Env::new(6).with("alpha", int(3));
        assert_eq!(eval_series("1 + alpha*b^2", &env).unwrap(), TruncSeries::from_ints(&[1, 0, 3], 6));
        assert_eq!(eval_series("2b - (1+b)^2", &env).unwrap(), TruncSeries::from_ints(&[-1, 0, -1], 6));
        assert_eq!(eval_series("inv(1 - b)", &env).unwrap(), TruncSeries::from_ints(&[1, 1, 1, 1, 1, 1], 6));
        assert_eq!(eval_series("7/2", &env).unwrap(), TruncSeries::constant(rat(7, 2), 6));
        assert_eq!(eval_series("-b^2/2", &env).unwrap(), TruncSeries::from_coeffs(vec![int(0), int(0), rat(-1, 2)], 6));
        assert!(eval_series("gamma*b", &env).is_err());
        assert!(eval_series("1 +", &env).is_err());
    }

    #[test]
    fn expansions() {
        let env = Env::new(12).with("z", int(2));
        let x = eval_expansion("s^(1/2)*log(s) + (z + b)*s^(-1/2)", &env, 1).unwrap();
        let l = rat(1, 2);
        let expect = log_power(&rat(3, 2), 1, &l, 1, 12)
            .unwrap()
            .add(&XiElement::basis(&l, 0, 1, 12).unwrap().series_mul(&TruncSeries::from_ints(&[2, 1], 12)))
            .unwrap();
        assert!(x.agrees_with(&expect));
        let y = eval_expansion("s*s^(3/2)", &env, 0).unwrap();
        assert!(y.agrees_with(&power_monomial(&rat(7, 2), 0, &l, 0, 12).unwrap()));
        assert!(eval_expansion("s^(1/2) + s^(1/3)", &env, 0).is_err());
        assert!(eval_expansion("s*b", &env, 0).is_err());
    }

    #[test]
    fn theme_elements() {
        let env = Env::new(8);
        let x = eval_theme_element("e2 - 5*b*e1", &env, 3).unwrap();
        assert_eq!(x.to_string(), "e2 - 5*b*e1");
        assert!(eval_theme_element("e4", &env, 3).is_err());
    }

    #[test]
    fn operator_literals_follow_the_commutation_rule() {
        let env = Env::new(16);
        let ab = eval_operator("a*b - b*a", &env).unwrap();
        assert!(ab.agrees_with(&eval_operator("b^2", &env).unwrap()));
        let p = eval_operator("(a - 5/2 b) * inv(1 + 2 b^3) * (a - 7/2 b)", &env).unwrap();
        assert_eq!(p.degree(), Some(2));
        let a = OreOperator::a(16);
        let q = ore_mul(
            &ore_mul(&OreOperator::linear(&rat(5, 2), 16), &OreOperator::series(TruncSeries::from_ints(&[1, 0, 0, 2], 16).invert().unwrap())),
            &OreOperator::linear(&rat(7, 2), 16),
        );
        assert!(p.agrees_with(&q));
        assert!(eval_operator("a^2", &env).unwrap().agrees_with(&ore_mul(&a, &a)));
        assert!(eval_operator("a/(1 - b)", &env).is_ok());
        assert!(eval_operator("s", &env).is_err());
    }
}
