//! A small expression language over the q-series kernel.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' int)*
//! atom    := int | 'q' ['^' int] | 'zeta(' L ')' ['^' int] | call | '(' expr ')'
//! mono    := ['-'] ( '1' | 'q' ['^' int] | 'zeta(' L ')' ['^' int] ['*' 'q' ['^' int]] )
//! base    := 'q' ['^' int]
//! ```
//!
//! Calls: `J(m)`, `j(mono; base)`, `m(mono, base, mono)`,
//! `Delta(mono, mono, mono; base)`, `Psi(k, n, mono, mono, mono; base)`,
//! `h(mono; base)`, `T()`, `T2()`, `Dev(a, M)`, `Dev2(a, M)`,
//! `pick(expr, r, m)`.

use std::fmt;

use overrank::appell::{delta, h_series, m_series, psi, T2_series, T_series};
use overrank::oracle::{deviation, Which, DEFAULT_ORACLE_RANGE};
use overrank::theta::{theta_j, J};
use overrank::{CycloNum, Monomial, QSeries, RootOfUnity};

/// Widest dense window a literal `q^k` may open.
const MAX_WINDOW: i64 = 1 << 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Int(i64),
    Q(i64),
    Zeta(u32, i64),
    J(i64),
    Theta(Monomial, i64),
    M(Monomial, i64, Monomial),
    Delta(Monomial, Monomial, Monomial, i64),
    Psi(i64, i64, Monomial, Monomial, Monomial, i64),
    H(Monomial, i64),
    T,
    T2,
    Dev(i64, i64),
    Dev2(i64, i64),
    Pick(Box<Expr>, i64, i64),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i64),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyntaxError {
    pub line: usize,
    pub column: usize,
    pub offset: usize,
    pub expected: Vec<String>,
    pub found: String,
    pub message: Option<String>,
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "syntax error at line {}, column {}: ", self.line, self.column)?;
        if let Some(m) = &self.message {
            write!(f, "{m}; ")?;
        }
        write!(f, "expected {}, found {}", self.expected.join(" or "), self.found)
    }
}

impl std::error::Error for SyntaxError {}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

type PResult<T> = Result<T, SyntaxError>;

fn is_ident(c: u8) -> bool {
    c.is_ascii_alphanumeric() || c == b'_'
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.src.as_bytes().get(self.pos) {
            if c.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.as_bytes().get(self.pos).copied()
    }

    fn error_at(&self, pos: usize, expected: &[&str], message: Option<String>) -> SyntaxError {
        let before = &self.src[..pos];
        let line = before.matches('\n').count() + 1;
        let column = pos - before.rfind('\n').map_or(0, |i| i + 1) + 1;
        let rest = &self.src[pos..];
        let found = match rest.chars().next() {
            None => "end of input".to_string(),
            Some(c) if c.is_ascii_alphanumeric() => {
                let w: String = rest.chars().take_while(|c| c.is_ascii_alphanumeric() || *c == '_').collect();
                format!("`{w}`")
            }
            Some(c) => format!("`{c}`"),
        };
        SyntaxError {
            line,
            column,
            offset: pos,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found,
            message,
        }
    }

    fn error(&mut self, expected: &[&str]) -> SyntaxError {
        self.skip_ws();
        self.error_at(self.pos, expected, None)
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> PResult<()> {
        if self.eat(c) {
            Ok(())
        } else {
            let s = format!("`{}`", c as char);
            Err(self.error(&[&s]))
        }
    }

    fn ident(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let bytes = self.src.as_bytes();
        let start = self.pos;
        if !bytes.get(start).is_some_and(|c| c.is_ascii_alphabetic()) {
            return None;
        }
        let mut end = start;
        while bytes.get(end).is_some_and(|&c| is_ident(c)) {
            end += 1;
        }
        self.pos = end;
        Some(&self.src[start..end])
    }

    fn digits(&mut self) -> PResult<u64> {
        self.skip_ws();
        let bytes = self.src.as_bytes();
        let start = self.pos;
        while bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error_at(start, &["integer"], None));
        }
        self.src[start..self.pos]
            .parse()
            .map_err(|_| self.error_at(start, &["integer"], Some("integer out of range".into())))
    }

    /// `['-'] digits` or `'(' ['-'] digits ')'`.
    fn int(&mut self) -> PResult<i64> {
        let paren = self.eat(b'(');
        let neg = self.eat(b'-');
        let start = self.pos;
        let v = self.digits()?;
        let v = i64::try_from(v).map_err(|_| self.error_at(start, &["integer"], Some("integer out of range".into())))?;
        if paren {
            self.expect(b')')?;
        }
        Ok(if neg { -v } else { v })
    }

    fn q_exponent(&mut self) -> PResult<i64> {
        if self.eat(b'^') {
            self.int()
        } else {
            Ok(1)
        }
    }

    fn zeta_tail(&mut self) -> PResult<(u32, i64)> {
        self.expect(b'(')?;
        let start = self.pos;
        let l = self.digits()?;
        if l == 0 || l > u32::MAX as u64 {
            return Err(self.error_at(start, &["positive level"], None));
        }
        self.expect(b')')?;
        let k = self.q_exponent()?;
        Ok((l as u32, k))
    }

    fn mono(&mut self) -> PResult<Monomial> {
        self.skip_ws();
        let start = self.pos;
        let neg = self.eat(b'-');
        let save = self.pos;
        let m = match self.ident() {
            Some("q") => Monomial::q(self.q_exponent()?),
            Some("zeta") => {
                let (l, k) = self.zeta_tail()?;
                let mut e = 0;
                if self.eat(b'*') {
                    match self.ident() {
                        Some("q") => e = self.q_exponent()?,
                        _ => return Err(self.error_at(self.pos, &["`q`"], None)),
                    }
                }
                Monomial::zeta_q(l as u64, k, e)
            }
            Some(_) => return Err(self.not_a_monomial(start)),
            None => {
                self.pos = save;
                if self.peek() == Some(b'1') {
                    self.digits()?;
                    if matches!(self.peek(), Some(b'*' | b'/' | b'+' | b'^')) {
                        return Err(self.not_a_monomial(start));
                    }
                    Monomial::ONE
                } else {
                    return Err(self.not_a_monomial(start));
                }
            }
        };
        if matches!(self.peek(), Some(b'*' | b'/' | b'+' | b'^' | b'(')) {
            return Err(self.not_a_monomial(start));
        }
        Ok(if neg { -m } else { m })
    }

    fn not_a_monomial(&self, start: usize) -> SyntaxError {
        self.error_at(
            start,
            &["monomial"],
            Some("arguments of j, m, Delta, Psi and h must be monomials such as -q^3 or zeta(3)^2*q".into()),
        )
    }

    fn base(&mut self) -> PResult<i64> {
        self.skip_ws();
        let start = self.pos;
        match self.ident() {
            Some("q") => {
                let t = self.q_exponent()?;
                if t < 1 {
                    return Err(self.error_at(start, &["q^t with t >= 1"], None));
                }
                Ok(t)
            }
            _ => Err(self.error_at(start, &["`q` or `q^t`"], None)),
        }
    }

    fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat(b'/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.eat(b'-') {
            Ok(Expr::Neg(Box::new(self.unary()?)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> PResult<Expr> {
        let mut base = self.atom()?;
        while self.eat(b'^') {
            base = Expr::Pow(Box::new(base), self.int()?);
        }
        Ok(base)
    }

    fn atom(&mut self) -> PResult<Expr> {
        const START: &[&str] = &["number", "`q`", "`zeta`", "function call", "`(`", "`-`"];
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                let v = self.digits()?;
                i64::try_from(v)
                    .map(Expr::Int)
                    .map_err(|_| self.error_at(start, &["integer"], Some("integer out of range".into())))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                let name = self.ident().expect("alphabetic");
                self.call(name, start)
            }
            _ => Err(self.error(START)),
        }
    }

    fn call(&mut self, name: &str, start: usize) -> PResult<Expr> {
        if name == "q" {
            return Ok(Expr::Q(self.q_exponent()?));
        }
        if name == "zeta" {
            let (l, k) = self.zeta_tail()?;
            return Ok(Expr::Zeta(l, k));
        }
        let known = ["J", "j", "m", "Delta", "Psi", "h", "T", "T2", "Dev", "Dev2", "pick"];
        if !known.contains(&name) {
            return Err(self.error_at(start, &["`q`", "`zeta`", "a known function"], Some(format!("unknown name `{name}`"))));
        }
        self.expect(b'(')?;
        let e = match name {
            "J" => {
                let at = self.pos;
                let m = self.int()?;
                if m < 1 {
                    return Err(self.error_at(at, &["positive integer"], None));
                }
                Expr::J(m)
            }
            "j" => {
                let z = self.mono()?;
                self.expect(b';')?;
                Expr::Theta(z, self.base()?)
            }
            "h" => {
                let x = self.mono()?;
                self.expect(b';')?;
                Expr::H(x, self.base()?)
            }
            "m" => {
                let x = self.mono()?;
                self.expect(b',')?;
                let b = self.base()?;
                self.expect(b',')?;
                Expr::M(x, b, self.mono()?)
            }
            "Delta" => {
                let x = self.mono()?;
                self.expect(b',')?;
                let z1 = self.mono()?;
                self.expect(b',')?;
                let z0 = self.mono()?;
                self.expect(b';')?;
                Expr::Delta(x, z1, z0, self.base()?)
            }
            "Psi" => {
                let k = self.int()?;
                self.expect(b',')?;
                let at = self.pos;
                let n = self.int()?;
                if n < 1 {
                    return Err(self.error_at(at, &["positive integer"], None));
                }
                self.expect(b',')?;
                let x = self.mono()?;
                self.expect(b',')?;
                let z = self.mono()?;
                self.expect(b',')?;
                let zp = self.mono()?;
                self.expect(b';')?;
                Expr::Psi(k, n, x, z, zp, self.base()?)
            }
            "T" => Expr::T,
            "T2" => Expr::T2,
            "Dev" | "Dev2" => {
                let a = self.int()?;
                self.expect(b',')?;
                let m = self.int()?;
                if name == "Dev" {
                    Expr::Dev(a, m)
                } else {
                    Expr::Dev2(a, m)
                }
            }
            _ => {
                let e = self.expr()?;
                self.expect(b',')?;
                let r = self.int()?;
                self.expect(b',')?;
                let at = self.pos;
                let m = self.int()?;
                if m < 1 {
                    return Err(self.error_at(at, &["positive integer"], None));
                }
                Expr::Pick(Box::new(e), r, m)
            }
        };
        self.expect(b')')?;
        Ok(e)
    }
}

pub fn parse(input: &str) -> Result<Expr, SyntaxError> {
    let mut p = Parser { src: input, pos: 0 };
    let e = p.expr()?;
    if p.peek().is_some() {
        return Err(p.error(&["operator", "end of input"]));
    }
    Ok(e)
}

fn base_str(b: i64) -> String {
    if b == 1 {
        "q".into()
    } else {
        format!("q^{b}")
    }
}

fn level(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) | Expr::Div(..) => 2,
        Expr::Neg(..) => 3,
        Expr::Pow(..) => 4,
        _ => 5,
    }
}

fn write_at(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    if level(e) < min {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

fn exp_str(e: i64) -> String {
    e.to_string()
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Int(n) => write!(f, "{n}"),
            Expr::Q(1) => write!(f, "q"),
            Expr::Q(e) => write!(f, "q^{}", exp_str(*e)),
            Expr::Zeta(l, 1) => write!(f, "zeta({l})"),
            Expr::Zeta(l, k) => write!(f, "zeta({l})^{}", exp_str(*k)),
            Expr::J(m) => write!(f, "J({m})"),
            Expr::Theta(z, b) => write!(f, "j({z}; {})", base_str(*b)),
            Expr::M(x, b, z) => write!(f, "m({x}, {}, {z})", base_str(*b)),
            Expr::Delta(x, z1, z0, b) => write!(f, "Delta({x}, {z1}, {z0}; {})", base_str(*b)),
            Expr::Psi(k, n, x, z, zp, b) => write!(f, "Psi({k}, {n}, {x}, {z}, {zp}; {})", base_str(*b)),
            Expr::H(x, b) => write!(f, "h({x}; {})", base_str(*b)),
            Expr::T => write!(f, "T()"),
            Expr::T2 => write!(f, "T2()"),
            Expr::Dev(a, m) => write!(f, "Dev({a}, {m})"),
            Expr::Dev2(a, m) => write!(f, "Dev2({a}, {m})"),
            Expr::Pick(e, r, m) => write!(f, "pick({e}, {r}, {m})"),
            Expr::Neg(e) => {
                write!(f, "-")?;
                write_at(f, e, 3)
            }
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                write_at(f, a, 1)?;
                write!(f, " {} ", if matches!(self, Expr::Add(..)) { "+" } else { "-" })?;
                write_at(f, b, 2)
            }
            Expr::Mul(a, b) | Expr::Div(a, b) => {
                write_at(f, a, 2)?;
                write!(f, " {} ", if matches!(self, Expr::Mul(..)) { "*" } else { "/" })?;
                write_at(f, b, 3)
            }
            Expr::Pow(b, n) => {
                write_at(f, b, 5)?;
                write!(f, "^{}", exp_str(*n))
            }
        }
    }
}

/// A kernel error together with the sub-expression that raised it.
#[derive(Debug)]
pub struct EvalError {
    pub expr: String,
    pub source: overrank::Error,
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "in `{}`: {}", self.expr, self.source)
    }
}

impl std::error::Error for EvalError {}

type EResult = Result<QSeries, EvalError>;

fn at(e: &Expr) -> impl Fn(overrank::Error) -> EvalError + '_ {
    move |source| EvalError {
        expr: e.to_string(),
        source,
    }
}

/// Re-run `f` with a larger working order until the result is exact to
/// `prec`; composite nodes lose order to negative valuations.
fn boosted<F>(prec: i64, f: F) -> EResult
where
    F: Fn(i64) -> EResult,
{
    let mut work = prec;
    let mut s = f(work)?;
    for _ in 0..6 {
        if s.prec() >= prec {
            break;
        }
        work += prec - s.prec();
        s = f(work)?;
    }
    Ok(s)
}

fn leaf(e: &Expr, prec: i64) -> overrank::Result<QSeries> {
    let dev = |a: i64, m: i64, which: Which| -> overrank::Result<QSeries> {
        if m < 2 {
            return Err(overrank::Error::Range(format!("Dev needs M >= 2, got {m}")));
        }
        deviation(a, m, which, prec, DEFAULT_ORACLE_RANGE)
    };
    match e {
        Expr::Int(n) => Ok(QSeries::constant(CycloNum::from_int(*n), prec)),
        Expr::Q(k) if *k >= prec => Ok(QSeries::zero(prec)),
        Expr::Q(k) if prec.saturating_sub(*k) > MAX_WINDOW => Err(overrank::Error::ExponentOverflow),
        Expr::Q(k) => Ok(QSeries::monomial(CycloNum::one(), *k, prec)),
        Expr::Zeta(l, k) => Ok(QSeries::constant(RootOfUnity::new(*l as u64, *k).to_cyclo()?, prec)),
        Expr::J(m) => Ok(J(*m, prec)),
        Expr::Theta(z, b) => Ok(theta_j(z, *b, prec)),
        Expr::M(x, b, z) => m_series(x, *b, z, prec),
        Expr::Delta(x, z1, z0, b) => delta(x, z1, z0, *b, prec),
        Expr::Psi(k, n, x, z, zp, b) => psi(*k, *n, x, z, zp, *b, prec),
        Expr::H(x, b) => h_series(x, *b, prec),
        Expr::T => T_series(prec),
        Expr::T2 => T2_series(prec),
        Expr::Dev(a, m) => dev(*a, *m, Which::Rank),
        Expr::Dev2(a, m) => dev(*a, *m, Which::M2),
        _ => unreachable!("composite"),
    }
}

fn eval_node(e: &Expr, prec: i64) -> EResult {
    let err = at(e);
    match e {
        Expr::Neg(a) => Ok(-eval_node(a, prec)?),
        Expr::Add(a, b) => eval_node(a, prec)?.try_add(&eval_node(b, prec)?).map_err(err),
        Expr::Sub(a, b) => eval_node(a, prec)?.try_sub(&eval_node(b, prec)?).map_err(err),
        Expr::Mul(a, b) => boosted(prec, |p| eval_node(a, p)?.try_mul(&eval_node(b, p)?).map_err(&err)),
        Expr::Div(a, b) => boosted(prec, |p| eval_node(a, p)?.try_div(&eval_node(b, p)?).map_err(&err)),
        Expr::Pow(a, n) => boosted(prec, |p| eval_node(a, p)?.try_pow(*n).map_err(&err)),
        Expr::Pick(a, r, m) => boosted(prec, |p| {
            let s = eval_node(a, p.saturating_mul(*m).saturating_add(*r))?;
            Ok(s.extract_progression(*r, *m))
        }),
        _ => leaf(e, prec).map_err(err),
    }
}

/// Evaluate to `O(q^prec)`.
pub fn eval(e: &Expr, prec: i64) -> EResult {
    Ok(eval_node(e, prec)?.truncate(prec))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rt(s: &str) -> String {
        parse(s).unwrap().to_string()
    }

    #[test]
    fn precedence() {
        let e = parse("-q^2 * 3 + 1").unwrap();
        assert_eq!(
            e,
            Expr::Add(
                Box::new(Expr::Mul(Box::new(Expr::Neg(Box::new(Expr::Q(2)))), Box::new(Expr::Int(3)))),
                Box::new(Expr::Int(1))
            )
        );
        assert_eq!(rt("1 - (2 - 3)"), "1 - (2 - 3)");
        assert_eq!(rt("(1 - 2) - 3"), "1 - 2 - 3");
        assert_eq!(rt("J(2)^4 / (J(1)^2 * J(6))"), "J(2)^4 / (J(1)^2 * J(6))");
        assert_eq!(rt("(-J(1))^2"), "(-J(1))^2");
    }

    #[test]
    fn calls() {
        assert_eq!(parse("m(q^9, q^18, -1)").unwrap(), Expr::M(Monomial::q(9), 18, Monomial::MINUS_ONE));
        assert_eq!(parse("h(q^6; q^9)").unwrap(), Expr::H(Monomial::q(6), 9));
        assert_eq!(
            parse("Delta(zeta(3)^-2*q, zeta(3), -1; q^2)").unwrap(),
            Expr::Delta(Monomial::zeta_q(3, -2, 1), Monomial::zeta_q(3, 1, 0), Monomial::MINUS_ONE, 2)
        );
        assert_eq!(rt("j(-1;q)"), "j(-1; q)");
        assert_eq!(rt("pick(Dev(0,3) - Dev(1,3), 1, 3)"), "pick(Dev(0, 3) - Dev(1, 3), 1, 3)");
    }

    #[test]
    fn errors() {
        let e = parse("m(J(1), q^2, -1)").unwrap_err();
        assert_eq!((e.line, e.column), (1, 3));
        assert!(e.message.unwrap().contains("monomials"));
        let e = parse("1 +\n  * 2").unwrap_err();
        assert_eq!((e.line, e.column), (2, 3));
        assert!(e.expected.contains(&"`(`".to_string()));
        let e = parse("J(1) J(2)").unwrap_err();
        assert_eq!(e.column, 6);
        assert!(parse("foo(1)").unwrap_err().message.unwrap().contains("foo"));
        assert!(parse("j(q; q^0)").is_err());
    }

    #[test]
    fn evaluation() {
        let s = eval(&parse("m(q, q^2, -1)").unwrap(), 50).unwrap();
        assert_eq!(s.to_string(), "1/2 + O(q^50)");
        let z = eval(&parse("j(-1; q) - 2*J(2)^2/J(1)").unwrap(), 100).unwrap();
        assert!(z.is_zero());
        let p = eval(&parse("q^-4 * J(1)").unwrap(), 3).unwrap();
        assert_eq!(p.prec(), 3);
        let err = eval(&parse("1 + m(-1, q, q)").unwrap(), 10).unwrap_err();
        assert_eq!(err.expr, "m(-1, q, q)");
        assert!(matches!(err.source, overrank::Error::Pole(_)));
    }

    #[test]
    fn larger_order_extends() {
        let e = parse("Dev(2, 3) / (1 - q)^2 + q^-3 * h(q^6; q^9)").unwrap();
        let a = eval(&e, 20).unwrap();
        let b = eval(&e, 40).unwrap();
        assert!(a.first_difference(&b.truncate(20)).is_none());
    }
}
