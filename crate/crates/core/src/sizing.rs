//! Target edge-length ("size") fields. A size field assigns every point the
//! edge length the mesh should have there; the node dynamics and all mesh
//! statistics compare actual distances against it.

use crate::error::{Error, Result};
use crate::vec2::{Aabb, Vec2};
use std::fmt;

/// Size field: constant, radial ring profile, or a parsed expression in x, y.
#[derive(Debug, Clone)]
pub enum SizeField {
    Constant(f64),
    /// `inner` inside radius `radius` from the origin, growing linearly with
    /// slope `slope` outside it: `inner` for r < radius,
    /// `slope * |r - radius| + inner` for r >= radius.
    RadialRing { inner: f64, radius: f64, slope: f64 },
    Expression(Expr),
}

impl SizeField {
    pub fn constant(h: f64) -> Result<SizeField> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "constant size must be finite and positive, got {h}"
            )));
        }
        Ok(SizeField::Constant(h))
    }

    pub fn radial_ring(inner: f64, radius: f64, slope: f64) -> Result<SizeField> {
        if !(inner.is_finite() && inner > 0.0) || !(radius.is_finite() && radius >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "radial ring needs inner > 0 and radius >= 0, got inner={inner}, radius={radius}"
            )));
        }
        if !(slope.is_finite() && slope >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "radial ring slope must be finite and non-negative, got {slope}"
            )));
        }
        Ok(SizeField::RadialRing { inner, radius, slope })
    }

    /// The ring profile used by the square3 grading studies:
    /// 0.1 inside radius 2, then 0.2 * |r - 2| + 0.1.
    pub fn radial_ring_default() -> SizeField {
        SizeField::RadialRing {
            inner: 0.1,
            radius: 2.0,
            slope: 0.2,
        }
    }

    /// Parses an arithmetic expression in `x` and `y` with `+ - * /`, unary
    /// minus, parentheses, and the functions `sqrt`, `abs`, `min`, `max`.
    pub fn expression(src: &str) -> Result<SizeField> {
        Ok(SizeField::Expression(Expr::parse(src)?))
    }

    /// Local target edge length at `p`. Strictly positive for valid fields;
    /// expression fields should be checked with [`SizeField::validate_positive`]
    /// once per configuration rather than per call.
    pub fn evaluate(&self, p: Vec2) -> f64 {
        match self {
            SizeField::Constant(h) => *h,
            SizeField::RadialRing { inner, radius, slope } => {
                let r = p.norm();
                if r < *radius {
                    *inner
                } else {
                    slope * (r - radius).abs() + inner
                }
            }
            SizeField::Expression(e) => e.eval(p.x, p.y),
        }
    }

    /// Target length for the pair (p, q): the average of the endpoint sizes.
    pub fn pair_target(&self, p: Vec2, q: Vec2) -> f64 {
        0.5 * (self.evaluate(p) + self.evaluate(q))
    }

    /// Checks positivity on an `n x n` sample grid over `bbox` (configuration-
    /// time guard for expression fields; the built-ins are positive by
    /// construction).
    pub fn validate_positive(&self, bbox: Aabb, n: usize) -> Result<()> {
        let n = n.max(2);
        for i in 0..n {
            for j in 0..n {
                let p = Vec2::new(
                    bbox.min.x + bbox.width() * i as f64 / (n - 1) as f64,
                    bbox.min.y + bbox.height() * j as f64 / (n - 1) as f64,
                );
                let v = self.evaluate(p);
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::Config(format!(
                        "size field is not positive at ({}, {}): {v}",
                        p.x, p.y
                    )));
                }
            }
        }
        Ok(())
    }

    /// Minimum and maximum over an `n x n` sample grid (used to size spatial
    /// hash cells and seed lattices).
    pub fn range_on(&self, bbox: Aabb, n: usize) -> (f64, f64) {
        let n = n.max(2);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            for j in 0..n {
                let p = Vec2::new(
                    bbox.min.x + bbox.width() * i as f64 / (n - 1) as f64,
                    bbox.min.y + bbox.height() * j as f64 / (n - 1) as f64,
                );
                let v = self.evaluate(p);
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        (lo, hi)
    }
}

impl fmt::Display for SizeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SizeField::Constant(h) => write!(f, "const:{h}"),
            SizeField::RadialRing { inner, radius, slope } => {
                write!(f, "radial-ring:{inner}/{radius}/{slope}")
            }
            SizeField::Expression(e) => write!(f, "expr:{}", e.source),
        }
    }
}

/// Parsed size expression. Evaluation walks the AST; parsing happens once at
/// configuration time.
#[derive(Debug, Clone)]
pub struct Expr {
    source: String,
    root: Node,
}

#[derive(Debug, Clone)]
enum Node {
    Num(f64),
    X,
    Y,
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Sqrt(Box<Node>),
    Abs(Box<Node>),
    Min(Box<Node>, Box<Node>),
    Max(Box<Node>, Box<Node>),
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        let tokens = lex(src)?;
        let mut p = Parser { tokens, pos: 0, src };
        let root = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(Error::Expression(format!(
                "unexpected trailing input at '{:?}' in '{src}'",
                p.tokens[p.pos]
            )));
        }
        Ok(Expr {
            source: src.to_string(),
            root,
        })
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        fn go(n: &Node, x: f64, y: f64) -> f64 {
            match n {
                Node::Num(v) => *v,
                Node::X => x,
                Node::Y => y,
                Node::Neg(a) => -go(a, x, y),
                Node::Add(a, b) => go(a, x, y) + go(b, x, y),
                Node::Sub(a, b) => go(a, x, y) - go(b, x, y),
                Node::Mul(a, b) => go(a, x, y) * go(b, x, y),
                Node::Div(a, b) => go(a, x, y) / go(b, x, y),
                Node::Sqrt(a) => go(a, x, y).sqrt(),
                Node::Abs(a) => go(a, x, y).abs(),
                Node::Min(a, b) => go(a, x, y).min(go(b, x, y)),
                Node::Max(a, b) => go(a, x, y).max(go(b, x, y)),
            }
        }
        go(&self.root, x, y)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
    Comma,
}

fn lex(src: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let bytes = src.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                out.push(Tok::Plus);
                i += 1;
            }
            '-' => {
                out.push(Tok::Minus);
                i += 1;
            }
            '*' => {
                out.push(Tok::Star);
                i += 1;
            }
            '/' => {
                out.push(Tok::Slash);
                i += 1;
            }
            '(' => {
                out.push(Tok::LParen);
                i += 1;
            }
            ')' => {
                out.push(Tok::RParen);
                i += 1;
            }
            ',' => {
                out.push(Tok::Comma);
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() {
                    let d = bytes[i] as char;
                    if d.is_ascii_digit() || d == '.' {
                        i += 1;
                    } else if (d == 'e' || d == 'E')
                        && i + 1 < bytes.len()
                        && (bytes[i + 1].is_ascii_digit()
                            || ((bytes[i + 1] == b'+' || bytes[i + 1] == b'-')
                                && i + 2 < bytes.len()
                                && bytes[i + 2].is_ascii_digit()))
                    {
                        i += 2; // consume 'e' and sign or first digit
                    } else {
                        break;
                    }
                }
                let text = &src[start..i];
                let v: f64 = text.parse().map_err(|_| {
                    Error::Expression(format!("bad number literal '{text}' in '{src}'"))
                })?;
                out.push(Tok::Num(v));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                out.push(Tok::Ident(src[start..i].to_string()));
            }
            other => {
                return Err(Error::Expression(format!(
                    "unexpected character '{other}' in '{src}'"
                )))
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Tok>,
    pos: usize,
    src: &'a str,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, t: Tok) -> Result<()> {
        match self.bump() {
            Some(got) if got == t => Ok(()),
            got => Err(Error::Expression(format!(
                "expected {t:?}, got {got:?} in '{}'",
                self.src
            ))),
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    lhs = Node::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    lhs = Node::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Node> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(Node::Neg(Box::new(self.factor()?)))
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.factor()
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Node> {
        match self.bump() {
            Some(Tok::Num(v)) => Ok(Node::Num(v)),
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Some(Tok::Ident(name)) => match name.as_str() {
                "x" => Ok(Node::X),
                "y" => Ok(Node::Y),
                "sqrt" | "abs" => {
                    self.expect(Tok::LParen)?;
                    let a = self.expr()?;
                    self.expect(Tok::RParen)?;
                    Ok(if name == "sqrt" {
                        Node::Sqrt(Box::new(a))
                    } else {
                        Node::Abs(Box::new(a))
                    })
                }
                "min" | "max" => {
                    self.expect(Tok::LParen)?;
                    let a = self.expr()?;
                    self.expect(Tok::Comma)?;
                    let b = self.expr()?;
                    self.expect(Tok::RParen)?;
                    Ok(if name == "min" {
                        Node::Min(Box::new(a), Box::new(b))
                    } else {
                        Node::Max(Box::new(a), Box::new(b))
                    })
                }
                other => Err(Error::Expression(format!(
                    "unknown identifier '{other}' in '{}' (allowed: x, y, sqrt, abs, min, max)",
                    self.src
                ))),
            },
            got => Err(Error::Expression(format!(
                "expected a value, got {got:?} in '{}'",
                self.src
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_validation() {
        assert!(SizeField::constant(0.1).is_ok());
        assert!(SizeField::constant(0.0).is_err());
        assert!(SizeField::constant(-1.0).is_err());
        assert!(SizeField::constant(f64::NAN).is_err());
    }

    #[test]
    fn radial_ring_profile() {
        let f = SizeField::radial_ring_default();
        assert_eq!(f.evaluate(Vec2::ZERO), 0.1);
        assert_eq!(f.evaluate(Vec2::new(1.9, 0.0)), 0.1);
        assert!((f.evaluate(Vec2::new(2.0, 0.0)) - 0.1).abs() < 1e-15);
        assert!((f.evaluate(Vec2::new(3.0, 0.0)) - 0.3).abs() < 1e-15);
        assert!((f.evaluate(Vec2::new(0.0, -3.0)) - 0.3).abs() < 1e-15);
        // Corner of the square3 box, r = 3*sqrt(2).
        let corner = Vec2::new(3.0, 3.0);
        let want = 0.2 * (corner.norm() - 2.0) + 0.1;
        assert!((f.evaluate(corner) - want).abs() < 1e-15);
    }

    #[test]
    fn pair_target_averages() {
        let c = SizeField::constant(0.1).unwrap();
        assert!((c.pair_target(Vec2::ZERO, Vec2::new(1.0, 1.0)) - 0.1).abs() < 1e-15);
        let f = SizeField::radial_ring_default();
        let t = f.pair_target(Vec2::ZERO, Vec2::new(3.0, 0.0));
        assert!((t - 0.2).abs() < 1e-15);
    }

    #[test]
    fn ring_is_lipschitz() {
        let f = SizeField::radial_ring_default();
        let mut rng_state = 12345_u64;
        let mut next = || {
            // xorshift is plenty for scattering sample pairs
            rng_state ^= rng_state << 13;
            rng_state ^= rng_state >> 7;
            rng_state ^= rng_state << 17;
            (rng_state >> 11) as f64 / (1u64 << 53) as f64 * 8.0 - 4.0
        };
        for _ in 0..10_000 {
            let p = Vec2::new(next(), next());
            let q = Vec2::new(next(), next());
            let lhs = (f.evaluate(p) - f.evaluate(q)).abs();
            assert!(lhs <= 0.2 * p.dist(q) + 1e-12);
        }
    }

    #[test]
    fn expression_evaluation() {
        let f = SizeField::expression("0.1 + 0.05*x").unwrap();
        assert!((f.evaluate(Vec2::new(1.0, 0.0)) - 0.15).abs() < 1e-15);
        let g = SizeField::expression("max(0.05, min(x, y))").unwrap();
        assert_eq!(g.evaluate(Vec2::new(0.5, 0.25)), 0.25);
        assert_eq!(g.evaluate(Vec2::new(-1.0, 0.25)), 0.05);
        let ring = SizeField::expression("0.2*abs(sqrt(x*x + y*y) - 2) + 0.1").unwrap();
        let native = SizeField::radial_ring_default();
        for p in [Vec2::new(2.5, 0.0), Vec2::new(0.0, 3.0), Vec2::new(-2.0, 2.0)] {
            assert!((ring.evaluate(p) - native.evaluate(p)).abs() < 1e-15);
        }
        let sci = SizeField::expression("1e-1 + 0.5e-1*x").unwrap();
        assert!((sci.evaluate(Vec2::new(1.0, 0.0)) - 0.15).abs() < 1e-15);
    }

    #[test]
    fn expression_errors() {
        assert!(SizeField::expression("0.1 +").is_err());
        assert!(SizeField::expression("foo(x)").is_err());
        assert!(SizeField::expression("min(x)").is_err());
        assert!(SizeField::expression("x $ y").is_err());
        assert!(SizeField::expression("(x + y").is_err());
        assert!(SizeField::expression("x y").is_err());
    }

    #[test]
    fn positivity_validation() {
        let bb = Aabb::new(Vec2::new(-3.0, -3.0), Vec2::new(3.0, 3.0));
        SizeField::radial_ring_default()
            .validate_positive(bb, 32)
            .unwrap();
        let bad = SizeField::expression("x").unwrap();
        assert!(bad.validate_positive(bb, 32).is_err());
    }

    proptest! {
        #[test]
        fn pair_target_symmetric(ax in -4.0..4.0f64, ay in -4.0..4.0f64,
                                 bx in -4.0..4.0f64, by in -4.0..4.0f64) {
            let f = SizeField::radial_ring_default();
            let a = Vec2::new(ax, ay);
            let b = Vec2::new(bx, by);
            prop_assert_eq!(f.pair_target(a, b), f.pair_target(b, a));
            prop_assert!(f.pair_target(a, b) > 0.0);
        }

        #[test]
        fn ring_positive_everywhere(x in -100.0..100.0f64, y in -100.0..100.0f64) {
            let f = SizeField::radial_ring_default();
            prop_assert!(f.evaluate(Vec2::new(x, y)) >= 0.1);
        }
    }
}
