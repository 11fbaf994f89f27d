//! Pretty printer. Trees whose constants are decimal literals print as text
//! the parser reads back to the same tree; other constants print as quotients.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed};

use super::ast::{Expr, ExprKind};
use crate::exact::Rational;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Pos {
    Top,
    LeftOfSum,
    RightOfSum,
    LeftOfProduct,
    RightOfProduct,
    NegOperand,
}

/// Shape of a node as far as parenthesization is concerned.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Shape {
    Sum,
    Product,
    Negation,
    Atom,
}

fn needs_parens(shape: Shape, pos: Pos) -> bool {
    use Pos::*;
    match shape {
        Shape::Sum => matches!(
            pos,
            RightOfSum | LeftOfProduct | RightOfProduct | NegOperand
        ),
        Shape::Product => pos == RightOfProduct,
        Shape::Negation => matches!(
            pos,
            RightOfSum | LeftOfProduct | RightOfProduct | NegOperand
        ),
        Shape::Atom => false,
    }
}

/// Terminating decimal expansion, if the denominator is of the form 2^a 5^b.
pub(crate) fn terminating_decimal(r: &Rational) -> Option<String> {
    let mut den = r.denom().clone();
    let (mut twos, mut fives) = (0u32, 0u32);
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    while den.is_multiple_of(&two) {
        den /= &two;
        twos += 1;
    }
    while den.is_multiple_of(&five) {
        den /= &five;
        fives += 1;
    }
    if !den.is_one() {
        return None;
    }
    let scale = twos.max(fives);
    let scaled = r.numer().abs() * num_traits::pow(BigInt::from(10), scale as usize) / r.denom();
    let digits = scaled.to_string();
    let text = if scale == 0 {
        digits
    } else {
        let padded = format!("{:0>width$}", digits, width = scale as usize + 1);
        let (int, frac) = padded.split_at(padded.len() - scale as usize);
        format!("{int}.{frac}")
    };
    Some(text)
}

fn const_shape(c: &Rational) -> Shape {
    if c.is_negative() {
        Shape::Negation
    } else if terminating_decimal(c).is_some() {
        Shape::Atom
    } else {
        Shape::Product
    }
}

fn shape(e: &Expr) -> Shape {
    match e.kind() {
        ExprKind::Add(..) | ExprKind::Sub(..) => Shape::Sum,
        ExprKind::Mul(..) | ExprKind::Div(..) => Shape::Product,
        ExprKind::Neg(_) => Shape::Negation,
        ExprKind::Const(c) => const_shape(c),
        _ => Shape::Atom,
    }
}

fn write_const(f: &mut fmt::Formatter<'_>, c: &Rational) -> fmt::Result {
    if c.is_negative() {
        f.write_str("-")?;
        let m = c.abs();
        return write_wrapped(f, const_shape(&m), Pos::NegOperand, |f| write_const(f, &m));
    }
    match terminating_decimal(c) {
        Some(s) => f.write_str(&s),
        None => write!(f, "{} / {}", c.numer(), c.denom()),
    }
}

fn write_wrapped(
    f: &mut fmt::Formatter<'_>,
    shape: Shape,
    pos: Pos,
    body: impl FnOnce(&mut fmt::Formatter<'_>) -> fmt::Result,
) -> fmt::Result {
    if needs_parens(shape, pos) {
        f.write_str("(")?;
        body(f)?;
        f.write_str(")")
    } else {
        body(f)
    }
}

fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr, pos: Pos) -> fmt::Result {
    write_wrapped(f, shape(e), pos, |f| match e.kind() {
        ExprKind::Const(c) => write_const(f, c),
        ExprKind::Var(v) => f.write_str(v),
        ExprKind::Noise(s) => write!(f, "{s}"),
        ExprKind::Neg(a) => {
            f.write_str("-")?;
            write_expr(f, a, Pos::NegOperand)
        }
        ExprKind::Sqrt(a) => {
            f.write_str("sqrt(")?;
            write_expr(f, a, Pos::Top)?;
            f.write_str(")")
        }
        ExprKind::Add(a, b) | ExprKind::Sub(a, b) => {
            let op = if matches!(e.kind(), ExprKind::Add(..)) {
                "+"
            } else {
                "-"
            };
            write_expr(f, a, Pos::LeftOfSum)?;
            write!(f, " {op} ")?;
            write_expr(f, b, Pos::RightOfSum)
        }
        ExprKind::Mul(a, b) | ExprKind::Div(a, b) => {
            let op = if matches!(e.kind(), ExprKind::Mul(..)) {
                "*"
            } else {
                "/"
            };
            write_expr(f, a, Pos::LeftOfProduct)?;
            write!(f, " {op} ")?;
            write_expr(f, b, Pos::RightOfProduct)
        }
    })
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self, Pos::Top)
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

/// Literal text for a bound in a `require` clause.
pub(crate) fn literal(r: &Rational) -> String {
    let sign = if r.is_negative() { "-" } else { "" };
    let m = r.abs();
    match terminating_decimal(&m) {
        Some(s) => format!("{sign}{s}"),
        None => format!("{sign}{}/{}", m.numer(), m.denom()),
    }
}
