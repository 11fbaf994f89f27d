//! Algebraic clean-up of derivative trees. Every rule preserves the value at
//! each point where the original tree is defined.

use super::ast::{Expr, ExprKind};
use crate::exact::Rational;

const MAX_PASSES: usize = 32;

/// Rewrites to a fixpoint.
pub fn simplify(e: &Expr) -> Expr {
    let mut cur = e.clone();
    for _ in 0..MAX_PASSES {
        let next = cur.map_bottom_up(&mut rewrite);
        if next == cur {
            return next;
        }
        cur = next;
    }
    cur
}

fn minus_one() -> Rational {
    Rational::from_int(-1)
}

fn is_minus_one(e: &Expr) -> bool {
    e.as_const().is_some_and(|c| *c == minus_one())
}

fn as_neg(e: &Expr) -> Option<&Expr> {
    match e.kind() {
        ExprKind::Neg(a) => Some(a),
        _ => None,
    }
}

/// One local rewrite at the root, assuming the children are already simplified.
fn rewrite(e: Expr) -> Expr {
    match e.kind() {
        ExprKind::Add(a, b) => add(a, b).unwrap_or(e),
        ExprKind::Sub(a, b) => sub(a, b).unwrap_or(e),
        ExprKind::Mul(a, b) => mul(a, b).unwrap_or(e),
        ExprKind::Div(a, b) => div(a, b).unwrap_or(e),
        ExprKind::Neg(a) => neg(a).unwrap_or(e),
        ExprKind::Sqrt(a) => a
            .as_const()
            .and_then(Rational::exact_sqrt)
            .map(Expr::constant)
            .unwrap_or(e),
        _ => e,
    }
}

fn add(a: &Expr, b: &Expr) -> Option<Expr> {
    if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
        return Some(Expr::constant(x + y));
    }
    if a.is_zero() {
        return Some(b.clone());
    }
    if b.is_zero() {
        return Some(a.clone());
    }
    None
}

fn sub(a: &Expr, b: &Expr) -> Option<Expr> {
    if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
        return Some(Expr::constant(x - y));
    }
    if b.is_zero() {
        return Some(a.clone());
    }
    if a.is_zero() {
        return Some(mk_neg(b));
    }
    if a == b {
        return Some(Expr::zero());
    }
    None
}

fn mul(a: &Expr, b: &Expr) -> Option<Expr> {
    if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
        return Some(Expr::constant(x * y));
    }
    if a.is_zero() || b.is_zero() {
        return Some(Expr::zero());
    }
    if a.is_one() {
        return Some(b.clone());
    }
    if b.is_one() {
        return Some(a.clone());
    }
    if is_minus_one(a) {
        return Some(mk_neg(b));
    }
    if is_minus_one(b) {
        return Some(mk_neg(a));
    }
    match (as_neg(a), as_neg(b)) {
        (Some(x), Some(y)) => Some(mk_mul(x, y)),
        (Some(x), None) => Some(mk_neg(&mk_mul(x, b))),
        (None, Some(y)) => Some(mk_neg(&mk_mul(a, y))),
        (None, None) => None,
    }
}

fn div(a: &Expr, b: &Expr) -> Option<Expr> {
    if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
        if let Ok(q) = x.checked_div(y) {
            return Some(Expr::constant(q));
        }
        return None;
    }
    if a.is_zero() {
        return Some(Expr::zero());
    }
    if b.is_one() {
        return Some(a.clone());
    }
    if is_minus_one(b) {
        return Some(mk_neg(a));
    }
    if a == b {
        return Some(Expr::one());
    }
    match (as_neg(a), as_neg(b)) {
        (Some(x), Some(y)) => Some(mk_div(x, y)),
        (Some(x), None) => Some(mk_neg(&mk_div(x, b))),
        (None, Some(y)) => Some(mk_neg(&mk_div(a, y))),
        (None, None) => None,
    }
}

fn neg(a: &Expr) -> Option<Expr> {
    if let Some(c) = a.as_const() {
        return Some(Expr::constant(-c));
    }
    as_neg(a).cloned()
}

/// Simplifying constructors, used by the differentiator to keep trees small.
pub fn mk_add(a: &Expr, b: &Expr) -> Expr {
    add(a, b).unwrap_or_else(|| a + b)
}

pub fn mk_sub(a: &Expr, b: &Expr) -> Expr {
    sub(a, b).unwrap_or_else(|| a - b)
}

pub fn mk_mul(a: &Expr, b: &Expr) -> Expr {
    mul(a, b).unwrap_or_else(|| a * b)
}

pub fn mk_div(a: &Expr, b: &Expr) -> Expr {
    div(a, b).unwrap_or_else(|| a / b)
}

pub fn mk_neg(a: &Expr) -> Expr {
    neg(a).unwrap_or_else(|| -a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parser::parse_expr;

    fn s(text: &str) -> String {
        simplify(&parse_expr(text, &["x", "y", "z"]).unwrap()).to_string()
    }

    #[test]
    fn identity_rules() {
        assert_eq!(s("(x * 1) + 0"), "x");
        assert_eq!(s("0 * (y / z)"), "0");
        assert_eq!(s("0 + x"), "x");
        assert_eq!(s("x - 0"), "x");
        assert_eq!(s("1 * x"), "x");
        assert_eq!(s("x * 0"), "0");
        assert_eq!(s("0 / x"), "0");
        assert_eq!(s("x / 1"), "x");
        assert_eq!(s("-(-x)"), "x");
    }

    #[test]
    fn constant_folding() {
        assert_eq!(s("2 * 3 + 1"), "7");
        assert_eq!(s("1 / 3 * 3"), "1");
        assert_eq!(s("x * (2 - 2)"), "0");
        assert_eq!(s("sqrt(9 / 4) * x"), "1.5 * x");
        assert_eq!(s("1 / 0"), "1 / 0");
    }

    #[test]
    fn negations_move_outward_and_cancel() {
        assert_eq!(s("(-x) * y"), "-x * y");
        assert_eq!(s("(-x) / (-x)"), "1");
        assert_eq!(s("(-(x * y)) / (x * y)"), "-1");
        assert_eq!(s("x * y - x * y"), "0");
    }

    #[test]
    fn idempotent() {
        for t in [
            "(x * 1 + 0) * (y - 0)",
            "-(-(x / 1)) * (0 + z)",
            "x / x + (y - y) * z",
        ] {
            let e = parse_expr(t, &["x", "y", "z"]).unwrap();
            let once = simplify(&e);
            assert_eq!(simplify(&once), once);
        }
    }
}
