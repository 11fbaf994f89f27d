use super::ast::{Expr, ExprKind, Symbol};
use super::simplify::{mk_add, mk_div, mk_mul, mk_neg, mk_sub, simplify};

/// Symbolic partial derivative with respect to a variable or noise symbol,
/// simplified. A symbol that does not occur yields the zero tree.
pub fn derive(e: &Expr, wrt: &Symbol) -> Expr {
    simplify(&raw(e, wrt))
}

fn raw(e: &Expr, wrt: &Symbol) -> Expr {
    match e.kind() {
        ExprKind::Const(_) => Expr::zero(),
        ExprKind::Var(v) => match wrt {
            Symbol::Var(w) if w == v => Expr::one(),
            _ => Expr::zero(),
        },
        ExprKind::Noise(s) => match wrt {
            Symbol::Noise(t) if t == s => Expr::one(),
            _ => Expr::zero(),
        },
        ExprKind::Neg(a) => mk_neg(&raw(a, wrt)),
        ExprKind::Add(a, b) => mk_add(&raw(a, wrt), &raw(b, wrt)),
        ExprKind::Sub(a, b) => mk_sub(&raw(a, wrt), &raw(b, wrt)),
        ExprKind::Mul(a, b) => {
            let da = raw(a, wrt);
            let db = raw(b, wrt);
            mk_add(&mk_mul(&da, b), &mk_mul(a, &db))
        }
        ExprKind::Div(a, b) => {
            let da = raw(a, wrt);
            let db = raw(b, wrt);
            if db.is_zero() {
                mk_div(&da, b)
            } else {
                let num = mk_sub(&mk_mul(&da, b), &mk_mul(a, &db));
                mk_div(&num, &mk_mul(b, b))
            }
        }
        ExprKind::Sqrt(a) => {
            let da = raw(a, wrt);
            mk_div(&da, &mk_mul(&Expr::int(2), e))
        }
    }
}

/// Derivative with respect to a named real variable.
pub fn derive_var(e: &Expr, name: &str) -> Expr {
    derive(e, &Symbol::Var(name.into()))
}
