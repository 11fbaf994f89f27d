use std::collections::BTreeSet;
use std::fmt;
use std::ops;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::exact::Rational;

/// Which half of the `(1 + e) + d` rounding model a noise symbol stands for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NoiseKind {
    /// Relative error `e`, bounded by the unit roundoff.
    Eps,
    /// Absolute underflow error `d`, bounded by half the smallest subnormal.
    Delta,
}

/// A rounding noise symbol `e_i` or `d_i`. Both halves of one rounding share `index`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NoiseSym {
    pub index: u32,
    pub kind: NoiseKind,
}

impl NoiseSym {
    pub fn eps(index: u32) -> Self {
        NoiseSym {
            index,
            kind: NoiseKind::Eps,
        }
    }

    pub fn delta(index: u32) -> Self {
        NoiseSym {
            index,
            kind: NoiseKind::Delta,
        }
    }
}

impl fmt::Display for NoiseSym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            NoiseKind::Eps => write!(f, "e{}", self.index),
            NoiseKind::Delta => write!(f, "d{}", self.index),
        }
    }
}

/// What a derivative is taken with respect to.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Symbol {
    Var(Arc<str>),
    Noise(NoiseSym),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ExprKind {
    Const(Rational),
    Var(Arc<str>),
    Noise(NoiseSym),
    Neg(Expr),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Sqrt(Expr),
}

/// Immutable, cheaply clonable real-valued expression tree. Subtrees are shared.
#[derive(Clone, Eq)]
pub struct Expr(Arc<ExprKind>);

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl std::hash::Hash for Expr {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.0.hash(state)
    }
}

impl Expr {
    pub fn new(kind: ExprKind) -> Self {
        Expr(Arc::new(kind))
    }

    pub fn kind(&self) -> &ExprKind {
        &self.0
    }

    pub fn constant(c: Rational) -> Self {
        Expr::new(ExprKind::Const(c))
    }

    pub fn int(n: i64) -> Self {
        Expr::constant(Rational::from_int(n))
    }

    pub fn zero() -> Self {
        Expr::int(0)
    }

    pub fn one() -> Self {
        Expr::int(1)
    }

    pub fn var(name: &str) -> Self {
        Expr::new(ExprKind::Var(Arc::from(name)))
    }

    pub fn noise(sym: NoiseSym) -> Self {
        Expr::new(ExprKind::Noise(sym))
    }

    pub fn sqrt(self) -> Self {
        Expr::new(ExprKind::Sqrt(self))
    }

    pub fn as_const(&self) -> Option<&Rational> {
        match self.kind() {
            ExprKind::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const().is_some_and(Rational::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.as_const().is_some_and(Rational::is_one)
    }

    pub fn ptr_eq(&self, other: &Expr) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    pub fn children(&self) -> Vec<&Expr> {
        match self.kind() {
            ExprKind::Const(_) | ExprKind::Var(_) | ExprKind::Noise(_) => vec![],
            ExprKind::Neg(a) | ExprKind::Sqrt(a) => vec![a],
            ExprKind::Add(a, b)
            | ExprKind::Sub(a, b)
            | ExprKind::Mul(a, b)
            | ExprKind::Div(a, b) => {
                vec![a, b]
            }
        }
    }

    /// Number of nodes, counting shared subtrees once per occurrence.
    pub fn size(&self) -> usize {
        1 + self.children().into_iter().map(Expr::size).sum::<usize>()
    }

    pub fn variables(&self) -> BTreeSet<Arc<str>> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| {
            if let ExprKind::Var(v) = e.kind() {
                out.insert(v.clone());
            }
        });
        out
    }

    pub fn noise_symbols(&self) -> BTreeSet<NoiseSym> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| {
            if let ExprKind::Noise(s) = e.kind() {
                out.insert(*s);
            }
        });
        out
    }

    pub fn has_noise(&self) -> bool {
        self.any(&|e| matches!(e.kind(), ExprKind::Noise(_)))
    }

    pub fn mentions(&self, sym: &Symbol) -> bool {
        self.any(&|e| match (e.kind(), sym) {
            (ExprKind::Var(v), Symbol::Var(w)) => v == w,
            (ExprKind::Noise(s), Symbol::Noise(t)) => s == t,
            _ => false,
        })
    }

    pub fn any(&self, pred: &dyn Fn(&Expr) -> bool) -> bool {
        pred(self) || self.children().into_iter().any(|c| c.any(pred))
    }

    /// Pre-order traversal.
    pub fn visit(&self, f: &mut dyn FnMut(&Expr)) {
        f(self);
        for c in self.children() {
            c.visit(f);
        }
    }

    /// Rebuilds the tree bottom-up, letting `f` replace each node after its
    /// children have been rebuilt.
    pub fn map_bottom_up(&self, f: &mut dyn FnMut(Expr) -> Expr) -> Expr {
        let rebuilt = match self.kind() {
            ExprKind::Const(_) | ExprKind::Var(_) | ExprKind::Noise(_) => self.clone(),
            ExprKind::Neg(a) => {
                let a2 = a.map_bottom_up(f);
                if a2.ptr_eq(a) {
                    self.clone()
                } else {
                    Expr::new(ExprKind::Neg(a2))
                }
            }
            ExprKind::Sqrt(a) => {
                let a2 = a.map_bottom_up(f);
                if a2.ptr_eq(a) {
                    self.clone()
                } else {
                    Expr::new(ExprKind::Sqrt(a2))
                }
            }
            ExprKind::Add(a, b)
            | ExprKind::Sub(a, b)
            | ExprKind::Mul(a, b)
            | ExprKind::Div(a, b) => {
                let a2 = a.map_bottom_up(f);
                let b2 = b.map_bottom_up(f);
                if a2.ptr_eq(a) && b2.ptr_eq(b) {
                    self.clone()
                } else {
                    self.with_children(a2, b2)
                }
            }
        };
        f(rebuilt)
    }

    /// Same binary operator with new operands. Panics on non-binary nodes.
    pub(crate) fn with_children(&self, a: Expr, b: Expr) -> Expr {
        Expr::new(match self.kind() {
            ExprKind::Add(..) => ExprKind::Add(a, b),
            ExprKind::Sub(..) => ExprKind::Sub(a, b),
            ExprKind::Mul(..) => ExprKind::Mul(a, b),
            ExprKind::Div(..) => ExprKind::Div(a, b),
            other => panic!("not a binary node: {other:?}"),
        })
    }
}

impl From<Rational> for Expr {
    fn from(c: Rational) -> Self {
        Expr::constant(c)
    }
}

macro_rules! expr_binop {
    ($trait:ident, $method:ident, $variant:ident) => {
        impl ops::$trait for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::new(ExprKind::$variant(self, rhs))
            }
        }
        impl ops::$trait<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::new(ExprKind::$variant(self.clone(), rhs.clone()))
            }
        }
    };
}

expr_binop!(Add, add, Add);
expr_binop!(Sub, sub, Sub);
expr_binop!(Mul, mul, Mul);
expr_binop!(Div, div, Div);

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::new(ExprKind::Neg(self))
    }
}

impl ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::new(ExprKind::Neg(self.clone()))
    }
}
