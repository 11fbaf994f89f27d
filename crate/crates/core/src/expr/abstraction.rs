//! The real-valued floating-point abstraction: every rounding step becomes
//! `v(1 + e) + d` with `|e| <= eps` and `|d| <= delta`.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::ast::{Expr, ExprKind, NoiseKind, NoiseSym};
use crate::exact::float::{is_representable, BinaryFormat};
use crate::exact::Rational;

/// A binary floating-point precision and its rounding-model constants.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrecisionSpec {
    pub name: String,
    /// Unit roundoff, `2^-significand_bits`.
    pub epsilon: Rational,
    /// Half the smallest subnormal.
    pub delta: Rational,
    pub significand_bits: u32,
    pub emin: i32,
    pub emax: i32,
}

impl PrecisionSpec {
    pub fn from_format(name: &str, format: BinaryFormat) -> Self {
        PrecisionSpec {
            name: name.to_string(),
            epsilon: Rational::pow2(-(format.bits as i64)),
            delta: Rational::pow2(format.emin as i64 - format.bits as i64),
            significand_bits: format.bits,
            emin: format.emin,
            emax: format.emax,
        }
    }

    pub fn float64() -> Self {
        Self::from_format("float64", BinaryFormat::DOUBLE)
    }

    pub fn float32() -> Self {
        Self::from_format("float32", BinaryFormat::SINGLE)
    }

    pub fn float16() -> Self {
        Self::from_format("float16", BinaryFormat::HALF)
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "float64" | "double" | "Float64" => Some(Self::float64()),
            "float32" | "single" | "float" | "Float32" => Some(Self::float32()),
            "float16" | "half" | "Float16" => Some(Self::float16()),
            _ => None,
        }
    }

    pub fn format(&self) -> BinaryFormat {
        BinaryFormat {
            bits: self.significand_bits,
            emin: self.emin,
            emax: self.emax,
        }
    }

    pub fn is_representable(&self, c: &Rational) -> bool {
        is_representable(c, self.format())
    }

    pub fn noise_bounds(&self) -> NoiseBounds {
        NoiseBounds::uniform(self.epsilon.clone(), self.delta.clone())
    }
}

/// Bounds on noise symbols: uniform per kind, with optional per-symbol overrides.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NoiseBounds {
    pub eps: Rational,
    pub delta: Rational,
    pub overrides: BTreeMap<NoiseSym, Rational>,
}

impl NoiseBounds {
    pub fn uniform(eps: Rational, delta: Rational) -> Self {
        NoiseBounds {
            eps,
            delta,
            overrides: BTreeMap::new(),
        }
    }

    pub fn bound(&self, sym: NoiseSym) -> Rational {
        if let Some(b) = self.overrides.get(&sym) {
            return b.clone();
        }
        match sym.kind {
            NoiseKind::Eps => self.eps.clone(),
            NoiseKind::Delta => self.delta.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbstractionOptions {
    /// Wrap every input variable with its own input-rounding noise.
    pub round_inputs: bool,
}

impl Default for AbstractionOptions {
    fn default() -> Self {
        AbstractionOptions { round_inputs: true }
    }
}

/// Where a rounding noise symbol comes from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NoiseOrigin {
    /// Rounding of an input variable (shared by all its reads).
    Input(String),
    /// Rounding of a literal that is not representable.
    Literal(Rational),
    /// Rounding of the result of an operation; `node` is its post-order index in the source tree.
    Operation { node: usize, op: OpKind },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OpKind {
    Add,
    Sub,
    Mul,
    Div,
    Sqrt,
}

impl OpKind {
    /// Whether the operation can underflow and so carries an absolute `d` term.
    pub fn has_delta(self) -> bool {
        !matches!(self, OpKind::Add | OpKind::Sub)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NoiseEntry {
    pub index: u32,
    pub origin: NoiseOrigin,
    pub has_delta: bool,
}

/// An expression with explicit rounding noise: `f~(x, e, d)`.
#[derive(Clone, Debug)]
pub struct AbstractedExpr {
    pub tree: Expr,
    pub registry: Vec<NoiseEntry>,
    pub eps_bound: Rational,
    pub delta_bound: Rational,
}

impl AbstractedExpr {
    pub fn eps_symbols(&self) -> Vec<NoiseSym> {
        self.registry
            .iter()
            .map(|n| NoiseSym::eps(n.index))
            .collect()
    }

    pub fn delta_symbols(&self) -> Vec<NoiseSym> {
        self.registry
            .iter()
            .filter(|n| n.has_delta)
            .map(|n| NoiseSym::delta(n.index))
            .collect()
    }

    /// All noise symbols: every `e_i`, then every `d_i`.
    pub fn all_symbols(&self) -> Vec<NoiseSym> {
        let mut v = self.eps_symbols();
        v.extend(self.delta_symbols());
        v
    }

    pub fn noise_bounds(&self) -> NoiseBounds {
        NoiseBounds::uniform(self.eps_bound.clone(), self.delta_bound.clone())
    }
}

struct Abstractor<'a> {
    prec: &'a PrecisionSpec,
    opts: AbstractionOptions,
    registry: Vec<NoiseEntry>,
    inputs: HashMap<Arc<str>, Expr>,
    node: usize,
}

impl Abstractor<'_> {
    fn wrap(&mut self, v: Expr, origin: NoiseOrigin, has_delta: bool) -> Expr {
        let index = self.registry.len() as u32;
        self.registry.push(NoiseEntry {
            index,
            origin,
            has_delta,
        });
        let scaled = v * (Expr::one() + Expr::noise(NoiseSym::eps(index)));
        if has_delta {
            scaled + Expr::noise(NoiseSym::delta(index))
        } else {
            scaled
        }
    }

    fn go(&mut self, e: &Expr) -> Expr {
        let out = match e.kind() {
            ExprKind::Const(c) => {
                if self.prec.is_representable(c) {
                    e.clone()
                } else {
                    self.wrap(e.clone(), NoiseOrigin::Literal(c.clone()), true)
                }
            }
            ExprKind::Var(v) => {
                if !self.opts.round_inputs {
                    e.clone()
                } else if let Some(w) = self.inputs.get(v) {
                    w.clone()
                } else {
                    let w = self.wrap(e.clone(), NoiseOrigin::Input(v.to_string()), true);
                    self.inputs.insert(v.clone(), w.clone());
                    w
                }
            }
            ExprKind::Noise(_) => e.clone(),
            ExprKind::Neg(a) => -self.go(a),
            ExprKind::Sqrt(a) => {
                let a = self.go(a);
                let node = self.node;
                self.wrap(
                    a.sqrt(),
                    NoiseOrigin::Operation {
                        node,
                        op: OpKind::Sqrt,
                    },
                    true,
                )
            }
            ExprKind::Add(a, b)
            | ExprKind::Sub(a, b)
            | ExprKind::Mul(a, b)
            | ExprKind::Div(a, b) => {
                let op = match e.kind() {
                    ExprKind::Add(..) => OpKind::Add,
                    ExprKind::Sub(..) => OpKind::Sub,
                    ExprKind::Mul(..) => OpKind::Mul,
                    _ => OpKind::Div,
                };
                let a = self.go(a);
                let b = self.go(b);
                let node = self.node;
                self.wrap(
                    e.with_children(a, b),
                    NoiseOrigin::Operation { node, op },
                    op.has_delta(),
                )
            }
        };
        self.node += 1;
        out
    }
}

/// Builds `f~(x, e, d)`: inputs, operations, square roots and non-representable
/// literals are rounded; negation and representable literals are exact.
/// Additions and subtractions carry no `d` term.
pub fn abstract_fp(e: &Expr, prec: &PrecisionSpec, opts: AbstractionOptions) -> AbstractedExpr {
    let mut a = Abstractor {
        prec,
        opts,
        registry: Vec::new(),
        inputs: HashMap::new(),
        node: 0,
    };
    let tree = a.go(e);
    AbstractedExpr {
        tree,
        registry: a.registry,
        eps_bound: prec.epsilon.clone(),
        delta_bound: prec.delta.clone(),
    }
}

/// Which noise kinds [`substitute_zero_noise`] replaces.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NoiseSelection {
    Eps,
    Delta,
    Both,
}

/// Replaces the selected noise symbols by the constant 0 (no simplification).
pub fn substitute_zero_noise(e: &Expr, which: NoiseSelection) -> Expr {
    e.map_bottom_up(&mut |n| match n.kind() {
        ExprKind::Noise(s)
            if matches!(
                (which, s.kind),
                (NoiseSelection::Both, _)
                    | (NoiseSelection::Eps, NoiseKind::Eps)
                    | (NoiseSelection::Delta, NoiseKind::Delta)
            ) =>
        {
            Expr::zero()
        }
        _ => n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::eval::{eval_rational, PointEnv};
    use crate::expr::parser::parse_expr;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn double_constants() {
        let p = PrecisionSpec::float64();
        assert_eq!(p.epsilon, Rational::pow2(-53));
        assert_eq!(p.delta, Rational::pow2(-1075));
        let s = PrecisionSpec::float32();
        assert_eq!(s.epsilon, Rational::pow2(-24));
        assert_eq!(s.delta, Rational::pow2(-150));
    }

    #[test]
    fn sum_of_two_inputs() {
        let e = parse_expr("x + y", &["x", "y"]).unwrap();
        let a = abstract_fp(&e, &PrecisionSpec::float64(), AbstractionOptions::default());
        assert_eq!(a.registry.len(), 3);
        assert_eq!(a.registry[0].origin, NoiseOrigin::Input("x".into()));
        assert_eq!(a.registry[1].origin, NoiseOrigin::Input("y".into()));
        assert!(matches!(
            a.registry[2].origin,
            NoiseOrigin::Operation {
                op: OpKind::Add,
                ..
            }
        ));
        assert!(!a.registry[2].has_delta);
        assert_eq!(
            a.tree.to_string(),
            "(x * (1 + e0) + d0 + (y * (1 + e1) + d1)) * (1 + e2)"
        );
    }

    #[test]
    fn representable_literal_carries_no_noise() {
        let p = PrecisionSpec::float64();
        let a = abstract_fp(
            &parse_expr("0.5", &[]).unwrap(),
            &p,
            AbstractionOptions::default(),
        );
        assert!(a.registry.is_empty());
        assert!(!a.tree.has_noise());
        let a = abstract_fp(
            &parse_expr("0.1", &[]).unwrap(),
            &p,
            AbstractionOptions::default(),
        );
        assert_eq!(a.registry.len(), 1);
        assert!(matches!(a.registry[0].origin, NoiseOrigin::Literal(_)));
    }

    #[test]
    fn noise_counts() {
        // 3 reads of one input, 2 muls, 1 div by a representable literal, 1 neg.
        let e = parse_expr("-u * u * u / 6.0", &["u"]).unwrap();
        let a = abstract_fp(&e, &PrecisionSpec::float64(), AbstractionOptions::default());
        assert_eq!(a.eps_symbols().len(), 4);
        assert_eq!(a.delta_symbols().len(), 4);
        // x + y - z * 0.1 + sqrt(x): 3 inputs, add, sub, mul, literal, sqrt, add.
        let e = parse_expr("x + y - z * 0.1 + sqrt(x)", &["x", "y", "z"]).unwrap();
        let a = abstract_fp(&e, &PrecisionSpec::float64(), AbstractionOptions::default());
        assert_eq!(a.eps_symbols().len(), 9);
        // Deltas: 3 inputs, literal, mul, sqrt.
        assert_eq!(a.delta_symbols().len(), 6);
        let a = abstract_fp(
            &e,
            &PrecisionSpec::float64(),
            AbstractionOptions {
                round_inputs: false,
            },
        );
        assert_eq!(a.eps_symbols().len(), 6);
        assert_eq!(a.delta_symbols().len(), 3);
    }

    #[test]
    fn zero_noise_recovers_the_real_function() {
        let e = parse_expr("-u * u * u / 6.0", &["u"]).unwrap();
        let a = abstract_fp(&e, &PrecisionSpec::float64(), AbstractionOptions::default());
        let env = PointEnv::new([("u".to_string(), q("1"))]);
        assert_eq!(eval_rational(&a.tree, &env).unwrap().value, q("-1/6"));
        let zeroed = substitute_zero_noise(&a.tree, NoiseSelection::Both);
        assert!(!zeroed.has_noise());
        assert_eq!(eval_rational(&zeroed, &env).unwrap().value, q("-1/6"));
    }

    #[test]
    fn zeroing_only_eps() {
        let x = Expr::var("x");
        let t = x.clone() * (Expr::one() + Expr::noise(NoiseSym::eps(1)));
        let z = substitute_zero_noise(&t, NoiseSelection::Eps);
        assert_eq!(z.to_string(), "x * (1 + 0)");
        let t = t + Expr::noise(NoiseSym::delta(1));
        let z = substitute_zero_noise(&t, NoiseSelection::Eps);
        assert_eq!(z.noise_symbols().len(), 1);
    }
}
