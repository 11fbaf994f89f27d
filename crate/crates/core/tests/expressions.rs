//! Expression trees: printing and parsing, simplification, symbolic
//! derivatives and the rounding abstraction, each checked pointwise.

use std::collections::HashMap;

use fpbound_core::exact::float::round_to_f64;
use fpbound_core::exact::Rational;
use fpbound_core::expr::{
    abstract_fp, derive, derive_var, eval_float, eval_rational, parse_expr, simplify,
    AbstractionOptions, Expr, ExprKind, NoiseOrigin, NoiseSym, PointEnv, PrecisionSpec, Symbol,
};
use proptest::prelude::*;

const VARS: [&str; 2] = ["x", "y"];

fn leaf_over(denominators: Vec<i64>) -> impl Strategy<Value = Expr> {
    prop_oneof![
        Just(Expr::var("x")),
        Just(Expr::var("y")),
        (0i64..12, prop::sample::select(denominators))
            .prop_map(|(n, d)| Expr::constant(Rational::ratio(n, d).unwrap())),
    ]
}

fn leaf() -> impl Strategy<Value = Expr> {
    leaf_over(vec![1, 2, 3, 4, 10])
}

/// Trees over `x` and `y` whose denominators stay at least 1, so every point
/// of the plane is in the domain.
fn safe_expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(5, 40, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a / (Expr::one() + &b * &b)),
            inner.prop_map(|a| -a),
        ]
    })
}

/// Any tree shape, including square roots and raw division. Constants are
/// decimal literals so that every tree is one the parser can produce.
fn any_expr() -> impl Strategy<Value = Expr> {
    leaf_over(vec![1, 2, 4, 5, 8, 10]).prop_recursive(5, 40, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a / b),
            inner.clone().prop_map(|a| -a),
            inner.prop_map(Expr::sqrt),
        ]
    })
}

fn coord() -> impl Strategy<Value = Rational> {
    (-400i64..=400, 1i64..=97).prop_map(|(n, d)| Rational::ratio(n, d).unwrap())
}

fn env(x: &Rational, y: &Rational) -> PointEnv {
    PointEnv::new([("x".to_string(), x.clone()), ("y".to_string(), y.clone())])
}

fn value(e: &Expr, env: &PointEnv) -> Option<Rational> {
    eval_rational(e, env)
        .ok()
        .filter(|v| v.is_exact())
        .map(|v| v.value)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn printed_trees_parse_back_identically(e in any_expr()) {
        let text = e.to_string();
        let back = parse_expr(&text, &VARS).unwrap();
        prop_assert_eq!(&back, &e, "printed as {}", text);
    }

    #[test]
    fn simplification_preserves_values(e in any_expr(), x in coord(), y in coord()) {
        let s = simplify(&e);
        let env = env(&x, &y);
        if let Ok(v) = eval_rational(&e, &env) {
            let w = eval_rational(&s, &env).unwrap();
            if v.is_exact() && w.is_exact() {
                prop_assert_eq!(v.value, w.value);
            } else {
                prop_assert!(v.enclosure().intersect(&w.enclosure()).is_some());
            }
        }
    }

    #[test]
    fn simplification_is_idempotent(e in any_expr()) {
        let s = simplify(&e);
        prop_assert_eq!(simplify(&s), s);
    }

    #[test]
    fn derivatives_match_central_differences(e in safe_expr(), x in coord(), y in coord()) {
        let h = Rational::pow2(-40);
        for (k, name) in VARS.iter().enumerate() {
            let d = value(&simplify(&derive_var(&e, name)), &env(&x, &y)).unwrap();
            let shift = |s: &Rational| if k == 0 { env(&(&x + s), &y) } else { env(&x, &(&y + s)) };
            let fwd = value(&e, &shift(&h)).unwrap();
            let back = value(&e, &shift(&-h.clone())).unwrap();
            let fd = (fwd - back).checked_div(&(&h + &h)).unwrap();
            let tol = Rational::ratio(1, 100_000_000).unwrap() * (Rational::one() + d.abs());
            prop_assert!((&fd - &d).abs() <= tol, "d/d{} of {}: symbolic {} vs difference {}", name, e, d, fd);
        }
    }
}

/// Hardware double evaluation, recording for each node (in post-order) the
/// rounded result and the exact result of the operation on rounded operands.
struct FloatTrace {
    inputs: HashMap<String, Rational>,
    nodes: Vec<(f64, Rational)>,
}

impl FloatTrace {
    fn run(&mut self, e: &Expr) -> Option<f64> {
        let r = |v: f64| Rational::from_f64(v).unwrap();
        let (fl, exact) = match e.kind() {
            ExprKind::Const(c) => (round_to_f64(c), c.clone()),
            ExprKind::Var(v) => {
                let x = self.inputs[v.as_ref()].clone();
                (round_to_f64(&x), x)
            }
            ExprKind::Neg(a) => {
                let a = self.run(a)?;
                (-a, -r(a))
            }
            ExprKind::Add(a, b)
            | ExprKind::Sub(a, b)
            | ExprKind::Mul(a, b)
            | ExprKind::Div(a, b) => {
                let (a, b) = (self.run(a)?, self.run(b)?);
                match e.kind() {
                    ExprKind::Add(..) => (a + b, r(a) + r(b)),
                    ExprKind::Sub(..) => (a - b, r(a) - r(b)),
                    ExprKind::Mul(..) => (a * b, r(a) * r(b)),
                    _ if b == 0.0 => return None,
                    _ => (a / b, r(a).checked_div(&r(b)).unwrap()),
                }
            }
            _ => unreachable!("no square roots or noise in these trees"),
        };
        self.nodes.push((fl, exact));
        fl.is_finite().then_some(fl)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    /// With every relative noise set to the error hardware rounding actually
    /// made, the abstracted tree evaluates exactly to the double result.
    #[test]
    fn abstraction_reproduces_double_evaluation(e in safe_expr(), x in coord(), y in coord()) {
        let prec = PrecisionSpec::float64();
        let mut trace = FloatTrace { inputs: HashMap::from([("x".into(), x.clone()), ("y".into(), y.clone())]), nodes: Vec::new() };
        let Some(hw) = trace.run(&e) else { return Ok(()) };
        let lookup = |name: &str| Some(match name { "x" => round_to_f64(&x), _ => round_to_f64(&y) });
        prop_assert_eq!(eval_float(&e, &lookup, &prec).unwrap(), hw);

        let a = abstract_fp(&e, &prec, AbstractionOptions::default());
        let mut point = env(&x, &y);
        for entry in &a.registry {
            let (fl, exact) = match &entry.origin {
                NoiseOrigin::Input(v) => {
                    let val = trace.inputs[v].clone();
                    (round_to_f64(&val), val)
                }
                NoiseOrigin::Literal(c) => (round_to_f64(c), c.clone()),
                NoiseOrigin::Operation { node, .. } => trace.nodes[*node].clone(),
            };
            let fl = Rational::from_f64(fl).unwrap();
            let rel = if exact.is_zero() { Rational::zero() } else { fl.checked_div(&exact).unwrap() - Rational::one() };
            if rel.abs() <= a.eps_bound {
                point.set_noise(NoiseSym::eps(entry.index), rel);
            } else {
                prop_assert!(entry.has_delta, "relative error {} without an absolute term", rel);
                let d = fl - exact;
                prop_assert!(d.abs() <= a.delta_bound);
                point.set_noise(NoiseSym::delta(entry.index), d);
            }
        }
        prop_assert_eq!(value(&a.tree, &point).unwrap(), Rational::from_f64(hw).unwrap());
    }

    #[test]
    fn noise_derivatives_match_central_differences(e in safe_expr(), x in coord(), y in coord()) {
        let a = abstract_fp(&e, &PrecisionSpec::float64(), AbstractionOptions::default());
        let h = Rational::pow2(-80);
        let base = env(&x, &y);
        for sym in a.eps_symbols() {
            let d = value(&derive(&a.tree, &Symbol::Noise(sym)), &base).unwrap();
            let mut up = base.clone();
            up.set_noise(sym, h.clone());
            let mut down = base.clone();
            down.set_noise(sym, -h.clone());
            let fd = (value(&a.tree, &up).unwrap() - value(&a.tree, &down).unwrap()).checked_div(&(&h + &h)).unwrap();
            let tol = Rational::ratio(1, 100_000_000).unwrap() * (Rational::one() + d.abs());
            prop_assert!((&fd - &d).abs() <= tol, "d/d{}: symbolic {} vs difference {}", sym, d, fd);
        }
    }
}
