//! External SMT-LIB 2 backend: one solver process per query.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::time::Duration;

use wait_timeout::ChildExt;

use super::ia::{Hint, NoiseMode};
use super::objective::Objective;
use super::refine::{Decider, DeciderFailure, Verdict};
use super::{Backend, RefinementConfig};
use crate::exact::{InputBox, Rational};
use crate::expr::{Expr, ExprKind, NoiseSym};

/// Environment variable holding the solver command line, e.g. `z3 -in`.
pub const SOLVER_ENV: &str = "FPBOUND_SMT_SOLVER";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SmtError {
    #[error("no solver configured; set {SOLVER_ENV}")]
    NotConfigured,
}

#[derive(Clone, Debug)]
pub struct SmtDecider {
    command: Vec<String>,
    timeout: Duration,
}

impl SmtDecider {
    pub fn new(command: Vec<String>, timeout: Duration) -> Result<Self, SmtError> {
        if command.is_empty() {
            return Err(SmtError::NotConfigured);
        }
        Ok(SmtDecider { command, timeout })
    }

    pub fn from_config(cfg: &RefinementConfig) -> Result<Self, SmtError> {
        let command = match &cfg.solver_command {
            Some(c) => c.clone(),
            None => std::env::var(SOLVER_ENV)
                .map(|s| s.split_whitespace().map(str::to_string).collect())
                .unwrap_or_default(),
        };
        SmtDecider::new(command, cfg.per_query_timeout)
    }

    fn run(&self, script: &str) -> Result<Verdict, DeciderFailure> {
        let fail = |what: &str, e: std::io::Error| {
            DeciderFailure(format!("{what} `{}`: {e}", self.command[0]))
        };
        let mut child = Command::new(&self.command[0])
            .args(&self.command[1..])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| fail("cannot start", e))?;
        if let Some(mut stdin) = child.stdin.take() {
            // A solver that exits early closes the pipe; its answer still counts.
            let _ = stdin.write_all(script.as_bytes());
        }
        match child
            .wait_timeout(self.timeout)
            .map_err(|e| fail("lost", e))?
        {
            Some(_) => {}
            None => {
                let _ = child.kill();
                let _ = child.wait();
                return Ok(Verdict::Unknown);
            }
        }
        let mut out = String::new();
        if let Some(mut stdout) = child.stdout.take() {
            stdout
                .read_to_string(&mut out)
                .map_err(|e| fail("unreadable output from", e))?;
        }
        Ok(parse_answer(&out))
    }
}

impl Decider for SmtDecider {
    fn backend(&self) -> Backend {
        Backend::ExternalSmtProcess
    }

    fn exceeds(
        &mut self,
        obj: &Objective,
        domain: &InputBox,
        noise: &NoiseMode,
        hints: &[Hint],
        threshold: &Rational,
    ) -> Result<Verdict, DeciderFailure> {
        self.run(&smt_script(obj, domain, noise, hints, threshold))
    }
}

/// First meaningful line of solver output. Anything but a clean `sat` or
/// `unsat` is treated as unknown.
pub fn parse_answer(out: &str) -> Verdict {
    match out.lines().map(str::trim).find(|l| !l.is_empty()) {
        Some("sat") => Verdict::Sat,
        Some("unsat") => Verdict::Unsat,
        _ => Verdict::Unknown,
    }
}

fn literal(r: &Rational) -> String {
    let m = r.abs();
    let body = if m.is_integer() {
        format!("{}.0", m.numer())
    } else {
        format!("(/ {}.0 {}.0)", m.numer(), m.denom())
    };
    if r.is_negative() {
        format!("(- {body})")
    } else {
        body
    }
}

fn var_name(v: &str) -> String {
    format!("|x!{v}|")
}

fn noise_name(s: NoiseSym) -> String {
    format!("|n!{s}|")
}

struct Script {
    decls: String,
    asserts: String,
    aux: usize,
}

impl Script {
    fn fresh(&mut self) -> String {
        let name = format!("|aux!{}|", self.aux);
        self.aux += 1;
        let _ = writeln!(self.decls, "(declare-fun {name} () Real)");
        name
    }

    fn assert(&mut self, t: String) {
        let _ = writeln!(self.asserts, "(assert {t})");
    }

    fn term(&mut self, e: &Expr) -> String {
        match e.kind() {
            ExprKind::Const(c) => literal(c),
            ExprKind::Var(v) => var_name(v),
            ExprKind::Noise(s) => noise_name(*s),
            ExprKind::Neg(a) => format!("(- {})", self.term(a)),
            ExprKind::Add(a, b) => format!("(+ {} {})", self.term(a), self.term(b)),
            ExprKind::Sub(a, b) => format!("(- {} {})", self.term(a), self.term(b)),
            ExprKind::Mul(a, b) => format!("(* {} {})", self.term(a), self.term(b)),
            ExprKind::Div(a, b) => {
                let (x, y) = (self.term(a), self.term(b));
                self.assert(format!("(not (= {y} 0.0))"));
                format!("(/ {x} {y})")
            }
            ExprKind::Sqrt(a) => {
                let x = self.term(a);
                let s = self.fresh();
                self.assert(format!("(>= {x} 0.0)"));
                self.assert(format!("(>= {s} 0.0)"));
                self.assert(format!("(= (* {s} {s}) {x})"));
                s
            }
        }
    }

    /// `|t|` through an auxiliary constant pinned from both sides.
    fn abs(&mut self, t: String) -> String {
        let a = self.fresh();
        self.assert(format!("(>= {a} {t})"));
        self.assert(format!("(>= {a} (- {t}))"));
        self.assert(format!("(or (= {a} {t}) (= {a} (- {t})))"));
        a
    }
}

/// SMT-LIB 2 script asking whether the objective exceeds `threshold` somewhere in the box.
pub fn smt_script(
    obj: &Objective,
    domain: &InputBox,
    noise: &NoiseMode,
    hints: &[Hint],
    threshold: &Rational,
) -> String {
    let mut s = Script {
        decls: String::new(),
        asserts: String::new(),
        aux: 0,
    };
    for (v, iv) in domain.iter() {
        let n = var_name(v);
        let _ = writeln!(s.decls, "(declare-fun {n} () Real)");
        s.assert(format!("(<= {} {n})", literal(iv.lo())));
        s.assert(format!("(<= {n} {})", literal(iv.hi())));
    }
    let mut syms: BTreeSet<NoiseSym> = obj.noise_symbols();
    for h in hints {
        syms.extend(h.expr.noise_symbols());
    }
    for sym in syms {
        let n = noise_name(sym);
        let _ = writeln!(s.decls, "(declare-fun {n} () Real)");
        match noise {
            NoiseMode::Zero => s.assert(format!("(= {n} 0.0)")),
            NoiseMode::Point(p) => {
                let v = p.get(&sym).cloned().unwrap_or_else(Rational::zero);
                s.assert(format!("(= {n} {})", literal(&v)));
            }
            NoiseMode::Box(b) => {
                let r = b.bound(sym);
                s.assert(format!("(<= {} {n})", literal(&-r.clone())));
                s.assert(format!("(<= {n} {})", literal(&r)));
            }
        }
    }
    for h in hints {
        let t = s.term(&h.expr);
        s.assert(format!("(<= {} {t})", literal(h.range.lo())));
        s.assert(format!("(<= {t} {})", literal(h.range.hi())));
    }
    let goal = match obj {
        Objective::Signed(e) => s.term(e),
        Objective::SumAbs(terms) => {
            let parts: Vec<String> = terms
                .iter()
                .map(|(t, w)| {
                    let x = s.term(t);
                    let a = s.abs(x);
                    format!("(* {} {a})", literal(w))
                })
                .collect();
            match parts.len() {
                0 => "0.0".to_string(),
                1 => parts[0].clone(),
                _ => format!("(+ {})", parts.join(" ")),
            }
        }
    };
    s.assert(format!("(> {goal} {})", literal(threshold)));
    format!(
        "(set-logic QF_NRA)\n{}{}(check-sat)\n(exit)\n",
        s.decls, s.asserts
    )
}
