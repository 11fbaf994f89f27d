use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Interval, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DomainError {
    #[error("variable `{0}` declared twice")]
    Duplicate(String),
}

/// Ordered product of named intervals: the input domain of a function.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InputBox {
    vars: Vec<(String, Interval)>,
}

impl InputBox {
    pub fn new(vars: Vec<(String, Interval)>) -> Result<Self, DomainError> {
        for (k, (name, _)) in vars.iter().enumerate() {
            if vars[..k].iter().any(|(n, _)| n == name) {
                return Err(DomainError::Duplicate(name.clone()));
            }
        }
        Ok(InputBox { vars })
    }

    pub fn single(name: &str, iv: Interval) -> Self {
        InputBox {
            vars: vec![(name.to_string(), iv)],
        }
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&Interval> {
        self.vars.iter().find(|(n, _)| n == name).map(|(_, iv)| iv)
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|(n, _)| n == name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.vars.iter().map(|(n, _)| n.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Interval)> {
        self.vars.iter().map(|(n, iv)| (n.as_str(), iv))
    }

    pub fn intervals(&self) -> impl Iterator<Item = &Interval> {
        self.vars.iter().map(|(_, iv)| iv)
    }

    /// Copy of the box with variable `k` replaced.
    pub fn with(&self, k: usize, iv: Interval) -> InputBox {
        let mut vars = self.vars.clone();
        vars[k].1 = iv;
        InputBox { vars }
    }

    /// Index of the widest variable; ties go to the earliest declared.
    pub fn widest(&self) -> Option<usize> {
        let mut best: Option<(usize, Rational)> = None;
        for (k, (_, iv)) in self.vars.iter().enumerate() {
            let w = iv.width();
            if best.as_ref().is_none_or(|(_, bw)| w > *bw) {
                best = Some((k, w));
            }
        }
        best.map(|(k, _)| k)
    }

    /// Splits the widest dimension at its midpoint.
    pub fn bisect_widest(&self) -> Option<(InputBox, InputBox)> {
        let k = self.widest()?;
        let iv = &self.vars[k].1;
        if iv.is_point() {
            return None;
        }
        let (a, b) = iv.bisect();
        Some((self.with(k, a), self.with(k, b)))
    }

    pub fn midpoint(&self) -> Vec<Rational> {
        self.vars.iter().map(|(_, iv)| iv.midpoint()).collect()
    }

    pub fn is_subset_of(&self, other: &InputBox) -> bool {
        self.vars.len() == other.vars.len()
            && self
                .vars
                .iter()
                .zip(&other.vars)
                .all(|((a, x), (b, y))| a == b && x.is_subset_of(y))
    }

    pub fn contains_point(&self, point: &[Rational]) -> bool {
        point.len() == self.vars.len()
            && self
                .vars
                .iter()
                .zip(point)
                .all(|((_, iv), x)| iv.contains(x))
    }
}

impl fmt::Display for InputBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, (name, iv)) in self.vars.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{name} -> [{},{}]", decimal(iv.lo()), decimal(iv.hi()))?;
        }
        Ok(())
    }
}

impl fmt::Debug for InputBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "InputBox({self})")
    }
}

/// Shortest decimal for values that are exact doubles, `p/q` otherwise.
pub(crate) fn decimal(r: &Rational) -> String {
    let d = r.to_f64_lossy();
    if Rational::from_f64(d).as_ref() == Some(r) {
        format!("{d:?}")
    } else {
        r.to_string()
    }
}
