use std::fmt;

use super::ast::Expr;
use super::print::literal;
use crate::exact::InputBox;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SpecError {
    #[error("variable `{0}` has no domain")]
    MissingDomain(String),
    #[error("parameter `{0}` has no domain")]
    UnboundParameter(String),
    #[error("function body contains rounding noise symbols")]
    NoiseInBody,
}

/// A real-valued function with a box input domain: the unit of analysis.
#[derive(Clone, PartialEq, Eq)]
pub struct FunctionSpec {
    name: String,
    params: Vec<String>,
    domain: InputBox,
    body: Expr,
}

impl FunctionSpec {
    pub fn new(name: impl Into<String>, domain: InputBox, body: Expr) -> Result<Self, SpecError> {
        if body.has_noise() {
            return Err(SpecError::NoiseInBody);
        }
        for v in body.variables() {
            if domain.get(&v).is_none() {
                return Err(SpecError::MissingDomain(v.to_string()));
            }
        }
        let params = domain.names().map(str::to_string).collect();
        Ok(FunctionSpec {
            name: name.into(),
            params,
            domain,
            body,
        })
    }

    pub(crate) fn new_unchecked(
        name: String,
        params: Vec<String>,
        domain: InputBox,
        body: Expr,
    ) -> Self {
        FunctionSpec {
            name,
            params,
            domain,
            body,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &[String] {
        &self.params
    }

    pub fn domain(&self) -> &InputBox {
        &self.domain
    }

    pub fn body(&self) -> &Expr {
        &self.body
    }

    /// Same function restricted to another domain over the same parameters.
    pub fn with_domain(&self, domain: InputBox) -> Result<Self, SpecError> {
        for p in &self.params {
            if domain.get(p).is_none() {
                return Err(SpecError::UnboundParameter(p.clone()));
            }
        }
        Ok(FunctionSpec {
            domain,
            ..self.clone()
        })
    }
}

impl fmt::Display for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let params: Vec<String> = self.params.iter().map(|p| format!("{p}: Real")).collect();
        writeln!(f, "def {}({}): Real = {{", self.name, params.join(", "))?;
        let conds: Vec<String> = self
            .domain
            .iter()
            .map(|(v, iv)| format!("{} <= {v} && {v} <= {}", literal(iv.lo()), literal(iv.hi())))
            .collect();
        if !conds.is_empty() {
            writeln!(f, "  require({})", conds.join(" && "))?;
        }
        writeln!(f, "  {}", self.body)?;
        write!(f, "}}")
    }
}

impl fmt::Debug for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
