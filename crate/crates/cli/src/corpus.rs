//! Bundled benchmark functions.

use fpbound_core::expr::{parse, FunctionSpec, ParseError};

/// Where an expected value comes from. Only published figures gate the
/// acceptance suite; computed ones document this implementation's output.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Origin {
    Published,
    Computed,
}

/// A reference bound together with the factor it may be off by.
#[derive(Clone, Debug, PartialEq)]
pub struct Expected {
    pub method: &'static str,
    pub bound: f64,
    pub tolerance_factor: f64,
    pub origin: Origin,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkRecord {
    pub name: &'static str,
    pub source: &'static str,
    pub note: &'static str,
    pub expected: Vec<Expected>,
}

impl BenchmarkRecord {
    pub fn spec(&self) -> Result<FunctionSpec, ParseError> {
        parse(self.source)
    }
}

pub fn corpus() -> Vec<BenchmarkRecord> {
    vec![
        BenchmarkRecord {
            name: "bspline0",
            source: include_str!("../corpus/bspline0.fp"),
            note: "cubic uniform B-spline basis function, first segment",
            expected: vec![],
        },
        BenchmarkRecord {
            name: "bspline1",
            source: include_str!("../corpus/bspline1.fp"),
            note: "cubic uniform B-spline basis function, second segment",
            expected: vec![],
        },
        BenchmarkRecord {
            name: "bspline2",
            source: include_str!("../corpus/bspline2.fp"),
            note: "cubic uniform B-spline basis function, third segment",
            expected: vec![],
        },
        BenchmarkRecord {
            name: "bspline3",
            source: include_str!("../corpus/bspline3.fp"),
            note: "last segment, negated: -u^3/6, which vanishes at u = 0",
            expected: vec![
                Expected {
                    method: "subdivided taylor-rel",
                    bound: 6.66e-16,
                    tolerance_factor: 2.0,
                    origin: Origin::Published,
                },
                Expected {
                    method: "subdivided absolute fallback",
                    bound: 9.67e-19,
                    tolerance_factor: 2.0,
                    origin: Origin::Published,
                },
            ],
        },
    ]
}

pub fn find(name: &str) -> Option<BenchmarkRecord> {
    corpus().into_iter().find(|b| b.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_benchmark_parses_over_the_unit_interval() {
        for b in corpus() {
            let spec = b.spec().unwrap();
            assert_eq!(spec.name(), b.name);
            assert_eq!(spec.params(), ["u"]);
            assert_eq!(spec.domain().get("u").unwrap().to_string(), "[0, 1]");
        }
    }
}
