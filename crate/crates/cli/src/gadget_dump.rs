//! Plain-text dump of a gadget graph.
//!
//! ```text
//! mmdc-gadget 1
//! mode integer|float
//! n <N>
//! gamma <value>
//! gamma_prime <value>
//! gamma_double_prime <value>
//! forbidden <value>
//! penalty balanced|strict|minimal
//! transposed true|false
//! rows
//! <index> <role>        one line per row vertex
//! cols
//! <index> <role>        one line per column vertex
//! weights
//! <w_0> <w_1> ...       N lines of N values
//! end
//! ```
//!
//! Roles are written as `A i k`, `A' i k`, `X j k`, `W j k` (rows) and
//! `B j i`, `Y k` (columns), zero-based.

use std::fmt::Write as _;
use std::str::FromStr;

use mmdc_core::reduction::{check_gadget_layout, GadgetGraph, VertexRole};
use mmdc_core::{normalize, CostMatrix, MmdcInstance, PenaltyRule, Weight};
use thiserror::Error;

pub const DUMP_HEADER: &str = "mmdc-gadget 1";

#[derive(Debug, Error, PartialEq)]
pub enum DumpError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("dump check failed: {0}")]
    Check(String),
}

pub fn mode_name<W: Weight>() -> &'static str {
    if W::EXACT {
        "integer"
    } else {
        "float"
    }
}

pub fn write_dump<W: Weight>(g: &GadgetGraph<W>) -> String {
    let mut out = String::new();
    let n = g.n();
    writeln!(out, "{DUMP_HEADER}").unwrap();
    writeln!(out, "mode {}", mode_name::<W>()).unwrap();
    writeln!(out, "n {n}").unwrap();
    writeln!(out, "gamma {}", g.gamma).unwrap();
    writeln!(out, "gamma_prime {}", g.gamma_prime).unwrap();
    writeln!(out, "gamma_double_prime {}", g.gamma_double_prime).unwrap();
    writeln!(out, "forbidden {}", g.forbidden).unwrap();
    writeln!(out, "penalty {}", g.penalty.name()).unwrap();
    writeln!(out, "transposed {}", g.normalized.transposed).unwrap();
    writeln!(out, "rows").unwrap();
    for (k, r) in g.role_s.iter().enumerate() {
        writeln!(out, "{k} {r}").unwrap();
    }
    writeln!(out, "cols").unwrap();
    for (k, r) in g.role_t.iter().enumerate() {
        writeln!(out, "{k} {r}").unwrap();
    }
    writeln!(out, "weights").unwrap();
    for r in 0..n {
        let row: Vec<String> = g.cost.row(r).iter().map(|w| w.to_string()).collect();
        writeln!(out, "{}", row.join(" ")).unwrap();
    }
    writeln!(out, "end").unwrap();
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct GadgetDump<W> {
    pub mode: String,
    pub n: usize,
    pub gamma: W,
    pub gamma_prime: W,
    pub gamma_double_prime: W,
    pub forbidden: W,
    pub penalty: PenaltyRule,
    pub transposed: bool,
    pub role_s: Vec<VertexRole>,
    pub role_t: Vec<VertexRole>,
    pub weights: Vec<W>,
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next_line(&mut self) -> Result<&'a str, DumpError> {
        match self.inner.next() {
            Some((k, l)) => {
                self.last = k + 1;
                Ok(l.trim_end())
            }
            None => Err(self.err("unexpected end of dump")),
        }
    }

    fn err(&self, msg: impl Into<String>) -> DumpError {
        DumpError::Syntax {
            line: self.last,
            msg: msg.into(),
        }
    }

    fn keyed<T: FromStr>(&mut self, key: &str) -> Result<T, DumpError> {
        let line = self.next_line()?;
        let value = line
            .strip_prefix(key)
            .and_then(|rest| rest.strip_prefix(' '))
            .ok_or_else(|| self.err(format!("expected `{key} <value>`")))?;
        value
            .parse()
            .map_err(|_| self.err(format!("bad value for {key}: {value:?}")))
    }

    fn expect(&mut self, literal: &str) -> Result<(), DumpError> {
        if self.next_line()? == literal {
            Ok(())
        } else {
            Err(self.err(format!("expected `{literal}`")))
        }
    }
}

fn parse_role(fields: &[&str]) -> Option<VertexRole> {
    let num = |k: usize| fields.get(k).and_then(|f| f.parse::<usize>().ok());
    let role = match (fields.first()?, fields.len()) {
        (&"A", 3) => VertexRole::ACopy {
            i: num(1)?,
            k: num(2)?,
        },
        (&"A'", 3) => VertexRole::APrimeCopy {
            i: num(1)?,
            k: num(2)?,
        },
        (&"X", 3) => VertexRole::XDummy {
            j: num(1)?,
            k: num(2)?,
        },
        (&"W", 3) => VertexRole::WDummy {
            j: num(1)?,
            k: num(2)?,
        },
        (&"B", 3) => VertexRole::BCopy {
            j: num(1)?,
            i: num(2)?,
        },
        (&"Y", 2) => VertexRole::YDummy { k: num(1)? },
        _ => return None,
    };
    Some(role)
}

fn parse_roles(lines: &mut Lines<'_>, n: usize) -> Result<Vec<VertexRole>, DumpError> {
    (0..n)
        .map(|k| {
            let line = lines.next_line()?;
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.first().and_then(|f| f.parse::<usize>().ok()) != Some(k) {
                return Err(lines.err(format!("expected role of vertex {k}")));
            }
            parse_role(&fields[1..]).ok_or_else(|| lines.err(format!("bad role {line:?}")))
        })
        .collect()
}

/// Reads the header-only mode line, to pick the weight type before parsing.
pub fn dump_mode(text: &str) -> Option<&str> {
    text.lines().nth(1)?.strip_prefix("mode ")
}

pub fn parse_dump<W: Weight + FromStr>(text: &str) -> Result<GadgetDump<W>, DumpError> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        last: 0,
    };
    lines.expect(DUMP_HEADER)?;
    let mode: String = lines.keyed("mode")?;
    if mode != mode_name::<W>() {
        return Err(lines.err(format!("dump is in {mode} mode")));
    }
    let n: usize = lines.keyed("n")?;
    let gamma = lines.keyed("gamma")?;
    let gamma_prime = lines.keyed("gamma_prime")?;
    let gamma_double_prime = lines.keyed("gamma_double_prime")?;
    let forbidden = lines.keyed("forbidden")?;
    let penalty = lines.keyed("penalty")?;
    let transposed = lines.keyed("transposed")?;
    lines.expect("rows")?;
    let role_s = parse_roles(&mut lines, n)?;
    lines.expect("cols")?;
    let role_t = parse_roles(&mut lines, n)?;
    lines.expect("weights")?;
    let mut weights = Vec::with_capacity(n * n);
    for _ in 0..n {
        let line = lines.next_line()?;
        let row: Vec<W> = line
            .split_whitespace()
            .map(|v| {
                v.parse()
                    .map_err(|_| lines.err(format!("bad weight {v:?}")))
            })
            .collect::<Result<_, _>>()?;
        if row.len() != n {
            return Err(lines.err(format!("expected {n} weights, found {}", row.len())));
        }
        weights.extend(row);
    }
    lines.expect("end")?;
    Ok(GadgetDump {
        mode,
        n,
        gamma,
        gamma_prime,
        gamma_double_prime,
        forbidden,
        penalty,
        transposed,
        role_s,
        role_t,
        weights,
    })
}

/// Recomputes every gadget invariant from a parsed dump and the instance it
/// claims to encode.
pub fn check_dump<W: Weight>(
    dump: &GadgetDump<W>,
    instance: &MmdcInstance<W>,
) -> Result<(), DumpError> {
    let norm = normalize(instance).map_err(|e| DumpError::Check(e.to_string()))?;
    if norm.transposed != dump.transposed {
        return Err(DumpError::Check(
            "transposition flag disagrees with the instance".into(),
        ));
    }
    let cost = CostMatrix::new(dump.n, dump.weights.clone())
        .map_err(|e| DumpError::Check(e.to_string()))?;
    check_gadget_layout(
        &norm.instance,
        &dump.role_s,
        &dump.role_t,
        &cost,
        dump.gamma,
        dump.gamma_prime,
        dump.gamma_double_prime,
        dump.forbidden,
    )
    .map_err(|e| DumpError::Check(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use mmdc_core::build_gadget;

    fn gadget_for(x: &MmdcInstance<i64>) -> GadgetGraph<i64> {
        build_gadget(&normalize(x).unwrap()).unwrap()
    }

    #[test]
    fn trivial_dump() {
        let x = MmdcInstance::new(vec![1], vec![1], vec![1], vec![1], vec![vec![5i64]]).unwrap();
        let text = write_dump(&gadget_for(&x));
        assert_eq!(
            text,
            "mmdc-gadget 1\nmode integer\nn 1\ngamma 5\ngamma_prime 6\ngamma_double_prime 12\n\
             forbidden 13\npenalty balanced\ntransposed false\nrows\n0 A 0 0\ncols\n0 B 0 0\n\
             weights\n5\nend\n"
        );
    }

    #[test]
    fn dump_parses_back_and_checks() {
        let x = MmdcInstance::new(
            vec![1, 1],
            vec![2, 2],
            vec![1, 1],
            vec![2, 2],
            vec![vec![3i64, 1], vec![4, 9]],
        )
        .unwrap();
        let g = gadget_for(&x);
        let text = write_dump(&g);
        assert_eq!(dump_mode(&text), Some("integer"));
        let dump: GadgetDump<i64> = parse_dump(&text).unwrap();
        assert_eq!(dump.n, 6);
        assert_eq!(dump.role_s, g.role_s);
        assert_eq!(dump.role_t, g.role_t);
        check_dump(&dump, &x).unwrap();
    }

    #[test]
    fn tampered_weight_fails_the_check() {
        let x = MmdcInstance::new(
            vec![1, 1],
            vec![2, 2],
            vec![1, 1],
            vec![2, 2],
            vec![vec![3i64, 1], vec![4, 9]],
        )
        .unwrap();
        let mut dump: GadgetDump<i64> = parse_dump(&write_dump(&gadget_for(&x))).unwrap();
        dump.weights[7] = 0;
        assert!(matches!(check_dump(&dump, &x), Err(DumpError::Check(_))));
    }

    #[test]
    fn float_dump_round_trips() {
        let x = MmdcInstance::new(
            vec![1],
            vec![2],
            vec![0, 1],
            vec![1, 1],
            vec![vec![0.1f64, 2.5]],
        )
        .unwrap();
        let g = build_gadget(&normalize(&x).unwrap()).unwrap();
        let dump: GadgetDump<f64> = parse_dump(&write_dump(&g)).unwrap();
        assert_eq!(dump.weights.len(), g.n() * g.n());
        check_dump(&dump, &x).unwrap();
        assert!(parse_dump::<i64>(&write_dump(&g)).is_err());
    }

    #[test]
    fn syntax_errors_name_the_line() {
        let err = parse_dump::<i64>("mmdc-gadget 1\nmode integer\nn x\n").unwrap_err();
        assert_eq!(
            err,
            DumpError::Syntax {
                line: 3,
                msg: "bad value for n: \"x\"".into()
            }
        );
    }
}
