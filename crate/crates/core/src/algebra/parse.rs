//! Plain-text algebra definitions:
//!
//! ```text
//! # Heisenberg algebra
//! name h1
//! dimension 3
//! layers 2 1
//! labels X Y T
//! 1 2 3 4.0
//! ```
//!
//! Bracket lines `i j k value` are 1-based and set `c_ijk`; the partner
//! `c_jik = -value` is implied unless listed.

use std::fmt::Write as _;

use super::StratifiedAlgebra;
use crate::error::{Error, Result};

pub(super) fn parse_definition(text: &str) -> Result<StratifiedAlgebra> {
    let mut name = None;
    let mut dimension = None;
    let mut layers: Option<Vec<usize>> = None;
    let mut labels = None;
    let mut brackets = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let perr = |msg: String| Error::Parse { line: line_no, msg };
        let mut tokens = line.split_whitespace();
        let head = tokens.next().expect("nonempty line");
        let rest: Vec<&str> = tokens.collect();
        match head {
            "name" => name = Some(rest.join(" ")),
            "dimension" => {
                let [d] = rest[..] else {
                    return Err(perr("expected `dimension <n>`".into()));
                };
                dimension = Some(d.parse::<usize>().map_err(|e| perr(format!("bad dimension: {e}")))?);
            }
            "layers" => {
                let dims = rest
                    .iter()
                    .map(|t| t.parse::<usize>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|e| perr(format!("bad layer size: {e}")))?;
                if dims.is_empty() {
                    return Err(perr("`layers` needs at least one size".into()));
                }
                layers = Some(dims);
            }
            "labels" => labels = Some(rest.iter().map(|s| s.to_string()).collect::<Vec<_>>()),
            _ if head.chars().all(|c| c.is_ascii_digit()) => {
                let mut all = vec![head];
                all.extend(rest);
                let [i, j, k, v] = all[..] else {
                    return Err(perr("bracket lines have the form `i j k value`".into()));
                };
                let idx = |s: &str| -> Result<usize> {
                    match s.parse::<usize>() {
                        Ok(0) | Err(_) => Err(perr(format!("bad 1-based index `{s}`"))),
                        Ok(x) => Ok(x - 1),
                    }
                };
                let value: f64 = v.parse().map_err(|e| perr(format!("bad value `{v}`: {e}")))?;
                if !value.is_finite() {
                    return Err(Error::Input(format!("line {line_no}: non-finite structure constant")));
                }
                brackets.push((idx(i)?, idx(j)?, idx(k)?, value));
            }
            other => return Err(perr(format!("unknown field `{other}`"))),
        }
    }

    let layers = layers.ok_or_else(|| Error::Parse {
        line: 0,
        msg: "missing `layers`".into(),
    })?;
    let total: usize = layers.iter().sum();
    if let Some(d) = dimension {
        if d != total {
            return Err(Error::Shape(format!("dimension {d} but layers sum to {total}")));
        }
    }
    let mut alg = StratifiedAlgebra::from_brackets(layers, &brackets)?;
    if let Some(n) = name {
        alg = alg.with_name(n);
    }
    if let Some(l) = labels {
        alg = alg.with_labels(l)?;
    }
    Ok(alg)
}

pub(super) fn write_definition(a: &StratifiedAlgebra) -> String {
    let mut s = String::new();
    if !a.name().is_empty() {
        let _ = writeln!(s, "name {}", a.name());
    }
    let _ = writeln!(s, "dimension {}", a.dimension());
    let layers: Vec<String> = a.layer_dims().iter().map(|d| d.to_string()).collect();
    let _ = writeln!(s, "layers {}", layers.join(" "));
    let _ = writeln!(s, "labels {}", a.labels().join(" "));
    for (i, j, k, v) in a.nonzero_brackets() {
        let _ = writeln!(s, "{} {} {} {v:?}", i + 1, j + 1, k + 1);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::super::preset;
    use super::*;

    #[test]
    fn parses_heisenberg() {
        let a = StratifiedAlgebra::parse("# comment\ndimension 3\nlayers 2 1\n1 2 3 4.0\n").unwrap();
        assert_eq!(a.structure_constant(0, 1, 2), 4.0);
        assert_eq!(a.structure_constant(1, 0, 2), -4.0);
        assert!(a.validate().is_valid());
    }

    #[test]
    fn roundtrip_of_presets() {
        for name in ["r2", "h1", "bony2"] {
            let a = preset(name).unwrap();
            let b = StratifiedAlgebra::parse(&a.to_definition()).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = StratifiedAlgebra::parse("layers 2 1\nfoo 3\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = StratifiedAlgebra::parse("layers 2 1\n1 2 3\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = StratifiedAlgebra::parse("dimension 4\nlayers 2 1\n").unwrap_err();
        assert!(matches!(err, Error::Shape(_)));
        let err = StratifiedAlgebra::parse("layers 2 1\n1 2 3 inf\n").unwrap_err();
        assert!(matches!(err, Error::Input(_)));
    }
}
