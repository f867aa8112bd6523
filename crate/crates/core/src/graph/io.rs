//! Edge-list and JSON serialization of transition matrices.
//!
//! Edge-list text: a header `n <count> [directed]` followed by one arc per
//! line, `u v` (unweighted: simple random walk over the listed edges) or
//! `u v p` (weighted: the entry `P(u, v)` itself, given as a decimal or a
//! ratio `a/b`). Lines starting with `#` are comments.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::matrix::TransitionMatrix;
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    EdgeList,
    Json,
}

impl Format {
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Format::Json,
            _ => Format::EdgeList,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub n: usize,
    #[serde(default)]
    pub directed: bool,
    pub arcs: Vec<(usize, usize, f64)>,
}

fn format_prob(p: f64) -> String {
    let k = (1.0 / p).round();
    if k >= 1.0 && k <= 1e6 && 1.0 / k == p {
        if k == 1.0 {
            "1".to_string()
        } else {
            format!("1/{k}")
        }
    } else {
        format!("{p}")
    }
}

fn parse_prob(s: &str) -> Option<f64> {
    match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.parse().ok()?;
            let b: f64 = b.parse().ok()?;
            (b != 0.0).then(|| a / b)
        }
        None => s.parse().ok(),
    }
}

pub fn to_edge_list(p: &TransitionMatrix) -> String {
    let mut out = String::new();
    if p.has_symmetric_support() {
        out.push_str(&format!("n {}\n", p.n()));
    } else {
        out.push_str(&format!("n {} directed\n", p.n()));
    }
    for (v, u, w) in p.arcs() {
        out.push_str(&format!("{v} {u} {}\n", format_prob(w)));
    }
    out
}

fn perr<T>(line: usize, message: impl Into<String>) -> Result<T> {
    Err(Error::Parse { line, message: message.into() })
}

pub fn from_edge_list(text: &str) -> Result<TransitionMatrix> {
    let mut header: Option<(usize, bool)> = None;
    let mut weighted: Option<bool> = None;
    let mut edges = Vec::new();
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let Some((n, directed)) = header else {
            if tokens[0] != "n" || tokens.len() < 2 || tokens.len() > 3 {
                return perr(lineno, "expected header `n <count> [directed]`");
            }
            let n: usize = match tokens[1].parse() {
                Ok(n) => n,
                Err(_) => return perr(lineno, format!("bad vertex count {:?}", tokens[1])),
            };
            if n == 0 {
                return invalid("n must be at least 1");
            }
            let directed = match tokens.get(2) {
                None => false,
                Some(&"directed") => true,
                Some(t) => return perr(lineno, format!("unknown header flag {t:?}")),
            };
            header = Some((n, directed));
            rows = vec![Vec::new(); n];
            continue;
        };
        let is_weighted = match tokens.len() {
            2 => false,
            3 => true,
            _ => return perr(lineno, "expected `u v [weight]`"),
        };
        match weighted {
            None => weighted = Some(is_weighted),
            Some(true) if !is_weighted => return perr(lineno, "missing weight in weighted mode"),
            Some(false) if is_weighted => return perr(lineno, "unexpected weight in unweighted mode"),
            _ => {}
        }
        let parse_vertex = |s: &str| -> Result<usize> {
            match s.parse::<usize>() {
                Ok(v) if v < n => Ok(v),
                Ok(v) => perr(lineno, format!("vertex {v} out of range for n = {n}")),
                Err(_) => perr(lineno, format!("bad vertex {s:?}")),
            }
        };
        let u = parse_vertex(tokens[0])?;
        let v = parse_vertex(tokens[1])?;
        if is_weighted {
            let Some(w) = parse_prob(tokens[2]) else {
                return perr(lineno, format!("bad weight {:?}", tokens[2]));
            };
            rows[u].push((v, w));
        } else {
            edges.push((u, v));
        }
        let _ = directed;
    }
    let Some((n, directed)) = header else {
        return perr(text.lines().count().max(1), "missing header");
    };
    match weighted {
        Some(true) => TransitionMatrix::from_rows(n, rows),
        _ => TransitionMatrix::simple_random_walk(n, &edges, directed),
    }
}

pub fn to_json(p: &TransitionMatrix) -> MatrixJson {
    MatrixJson { n: p.n(), directed: !p.has_symmetric_support(), arcs: p.arcs().collect() }
}

pub fn from_json(m: &MatrixJson) -> Result<TransitionMatrix> {
    if m.n == 0 {
        return invalid("n must be at least 1");
    }
    let mut rows = vec![Vec::new(); m.n];
    for &(u, v, p) in &m.arcs {
        if u >= m.n || v >= m.n {
            return invalid(format!("arc ({u}, {v}) out of range for n = {}", m.n));
        }
        rows[u].push((v, p));
    }
    TransitionMatrix::from_rows(m.n, rows)
}

pub fn save(p: &TransitionMatrix, path: &Path) -> Result<()> {
    let text = match Format::from_path(path) {
        Format::Json => serde_json::to_string_pretty(&to_json(p))?,
        Format::EdgeList => to_edge_list(p),
    };
    fs::write(path, text)?;
    Ok(())
}

pub fn load(path: &Path) -> Result<TransitionMatrix> {
    let text = fs::read_to_string(path)?;
    match Format::from_path(path) {
        Format::Json => from_json(&serde_json::from_str(&text)?),
        Format::EdgeList => from_edge_list(&text),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build, GraphSpec};

    #[test]
    fn cycle_round_trips_through_both_formats() {
        let dir = tempfile::tempdir().unwrap();
        for spec in [GraphSpec::Cycle { n: 3 }, GraphSpec::DriftDigraph { half_width: 4 }] {
            let p = build(&spec).unwrap();
            for name in ["g.txt", "g.json"] {
                let path = dir.path().join(name);
                save(&p, &path).unwrap();
                let q = load(&path).unwrap();
                assert_eq!(p.arcs().collect::<Vec<_>>(), q.arcs().collect::<Vec<_>>());
            }
        }
    }

    #[test]
    fn missing_weight_reports_line() {
        let text = "n 3\n0 1 1/2\n0 2 1/2\n# comment\n0 1\n";
        match from_edge_list(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn unweighted_lines_build_srw() {
        let p = from_edge_list("n 3\n0 1\n1 2\n2 0\n").unwrap();
        assert_eq!(p.entry(0, 1), 0.5);
        let d = from_edge_list("n 3 directed\n0 1\n1 2\n2 0\n").unwrap();
        assert_eq!(d.entry(0, 1), 1.0);
    }

    #[test]
    fn stochasticity_violation_on_load() {
        assert!(matches!(
            from_edge_list("n 2\n0 1 0.9\n1 0 1\n"),
            Err(Error::NotStochastic(_))
        ));
    }

    #[test]
    fn json_with_zero_vertices_is_invalid() {
        let m: MatrixJson = serde_json::from_str(r#"{"n":0,"directed":false,"arcs":[]}"#).unwrap();
        assert!(matches!(from_json(&m), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn ratios_are_written_when_exact() {
        assert_eq!(format_prob(1.0 / 3.0), "1/3");
        assert_eq!(format_prob(1.0), "1");
        assert_eq!(format_prob(0.3), "0.3");
        assert_eq!(parse_prob("1/3"), Some(1.0 / 3.0));
    }
}
