use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::io;
use super::matrix::TransitionMatrix;
use crate::error::{invalid, Error, Result};

/// Generator description for every network family used by the toolkit.
///
/// Serialized as its compact string form, e.g. `cycle:8`,
/// `lazy:0.5:directed-cycle:32` or `leafy-line:64,512,4096`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum GraphSpec {
    Cycle { n: usize },
    Path { n: usize },
    Complete { n: usize },
    Hypercube { dim: u32 },
    /// Two stars with `leaves` leaves each, centers joined by a path with
    /// `leaves` edges. Center `v1` is vertex 0, center `v2` is vertex `leaves`.
    StarPathStar { leaves: usize },
    /// `P(i, i+1) = 1` on `0..n`.
    DirectedCycle { n: usize },
    /// Vertices `-m..=m` (index `i + m`), drifting away from 0 on both sides.
    DriftDigraph { half_width: usize },
    /// Simple random walk on `-radius..=radius` (index `x + radius`); the end
    /// vertices reflect.
    Line { radius: usize },
    /// Line `v_0 .. v_{k-1}` where `v_i` carries `leaves[i]` pendant leaves.
    /// Line vertices come first, then the leaves of each star in order.
    LeafyLine { leaves: Vec<usize> },
    /// Simple random walk on an explicit edge list.
    EdgeList { n: usize, edges: Vec<(usize, usize)>, directed: bool },
    /// `delta I + (1 - delta) P`.
    Lazy { delta: f64, inner: Box<GraphSpec> },
    /// Matrix loaded from an edge-list or JSON file.
    File { path: String },
}

fn srw(n: usize, edges: &[(usize, usize)], directed: bool) -> Result<TransitionMatrix> {
    TransitionMatrix::simple_random_walk(n, edges, directed)
}

/// Builds the transition matrix for `spec`. The result is row-stochastic and
/// strongly connected.
pub fn build(spec: &GraphSpec) -> Result<TransitionMatrix> {
    let p = match spec {
        GraphSpec::Cycle { n } => {
            if *n < 3 {
                return invalid("cycle needs n >= 3");
            }
            let edges: Vec<_> = (0..*n).map(|i| (i, (i + 1) % n)).collect();
            srw(*n, &edges, false)?
        }
        GraphSpec::Path { n } => {
            if *n < 2 {
                return invalid("path needs n >= 2");
            }
            let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
            srw(*n, &edges, false)?
        }
        GraphSpec::Complete { n } => {
            if *n < 2 {
                return invalid("complete graph needs n >= 2");
            }
            let edges: Vec<_> =
                (0..*n).flat_map(|i| (i + 1..*n).map(move |j| (i, j))).collect();
            srw(*n, &edges, false)?
        }
        GraphSpec::Hypercube { dim } => {
            if *dim < 1 || *dim > 20 {
                return invalid("hypercube dimension must lie in 1..=20");
            }
            let n = 1usize << dim;
            let edges: Vec<_> = (0..n)
                .flat_map(|v| (0..*dim).map(move |b| (v, v ^ (1 << b))))
                .filter(|&(v, u)| v < u)
                .collect();
            srw(n, &edges, false)?
        }
        GraphSpec::StarPathStar { leaves } => {
            let k = *leaves;
            if k < 2 {
                return invalid("star-path-star needs n >= 2");
            }
            // v1 = 0, path 0..=k, v2 = k, leaves of v1 then leaves of v2.
            let mut edges: Vec<_> = (0..k).map(|i| (i, i + 1)).collect();
            edges.extend((0..k).map(|j| (0, k + 1 + j)));
            edges.extend((0..k).map(|j| (k, 2 * k + 1 + j)));
            srw(3 * k + 1, &edges, false)?
        }
        GraphSpec::DirectedCycle { n } => {
            if *n < 2 {
                return invalid("directed cycle needs n >= 2");
            }
            let edges: Vec<_> = (0..*n).map(|i| (i, (i + 1) % n)).collect();
            srw(*n, &edges, true)?
        }
        GraphSpec::DriftDigraph { half_width } => drift_digraph(*half_width)?,
        GraphSpec::Line { radius } => {
            if *radius < 1 {
                return invalid("line needs radius >= 1");
            }
            let n = 2 * radius + 1;
            let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
            srw(n, &edges, false)?
        }
        GraphSpec::LeafyLine { leaves } => {
            let k = leaves.len();
            if k == 0 || (k == 1 && leaves[0] == 0) {
                return invalid("leafy line needs at least one edge");
            }
            let n = k + leaves.iter().sum::<usize>();
            let mut edges: Vec<_> = (0..k - 1).map(|i| (i, i + 1)).collect();
            let mut next = k;
            for (i, &count) in leaves.iter().enumerate() {
                for _ in 0..count {
                    edges.push((i, next));
                    next += 1;
                }
            }
            srw(n, &edges, false)?
        }
        GraphSpec::EdgeList { n, edges, directed } => srw(*n, edges, *directed)?,
        GraphSpec::Lazy { delta, inner } => build(inner)?.lazy(*delta)?,
        GraphSpec::File { path } => io::load(std::path::Path::new(path))?,
    };
    if !crate::graph::validate::strongly_connected(&p) {
        return Err(Error::NotStronglyConnected);
    }
    Ok(p.with_label(spec.to_string()))
}

/// Index of position `i` in the drift digraph of half-width `m`.
pub fn drift_index(half_width: usize, i: i64) -> usize {
    (i + half_width as i64) as usize
}

fn drift_digraph(m: usize) -> Result<TransitionMatrix> {
    if m < 4 {
        return invalid("drift-digraph needs n >= 4");
    }
    let mi = m as i64;
    let idx = |i: i64| drift_index(m, i);
    let mut edges = Vec::new();
    for i in (-mi + 2)..0 {
        for j in [i + 1, i - 1, i - 2] {
            edges.push((idx(i), idx(j)));
        }
    }
    for i in 1..=(mi - 2) {
        for j in [i - 1, i + 1, i + 2] {
            edges.push((idx(i), idx(j)));
        }
    }
    for (a, b) in [
        (0, -1),
        (0, 1),
        (-mi, -mi + 1),
        (-mi + 1, -mi),
        (-mi + 1, -mi + 2),
        (mi, mi - 1),
        (mi - 1, mi),
        (mi - 1, mi - 2),
    ] {
        edges.push((idx(a), idx(b)));
    }
    srw(2 * m + 1, &edges, true)
}

impl fmt::Display for GraphSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphSpec::Cycle { n } => write!(f, "cycle:{n}"),
            GraphSpec::Path { n } => write!(f, "path:{n}"),
            GraphSpec::Complete { n } => write!(f, "complete:{n}"),
            GraphSpec::Hypercube { dim } => write!(f, "hypercube:{dim}"),
            GraphSpec::StarPathStar { leaves } => write!(f, "star-path-star:{leaves}"),
            GraphSpec::DirectedCycle { n } => write!(f, "directed-cycle:{n}"),
            GraphSpec::DriftDigraph { half_width } => write!(f, "drift-digraph:{half_width}"),
            GraphSpec::Line { radius } => write!(f, "line:{radius}"),
            GraphSpec::LeafyLine { leaves } => {
                let parts: Vec<String> = leaves.iter().map(|l| l.to_string()).collect();
                write!(f, "leafy-line:{}", parts.join(","))
            }
            GraphSpec::EdgeList { n, edges, directed } => {
                let parts: Vec<String> = edges.iter().map(|(u, v)| format!("{u}-{v}")).collect();
                let tag = if *directed { "arcs" } else { "edges" };
                write!(f, "{tag}:{n}:{}", parts.join(","))
            }
            GraphSpec::Lazy { delta, inner } => write!(f, "lazy:{delta}:{inner}"),
            GraphSpec::File { path } => write!(f, "file:{path}"),
        }
    }
}

fn parse_usize(s: &str, what: &str) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("{what}: expected an integer, got {s:?}")))
}

impl FromStr for GraphSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (tag, rest) = s.split_once(':').unwrap_or((s, ""));
        let spec = match tag {
            "cycle" => GraphSpec::Cycle { n: parse_usize(rest, tag)? },
            "path" => GraphSpec::Path { n: parse_usize(rest, tag)? },
            "complete" => GraphSpec::Complete { n: parse_usize(rest, tag)? },
            "hypercube" => GraphSpec::Hypercube { dim: parse_usize(rest, tag)? as u32 },
            "star-path-star" => GraphSpec::StarPathStar { leaves: parse_usize(rest, tag)? },
            "directed-cycle" => GraphSpec::DirectedCycle { n: parse_usize(rest, tag)? },
            "drift-digraph" => GraphSpec::DriftDigraph { half_width: parse_usize(rest, tag)? },
            "line" => GraphSpec::Line { radius: parse_usize(rest, tag)? },
            "leafy-line" => GraphSpec::LeafyLine {
                leaves: rest
                    .split(',')
                    .map(|x| parse_usize(x, tag))
                    .collect::<Result<_>>()?,
            },
            "edges" | "arcs" => {
                let (n, list) = rest
                    .split_once(':')
                    .ok_or_else(|| Error::InvalidParameter(format!("{tag}: expected n:u-v,...")))?;
                let edges = list
                    .split(',')
                    .filter(|e| !e.trim().is_empty())
                    .map(|e| {
                        let (u, v) = e.split_once('-').ok_or_else(|| {
                            Error::InvalidParameter(format!("{tag}: bad edge {e:?}"))
                        })?;
                        Ok((parse_usize(u, tag)?, parse_usize(v, tag)?))
                    })
                    .collect::<Result<_>>()?;
                GraphSpec::EdgeList { n: parse_usize(n, tag)?, edges, directed: tag == "arcs" }
            }
            "lazy" => {
                let (delta, inner) = rest
                    .split_once(':')
                    .ok_or_else(|| Error::InvalidParameter("lazy: expected delta:<graph>".into()))?;
                let delta: f64 = delta
                    .parse()
                    .map_err(|_| Error::InvalidParameter(format!("lazy: bad delta {delta:?}")))?;
                GraphSpec::Lazy { delta, inner: Box::new(inner.parse()?) }
            }
            "file" => GraphSpec::File { path: rest.to_string() },
            _ => return invalid(format!("unknown graph family {tag:?}")),
        };
        Ok(spec)
    }
}

impl TryFrom<String> for GraphSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<GraphSpec> for String {
    fn from(g: GraphSpec) -> String {
        g.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycle_row_is_two_halves() {
        let p = build(&GraphSpec::Cycle { n: 4 }).unwrap();
        assert_eq!(p.row_entries(0).collect::<Vec<_>>(), vec![(1, 0.5), (3, 0.5)]);
    }

    #[test]
    fn drift_digraph_interior_rows() {
        let m = 6;
        let p = build(&GraphSpec::DriftDigraph { half_width: m }).unwrap();
        assert_eq!(p.n(), 2 * m + 1);
        let third = 1.0 / 3.0;
        for i in 1..=(m as i64 - 2) {
            let row: Vec<_> = p.row_entries(drift_index(m, i)).collect();
            let expect: Vec<_> =
                [i - 1, i + 1, i + 2].iter().map(|&j| (drift_index(m, j), third)).collect();
            assert_eq!(row, expect, "vertex {i}");
        }
        for i in (-(m as i64) + 2)..0 {
            let row: Vec<_> = p.row_entries(drift_index(m, i)).collect();
            let expect: Vec<_> =
                [i - 2, i - 1, i + 1].iter().map(|&j| (drift_index(m, j), third)).collect();
            assert_eq!(row, expect, "vertex {i}");
        }
        let zero: Vec<_> = p.row_entries(drift_index(m, 0)).collect();
        assert_eq!(zero, vec![(drift_index(m, -1), 0.5), (drift_index(m, 1), 0.5)]);
        assert!(build(&GraphSpec::DriftDigraph { half_width: 3 }).is_err());
    }

    #[test]
    fn star_path_star_center_degree() {
        for k in [2, 5, 16] {
            let p = build(&GraphSpec::StarPathStar { leaves: k }).unwrap();
            assert_eq!(p.n(), 3 * k + 1);
            assert_eq!(p.out_degree(0), k + 1);
            assert_eq!(p.out_degree(k), k + 1);
        }
        assert!(build(&GraphSpec::StarPathStar { leaves: 1 }).is_err());
    }

    #[test]
    fn star_path_star_center_mass() {
        for k in [2, 7, 64] {
            let chain = crate::Chain::from_spec(&GraphSpec::StarPathStar { leaves: k }).unwrap();
            let expected = (k + 1) as f64 / (6 * k) as f64;
            assert!((chain.stationary().pi[0] - expected).abs() < 1e-12);
            assert!((chain.stationary().pi[k] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn disconnected_edge_list_is_rejected() {
        let spec = GraphSpec::EdgeList { n: 4, edges: vec![(0, 1), (2, 3)], directed: false };
        assert!(matches!(build(&spec), Err(Error::NotStronglyConnected)));
    }

    #[test]
    fn leafy_line_layout() {
        let p = build(&GraphSpec::LeafyLine { leaves: vec![2, 0, 3] }).unwrap();
        assert_eq!(p.n(), 8);
        assert_eq!(p.out_degree(0), 3);
        assert_eq!(p.out_degree(1), 2);
        assert_eq!(p.out_degree(2), 4);
        assert_eq!(p.row(3).0, &[0]);
        assert_eq!(p.row(7).0, &[2]);
    }

    #[test]
    fn string_form_round_trips() {
        for s in [
            "cycle:8",
            "path:3",
            "complete:16",
            "hypercube:4",
            "star-path-star:8",
            "directed-cycle:32",
            "drift-digraph:9",
            "line:20",
            "leafy-line:64,512,4096",
            "edges:3:0-1,1-2",
            "arcs:3:0-1,1-2,2-0",
            "lazy:0.5:directed-cycle:32",
        ] {
            let g: GraphSpec = s.parse().unwrap();
            assert_eq!(g.to_string(), s);
        }
        assert!("banana:3".parse::<GraphSpec>().is_err());
        assert!("cycle:x".parse::<GraphSpec>().is_err());
    }
}
