//! Plain-text edge lists.
//!
//! ```text
//! # n=3 directed weighted
//! 0 1 1.2500000000000000e0
//! 2 0 7.5000000000000000e-1
//! ```
//!
//! Weights carry 17 significant digits, which round-trips every `f64`.

use std::io::{BufRead, Write};

use super::{DirectedWeightedNetwork, Edge};
use crate::error::{Error, Result};

pub fn write_edge_list<W: Write>(net: &DirectedWeightedNetwork, mut out: W) -> Result<()> {
    writeln!(out, "# n={} directed weighted", net.node_count())?;
    for e in net.edges() {
        writeln!(out, "{} {} {:.16e}", e.source, e.target, e.weight)?;
    }
    Ok(())
}

pub fn read_edge_list<R: BufRead>(input: R) -> Result<DirectedWeightedNetwork> {
    let mut n = None;
    let mut edges = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        let Some(count) = n else {
            n = Some(parse_header(text).ok_or_else(|| Error::Parse {
                line: line_no,
                message: format!("expected header `# n=<count> directed weighted`, got `{text}`"),
            })?);
            continue;
        };
        let edge = parse_edge(text).ok_or_else(|| Error::Parse {
            line: line_no,
            message: format!("expected `source target weight`, got `{text}`"),
        })?;
        // Validate per line so errors carry the offending line number.
        let single = DirectedWeightedNetwork::from_edges(count, [edge]);
        if let Err(err) = single {
            return Err(Error::Parse {
                line: line_no,
                message: err.to_string(),
            });
        }
        edges.push((line_no, edge));
    }
    let n = n.ok_or(Error::Parse {
        line: 0,
        message: "empty edge list".into(),
    })?;
    let mut seen = std::collections::HashSet::with_capacity(edges.len());
    for &(line_no, e) in &edges {
        if !seen.insert((e.source, e.target)) {
            return Err(Error::Parse {
                line: line_no,
                message: format!("duplicate link {} -> {}", e.source, e.target),
            });
        }
    }
    DirectedWeightedNetwork::from_edges(n, edges.into_iter().map(|(_, e)| e))
}

fn parse_header(text: &str) -> Option<usize> {
    let mut parts = text.split_whitespace();
    if parts.next()? != "#" {
        return None;
    }
    let n = parts.next()?.strip_prefix("n=")?.parse().ok()?;
    (parts.next()? == "directed" && parts.next()? == "weighted" && parts.next().is_none())
        .then_some(n)
}

fn parse_edge(text: &str) -> Option<Edge> {
    let mut parts = text.split_whitespace();
    let edge = Edge {
        source: parts.next()?.parse().ok()?,
        target: parts.next()?.parse().ok()?,
        weight: parts.next()?.parse().ok()?,
    };
    parts.next().is_none().then_some(edge)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netgen::{generate, NetworkConfig};
    use proptest::prelude::*;

    fn roundtrip(net: &DirectedWeightedNetwork) -> DirectedWeightedNetwork {
        let mut buf = Vec::new();
        write_edge_list(net, &mut buf).unwrap();
        read_edge_list(buf.as_slice()).unwrap()
    }

    proptest! {
        #[test]
        fn roundtrip_is_bit_exact(n in 1usize..40, p in 0.0f64..=1.0, seed in any::<u64>()) {
            let net = generate(&NetworkConfig::new(n, p, seed)).unwrap();
            let back = roundtrip(&net);
            prop_assert_eq!(back.node_count(), net.node_count());
            let a: Vec<_> = net.edges().map(|e| (e.source, e.target, e.weight.to_bits())).collect();
            let b: Vec<_> = back.edges().map(|e| (e.source, e.target, e.weight.to_bits())).collect();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn header_and_format() {
        let net = DirectedWeightedNetwork::from_edges(
            2,
            [Edge { source: 1, target: 0, weight: 0.1 }],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_edge_list(&net, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "# n=2 directed weighted\n1 0 1.0000000000000001e-1\n"
        );
    }

    #[test]
    fn errors_carry_line_numbers() {
        let bad = "# n=3 directed weighted\n0 1 1.0\n\n1 x 2.0\n";
        match read_edge_list(bad.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
        let out_of_range = "# n=2 directed weighted\n0 5 1.0\n";
        assert!(matches!(read_edge_list(out_of_range.as_bytes()), Err(Error::Parse { line: 2, .. })));
        let dup = "# n=2 directed weighted\n0 1 1.0\n0 1 2.0\n";
        assert!(matches!(read_edge_list(dup.as_bytes()), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(read_edge_list("0 1 1.0\n".as_bytes()), Err(Error::Parse { line: 1, .. })));
    }
}
