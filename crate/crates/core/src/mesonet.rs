//! Mesoscopic network assembly and degree-targeted pruning.
//!
//! The weighted form is the complete graph over windows with cosine edge
//! weights. Pruning keeps exactly `floor(k_target * N / 2)` highest-weight
//! edges (the rearranged average-degree relation `<k> = 2E/N`), drops the
//! weights, and reports the achieved average degree.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::vectorize::{cosine, TermWeightVector};
use crate::{Error, Result};

/// An undirected edge with `i < j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub i: u32,
    pub j: u32,
    pub weight: f64,
}

/// A network over window nodes `0..node_count`, in narrative order.
#[derive(Debug, Clone)]
pub struct MesoNetwork {
    node_count: usize,
    /// Sorted by `(i, j)`; complete when `!pruned`.
    edges: Vec<Edge>,
    pruned: bool,
    target_k: Option<f64>,
}

impl MesoNetwork {
    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_pruned(&self) -> bool {
        self.pruned
    }

    pub fn target_k(&self) -> Option<f64> {
        self.target_k
    }

    /// Achieved average degree `2E/N`.
    pub fn average_degree(&self) -> f64 {
        2.0 * self.edges.len() as f64 / self.node_count as f64
    }

    /// Neighbor lists, sorted ascending per node.
    pub fn adjacency(&self) -> Vec<Vec<u32>> {
        let mut nbrs = vec![Vec::new(); self.node_count];
        for e in &self.edges {
            nbrs[e.i as usize].push(e.j);
            nbrs[e.j as usize].push(e.i);
        }
        for list in &mut nbrs {
            list.sort_unstable();
        }
        nbrs
    }

    /// Build a pruned network directly from an edge set (test and io helper).
    pub fn from_edges(node_count: usize, pairs: &[(u32, u32)]) -> Self {
        let mut edges: Vec<Edge> = pairs
            .iter()
            .map(|&(a, b)| {
                let (i, j) = if a < b { (a, b) } else { (b, a) };
                assert!(i != j, "self-loops are not allowed");
                assert!((j as usize) < node_count);
                Edge { i, j, weight: 1.0 }
            })
            .collect();
        edges.sort_unstable_by_key(|e| (e.i, e.j));
        edges.dedup_by_key(|e| (e.i, e.j));
        MesoNetwork {
            node_count,
            edges,
            pruned: true,
            target_k: None,
        }
    }
}

/// Assemble the complete weighted network: edge `(i, j)` carries the cosine
/// similarity of the windows' tf-idf vectors.
pub fn build_weighted(vectors: &[TermWeightVector]) -> Result<MesoNetwork> {
    let n = vectors.len();
    if n < 2 {
        return Err(Error::FewerThanTwoNodes { have: n });
    }
    let rows: Vec<Vec<Edge>> = (0..n - 1)
        .into_par_iter()
        .map(|i| {
            (i + 1..n)
                .map(|j| Edge {
                    i: i as u32,
                    j: j as u32,
                    weight: cosine(&vectors[i], &vectors[j]),
                })
                .collect()
        })
        .collect();
    let edges: Vec<Edge> = rows.into_iter().flatten().collect();
    debug_assert_eq!(edges.len(), n * (n - 1) / 2);
    Ok(MesoNetwork {
        node_count: n,
        edges,
        pruned: false,
        target_k: None,
    })
}

/// Number of edges kept when pruning `n` nodes to average degree `k`.
pub fn pruned_edge_count(n: usize, k_target: f64) -> usize {
    (k_target * n as f64 / 2.0).floor() as usize
}

fn check_feasible(net: &MesoNetwork, k_target: f64) -> Result<()> {
    if !net.pruned && net.node_count >= 2 {
        let max = (net.node_count - 1) as f64;
        if k_target <= 0.0 || k_target >= max {
            return Err(Error::InfeasibleTargetDegree {
                target: k_target,
                nodes: net.node_count,
            });
        }
        Ok(())
    } else {
        Err(Error::FewerThanTwoNodes {
            have: net.node_count,
        })
    }
}

/// Edge indices ordered by descending weight, ties by ascending `(i, j)`.
fn descending_weight_order(edges: &[Edge]) -> Vec<u32> {
    let mut order: Vec<u32> = (0..edges.len() as u32).collect();
    order.sort_unstable_by(|&a, &b| {
        let (ea, eb) = (&edges[a as usize], &edges[b as usize]);
        eb.weight
            .partial_cmp(&ea.weight)
            .expect("edge weights are finite")
            .then_with(|| (ea.i, ea.j).cmp(&(eb.i, eb.j)))
    });
    order
}

fn take_top_edges(net: &MesoNetwork, order: &[u32], k_target: f64) -> MesoNetwork {
    let keep = pruned_edge_count(net.node_count, k_target);
    let mut edges: Vec<Edge> = order[..keep]
        .iter()
        .map(|&ix| {
            let e = &net.edges[ix as usize];
            Edge {
                i: e.i,
                j: e.j,
                weight: 1.0,
            }
        })
        .collect();
    edges.sort_unstable_by_key(|e| (e.i, e.j));
    MesoNetwork {
        node_count: net.node_count,
        edges,
        pruned: true,
        target_k: Some(k_target),
    }
}

/// Prune a complete weighted network to the target average degree by keeping
/// the globally highest-weight edges. Requires `0 < k_target < N - 1`.
pub fn prune_to_avg_degree(net: &MesoNetwork, k_target: f64) -> Result<MesoNetwork> {
    check_feasible(net, k_target)?;
    let order = descending_weight_order(&net.edges);
    Ok(take_top_edges(net, &order, k_target))
}

/// Prune at every target degree in `k_values`. The kept edge sets are nested:
/// smaller targets keep a prefix of the larger targets' edges.
pub fn sweep_prune(net: &MesoNetwork, k_values: &[f64]) -> Result<Vec<(f64, MesoNetwork)>> {
    for &k in k_values {
        check_feasible(net, k)?;
    }
    if k_values.is_empty() {
        return Ok(Vec::new());
    }
    let order = descending_weight_order(&net.edges);
    Ok(k_values
        .iter()
        .map(|&k| (k, take_top_edges(net, &order, k)))
        .collect())
}

/// Write an edge list: `# nodes N` header, then one `i j [weight]` line per
/// edge, 0-based, ordered by `(i, j)`.
pub fn write_edge_list(net: &MesoNetwork, path: &Path) -> Result<()> {
    let mut out = String::new();
    writeln!(out, "# nodes {}", net.node_count).unwrap();
    for e in &net.edges {
        if net.pruned {
            writeln!(out, "{} {}", e.i, e.j).unwrap();
        } else {
            writeln!(out, "{} {} {}", e.i, e.j, e.weight).unwrap();
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Read an edge list written by [`write_edge_list`]. Files without the
/// `# nodes` header get `N = max node index + 1`.
pub fn read_edge_list(path: &Path) -> Result<MesoNetwork> {
    let file = std::fs::File::open(path)?;
    let reader = std::io::BufReader::new(file);
    let display = path.display().to_string();
    let parse_err = |line: usize, message: &str| Error::NetworkParse {
        path: display.clone(),
        line,
        message: message.to_string(),
    };

    let mut node_count: Option<usize> = None;
    let mut pairs: Vec<(u32, u32)> = Vec::new();
    let mut weighted = false;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim();
            if let Some(n) = rest.strip_prefix("nodes") {
                node_count = Some(
                    n.trim()
                        .parse()
                        .map_err(|_| parse_err(lineno + 1, "bad node count"))?,
                );
            }
            continue;
        }
        let mut parts = line.split_whitespace();
        let i: u32 = parts
            .next()
            .ok_or_else(|| parse_err(lineno + 1, "missing source node"))?
            .parse()
            .map_err(|_| parse_err(lineno + 1, "bad source node"))?;
        let j: u32 = parts
            .next()
            .ok_or_else(|| parse_err(lineno + 1, "missing target node"))?
            .parse()
            .map_err(|_| parse_err(lineno + 1, "bad target node"))?;
        if let Some(w) = parts.next() {
            weighted = true;
            let _: f64 = w
                .parse()
                .map_err(|_| parse_err(lineno + 1, "bad weight"))?;
        }
        pairs.push((i, j));
    }
    let inferred = pairs.iter().map(|&(i, j)| i.max(j) as usize + 1).max();
    let n = node_count.or(inferred).unwrap_or(0);
    let mut net = MesoNetwork::from_edges(n, &pairs);
    net.pruned = !weighted;
    Ok(net)
}

/// GraphML export with a per-node `order` attribute (the window index).
pub fn write_graphml(net: &MesoNetwork, path: &Path) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#)?;
    writeln!(
        out,
        r#"<graphml xmlns="http://graphml.graphdrawing.org/xmlns">"#
    )?;
    writeln!(
        out,
        r#"  <key id="order" for="node" attr.name="order" attr.type="int"/>"#
    )?;
    if !net.pruned {
        writeln!(
            out,
            r#"  <key id="weight" for="edge" attr.name="weight" attr.type="double"/>"#
        )?;
    }
    writeln!(out, r#"  <graph id="G" edgedefault="undirected">"#)?;
    for i in 0..net.node_count {
        writeln!(
            out,
            r#"    <node id="n{i}"><data key="order">{i}</data></node>"#
        )?;
    }
    for e in &net.edges {
        if net.pruned {
            writeln!(out, r#"    <edge source="n{}" target="n{}"/>"#, e.i, e.j)?;
        } else {
            writeln!(
                out,
                r#"    <edge source="n{}" target="n{}"><data key="weight">{}</data></edge>"#,
                e.i, e.j, e.weight
            )?;
        }
    }
    writeln!(out, "  </graph>")?;
    writeln!(out, "</graphml>")?;
    Ok(())
}
