//! Topological measurements of pruned mesoscopic networks.
//!
//! Per-node measurements: degree, average neighbor degree, clustering,
//! self-avoiding-walk accessibility (h = 2, 3), and concentric symmetry
//! (h = 2, 3, 4; backbone and merged variants). Assortativity is the one
//! graph-level scalar. Per-node distributions are aggregated downstream to
//! population mean, standard deviation, and skewness.
//!
//! Isolated nodes and exhausted neighborhoods yield 0 for the affected
//! measurements and set the node's `degenerate` flag; disconnected networks
//! are measured as-is, never rejected.

mod concentric;

pub use concentric::{accessibility, concentric_levels, symmetry, SymmetryVariant};
use concentric::{symmetry_bundle, SYMMETRY_H};

use std::fmt::Write as _;
use std::io::BufRead;
use std::path::Path;

use rayon::prelude::*;

use crate::mesonet::MesoNetwork;
use crate::{Error, Result};

/// Population moments of a measurement distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistributionStats {
    pub mean: f64,
    pub std: f64,
    /// Third standardized moment; 0 by convention when `std == 0`.
    pub skewness: f64,
}

/// Population mean, standard deviation, and skewness of `values`.
pub fn aggregate(values: &[f64]) -> Result<DistributionStats> {
    if values.is_empty() {
        return Err(Error::EmptyValues);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let m2 = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let m3 = values.iter().map(|v| (v - mean).powi(3)).sum::<f64>() / n;
    let std = m2.sqrt();
    let skewness = if std == 0.0 { 0.0 } else { m3 / (std * std * std) };
    Ok(DistributionStats {
        mean,
        std,
        skewness,
    })
}

/// Moments of the degree sequence. Downstream features use only `std` and
/// `skewness`: pruning pins the average degree, so the mean carries no
/// information.
pub fn degree_stats(net: &MesoNetwork) -> DistributionStats {
    let degrees = degree_sequence(net);
    aggregate(&degrees).expect("networks have at least one node")
}

/// Degrees of all nodes as floats, in node order.
pub fn degree_sequence(net: &MesoNetwork) -> Vec<f64> {
    let mut deg = vec![0.0; net.node_count()];
    for e in net.edges() {
        deg[e.i as usize] += 1.0;
        deg[e.j as usize] += 1.0;
    }
    deg
}

/// Arithmetic mean of the neighbors' degrees; 0 for isolated nodes.
pub fn avg_neighbor_degree(adjacency: &[Vec<u32>], node: u32) -> f64 {
    let nbrs = &adjacency[node as usize];
    if nbrs.is_empty() {
        return 0.0;
    }
    let sum: usize = nbrs.iter().map(|&nb| adjacency[nb as usize].len()).sum();
    sum as f64 / nbrs.len() as f64
}

/// Degree assortativity: Pearson correlation of the degrees at edge
/// endpoints, each edge counted in both orientations. Returns `(0, true)`
/// when the endpoint degrees have zero variance (e.g. regular graphs) or the
/// network has no edges.
pub fn assortativity(net: &MesoNetwork) -> (f64, bool) {
    if net.edge_count() == 0 {
        return (0.0, true);
    }
    let deg: Vec<i128> = degree_sequence(net).iter().map(|&d| d as i128).collect();
    let m = 2 * net.edge_count() as i128;
    let (mut sx, mut sxx, mut sxy) = (0i128, 0i128, 0i128);
    for e in net.edges() {
        let (du, dv) = (deg[e.i as usize], deg[e.j as usize]);
        sx += du + dv;
        sxx += du * du + dv * dv;
        sxy += 2 * du * dv;
    }
    // integer-exact Pearson: r = (m*Sxy - Sx^2) / (m*Sxx - Sx^2)
    let denom = m * sxx - sx * sx;
    if denom == 0 {
        return (0.0, true);
    }
    let num = m * sxy - sx * sx;
    (num as f64 / denom as f64, false)
}

/// Local clustering coefficient: edges among neighbors over `deg*(deg-1)/2`;
/// 0 when the degree is below 2.
pub fn clustering(adjacency: &[Vec<u32>], node: u32) -> f64 {
    let nbrs = &adjacency[node as usize];
    let deg = nbrs.len();
    if deg < 2 {
        return 0.0;
    }
    let mut links = 0usize;
    for (ix, &a) in nbrs.iter().enumerate() {
        for &b in &nbrs[ix + 1..] {
            if adjacency[a as usize].binary_search(&b).is_ok() {
                links += 1;
            }
        }
    }
    links as f64 / (deg * (deg - 1) / 2) as f64
}

/// Column names of the per-node measurements, in table order.
pub const PER_NODE_MEASURES: [&str; 11] = [
    "degree",
    "avg_neighbor_degree",
    "clustering",
    "accessibility_h2",
    "accessibility_h3",
    "symmetry_backbone_h2",
    "symmetry_backbone_h3",
    "symmetry_backbone_h4",
    "symmetry_merged_h2",
    "symmetry_merged_h3",
    "symmetry_merged_h4",
];

/// All measurements of one pruned network: one value per node per
/// measurement, plus the graph-level scalars.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeMeasureTable {
    pub node_count: usize,
    pub degree: Vec<f64>,
    pub avg_neighbor_degree: Vec<f64>,
    pub clustering: Vec<f64>,
    pub accessibility_h2: Vec<f64>,
    pub accessibility_h3: Vec<f64>,
    pub symmetry_backbone_h2: Vec<f64>,
    pub symmetry_backbone_h3: Vec<f64>,
    pub symmetry_backbone_h4: Vec<f64>,
    pub symmetry_merged_h2: Vec<f64>,
    pub symmetry_merged_h3: Vec<f64>,
    pub symmetry_merged_h4: Vec<f64>,
    /// True for nodes where some measurement fell back to 0 (isolated node or
    /// exhausted neighborhood).
    pub degenerate: Vec<bool>,
    pub assortativity: f64,
    pub assortativity_degenerate: bool,
    pub edge_count: usize,
    pub achieved_avg_degree: f64,
}

impl NodeMeasureTable {
    /// Per-node columns in [`PER_NODE_MEASURES`] order.
    pub fn per_node_columns(&self) -> [(&'static str, &[f64]); 11] {
        [
            ("degree", self.degree.as_slice()),
            ("avg_neighbor_degree", self.avg_neighbor_degree.as_slice()),
            ("clustering", self.clustering.as_slice()),
            ("accessibility_h2", self.accessibility_h2.as_slice()),
            ("accessibility_h3", self.accessibility_h3.as_slice()),
            ("symmetry_backbone_h2", self.symmetry_backbone_h2.as_slice()),
            ("symmetry_backbone_h3", self.symmetry_backbone_h3.as_slice()),
            ("symmetry_backbone_h4", self.symmetry_backbone_h4.as_slice()),
            ("symmetry_merged_h2", self.symmetry_merged_h2.as_slice()),
            ("symmetry_merged_h3", self.symmetry_merged_h3.as_slice()),
            ("symmetry_merged_h4", self.symmetry_merged_h4.as_slice()),
        ]
    }
}

struct NodeRow {
    avg_neighbor_degree: f64,
    clustering: f64,
    accessibility: [f64; 2],
    backbone: [f64; 3],
    merged: [f64; 3],
}

/// Compute every measurement of a pruned network. Node-level work runs in
/// parallel; results are identical to the sequential order.
pub fn measure_all(net: &MesoNetwork) -> NodeMeasureTable {
    let n = net.node_count();
    let adjacency = net.adjacency();
    let degree = degree_sequence(net);

    let rows: Vec<NodeRow> = (0..n as u32)
        .into_par_iter()
        .map(|v| NodeRow {
            avg_neighbor_degree: avg_neighbor_degree(&adjacency, v),
            clustering: clustering(&adjacency, v),
            accessibility: [
                accessibility(&adjacency, v, 2),
                accessibility(&adjacency, v, 3),
            ],
            backbone: symmetry_bundle(&adjacency, v, SymmetryVariant::Backbone),
            merged: symmetry_bundle(&adjacency, v, SymmetryVariant::Merged),
        })
        .collect();

    let (assort, assort_degenerate) = assortativity(net);
    let degenerate = rows
        .iter()
        .enumerate()
        .map(|(v, r)| {
            degree[v] == 0.0
                || r.accessibility.contains(&0.0)
                || r.backbone.contains(&0.0)
                || r.merged.contains(&0.0)
        })
        .collect();

    let column = |f: &dyn Fn(&NodeRow) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
    NodeMeasureTable {
        node_count: n,
        degree,
        avg_neighbor_degree: column(&|r| r.avg_neighbor_degree),
        clustering: column(&|r| r.clustering),
        accessibility_h2: column(&|r| r.accessibility[0]),
        accessibility_h3: column(&|r| r.accessibility[1]),
        symmetry_backbone_h2: column(&|r| r.backbone[0]),
        symmetry_backbone_h3: column(&|r| r.backbone[1]),
        symmetry_backbone_h4: column(&|r| r.backbone[2]),
        symmetry_merged_h2: column(&|r| r.merged[0]),
        symmetry_merged_h3: column(&|r| r.merged[1]),
        symmetry_merged_h4: column(&|r| r.merged[2]),
        degenerate,
        assortativity: assort,
        assortativity_degenerate: assort_degenerate,
        edge_count: net.edge_count(),
        achieved_avg_degree: net.average_degree(),
    }
}

const _: () = assert!(SYMMETRY_H.len() == 3);

/// Write the per-node table as CSV and the graph-level scalars as a
/// `key=value` sidecar.
pub fn write_table(table: &NodeMeasureTable, csv_path: &Path, scalars_path: &Path) -> Result<()> {
    let mut out = String::from("node");
    for name in PER_NODE_MEASURES {
        out.push(',');
        out.push_str(name);
    }
    out.push_str(",degenerate\n");
    let columns = table.per_node_columns();
    for v in 0..table.node_count {
        write!(out, "{v}").unwrap();
        for (_, col) in &columns {
            write!(out, ",{}", col[v]).unwrap();
        }
        writeln!(out, ",{}", table.degenerate[v]).unwrap();
    }
    std::fs::write(csv_path, out)?;

    let scalars = format!(
        "nodes={}\nedges={}\nachieved_avg_degree={}\nassortativity={}\nassortativity_degenerate={}\n",
        table.node_count,
        table.edge_count,
        table.achieved_avg_degree,
        table.assortativity,
        table.assortativity_degenerate
    );
    std::fs::write(scalars_path, scalars)?;
    Ok(())
}

/// Read a table written by [`write_table`].
pub fn read_table(csv_path: &Path, scalars_path: &Path) -> Result<NodeMeasureTable> {
    let parse_fail = |path: &Path, message: String| Error::MeasureParse {
        path: path.display().to_string(),
        message,
    };

    let file = std::fs::File::open(csv_path)?;
    let mut lines = std::io::BufReader::new(file).lines();
    let header = lines
        .next()
        .transpose()?
        .ok_or_else(|| parse_fail(csv_path, "empty file".into()))?;
    let mut expected = String::from("node");
    for name in PER_NODE_MEASURES {
        expected.push(',');
        expected.push_str(name);
    }
    expected.push_str(",degenerate");
    if header.trim() != expected {
        return Err(parse_fail(csv_path, format!("unexpected header `{header}`")));
    }

    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); PER_NODE_MEASURES.len()];
    let mut degenerate = Vec::new();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != PER_NODE_MEASURES.len() + 2 {
            return Err(parse_fail(csv_path, format!("bad row `{line}`")));
        }
        for (ix, field) in fields[1..=PER_NODE_MEASURES.len()].iter().enumerate() {
            columns[ix].push(
                field
                    .parse()
                    .map_err(|_| parse_fail(csv_path, format!("bad number `{field}`")))?,
            );
        }
        degenerate.push(fields[fields.len() - 1] == "true");
    }

    let mut scalars = std::collections::HashMap::new();
    for line in std::fs::read_to_string(scalars_path)?.lines() {
        if let Some((k, v)) = line.split_once('=') {
            scalars.insert(k.trim().to_string(), v.trim().to_string());
        }
    }
    let scalar = |key: &str| -> Result<String> {
        scalars
            .get(key)
            .cloned()
            .ok_or_else(|| parse_fail(scalars_path, format!("missing key `{key}`")))
    };

    let node_count = columns[0].len();
    let mut it = columns.into_iter();
    Ok(NodeMeasureTable {
        node_count,
        degree: it.next().unwrap(),
        avg_neighbor_degree: it.next().unwrap(),
        clustering: it.next().unwrap(),
        accessibility_h2: it.next().unwrap(),
        accessibility_h3: it.next().unwrap(),
        symmetry_backbone_h2: it.next().unwrap(),
        symmetry_backbone_h3: it.next().unwrap(),
        symmetry_backbone_h4: it.next().unwrap(),
        symmetry_merged_h2: it.next().unwrap(),
        symmetry_merged_h3: it.next().unwrap(),
        symmetry_merged_h4: it.next().unwrap(),
        degenerate,
        assortativity: scalar("assortativity")?
            .parse()
            .map_err(|_| parse_fail(scalars_path, "bad assortativity".into()))?,
        assortativity_degenerate: scalar("assortativity_degenerate")? == "true",
        edge_count: scalar("edges")?
            .parse()
            .map_err(|_| parse_fail(scalars_path, "bad edge count".into()))?,
        achieved_avg_degree: scalar("achieved_avg_degree")?
            .parse()
            .map_err(|_| parse_fail(scalars_path, "bad average degree".into()))?,
    })
}


#[cfg(test)]
mod tests {
    use super::*;
    use fixtures::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn aggregate_constant_and_symmetric() {
        let s = aggregate(&[5.0, 5.0, 5.0]).unwrap();
        assert_eq!((s.mean, s.std, s.skewness), (5.0, 0.0, 0.0));
        let s = aggregate(&[1.0, 2.0, 3.0]).unwrap();
        assert_relative_eq!(s.mean, 2.0);
        assert_relative_eq!(s.std, (2.0f64 / 3.0).sqrt(), epsilon = 1e-12);
        assert_relative_eq!(s.skewness, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn aggregate_right_skewed() {
        let s = aggregate(&[0.0, 0.0, 0.0, 4.0]).unwrap();
        assert!(s.skewness > 0.0);
    }

    #[test]
    fn aggregate_rejects_empty() {
        assert!(matches!(aggregate(&[]), Err(Error::EmptyValues)));
    }

    #[test]
    fn degree_stats_on_regular_and_star() {
        let s = degree_stats(&cycle(8));
        assert_eq!((s.std, s.skewness), (0.0, 0.0));

        // star K_{1,4}: degrees {4,1,1,1,1}
        let s = degree_stats(&star(4));
        assert_relative_eq!(s.mean, 1.6, epsilon = 1e-12);
        assert_relative_eq!(s.std, 1.2, epsilon = 1e-12);
        assert_relative_eq!(s.skewness, 1.5, epsilon = 1e-12);
    }

    #[test]
    fn avg_neighbor_degree_on_star_and_regular() {
        let net = star(4);
        let adj = net.adjacency();
        assert_relative_eq!(avg_neighbor_degree(&adj, 0), 1.0);
        assert_relative_eq!(avg_neighbor_degree(&adj, 1), 4.0);

        let net = cycle(6);
        let adj = net.adjacency();
        for v in 0..6 {
            assert_relative_eq!(avg_neighbor_degree(&adj, v), 2.0);
        }

        let isolated = MesoNetwork::from_edges(2, &[]);
        assert_eq!(avg_neighbor_degree(&isolated.adjacency(), 0), 0.0);
    }

    #[test]
    fn assortativity_star_is_minus_one() {
        for n in [3, 4, 7] {
            let (r, degenerate) = assortativity(&star(n));
            assert!(!degenerate);
            assert_relative_eq!(r, -1.0);
        }
    }

    #[test]
    fn assortativity_complete_is_degenerate() {
        let (r, degenerate) = assortativity(&complete(5));
        assert!(degenerate);
        assert_eq!(r, 0.0);
    }

    #[test]
    fn assortativity_matches_direct_pearson() {
        // oracle: plain-float Pearson over the 2E ordered endpoint pairs
        fn oracle(net: &MesoNetwork) -> Option<f64> {
            let deg = degree_sequence(net);
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            for e in net.edges() {
                xs.push(deg[e.i as usize]);
                ys.push(deg[e.j as usize]);
                xs.push(deg[e.j as usize]);
                ys.push(deg[e.i as usize]);
            }
            let m = xs.len() as f64;
            let mx = xs.iter().sum::<f64>() / m;
            let my = ys.iter().sum::<f64>() / m;
            let cov = xs
                .iter()
                .zip(&ys)
                .map(|(x, y)| (x - mx) * (y - my))
                .sum::<f64>();
            let vx = xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
            let vy = ys.iter().map(|y| (y - my).powi(2)).sum::<f64>();
            if vx == 0.0 || vy == 0.0 {
                return None;
            }
            Some(cov / (vx.sqrt() * vy.sqrt()))
        }

        let mut checked = 0;
        for seed in 0..40 {
            let net = random_graph(10, 0.35, seed);
            if net.edge_count() == 0 {
                continue;
            }
            let (got, degenerate) = assortativity(&net);
            match oracle(&net) {
                Some(expected) => {
                    assert!(!degenerate);
                    assert_relative_eq!(got, expected, epsilon = 1e-12);
                    checked += 1;
                }
                None => assert!(degenerate),
            }
            if checked >= 20 {
                break;
            }
        }
        assert!(checked >= 20);
    }

    #[test]
    fn clustering_basics() {
        let triangle = complete(3);
        let adj = triangle.adjacency();
        assert_relative_eq!(clustering(&adj, 0), 1.0);

        let p3 = path(3);
        let adj = p3.adjacency();
        assert_relative_eq!(clustering(&adj, 1), 0.0);

        let k5 = complete(5);
        let adj = k5.adjacency();
        for v in 0..5 {
            assert_relative_eq!(clustering(&adj, v), 1.0);
        }

        // degree < 2 convention
        assert_eq!(clustering(&p3.adjacency(), 0), 0.0);
    }

    #[test]
    fn measure_all_flags_isolated_nodes() {
        // one edge plus an isolated third node
        let net = MesoNetwork::from_edges(3, &[(0, 1)]);
        let table = measure_all(&net);
        assert!(table.degenerate[2]);
        assert_eq!(table.avg_neighbor_degree[2], 0.0);
        assert_eq!(table.accessibility_h2[2], 0.0);
        assert_eq!(table.symmetry_backbone_h2[2], 0.0);
    }

    #[test]
    fn table_round_trips_through_files() {
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("m.csv");
        let scalars = dir.path().join("m.scalars");
        let table = measure_all(&random_graph(9, 0.4, 3));
        write_table(&table, &csv, &scalars).unwrap();
        let back = read_table(&csv, &scalars).unwrap();
        assert_eq!(back, table);
    }

    #[test]
    fn measurements_are_relabeling_invariant() {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        for seed in 0..5 {
            let net = random_graph(12, 0.3, seed);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed + 100);
            let mut perm: Vec<u32> = (0..12).collect();
            perm.shuffle(&mut rng);
            let relabeled_pairs: Vec<(u32, u32)> = net
                .edges()
                .iter()
                .map(|e| (perm[e.i as usize], perm[e.j as usize]))
                .collect();
            let relabeled = MesoNetwork::from_edges(12, &relabeled_pairs);

            let a = measure_all(&net);
            let b = measure_all(&relabeled);
            assert_relative_eq!(a.assortativity, b.assortativity, epsilon = 1e-9);
            for (name, col) in a.per_node_columns() {
                let other = b
                    .per_node_columns()
                    .iter()
                    .find(|(n, _)| *n == name)
                    .unwrap()
                    .1
                    .to_vec();
                for v in 0..12 {
                    assert_relative_eq!(
                        col[v],
                        other[perm[v] as usize],
                        epsilon = 1e-9,
                        max_relative = 1e-9
                    );
                }
            }
        }
    }

    proptest! {
        /// aggregate matches an independently written moment computation.
        #[test]
        fn aggregate_matches_brute_force(
            values in proptest::collection::vec(-1000.0f64..1000.0, 1..1000)
        ) {
            let s = aggregate(&values).unwrap();
            let n = values.len() as f64;
            let mean: f64 = values.iter().copied().sum::<f64>() / n;
            let central = |p: i32| values.iter().map(|v| (v - mean).powi(p)).sum::<f64>() / n;
            let std = central(2).sqrt();
            let skew = if std == 0.0 { 0.0 } else { central(3) / std.powi(3) };
            prop_assert!((s.mean - mean).abs() <= 1e-12 * mean.abs().max(1.0));
            prop_assert!((s.std - std).abs() <= 1e-12 * std.abs().max(1.0));
            prop_assert!((s.skewness - skew).abs() <= 1e-12 * skew.abs().max(1.0));
        }
    }
}
