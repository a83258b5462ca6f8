//! Force-directed embedding and SVG rendering of mesoscopic networks.
//!
//! The simulation applies three forces per step: repulsion `f_r / d^2`
//! between all node pairs, attraction `f_a * d^2` along edges, and gravity
//! `f_g * d` toward the centroid. Per-step displacement is capped by a
//! temperature that decays geometrically. Rendering colors nodes on a
//! blue-to-green gradient by window index, so narrative order is visible in
//! the drawing.

use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;

use crate::mesonet::MesoNetwork;
use crate::rng::substream;
use crate::{Error, Result};

/// Distances are floored at this value to keep forces finite.
const EPSILON: f64 = 1e-9;
/// Displacement cap at the first step, in layout units.
const INITIAL_TEMPERATURE: f64 = 1.0;

#[derive(Debug, Clone, Copy)]
pub struct LayoutConfig {
    /// Attractive-force coefficient along edges.
    pub f_a: f64,
    /// Repulsive-force coefficient between all pairs.
    pub f_r: f64,
    /// Gravity coefficient toward the centroid.
    pub f_g: f64,
    pub iterations: usize,
    pub seed: u64,
    /// Per-step temperature decay factor.
    pub cooling: f64,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        LayoutConfig {
            f_a: 0.0002,
            f_r: 1.25,
            f_g: 0.001,
            iterations: 1000,
            seed: 0,
            cooling: 0.995,
        }
    }
}

/// Node positions in the plane.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub coords: Vec<[f64; 2]>,
}

/// Run the force simulation from random initial positions in the unit
/// square, seeded from the config. Deterministic given `(net, config)`.
pub fn fr_layout(net: &MesoNetwork, config: &LayoutConfig) -> Embedding {
    let mut rng = substream(config.seed, "layout-init", &[]);
    let initial: Vec<[f64; 2]> = (0..net.node_count())
        .map(|_| [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)])
        .collect();
    fr_layout_from(net, config, initial)
}

/// Run the force simulation from caller-supplied initial positions.
pub fn fr_layout_from(
    net: &MesoNetwork,
    config: &LayoutConfig,
    initial: Vec<[f64; 2]>,
) -> Embedding {
    assert_eq!(initial.len(), net.node_count());
    let n = net.node_count();
    let adjacency = net.adjacency();
    let mut pos = initial;
    let mut temperature = INITIAL_TEMPERATURE;

    for _ in 0..config.iterations {
        let centroid = {
            let mut c = [0.0f64; 2];
            for p in &pos {
                c[0] += p[0];
                c[1] += p[1];
            }
            [c[0] / n as f64, c[1] / n as f64]
        };

        // Double-buffered update: forces are computed against the current
        // positions only, so per-node work can run in any order.
        let forces: Vec<[f64; 2]> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut f = [0.0f64; 2];
                // repulsion from every other node
                for j in 0..n {
                    if j == i {
                        continue;
                    }
                    let dx = pos[i][0] - pos[j][0];
                    let dy = pos[i][1] - pos[j][1];
                    let d = (dx * dx + dy * dy).sqrt().max(EPSILON);
                    let magnitude = config.f_r / (d * d);
                    f[0] += dx / d * magnitude;
                    f[1] += dy / d * magnitude;
                }
                // attraction along incident edges
                for &nb in &adjacency[i] {
                    let dx = pos[nb as usize][0] - pos[i][0];
                    let dy = pos[nb as usize][1] - pos[i][1];
                    let d = (dx * dx + dy * dy).sqrt().max(EPSILON);
                    let magnitude = config.f_a * d * d;
                    f[0] += dx / d * magnitude;
                    f[1] += dy / d * magnitude;
                }
                // gravity toward the centroid: f_g * d along the unit vector
                f[0] += config.f_g * (centroid[0] - pos[i][0]);
                f[1] += config.f_g * (centroid[1] - pos[i][1]);
                f
            })
            .collect();

        for (p, f) in pos.iter_mut().zip(&forces) {
            let magnitude = (f[0] * f[0] + f[1] * f[1]).sqrt();
            if magnitude > 0.0 {
                let step = magnitude.min(temperature);
                p[0] += f[0] / magnitude * step;
                p[1] += f[1] / magnitude * step;
            }
        }
        temperature *= config.cooling;
    }
    Embedding { coords: pos }
}

fn gradient_color(ix: usize, n: usize) -> String {
    // bluish for early windows, greenish for late ones
    let t = if n <= 1 { 0.0 } else { ix as f64 / (n - 1) as f64 };
    let lerp = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    format!(
        "#{:02x}{:02x}{:02x}",
        lerp(43.0, 56.0),
        lerp(108.0, 161.0),
        lerp(176.0, 105.0)
    )
}

/// Render the network as an SVG document. Nodes are circles colored by
/// window order (legend endpoints `1` and `N`); the viewport fits the
/// embedding with a 5% margin. Output bytes are deterministic.
pub fn render_svg(net: &MesoNetwork, embedding: &Embedding) -> Result<String> {
    let n = net.node_count();
    if embedding.coords.len() < n {
        return Err(Error::MissingCoordinates {
            node: embedding.coords.len(),
        });
    }
    let xs = embedding.coords.iter().map(|c| c[0]);
    let ys = embedding.coords.iter().map(|c| c[1]);
    let (min_x, max_x) = (xs.clone().fold(f64::INFINITY, f64::min), xs.fold(f64::NEG_INFINITY, f64::max));
    let (min_y, max_y) = (ys.clone().fold(f64::INFINITY, f64::min), ys.fold(f64::NEG_INFINITY, f64::max));
    let span_x = (max_x - min_x).max(EPSILON);
    let span_y = (max_y - min_y).max(EPSILON);
    let margin_x = span_x * 0.05;
    let margin_y = span_y * 0.05;

    // map into a fixed 1000-unit canvas preserving aspect ratio
    let scale = 1000.0 / (span_x + 2.0 * margin_x).max(span_y + 2.0 * margin_y);
    let width = (span_x + 2.0 * margin_x) * scale;
    let height = (span_y + 2.0 * margin_y) * scale;
    let map = |c: &[f64; 2]| {
        [
            (c[0] - min_x + margin_x) * scale,
            (c[1] - min_y + margin_y) * scale,
        ]
    };
    let radius = 0.008 * width.max(height);

    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.1}" height="{:.1}" viewBox="0 0 {width:.1} {:.1}">"#,
        height + 60.0,
        height + 60.0,
    )
    .unwrap();
    writeln!(svg, r#"  <rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(svg, r##"  <g stroke="#b0b0b0" stroke-width="0.5" stroke-opacity="0.6">"##).unwrap();
    for e in net.edges() {
        let a = map(&embedding.coords[e.i as usize]);
        let b = map(&embedding.coords[e.j as usize]);
        writeln!(
            svg,
            r#"    <line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}"/>"#,
            a[0], a[1], b[0], b[1]
        )
        .unwrap();
    }
    writeln!(svg, "  </g>").unwrap();
    for (ix, c) in embedding.coords.iter().take(n).enumerate() {
        let p = map(c);
        writeln!(
            svg,
            r#"  <circle cx="{:.3}" cy="{:.3}" r="{radius:.3}" fill="{}"/>"#,
            p[0],
            p[1],
            gradient_color(ix, n)
        )
        .unwrap();
    }
    // legend: window-order gradient with endpoints 1 and N
    writeln!(
        svg,
        r#"  <defs><linearGradient id="order"><stop offset="0%" stop-color="{}"/><stop offset="100%" stop-color="{}"/></linearGradient></defs>"#,
        gradient_color(0, n),
        gradient_color(n.saturating_sub(1), n)
    )
    .unwrap();
    let legend_y = height + 20.0;
    writeln!(
        svg,
        r#"  <rect x="10" y="{legend_y:.1}" width="120" height="12" fill="url(#order)"/>"#
    )
    .unwrap();
    writeln!(
        svg,
        r#"  <text x="10" y="{:.1}" font-size="12" font-family="sans-serif">1</text>"#,
        legend_y + 26.0
    )
    .unwrap();
    writeln!(
        svg,
        r#"  <text x="130" y="{:.1}" font-size="12" font-family="sans-serif" text-anchor="end">N = {n}</text>"#,
        legend_y + 26.0
    )
    .unwrap();
    writeln!(svg, "</svg>").unwrap();
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesonet::MesoNetwork;

    fn two_nodes() -> MesoNetwork {
        MesoNetwork::from_edges(2, &[(0, 1)])
    }

    #[test]
    fn single_node_stays_put() {
        let net = MesoNetwork::from_edges(1, &[]);
        let config = LayoutConfig {
            iterations: 50,
            ..LayoutConfig::default()
        };
        let embedding = fr_layout_from(&net, &config, vec![[0.3, 0.7]]);
        assert_eq!(embedding.coords, vec![[0.3, 0.7]]);
    }

    #[test]
    fn connected_pair_settles_at_force_balance() {
        // 1-D force balance along the segment between both nodes:
        // f_r/d^2 = f_a*d^2 + f_g*(d/2), solved by bisection
        let config = LayoutConfig {
            iterations: 4000,
            cooling: 0.999,
            ..LayoutConfig::default()
        };
        let net_force = |d: f64| config.f_r / (d * d) - config.f_a * d * d - config.f_g * d / 2.0;
        let (mut lo, mut hi) = (0.1f64, 100.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if net_force(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let expected = 0.5 * (lo + hi);

        let embedding = fr_layout(&two_nodes(), &config);
        let dx = embedding.coords[0][0] - embedding.coords[1][0];
        let dy = embedding.coords[0][1] - embedding.coords[1][1];
        let d = (dx * dx + dy * dy).sqrt();
        assert!(
            (d - expected).abs() / expected < 0.05,
            "settled at {d}, expected {expected}"
        );
    }

    #[test]
    fn layout_is_deterministic() {
        let net = MesoNetwork::from_edges(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)]);
        let config = LayoutConfig {
            iterations: 120,
            seed: 9,
            ..LayoutConfig::default()
        };
        let a = fr_layout(&net, &config);
        let b = fr_layout(&net, &config);
        assert_eq!(a, b);
    }

    #[test]
    fn translation_equivariance() {
        let net = MesoNetwork::from_edges(4, &[(0, 1), (1, 2), (2, 3)]);
        let config = LayoutConfig {
            iterations: 80,
            ..LayoutConfig::default()
        };
        let initial = vec![[0.1, 0.2], [0.4, 0.9], [0.8, 0.3], [0.5, 0.5]];
        let shift = [13.0, -4.5];
        let shifted: Vec<[f64; 2]> = initial
            .iter()
            .map(|p| [p[0] + shift[0], p[1] + shift[1]])
            .collect();
        let a = fr_layout_from(&net, &config, initial);
        let b = fr_layout_from(&net, &config, shifted);
        for (pa, pb) in a.coords.iter().zip(&b.coords) {
            assert!((pa[0] + shift[0] - pb[0]).abs() < 1e-6);
            assert!((pa[1] + shift[1] - pb[1]).abs() < 1e-6);
        }
    }

    #[test]
    fn displacement_settles_in_final_stretch() {
        let net = MesoNetwork::from_edges(8, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (0, 7)]);
        let total = 600;
        let config = LayoutConfig {
            iterations: total,
            seed: 2,
            ..LayoutConfig::default()
        };
        // displacement between consecutive steps over the final 10%
        let mut base = LayoutConfig { iterations: (total * 9) / 10, ..config };
        let mut embedding = fr_layout(&net, &base);
        base.iterations = 1;
        let mut previous = f64::INFINITY;
        let mut violations = 0;
        let mut temperature_at = INITIAL_TEMPERATURE * config.cooling.powi(((total * 9) / 10) as i32);
        for _ in 0..total / 10 {
            let next = fr_layout_from(&net, &base, embedding.coords.clone());
            let moved: f64 = embedding
                .coords
                .iter()
                .zip(&next.coords)
                .map(|(a, b)| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt())
                .sum();
            // the temperature cap shrinks monotonically, so sustained growth
            // would mean the simulation is not settling
            if moved > previous + temperature_at * 0.5 {
                violations += 1;
            }
            previous = moved;
            temperature_at *= config.cooling;
            embedding = next;
        }
        assert!(violations <= 2, "{violations} displacement increases");
    }

    #[test]
    fn chain_spreads_wider_than_complete_graph() {
        let n = 24u32;
        let chain_pairs: Vec<(u32, u32)> = (0..n - 1).map(|i| (i, i + 1)).collect();
        let chain = MesoNetwork::from_edges(n as usize, &chain_pairs);
        let mut complete_pairs = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                complete_pairs.push((i, j));
            }
        }
        let complete = MesoNetwork::from_edges(n as usize, &complete_pairs);
        let config = LayoutConfig {
            iterations: 1500,
            seed: 4,
            cooling: 0.997,
            ..LayoutConfig::default()
        };
        let diameter = |e: &Embedding| -> f64 {
            let mut d = 0.0f64;
            for a in &e.coords {
                for b in &e.coords {
                    let dist = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
                    d = d.max(dist);
                }
            }
            d
        };
        let chain_diameter = diameter(&fr_layout(&chain, &config));
        let complete_diameter = diameter(&fr_layout(&complete, &config));
        assert!(
            chain_diameter > complete_diameter,
            "chain {chain_diameter} vs complete {complete_diameter}"
        );
    }

    #[test]
    fn svg_has_expected_elements_and_is_stable() {
        let net = MesoNetwork::from_edges(3, &[(0, 1), (1, 2)]);
        let config = LayoutConfig {
            iterations: 60,
            ..LayoutConfig::default()
        };
        let embedding = fr_layout(&net, &config);
        let svg = render_svg(&net, &embedding).unwrap();
        assert_eq!(svg.matches("<line ").count(), 2);
        assert_eq!(svg.matches("<circle ").count(), 3);
        assert!(svg.contains(&format!(r#"fill="{}""#, gradient_color(0, 3))));
        assert!(svg.contains(&format!(r#"fill="{}""#, gradient_color(2, 3))));
        assert!(svg.contains("N = 3"));
        assert_eq!(svg, render_svg(&net, &embedding).unwrap());
    }

    #[test]
    fn svg_rejects_missing_coordinates() {
        let net = MesoNetwork::from_edges(3, &[(0, 1)]);
        let embedding = Embedding {
            coords: vec![[0.0, 0.0], [1.0, 1.0]],
        };
        assert!(matches!(
            render_svg(&net, &embedding),
            Err(Error::MissingCoordinates { node: 2 })
        ));
    }
}
