//! Concentric-level measurements: self-avoiding-walk accessibility and
//! neighborhood symmetry.
//!
//! Level `h` around a node is the set of nodes at shortest-path distance
//! exactly `h`. Accessibility enumerates every self-avoiding walk of exactly
//! `h` steps and takes the exponential entropy of the endpoint distribution.
//! Symmetry runs an outward level-to-level walk on a transformed neighborhood
//! pattern and normalizes the exponential entropy by the number of possible
//! outcomes, landing in `(0, 1]`.

use std::collections::VecDeque;

/// Symmetry values are computed for these concentric depths.
pub const SYMMETRY_H: [usize; 3] = [2, 3, 4];

/// Nodes grouped by shortest-path distance `0..=h_max` from `node`.
/// Levels beyond the component (or graph) are empty; each level is sorted.
pub fn concentric_levels(adjacency: &[Vec<u32>], node: u32, h_max: usize) -> Vec<Vec<u32>> {
    let mut dist: Vec<i32> = vec![-1; adjacency.len()];
    let mut levels: Vec<Vec<u32>> = vec![Vec::new(); h_max + 1];
    dist[node as usize] = 0;
    levels[0].push(node);
    let mut queue = VecDeque::from([node]);
    while let Some(v) = queue.pop_front() {
        let d = dist[v as usize];
        if d as usize == h_max {
            continue;
        }
        for &nb in &adjacency[v as usize] {
            if dist[nb as usize] < 0 {
                dist[nb as usize] = d + 1;
                levels[(d + 1) as usize].push(nb);
                queue.push_back(nb);
            }
        }
    }
    for level in &mut levels {
        level.sort_unstable();
    }
    levels
}

/// Self-avoiding-walk accessibility at depth `h`.
///
/// All walks of exactly `h` steps from `node` are enumerated; at each step
/// the walker picks uniformly among unvisited neighbors. Walks that dead-end
/// early are discarded and the endpoint distribution renormalized over
/// completed walks. Returns `exp(entropy)`, or 0 when no walk completes.
pub fn accessibility(adjacency: &[Vec<u32>], node: u32, h: usize) -> f64 {
    assert!(h >= 1, "accessibility needs h >= 1");
    let n = adjacency.len();
    let mut visited = vec![false; n];
    let mut mass = vec![0.0f64; n];
    let mut endpoints: Vec<u32> = Vec::new();
    visited[node as usize] = true;
    saw_walk(
        adjacency,
        node,
        h,
        1.0,
        &mut visited,
        &mut mass,
        &mut endpoints,
    );
    let total: f64 = endpoints.iter().map(|&e| mass[e as usize]).sum();
    if total == 0.0 {
        return 0.0;
    }
    endpoints.sort_unstable();
    let mut entropy = 0.0;
    for &e in &endpoints {
        let p = mass[e as usize] / total;
        entropy -= p * p.ln();
    }
    entropy.exp()
}

fn saw_walk(
    adjacency: &[Vec<u32>],
    node: u32,
    remaining: usize,
    prob: f64,
    visited: &mut [bool],
    mass: &mut [f64],
    endpoints: &mut Vec<u32>,
) {
    if remaining == 0 {
        if mass[node as usize] == 0.0 {
            endpoints.push(node);
        }
        mass[node as usize] += prob;
        return;
    }
    let avail = adjacency[node as usize]
        .iter()
        .filter(|&&nb| !visited[nb as usize])
        .count();
    if avail == 0 {
        return; // dead end: mass discarded
    }
    let share = prob / avail as f64;
    for &nb in &adjacency[node as usize] {
        if !visited[nb as usize] {
            visited[nb as usize] = true;
            saw_walk(adjacency, nb, remaining - 1, share, visited, mass, endpoints);
            visited[nb as usize] = false;
        }
    }
}

/// Neighborhood transformation applied before the symmetry walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymmetryVariant {
    /// Edges between nodes of the same concentric level are discarded.
    Backbone,
    /// Connected components within each level are contracted to single
    /// nodes; edges to other levels are preserved with parallels collapsed.
    Merged,
}

/// The transformed neighborhood as a level-layered pattern. `outs[l][p]`
/// holds the indices (into level `l + 1`) that pattern node `p` links to.
struct LevelPattern {
    level_sizes: Vec<usize>,
    outs: Vec<Vec<Vec<u32>>>,
}

fn build_pattern(
    adjacency: &[Vec<u32>],
    levels: &[Vec<u32>],
    variant: SymmetryVariant,
) -> LevelPattern {
    let n = adjacency.len();
    // level and pattern-node index per original node (usize::MAX = outside)
    let mut level_of = vec![usize::MAX; n];
    for (l, nodes) in levels.iter().enumerate() {
        for &v in nodes {
            level_of[v as usize] = l;
        }
    }

    let mut pattern_ix = vec![u32::MAX; n];
    let mut level_sizes = Vec::with_capacity(levels.len());
    match variant {
        SymmetryVariant::Backbone => {
            for nodes in levels {
                for (ix, &v) in nodes.iter().enumerate() {
                    pattern_ix[v as usize] = ix as u32;
                }
                level_sizes.push(nodes.len());
            }
        }
        SymmetryVariant::Merged => {
            // contract connected components of intra-level edges, component
            // ids assigned in order of the smallest member
            for (l, nodes) in levels.iter().enumerate() {
                let mut comps = 0u32;
                for &v in nodes {
                    if pattern_ix[v as usize] != u32::MAX {
                        continue;
                    }
                    let comp = comps;
                    comps += 1;
                    let mut stack = vec![v];
                    pattern_ix[v as usize] = comp;
                    while let Some(u) = stack.pop() {
                        for &nb in &adjacency[u as usize] {
                            if level_of[nb as usize] == l && pattern_ix[nb as usize] == u32::MAX {
                                pattern_ix[nb as usize] = comp;
                                stack.push(nb);
                            }
                        }
                    }
                }
                level_sizes.push(comps as usize);
            }
        }
    }

    let mut outs: Vec<Vec<Vec<u32>>> = level_sizes
        .iter()
        .map(|&size| vec![Vec::new(); size])
        .collect();
    for (l, nodes) in levels.iter().enumerate() {
        if l + 1 >= levels.len() {
            break;
        }
        for &v in nodes {
            let p = pattern_ix[v as usize] as usize;
            for &nb in &adjacency[v as usize] {
                if level_of[nb as usize] == l + 1 {
                    outs[l][p].push(pattern_ix[nb as usize]);
                }
            }
        }
        for links in &mut outs[l] {
            links.sort_unstable();
            links.dedup();
        }
    }
    LevelPattern { level_sizes, outs }
}

/// Concentric symmetry of the neighborhood of `node` at depth `h`.
///
/// Unit probability starts at the node and splits uniformly over each
/// pattern node's links to the next level; pattern nodes without outward
/// links absorb their mass as dead ends. The outcome distribution consists
/// of the level-`h` masses plus one mass per dead end; the result is
/// `exp(entropy) / (level-h outcomes + dead ends)`, or 0 when there are no
/// outcomes at all (isolated node).
pub fn symmetry(adjacency: &[Vec<u32>], node: u32, h: usize, variant: SymmetryVariant) -> f64 {
    assert!(h >= 1, "symmetry needs h >= 1");
    let levels = concentric_levels(adjacency, node, h);
    let pattern = build_pattern(adjacency, &levels, variant);
    propagate(&pattern, h)
}

/// Symmetry at every depth in [`SYMMETRY_H`], sharing one BFS and pattern.
pub(crate) fn symmetry_bundle(
    adjacency: &[Vec<u32>],
    node: u32,
    variant: SymmetryVariant,
) -> [f64; 3] {
    let h_max = SYMMETRY_H[SYMMETRY_H.len() - 1];
    let levels = concentric_levels(adjacency, node, h_max);
    let pattern = build_pattern(adjacency, &levels, variant);
    SYMMETRY_H.map(|h| propagate(&pattern, h))
}

fn propagate(pattern: &LevelPattern, h: usize) -> f64 {
    if pattern.level_sizes.len() <= 1 || pattern.level_sizes[1] == 0 {
        return 0.0;
    }
    let mut outcomes: Vec<f64> = Vec::new();
    let mut dead_ends = 0usize;
    let mut mass = vec![1.0f64];
    for l in 0..h {
        let next_size = pattern.level_sizes.get(l + 1).copied().unwrap_or(0);
        let mut next = vec![0.0f64; next_size];
        for (p, &m) in mass.iter().enumerate() {
            let links = &pattern.outs[l][p];
            if links.is_empty() {
                dead_ends += 1;
                outcomes.push(m);
            } else {
                let share = m / links.len() as f64;
                for &target in links {
                    next[target as usize] += share;
                }
            }
        }
        mass = next;
        if mass.is_empty() {
            break;
        }
    }
    let reached = mass.len();
    outcomes.extend(mass);
    if outcomes.is_empty() {
        return 0.0;
    }
    let total: f64 = outcomes.iter().sum();
    let mut entropy = 0.0;
    for &m in &outcomes {
        let p = m / total;
        entropy -= p * p.ln();
    }
    entropy.exp() / (reached + dead_ends) as f64
}
