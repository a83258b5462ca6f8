//! Principal component analysis via a cyclic Jacobi eigensolver, plus the
//! silhouette score used to judge projected cluster separation.

use crate::{Error, Result};

/// PCA output: projected coordinates, the component loadings, and the share
/// of variance each component explains.
#[derive(Debug, Clone)]
pub struct PcaResult {
    /// One row per input row, `n_components` columns.
    pub projection: Vec<Vec<f64>>,
    /// One loading vector (length = feature count) per component.
    pub components: Vec<Vec<f64>>,
    /// Fraction of total variance per component, non-increasing.
    pub explained_variance_ratio: Vec<f64>,
}

/// Project rows onto the top `n_components` eigenvectors of the covariance
/// matrix. Components are ordered by descending eigenvalue; each component's
/// sign is fixed so its largest-magnitude loading is positive.
pub fn pca(x: &[Vec<f64>], n_components: usize) -> Result<PcaResult> {
    let rows = x.len();
    if rows < 2 {
        return Err(Error::TooFewRows { have: rows });
    }
    let cols = x[0].len();
    let max = (rows - 1).min(cols);
    if n_components > max {
        return Err(Error::TooManyComponents {
            requested: n_components,
            max,
        });
    }

    // center columns and form the population covariance matrix
    let means: Vec<f64> = (0..cols)
        .map(|c| x.iter().map(|r| r[c]).sum::<f64>() / rows as f64)
        .collect();
    let centered: Vec<Vec<f64>> = x
        .iter()
        .map(|r| r.iter().zip(&means).map(|(v, m)| v - m).collect())
        .collect();
    let mut cov = vec![vec![0.0f64; cols]; cols];
    for row in &centered {
        for a in 0..cols {
            for b in a..cols {
                cov[a][b] += row[a] * row[b];
            }
        }
    }
    for a in 0..cols {
        for b in a..cols {
            cov[a][b] /= rows as f64;
            cov[b][a] = cov[a][b];
        }
    }

    let (eigenvalues, eigenvectors) = jacobi_eigen(cov);
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&a, &b| eigenvalues[b].partial_cmp(&eigenvalues[a]).unwrap());

    let total: f64 = eigenvalues.iter().map(|&l| l.max(0.0)).sum();
    let mut components = Vec::with_capacity(n_components);
    let mut ratios = Vec::with_capacity(n_components);
    for &ix in order.iter().take(n_components) {
        let mut component: Vec<f64> = (0..cols).map(|r| eigenvectors[r][ix]).collect();
        // sign convention: largest-magnitude loading positive
        let lead = component
            .iter()
            .enumerate()
            .max_by(|(ia, a), (ib, b)| {
                a.abs()
                    .partial_cmp(&b.abs())
                    .unwrap()
                    .then(ib.cmp(ia))
            })
            .map(|(i, _)| i)
            .unwrap();
        if component[lead] < 0.0 {
            for v in &mut component {
                *v = -*v;
            }
        }
        components.push(component);
        ratios.push(if total == 0.0 {
            0.0
        } else {
            eigenvalues[ix].max(0.0) / total
        });
    }

    let projection = centered
        .iter()
        .map(|row| {
            components
                .iter()
                .map(|comp| row.iter().zip(comp).map(|(r, c)| r * c).sum())
                .collect()
        })
        .collect();
    Ok(PcaResult {
        projection,
        components,
        explained_variance_ratio: ratios,
    })
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns `(eigenvalues, eigenvectors)` with eigenvectors as columns.
fn jacobi_eigen(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut v = vec![vec![0.0f64; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let frobenius: f64 = a
        .iter()
        .flatten()
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt()
        .max(f64::MIN_POSITIVE);

    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                off += a[p][q] * a[p][q];
            }
        }
        if off.sqrt() <= 1e-14 * frobenius {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in &mut v {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let eigenvalues: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    (eigenvalues, v)
}

/// Mean silhouette coefficient of labeled points under Euclidean distance.
/// Points in singleton clusters score 0.
pub fn silhouette_score(points: &[Vec<f64>], labels: &[String]) -> f64 {
    assert_eq!(points.len(), labels.len());
    let n = points.len();
    if n == 0 {
        return 0.0;
    }
    let mut cluster_names: Vec<&String> = labels.iter().collect();
    cluster_names.sort();
    cluster_names.dedup();

    let dist = |a: &[f64], b: &[f64]| -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    };

    let mut total = 0.0;
    for i in 0..n {
        let own = &labels[i];
        let own_size = labels.iter().filter(|l| *l == own).count();
        if own_size <= 1 {
            continue; // silhouette 0
        }
        let a: f64 = (0..n)
            .filter(|&j| j != i && &labels[j] == own)
            .map(|j| dist(&points[i], &points[j]))
            .sum::<f64>()
            / (own_size - 1) as f64;
        let b = cluster_names
            .iter()
            .filter(|&&name| name != own)
            .map(|&name| {
                let members: Vec<usize> =
                    (0..n).filter(|&j| &labels[j] == name).collect();
                members
                    .iter()
                    .map(|&j| dist(&points[i], &points[j]))
                    .sum::<f64>()
                    / members.len() as f64
            })
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        if denom > 0.0 {
            total += (b - a) / denom;
        }
    }
    total / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn collinear_points_put_all_variance_first() {
        let x: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64, 2.0 * i as f64]).collect();
        let result = pca(&x, 2).unwrap();
        assert_relative_eq!(result.explained_variance_ratio[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(result.explained_variance_ratio[1], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn rotation_preserves_variance_ratios() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let x: Vec<Vec<f64>> = (0..12)
            .map(|_| (0..2).map(|_| rng.gen_range(-2.0..2.0)).collect())
            .collect();
        let angle = 0.83f64;
        let rotated: Vec<Vec<f64>> = x
            .iter()
            .map(|r| {
                vec![
                    angle.cos() * r[0] - angle.sin() * r[1],
                    angle.sin() * r[0] + angle.cos() * r[1],
                ]
            })
            .collect();
        let a = pca(&x, 2).unwrap();
        let b = pca(&rotated, 2).unwrap();
        for (ra, rb) in a
            .explained_variance_ratio
            .iter()
            .zip(&b.explained_variance_ratio)
        {
            assert_relative_eq!(ra, rb, epsilon = 1e-9);
        }
    }

    #[test]
    fn ratios_sum_below_one_and_non_increasing() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let x: Vec<Vec<f64>> = (0..10)
            .map(|_| (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let result = pca(&x, 3).unwrap();
        let ratios = &result.explained_variance_ratio;
        assert!(ratios.iter().sum::<f64>() <= 1.0 + 1e-12);
        for pair in ratios.windows(2) {
            assert!(pair[0] >= pair[1] - 1e-12);
        }
    }

    #[test]
    fn component_limit_is_enforced() {
        let x = vec![vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]];
        // rows - 1 = 1 component available
        assert!(pca(&x, 1).is_ok());
        assert!(matches!(
            pca(&x, 2),
            Err(Error::TooManyComponents { requested: 2, max: 1 })
        ));
        assert!(matches!(
            pca(&[vec![1.0]], 1),
            Err(Error::TooFewRows { have: 1 })
        ));
    }

    #[test]
    fn matches_dense_eigensolver_oracle() {
        use nalgebra::DMatrix;
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let (rows, cols) = (10, 5);
        let x: Vec<Vec<f64>> = (0..rows)
            .map(|_| (0..cols).map(|_| rng.gen_range(-3.0..3.0)).collect())
            .collect();
        let result = pca(&x, 3).unwrap();

        // oracle: center, covariance, nalgebra symmetric eigen, same sign
        // convention
        let means: Vec<f64> = (0..cols)
            .map(|c| x.iter().map(|r| r[c]).sum::<f64>() / rows as f64)
            .collect();
        let centered = DMatrix::from_fn(rows, cols, |r, c| x[r][c] - means[c]);
        let cov = centered.transpose() * &centered / rows as f64;
        let eigen = cov.symmetric_eigen();
        let mut order: Vec<usize> = (0..cols).collect();
        order.sort_by(|&a, &b| {
            eigen.eigenvalues[b]
                .partial_cmp(&eigen.eigenvalues[a])
                .unwrap()
        });
        let total: f64 = eigen.eigenvalues.iter().map(|&l| l.max(0.0)).sum();
        for (cx, &ix) in order.iter().take(3).enumerate() {
            let mut comp: Vec<f64> = eigen.eigenvectors.column(ix).iter().copied().collect();
            let lead = comp
                .iter()
                .enumerate()
                .max_by(|(ia, a), (ib, b)| {
                    a.abs().partial_cmp(&b.abs()).unwrap().then(ib.cmp(ia))
                })
                .unwrap()
                .0;
            if comp[lead] < 0.0 {
                comp.iter_mut().for_each(|v| *v = -*v);
            }
            for (got, want) in result.components[cx].iter().zip(&comp) {
                assert_relative_eq!(got, want, epsilon = 1e-8);
            }
            assert_relative_eq!(
                result.explained_variance_ratio[cx],
                eigen.eigenvalues[ix].max(0.0) / total,
                epsilon = 1e-8
            );
            for (r, row) in centered.row_iter().enumerate() {
                let want: f64 = row.iter().zip(&comp).map(|(a, b)| a * b).sum();
                assert_relative_eq!(result.projection[r][cx], want, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn silhouette_separates_obvious_clusters() {
        let mut points = Vec::new();
        let mut labels = Vec::new();
        for i in 0..5 {
            points.push(vec![0.0 + 0.01 * i as f64, 0.0]);
            labels.push("a".to_string());
            points.push(vec![10.0 + 0.01 * i as f64, 0.0]);
            labels.push("b".to_string());
        }
        assert!(silhouette_score(&points, &labels) > 0.9);

        // random labels on one blob: near zero or negative
        let mixed: Vec<String> = (0..10)
            .map(|i| if i % 2 == 0 { "a" } else { "b" })
            .map(str::to_string)
            .collect();
        let blob: Vec<Vec<f64>> = (0..10).map(|i| vec![0.1 * i as f64, 0.0]).collect();
        assert!(silhouette_score(&blob, &mixed) < 0.5);
    }
}
