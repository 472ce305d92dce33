//! Planar point sets: nearest neighbours, Hausdorff distances, separations and clusters.

use kiddo::{ImmutableKdTree, SquaredEuclidean};
use num_complex::Complex64;
use rayon::prelude::*;

/// A point set with a KD-tree for nearest-neighbour queries.
pub struct PointSet {
    pub points: Vec<Complex64>,
    tree: ImmutableKdTree<f64, 2>,
}

impl PointSet {
    pub fn new(points: Vec<Complex64>) -> Self {
        let coords: Vec<[f64; 2]> = points.iter().map(|z| [z.re, z.im]).collect();
        let tree = ImmutableKdTree::new_from_slice(&coords);
        PointSet { points, tree }
    }

    /// Distance to and index of the nearest point.
    pub fn nearest(&self, q: Complex64) -> (f64, usize) {
        let nn = self.tree.nearest_one::<SquaredEuclidean>(&[q.re, q.im]);
        (nn.distance.sqrt(), nn.item as usize)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// sup over a in `from` of the distance to `to`.
pub fn directed_hausdorff(from: &[Complex64], to: &PointSet) -> f64 {
    from.par_iter().map(|&z| to.nearest(z).0).reduce(|| 0.0, f64::max)
}

pub fn hausdorff(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return if a.is_empty() && b.is_empty() { 0.0 } else { f64::INFINITY };
    }
    let sa = PointSet::new(a.to_vec());
    let sb = PointSet::new(b.to_vec());
    directed_hausdorff(a, &sb).max(directed_hausdorff(b, &sa))
}

/// inf over pairs of |a - b|.
pub fn min_distance(a: &[Complex64], b: &PointSet) -> f64 {
    a.par_iter().map(|&z| b.nearest(z).0).reduce(|| f64::INFINITY, f64::min)
}

/// Drops points within `tol` (sup norm, on a grid of that size) of an earlier one.
pub fn dedup_points(points: &[Complex64], tol: f64) -> Vec<usize> {
    use std::collections::HashMap;
    let key = |z: Complex64| ((z.re / tol).floor() as i64, (z.im / tol).floor() as i64);
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    let mut keep = Vec::new();
    for (i, &z) in points.iter().enumerate() {
        let (kx, ky) = key(z);
        let mut dup = false;
        'outer: for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(v) = grid.get(&(kx + dx, ky + dy)) {
                    if v.iter().any(|&j| {
                        let w = points[j];
                        (w.re - z.re).abs() <= tol && (w.im - z.im).abs() <= tol
                    }) {
                        dup = true;
                        break 'outer;
                    }
                }
            }
        }
        if !dup {
            grid.entry((kx, ky)).or_default().push(i);
            keep.push(i);
        }
    }
    keep
}

/// Single-linkage clusters of points at mutual distance <= radius.
pub fn clusters(points: &[Complex64], radius: f64) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| points[a].re.total_cmp(&points[b].re));
    for (k, &i) in order.iter().enumerate() {
        for &j in &order[k + 1..] {
            if points[j].re - points[i].re > radius {
                break;
            }
            if (points[i] - points[j]).norm() <= radius {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups.into_values().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hausdorff_of_shifted_sets() {
        let a: Vec<Complex64> = (0..50).map(|k| Complex64::new(k as f64, 0.0)).collect();
        let b: Vec<Complex64> = a.iter().map(|z| z + Complex64::new(0.0, 0.25)).collect();
        assert!((hausdorff(&a, &b) - 0.25).abs() < 1e-15);
        assert_eq!(hausdorff(&a, &a), 0.0);
        let mut c = a.clone();
        c.push(Complex64::new(0.0, 3.0));
        assert!((hausdorff(&a, &c) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn cluster_counts() {
        let pts = vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(0.5, 0.0),
            Complex64::new(5.0, 0.0),
            Complex64::new(5.2, 0.1),
        ];
        assert_eq!(clusters(&pts, 0.6).len(), 2);
        assert_eq!(dedup_points(&pts, 0.6), vec![0, 2]);
    }
}
