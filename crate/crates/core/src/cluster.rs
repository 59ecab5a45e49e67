//! K-means++ seeding followed by Lloyd iterations over flat vectors.

use rand::Rng;

use crate::genome::squared_distance;

const MAX_LLOYD_ITERATIONS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    /// Cluster index of every point.
    pub assignment: Vec<usize>,
    /// One center per cluster, all of the points' dimension.
    pub centers: Vec<Vec<f64>>,
}

impl Clustering {
    pub fn members(&self, cluster: usize) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|&(_, &c)| c == cluster)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Partitions `points` into exactly `k` non-empty clusters.
///
/// Panics if `k == 0`, `k > points.len()` or the points differ in length.
pub fn kmeans<R: Rng + ?Sized>(points: &[&[f64]], k: usize, rng: &mut R) -> Clustering {
    let n = points.len();
    assert!(k >= 1 && k <= n, "need 1 <= k <= n (k = {k}, n = {n})");
    let dim = points[0].len();
    assert!(points.iter().all(|p| p.len() == dim), "points differ in dimension");

    if k == n {
        return Clustering {
            assignment: (0..n).collect(),
            centers: points.iter().map(|p| p.to_vec()).collect(),
        };
    }

    let mut centers = seed_plus_plus(points, k, rng);
    let mut assignment = vec![usize::MAX; n];
    for _ in 0..MAX_LLOYD_ITERATIONS {
        let mut changed = false;
        for (i, p) in points.iter().enumerate() {
            let c = nearest(p, &centers);
            if assignment[i] != c {
                assignment[i] = c;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        repair_empty(points, &mut assignment, &mut centers, k);
        centers = means(points, &assignment, k, dim);
    }
    // the iteration cap can leave an empty cluster behind
    if repair_empty(points, &mut assignment, &mut centers, k) {
        centers = means(points, &assignment, k, dim);
    }
    Clustering { assignment, centers }
}

fn nearest(p: &[f64], centers: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (c, center) in centers.iter().enumerate() {
        let d = squared_distance(p, center);
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    best
}

fn seed_plus_plus<R: Rng + ?Sized>(points: &[&[f64]], k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut chosen = vec![false; n];
    let first = rng.random_range(0..n);
    chosen[first] = true;
    let mut centers = vec![points[first].to_vec()];
    let mut d2: Vec<f64> = points
        .iter()
        .map(|p| squared_distance(p, &centers[0]))
        .collect();

    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = None;
            for (i, &w) in d2.iter().enumerate() {
                if w <= 0.0 {
                    continue;
                }
                pick = Some(i);
                if target < w {
                    break;
                }
                target -= w;
            }
            pick.expect("positive total weight")
        } else {
            // every point coincides with a center; pick any unused one
            let unused: Vec<usize> = (0..n).filter(|&i| !chosen[i]).collect();
            unused[rng.random_range(0..unused.len())]
        };
        chosen[next] = true;
        centers.push(points[next].to_vec());
        let c = centers.last().expect("just pushed");
        for (i, p) in points.iter().enumerate() {
            d2[i] = d2[i].min(squared_distance(p, c));
        }
    }
    centers
}

fn means(points: &[&[f64]], assignment: &[usize], k: usize, dim: usize) -> Vec<Vec<f64>> {
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (p, &c) in points.iter().zip(assignment) {
        counts[c] += 1;
        for (s, x) in sums[c].iter_mut().zip(p.iter()) {
            *s += x;
        }
    }
    for (sum, &count) in sums.iter_mut().zip(&counts) {
        if count > 0 {
            let inv = 1.0 / count as f64;
            sum.iter_mut().for_each(|s| *s *= inv);
        }
    }
    sums
}

/// Refills every empty cluster with the point farthest from its center in
/// the currently largest cluster. Returns whether anything moved.
fn repair_empty(
    points: &[&[f64]],
    assignment: &mut [usize],
    centers: &mut [Vec<f64>],
    k: usize,
) -> bool {
    let mut moved = false;
    loop {
        let mut counts = vec![0usize; k];
        for &c in assignment.iter() {
            counts[c] += 1;
        }
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            return moved;
        };
        let largest = (0..k)
            .max_by(|&a, &b| counts[a].cmp(&counts[b]).then(b.cmp(&a)))
            .expect("k >= 1");
        let victim = assignment
            .iter()
            .enumerate()
            .filter(|&(_, &c)| c == largest)
            .map(|(i, _)| (i, squared_distance(points[i], &centers[largest])))
            .fold(None::<(usize, f64)>, |acc, (i, d)| match acc {
                Some((_, bd)) if bd >= d => acc,
                _ => Some((i, d)),
            })
            .map(|(i, _)| i)
            .expect("largest cluster is non-empty");
        assignment[victim] = empty;
        centers[empty] = points[victim].to_vec();
        moved = true;
    }
}
