use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::complex::{BoundaryMatrix, BranchedComplex};
use crate::numeric::{linear_fit, LinearFit};
use crate::templates;
use crate::weights::null_space;

/// Connected components of the row/column incidence graph of `D`, as sorted
/// column lists ordered by their smallest column.
pub fn block_decomposition(d: &BoundaryMatrix) -> Vec<Vec<usize>> {
    let n = d.cols();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for row in &d.entries {
        let cols: Vec<usize> = (0..n).filter(|&j| row[j] != 0).collect();
        for w in cols.windows(2) {
            let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for j in 0..n {
        let root = find(&mut parent, j);
        if slot[root] == usize::MAX {
            slot[root] = blocks.len();
            blocks.push(Vec::new());
        }
        blocks[slot[root]].push(j);
    }
    blocks
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeficitPoint {
    pub volume: usize,
    pub simplices: usize,
    pub nullity_connected: usize,
    pub nullity_blocked: usize,
    pub deficit: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeficitScan {
    pub cluster_size: usize,
    pub points: Vec<DeficitPoint>,
    pub fit: LinearFit,
}

/// Nullity of the intersecting two-cluster complex minus that of the
/// partitioned one, for each volume (number of units).
pub fn entropy_deficit_scan(cluster_size: usize, volumes: &[usize]) -> DeficitScan {
    let points: Vec<DeficitPoint> = volumes
        .iter()
        .map(|&v| {
            let connected = templates::two_cluster(cluster_size, v, true);
            let blocked = templates::two_cluster(cluster_size, v, false);
            let nc = null_space(&connected.boundary_matrix()).nullity;
            let nb = null_space(&blocked.boundary_matrix()).nullity;
            DeficitPoint {
                volume: v,
                simplices: connected.top_simplices.len(),
                nullity_connected: nc,
                nullity_blocked: nb,
                deficit: nc as i64 - nb as i64,
            }
        })
        .collect();
    let xs: Vec<f64> = points.iter().map(|p| p.volume as f64).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.deficit as f64).collect();
    DeficitScan {
        cluster_size,
        fit: linear_fit(&xs, &ys),
        points,
    }
}

/// Two bundles with the same strands, units and simplex count, where the
/// first merges all strands in strictly more units than the second.
pub fn cohesion_pair<R: Rng>(rng: &mut R) -> (BranchedComplex, BranchedComplex) {
    let strands = rng.random_range(2..=4usize);
    let units = rng.random_range(2..=6usize);
    let frequent = rng.random_range(1..=units);
    let rare = rng.random_range(0..frequent);
    let mut order: Vec<usize> = (0..units).collect();
    order.shuffle(rng);
    let pick = |m: usize| {
        let mut flags = vec![false; units];
        for &u in &order[..m] {
            flags[u] = true;
        }
        flags
    };
    (
        templates::cohesion_bundle(strands, &pick(frequent)),
        templates::cohesion_bundle(strands, &pick(rare)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn block_examples() {
        let d = templates::parallel_branches(4, 2).boundary_matrix();
        assert_eq!(block_decomposition(&d).len(), 2);
        assert_eq!(block_decomposition(&templates::merge_split().boundary_matrix()).len(), 1);
        let blocked = templates::two_cluster(3, 2, false).boundary_matrix();
        assert!(block_decomposition(&blocked).len() >= 2);
        assert_eq!(block_decomposition(&templates::two_cluster(3, 2, true).boundary_matrix()).len(), 1);
    }

    #[test]
    fn blocks_partition_rows_and_columns() {
        let d = templates::side_by_side(&[
            &templates::merge_split(),
            &templates::prefixed(&templates::recombining(4), "q"),
        ])
        .boundary_matrix();
        let blocks = block_decomposition(&d);
        assert_eq!(blocks.len(), 2);
        for row in &d.entries {
            let touched: Vec<usize> = (0..blocks.len())
                .filter(|&b| blocks[b].iter().any(|&j| row[j] != 0))
                .collect();
            assert!(touched.len() <= 1);
        }
    }

    #[test]
    fn deficit_grows_linearly() {
        let scan = entropy_deficit_scan(2, &[1]);
        assert!(scan.points[0].deficit >= 1);
        let vols: Vec<usize> = (1..=10).collect();
        let scan = entropy_deficit_scan(3, &vols);
        for v in 1..=5 {
            assert_eq!(scan.points[2 * v - 1].deficit, 2 * scan.points[v - 1].deficit);
        }
        let tail = entropy_deficit_scan(3, &(2..=10).collect::<Vec<_>>());
        assert!(tail.fit.slope > 0.0 && tail.fit.r_squared > 0.99);
    }

    #[test]
    fn frequent_merges_have_larger_null_space() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let (f, r) = cohesion_pair(&mut rng);
            assert_eq!(f.top_simplices.len(), r.top_simplices.len());
            let nf = null_space(&f.boundary_matrix()).nullity;
            let nr = null_space(&r.boundary_matrix()).nullity;
            assert!(nf > nr);
        }
    }
}
