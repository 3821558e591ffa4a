//! Generators for the standard complexes used by tests, the CLI and the
//! collapse experiments.

use rand::Rng;

use crate::complex::{build_complex, BranchedComplex, ComplexDescription, Number, SimplexSpec, VertexSpec};

#[derive(Default)]
struct Builder {
    vertices: Vec<VertexSpec>,
    simplices: Vec<SimplexSpec>,
}

impl Builder {
    fn vertex(&mut self, id: impl Into<String>, t: i64, x: Vec<i64>) -> String {
        let id = id.into();
        self.vertices.push(VertexSpec { id: id.clone(), t, x });
        id
    }

    fn simplex(&mut self, id: impl Into<String>, vertices: &[&str]) {
        self.simplices.push(SimplexSpec {
            id: id.into(),
            vertices: vertices.iter().map(|v| v.to_string()).collect(),
            weight: None,
            field: None,
        });
    }

    fn build(self, n_dim: usize) -> BranchedComplex {
        build_complex(&ComplexDescription {
            n_dim,
            vertices: self.vertices,
            simplices: self.simplices,
            total_weight: None,
            lower_bound: Number::Float(1.0),
        })
        .expect("template complexes are valid")
    }
}

/// Two branches merge, run together for two steps, then split again:
/// edges `w1`, `w2` enter the merge vertex, `w3`, `w4` form the joint
/// segment and `w5`, `w6` leave the split vertex.
pub fn merge_split() -> BranchedComplex {
    let mut b = Builder::default();
    b.vertex("s1", 0, vec![0]);
    b.vertex("s2", 0, vec![1]);
    b.vertex("A", 1, vec![0]);
    b.vertex("B", 2, vec![0]);
    b.vertex("C", 3, vec![0]);
    b.vertex("f1", 4, vec![0]);
    b.vertex("f2", 4, vec![1]);
    b.simplex("w1", &["s1", "A"]);
    b.simplex("w2", &["s2", "A"]);
    b.simplex("w3", &["A", "B"]);
    b.simplex("w4", &["B", "C"]);
    b.simplex("w5", &["C", "f1"]);
    b.simplex("w6", &["C", "f2"]);
    b.build(0)
}

/// A single unbranched chain of `steps` edges at spatial label `label`.
pub fn chain(prefix: &str, steps: usize, label: i64) -> BranchedComplex {
    parallel_prefixed(prefix, steps, &[label])
}

/// `branches` independent chains over `steps` steps that never meet.
pub fn parallel_branches(steps: usize, branches: usize) -> BranchedComplex {
    let labels: Vec<i64> = (0..branches as i64).collect();
    parallel_prefixed("p", steps, &labels)
}

fn parallel_prefixed(prefix: &str, steps: usize, labels: &[i64]) -> BranchedComplex {
    let mut b = Builder::default();
    for &x in labels {
        for t in 0..=steps {
            b.vertex(format!("{prefix}{x}v{t}"), t as i64, vec![x]);
        }
        for t in 0..steps {
            b.simplex(
                format!("{prefix}{x}e{t}"),
                &[&format!("{prefix}{x}v{t}"), &format!("{prefix}{x}v{}", t + 1)],
            );
        }
    }
    b.build(0)
}

/// Two branches that meet at every integer time and separate in between:
/// step `t` holds the two edges `r{t}a`, `r{t}b`, both running from the
/// meeting vertex `m{t}` to `m{t+1}`. Has `2^steps` paths.
pub fn recombining(steps: usize) -> BranchedComplex {
    let mut b = Builder::default();
    for t in 0..=steps {
        b.vertex(format!("m{t}"), t as i64, vec![0]);
    }
    for t in 0..steps {
        let (u, v) = (format!("m{t}"), format!("m{}", t + 1));
        b.simplex(format!("r{t}a"), &[&u, &v]);
        b.simplex(format!("r{t}b"), &[&u, &v]);
    }
    b.build(0)
}

/// Full bipartite lattice: vertex `(t, j)` for `j < sites`, an edge between
/// every site pair of consecutive layers. Labels are the site index.
pub fn lattice(sites: usize, steps: usize) -> BranchedComplex {
    let mut b = Builder::default();
    for t in 0..=steps {
        for j in 0..sites {
            b.vertex(lattice_vertex(t, j), t as i64, vec![j as i64]);
        }
    }
    for t in 0..steps {
        for i in 0..sites {
            for j in 0..sites {
                b.simplex(
                    format!("e{t}_{i}_{j}"),
                    &[&lattice_vertex(t, i), &lattice_vertex(t + 1, j)],
                );
            }
        }
    }
    b.build(0)
}

pub fn lattice_vertex(t: usize, site: usize) -> String {
    format!("v{t}_{site}")
}

/// A bundle of `branches` strands over `grouping.len()` units. Each unit is
/// two steps: strands run from separate vertices into the unit's middle
/// layer, where every group of strands in `grouping[u]` meets at a single
/// vertex, and then fan out to separate vertices again.
pub fn bundle(branches: usize, grouping: &[Vec<Vec<usize>>]) -> BranchedComplex {
    let mut b = Builder::default();
    let sep = |layer: usize, j: usize| format!("s{layer}_{j}");
    for j in 0..branches {
        b.vertex(sep(0, j), 0, vec![j as i64]);
    }
    for (u, groups) in grouping.iter().enumerate() {
        let (lo, mid, hi) = (2 * u, 2 * u + 1, 2 * u + 2);
        for j in 0..branches {
            b.vertex(sep(hi, j), hi as i64, vec![j as i64]);
        }
        let mut covered = vec![false; branches];
        for group in groups {
            let head = *group.iter().min().expect("non-empty group");
            let m = b.vertex(format!("g{mid}_{head}"), mid as i64, vec![head as i64]);
            for &j in group {
                assert!(!covered[j], "strand {j} listed twice in unit {u}");
                covered[j] = true;
                b.simplex(format!("u{u}in{j}"), &[&sep(lo, j), &m]);
                b.simplex(format!("u{u}out{j}"), &[&m, &sep(hi, j)]);
            }
        }
        for j in (0..branches).filter(|&j| !covered[j]) {
            let m = b.vertex(format!("g{mid}_{j}"), mid as i64, vec![j as i64]);
            b.simplex(format!("u{u}in{j}"), &[&sep(lo, j), &m]);
            b.simplex(format!("u{u}out{j}"), &[&m, &sep(hi, j)]);
        }
    }
    b.build(0)
}

/// `branches` strands over `units` units that all meet in the units flagged
/// by `merges`.
pub fn cohesion_bundle(branches: usize, merges: &[bool]) -> BranchedComplex {
    let all: Vec<usize> = (0..branches).collect();
    let grouping: Vec<Vec<Vec<usize>>> = merges
        .iter()
        .map(|&m| if m { vec![all.clone()] } else { vec![] })
        .collect();
    bundle(branches, &grouping)
}

/// Two clusters of `cluster_size` strands over `units` units. In the
/// connected variant all strands meet in every unit; in the blocked variant
/// each cluster meets only internally, so the clusters never intersect.
pub fn two_cluster(cluster_size: usize, units: usize, connected: bool) -> BranchedComplex {
    let k = 2 * cluster_size;
    let groups = if connected {
        vec![(0..k).collect::<Vec<_>>()]
    } else {
        vec![(0..cluster_size).collect(), (cluster_size..k).collect()]
    };
    bundle(k, &vec![groups; units])
}

/// Copy of `complex` with every vertex and simplex id prefixed.
pub fn prefixed(complex: &BranchedComplex, prefix: &str) -> BranchedComplex {
    let mut desc = complex.to_description();
    for v in &mut desc.vertices {
        v.id = format!("{prefix}{}", v.id);
    }
    for s in &mut desc.simplices {
        s.id = format!("{prefix}{}", s.id);
        for v in &mut s.vertices {
            *v = format!("{prefix}{v}");
        }
    }
    build_complex(&desc).expect("renaming preserves validity")
}

/// Places complexes next to each other in the same layers (labels are
/// prefixed with the part index; ids must already be distinct).
pub fn side_by_side(parts: &[&BranchedComplex]) -> BranchedComplex {
    combine(parts, false)
}

/// Places complexes one after another in time, each starting at the layer
/// where the previous one ends. The parts share no vertices.
pub fn stack_in_time(parts: &[&BranchedComplex]) -> BranchedComplex {
    combine(parts, true)
}

fn combine(parts: &[&BranchedComplex], sequential: bool) -> BranchedComplex {
    let mut b = Builder::default();
    let mut offset = 0i64;
    for (i, part) in parts.iter().enumerate() {
        let desc = part.to_description();
        let (first, last) = part.layer_range();
        let shift = if sequential { offset - first } else { 0 };
        for v in desc.vertices {
            let mut x = vec![i as i64];
            x.extend(v.x);
            b.vertex(v.id, v.t + shift, x);
        }
        b.simplices.extend(desc.simplices);
        offset += last - first;
    }
    let n_dim = parts.first().map_or(0, |p| p.n_dim);
    b.build(n_dim)
}

/// A random connected-ish 0+1 layered complex with at most `max_simplices`
/// edges and no repeated vertex pairs.
pub fn random_layered<R: Rng>(rng: &mut R, max_simplices: usize) -> BranchedComplex {
    loop {
        let steps = rng.random_range(1..=5usize);
        let widths: Vec<usize> = (0..=steps).map(|_| rng.random_range(1..=4usize)).collect();
        let mut b = Builder::default();
        for (t, &w) in widths.iter().enumerate() {
            for j in 0..w {
                b.vertex(format!("v{t}_{j}"), t as i64, vec![j as i64]);
            }
        }
        let mut count = 0;
        for t in 0..steps {
            let (lo, hi) = (widths[t], widths[t + 1]);
            let mut edges = vec![vec![false; hi]; lo];
            for row in edges.iter_mut() {
                row[rng.random_range(0..hi)] = true;
            }
            for j in 0..hi {
                if !(0..lo).any(|i| edges[i][j]) {
                    edges[rng.random_range(0..lo)][j] = true;
                }
            }
            for row in edges.iter_mut() {
                for cell in row.iter_mut() {
                    if !*cell && rng.random_bool(0.3) {
                        *cell = true;
                    }
                }
            }
            for (i, row) in edges.iter().enumerate() {
                for (j, &on) in row.iter().enumerate() {
                    if on {
                        b.simplex(format!("e{t}_{i}_{j}"), &[&format!("v{t}_{i}"), &format!("v{}_{j}", t + 1)]);
                        count += 1;
                    }
                }
            }
        }
        if count <= max_simplices {
            return b.build(0);
        }
    }
}

/// A random triangulated 1+1 strip: layer `t` has 2..=4 vertices and each
/// slab is triangulated by a random zig-zag.
pub fn random_strip<R: Rng>(rng: &mut R, max_simplices: usize) -> BranchedComplex {
    loop {
        let steps = rng.random_range(1..=4usize);
        let widths: Vec<usize> = (0..=steps).map(|_| rng.random_range(2..=4usize)).collect();
        let total: usize = widths.windows(2).map(|w| w[0] + w[1] - 2).sum();
        if total > max_simplices {
            continue;
        }
        let mut b = Builder::default();
        let id = |t: usize, j: usize| format!("v{t}_{j}");
        for (t, &w) in widths.iter().enumerate() {
            for j in 0..w {
                b.vertex(id(t, j), t as i64, vec![j as i64]);
            }
        }
        for t in 0..steps {
            let (lo, hi) = (widths[t], widths[t + 1]);
            let (mut i, mut j, mut k) = (0, 0, 0);
            while i + 1 < lo || j + 1 < hi {
                let advance_low = if i + 1 >= lo {
                    false
                } else if j + 1 >= hi {
                    true
                } else {
                    rng.random_bool(0.5)
                };
                let name = format!("t{t}_{k}");
                if advance_low {
                    b.simplex(name, &[&id(t, i), &id(t, i + 1), &id(t + 1, j)]);
                    i += 1;
                } else {
                    b.simplex(name, &[&id(t, i), &id(t + 1, j), &id(t + 1, j + 1)]);
                    j += 1;
                }
                k += 1;
            }
        }
        return b.build(1);
    }
}
