//! Reference implementations used to check the production code from the
//! outside. Each oracle takes the slow, obvious route.

use std::time::{Duration, Instant};

use collider_audit::{Dag, DiscreteScm};
use rand::seq::SliceRandom;
use rand::Rng;

/// d-separation by enumerating every simple path between `x` and `y` in the
/// skeleton. A path is open when each interior collider is in `z` or has a
/// descendant in `z`, and no interior non-collider is in `z`.
pub fn separated_by_paths(dag: &Dag, x: usize, y: usize, z: &[usize]) -> bool {
    let n = dag.len();
    let mut in_z = vec![false; n];
    for &v in z {
        in_z[v] = true;
    }
    let opens: Vec<bool> =
        (0..n).map(|v| in_z[v] || dag.descendant_indices(v).iter().any(|&d| in_z[d])).collect();
    let adjacent: Vec<Vec<usize>> = (0..n)
        .map(|u| (0..n).filter(|&v| dag.has_edge(u, v) || dag.has_edge(v, u)).collect())
        .collect();
    let mut path = vec![x];
    let mut on_path = vec![false; n];
    on_path[x] = true;
    !open_path_exists(dag, &adjacent, &in_z, &opens, y, &mut path, &mut on_path)
}

fn open_path_exists(
    dag: &Dag,
    adjacent: &[Vec<usize>],
    in_z: &[bool],
    opens: &[bool],
    target: usize,
    path: &mut Vec<usize>,
    on_path: &mut [bool],
) -> bool {
    let last = *path.last().expect("path starts at x");
    if last == target {
        return path.windows(3).all(|w| {
            if dag.has_edge(w[0], w[1]) && dag.has_edge(w[2], w[1]) {
                opens[w[1]]
            } else {
                !in_z[w[1]]
            }
        });
    }
    for &next in &adjacent[last] {
        if !on_path[next] {
            path.push(next);
            on_path[next] = true;
            let found = open_path_exists(dag, adjacent, in_z, opens, target, path, on_path);
            path.pop();
            on_path[next] = false;
            if found {
                return true;
            }
        }
    }
    false
}

pub fn node_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("V{i}")).collect()
}

fn acyclic(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut indegree = vec![0; n];
    for &(_, c) in edges {
        indegree[c] += 1;
    }
    let mut ready: Vec<usize> = (0..n).filter(|&v| indegree[v] == 0).collect();
    let mut seen = 0;
    while let Some(v) = ready.pop() {
        seen += 1;
        for &(p, c) in edges {
            if p == v {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    ready.push(c);
                }
            }
        }
    }
    seen == n
}

/// Every labeled DAG on `n` nodes: each unordered pair is absent, forward or
/// backward, and cyclic choices are dropped.
pub fn all_labeled_dags(n: usize) -> Vec<Dag> {
    let names = node_names(n);
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
    let total = 3usize.pow(pairs.len() as u32);
    (0..total)
        .filter_map(|mut code| {
            let mut edges = Vec::new();
            for &(i, j) in &pairs {
                match code % 3 {
                    1 => edges.push((i, j)),
                    2 => edges.push((j, i)),
                    _ => {}
                }
                code /= 3;
            }
            if !acyclic(n, &edges) {
                return None;
            }
            let named: Vec<(String, String)> = edges.iter().map(|&(p, c)| (names[p].clone(), names[c].clone())).collect();
            Some(Dag::new(&names, &named).expect("acyclic by construction"))
        })
        .collect()
}

/// Random DAG: a random topological order with each forward pair joined with
/// probability `p`.
pub fn random_dag(n: usize, p: f64, rng: &mut impl Rng) -> Dag {
    let names = node_names(n);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random::<f64>() < p {
                edges.push((names[order[i]].clone(), names[order[j]].clone()));
            }
        }
    }
    Dag::new(&names, &edges).expect("forward edges are acyclic")
}

/// All `(x, y, z)` with `x != y` and `z` a subset of the remaining nodes.
pub fn disjoint_triples(n: usize) -> Vec<(usize, usize, Vec<usize>)> {
    let mut out = Vec::new();
    for x in 0..n {
        for y in 0..n {
            if x == y {
                continue;
            }
            let rest: Vec<usize> = (0..n).filter(|&v| v != x && v != y).collect();
            for mask in 0..(1u32 << rest.len()) {
                let z = rest.iter().enumerate().filter(|(k, _)| mask & (1 << k) != 0).map(|(_, &v)| v).collect();
                out.push((x, y, z));
            }
        }
    }
    out
}

/// Every joint value assignment of `nodes`, first node varying slowest.
pub fn assignments(scm: &DiscreteScm, nodes: &[usize]) -> Vec<Vec<usize>> {
    nodes.iter().fold(vec![Vec::new()], |acc, &v| {
        acc.iter().flat_map(|a| (0..scm.domain(v)).map(move |x| [a.as_slice(), &[x]].concat())).collect()
    })
}

/// Sample Pearson correlation.
pub fn correlation(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Median wall time of `runs` calls.
pub fn median_time(runs: usize, mut f: impl FnMut()) -> Duration {
    let mut times: Vec<Duration> = (0..runs)
        .map(|_| {
            let start = Instant::now();
            f();
            start.elapsed()
        })
        .collect();
    times.sort();
    times[runs / 2]
}
