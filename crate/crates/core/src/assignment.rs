//! Exact bipartite assignment on square cost matrices.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Minimum-cost perfect matching of an `n x n` row-major cost matrix by the
/// shortest-augmenting-path Hungarian method with potentials, O(n^3).
///
/// Returns `assignment[row] = col`. Costs must be finite.
pub fn hungarian<T: Real>(n: usize, cost: &[T]) -> Result<Vec<usize>> {
    if cost.len() != n * n {
        return Err(Error::Shape(format!("cost matrix has {} entries, expected {}", cost.len(), n * n)));
    }
    if cost.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidArgument("cost matrix must be finite".into()));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    // 1-based columns; column 0 is the virtual start
    let inf = T::infinity();
    let mut u = vec![T::zero(); n + 1];
    let mut v = vec![T::zero(); n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] = u[row_of[j]] + delta;
                    v[j] = v[j] - delta;
                } else {
                    minv[j] = minv[j] - delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0usize; n];
    for j in 1..=n {
        assignment[row_of[j] - 1] = j - 1;
    }
    Ok(assignment)
}

/// Sum of `cost[row][assignment[row]]` accumulated in row order.
pub fn assignment_cost<T: Real>(n: usize, cost: &[T], assignment: &[usize]) -> T {
    assignment
        .iter()
        .enumerate()
        .fold(T::zero(), |acc, (r, &c)| acc + cost[r * n + c])
}

/// Maximum bipartite matching size (Hopcroft-Karp) on `n` left and `n` right
/// vertices with adjacency lists for the left side.
pub fn max_matching(n: usize, adj: &[Vec<usize>]) -> usize {
    const FREE: usize = usize::MAX;
    let mut match_l = vec![FREE; n];
    let mut match_r = vec![FREE; n];
    let mut dist = vec![0usize; n];
    let mut size = 0;
    loop {
        // BFS layers from free left vertices
        let mut queue = VecDeque::new();
        for l in 0..n {
            if match_l[l] == FREE {
                dist[l] = 0;
                queue.push_back(l);
            } else {
                dist[l] = usize::MAX;
            }
        }
        let mut found = false;
        while let Some(l) = queue.pop_front() {
            for &r in &adj[l] {
                let m = match_r[r];
                if m == FREE {
                    found = true;
                } else if dist[m] == usize::MAX {
                    dist[m] = dist[l] + 1;
                    queue.push_back(m);
                }
            }
        }
        if !found {
            return size;
        }
        let mut it = vec![0usize; n];
        for l in 0..n {
            if match_l[l] == FREE && augment(l, adj, &mut match_l, &mut match_r, &mut dist, &mut it) {
                size += 1;
            }
        }
    }
}

fn augment(
    l: usize,
    adj: &[Vec<usize>],
    match_l: &mut [usize],
    match_r: &mut [usize],
    dist: &mut [usize],
    it: &mut [usize],
) -> bool {
    while it[l] < adj[l].len() {
        let r = adj[l][it[l]];
        it[l] += 1;
        let m = match_r[r];
        let ok = m == usize::MAX
            || (dist[m] == dist[l] + 1 && augment(m, adj, match_l, match_r, dist, it));
        if ok {
            match_l[l] = r;
            match_r[r] = l;
            return true;
        }
    }
    dist[l] = usize::MAX;
    false
}

/// Smallest `c` among the matrix entries such that the entries `<= c` admit a
/// perfect matching (the bottleneck assignment value).
pub fn bottleneck_assignment<T: Real>(n: usize, cost: &[T]) -> Result<T> {
    if cost.len() != n * n {
        return Err(Error::Shape(format!("cost matrix has {} entries, expected {}", cost.len(), n * n)));
    }
    if n == 0 {
        return Ok(T::zero());
    }
    let mut candidates: Vec<T> = cost.to_vec();
    candidates.sort_by(|a, b| a.partial_cmp(b).expect("finite costs"));
    candidates.dedup();
    let feasible = |c: T| {
        let adj: Vec<Vec<usize>> = (0..n)
            .map(|r| (0..n).filter(|&col| cost[r * n + col] <= c).collect())
            .collect();
        max_matching(n, &adj) == n
    };
    let (mut lo, mut hi) = (0usize, candidates.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if feasible(candidates[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(candidates[lo])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(n - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, n - 1);
                out.push(q);
            }
        }
        out
    }

    #[test]
    fn hungarian_matches_enumeration() {
        let mut state = 12345u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for n in 1..=6 {
            for _ in 0..10 {
                let cost: Vec<f64> = (0..n * n).map(|_| next()).collect();
                let a = hungarian(n, &cost).unwrap();
                let best = permutations(n)
                    .iter()
                    .map(|p| assignment_cost(n, &cost, p))
                    .fold(f64::INFINITY, f64::min);
                assert!((assignment_cost(n, &cost, &a) - best).abs() < 1e-12);
                let bott = permutations(n)
                    .iter()
                    .map(|p| p.iter().enumerate().map(|(r, &c)| cost[r * n + c]).fold(0.0, f64::max))
                    .fold(f64::INFINITY, f64::min);
                assert_eq!(bottleneck_assignment(n, &cost).unwrap(), bott);
            }
        }
    }

    #[test]
    fn matching_on_a_path() {
        let adj = vec![vec![0], vec![0, 1], vec![1, 2]];
        assert_eq!(max_matching(3, &adj), 3);
        let adj = vec![vec![0], vec![0], vec![1, 2]];
        assert_eq!(max_matching(3, &adj), 2);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(hungarian(2, &[0.0f64; 3]).is_err());
        assert!(hungarian(1, &[f64::NAN]).is_err());
        assert!(hungarian::<f64>(0, &[]).unwrap().is_empty());
    }
}
