//! Maximum-weight bipartite matching (Hungarian method) on small dense
//! matrices, used to align predicted and true cluster labels.

/// Returns `assignment[row] = Some(col)` maximizing the total weight, with
/// every row and column used at most once. Rectangular inputs are padded
/// with zero-weight dummies.
pub fn max_weight_matching(weights: &[Vec<f64>]) -> Vec<Option<usize>> {
    let rows = weights.len();
    let cols = weights.iter().map(Vec::len).max().unwrap_or(0);
    let size = rows.max(cols);
    if size == 0 {
        return Vec::new();
    }
    let max_w = weights
        .iter()
        .flatten()
        .copied()
        .fold(0.0f64, f64::max);
    // cost[i][j] = max_w - w, so minimizing cost maximizes weight
    let cost = |i: usize, j: usize| -> f64 {
        let w = weights
            .get(i)
            .and_then(|r| r.get(j))
            .copied()
            .unwrap_or(0.0);
        max_w - w
    };

    // 1-based potentials formulation
    let mut u = vec![0.0; size + 1];
    let mut v = vec![0.0; size + 1];
    let mut owner = vec![0usize; size + 1];
    let mut way = vec![0usize; size + 1];
    for i in 1..=size {
        owner[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; size + 1];
        let mut used = vec![false; size + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=size {
                if !used[j] {
                    let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=size {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![None; rows];
    for j in 1..=size {
        let i = owner[j];
        if i >= 1 && i <= rows && j <= cols {
            assignment[i - 1] = Some(j - 1);
        }
    }
    assignment
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_force(weights: &[Vec<f64>], cols: usize) -> f64 {
        fn go(w: &[Vec<f64>], row: usize, used: &mut Vec<bool>, cols: usize) -> f64 {
            if row == w.len() {
                return 0.0;
            }
            // leaving this row unmatched is allowed
            let mut best = go(w, row + 1, used, cols);
            for j in 0..cols {
                if !used[j] {
                    used[j] = true;
                    best = best.max(w[row][j] + go(w, row + 1, used, cols));
                    used[j] = false;
                }
            }
            best
        }
        go(weights, 0, &mut vec![false; cols], cols)
    }

    fn total(weights: &[Vec<f64>], a: &[Option<usize>]) -> f64 {
        a.iter()
            .enumerate()
            .filter_map(|(i, j)| j.map(|j| weights[i][j]))
            .sum()
    }

    #[test]
    fn picks_anti_diagonal() {
        let w = vec![vec![1.0, 5.0], vec![4.0, 1.0]];
        assert_eq!(max_weight_matching(&w), vec![Some(1), Some(0)]);
    }

    proptest! {
        #[test]
        fn matches_brute_force(rows in 1usize..5, cols in 1usize..5, seed in prop::collection::vec(0u32..20, 25)) {
            let w: Vec<Vec<f64>> = (0..rows)
                .map(|i| (0..cols).map(|j| seed[i * 5 + j] as f64).collect())
                .collect();
            let a = max_weight_matching(&w);
            let mut seen = std::collections::HashSet::new();
            for j in a.iter().flatten() {
                prop_assert!(seen.insert(*j));
            }
            prop_assert_eq!(total(&w, &a), brute_force(&w, cols));
        }
    }
}
