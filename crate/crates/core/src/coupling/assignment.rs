//! Exact minimum-cost perfect assignment, O(n^3).
//!
//! Shortest augmenting paths with dual potentials (the Jonker-Volgenant
//! scheme). Column scans run in ascending index order and minima are updated
//! strictly, so among equally cheap columns the lowest index wins and the
//! result is deterministic.

/// Row -> column of a minimum-cost perfect assignment. `cost` is row-major
/// n x n with finite entries.
pub fn solve_assignment(cost: &[f64], n: usize) -> Vec<usize> {
    debug_assert_eq!(cost.len(), n * n);
    debug_assert!(cost.iter().all(|c| c.is_finite()));
    // 1-based columns; column 0 is the virtual root of each augmenting tree.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut matched_row = vec![0usize; n + 1]; // 0 = free
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        matched_row[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = f64::INFINITY;
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
                    u[matched_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }
        // Augment along the recorded path.
        loop {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut row_to_col = vec![usize::MAX; n];
    for j in 1..=n {
        if matched_row[j] > 0 {
            row_to_col[matched_row[j] - 1] = j - 1;
        }
    }
    debug_assert!(row_to_col.iter().all(|&c| c != usize::MAX));
    row_to_col
}

/// Rows a maximum bipartite matching on `allowed` leaves unmatched; empty
/// means a perfect matching exists. Kuhn's algorithm with deterministic
/// scan order.
pub fn unmatched_rows(allowed: &[bool], n: usize) -> Vec<usize> {
    debug_assert_eq!(allowed.len(), n * n);
    let mut col_match: Vec<Option<usize>> = vec![None; n];
    let mut unmatched = Vec::new();

    fn try_augment(
        row: usize,
        n: usize,
        allowed: &[bool],
        visited: &mut [bool],
        col_match: &mut [Option<usize>],
    ) -> bool {
        for col in 0..n {
            if allowed[row * n + col] && !visited[col] {
                visited[col] = true;
                let free = match col_match[col] {
                    None => true,
                    Some(other) => try_augment(other, n, allowed, visited, col_match),
                };
                if free {
                    col_match[col] = Some(row);
                    return true;
                }
            }
        }
        false
    }

    for row in 0..n {
        let mut visited = vec![false; n];
        if !try_augment(row, n, allowed, &mut visited, &mut col_match) {
            unmatched.push(row);
        }
    }
    unmatched
}

#[cfg(test)]
pub(crate) fn brute_force_assignment(cost: &[f64], n: usize) -> (Vec<usize>, f64) {
    // Enumerate all permutations; intended for n <= 8 oracle duty only.
    fn permute(
        n: usize,
        cost: &[f64],
        used: &mut Vec<bool>,
        cur: &mut Vec<usize>,
        best: &mut (Vec<usize>, f64),
    ) {
        let row = cur.len();
        if row == n {
            let total: f64 = cur.iter().enumerate().map(|(r, &c)| cost[r * n + c]).sum();
            if total < best.1 {
                *best = (cur.clone(), total);
            }
            return;
        }
        for col in 0..n {
            if !used[col] {
                used[col] = true;
                cur.push(col);
                permute(n, cost, used, cur, best);
                cur.pop();
                used[col] = false;
            }
        }
    }
    let mut best = (Vec::new(), f64::INFINITY);
    permute(n, cost, &mut vec![false; n], &mut Vec::new(), &mut best);
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rng::Rng;

    #[test]
    fn identity_is_optimal_for_zero_diagonal() {
        let n = 4;
        let mut cost = vec![1.0; n * n];
        for i in 0..n {
            cost[i * n + i] = 0.0;
        }
        assert_eq!(solve_assignment(&cost, n), vec![0, 1, 2, 3]);
    }

    #[test]
    fn matches_brute_force_on_random_matrices() {
        for seed in 0..50u64 {
            let mut rng = Rng::new(seed);
            let n = 2 + rng.below(5); // n in 2..=6
            let cost: Vec<f64> = (0..n * n).map(|_| rng.range(0.0, 10.0)).collect();
            let got = solve_assignment(&cost, n);
            let got_total: f64 = got.iter().enumerate().map(|(r, &c)| cost[r * n + c]).sum();
            let (_, best_total) = brute_force_assignment(&cost, n);
            assert!(
                (got_total - best_total).abs() <= 1e-9 * best_total.max(1.0),
                "seed {seed}, n {n}: solver {got_total} vs brute force {best_total}"
            );
            // Result is a permutation.
            let mut seen = vec![false; n];
            for &c in &got {
                assert!(!seen[c], "column {c} assigned twice");
                seen[c] = true;
            }
        }
    }

    #[test]
    fn ties_resolve_to_the_lowest_column() {
        // All-equal costs: every permutation is optimal; the deterministic
        // tie rule must yield the identity.
        let n = 5;
        let cost = vec![3.0; n * n];
        assert_eq!(solve_assignment(&cost, n), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn feasibility_detects_unmatched_rows() {
        // 3x3 where rows 0 and 1 both admit only column 0.
        let allowed = vec![
            true, false, false, //
            true, false, false, //
            true, true, true,
        ];
        let un = unmatched_rows(&allowed, 3);
        assert_eq!(un.len(), 1, "exactly one row must fail");
        assert!(un[0] == 0 || un[0] == 1);
        // Fully allowed is feasible.
        assert!(unmatched_rows(&vec![true; 9], 3).is_empty());
        // Fully forbidden leaves every row unmatched.
        assert_eq!(unmatched_rows(&vec![false; 9], 3), vec![0, 1, 2]);
    }

    #[test]
    fn large_instances_stay_fast_and_consistent() {
        // n=200 random matrix: permutation validity plus dual-feasibility
        // style sanity (objective no worse than greedy).
        let n = 200;
        let mut rng = Rng::new(1234);
        let cost: Vec<f64> = (0..n * n).map(|_| rng.range(0.0, 1.0)).collect();
        let got = solve_assignment(&cost, n);
        let mut seen = vec![false; n];
        for &c in &got {
            assert!(!seen[c]);
            seen[c] = true;
        }
        let solver_total: f64 = got.iter().enumerate().map(|(r, &c)| cost[r * n + c]).sum();
        // Greedy row-by-row upper bound.
        let mut taken = vec![false; n];
        let mut greedy_total = 0.0;
        for r in 0..n {
            let (c, v) = (0..n)
                .filter(|&c| !taken[c])
                .map(|c| (c, cost[r * n + c]))
                .fold((usize::MAX, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
            taken[c] = true;
            greedy_total += v;
        }
        assert!(
            solver_total <= greedy_total + 1e-9,
            "solver {solver_total} worse than greedy {greedy_total}"
        );
    }
}
