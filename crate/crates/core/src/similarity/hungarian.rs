/// Maximum-weight assignment of every row of an `n x m` matrix (`n <= m`) to
/// a distinct column, by the shortest augmenting path form of the Hungarian
/// method with potentials, in `O(n^2 m)`. Returns the column of each row.
///
/// Among equal-valued augmenting steps the lowest column index wins, so the
/// result is a deterministic function of the matrix.
pub fn max_weight_assignment(scores: &[f64], n: usize, m: usize) -> Vec<usize> {
    assert!(n <= m, "assignment needs rows <= columns ({n} > {m})");
    assert_eq!(scores.len(), n * m);
    if n == 0 {
        return Vec::new();
    }
    let cost = |i: usize, j: usize| -scores[(i - 1) * m + (j - 1)];
    // 1-based; column 0 is a virtual source
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost(i0, j) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![usize::MAX; n];
    for j in 1..=m {
        if p[j] != 0 {
            assignment[p[j] - 1] = j - 1;
        }
    }
    assignment
}

/// Total score of an assignment.
pub fn assignment_value(scores: &[f64], m: usize, assignment: &[usize]) -> f64 {
    assignment.iter().enumerate().map(|(i, &j)| scores[i * m + j]).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_force(scores: &[f64], n: usize, m: usize) -> f64 {
        fn go(scores: &[f64], n: usize, m: usize, row: usize, used: &mut Vec<bool>) -> f64 {
            if row == n {
                return 0.0;
            }
            let mut best = f64::NEG_INFINITY;
            for j in 0..m {
                if !used[j] {
                    used[j] = true;
                    best = best.max(scores[row * m + j] + go(scores, n, m, row + 1, used));
                    used[j] = false;
                }
            }
            best
        }
        go(scores, n, m, 0, &mut vec![false; m])
    }

    #[test]
    fn diagonal_dominance() {
        let n = 5;
        let scores: Vec<f64> = (0..n * n).map(|k| if k / n == k % n { 1.0 } else { -1.0 }).collect();
        assert_eq!(max_weight_assignment(&scores, n, n), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn ties_are_deterministic() {
        let scores = vec![1.0; 6];
        let a = max_weight_assignment(&scores, 2, 3);
        assert_eq!(a, max_weight_assignment(&scores, 2, 3));
        assert_ne!(a[0], a[1]);
    }

    #[test]
    fn empty_matrix() {
        assert!(max_weight_assignment(&[], 0, 4).is_empty());
    }

    proptest! {
        #[test]
        fn matches_exhaustive_search(
            (n, m, scores) in (1usize..=6, 0usize..=2).prop_flat_map(|(n, extra)| {
                let m = n + extra;
                (Just(n), Just(m), prop::collection::vec(-20i32..20, n * m))
            })
        ) {
            let scores: Vec<f64> = scores.into_iter().map(f64::from).collect();
            let a = max_weight_assignment(&scores, n, m);
            let mut seen = a.clone();
            seen.sort_unstable();
            seen.dedup();
            prop_assert_eq!(seen.len(), n);
            prop_assert_eq!(assignment_value(&scores, m, &a), brute_force(&scores, n, m));
        }
    }
}
