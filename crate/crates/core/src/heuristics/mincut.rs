/// A global minimum cut: `side` holds the nodes on one side (positions into
/// the node list passed in), the rest are on the other.
#[derive(Debug, Clone, PartialEq)]
pub struct MinCut {
    pub weight: f64,
    pub side: Vec<usize>,
}

/// Stoer-Wagner minimum cut of the complete graph on `weights` (symmetric,
/// non-negative). Needs at least two nodes. Ties in the maximum-adjacency
/// order go to the lowest node.
pub fn stoer_wagner(weights: &[Vec<f64>]) -> MinCut {
    let n = weights.len();
    assert!(n >= 2, "a cut needs two nodes");
    let mut w: Vec<Vec<f64>> = weights.to_vec();
    // Original nodes merged into each super node.
    let mut groups: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut alive: Vec<usize> = (0..n).collect();
    let mut best = MinCut { weight: f64::INFINITY, side: Vec::new() };
    while alive.len() > 1 {
        let mut added = vec![false; n];
        let mut conn = vec![0.0; n];
        let mut prev = alive[0];
        let mut last = alive[0];
        for step in 0..alive.len() {
            let mut pick = None;
            for &v in &alive {
                if !added[v] && pick.is_none_or(|p: usize| conn[v] > conn[p]) {
                    pick = Some(v);
                }
            }
            let v = pick.expect("unadded node left");
            added[v] = true;
            if step == alive.len() - 1 {
                if conn[v] < best.weight {
                    best = MinCut { weight: conn[v], side: groups[v].clone() };
                }
                prev = last;
                last = v;
            } else {
                last = v;
                for &u in &alive {
                    if !added[u] {
                        conn[u] += w[v][u];
                    }
                }
            }
        }
        // Merge the last node into the one added just before it.
        let moved = std::mem::take(&mut groups[last]);
        groups[prev].extend(moved);
        for &u in &alive {
            let add = w[last][u];
            w[prev][u] += add;
            w[u][prev] = w[prev][u];
        }
        w[prev][prev] = 0.0;
        alive.retain(|&u| u != last);
    }
    best.side.sort_unstable();
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn exhaustive(w: &[Vec<f64>]) -> f64 {
        let n = w.len();
        let mut best = f64::INFINITY;
        for mask in 1..(1u32 << n) - 1 {
            let mut cut = 0.0;
            for a in 0..n {
                for b in 0..n {
                    if mask >> a & 1 == 1 && mask >> b & 1 == 0 {
                        cut += w[a][b];
                    }
                }
            }
            best = f64::min(best, cut);
        }
        best
    }

    fn cut_of(w: &[Vec<f64>], side: &[usize]) -> f64 {
        let n = w.len();
        let mut cut = 0.0;
        for &a in side {
            for b in 0..n {
                if !side.contains(&b) {
                    cut += w[a][b];
                }
            }
        }
        cut
    }

    #[test]
    fn separates_two_clusters() {
        let mut w = vec![vec![0.0; 4]; 4];
        for (a, b, x) in [(0, 1, 5.0), (2, 3, 7.0)] {
            w[a][b] = x;
            w[b][a] = x;
        }
        let cut = stoer_wagner(&w);
        assert_eq!(cut.weight, 0.0);
        assert!(cut.side == vec![0, 1] || cut.side == vec![2, 3], "{:?}", cut.side);
    }

    proptest! {
        #[test]
        fn matches_exhaustive_enumeration(
            n in 2usize..=12,
            raw in proptest::collection::vec(0u8..10, 66),
        ) {
            let mut w = vec![vec![0.0; n]; n];
            let mut k = 0;
            for a in 0..n {
                for b in a + 1..n {
                    let x = f64::from(raw[k % raw.len()]);
                    k += 1;
                    w[a][b] = x;
                    w[b][a] = x;
                }
            }
            let cut = stoer_wagner(&w);
            prop_assert!(!cut.side.is_empty() && cut.side.len() < n);
            prop_assert!((cut.weight - exhaustive(&w)).abs() < 1e-9);
            prop_assert!((cut_of(&w, &cut.side) - cut.weight).abs() < 1e-9);
        }
    }
}
