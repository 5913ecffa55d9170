use crate::eval::{Deployment, PrefixState};
use crate::heuristics::mincut::stoer_wagner;
use crate::model::Model;

/// Symmetric pairwise interaction weights between indexes.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeWeights {
    w: Vec<Vec<f64>>,
}

impl EdgeWeights {
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.w[a][b]
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    /// Pairs `a < b` with positive weight.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.w.len();
        (0..n).flat_map(move |a| (a + 1..n).map(move |b| (a, b))).filter_map(|(a, b)| {
            let x = self.w[a][b];
            (x > 0.0).then_some((a, b, x))
        })
    }

    fn sub(&self, nodes: &[usize]) -> Vec<Vec<f64>> {
        nodes
            .iter()
            .map(|&a| nodes.iter().map(|&b| self.w[a][b]).collect())
            .collect()
    }
}

/// Weights from query interactions. Each plan with speedup `s` over `m`
/// indexes gives `s / m` per member. Two indexes in a common plan of a query
/// get the largest such share; two indexes only in different plans of the
/// same query get the smaller of the two shares (the largest over plan
/// pairs). Shares add up over queries. Build interactions are ignored.
pub fn edge_weights(model: &Model) -> EdgeWeights {
    let n = model.num_indexes();
    let mut w = vec![vec![0.0; n]; n];
    for q in 0..model.num_queries() {
        let mut touched: Vec<usize> = Vec::new();
        let mut share = vec![0.0f64; n];
        let plans = model.plans_of_query(q);
        for &p in plans {
            let idx = model.plan_indexes(p);
            let s = model.plan_speedup(p) / idx.len() as f64;
            for &i in idx {
                share[i] = share[i].max(s);
                touched.push(i);
            }
        }
        touched.sort_unstable();
        touched.dedup();
        if touched.len() < 2 {
            continue;
        }
        let pos = |i: usize| touched.binary_search(&i).expect("touched");
        let mut shared = vec![vec![0.0f64; touched.len()]; touched.len()];
        let mut co = vec![vec![false; touched.len()]; touched.len()];
        for &p in plans {
            let idx = model.plan_indexes(p);
            let s = model.plan_speedup(p) / idx.len() as f64;
            for &a in idx {
                for &b in idx {
                    if a != b {
                        let (x, y) = (pos(a), pos(b));
                        co[x][y] = true;
                        shared[x][y] = shared[x][y].max(s);
                    }
                }
            }
        }
        for (x, &a) in touched.iter().enumerate() {
            for (y, &b) in touched.iter().enumerate() {
                if x == y {
                    continue;
                }
                w[a][b] += if co[x][y] { shared[x][y] } else { share[a].min(share[b]) };
            }
        }
    }
    EdgeWeights { w }
}

/// Recursive min-cut clustering. Each cluster is split by a global minimum
/// cut of the edge weights (halves by id when nothing connects it), both
/// sides are scheduled recursively, and the two orders are interleaved by
/// repeatedly taking the front with the larger immediate runtime drop.
/// Build costs play no part. A final stable pass moves indexes after their
/// hard predecessors.
pub fn dp_schedule(model: &Model) -> Deployment {
    let weights = edge_weights(model);
    let nodes: Vec<usize> = (0..model.num_indexes()).collect();
    let order = schedule(model, &weights, &nodes);
    Deployment::from_indices(stable_topological(model, &order))
}

fn schedule(model: &Model, weights: &EdgeWeights, nodes: &[usize]) -> Vec<usize> {
    if nodes.len() <= 1 {
        return nodes.to_vec();
    }
    let sub = weights.sub(nodes);
    let connected = sub.iter().flatten().any(|&x| x > 0.0);
    let mut left = Vec::new();
    let mut right = Vec::new();
    if connected {
        let cut = stoer_wagner(&sub);
        for (k, &i) in nodes.iter().enumerate() {
            if cut.side.binary_search(&k).is_ok() {
                left.push(i);
            } else {
                right.push(i);
            }
        }
    } else {
        let mid = nodes.len() / 2;
        left.extend_from_slice(&nodes[..mid]);
        right.extend_from_slice(&nodes[mid..]);
    }
    let first = schedule(model, weights, &left);
    let second = schedule(model, weights, &right);
    merge(model, &first, &second)
}

fn merge(model: &Model, a: &[usize], b: &[usize]) -> Vec<usize> {
    let members: Vec<usize> = a.iter().chain(b).copied().collect();
    let mut state = PrefixState::new(model);
    let (mut x, mut y) = (0, 0);
    let eligible = |state: &PrefixState, i: usize| {
        model.preds(i).iter().all(|p| state.is_built(*p) || !members.contains(p))
    };
    while x < a.len() && y < b.len() {
        let (fa, fb) = (a[x], b[y]);
        let gain = |state: &mut PrefixState, i: usize| {
            let before = state.current_runtime();
            state.push(model, i);
            let after = state.current_runtime();
            state.pop(model);
            before - after
        };
        let take_a = match (eligible(&state, fa), eligible(&state, fb)) {
            (true, false) => true,
            (false, true) => false,
            _ => {
                let (ga, gb) = (gain(&mut state, fa), gain(&mut state, fb));
                ga > gb || (ga == gb && fa < fb)
            }
        };
        if take_a {
            state.push(model, fa);
            x += 1;
        } else {
            state.push(model, fb);
            y += 1;
        }
    }
    let mut out = state.order().to_vec();
    out.extend_from_slice(&a[x..]);
    out.extend_from_slice(&b[y..]);
    out
}

/// Keeps `order` as far as possible while placing every index after its
/// hard predecessors.
fn stable_topological(model: &Model, order: &[usize]) -> Vec<usize> {
    let n = model.num_indexes();
    let mut placed = vec![false; n];
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let next = order
            .iter()
            .copied()
            .find(|&i| !placed[i] && model.preds(i).iter().all(|&p| placed[p]))
            .expect("hard precedences are acyclic");
        placed[next] = true;
        out.push(next);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{fixtures, Instance};

    #[test]
    fn weights_follow_worked_numbers() {
        // One query, plan {0,1,2} speedup 10 and plan {3,4} speedup 5.
        let text = r#"{"name":"w","indexes":[{"id":0,"ctime":1},{"id":1,"ctime":1},{"id":2,"ctime":1},{"id":3,"ctime":1},{"id":4,"ctime":1}],
          "queries":[{"id":0,"qtime":100}],
          "plans":[{"id":0,"query":0,"indexes":[0,1,2],"qspdup":10},
                   {"id":1,"query":0,"indexes":[3,4],"qspdup":5}]}"#;
        let w = edge_weights(&Model::new(&Instance::from_json_checked(text).unwrap()).unwrap());
        assert!((w.get(0, 1) - 10.0 / 3.0).abs() < 1e-12);
        assert!((w.get(3, 4) - 2.5).abs() < 1e-12);
        assert!((w.get(0, 3) - 2.5).abs() < 1e-12);
        assert_eq!(w.get(3, 0), w.get(0, 3));
    }

    #[test]
    fn singleton_plan_has_no_pairs() {
        let w = edge_weights(&Model::new(&fixtures::single()).unwrap());
        assert_eq!(w.pairs().count(), 0);
    }

    #[test]
    fn alliance_weight() {
        let w = edge_weights(&Model::new(&fixtures::alliance()).unwrap());
        assert_eq!(w.get(0, 1), 25.0);
    }

    #[test]
    fn dp_merge_prefers_larger_drop() {
        let m = Model::new(&fixtures::compete()).unwrap();
        assert_eq!(dp_schedule(&m).indices(), vec![1, 0]);
        let m = Model::new(&fixtures::alliance()).unwrap();
        assert_eq!(dp_schedule(&m).indices(), vec![0, 1]);
    }

    #[test]
    fn dp_separates_clusters() {
        // Two queries, each served by a pair of indexes.
        let text = r#"{"name":"c","indexes":[{"id":0,"ctime":1},{"id":1,"ctime":1},{"id":2,"ctime":1},{"id":3,"ctime":1}],
          "queries":[{"id":0,"qtime":100},{"id":1,"qtime":100}],
          "plans":[{"id":0,"query":0,"indexes":[0,2],"qspdup":10},
                   {"id":1,"query":1,"indexes":[1,3],"qspdup":50}]}"#;
        let m = Model::new(&Instance::from_json_checked(text).unwrap()).unwrap();
        let w = edge_weights(&m);
        let cut = stoer_wagner(&w.sub(&[0, 1, 2, 3]));
        assert_eq!(cut.weight, 0.0);
        let side = cut.side;
        assert!(side == vec![0, 2] || side == vec![1, 3]);
        let order = dp_schedule(&m).indices();
        let mut sorted = order.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, vec![0, 1, 2, 3]);
    }
}
