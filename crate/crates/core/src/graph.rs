//! Small graph helpers over dense `usize` node ids.

/// Tarjan's strongly connected components, iterative.
pub fn strongly_connected_components(succ: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = succ.len();
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps = Vec::new();
    let mut counter = 0;

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        let mut work: Vec<(usize, usize)> = vec![(root, 0)];
        while let Some(&mut (v, ref mut next)) = work.last_mut() {
            if *next == 0 && index[v] == UNSEEN {
                index[v] = counter;
                low[v] = counter;
                counter += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            if *next < succ[v].len() {
                let w = succ[v][*next];
                *next += 1;
                if index[w] == UNSEEN {
                    work.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            work.pop();
            if let Some(&(parent, _)) = work.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comps.push(comp);
            }
        }
    }
    comps
}

/// Transitive closure as dense boolean rows; `reach[a][b]` iff a path a -> b exists.
/// Returns `None` when the graph has a cycle.
pub fn transitive_closure(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Option<Vec<Vec<bool>>> {
    let mut succ = vec![Vec::new(); n];
    for (a, b) in edges {
        succ[a].push(b);
    }
    let order = topological_order(&succ)?;
    let mut reach = vec![vec![false; n]; n];
    for &v in order.iter().rev() {
        for k in 0..succ[v].len() {
            let w = succ[v][k];
            reach[v][w] = true;
            let (row_v, row_w) = if v < w {
                let (lo, hi) = reach.split_at_mut(w);
                (&mut lo[v], &hi[0])
            } else {
                let (lo, hi) = reach.split_at_mut(v);
                (&mut hi[0], &lo[w])
            };
            for (dst, &src) in row_v.iter_mut().zip(row_w.iter()) {
                *dst |= src;
            }
        }
    }
    Some(reach)
}

/// Kahn's algorithm with smallest-id tie breaking. `None` on a cycle.
pub fn topological_order(succ: &[Vec<usize>]) -> Option<Vec<usize>> {
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;
    let n = succ.len();
    let mut indeg = vec![0usize; n];
    for s in succ {
        for &w in s {
            indeg[w] += 1;
        }
    }
    let mut ready: BinaryHeap<Reverse<usize>> =
        (0..n).filter(|&v| indeg[v] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(v)) = ready.pop() {
        order.push(v);
        for &w in &succ[v] {
            indeg[w] -= 1;
            if indeg[w] == 0 {
                ready.push(Reverse(w));
            }
        }
    }
    (order.len() == n).then_some(order)
}
