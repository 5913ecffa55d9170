//! Constructive orders: interaction-guided greedy, min-cut clustering with
//! an interleaving merge, and uniformly random feasible orders.

mod dp;
mod greedy;
mod mincut;

pub use dp::{dp_schedule, edge_weights, EdgeWeights};
pub use greedy::greedy;
pub use mincut::{stoer_wagner, MinCut};

use rand::Rng;

use crate::eval::Deployment;
use crate::model::Model;

/// A random order respecting the hard precedences: each step picks uniformly
/// among the indexes whose predecessors are already placed.
pub fn random_order<R: Rng + ?Sized>(model: &Model, rng: &mut R) -> Deployment {
    let n = model.num_indexes();
    let mut waiting: Vec<usize> = (0..n).map(|i| model.preds(i).len()).collect();
    let mut ready: Vec<usize> = (0..n).filter(|&i| waiting[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while !ready.is_empty() {
        let k = rng.random_range(0..ready.len());
        let i = ready.swap_remove(k);
        order.push(i);
        for &s in model.succs(i) {
            waiting[s] -= 1;
            if waiting[s] == 0 {
                ready.push(s);
            }
        }
    }
    Deployment::from_indices(order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{generate, GenProfile};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_orders_respect_precedences() {
        let mut profile = GenProfile::custom(10, 6, 3);
        profile.precedences = 6;
        let inst = generate(&profile, 4).unwrap();
        let m = Model::new(&inst).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let d = random_order(&m, &mut rng);
            d.check_permutation(10).unwrap();
            assert!(m.respects_precedences(&d.order));
        }
    }
}
