#![allow(dead_code)]

use grounding_core::bn::{ConditionalTable, DiscreteNode, EvidenceAssignment, Network};
use rand::Rng;

/// Random DAG over at most `max_nodes` nodes with 2..=`max_states` states,
/// at most three parents per node, and some structural zeros. State
/// counts are trimmed until the joint space is at most `max_joint`.
pub fn random_network<R: Rng>(rng: &mut R, max_nodes: usize, max_states: usize, max_joint: u128) -> Network {
    loop {
        let n = rng.random_range(1..=max_nodes);
        let mut cards: Vec<usize> = (0..n).map(|_| rng.random_range(2..=max_states)).collect();
        while cards.iter().map(|&c| c as u128).product::<u128>() > max_joint {
            let wide: Vec<usize> = (0..n).filter(|&i| cards[i] > 2).collect();
            if wide.is_empty() {
                break;
            }
            cards[wide[rng.random_range(0..wide.len())]] -= 1;
        }
        let mut nodes = Vec::with_capacity(n);
        let mut tables = Vec::with_capacity(n);
        for v in 0..n {
            let mut parents: Vec<usize> = (0..v).filter(|_| rng.random_bool(0.4)).collect();
            while parents.len() > 3 {
                parents.remove(rng.random_range(0..parents.len()));
            }
            let ids: Vec<String> = parents.iter().map(|p| format!("X{p}")).collect();
            let refs: Vec<&str> = ids.iter().map(String::as_str).collect();
            let labels: Vec<String> = (0..cards[v]).map(|s| format!("s{s}")).collect();
            let label_refs: Vec<&str> = labels.iter().map(String::as_str).collect();
            nodes.push(DiscreteNode::labeled(format!("X{v}"), &label_refs, &refs));
            let rows: usize = parents.iter().map(|&p| cards[p]).product();
            let mut values = Vec::with_capacity(rows * cards[v]);
            for _ in 0..rows {
                let mut row: Vec<f64> = (0..cards[v])
                    .map(|_| if rng.random_bool(0.15) { 0.0 } else { rng.random::<f64>() + 1e-3 })
                    .collect();
                if row.iter().all(|&x| x == 0.0) {
                    row[0] = 1.0;
                }
                let z: f64 = row.iter().sum();
                row.iter_mut().for_each(|x| *x /= z);
                let last = row.len() - 1;
                row[last] = 1.0 - row[..last].iter().sum::<f64>();
                if row[last] < 0.0 {
                    row[last] = 0.0;
                }
                values.extend(row);
            }
            tables.push(ConditionalTable::new(format!("X{v}"), values));
        }
        if let Ok(net) = Network::new(nodes, tables) {
            return net;
        }
    }
}

/// Hard evidence on a random subset of nodes.
pub fn random_evidence<R: Rng>(rng: &mut R, net: &Network) -> EvidenceAssignment {
    let mut ev = EvidenceAssignment::new();
    for (i, node) in net.nodes().iter().enumerate() {
        if rng.random_bool(0.3) {
            ev.set(node.id.clone(), rng.random_range(0..net.cardinality(i)));
        }
    }
    ev
}

pub fn all_ids(net: &Network) -> Vec<String> {
    net.nodes().iter().map(|n| n.id.clone()).collect()
}

/// Largest elementwise difference between two marginal maps.
pub fn max_diff(
    a: &std::collections::BTreeMap<String, Vec<f64>>,
    b: &std::collections::BTreeMap<String, Vec<f64>>,
) -> f64 {
    assert_eq!(a.keys().collect::<Vec<_>>(), b.keys().collect::<Vec<_>>());
    a.iter()
        .flat_map(|(k, va)| va.iter().zip(&b[k]).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max)
}
