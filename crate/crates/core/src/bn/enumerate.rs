//! Brute-force marginals by enumerating the full joint distribution.
//! Only usable on small networks; serves as the reference for the
//! junction tree.

use std::collections::BTreeMap;

use super::network::{EvidenceAssignment, Network};
use super::BnError;

/// Largest joint state space the enumerator will walk.
pub const MAX_JOINT_STATES: u128 = 10_000_000;

pub fn brute_force_marginals(
    net: &Network,
    ev: &EvidenceAssignment,
    query: &[&str],
) -> Result<BTreeMap<String, Vec<f64>>, BnError> {
    let size = net.joint_size();
    if size > MAX_JOINT_STATES {
        return Err(BnError::StateSpaceTooLarge(size));
    }
    let observed = net.resolve_evidence(ev)?;
    let targets = net.resolve_query(query)?;

    let n = net.len();
    let cards: Vec<usize> = (0..n).map(|v| net.cardinality(v)).collect();
    let mut fixed: Vec<Option<usize>> = vec![None; n];
    for &(v, s) in &observed {
        fixed[v] = Some(s);
    }

    let mut sums: Vec<Vec<f64>> = targets.iter().map(|&v| vec![0.0; cards[v]]).collect();
    let mut total = 0.0;
    let mut x: Vec<usize> = (0..n).map(|v| fixed[v].unwrap_or(0)).collect();
    'outer: loop {
        let mut p = 1.0;
        for v in 0..n {
            let mut row = 0;
            for &q in net.parent_indices(v) {
                row = row * cards[q] + x[q];
            }
            p *= net.tables()[v].values[row * cards[v] + x[v]];
            if p == 0.0 {
                break;
            }
        }
        if p > 0.0 {
            total += p;
            for (k, &v) in targets.iter().enumerate() {
                sums[k][x[v]] += p;
            }
        }
        // advance the odometer over unobserved nodes
        let mut v = n;
        loop {
            if v == 0 {
                break 'outer;
            }
            v -= 1;
            if fixed[v].is_some() {
                continue;
            }
            x[v] += 1;
            if x[v] < cards[v] {
                break;
            }
            x[v] = 0;
        }
    }

    if total <= 0.0 {
        return Err(BnError::ImpossibleEvidence);
    }
    Ok(targets
        .iter()
        .zip(sums)
        .map(|(&v, mut s)| {
            s.iter_mut().for_each(|p| *p /= total);
            (net.nodes()[v].id.clone(), s)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bn::{ConditionalTable, DiscreteNode};

    #[test]
    fn independent_roots_give_their_priors() {
        let net = Network::new(
            vec![
                DiscreteNode::labeled("A", &["x", "y"], &[]),
                DiscreteNode::labeled("B", &["x", "y", "z"], &[]),
            ],
            vec![
                ConditionalTable::new("A", vec![0.3, 0.7]),
                ConditionalTable::new("B", vec![0.2, 0.5, 0.3]),
            ],
        )
        .unwrap();
        let m = brute_force_marginals(&net, &EvidenceAssignment::new().with("A", 1), &["A", "B"]).unwrap();
        assert_eq!(m["A"], vec![0.0, 1.0]);
        assert!((m["B"][1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn guard_rejects_huge_networks() {
        let nodes: Vec<_> = (0..8)
            .map(|i| DiscreteNode::intervals(format!("X{i}"), &(0..=10).map(f64::from).collect::<Vec<_>>(), &[]))
            .collect();
        let tables = (0..8).map(|i| ConditionalTable::new(format!("X{i}"), vec![0.1; 10])).collect();
        let net = Network::new(nodes, tables).unwrap();
        assert!(matches!(
            brute_force_marginals(&net, &EvidenceAssignment::new(), &["X0"]),
            Err(BnError::StateSpaceTooLarge(_))
        ));
    }
}
