//! Exact inference by clustering: moralize, triangulate with greedy
//! min-fill, connect the maximal cliques into a maximum-weight spanning
//! tree and propagate Hugin-style (collect to the root, then distribute
//! with separator division).

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::network::{EvidenceAssignment, Network};
use super::BnError;

/// A message or root potential whose mass falls below this is treated as
/// evidence of probability zero.
pub const IMPOSSIBLE_EVIDENCE_THRESHOLD: f64 = 1e-300;

#[derive(Debug, Clone)]
pub struct Clique {
    /// Node indices, ascending. The last variable varies fastest in the table.
    pub vars: Vec<usize>,
    cards: Vec<usize>,
    strides: Vec<usize>,
    size: usize,
}

impl Clique {
    fn new(vars: Vec<usize>, net: &Network) -> Self {
        let cards: Vec<usize> = vars.iter().map(|&v| net.cardinality(v)).collect();
        let mut strides = vec![1usize; vars.len()];
        for k in (0..vars.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * cards[k + 1];
        }
        let size = cards.iter().product();
        Clique {
            vars,
            cards,
            strides,
            size,
        }
    }

    /// Number of entries in the clique potential.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn contains(&self, v: usize) -> bool {
        self.vars.binary_search(&v).is_ok()
    }

    fn position(&self, v: usize) -> Option<usize> {
        self.vars.binary_search(&v).ok()
    }

    /// Maps every entry of this clique to `sum(coord(var) * stride)` over
    /// the given `(var, stride)` pairs.
    fn linear_map(&self, targets: &[(usize, usize)]) -> Vec<u32> {
        let weights: Vec<usize> = self
            .vars
            .iter()
            .map(|v| targets.iter().find(|(t, _)| t == v).map_or(0, |&(_, s)| s))
            .collect();
        let n = self.vars.len();
        let mut map = Vec::with_capacity(self.size);
        let mut coords = vec![0usize; n];
        let mut acc = 0usize;
        for _ in 0..self.size {
            map.push(acc as u32);
            let mut k = n;
            while k > 0 {
                k -= 1;
                coords[k] += 1;
                acc += weights[k];
                if coords[k] < self.cards[k] {
                    break;
                }
                acc -= weights[k] * self.cards[k];
                coords[k] = 0;
            }
        }
        map
    }
}

#[derive(Debug, Clone)]
struct TreeEdge {
    a: usize,
    b: usize,
    sep_vars: Vec<usize>,
    sep_size: usize,
    map_a: Vec<u32>,
    map_b: Vec<u32>,
}

impl TreeEdge {
    fn map_for(&self, clique: usize) -> &[u32] {
        if clique == self.a {
            &self.map_a
        } else {
            &self.map_b
        }
    }
}

/// A compiled, immutable junction tree. Inference calls own their
/// workspace, so one tree can serve concurrent queries.
#[derive(Debug, Clone)]
pub struct JunctionTree {
    net: Network,
    cliques: Vec<Clique>,
    edges: Vec<TreeEdge>,
    /// Breadth-first order from the root: (clique, edge to parent).
    order: Vec<(usize, Option<usize>)>,
    initial: Vec<Vec<f64>>,
    /// Smallest clique holding each node.
    home: Vec<usize>,
}

impl JunctionTree {
    pub fn compile(net: &Network) -> Result<Self, BnError> {
        let n = net.len();
        if n == 0 {
            return Err(BnError::EmptyNetwork);
        }

        let mut adj = vec![BTreeSet::new(); n];
        for v in 0..n {
            let family: Vec<usize> = net
                .parent_indices(v)
                .iter()
                .copied()
                .chain(std::iter::once(v))
                .collect();
            for (i, &a) in family.iter().enumerate() {
                for &b in &family[i + 1..] {
                    adj[a].insert(b);
                    adj[b].insert(a);
                }
            }
        }

        let clique_sets = triangulate(net, adj);
        let cliques: Vec<Clique> = clique_sets
            .into_iter()
            .map(|s| Clique::new(s.into_iter().collect(), net))
            .collect();
        if let Some(c) = cliques.iter().find(|c| c.size > u32::MAX as usize) {
            return Err(BnError::CliqueTooLarge(c.size));
        }

        let tree = spanning_tree(&cliques);
        check_running_intersection(net, &cliques, &tree)?;

        let edges: Vec<TreeEdge> = tree
            .into_iter()
            .map(|(a, b)| {
                let sep_vars: Vec<usize> = cliques[a]
                    .vars
                    .iter()
                    .copied()
                    .filter(|v| cliques[b].contains(*v))
                    .collect();
                let sep = Clique::new(sep_vars.clone(), net);
                let targets: Vec<(usize, usize)> =
                    sep.vars.iter().copied().zip(sep.strides.iter().copied()).collect();
                TreeEdge {
                    a,
                    b,
                    sep_size: sep.size,
                    map_a: cliques[a].linear_map(&targets),
                    map_b: cliques[b].linear_map(&targets),
                    sep_vars,
                }
            })
            .collect();

        let mut incident = vec![Vec::new(); cliques.len()];
        for (e, edge) in edges.iter().enumerate() {
            incident[edge.a].push(e);
            incident[edge.b].push(e);
        }
        let mut order = Vec::with_capacity(cliques.len());
        let mut seen = vec![false; cliques.len()];
        let mut queue = VecDeque::from([(0usize, None)]);
        seen[0] = true;
        while let Some((c, via)) = queue.pop_front() {
            order.push((c, via));
            for &e in &incident[c] {
                let other = if edges[e].a == c { edges[e].b } else { edges[e].a };
                if !seen[other] {
                    seen[other] = true;
                    queue.push_back((other, Some(e)));
                }
            }
        }

        let home: Vec<usize> = (0..n)
            .map(|v| smallest_containing(&cliques, &[v]).expect("every node lies in a clique"))
            .collect();

        let mut initial: Vec<Vec<f64>> = cliques.iter().map(|c| vec![1.0; c.size]).collect();
        for v in 0..n {
            let parents = net.parent_indices(v);
            let family: Vec<usize> = parents.iter().copied().chain(std::iter::once(v)).collect();
            let c = smallest_containing(&cliques, &family).ok_or_else(|| {
                BnError::Internal(format!("family of {} not covered", net.nodes()[v].id))
            })?;
            let mut targets = Vec::with_capacity(family.len());
            let mut stride = 1usize;
            targets.push((v, stride));
            stride *= net.cardinality(v);
            for &p in parents.iter().rev() {
                targets.push((p, stride));
                stride *= net.cardinality(p);
            }
            let map = cliques[c].linear_map(&targets);
            let table = &net.tables()[v].values;
            for (x, &k) in initial[c].iter_mut().zip(&map) {
                *x *= table[k as usize];
            }
        }

        Ok(JunctionTree {
            net: net.clone(),
            cliques,
            edges,
            order,
            initial,
            home,
        })
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    pub fn cliques(&self) -> &[Clique] {
        &self.cliques
    }

    /// Clique members as node ids.
    pub fn clique_ids(&self) -> Vec<Vec<String>> {
        self.cliques
            .iter()
            .map(|c| c.vars.iter().map(|&v| self.net.nodes()[v].id.clone()).collect())
            .collect()
    }

    /// Tree edges as `(clique, clique, separator ids)`.
    pub fn separators(&self) -> Vec<(usize, usize, Vec<String>)> {
        self.edges
            .iter()
            .map(|e| {
                let ids = e.sep_vars.iter().map(|&v| self.net.nodes()[v].id.clone()).collect();
                (e.a, e.b, ids)
            })
            .collect()
    }

    /// Total number of potential entries across all cliques.
    pub fn total_size(&self) -> usize {
        self.cliques.iter().map(|c| c.size).sum()
    }

    pub fn largest_clique(&self) -> &Clique {
        self.cliques.iter().max_by_key(|c| c.size).expect("non-empty")
    }

    /// True when every `{child} ∪ parents` lies inside some clique.
    pub fn preserves_families(&self) -> bool {
        (0..self.net.len()).all(|v| {
            let mut family: Vec<usize> = self.net.parent_indices(v).to_vec();
            family.push(v);
            smallest_containing(&self.cliques, &family).is_some()
        })
    }

    /// Running-intersection property and tree shape.
    pub fn verify(&self) -> Result<(), BnError> {
        let pairs: Vec<(usize, usize)> = self.edges.iter().map(|e| (e.a, e.b)).collect();
        check_running_intersection(&self.net, &self.cliques, &pairs)
    }

    /// Exact posterior marginals of the `query` nodes given hard evidence.
    pub fn infer_marginals(
        &self,
        ev: &EvidenceAssignment,
        query: &[&str],
    ) -> Result<BTreeMap<String, Vec<f64>>, BnError> {
        let observed = self.net.resolve_evidence(ev)?;
        let targets = self.net.resolve_query(query)?;
        let pot = self.propagate(&observed)?;
        Ok(targets
            .into_iter()
            .map(|v| (self.net.nodes()[v].id.clone(), self.marginal(&pot, v)))
            .collect())
    }

    /// Runs a full collect/distribute pass and returns calibrated potentials.
    fn propagate(&self, observed: &[(usize, usize)]) -> Result<Vec<Vec<f64>>, BnError> {
        let mut pot = self.initial.clone();
        for &(v, state) in observed {
            let c = &self.cliques[self.home[v]];
            let k = c.position(v).expect("home clique holds node");
            let (stride, card) = (c.strides[k], c.cards[k]);
            for (i, x) in pot[self.home[v]].iter_mut().enumerate() {
                if (i / stride) % card != state {
                    *x = 0.0;
                }
            }
        }

        let mut seps: Vec<Vec<f64>> = vec![Vec::new(); self.edges.len()];
        for &(c, via) in self.order.iter().rev() {
            let Some(e) = via else { continue };
            let edge = &self.edges[e];
            let parent = if edge.a == c { edge.b } else { edge.a };
            let mut msg = project(&pot[c], edge.map_for(c), edge.sep_size);
            normalize(&mut msg)?;
            for (x, &k) in pot[parent].iter_mut().zip(edge.map_for(parent)) {
                *x *= msg[k as usize];
            }
            seps[e] = msg;
        }
        let root = self.order[0].0;
        let z: f64 = pot[root].iter().sum();
        if !(z >= IMPOSSIBLE_EVIDENCE_THRESHOLD) || !z.is_finite() {
            return Err(BnError::ImpossibleEvidence);
        }
        pot[root].iter_mut().for_each(|x| *x /= z);

        for &(c, via) in &self.order {
            let Some(e) = via else { continue };
            let edge = &self.edges[e];
            let parent = if edge.a == c { edge.b } else { edge.a };
            let mut msg = project(&pot[parent], edge.map_for(parent), edge.sep_size);
            normalize(&mut msg)?;
            let ratio: Vec<f64> = msg
                .iter()
                .zip(&seps[e])
                .map(|(&new, &old)| if old > 0.0 { new / old } else { 0.0 })
                .collect();
            for (x, &k) in pot[c].iter_mut().zip(edge.map_for(c)) {
                *x *= ratio[k as usize];
            }
        }
        Ok(pot)
    }

    fn marginal(&self, pot: &[Vec<f64>], v: usize) -> Vec<f64> {
        let c = &self.cliques[self.home[v]];
        let k = c.position(v).expect("home clique holds node");
        let (stride, card) = (c.strides[k], c.cards[k]);
        let mut out = vec![0.0; card];
        for (i, &x) in pot[self.home[v]].iter().enumerate() {
            out[(i / stride) % card] += x;
        }
        let z: f64 = out.iter().sum();
        out.iter_mut().for_each(|x| *x /= z);
        out
    }
}

fn project(pot: &[f64], map: &[u32], size: usize) -> Vec<f64> {
    let mut out = vec![0.0; size];
    for (&x, &k) in pot.iter().zip(map) {
        out[k as usize] += x;
    }
    out
}

fn normalize(msg: &mut [f64]) -> Result<(), BnError> {
    let z: f64 = msg.iter().sum();
    if !(z >= IMPOSSIBLE_EVIDENCE_THRESHOLD) || !z.is_finite() {
        return Err(BnError::ImpossibleEvidence);
    }
    msg.iter_mut().for_each(|x| *x /= z);
    Ok(())
}

fn smallest_containing(cliques: &[Clique], vars: &[usize]) -> Option<usize> {
    cliques
        .iter()
        .enumerate()
        .filter(|(_, c)| vars.iter().all(|&v| c.contains(v)))
        .min_by_key(|(i, c)| (c.size, *i))
        .map(|(i, _)| i)
}

/// Greedy min-fill elimination, ties broken by node id. Returns the
/// maximal cliques in elimination order.
fn triangulate(net: &Network, mut adj: Vec<BTreeSet<usize>>) -> Vec<BTreeSet<usize>> {
    let n = adj.len();
    let mut alive = vec![true; n];
    let mut candidates: Vec<BTreeSet<usize>> = Vec::with_capacity(n);
    for _ in 0..n {
        let mut best: Option<(usize, usize)> = None;
        for v in (0..n).filter(|&v| alive[v]) {
            let nb: Vec<usize> = adj[v].iter().copied().collect();
            let mut fill = 0;
            for (i, &a) in nb.iter().enumerate() {
                for &b in &nb[i + 1..] {
                    if !adj[a].contains(&b) {
                        fill += 1;
                    }
                }
            }
            let better = match best {
                None => true,
                Some((bf, bv)) => fill < bf || (fill == bf && net.nodes()[v].id < net.nodes()[bv].id),
            };
            if better {
                best = Some((fill, v));
            }
        }
        let (_, v) = best.expect("a live node remains");
        let nb: Vec<usize> = adj[v].iter().copied().collect();
        for (i, &a) in nb.iter().enumerate() {
            for &b in &nb[i + 1..] {
                adj[a].insert(b);
                adj[b].insert(a);
            }
        }
        let mut clique: BTreeSet<usize> = nb.iter().copied().collect();
        clique.insert(v);
        for &a in &nb {
            adj[a].remove(&v);
        }
        adj[v].clear();
        alive[v] = false;
        candidates.push(clique);
    }

    let mut maximal: Vec<BTreeSet<usize>> = Vec::new();
    for (i, c) in candidates.iter().enumerate() {
        let dominated = candidates
            .iter()
            .enumerate()
            .any(|(j, d)| j != i && c.is_subset(d) && (c.len() < d.len() || j < i));
        if !dominated {
            maximal.push(c.clone());
        }
    }
    maximal
}

/// Kruskal maximum-weight spanning tree on separator sizes. Zero-weight
/// edges join disconnected components so the result is always one tree.
fn spanning_tree(cliques: &[Clique]) -> Vec<(usize, usize)> {
    let m = cliques.len();
    let mut candidates = Vec::new();
    for a in 0..m {
        for b in a + 1..m {
            let w = cliques[a].vars.iter().filter(|&&v| cliques[b].contains(v)).count();
            candidates.push((w, a, b));
        }
    }
    candidates.sort_by(|x, y| y.0.cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));

    let mut parent: Vec<usize> = (0..m).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut tree = Vec::with_capacity(m.saturating_sub(1));
    for (_, a, b) in candidates {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            tree.push((a, b));
        }
    }
    tree
}

fn check_running_intersection(
    net: &Network,
    cliques: &[Clique],
    tree: &[(usize, usize)],
) -> Result<(), BnError> {
    if tree.len() + 1 != cliques.len() {
        return Err(BnError::Internal("clique graph is not a tree".into()));
    }
    for v in 0..net.len() {
        let holders: Vec<usize> = (0..cliques.len()).filter(|&c| cliques[c].contains(v)).collect();
        if holders.is_empty() {
            return Err(BnError::Internal(format!("{} is in no clique", net.nodes()[v].id)));
        }
        // The cliques holding v must induce a connected subtree.
        let mut reached = vec![holders[0]];
        let mut frontier = vec![holders[0]];
        while let Some(c) = frontier.pop() {
            for &(a, b) in tree {
                let other = if a == c {
                    b
                } else if b == c {
                    a
                } else {
                    continue;
                };
                if cliques[other].contains(v) && !reached.contains(&other) {
                    reached.push(other);
                    frontier.push(other);
                }
            }
        }
        if reached.len() != holders.len() {
            return Err(BnError::Internal(format!(
                "running intersection fails for {}",
                net.nodes()[v].id
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bn::{ConditionalTable, DiscreteNode};

    fn binary(id: &str, parents: &[&str]) -> DiscreteNode {
        DiscreteNode::labeled(id, &["a", "b"], parents)
    }

    fn sorted_cliques(jt: &JunctionTree) -> Vec<Vec<String>> {
        let mut c = jt.clique_ids();
        c.iter_mut().for_each(|x| x.sort());
        c.sort();
        c
    }

    #[test]
    fn chain_has_two_cliques_and_one_separator() {
        let net = Network::new(
            vec![binary("A", &[]), binary("B", &["A"]), binary("C", &["B"])],
            vec![
                ConditionalTable::new("A", vec![0.4, 0.6]),
                ConditionalTable::new("B", vec![0.9, 0.1, 0.2, 0.8]),
                ConditionalTable::new("C", vec![0.7, 0.3, 0.5, 0.5]),
            ],
        )
        .unwrap();
        let jt = JunctionTree::compile(&net).unwrap();
        assert_eq!(sorted_cliques(&jt), vec![vec!["A", "B"], vec!["B", "C"]]);
        let seps = jt.separators();
        assert_eq!(seps.len(), 1);
        assert_eq!(seps[0].2, vec!["B".to_string()]);
    }

    #[test]
    fn collider_is_one_clique() {
        let net = Network::new(
            vec![binary("M", &[]), binary("V", &[]), binary("D", &["M", "V"])],
            vec![
                ConditionalTable::new("M", vec![0.5, 0.5]),
                ConditionalTable::new("V", vec![0.5, 0.5]),
                ConditionalTable::new("D", vec![1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 1.0]),
            ],
        )
        .unwrap();
        let jt = JunctionTree::compile(&net).unwrap();
        assert_eq!(sorted_cliques(&jt), vec![vec!["D", "M", "V"]]);
    }

    #[test]
    fn disconnected_components_still_form_a_tree() {
        let net = Network::new(
            vec![binary("A", &[]), binary("B", &["A"]), binary("X", &[])],
            vec![
                ConditionalTable::new("A", vec![0.4, 0.6]),
                ConditionalTable::new("B", vec![0.9, 0.1, 0.2, 0.8]),
                ConditionalTable::new("X", vec![0.25, 0.75]),
            ],
        )
        .unwrap();
        let jt = JunctionTree::compile(&net).unwrap();
        jt.verify().unwrap();
        let m = jt
            .infer_marginals(&EvidenceAssignment::new().with("B", 1), &["X", "A"])
            .unwrap();
        assert_eq!(m["X"], vec![0.25, 0.75]);
        // P(A=b | B=b) = 0.6*0.8 / (0.4*0.1 + 0.6*0.8)
        assert!((m["A"][1] - 0.48 / 0.52).abs() < 1e-12);
    }

    #[test]
    fn linear_map_matches_strides() {
        let net = Network::new(
            vec![
                DiscreteNode::labeled("A", &["0", "1"], &[]),
                DiscreteNode::labeled("B", &["0", "1", "2"], &[]),
            ],
            vec![
                ConditionalTable::new("A", vec![0.5, 0.5]),
                ConditionalTable::new("B", vec![0.2, 0.3, 0.5]),
            ],
        )
        .unwrap();
        let c = Clique::new(vec![0, 1], &net);
        assert_eq!(c.linear_map(&[(1, 1)]), vec![0, 1, 2, 0, 1, 2]);
        assert_eq!(c.linear_map(&[(0, 1)]), vec![0, 0, 0, 1, 1, 1]);
        assert_eq!(c.linear_map(&[(0, 1), (1, 2)]), vec![0, 2, 4, 1, 3, 5]);
    }
}
