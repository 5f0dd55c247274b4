use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::BnError;

/// Tolerance on the row sums of a conditional table.
pub const ROW_SUM_TOLERANCE: f64 = 1e-12;

/// A single state of a discrete variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum State {
    Label(String),
    /// Half-open numeric interval `[lo, hi)`.
    Interval { lo: f64, hi: f64 },
}

impl State {
    pub fn label(s: impl Into<String>) -> Self {
        State::Label(s.into())
    }

    pub fn interval(&self) -> Option<(f64, f64)> {
        match *self {
            State::Interval { lo, hi } => Some((lo, hi)),
            State::Label(_) => None,
        }
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            State::Label(s) => f.write_str(s),
            State::Interval { lo, hi } => write!(f, "[{lo}, {hi})"),
        }
    }
}

/// A named discrete random variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteNode {
    pub id: String,
    pub states: Vec<State>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<String>,
    pub parents: Vec<String>,
}

impl DiscreteNode {
    pub fn new(id: impl Into<String>, states: Vec<State>, parents: &[&str]) -> Self {
        DiscreteNode {
            id: id.into(),
            states,
            unit: None,
            parents: parents.iter().map(|p| p.to_string()).collect(),
        }
    }

    /// Node whose states are the given labels.
    pub fn labeled(id: impl Into<String>, labels: &[&str], parents: &[&str]) -> Self {
        Self::new(id, labels.iter().map(|l| State::label(*l)).collect(), parents)
    }

    /// Node whose states are the consecutive intervals between `edges`.
    pub fn intervals(id: impl Into<String>, edges: &[f64], parents: &[&str]) -> Self {
        let states = edges
            .windows(2)
            .map(|w| State::Interval { lo: w[0], hi: w[1] })
            .collect();
        Self::new(id, states, parents)
    }

    pub fn with_unit(mut self, unit: impl Into<String>) -> Self {
        self.unit = Some(unit.into());
        self
    }

    pub fn cardinality(&self) -> usize {
        self.states.len()
    }

    pub fn state_index(&self, label: &str) -> Option<usize> {
        self.states
            .iter()
            .position(|s| matches!(s, State::Label(l) if l == label))
    }

    /// Edges of an all-interval node, `None` if any state is a label.
    pub fn edges(&self) -> Option<Vec<f64>> {
        let mut edges = Vec::with_capacity(self.states.len() + 1);
        for (i, s) in self.states.iter().enumerate() {
            let (lo, hi) = s.interval()?;
            if i == 0 {
                edges.push(lo);
            }
            edges.push(hi);
        }
        Some(edges)
    }

    fn validate(&self) -> Result<(), BnError> {
        if self.states.len() < 2 {
            return Err(BnError::TooFewStates(self.id.clone()));
        }
        let intervals: Vec<_> = self.states.iter().filter_map(State::interval).collect();
        if !intervals.is_empty() {
            if intervals.len() != self.states.len() {
                return Err(BnError::InvalidStates {
                    node: self.id.clone(),
                    reason: "mixes labeled and interval states".into(),
                });
            }
            for (i, &(lo, hi)) in intervals.iter().enumerate() {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return Err(BnError::InvalidStates {
                        node: self.id.clone(),
                        reason: format!("interval {i} is empty or not finite"),
                    });
                }
                if i > 0 && intervals[i - 1].1 != lo {
                    return Err(BnError::InvalidStates {
                        node: self.id.clone(),
                        reason: format!("interval {i} does not start where interval {} ends", i - 1),
                    });
                }
            }
        } else {
            let mut seen = HashSet::new();
            for s in &self.states {
                if let State::Label(l) = s {
                    if !seen.insert(l.as_str()) {
                        return Err(BnError::InvalidStates {
                            node: self.id.clone(),
                            reason: format!("duplicate label {l:?}"),
                        });
                    }
                }
            }
        }
        let mut seen = HashSet::new();
        for p in &self.parents {
            if !seen.insert(p.as_str()) {
                return Err(BnError::DuplicateParent {
                    node: self.id.clone(),
                    parent: p.clone(),
                });
            }
        }
        Ok(())
    }
}

/// `p(child | parents)` stored row-major: one row per joint parent state
/// (first parent slowest), each row a distribution over the child states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalTable {
    pub child: String,
    pub values: Vec<f64>,
}

impl ConditionalTable {
    pub fn new(child: impl Into<String>, values: Vec<f64>) -> Self {
        ConditionalTable {
            child: child.into(),
            values,
        }
    }

    /// Builds a table from explicit rows.
    pub fn from_rows(child: impl Into<String>, rows: &[Vec<f64>]) -> Self {
        Self::new(child, rows.iter().flatten().copied().collect())
    }

    pub fn row(&self, index: usize, child_card: usize) -> &[f64] {
        &self.values[index * child_card..(index + 1) * child_card]
    }
}

/// Hard evidence: node id to observed state index.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvidenceAssignment(BTreeMap<String, usize>);

impl EvidenceAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sets the observed state, replacing any previous observation of `node`.
    pub fn set(&mut self, node: impl Into<String>, state: usize) -> &mut Self {
        self.0.insert(node.into(), state);
        self
    }

    pub fn with(mut self, node: impl Into<String>, state: usize) -> Self {
        self.set(node, state);
        self
    }

    pub fn get(&self, node: &str) -> Option<usize> {
        self.0.get(node).copied()
    }

    pub fn remove(&mut self, node: &str) -> Option<usize> {
        self.0.remove(node)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, usize)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A validated discrete Bayesian network.
///
/// Nodes keep their insertion order; `parent_indices` and `tables` are
/// aligned with it.
#[derive(Debug, Clone)]
pub struct Network {
    nodes: Vec<DiscreteNode>,
    tables: Vec<ConditionalTable>,
    parent_indices: Vec<Vec<usize>>,
    index: HashMap<String, usize>,
}

impl Network {
    /// Validates nodes and tables and assembles the network.
    pub fn new(nodes: Vec<DiscreteNode>, tables: Vec<ConditionalTable>) -> Result<Self, BnError> {
        let mut index = HashMap::with_capacity(nodes.len());
        for (i, n) in nodes.iter().enumerate() {
            n.validate()?;
            if index.insert(n.id.clone(), i).is_some() {
                return Err(BnError::DuplicateNode(n.id.clone()));
            }
        }

        let mut parent_indices = Vec::with_capacity(nodes.len());
        for n in &nodes {
            let mut pi = Vec::with_capacity(n.parents.len());
            for p in &n.parents {
                match index.get(p) {
                    Some(&j) => pi.push(j),
                    None => {
                        return Err(BnError::UnknownParent {
                            node: n.id.clone(),
                            parent: p.clone(),
                        })
                    }
                }
            }
            parent_indices.push(pi);
        }

        check_acyclic(&nodes, &parent_indices)?;

        let mut by_child: HashMap<String, ConditionalTable> = HashMap::with_capacity(tables.len());
        for t in tables {
            if !index.contains_key(&t.child) {
                return Err(BnError::UnknownNode(t.child));
            }
            if by_child.contains_key(&t.child) {
                return Err(BnError::DuplicateTable(t.child));
            }
            by_child.insert(t.child.clone(), t);
        }

        let mut ordered = Vec::with_capacity(nodes.len());
        for (i, n) in nodes.iter().enumerate() {
            let table = by_child
                .remove(&n.id)
                .ok_or_else(|| BnError::MissingTable(n.id.clone()))?;
            let rows: usize = parent_indices[i].iter().map(|&p| nodes[p].cardinality()).product();
            let card = n.cardinality();
            if table.values.len() != rows * card {
                return Err(BnError::TableShape {
                    node: n.id.clone(),
                    expected: rows * card,
                    found: table.values.len(),
                });
            }
            for r in 0..rows {
                let row = table.row(r, card);
                let sum: f64 = row.iter().sum();
                let in_range = row.iter().all(|&p| (0.0..=1.0).contains(&p));
                if !in_range || (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                    return Err(BnError::NonStochasticRow {
                        node: n.id.clone(),
                        row: r,
                        sum,
                    });
                }
            }
            ordered.push(table);
        }

        Ok(Network {
            nodes,
            tables: ordered,
            parent_indices,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[DiscreteNode] {
        &self.nodes
    }

    pub fn tables(&self) -> &[ConditionalTable] {
        &self.tables
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn node(&self, id: &str) -> Option<&DiscreteNode> {
        self.index_of(id).map(|i| &self.nodes[i])
    }

    pub fn table(&self, id: &str) -> Option<&ConditionalTable> {
        self.index_of(id).map(|i| &self.tables[i])
    }

    pub fn parent_indices(&self, i: usize) -> &[usize] {
        &self.parent_indices[i]
    }

    pub fn cardinality(&self, i: usize) -> usize {
        self.nodes[i].cardinality()
    }

    /// Number of joint configurations, saturating at `u128::MAX`.
    pub fn joint_size(&self) -> u128 {
        self.nodes
            .iter()
            .fold(1u128, |acc, n| acc.saturating_mul(n.cardinality() as u128))
    }

    /// Resolves an assignment of ids to node indices, checking state ranges.
    pub(crate) fn resolve_evidence(&self, ev: &EvidenceAssignment) -> Result<Vec<(usize, usize)>, BnError> {
        ev.iter()
            .map(|(id, s)| {
                let i = self.index_of(id).ok_or_else(|| BnError::UnknownNode(id.to_string()))?;
                if s >= self.nodes[i].cardinality() {
                    return Err(BnError::StateOutOfRange {
                        node: id.to_string(),
                        state: s,
                        cardinality: self.nodes[i].cardinality(),
                    });
                }
                Ok((i, s))
            })
            .collect()
    }

    pub(crate) fn resolve_query(&self, query: &[&str]) -> Result<Vec<usize>, BnError> {
        query
            .iter()
            .map(|id| self.index_of(id).ok_or_else(|| BnError::UnknownNode(id.to_string())))
            .collect()
    }

    /// Graphviz rendering of the structure, for documentation.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph network {\n  rankdir=TB;\n");
        for n in &self.nodes {
            let label = match &n.unit {
                Some(u) => format!("{} [{}]\\n{} states", n.id, u, n.cardinality()),
                None => format!("{}\\n{} states", n.id, n.cardinality()),
            };
            out.push_str(&format!("  \"{}\" [label=\"{}\"];\n", n.id, label));
        }
        for n in &self.nodes {
            for p in &n.parents {
                out.push_str(&format!("  \"{}\" -> \"{}\";\n", p, n.id));
            }
        }
        out.push_str("}\n");
        out
    }
}

fn check_acyclic(nodes: &[DiscreteNode], parents: &[Vec<usize>]) -> Result<(), BnError> {
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut mark = vec![0u8; nodes.len()];
    for start in 0..nodes.len() {
        if mark[start] != 0 {
            continue;
        }
        let mut stack = vec![(start, 0usize)];
        mark[start] = 1;
        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            if *next < parents[v].len() {
                let p = parents[v][*next];
                *next += 1;
                match mark[p] {
                    0 => {
                        mark[p] = 1;
                        stack.push((p, 0));
                    }
                    1 => return Err(BnError::CycleDetected(nodes[p].id.clone())),
                    _ => {}
                }
            } else {
                mark[v] = 2;
                stack.pop();
            }
        }
    }
    Ok(())
}
