//! Incident lifecycle: configuration, an append-only evidence log,
//! compiled-network caching, posterior queries and persistence.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{SystemTime, UNIX_EPOCH};

use log::{debug, warn};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::bn::{BnError, EvidenceAssignment, JunctionTree, State};
use crate::model::nodes::{self, DAMAGE, IHB, R_C};
use crate::model::{
    build_network, DamageStateSpec, GroundingModel, IncidentConfig, ModelConfig, ModelError, ShipParticulars,
    DEFAULT_GROUND_REACTION_MAX_T,
};
use crate::report::PosteriorReport;

/// Session file format written by [`IncidentSession::save`].
pub const FORMAT_VERSION: &str = "1.1";
/// Multiple of the calculated ground reaction the prior bound must cover.
const REACTION_HEADROOM: f64 = 1.5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SessionError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Inference(BnError),
    #[error("unknown node {0}")]
    UnknownNode(String),
    #[error("node {0} does not accept evidence")]
    NotObservable(String),
    #[error("{value} is outside the admissible range [{lo}, {hi}] of {node}")]
    OutOfRangeValue { node: String, value: f64, lo: f64, hi: f64 },
    #[error("invalid value for {node}: {reason}")]
    InvalidValue { node: String, reason: String },
    #[error("evidence is impossible under the model; it was not applied")]
    ImpossibleEvidence,
    #[error("no evidence with id {0}")]
    UnknownEvidenceId(u64),
    #[error("evidence {0} is already retracted")]
    AlreadyRetracted(u64),
    #[error("corrupt session file: {0}")]
    CorruptFile(String),
    #[error("session file version {found} is not supported (expected {supported})")]
    VersionMismatch { found: String, supported: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<BnError> for SessionError {
    fn from(e: BnError) -> Self {
        match e {
            BnError::ImpossibleEvidence => SessionError::ImpossibleEvidence,
            BnError::UnknownNode(n) => SessionError::UnknownNode(n),
            other => SessionError::Inference(other),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EvidenceId(pub u64);

impl fmt::Display for EvidenceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EvidenceValue {
    /// In the node's unit: tonnes, knots, metres, m³/s.
    Number(f64),
    State(String),
}

/// One observation of an observable node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub node: String,
    pub value: EvidenceValue,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub source: String,
}

impl Evidence {
    pub fn number(node: impl Into<String>, value: f64) -> Self {
        Evidence {
            node: node.into(),
            value: EvidenceValue::Number(value),
            timestamp: None,
            source: String::new(),
        }
    }

    pub fn state(node: impl Into<String>, label: impl Into<String>) -> Self {
        Evidence {
            node: node.into(),
            value: EvidenceValue::State(label.into()),
            timestamp: None,
            source: String::new(),
        }
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = source.into();
        self
    }

    pub fn at(mut self, timestamp: impl Into<String>) -> Self {
        self.timestamp = Some(timestamp.into());
        self
    }
}

/// Parses a JSON Lines batch, one [`Evidence`] per non-blank line.
pub fn parse_evidence_lines(text: &str) -> Result<Vec<Evidence>, SessionError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| SessionError::InvalidValue {
                node: format!("line {}", i + 1),
                reason: e.to_string(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum LogRecord {
    Add { id: EvidenceId, evidence: Evidence },
    Retract { id: EvidenceId },
}

/// Posterior marginal per node, in state order.
pub type Marginals = BTreeMap<String, Vec<f64>>;

/// A network and its junction tree for one effective configuration.
#[derive(Debug)]
pub struct CompiledModel {
    pub model: GroundingModel,
    pub tree: JunctionTree,
    pub structure_hash: String,
}

#[derive(Serialize, Deserialize)]
struct SessionFile {
    format_version: String,
    id: String,
    ship: ShipParticulars,
    model: ModelConfig,
    incident: IncidentConfig,
    log: Vec<LogRecord>,
}

/// One live incident.
///
/// Mutations take `&mut self`; queries and what-if analysis take `&self`
/// and may run concurrently.
#[derive(Debug)]
pub struct IncidentSession {
    id: String,
    ship: ShipParticulars,
    model: ModelConfig,
    incident: IncidentConfig,
    log: Vec<LogRecord>,
    cache: Mutex<HashMap<String, Arc<CompiledModel>>>,
    current: Arc<CompiledModel>,
    posteriors: Marginals,
    warnings: Vec<String>,
}

fn fresh_id() -> String {
    static COUNTER: AtomicU64 = AtomicU64::new(0);
    let nanos = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_nanos()).unwrap_or(0);
    let n = COUNTER.fetch_add(1, Ordering::Relaxed);
    let digest = Sha256::digest(format!("{nanos}:{n}:{}", std::process::id()));
    hex(&digest[..8])
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn sha256_json<T: Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("configuration serializes");
    hex(&Sha256::digest(bytes))
}

impl IncidentSession {
    pub fn create(ship: ShipParticulars, model: ModelConfig, incident: IncidentConfig) -> Result<Self, SessionError> {
        Self::with_id(fresh_id(), ship, model, incident)
    }

    pub fn with_id(
        id: impl Into<String>,
        ship: ShipParticulars,
        model: ModelConfig,
        incident: IncidentConfig,
    ) -> Result<Self, SessionError> {
        let mut session = IncidentSession {
            id: id.into(),
            current: Arc::new(compile(&ship, &model, &incident)?),
            ship,
            model,
            incident,
            log: Vec::new(),
            cache: Mutex::new(HashMap::new()),
            posteriors: Marginals::new(),
            warnings: Vec::new(),
        };
        session.remember(session.current.clone());
        session.refresh()?;
        Ok(session)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn ship(&self) -> &ShipParticulars {
        &self.ship
    }

    pub fn model_config(&self) -> &ModelConfig {
        &self.model
    }

    pub fn incident(&self) -> &IncidentConfig {
        &self.incident
    }

    pub fn log(&self) -> &[LogRecord] {
        &self.log
    }

    pub fn log_hash(&self) -> String {
        sha256_json(&self.log)
    }

    /// Hash of the effective configuration the current network was built from.
    pub fn structure_hash(&self) -> &str {
        &self.current.structure_hash
    }

    pub fn compiled(&self) -> &CompiledModel {
        &self.current
    }

    /// Latest posteriors of the damage descriptors and of IHB.
    pub fn posteriors(&self) -> &Marginals {
        &self.posteriors
    }

    /// Notes from the last update: overridden measurements, widened priors.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Evidence that has not been retracted, in log order.
    pub fn active_evidence(&self) -> Vec<(EvidenceId, Evidence)> {
        active(&self.log)
    }

    pub fn add_evidence(&mut self, evidence: Evidence) -> Result<EvidenceId, SessionError> {
        let id = EvidenceId(self.next_id());
        let mut set = self.active_evidence();
        set.push((id, evidence.clone()));
        let eval = self.evaluate(&set, &self.default_query())?;
        self.log.push(LogRecord::Add { id, evidence });
        self.commit(eval);
        Ok(id)
    }

    /// Applies a batch atomically: either every item is logged or none is.
    pub fn add_evidence_batch(&mut self, batch: Vec<Evidence>) -> Result<Vec<EvidenceId>, SessionError> {
        let mut set = self.active_evidence();
        let first = self.next_id();
        let ids: Vec<EvidenceId> = (0..batch.len() as u64).map(|k| EvidenceId(first + k)).collect();
        set.extend(ids.iter().copied().zip(batch.iter().cloned()));
        let eval = self.evaluate(&set, &self.default_query())?;
        for (id, evidence) in ids.iter().copied().zip(batch) {
            self.log.push(LogRecord::Add { id, evidence });
        }
        self.commit(eval);
        Ok(ids)
    }

    pub fn retract_evidence(&mut self, id: EvidenceId) -> Result<(), SessionError> {
        let added = self
            .log
            .iter()
            .any(|r| matches!(r, LogRecord::Add { id: i, .. } if *i == id));
        if !added {
            return Err(SessionError::UnknownEvidenceId(id.0));
        }
        if self.log.iter().any(|r| matches!(r, LogRecord::Retract { id: i } if *i == id)) {
            return Err(SessionError::AlreadyRetracted(id.0));
        }
        let set: Vec<_> = self.active_evidence().into_iter().filter(|(i, _)| *i != id).collect();
        let eval = self.evaluate(&set, &self.default_query())?;
        self.log.push(LogRecord::Retract { id });
        self.commit(eval);
        Ok(())
    }

    /// Posteriors under the current evidence plus `overlay`; the session is untouched.
    pub fn what_if(&self, overlay: &[Evidence]) -> Result<Marginals, SessionError> {
        Ok(self.what_if_nodes(overlay, &self.default_query())?.1)
    }

    /// Like [`IncidentSession::what_if`] for chosen nodes, also returning
    /// the network the answer was computed on.
    pub fn what_if_nodes(
        &self,
        overlay: &[Evidence],
        query: &[String],
    ) -> Result<(Arc<CompiledModel>, Marginals), SessionError> {
        let mut set = self.active_evidence();
        let base = self.next_id();
        set.extend(
            overlay
                .iter()
                .enumerate()
                .map(|(k, e)| (EvidenceId(base + k as u64), e.clone())),
        );
        let eval = self.evaluate(&set, query)?;
        Ok((eval.compiled, eval.marginals))
    }

    /// Posterior marginals of arbitrary nodes under the current evidence.
    pub fn query(&self, nodes: &[String]) -> Result<Marginals, SessionError> {
        if nodes == self.default_query().as_slice() {
            return Ok(self.posteriors.clone());
        }
        let assignment = self.assignment(&self.current, &self.active_evidence())?.0;
        let refs: Vec<&str> = nodes.iter().map(String::as_str).collect();
        Ok(self.current.tree.infer_marginals(&assignment, &refs)?)
    }

    /// Report for `nodes` (the damage descriptors when empty) under the current evidence.
    pub fn report(&self, nodes: &[String]) -> Result<PosteriorReport, SessionError> {
        let nodes = self.report_nodes(nodes);
        let marginals = self.query(&self.with_ihb(&nodes))?;
        Ok(PosteriorReport::new(&self.current.model, &marginals, &nodes))
    }

    /// Report under the current evidence plus `overlay`.
    pub fn what_if_report(&self, overlay: &[Evidence], nodes: &[String]) -> Result<PosteriorReport, SessionError> {
        let nodes = self.report_nodes(nodes);
        let (compiled, marginals) = self.what_if_nodes(overlay, &self.with_ihb(&nodes))?;
        Ok(PosteriorReport::new(&compiled.model, &marginals, &nodes))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), SessionError> {
        let text = self.to_json();
        let path = path.as_ref();
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, text).map_err(|e| SessionError::Io(e.to_string()))?;
        std::fs::rename(&tmp, path).map_err(|e| SessionError::Io(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SessionError> {
        let text = std::fs::read_to_string(path).map_err(|e| SessionError::Io(e.to_string()))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        let file = SessionFile {
            format_version: FORMAT_VERSION.into(),
            id: self.id.clone(),
            ship: self.ship.clone(),
            model: self.model.clone(),
            incident: self.incident.clone(),
            log: self.log.clone(),
        };
        serde_json::to_string_pretty(&file).expect("session serializes")
    }

    /// Rebuilds a session from its file form and replays the log.
    pub fn from_json(text: &str) -> Result<Self, SessionError> {
        let header: serde_json::Value =
            serde_json::from_str(text).map_err(|e| SessionError::CorruptFile(e.to_string()))?;
        let found = header
            .get("format_version")
            .and_then(|v| v.as_str())
            .ok_or_else(|| SessionError::CorruptFile("missing format_version".into()))?
            .to_string();
        let migration = check_version(&found)?;
        let file: SessionFile =
            serde_json::from_value(header).map_err(|e| SessionError::CorruptFile(e.to_string()))?;
        let mut session = Self::with_id(file.id, file.ship, file.model, file.incident)?;
        let set = active(&file.log);
        let eval = session
            .evaluate(&set, &session.default_query())
            .map_err(|e| SessionError::CorruptFile(format!("log does not replay: {e}")))?;
        session.log = file.log;
        session.commit(eval);
        if let Some(note) = migration {
            session.warnings.push(note);
        }
        Ok(session)
    }

    fn next_id(&self) -> u64 {
        self.log
            .iter()
            .map(|r| match r {
                LogRecord::Add { id, .. } | LogRecord::Retract { id } => id.0 + 1,
            })
            .max()
            .unwrap_or(1)
    }

    fn default_query(&self) -> Vec<String> {
        let net = self.current.model.network();
        DAMAGE
            .iter()
            .chain(std::iter::once(&IHB))
            .filter(|id| net.index_of(id).is_some())
            .map(|s| s.to_string())
            .collect()
    }

    fn report_nodes(&self, nodes: &[String]) -> Vec<String> {
        if nodes.is_empty() {
            let net = self.current.model.network();
            DAMAGE
                .iter()
                .filter(|id| net.index_of(id).is_some())
                .map(|s| s.to_string())
                .collect()
        } else {
            nodes.to_vec()
        }
    }

    fn with_ihb(&self, nodes: &[String]) -> Vec<String> {
        let mut q = nodes.to_vec();
        if self.current.model.network().index_of(IHB).is_some() && !q.iter().any(|n| n == IHB) {
            q.push(IHB.to_string());
        }
        q
    }

    fn remember(&self, compiled: Arc<CompiledModel>) {
        self.cache
            .lock()
            .expect("cache lock")
            .insert(compiled.structure_hash.clone(), compiled);
    }

    /// Incident configuration with the ground-reaction bound widened to
    /// cover the calculated reaction.
    fn effective_incident(&self, set: &[(EvidenceId, Evidence)]) -> (IncidentConfig, Option<String>) {
        let mut incident = self.incident.clone();
        let reaction = set
            .iter()
            .rev()
            .find(|(_, e)| e.node == R_C)
            .and_then(|(_, e)| match e.value {
                EvidenceValue::Number(x) if x.is_finite() => Some(x),
                _ => None,
            });
        let base = incident.ground_reaction_max_t.unwrap_or(DEFAULT_GROUND_REACTION_MAX_T);
        let mut note = None;
        if let Some(r) = reaction.filter(|_| self.model.modules.hydrostatic) {
            let widened = base.max(REACTION_HEADROOM * r);
            if widened > base {
                incident.ground_reaction_max_t = Some(widened);
            }
            if r > base {
                note = Some(format!(
                    "calculated ground reaction {r} t exceeds the prior bound {base} t; bound widened to {widened} t"
                ));
            }
        }
        (incident, note)
    }

    fn compiled_for(&self, incident: &IncidentConfig) -> Result<Arc<CompiledModel>, SessionError> {
        let hash = structure_hash(&self.ship, &self.model, incident);
        if let Some(c) = self.cache.lock().expect("cache lock").get(&hash) {
            return Ok(c.clone());
        }
        debug!("compiling network {hash}");
        let compiled = Arc::new(compile(&self.ship, &self.model, incident)?);
        self.remember(compiled.clone());
        Ok(compiled)
    }

    /// Hard evidence for `set`, the latest record per node winning.
    fn assignment(
        &self,
        compiled: &CompiledModel,
        set: &[(EvidenceId, Evidence)],
    ) -> Result<(EvidenceAssignment, Vec<String>), SessionError> {
        let mut assignment = EvidenceAssignment::new();
        let mut notes = Vec::new();
        let mut seen: BTreeMap<&str, EvidenceId> = BTreeMap::new();
        for (id, e) in set {
            let state = map_value(&compiled.model, e)?;
            if let Some(prev) = seen.insert(e.node.as_str(), *id) {
                notes.push(format!("evidence {id} on {} supersedes evidence {prev}", e.node));
            }
            assignment.set(e.node.clone(), state);
        }
        Ok((assignment, notes))
    }

    fn evaluate(&self, set: &[(EvidenceId, Evidence)], query: &[String]) -> Result<Evaluation, SessionError> {
        for (_, e) in set {
            if !nodes::is_observable(&e.node) {
                return Err(if self.current.model.network().index_of(&e.node).is_some() {
                    SessionError::NotObservable(e.node.clone())
                } else {
                    SessionError::UnknownNode(e.node.clone())
                });
            }
        }
        let (incident, note) = self.effective_incident(set);
        let compiled = self.compiled_for(&incident)?;
        let (assignment, mut notes) = self.assignment(&compiled, set)?;
        notes.extend(note);
        notes.extend(compiled.model.warnings().iter().cloned());
        let refs: Vec<&str> = query
            .iter()
            .map(String::as_str)
            .filter(|id| compiled.model.network().index_of(id).is_some())
            .collect();
        let marginals = compiled.tree.infer_marginals(&assignment, &refs)?;
        Ok(Evaluation {
            compiled,
            marginals,
            notes,
        })
    }

    fn commit(&mut self, eval: Evaluation) {
        for n in &eval.notes {
            warn!("session {}: {n}", self.id);
        }
        self.current = eval.compiled;
        self.posteriors = eval.marginals;
        self.warnings = eval.notes;
    }

    fn refresh(&mut self) -> Result<(), SessionError> {
        let eval = self.evaluate(&self.active_evidence(), &self.default_query())?;
        self.commit(eval);
        Ok(())
    }
}

struct Evaluation {
    compiled: Arc<CompiledModel>,
    marginals: Marginals,
    notes: Vec<String>,
}

fn active(log: &[LogRecord]) -> Vec<(EvidenceId, Evidence)> {
    let retracted: Vec<EvidenceId> = log
        .iter()
        .filter_map(|r| match r {
            LogRecord::Retract { id } => Some(*id),
            _ => None,
        })
        .collect();
    log.iter()
        .filter_map(|r| match r {
            LogRecord::Add { id, evidence } if !retracted.contains(id) => Some((*id, evidence.clone())),
            _ => None,
        })
        .collect()
}

fn check_version(found: &str) -> Result<Option<String>, SessionError> {
    let parse = |v: &str| -> Option<(u32, u32)> {
        let (a, b) = v.split_once('.')?;
        Some((a.parse().ok()?, b.parse().ok()?))
    };
    let (cur_major, cur_minor) = parse(FORMAT_VERSION).expect("valid version");
    let mismatch = || SessionError::VersionMismatch {
        found: found.into(),
        supported: FORMAT_VERSION.into(),
    };
    let (major, minor) = parse(found).ok_or_else(mismatch)?;
    if major != cur_major || minor > cur_minor {
        return Err(mismatch());
    }
    Ok((minor < cur_minor).then(|| format!("migrated session file from format {found} to {FORMAT_VERSION}")))
}

pub fn structure_hash(ship: &ShipParticulars, model: &ModelConfig, incident: &IncidentConfig) -> String {
    sha256_json(&(ship, model, incident))
}

fn compile(ship: &ShipParticulars, model: &ModelConfig, incident: &IncidentConfig) -> Result<CompiledModel, SessionError> {
    let spec = DamageStateSpec::for_config(ship, model)?;
    let grounding = build_network(ship, model, incident, &spec)?;
    let tree = JunctionTree::compile(grounding.network())?;
    Ok(CompiledModel {
        model: grounding,
        tree,
        structure_hash: structure_hash(ship, model, incident),
    })
}

/// State index of an observation, or why it cannot be applied.
fn map_value(model: &GroundingModel, e: &Evidence) -> Result<usize, SessionError> {
    let node = model
        .network()
        .node(&e.node)
        .ok_or_else(|| SessionError::UnknownNode(format!("{} (its module is disabled)", e.node)))?;
    match (&e.value, node.states.first()) {
        (EvidenceValue::Number(x), Some(State::Interval { .. })) => {
            let bins = model.binning(&e.node).expect("interval node has bins");
            bins.locate(*x).ok_or(SessionError::OutOfRangeValue {
                node: e.node.clone(),
                value: *x,
                lo: bins.lo(),
                hi: bins.hi(),
            })
        }
        (EvidenceValue::State(label), Some(State::Label(_))) => {
            node.state_index(label).ok_or_else(|| SessionError::InvalidValue {
                node: e.node.clone(),
                reason: format!(
                    "{label:?} is not one of {}",
                    node.states
                        .iter()
                        .map(|s| match s {
                            State::Label(l) => l.clone(),
                            State::Interval { lo, hi } => format!("[{lo}, {hi})"),
                        })
                        .collect::<Vec<_>>()
                        .join(", ")
                ),
            })
        }
        (EvidenceValue::Number(_), _) => Err(SessionError::InvalidValue {
            node: e.node.clone(),
            reason: "expects a state label".into(),
        }),
        (EvidenceValue::State(_), _) => Err(SessionError::InvalidValue {
            node: e.node.clone(),
            reason: "expects a number".into(),
        }),
    }
}
