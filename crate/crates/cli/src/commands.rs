//! Batch commands: assessment from files, bundled case runs, and flow-rate ingestion.

use std::fs::File;
use std::path::{Path, PathBuf};

use grounding_core::cases::{check_case, Check};
use grounding_core::ingest::{flow_rate_from_levels, FlowEstimate, FlowQuality, IngestError, LevelSeries, PiecewiseVolumeCurve};
use grounding_core::model::{IncidentConfig, ModelConfig, ShipParticulars};
use grounding_core::session::parse_evidence_lines;
use grounding_core::{load_case, CaseError, Evidence, IncidentSession, PosteriorReport, SessionError};
use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {reason}")]
    Read { path: String, reason: String },
    #[error("cannot write {path}: {reason}")]
    Write { path: String, reason: String },
    #[error("{path}: {reason}")]
    Parse { path: String, reason: String },
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error(transparent)]
    Case(#[from] CaseError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
}

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Read {
        path: path.display().to_string(),
        reason: e.to_string(),
    })
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = read_text(path)?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| CliError::Parse {
        path: format!("{} at {}", path.display(), e.path()),
        reason: e.inner().to_string(),
    })
}

fn open(path: &Path) -> Result<File, CliError> {
    File::open(path).map_err(|e| CliError::Read {
        path: path.display().to_string(),
        reason: e.to_string(),
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Write {
        path: path.display().to_string(),
        reason: e.to_string(),
    })
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serializes")
}

/// Discretization knobs shared by `assess` and `case run`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Synthesis {
    pub seed: Option<u64>,
    pub samples_per_cell: Option<usize>,
}

impl Synthesis {
    fn apply(self, model: &mut ModelConfig) {
        if let Some(seed) = self.seed {
            model.synthesis.seed = seed;
        }
        if let Some(n) = self.samples_per_cell {
            model.synthesis.samples_per_cell = n;
        }
    }
}

/// Evidence from a JSON array or JSON Lines file.
pub fn read_evidence(path: &Path) -> Result<Vec<Evidence>, CliError> {
    let text = read_text(path)?;
    if text.trim_start().starts_with('[') {
        serde_json::from_str(&text).map_err(|e| CliError::Parse {
            path: path.display().to_string(),
            reason: e.to_string(),
        })
    } else {
        Ok(parse_evidence_lines(&text)?)
    }
}

pub struct AssessInput {
    pub ship: PathBuf,
    pub incident: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub evidence: Option<PathBuf>,
    pub query: Vec<String>,
    pub synthesis: Synthesis,
}

pub fn assess(input: &AssessInput) -> Result<PosteriorReport, CliError> {
    let ship: ShipParticulars = read_json(&input.ship)?;
    let incident: IncidentConfig = match &input.incident {
        Some(p) => read_json(p)?,
        None => IncidentConfig::default(),
    };
    let mut model: ModelConfig = match &input.model {
        Some(p) => read_json(p)?,
        None => ModelConfig::default(),
    };
    input.synthesis.apply(&mut model);
    let mut session = IncidentSession::create(ship, model, incident)?;
    if let Some(p) = &input.evidence {
        session.add_evidence_batch(read_evidence(p)?)?;
    }
    Ok(session.report(&input.query)?)
}

/// Result of a bundled case run.
#[derive(Debug, Serialize)]
pub struct CaseRun {
    pub case: String,
    pub checks: Vec<Check>,
    pub posteriors: PosteriorReport,
    pub warnings: Vec<String>,
}

impl CaseRun {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Runs a bundled case and writes `<name>.report.json` and
/// `<name>.histogram.csv` into `out_dir`.
pub fn run_case(name: &str, synthesis: Synthesis, out_dir: &Path) -> Result<CaseRun, CliError> {
    let mut case = load_case(name)?;
    synthesis.apply(&mut case.model);
    let session = case.session()?;
    let posteriors = session.report(&[])?;
    let run = CaseRun {
        case: case.name.clone(),
        checks: check_case(&case, &posteriors),
        posteriors,
        warnings: session.warnings().to_vec(),
    };
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::Write {
        path: out_dir.display().to_string(),
        reason: e.to_string(),
    })?;
    write_text(&out_dir.join(format!("{}.report.json", run.case)), &to_json(&run))?;
    write_text(
        &out_dir.join(format!("{}.histogram.csv", run.case)),
        &run.posteriors.histogram_csv(),
    )?;
    Ok(run)
}

pub fn flow(levels: &Path, volume_curve: &Path, window: f64, quality: FlowQuality) -> Result<FlowEstimate, CliError> {
    let tank = levels
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let series = LevelSeries::from_csv(tank, open(levels)?)?;
    let curve = PiecewiseVolumeCurve::from_csv(open(volume_curve)?)?;
    Ok(flow_rate_from_levels(&series, &curve, window, quality)?)
}
