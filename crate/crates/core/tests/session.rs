use grounding_core::model::nodes::{D_T, D_V, IHB, R_C, Y_D};
use grounding_core::session::{parse_evidence_lines, EvidenceValue, LogRecord, FORMAT_VERSION};
use grounding_core::{load_case, Evidence, EvidenceId, IncidentSession, SessionError};

fn case1() -> IncidentSession {
    let c = load_case("case1").unwrap();
    IncidentSession::create(c.ship, c.model, c.incident).unwrap()
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

#[test]
fn evidence_moves_and_retraction_restores_the_posterior() {
    let mut s = case1();
    let prior = s.posteriors()[D_T].clone();
    let id = s.add_evidence(Evidence::number("V_r", 11.5)).unwrap();
    assert!(!close(&s.posteriors()[D_T], &prior, 1e-6));
    s.retract_evidence(id).unwrap();
    assert_eq!(s.posteriors()[D_T], prior);
    assert_eq!(s.retract_evidence(id), Err(SessionError::AlreadyRetracted(id.0)));
    assert_eq!(s.retract_evidence(EvidenceId(99)), Err(SessionError::UnknownEvidenceId(99)));
    assert_eq!(s.log().len(), 2);
}

#[test]
fn retracting_one_of_two_equals_the_other_alone() {
    let mut s = case1();
    let a = s.add_evidence(Evidence::number("V_r", 11.5)).unwrap();
    s.add_evidence(Evidence::number("M_r", 273_000.0)).unwrap();
    s.retract_evidence(a).unwrap();
    let mut only = case1();
    only.add_evidence(Evidence::number("M_r", 273_000.0)).unwrap();
    assert_eq!(s.posteriors(), only.posteriors());
}

#[test]
fn evidence_order_does_not_matter() {
    let ev = [
        Evidence::number("V_r", 11.5),
        Evidence::number("M_r", 273_000.0),
        Evidence::number("L_D_r", 180.0),
    ];
    let mut reference = None;
    for order in [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
        let mut s = case1();
        for k in order {
            s.add_evidence(ev[k].clone()).unwrap();
        }
        let post = s.posteriors().clone();
        match &reference {
            None => reference = Some(post),
            Some(r) => assert_eq!(&post, r),
        }
    }
}

#[test]
fn case1_prior_width_is_truncated_at_the_breadth() {
    let s = case1();
    let r = s.report(&[]).unwrap();
    let dt = r.get(D_T).unwrap();
    assert_eq!(*dt.edges.last().unwrap(), s.ship().breadth_m);
    assert_eq!(dt.edges[0], 0.0);
    let total: f64 = dt.masses.iter().sum();
    assert!((total - 1.0).abs() < 1e-9);
    assert!(dt.masses.iter().all(|&p| p > 0.0));
}

#[test]
fn negative_speed_is_out_of_range() {
    let mut s = case1();
    assert!(matches!(
        s.add_evidence(Evidence::number("V_r", -3.0)),
        Err(SessionError::OutOfRangeValue { .. })
    ));
}

#[test]
fn rejected_evidence_leaves_the_session_unchanged() {
    let mut s = case1();
    let hash = s.log_hash();
    let err = s.add_evidence(Evidence::number("V_r", 99.0)).unwrap_err();
    assert!(matches!(err, SessionError::OutOfRangeValue { .. }), "{err:?}");
    assert!(matches!(s.add_evidence(Evidence::number("D_t", 3.0)), Err(SessionError::NotObservable(_))));
    assert!(matches!(s.add_evidence(Evidence::number("XYZ", 3.0)), Err(SessionError::UnknownNode(_))));
    // hydraulic module is off in this case
    assert!(matches!(s.add_evidence(Evidence::state("OS", "yes")), Err(SessionError::UnknownNode(_))));
    assert!(matches!(s.add_evidence(Evidence::state("V_r", "fast")), Err(SessionError::InvalidValue { .. })));
    assert_eq!(s.log_hash(), hash);
}

#[test]
fn latest_evidence_on_a_node_wins() {
    let mut s = case1();
    s.add_evidence(Evidence::number("V_r", 4.0)).unwrap();
    s.add_evidence(Evidence::number("V_r", 11.5)).unwrap();
    assert!(s.warnings().iter().any(|w| w.contains("supersedes")));
    let mut fresh = case1();
    fresh.add_evidence(Evidence::number("V_r", 11.5)).unwrap();
    assert!(close(&s.posteriors()[D_T], &fresh.posteriors()[D_T], 1e-12));
}

#[test]
fn what_if_does_not_touch_the_session() {
    let mut s = case1();
    s.add_evidence(Evidence::number("M_r", 273_000.0)).unwrap();
    let hash = s.log_hash();
    let before = s.posteriors().clone();
    let hypo = s.what_if(&[Evidence::number("V_r", 11.5)]).unwrap();
    assert_eq!(s.log_hash(), hash);
    assert_eq!(s.posteriors(), &before);
    let mut applied = s;
    applied.add_evidence(Evidence::number("V_r", 11.5)).unwrap();
    assert!(close(&hypo[D_T], &applied.posteriors()[D_T], 1e-12));
}

#[test]
fn batch_is_atomic() {
    let mut s = case1();
    let bad = vec![Evidence::number("V_r", 11.5), Evidence::number("M_r", -1.0)];
    assert!(s.add_evidence_batch(bad).is_err());
    assert!(s.log().is_empty());
    let ids = s
        .add_evidence_batch(vec![Evidence::number("V_r", 11.5), Evidence::number("M_r", 273_000.0)])
        .unwrap();
    assert_eq!(ids.len(), 2);
    assert_ne!(ids[0], ids[1]);
}

#[test]
fn json_lines_evidence() {
    let text = r#"{"node":"V_r","value":11.5,"source":"ais"}

{"node":"LC","value":"loaded","timestamp":"2026-01-01T00:00:00Z"}"#;
    let ev = parse_evidence_lines(text).unwrap();
    assert_eq!(ev.len(), 2);
    assert_eq!(ev[0].value, EvidenceValue::Number(11.5));
    assert_eq!(ev[1].value, EvidenceValue::State("loaded".into()));
    assert!(parse_evidence_lines("{not json}").is_err());
}

#[test]
fn save_and_load_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    let mut s = case1();
    let id = s.add_evidence(Evidence::number("V_r", 11.5)).unwrap();
    s.add_evidence(Evidence::number("M_r", 273_000.0)).unwrap();
    s.retract_evidence(id).unwrap();
    s.save(&path).unwrap();
    let back = IncidentSession::load(&path).unwrap();
    assert_eq!(back.id(), s.id());
    assert_eq!(back.log(), s.log());
    assert_eq!(back.log_hash(), s.log_hash());
    assert_eq!(back.structure_hash(), s.structure_hash());
    assert_eq!(back.posteriors(), s.posteriors());
}

#[test]
fn file_versions_and_corruption() {
    let s = case1();
    let text = s.to_json();
    let older = text.replace(&format!("\"{FORMAT_VERSION}\""), "\"1.0\"");
    let migrated = IncidentSession::from_json(&older).unwrap();
    assert!(migrated.warnings().iter().any(|w| w.contains("migrated")));

    let newer = text.replace(&format!("\"{FORMAT_VERSION}\""), "\"2.0\"");
    assert!(matches!(
        IncidentSession::from_json(&newer),
        Err(SessionError::VersionMismatch { .. })
    ));
    assert!(matches!(
        IncidentSession::from_json(&text[..text.len() / 2]),
        Err(SessionError::CorruptFile(_))
    ));
    assert!(matches!(IncidentSession::load("/nonexistent/s.json"), Err(SessionError::Io(_))));
}

#[test]
fn log_records_are_tagged() {
    let r = LogRecord::Retract { id: EvidenceId(3) };
    assert_eq!(serde_json::to_string(&r).unwrap(), r#"{"op":"retract","id":3}"#);
}

#[test]
fn scenario_b_session() {
    let c = load_case("scenarioB").unwrap();
    let mut s = IncidentSession::create(c.ship, c.model, c.incident).unwrap();

    let prior = &s.posteriors()[Y_D];
    assert_eq!(prior.len(), 60);
    assert!(prior.iter().all(|p| (p - 1.0 / 60.0).abs() < 1e-9));

    let crash: Vec<Evidence> = c
        .evidence
        .iter()
        .filter(|e| ["M_r", "V_r", "L_D_r"].contains(&e.node.as_str()))
        .cloned()
        .collect();
    s.add_evidence_batch(crash).unwrap();
    let hash = s.log_hash();
    let sd = |r: &grounding_core::PosteriorReport| r.get(D_T).unwrap().sd.unwrap();
    let without = s.report(&[]).unwrap();
    let with = s
        .what_if_report(&[Evidence::state("Vis", "good"), Evidence::number("Z_t", 6.5)], &[])
        .unwrap();
    assert!(sd(&with) < sd(&without));
    assert_eq!(s.log_hash(), hash);
    assert_eq!(s.what_if(&[]).unwrap(), *s.posteriors());

    let mut os = s.what_if(&[Evidence::state("LC", "loaded"), Evidence::state("OS", "yes")]).unwrap();
    assert_eq!(os.remove(IHB).unwrap(), vec![1.0, 0.0]);
    s.retract_evidence(EvidenceId(1)).unwrap();

    let base = s.structure_hash().to_string();
    let id = s.add_evidence(Evidence::number(R_C, 17_520.0)).unwrap();
    assert_ne!(s.structure_hash(), base);
    assert!(s.warnings().iter().any(|w| w.contains("widened")));
    let bins = s.compiled().model.binning(R_C).unwrap();
    assert!(bins.hi() >= 1.5 * 17_520.0 - 1e-6);
    s.retract_evidence(id).unwrap();
    assert_eq!(s.structure_hash(), base);
    let report = s.report(&[]).unwrap();
    for node in [D_T, D_V, Y_D] {
        let total: f64 = report.get(node).unwrap().masses.iter().sum();
        assert!((total - 1.0).abs() < 1e-9);
    }
    assert!(report.get(D_V).unwrap().inner_bottom_breach.is_some());
    assert!(s.query(&[IHB.to_string()]).unwrap().contains_key(IHB));
}
