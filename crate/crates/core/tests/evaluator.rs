use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::path::PathBuf;
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use serde_json::json;

use sgtools::evaluator::{
    generate_questions, run_benchmark, serve_answer_endpoint, templates, Agent, Answer, EndpointAgent, Question,
    QuestionType, RunOptions, ScriptedAgent,
};
use sgtools::geometry::{Difficulty, DirectionLabel};
use sgtools::ingestion::{build_scene, load_scene, load_scene_str};
use sgtools::synth::{synth_scene, SynthConfig};
use sgtools::tool_server::SceneStore;

fn kitchen_store() -> SceneStore {
    let store = SceneStore::in_memory();
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/kitchen_scene.json");
    store.insert("kitchen", Arc::new(load_scene(path).unwrap()));
    store
}

fn question(qid: &str, scene: &str, qtype: QuestionType, text: String, gt: Answer) -> Question {
    Question {
        qid: qid.into(),
        scene_id: scene.into(),
        qtype,
        difficulty: None,
        text,
        options: None,
        ground_truth: gt,
        unit: qtype.unit(),
    }
}

fn opts(dir: &tempfile::TempDir) -> RunOptions {
    RunOptions {
        seed: 7,
        types: Vec::new(),
        output_dir: Some(dir.path().to_path_buf()),
    }
}

#[test]
fn counts_cabinets_in_the_reference_scene() {
    let dir = tempfile::tempdir().unwrap();
    let q = question("k-count", "kitchen", QuestionType::ObjectCount, templates::object_count("cabinet"), Answer::Number(16.0));
    let report = run_benchmark(&[q], &kitchen_store(), &ScriptedAgent, &opts(&dir)).unwrap();
    let a = &report.answers[0];
    assert_eq!(a.predicted, Some(Answer::Number(16.0)));
    assert_eq!(a.score, 1.0);
    assert_eq!(a.tool_calls, 1);
    assert!(dir.path().join(&a.trace_ref).is_file());
    assert_eq!(report.overall_average, Some(1.0));
}

const RIGHT_ANGLE_SCENE: &str = r#"{
  "schema_version": "1.0",
  "building": {"class_label": "residential"},
  "floors": [{"level_index": 0}],
  "rooms": [{"name": "den", "footprint": [[0, 0], [6, 0], [6, 6], [0, 6]], "height": 2.5}],
  "objects": [
    {"class_label": "chair", "obb": {"center": [1, 1, 0.45], "half_extents": [0.25, 0.25, 0.45], "yaw": 0}, "facing": [1, 0, 0]},
    {"class_label": "table", "obb": {"center": [3, 1, 0.4], "half_extents": [0.5, 0.4, 0.4], "yaw": 0}},
    {"class_label": "sofa", "obb": {"center": [2, 3, 0.4], "half_extents": [0.9, 0.4, 0.4], "yaw": 0}}
  ]
}"#;

#[test]
fn direction_questions_take_five_calls() {
    let store = SceneStore::in_memory();
    store.insert("den", Arc::new(load_scene_str(RIGHT_ANGLE_SCENE).unwrap()));
    // Standing at the chair facing the table puts the sofa one metre ahead
    // and two metres to the left.
    let cases = [
        (Difficulty::Easy, DirectionLabel::Left),
        (Difficulty::Medium, DirectionLabel::Left),
        (Difficulty::Hard, DirectionLabel::FrontLeft),
    ];
    let questions: Vec<Question> = cases
        .iter()
        .map(|(d, label)| Question {
            difficulty: Some(*d),
            options: Some(d.labels().iter().map(|l| l.as_str().to_string()).collect()),
            ..question(
                &format!("den-dir-{}", d.as_str()),
                "den",
                QuestionType::RelativeDirection,
                templates::relative_direction("chair", "table", "sofa", *d),
                Answer::Label(label.as_str().into()),
            )
        })
        .collect();
    let dir = tempfile::tempdir().unwrap();
    let report = run_benchmark(&questions, &store, &ScriptedAgent, &opts(&dir)).unwrap();
    for a in &report.answers {
        assert_eq!(a.score, 1.0, "{a:?}");
        assert_eq!(a.tool_calls, 5, "{a:?}");
    }
    assert_eq!(report.direction_by_difficulty.len(), 3);
}

#[test]
fn empty_question_list_gives_empty_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_benchmark(&[], &kitchen_store(), &ScriptedAgent, &opts(&dir)).unwrap();
    assert_eq!(report.n_questions, 0);
    assert!(report.answers.is_empty());
    assert!(report.rows.iter().all(|r| r.n == 0));
    assert_eq!(report.overall_average, None);
}

#[test]
fn missing_scene_is_recorded_not_fatal() {
    let dir = tempfile::tempdir().unwrap();
    let qs = [
        question("ghost-count", "ghost", QuestionType::ObjectCount, templates::object_count("chair"), Answer::Number(3.0)),
        question("k-count", "kitchen", QuestionType::ObjectCount, templates::object_count("chair"), Answer::Number(3.0)),
    ];
    let report = run_benchmark(&qs, &kitchen_store(), &ScriptedAgent, &opts(&dir)).unwrap();
    let ghost = report.answers.iter().find(|a| a.qid == "ghost-count").unwrap();
    assert_eq!(ghost.score, 0.0);
    assert!(ghost.error.is_some());
    let ok = report.answers.iter().find(|a| a.qid == "k-count").unwrap();
    assert_eq!(ok.score, 1.0);
}

fn synthetic(n_scenes: u64, per_type: usize) -> (SceneStore, Vec<Question>) {
    let store = SceneStore::in_memory();
    let mut questions = Vec::new();
    for s in 0..n_scenes {
        let id = format!("synth-{s}");
        let g = build_scene(synth_scene(s, &SynthConfig::default())).unwrap();
        for t in QuestionType::ALL {
            questions.extend(generate_questions(&id, &g, t, per_type, 11));
        }
        store.insert(id, Arc::new(g));
    }
    (store, questions)
}

#[test]
fn endpoint_agent_matches_in_process_agent() {
    let (store, questions) = synthetic(2, 5);
    let store = Arc::new(store);
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap().to_string();
    let served = store.clone();
    thread::spawn(move || serve_answer_endpoint(listener, served, Arc::new(ScriptedAgent)));

    let local_dir = tempfile::tempdir().unwrap();
    let remote_dir = tempfile::tempdir().unwrap();
    let local = run_benchmark(&questions, &store, &ScriptedAgent, &opts(&local_dir)).unwrap();
    let agent = EndpointAgent::new(addr);
    let remote = run_benchmark(&questions, &store, &agent, &opts(&remote_dir)).unwrap();
    assert_eq!(remote.agent, agent.name());
    assert_eq!(local.answers.len(), remote.answers.len());
    for (l, r) in local.answers.iter().zip(&remote.answers) {
        assert_eq!(l.qid, r.qid);
        assert_eq!(l.predicted, r.predicted);
        assert_eq!(l.score, r.score);
        assert_eq!(l.tool_calls, r.tool_calls);
    }
}

#[test]
fn silent_endpoint_times_out() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap().to_string();
    thread::spawn(move || {
        let held: Vec<_> = listener.incoming().take(1).collect();
        thread::sleep(Duration::from_secs(5));
        drop(held);
    });
    let agent = EndpointAgent {
        addr,
        timeout: Duration::from_millis(300),
    };
    let dir = tempfile::tempdir().unwrap();
    let q = question("k-count", "kitchen", QuestionType::ObjectCount, templates::object_count("oven"), Answer::Number(2.0));
    let start = Instant::now();
    let report = run_benchmark(&[q], &kitchen_store(), &agent, &opts(&dir)).unwrap();
    assert!(start.elapsed() < Duration::from_secs(4));
    let a = &report.answers[0];
    assert_eq!(a.score, 0.0);
    assert!(a.error.as_deref().unwrap_or("").starts_with("Timeout"), "{a:?}");
}

fn one_shot_endpoint(reply: String) -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap().to_string();
    thread::spawn(move || {
        let (stream, _) = listener.accept().unwrap();
        let mut line = String::new();
        BufReader::new(stream.try_clone().unwrap()).read_line(&mut line).unwrap();
        let req: serde_json::Value = serde_json::from_str(&line).unwrap();
        assert_eq!(req["method"], "answer");
        assert!(req["params"].get("ground_truth").is_none(), "ground truth leaked");
        writeln!(&stream, "{reply}").unwrap();
    });
    addr
}

#[test]
fn malformed_endpoint_replies_are_reported() {
    let replies = [
        "this is not json".to_string(),
        json!({"id": 1, "ok": true, "value": {"answer": 2}}).to_string(),
        json!({"id": 1, "ok": true, "value": {"raw": "{\"summary\": 1}", "trace": "bogus"}}).to_string(),
    ];
    for reply in replies {
        let agent = EndpointAgent::new(one_shot_endpoint(reply.clone()));
        let dir = tempfile::tempdir().unwrap();
        let q = question("k-count", "kitchen", QuestionType::ObjectCount, templates::object_count("oven"), Answer::Number(2.0));
        let report = run_benchmark(&[q], &kitchen_store(), &agent, &opts(&dir)).unwrap();
        let a = &report.answers[0];
        assert_eq!(a.score, 0.0);
        assert!(a.error.as_deref().unwrap_or("").starts_with("MalformedAnswer"), "{reply}: {a:?}");
    }
}
