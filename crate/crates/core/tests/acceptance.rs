//! Acceptance suite: one [PASS]/[FAIL] line per criterion, non-zero exit
//! when any criterion fails. Every expected value comes from an
//! independent oracle in this file or from reference figures.

use std::collections::BTreeSet;
use std::io::{BufRead, BufReader, Cursor, Write};
use std::net::{TcpListener, TcpStream};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use sgtools::evaluator::{generate_questions, run_benchmark, score_numeric, Question, QuestionType, Report, RunOptions, ScriptedAgent};
use sgtools::geometry::{
    build_egocentric_frame, classify_direction, convex_hull_3d, min_area_rect_2d, sample_set_distance, Difficulty,
    DirectionLabel, Vec2, Vec3,
};
use sgtools::ingestion::{build_scene, load_scene};
use sgtools::synth::{synth_scene, SynthConfig};
use sgtools::tool_server::{replay_trace_file, run_session, serve_tcp_listener, SceneStore, Session};
use sgtools::toolbox::{ErrorCode, Toolbox};

type Outcome = Result<String, String>;

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------------------------------------------------------------------------
// 1. geometry oracles

fn rotation(rng: &mut ChaCha8Rng) -> nalgebra::Rotation3<f64> {
    let axis = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let axis = if axis.norm() < 1e-3 { Vec3::z() } else { axis.normalize() };
    nalgebra::Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(axis), rng.gen_range(0.0..std::f64::consts::TAU))
}

/// Random points on or inside a rotated ellipsoid, with the generating
/// frame so Monte-Carlo sampling can use the ellipsoid's own box.
struct Cloud {
    points: Vec<Vec3>,
    rot: nalgebra::Rotation3<f64>,
    axes: Vec3,
    shift: Vec3,
}

fn ellipsoid_cloud(rng: &mut ChaCha8Rng, n: usize) -> Cloud {
    let axes = Vec3::new(rng.gen_range(0.3..3.0), rng.gen_range(0.3..3.0), rng.gen_range(0.3..3.0));
    let rot = rotation(rng);
    let shift = Vec3::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), rng.gen_range(0.0..3.0));
    let mut points = Vec::with_capacity(n);
    while points.len() < n {
        let u = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let r = u.norm();
        if r <= 1.0 && r > 1e-3 {
            // Mostly surface points, some interior ones.
            let u = if rng.gen_bool(0.8) { u / r } else { u };
            points.push(rot * u.component_mul(&axes) + shift);
        }
    }
    Cloud { points, rot, axes, shift }
}

/// Supporting planes `(n, d)` with `n·x <= d` inside, by testing every
/// point triple against all points.
fn brute_planes(p: &[Vec3]) -> Vec<(Vec3, f64)> {
    let scale = p.iter().map(|q| q.norm()).fold(1.0, f64::max);
    let tol = 1e-9 * scale;
    let mut planes: Vec<(Vec3, f64)> = Vec::new();
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            for k in j + 1..p.len() {
                let n = (p[j] - p[i]).cross(&(p[k] - p[i]));
                if n.norm() < 1e-12 {
                    continue;
                }
                let n = n.normalize();
                let d = n.dot(&p[i]);
                let (mut above, mut below) = (false, false);
                for q in p {
                    let s = n.dot(q) - d;
                    above |= s > tol;
                    below |= s < -tol;
                    if above && below {
                        break;
                    }
                }
                let plane = match (above, below) {
                    (false, _) => (n, d),
                    (true, false) => (-n, -d),
                    _ => continue,
                };
                if !planes.iter().any(|(m, e)| (m - plane.0).norm() < 1e-7 && (e - plane.1).abs() < 1e-7 * scale) {
                    planes.push(plane);
                }
            }
        }
    }
    planes
}

/// Monotone-chain hull area, written independently of the library.
fn area_2d(mut pts: Vec<(f64, f64)>) -> f64 {
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    if pts.len() < 3 {
        return 0.0;
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &(f64, f64)>> = if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &q in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], q) <= 0.0 {
                hull.pop();
            }
            hull.push(q);
        }
        hull.pop();
    }
    let n = hull.len();
    (0..n).map(|i| cross((0.0, 0.0), hull[i], hull[(i + 1) % n])).sum::<f64>() / 2.0
}

fn plane_basis(n: &Vec3) -> (Vec3, Vec3) {
    let helper = if n.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let u = n.cross(&helper).normalize();
    (u, n.cross(&u))
}

/// Exact surface area: sum of facet polygon areas from the brute planes.
fn facet_area(p: &[Vec3], planes: &[(Vec3, f64)]) -> f64 {
    let scale = p.iter().map(|q| q.norm()).fold(1.0, f64::max);
    planes
        .iter()
        .map(|(n, d)| {
            let (u, v) = plane_basis(n);
            let on: Vec<(f64, f64)> = p
                .iter()
                .filter(|q| (n.dot(q) - d).abs() <= 1e-9 * scale)
                .map(|q| (u.dot(q), v.dot(q)))
                .collect();
            area_2d(on)
        })
        .sum()
}

/// Cauchy's formula: surface area is four times the mean projected area
/// over uniformly random directions.
fn cauchy_area(rng: &mut ChaCha8Rng, p: &[Vec3], directions: usize) -> f64 {
    let mut total = 0.0;
    for _ in 0..directions {
        let d = loop {
            let g = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let n = g.norm();
            if n > 1e-3 && n <= 1.0 {
                break g / n;
            }
        };
        let (u, v) = plane_basis(&d);
        total += area_2d(p.iter().map(|q| (u.dot(q), v.dot(q))).collect());
    }
    4.0 * total / directions as f64
}

fn criterion_geometry() -> Outcome {
    const INSTANCES: usize = 200;
    const MC_SAMPLES: usize = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(0x6e0);
    let (mut worst_vol, mut worst_area_mc, mut worst_area_exact) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..INSTANCES {
        let n = rng.gen_range(12..=40);
        let cloud = ellipsoid_cloud(&mut rng, n);
        let pts = &cloud.points;
        let hull = convex_hull_3d(pts).map_err(|e| format!("hull instance {i}: {e}"))?;
        let planes = brute_planes(pts);
        let inside = (0..MC_SAMPLES)
            .filter(|_| {
                let u = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                let x = cloud.rot * u.component_mul(&cloud.axes) + cloud.shift;
                planes.iter().all(|(n, d)| n.dot(&x) <= *d)
            })
            .count();
        let box_volume = 8.0 * cloud.axes.x * cloud.axes.y * cloud.axes.z;
        let mc_volume = box_volume * inside as f64 / MC_SAMPLES as f64;
        let vol_err = (hull.volume() - mc_volume).abs() / mc_volume;
        worst_vol = worst_vol.max(vol_err);
        check(vol_err <= 0.02, || format!("instance {i}: volume {} vs Monte-Carlo {mc_volume} ({:.2}%)", hull.volume(), vol_err * 100.0))?;
        let exact = facet_area(pts, &planes);
        let area_err = (hull.surface_area() - exact).abs() / exact;
        worst_area_exact = worst_area_exact.max(area_err);
        check(area_err <= 1e-9, || format!("instance {i}: area {} vs facet oracle {exact}", hull.surface_area()))?;
        let mc_area = cauchy_area(&mut rng, pts, 20_000);
        let mc_err = (hull.surface_area() - mc_area).abs() / mc_area;
        worst_area_mc = worst_area_mc.max(mc_err);
        check(mc_err <= 0.02, || format!("instance {i}: area {} vs Monte-Carlo {mc_area}", hull.surface_area()))?;
    }

    let mut worst_dist_gap = 0.0f64;
    for i in 0..INSTANCES {
        let cloud = |rng: &mut ChaCha8Rng, n: usize| -> Vec<Vec3> {
            let c = Vec3::new(rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0), rng.gen_range(0.0..3.0));
            (0..n).map(|_| c + Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
        };
        let (na, nb) = (rng.gen_range(1..300), rng.gen_range(1..300));
        let (a, b) = (cloud(&mut rng, na), cloud(&mut rng, nb));
        let brute = a
            .iter()
            .flat_map(|p| b.iter().map(move |q| (p - q).norm_squared()))
            .fold(f64::INFINITY, f64::min)
            .sqrt();
        let got = sample_set_distance(&a, &b);
        worst_dist_gap = worst_dist_gap.max((got - brute).abs());
        check(got == brute, || format!("distance instance {i}: {got} vs brute force {brute}"))?;
        check(sample_set_distance(&b, &a) == brute, || format!("distance instance {i} is not symmetric"))?;
    }

    let mut worst_rect_excess = f64::NEG_INFINITY;
    for i in 0..INSTANCES {
        let n = rng.gen_range(3..60);
        let (ax, ay, yaw) = (rng.gen_range(0.2..4.0), rng.gen_range(0.2..4.0), rng.gen_range(0.0..std::f64::consts::PI));
        let pts: Vec<Vec2> = (0..n)
            .map(|_| {
                let (x, y) = (rng.gen_range(-ax..ax), rng.gen_range(-ay..ay));
                Vec2::new(x * yaw.cos() - y * yaw.sin() + 1.0, x * yaw.sin() + y * yaw.cos() - 2.0)
            })
            .collect();
        let rect = min_area_rect_2d(&pts).map_err(|e| format!("rect instance {i}: {e}"))?;
        let sweep = (0..900)
            .map(|k| {
                let t = (k as f64 * 0.1).to_radians();
                let (c, s) = (t.cos(), t.sin());
                let (mut u0, mut u1, mut v0, mut v1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
                for p in &pts {
                    let (u, v) = (c * p.x + s * p.y, -s * p.x + c * p.y);
                    (u0, u1, v0, v1) = (u0.min(u), u1.max(u), v0.min(v), v1.max(v));
                }
                (u1 - u0) * (v1 - v0)
            })
            .fold(f64::INFINITY, f64::min);
        let scale = pts.iter().map(|p| p.norm()).fold(1.0, f64::max);
        check(pts.iter().all(|p| rect.contains(p, 1e-9 * scale)), || format!("rect instance {i} misses a point"))?;
        check(rect.area() <= sweep * (1.0 + 1e-9) + 1e-12, || format!("rect instance {i}: {} above sweep {sweep}", rect.area()))?;
        let excess = (rect.area() - sweep) / sweep;
        worst_rect_excess = worst_rect_excess.max(excess);
        check(excess <= 0.005, || format!("rect instance {i}: {} exceeds sweep {sweep} by {:.3}%", rect.area(), excess * 100.0))?;
    }

    let mut worst_round_trip = 0.0f64;
    for i in 0..INSTANCES {
        let standing = Vec3::new(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0), rng.gen_range(0.0..3.0));
        let dir = rng.gen_range(0.0..std::f64::consts::TAU);
        let reach = rng.gen_range(0.2..8.0);
        let facing = standing + Vec3::new(reach * dir.cos(), reach * dir.sin(), rng.gen_range(-1.0..1.0));
        let frame = build_egocentric_frame(&standing, &facing).map_err(|e| format!("frame instance {i}: {e}"))?;
        for _ in 0..10 {
            let p = Vec3::new(rng.gen_range(-20.0..20.0), rng.gen_range(-20.0..20.0), rng.gen_range(-5.0..5.0));
            let back = frame.unproject(&frame.project(&p));
            let l = frame.project(&frame.unproject(&p));
            let err = (back - p).norm().max((l - p).norm());
            worst_round_trip = worst_round_trip.max(err);
            check(err <= 1e-9, || format!("frame instance {i}: round trip error {err:e}"))?;
        }
    }
    Ok(format!(
        "{INSTANCES} instances each; worst volume err {:.2}%, area err {:.2}% (Monte-Carlo) / {:.1e} (facets), distance gap {:.1e}, area excess over sweep {:.3}%, round trip {:.1e}",
        worst_vol * 100.0,
        worst_area_mc * 100.0,
        worst_area_exact,
        worst_dist_gap,
        worst_rect_excess * 100.0,
        worst_round_trip
    ))
}

// ---------------------------------------------------------------------------
// 2, 3, 5. scripted runs over synthetic scenes

struct Suite {
    store: SceneStore,
    questions: Vec<Question>,
}

fn synthetic_suite(scenes: u64, per_type: usize, seed: u64) -> Suite {
    let store = SceneStore::in_memory();
    let cfg = SynthConfig::default();
    let mut questions = Vec::new();
    let per_scene = per_type.div_ceil(scenes as usize);
    for s in 0..scenes {
        let id = format!("synth-{s}");
        let graph = Arc::new(build_scene(synth_scene(s, &cfg)).expect("synthetic scene loads"));
        for t in QuestionType::ALL {
            questions.extend(generate_questions(&id, &graph, t, per_scene, seed));
        }
        store.insert(id, graph);
    }
    Suite { store, questions }
}

fn run(suite: &Suite, seed: u64, out: &Path) -> Report {
    let opts = RunOptions {
        seed,
        types: Vec::new(),
        output_dir: Some(out.to_path_buf()),
    };
    run_benchmark(&suite.questions, &suite.store, &ScriptedAgent, &opts).expect("benchmark runs")
}

fn criterion_closure(suite: &Suite, report: &Report, elapsed: Duration) -> Outcome {
    for t in QuestionType::ALL {
        let n = suite.questions.iter().filter(|q| q.qtype == t).count();
        check(n >= 100, || format!("only {n} {t} questions"))?;
        let row = report.row(t).ok_or_else(|| format!("no row for {t}"))?;
        if row.mean_score != 1.0 {
            let bad = report.answers.iter().find(|a| a.qtype == t && a.score != 1.0).unwrap();
            return Err(format!("{t} mean {} (e.g. {} predicted {:?}, error {:?})", row.mean_score, bad.qid, bad.predicted, bad.error));
        }
    }
    check(elapsed < Duration::from_secs(30), || format!("took {elapsed:?}"))?;
    Ok(format!("{} questions over 10 scenes, every type mean 1.0 in {:.2} s", suite.questions.len(), elapsed.as_secs_f64()))
}

fn criterion_tool_shape(report: &Report) -> Outcome {
    // Reference medians per type, in report order.
    let reference = [
        (QuestionType::ObjectCount, 1.0),
        (QuestionType::AbsoluteDistance, 2.0),
        (QuestionType::ObjectSize, 2.0),
        (QuestionType::RoomSize, 2.0),
        (QuestionType::RelativeDistance, 2.0),
        (QuestionType::RelativeDirection, 4.0),
    ];
    let mut summary = Vec::new();
    for (t, median) in reference {
        let row = report.row(t).ok_or_else(|| format!("no row for {t}"))?;
        check((row.median_tools - median).abs() <= 1.0, || format!("{t} median {} vs reference {median}", row.median_tools))?;
        summary.push(format!("{}={}/{}", t.as_str(), row.mean_tools, row.median_tools));
    }
    let mean = |t| report.row(t).map(|r| r.mean_tools).unwrap_or(f64::NAN);
    check(mean(QuestionType::ObjectCount) == 1.0, || "object_count mean is not 1".into())?;
    check(mean(QuestionType::ObjectSize) == 2.0, || "object_size mean is not 2".into())?;
    check(mean(QuestionType::AbsoluteDistance) >= 2.0, || "absolute_distance mean below 2".into())?;
    let direction_calls: BTreeSet<usize> = report
        .answers
        .iter()
        .filter(|a| a.qtype == QuestionType::RelativeDirection)
        .map(|a| a.tool_calls)
        .collect();
    check(direction_calls == BTreeSet::from([5]), || format!("direction tool calls {direction_calls:?}"))?;
    Ok(format!("mean/median {}", summary.join(" ")))
}

fn criterion_determinism(suite: &Suite, first: &Report, first_dir: &Path, seed: u64) -> Outcome {
    let mut total = 0;
    let mut files = 0;
    for entry in std::fs::read_dir(first_dir.join("traces")).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        let r = replay_trace_file(&path, &suite.store).map_err(|e| format!("{}: {e}", path.display()))?;
        check(r.all_identical(), || format!("{}: {} of {} calls differ", path.display(), r.total - r.identical, r.total))?;
        total += r.total;
        files += 1;
    }
    check(files == suite.questions.len(), || format!("{files} trace files for {} questions", suite.questions.len()))?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let second = run(suite, seed, dir.path());
    check(first.to_json() == second.to_json(), || "repeated run produced a different report".into())?;
    let regenerated = synthetic_suite(10, 100, seed);
    check(regenerated.questions == suite.questions, || "question generation is not seeded".into())?;
    Ok(format!("{total} calls in {files} traces replayed byte-identically; repeated report identical"))
}

// ---------------------------------------------------------------------------
// 4. Reference context fixture

fn criterion_kitchen() -> Outcome {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/kitchen_scene.json");
    let scene = load_scene(&path).map_err(|e| e.to_string())?;
    let mut tb = Toolbox::new(Arc::new(scene));
    let ctx = tb.call("mem_get_scene_context", &json!({})).map_err(|e| e.message)?;
    let text = ctx["text"].as_str().ok_or("context has no text")?;
    let lines: Vec<&str> = text.lines().collect();
    let expected_rows = [
        "BuildingNode | Building-0 | residential",
        "FloorNode | Floor-0 | 0",
        "RoomNode | Room-0 | room_0",
        "ObjectNode | Cabinet-0 … Cabinet-15 | cabinet (16)",
        "ObjectNode | Chair-0 … Chair-2 | chair (3)",
        "ObjectNode | Oven-0, Oven-1 | oven (2)",
        "ObjectNode | Shelf-0 | shelf (1)",
        "ObjectNode | Sink-0 | sink (1)",
        "ObjectNode | Sofa-0, Sofa-1 | sofa (2)",
        "ObjectNode | Stool-0 | stool (1)",
        "ObjectNode | Stove-0 | stove (1)",
        "ObjectNode | Table-0, Table-1 | table (2)",
        "ObjectNode | Tv Monitor-0 | tv_monitor (1)",
    ];
    for row in expected_rows {
        check(lines.contains(&row), || format!("missing row '{row}'"))?;
    }
    let totals = "Total: 30 ObjectNodes, 1 RoomNode, 1 FloorNode, 1 BuildingNode";
    check(ctx["totals_line"] == totals, || format!("totals line {}", ctx["totals_line"]))?;
    check(lines.last() == Some(&totals), || "text does not end with the totals line".into())?;
    check(lines.len() == expected_rows.len() + 2, || format!("{} lines, expected {}", lines.len(), expected_rows.len() + 2))?;
    Ok(format!("{} rows and totals line match", expected_rows.len()))
}

// ---------------------------------------------------------------------------
// 6. protocol fuzz

fn fuzz_corpus(n: usize, seed: u64) -> Vec<Vec<u8>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tools = ["sg_search", "sg_get_node", "geom_distance", "loc_project", "loc_build_frame", "geom_room_size", "mem_get_scene_context"];
    let methods = ["initialize", "list_tools", "call", "get_trace", "shutdown", "Call", "", "answer", "call\u{0}"];
    let junk_values = [
        json!(null),
        json!(true),
        json!(-1),
        json!(1.5),
        json!(1e300),
        json!("Sofa-0"),
        json!("../../etc/passwd"),
        json!([]),
        json!({}),
        json!([1, 2, 3]),
        json!({"a": {"b": []}}),
        json!("frame-99999999999999999999"),
        json!("\u{fffd}\u{202e}"),
        json!(u64::MAX),
        json!(i64::MIN),
    ];
    let base = |rng: &mut ChaCha8Rng| -> Value {
        let tool = *tools.choose(rng).unwrap();
        json!({"id": rng.gen_range(0..1000), "method": "call", "params": {"tool": tool, "args": {"id": "Sofa-0"}}})
    };
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let line: Vec<u8> = match rng.gen_range(0..14) {
            0 => (0..rng.gen_range(1..200)).map(|_| rng.gen::<u8>()).collect(),
            1 => {
                let s = base(&mut rng).to_string();
                let cut = rng.gen_range(1..s.len());
                s.as_bytes()[..cut].to_vec()
            }
            2 => {
                let mut v = base(&mut rng);
                v["id"] = junk_values.choose(&mut rng).unwrap().clone();
                v.to_string().into_bytes()
            }
            3 => {
                let m: String = (0..rng.gen_range(0..12)).map(|_| rng.gen_range('a'..='z')).collect();
                json!({"id": 1, "method": m, "params": {}}).to_string().into_bytes()
            }
            4 => {
                let method = *methods.choose(&mut rng).unwrap();
                let params = junk_values.choose(&mut rng).unwrap();
                // A well-formed shutdown is a legitimate request, not fuzz.
                if method == "shutdown" && (params.is_null() || params == &json!({})) {
                    continue;
                }
                json!({"id": 2, "method": method, "params": params}).to_string().into_bytes()
            }
            5 => {
                let tool: String = tools.choose(&mut rng).unwrap().chars().rev().collect();
                json!({"id": 3, "method": "call", "params": {"tool": tool, "args": {}}}).to_string().into_bytes()
            }
            6 => {
                let mut args = serde_json::Map::new();
                for _ in 0..rng.gen_range(0..4) {
                    let key = ["id", "a", "b", "mode", "k", "query", "frame", "target", "difficulty", "zz"].choose(&mut rng).unwrap();
                    args.insert(key.to_string(), junk_values.choose(&mut rng).unwrap().clone());
                }
                let tool = *tools.choose(&mut rng).unwrap();
                json!({"id": 4, "method": "call", "params": {"tool": tool, "args": args}}).to_string().into_bytes()
            }
            7 => {
                let mut v = base(&mut rng);
                v["extra"] = json!(1);
                v.to_string().into_bytes()
            }
            8 => {
                let depth = rng.gen_range(100..5000);
                format!("{{\"id\":5,\"method\":\"call\",\"params\":{}{}}}", "[".repeat(depth), "]".repeat(depth)).into_bytes()
            }
            9 => {
                let mut s = br#"{"id":6,"method":"call","params":{"tool":"sg_search","args":{"query":""#.to_vec();
                s.extend([0xc3, 0x28, 0xff]);
                s.extend(br#""}}}"#);
                s
            }
            10 => {
                let scene = ["", "..", "../x", "synth-0/../synth-0", "nope", "a b", "\u{0}", "synth-1"].choose(&mut rng).unwrap();
                json!({"id": 7, "method": "initialize", "params": {"scene_id": scene}}).to_string().into_bytes()
            }
            11 => junk_values.choose(&mut rng).unwrap().to_string().into_bytes(),
            12 => (0..rng.gen_range(1..60)).map(|_| rng.gen::<char>()).collect::<String>().into_bytes(),
            _ => br#"{"id":8,"id":"x","method":"call","method":7,"params":{}}"#.to_vec(),
        };
        let line: Vec<u8> = line.into_iter().filter(|b| *b != b'\n' && *b != b'\r').collect();
        if !String::from_utf8_lossy(&line).trim().is_empty() {
            out.push(line);
        }
    }
    out
}

/// Checks a response line is a structured reply from the closed code set.
fn structured(line: &str, codes: &BTreeSet<&str>) -> Result<bool, String> {
    let v: Value = serde_json::from_str(line).map_err(|e| format!("unparseable response {line}: {e}"))?;
    let ok = v["ok"].as_bool().ok_or_else(|| format!("response without ok: {line}"))?;
    check(v.get("id").is_some(), || format!("response without id: {line}"))?;
    if !ok {
        let code = v["error"]["code"].as_str().unwrap_or("");
        check(codes.contains(code), || format!("code '{code}' outside the closed set: {line}"))?;
        check(v["error"]["message"].is_string(), || format!("error without message: {line}"))?;
    }
    Ok(ok)
}

fn criterion_fuzz() -> Outcome {
    const N: usize = 10_000;
    let store = Arc::new(SceneStore::in_memory());
    store.insert("synth-0", Arc::new(build_scene(synth_scene(0, &SynthConfig::default())).unwrap()));
    let codes: BTreeSet<&str> = ErrorCode::ALL.iter().map(|c| c.as_str()).collect();
    let corpus = fuzz_corpus(N, 0xf022);

    // In-process: one session fed the whole corpus after a valid initialize.
    let mut input = br#"{"id":0,"method":"initialize","params":{"scene_id":"synth-0"}}"#.to_vec();
    input.push(b'\n');
    for line in &corpus {
        input.extend(line);
        input.push(b'\n');
    }
    let mut output = Vec::new();
    let mut session = Session::new(store.clone());
    session.set_log_dir(None);
    catch_unwind(AssertUnwindSafe(|| run_session(&mut session, Cursor::new(&input), &mut output)))
        .map_err(|_| "session panicked".to_string())?
        .map_err(|e| e.to_string())?;
    let responses: Vec<&str> = std::str::from_utf8(&output).map_err(|e| e.to_string())?.lines().collect();
    check(responses.len() == N + 1, || format!("{} responses for {} requests", responses.len(), N + 1))?;
    let mut errors = 0;
    for r in &responses[1..] {
        if !structured(r, &codes)? {
            errors += 1;
        }
    }

    // Over TCP: the same corpus on a live connection, then a valid request
    // that must still be answered.
    let listener = TcpListener::bind("127.0.0.1:0").map_err(|e| e.to_string())?;
    let addr = listener.local_addr().map_err(|e| e.to_string())?;
    let server_store = store.clone();
    thread::spawn(move || serve_tcp_listener(listener, server_store));
    let stream = TcpStream::connect(addr).map_err(|e| e.to_string())?;
    stream.set_read_timeout(Some(Duration::from_secs(20))).map_err(|e| e.to_string())?;
    let mut writer = stream.try_clone().map_err(|e| e.to_string())?;
    let writer_input = input.clone();
    let sender = thread::spawn(move || {
        writer.write_all(&writer_input)?;
        writer.write_all(b"{\"id\":424242,\"method\":\"list_tools\",\"params\":{}}\n")?;
        writer.flush()
    });
    let mut reader = BufReader::new(stream);
    let mut last = String::new();
    for count in 0..N + 2 {
        last.clear();
        let got = reader.read_line(&mut last).map_err(|e| format!("session hung after {count} responses: {e}"))?;
        check(got > 0, || format!("connection closed after {count} responses"))?;
        structured(last.trim_end(), &codes)?;
    }
    sender.join().map_err(|_| "sender panicked".to_string())?.map_err(|e| e.to_string())?;
    let final_reply: Value = serde_json::from_str(&last).map_err(|e| e.to_string())?;
    check(final_reply["id"] == 424242 && final_reply["ok"] == true, || format!("session unusable after fuzzing: {last}"))?;
    Ok(format!("{N} malformed requests: {errors} structured errors, 0 crashes, 0 hangs (stdio-style and TCP)"))
}

// ---------------------------------------------------------------------------
// 7. MRA

fn criterion_mra() -> Outcome {
    let exact = score_numeric(9.0, 10.0).map_err(|e| e.to_string())?;
    check(exact == 0.8, || format!("score_numeric(9, 10) = {exact}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x3a);
    for i in 0..1000 {
        let gt = 10f64.powf(rng.gen_range(-2.0..3.0));
        let (e1, e2) = (rng.gen_range(0.0..1.2), rng.gen_range(0.0..1.2));
        let (near, far) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let sign = |rng: &mut ChaCha8Rng| if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let s_near = score_numeric(gt * (1.0 + sign(&mut rng) * near), gt).unwrap();
        let s_far = score_numeric(gt * (1.0 + sign(&mut rng) * far), gt).unwrap();
        check(s_near >= s_far, || format!("pair {i}: rel {near} scores {s_near} < rel {far} scores {s_far}"))?;
        check((0.0..=1.0).contains(&s_near) && (s_near * 10.0).fract() == 0.0, || format!("pair {i}: score {s_near} off grid"))?;
    }
    Ok("score_numeric(9.0, 10.0) = 0.8; monotone over 1000 random pairs".into())
}

// ---------------------------------------------------------------------------
// 8. direction classifier

fn criterion_direction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xd1);
    for i in 0..10_000 {
        let v = Vec3::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), rng.gen_range(-2.0..2.0));
        if v.xy().norm() < 1e-6 {
            continue;
        }
        let easy = classify_direction(&v, Difficulty::Easy).map_err(|e| e.to_string())?;
        let hard = classify_direction(&v, Difficulty::Hard).map_err(|e| e.to_string())?;
        check(hard.lateral() == Some(easy), || format!("vector {i} {v:?}: hard {hard} vs easy {easy}"))?;
        for d in Difficulty::ALL {
            let label = classify_direction(&v, d).map_err(|e| e.to_string())?;
            check(d.labels().contains(&label), || format!("vector {i}: {label} not a {} label", d.as_str()))?;
        }
    }
    // |f| = |l| boundaries, with ties toward front and left.
    let expected = [
        ((1.0, 1.0), [DirectionLabel::Left, DirectionLabel::Left, DirectionLabel::FrontLeft]),
        ((1.0, -1.0), [DirectionLabel::Right, DirectionLabel::Right, DirectionLabel::FrontRight]),
        ((-1.0, 1.0), [DirectionLabel::Left, DirectionLabel::Left, DirectionLabel::BackLeft]),
        ((-1.0, -1.0), [DirectionLabel::Right, DirectionLabel::Right, DirectionLabel::BackRight]),
    ];
    for (k, ((f, l), labels)) in expected.into_iter().enumerate() {
        let scale = 10f64.powi(k as i32 - 2);
        let v = Vec3::new(f * scale, l * scale, 0.0);
        for (d, want) in Difficulty::ALL.into_iter().zip(labels) {
            let a = classify_direction(&v, d).map_err(|e| e.to_string())?;
            let b = classify_direction(&v, d).map_err(|e| e.to_string())?;
            check(a == b && a == want, || format!("boundary {v:?} {}: {a} / {b}, expected {want}", d.as_str()))?;
        }
    }
    Ok("10000 random vectors consistent; |f| = |l| boundaries deterministic".into())
}

// ---------------------------------------------------------------------------

fn report(n: usize, title: &str, started: Instant, outcome: Outcome) -> bool {
    let secs = started.elapsed().as_secs_f64();
    match outcome {
        Ok(detail) => {
            println!("[PASS] {n}. {title}: {detail} ({secs:.2} s)");
            true
        }
        Err(why) => {
            println!("[FAIL] {n}. {title}: {why} ({secs:.2} s)");
            false
        }
    }
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let t = Instant::now();
    let out = f()?;
    let elapsed = t.elapsed();
    check(elapsed < limit, || format!("{out}, but took {elapsed:?} (limit {limit:?})"))?;
    Ok(out)
}

fn guarded(f: impl FnOnce() -> Outcome) -> Outcome {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
        Err(format!("panicked: {}", msg.unwrap_or_default()))
    })
}

fn main() {
    let mut ok = true;

    let t = Instant::now();
    ok &= report(1, "geometry oracle suite", t, guarded(|| timed(Duration::from_secs(60), criterion_geometry)));

    const SEED: u64 = 20240601;
    let t = Instant::now();
    let suite = synthetic_suite(10, 100, SEED);
    let dir = tempfile::tempdir().expect("tempdir");
    let first = guarded(|| Ok(run(&suite, SEED, dir.path()).to_json()));
    let elapsed = t.elapsed();
    let first: Option<Report> = first.ok().and_then(|j| serde_json::from_str(&j).ok());
    match &first {
        Some(r) => {
            ok &= report(2, "scripted oracle closure", t, guarded(|| criterion_closure(&suite, r, elapsed)));
            let t = Instant::now();
            ok &= report(3, "tool-call complexity shape", t, guarded(|| criterion_tool_shape(r)));
            let t4 = Instant::now();
            ok &= report(4, "reference scene context fidelity", t4, guarded(criterion_kitchen));
            let t = Instant::now();
            ok &= report(5, "determinism audit", t, guarded(|| criterion_determinism(&suite, r, dir.path(), SEED)));
        }
        None => {
            ok &= report(2, "scripted oracle closure", t, Err("benchmark run failed".into()));
            ok &= report(3, "tool-call complexity shape", t, Err("benchmark run failed".into()));
            let t4 = Instant::now();
            ok &= report(4, "reference scene context fidelity", t4, guarded(criterion_kitchen));
            ok &= report(5, "determinism audit", t, Err("benchmark run failed".into()));
        }
    }

    let t = Instant::now();
    ok &= report(6, "protocol robustness fuzz", t, guarded(criterion_fuzz));
    let t = Instant::now();
    ok &= report(7, "MRA scoring", t, guarded(criterion_mra));
    let t = Instant::now();
    ok &= report(8, "direction-classifier consistency", t, guarded(criterion_direction));

    if !ok {
        std::process::exit(1);
    }
}
