//! Synthetic question suites whose ground truth is computed directly from
//! scene geometry.
//!
//! Questions are drawn with replacement, so small scenes may repeat a
//! question under different ids. Entities that the answering pipeline
//! resolves through `sg_search` are sometimes phrased with a synonym.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::templates;
use super::{Answer, Question, QuestionType};
use crate::classes::{display_name, SYNONYMS};
use crate::geometry::{build_egocentric_frame, classify_direction, distance, Difficulty, DistanceMode};
use crate::scene_graph::{ObjectNode, SceneGraph};
use crate::toolbox::resolve_class;

/// Smallest gap kept between a generated answer and any decision boundary.
pub const MARGIN: f64 = 0.05;
/// Minimum plan-view separation between the observer and the other objects
/// of a direction question.
pub const MIN_SEPARATION_M: f64 = 0.3;
/// Minimum ground-truth distance for distance questions.
pub const MIN_DISTANCE_M: f64 = 0.1;
const CANDIDATES: usize = 4;
const ATTEMPTS: usize = 200;
const SYNONYM_RATE: f64 = 0.3;

struct SceneView<'a> {
    scene: &'a SceneGraph,
    by_class: BTreeMap<&'a str, Vec<&'a ObjectNode>>,
}

impl<'a> SceneView<'a> {
    fn new(scene: &'a SceneGraph) -> Self {
        let mut by_class: BTreeMap<&str, Vec<&ObjectNode>> = BTreeMap::new();
        for o in scene.objects() {
            by_class.entry(o.class_label.as_str()).or_default().push(o);
        }
        Self { scene, by_class }
    }

    fn classes(&self) -> Vec<&'a str> {
        self.by_class.keys().copied().collect()
    }

    fn unique(&self) -> Vec<&'a ObjectNode> {
        self.by_class.values().filter(|v| v.len() == 1).map(|v| v[0]).collect()
    }

    /// How a question names `class` where the answer pipeline runs
    /// `sg_search` on it.
    fn searchable_name(&self, rng: &mut ChaCha8Rng, class: &str) -> String {
        if rng.gen_bool(SYNONYM_RATE) {
            let synonyms: Vec<&str> = SYNONYMS.iter().filter(|(_, c)| *c == class).map(|(s, _)| *s).collect();
            if let Some(s) = synonyms.choose(rng) {
                let name = display_name(s);
                if resolve_class(&name, self.classes()).resolved_class.as_deref() == Some(class) {
                    return name;
                }
            }
        }
        display_name(class)
    }
}

fn surface(a: &ObjectNode, b: &ObjectNode) -> f64 {
    distance(&a.geometry(), &b.geometry(), DistanceMode::Surface).unwrap_or(f64::INFINITY)
}

fn type_seed(seed: u64, qtype: QuestionType) -> u64 {
    let k = QuestionType::ALL.iter().position(|t| *t == qtype).unwrap_or(0) as u64 + 1;
    seed ^ k.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Up to `n` questions of one type about `scene`. Fewer come back when the
/// scene cannot support the type (for example too few unique classes).
pub fn generate_questions(scene_id: &str, scene: &SceneGraph, qtype: QuestionType, n: usize, seed: u64) -> Vec<Question> {
    let mut rng = ChaCha8Rng::seed_from_u64(type_seed(seed, qtype));
    let view = SceneView::new(scene);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let drafted = (0..ATTEMPTS).find_map(|_| draft(&view, &mut rng, qtype));
        let Some(d) = drafted else { break };
        out.push(Question {
            qid: format!("{scene_id}-{}-{i:04}", qtype.as_str()),
            scene_id: scene_id.to_string(),
            qtype,
            difficulty: d.difficulty,
            text: d.text,
            options: d.options,
            ground_truth: d.answer,
            unit: qtype.unit(),
        });
    }
    out
}

struct Draft {
    text: String,
    options: Option<Vec<String>>,
    answer: Answer,
    difficulty: Option<Difficulty>,
}

fn numeric(text: String, value: f64) -> Option<Draft> {
    (value.is_finite() && value > 0.0).then_some(Draft {
        text,
        options: None,
        answer: Answer::Number(value),
        difficulty: None,
    })
}

fn draft(view: &SceneView<'_>, rng: &mut ChaCha8Rng, qtype: QuestionType) -> Option<Draft> {
    match qtype {
        QuestionType::ObjectCount => {
            let classes = view.classes();
            let class = *classes.choose(rng)?;
            let name = view.searchable_name(rng, class);
            numeric(templates::object_count(&name), view.by_class[class].len() as f64)
        }
        QuestionType::ObjectSize => {
            let o = *view.unique().choose(rng)?;
            let name = view.searchable_name(rng, &o.class_label);
            numeric(templates::object_size(&name), 200.0 * o.obb.half_extents.max())
        }
        QuestionType::AbsoluteDistance => {
            let unique = view.unique();
            let pair: Vec<&&ObjectNode> = unique.choose_multiple(rng, 2).collect();
            let (a, b) = (*pair.first()?, *pair.get(1)?);
            let d = surface(a, b);
            if d < MIN_DISTANCE_M {
                return None;
            }
            let (na, nb) = (view.searchable_name(rng, &a.class_label), view.searchable_name(rng, &b.class_label));
            numeric(templates::absolute_distance(&na, &nb), d)
        }
        QuestionType::RoomSize => {
            let mut rooms = view.scene.rooms();
            let room = rooms.next()?;
            if rooms.next().is_some() {
                return None;
            }
            numeric(templates::room_size(), room.area_m2)
        }
        QuestionType::RelativeDistance => {
            let anchor = *view.unique().choose(rng)?;
            let others: Vec<&str> = view
                .classes()
                .into_iter()
                .filter(|c| *c != anchor.class_label)
                .collect();
            let picked: Vec<&str> = others.choose_multiple(rng, CANDIDATES).copied().collect();
            if picked.len() < CANDIDATES {
                return None;
            }
            let mut scored: Vec<(f64, &str)> = picked
                .iter()
                .map(|c| {
                    let d = view.by_class[c].iter().map(|o| surface(anchor, o)).fold(f64::INFINITY, f64::min);
                    (d, *c)
                })
                .collect();
            scored.sort_by(|a, b| a.0.total_cmp(&b.0));
            if scored[1].0 - scored[0].0 < MARGIN {
                return None;
            }
            let options: Vec<String> = picked.iter().map(|c| display_name(c)).collect();
            let anchor_name = view.searchable_name(rng, &anchor.class_label);
            Some(Draft {
                text: templates::relative_distance(&anchor_name, &options),
                answer: Answer::Label(display_name(scored[0].1)),
                options: Some(options),
                difficulty: None,
            })
        }
        QuestionType::RelativeDirection => {
            let unique = view.unique();
            let standing = *unique.iter().filter(|o| o.facing.is_some()).collect::<Vec<_>>().choose(rng)?;
            let trio: Vec<&&ObjectNode> = unique.iter().filter(|o| o.id != standing.id).collect::<Vec<_>>()
                .choose_multiple(rng, 2)
                .copied()
                .collect();
            let (facing, target) = (*trio.first()?, *trio.get(1)?);
            let plan = |o: &ObjectNode| (o.centroid - standing.centroid).xy().norm();
            if plan(facing) < MIN_SEPARATION_M || plan(target) < MIN_SEPARATION_M {
                return None;
            }
            let difficulty = *Difficulty::ALL.choose(rng)?;
            let frame = build_egocentric_frame(&standing.centroid, &facing.centroid).ok()?;
            let local = frame.project(&target.centroid);
            let (f, l) = (local.x, local.y);
            let clear = match difficulty {
                Difficulty::Easy => l.abs() >= MARGIN,
                Difficulty::Medium => l.abs() >= MARGIN && (f + l.abs()).abs() >= MARGIN,
                Difficulty::Hard => l.abs() >= MARGIN && f.abs() >= MARGIN,
            };
            if !clear {
                return None;
            }
            let label = classify_direction(&local, difficulty).ok()?;
            let target_name = view.searchable_name(rng, &target.class_label);
            Some(Draft {
                text: templates::relative_direction(
                    &display_name(&standing.class_label),
                    &display_name(&facing.class_label),
                    &target_name,
                    difficulty,
                ),
                options: Some(difficulty.labels().iter().map(|l| l.as_str().to_string()).collect()),
                answer: Answer::Label(label.as_str().to_string()),
                difficulty: Some(difficulty),
            })
        }
    }
}
