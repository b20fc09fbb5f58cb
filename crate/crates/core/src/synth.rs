//! Seeded synthetic issue corpus for benchmarks and end-to-end tests.
//!
//! Mimics a five-project tracker export: role-dependent issue types,
//! keyword-bearing summaries and descriptions, count and presence columns
//! with role/seniority-dependent distributions, and a controlled fraction
//! of label noise that caps achievable accuracy below 1. Generation is a
//! single deterministic RNG stream per seed.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::IssueRecord;
use crate::features::{FeatureKind, FeatureMatrix};
use crate::scalar::Scalar;

/// Generator knobs.
#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub n_issues: usize,
    pub seed: u64,
    /// Probability that a record's feature profile is drawn from a random
    /// role instead of its labeled role.
    pub role_noise: f64,
    /// Same, for developer seniority.
    pub seniority_noise: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_issues: 5324,
            seed: 42,
            role_noise: 0.10,
            seniority_noise: 0.14,
        }
    }
}

const ROLES: [&str; 4] = ["Developer", "Tester", "Designer", "Leader"];
const ROLE_WEIGHTS: [f64; 4] = [0.62, 0.16, 0.12, 0.10];
const SENIORITIES: [&str; 3] = ["Junior", "Mid", "Senior"];
const SENIORITY_WEIGHTS: [f64; 3] = [0.45, 0.35, 0.20];

const PROJECTS: [(&str, f64); 5] = [
    ("P1", 1287.0),
    ("P2", 2004.0),
    ("P3", 202.0),
    ("P4", 126.0),
    ("P5", 1705.0),
];

const FILLER: [&str; 48] = [
    "page", "room", "menu", "hotel", "tv", "channel", "guest", "login", "screen,", "panel",
    "video", "list", "player", "media", "wall", "sync", "filter", "mac", "address", "wifi",
    "ethernet", "connection", "content", "language", "setting", "account", "application",
    "interface", "feature", "module", "backup", "folder", "record", "protocol", "device",
    "portal", "dashboard", "invoice", "booking", "remote", "signal", "firmware", "widget",
    "profile", "billing", "message", "order", "service",
];

const DEV_WORDS: [&str; 18] = [
    "error", "null", "undefined", "server", "crash", "exception", "fails", "broken", "freeze",
    "timeout", "stack", "memory", "leak", "overflow", "bug", "wrong", "incorrect", "crashes",
];

const TESTER_WORDS: [&str; 14] = [
    "test", "request", "verify", "regression", "scenario", "steps", "coverage", "suite", "case",
    "execute", "validate", "confirm", "retest", "build",
];

const DESIGNER_WORDS: [&str; 14] = [
    "design", "icon", "logo", "layout", "theme", "color", "font", "style", "banner", "spacing",
    "alignment", "mockup", "ui", "ux",
];

const LEADER_WORDS: [&str; 14] = [
    "document", "documentation", "write", "plan", "release", "schedule", "meeting", "milestone",
    "report", "scope", "estimate", "roadmap", "review", "assign",
];

const SENIOR_WORDS: [&str; 10] = [
    "architecture", "refactor", "migration", "concurrency", "deadlock", "scalability",
    "optimization", "integration", "infrastructure", "replication",
];

const MID_WORDS: [&str; 10] = [
    "validation", "form", "endpoint", "cache", "session", "query", "pagination", "export",
    "mapping", "webhook",
];

const JUNIOR_WORDS: [&str; 10] = [
    "typo", "caption", "padding", "spelling", "rename", "copy", "tooltip", "placeholder",
    "wording", "cursor",
];

const ISSUE_TYPES: [&str; 6] = [
    "Bug",
    "Epic",
    "Request",
    "Story",
    "Technical task",
    "Test Request",
];

fn role_index(role: &str) -> usize {
    ROLES.iter().position(|r| *r == role).expect("known role")
}

fn pick<'a>(rng: &mut ChaCha8Rng, items: &'a [&'a str], weights: &[f64]) -> &'a str {
    let total: f64 = weights.iter().sum();
    let mut draw = rng.gen_range(0.0..total);
    for (item, &w) in items.iter().zip(weights) {
        if draw < w {
            return item;
        }
        draw -= w;
    }
    items[items.len() - 1]
}

fn uniform<'a>(rng: &mut ChaCha8Rng, items: &'a [&'a str]) -> &'a str {
    items[rng.gen_range(0..items.len())]
}

/// Capped geometric-ish count with the given mean-ish intensity.
fn count(rng: &mut ChaCha8Rng, intensity: f64, cap: u32) -> u32 {
    let mut value = 0u32;
    let p = intensity / (1.0 + intensity);
    while value < cap && rng.gen_bool(p) {
        value += 1;
    }
    value
}

fn chance(rng: &mut ChaCha8Rng, p: f64) -> bool {
    rng.gen_bool(p.clamp(0.0, 1.0))
}

/// Issue-type weights per profile role (rows follow [`ROLES`]).
fn issue_type_weights(profile: usize) -> [f64; 6] {
    match profile {
        0 => [0.58, 0.04, 0.03, 0.10, 0.23, 0.02], // Developer
        1 => [0.10, 0.01, 0.05, 0.02, 0.02, 0.80], // Tester
        2 => [0.10, 0.12, 0.32, 0.42, 0.02, 0.02], // Designer
        _ => [0.05, 0.42, 0.32, 0.16, 0.03, 0.02], // Leader
    }
}

struct TextParts {
    summary: String,
    description: String,
}

fn compose_text(
    rng: &mut ChaCha8Rng,
    profile: usize,
    seniority_profile: Option<usize>,
    is_bug: bool,
) -> TextParts {
    let role_pool: &[&str] = match profile {
        0 => &DEV_WORDS,
        1 => &TESTER_WORDS,
        2 => &DESIGNER_WORDS,
        _ => &LEADER_WORDS,
    };

    // Summary: 3..8 tokens, usually carrying one role keyword.
    let mut summary_tokens: Vec<String> = Vec::new();
    summary_tokens.push(title_case(uniform(rng, &FILLER)));
    if profile == 1 && chance(rng, 0.7) {
        summary_tokens.push(format!(
            "v{}.{}.{}",
            rng.gen_range(1..4),
            rng.gen_range(0..10),
            rng.gen_range(0..20)
        ));
    }
    if chance(rng, 0.80) {
        summary_tokens.push(uniform(rng, role_pool).to_string());
    }
    if chance(rng, 0.6) {
        summary_tokens.push(uniform(rng, &FILLER).to_string());
    }
    if chance(rng, 0.4) {
        summary_tokens.push("problem".to_string());
    }

    // Description: role keywords plus filler, order shuffled so adjacent
    // pairs are unstable across issues.
    let target_len = match seniority_profile {
        Some(2) => rng.gen_range(12..22), // senior: long
        Some(1) => rng.gen_range(8..15),
        Some(0) => rng.gen_range(4..9), // junior: short
        None => rng.gen_range(5..16),
    };
    let mut description_tokens: Vec<String> = Vec::new();
    let keyword_count = 1 + usize::from(chance(rng, 0.7));
    for _ in 0..keyword_count {
        if chance(rng, 0.85) {
            description_tokens.push(uniform(rng, role_pool).to_string());
        }
    }
    if let Some(level) = seniority_profile {
        let pool: &[&str] = match level {
            2 => &SENIOR_WORDS,
            1 => &MID_WORDS,
            _ => &JUNIOR_WORDS,
        };
        if chance(rng, 0.8) {
            description_tokens.push(uniform(rng, pool).to_string());
        }
        if level == 2 && chance(rng, 0.5) {
            description_tokens.push(uniform(rng, pool).to_string());
        }
    }
    if is_bug {
        if chance(rng, 0.5) {
            description_tokens.push("doesn't".to_string());
            description_tokens.push("work".to_string());
        }
        if chance(rng, 0.4) {
            description_tokens.push("not".to_string());
            description_tokens.push(
                ["working", "visible", "correct", "stable"][rng.gen_range(0..4)].to_string(),
            );
        }
        if chance(rng, 0.4) {
            description_tokens.push(["broken", "slow", "wrong"][rng.gen_range(0..3)].to_string());
        }
    } else {
        if chance(rng, 0.55) {
            description_tokens.push("should".to_string());
            description_tokens.push(
                ["be", "support", "display", "include"][rng.gen_range(0..4)].to_string(),
            );
        }
        if chance(rng, 0.3) {
            description_tokens.push("please".to_string());
        }
    }
    while description_tokens.len() < target_len {
        description_tokens.push(uniform(rng, &FILLER).to_string());
    }
    // Shuffle filler order; keep a deterministic draw sequence.
    for i in (1..description_tokens.len()).rev() {
        let j = rng.gen_range(0..=i);
        description_tokens.swap(i, j);
    }
    if chance(rng, 0.6) {
        let last = description_tokens.len() - 1;
        description_tokens[last].push('.');
    }
    // A small fraction of descriptions are empty, as in real exports.
    let description = if chance(rng, 0.02) {
        String::new()
    } else {
        description_tokens.join(" ")
    };

    TextParts {
        summary: summary_tokens.join(" "),
        description,
    }
}

fn title_case(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().collect::<String>() + chars.as_str(),
        None => String::new(),
    }
}

/// Generates a labeled synthetic corpus.
pub fn generate(config: &SynthConfig) -> Vec<IssueRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let project_names: Vec<&str> = PROJECTS.iter().map(|(n, _)| *n).collect();
    let project_weights: Vec<f64> = PROJECTS.iter().map(|(_, w)| *w).collect();

    let reporters: Vec<String> = (0..24).map(|i| format!("user{i:02}")).collect();

    (0..config.n_issues)
        .map(|i| {
            let role = pick(&mut rng, &ROLES, &ROLE_WEIGHTS);
            let seniority = if role == "Developer" {
                Some(pick(&mut rng, &SENIORITIES, &SENIORITY_WEIGHTS))
            } else {
                None
            };

            // Feature profile: usually the labeled role, sometimes noise.
            let profile = if chance(&mut rng, config.role_noise) {
                rng.gen_range(0..4)
            } else {
                role_index(role)
            };
            let seniority_profile = seniority.map(|s| {
                if chance(&mut rng, config.seniority_noise) {
                    rng.gen_range(0..3)
                } else {
                    SENIORITIES.iter().position(|x| *x == s).expect("known")
                }
            });

            let issue_type = pick(&mut rng, &ISSUE_TYPES, &issue_type_weights(profile));
            let is_bug = issue_type == "Bug";
            let text = compose_text(&mut rng, profile, seniority_profile, is_bug);

            let senior_boost = match seniority_profile {
                Some(2) => 1.0,
                Some(1) => 0.4,
                _ => 0.0,
            };
            let priority = {
                let weights = match seniority_profile {
                    Some(2) => [0.08, 0.27, 0.45, 0.20],
                    Some(1) => [0.22, 0.43, 0.30, 0.05],
                    Some(0) => [0.45, 0.40, 0.14, 0.01],
                    None => match profile {
                        3 => [0.15, 0.40, 0.35, 0.10],
                        _ => [0.30, 0.40, 0.25, 0.05],
                    },
                };
                pick(
                    &mut rng,
                    &["Low", "Medium", "High", "Showstopper"],
                    &weights,
                )
            };
            let frequency = if is_bug {
                pick(
                    &mut rng,
                    &["always-2/2", "sometimes-2/4", "rare-1/5", "unknown"],
                    &[0.25, 0.35, 0.2, 0.2],
                )
            } else {
                pick(
                    &mut rng,
                    &["unknown", "sometimes-2/4"],
                    &[0.88, 0.12],
                )
            };
            let bug_category = if is_bug {
                let weights = if profile == 2 {
                    [0.15, 0.15, 0.08, 0.04, 0.58]
                } else {
                    [0.42, 0.26, 0.16, 0.10, 0.06]
                };
                pick(
                    &mut rng,
                    &["Functional", "General", "Performance", "Security", "Usability"],
                    &weights,
                )
            } else {
                "unknown"
            };
            let labels = {
                let weights = match profile {
                    0 => [0.12, 0.30, 0.30, 0.08, 0.20],
                    1 => [0.12, 0.25, 0.15, 0.18, 0.30],
                    2 => [0.08, 0.10, 0.06, 0.60, 0.16],
                    _ => [0.52, 0.10, 0.12, 0.06, 0.20],
                };
                pick(
                    &mut rng,
                    &["Admin", "TV", "Cloud", "UI", "unknown"],
                    &weights,
                )
            };
            let reporter = {
                // Reporter pools tilt by profile: low indices report to
                // developers, high indices are design/management heavy.
                let offset = match profile {
                    0 => 0,
                    1 => 6,
                    2 => 12,
                    _ => 18,
                };
                let idx = (offset + rng.gen_range(0..10)) % reporters.len();
                reporters[idx].clone()
            };

            let watchers = count(
                &mut rng,
                0.8 + senior_boost
                    + if profile == 3 { 1.6 } else { 0.0 }
                    + if priority == "Showstopper" { 1.5 } else { 0.0 },
                12,
            );
            let images = count(&mut rng, if profile == 1 { 1.6 } else { 0.3 }, 8);
            let reopen_count = count(
                &mut rng,
                if is_bug && seniority_profile == Some(0) {
                    0.8
                } else {
                    0.12
                },
                6,
            );
            let reassign_count = count(
                &mut rng,
                match seniority_profile {
                    Some(0) => 0.7,
                    Some(1) => 0.3,
                    _ => 0.15,
                },
                5,
            );
            let linked_issues = count(
                &mut rng,
                0.3 + senior_boost + if issue_type == "Epic" { 1.2 } else { 0.0 },
                9,
            );
            let sub_tasks = count(
                &mut rng,
                if profile == 3 || issue_type == "Epic" {
                    1.4
                } else {
                    0.2
                },
                9,
            );
            let components = count(
                &mut rng,
                match seniority_profile {
                    Some(2) => 1.8,
                    Some(1) => 0.9,
                    Some(0) => 0.35,
                    None => 0.6,
                },
                7,
            );

            IssueRecord {
                id: format!("I-{i:05}"),
                project: pick(&mut rng, &project_names, &project_weights).to_string(),
                summary: text.summary,
                description: text.description,
                issue_type: issue_type.to_string(),
                reporter,
                priority: priority.to_string(),
                frequency: frequency.to_string(),
                bug_category: bug_category.to_string(),
                labels: labels.to_string(),
                watchers,
                images,
                reopen_count,
                reassign_count,
                linked_issues,
                sub_tasks,
                components,
                reported_by_customer: chance(&mut rng, 0.25),
                tested_versions: chance(
                    &mut rng,
                    match profile {
                        1 => 0.8,
                        0 if is_bug => 0.35,
                        _ => 0.1,
                    },
                ),
                test_execution_type: chance(&mut rng, if profile == 1 { 0.65 } else { 0.05 }),
                approval_type: chance(&mut rng, if profile == 3 { 0.5 } else { 0.08 }),
                affects_versions: chance(&mut rng, if is_bug { 0.6 } else { 0.12 }),
                assignee_role: Some(role.to_string()),
                assignee_seniority: seniority.map(str::to_string),
            }
        })
        .collect()
}

/// A linearly separable, non-negative blob dataset: class `c` is high on
/// feature pair `(2c, 2c+1)` and low elsewhere. Suits every classifier in
/// the crate, including multinomial naive Bayes.
pub fn separable_blobs<F: Scalar>(
    n: usize,
    n_classes: usize,
    seed: u64,
) -> (FeatureMatrix<F>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = 2 * n_classes;
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let class = i % n_classes;
        let row: Vec<F> = (0..d)
            .map(|j| {
                let high = j == 2 * class || j == 2 * class + 1;
                let base = if high {
                    rng.gen_range(7.0..9.0)
                } else {
                    rng.gen_range(0.0..1.5)
                };
                F::real(base)
            })
            .collect();
        rows.push(row);
        labels.push(class);
    }
    let names = (0..d).map(|j| format!("x{j}")).collect();
    let x = FeatureMatrix::from_rows(rows, names, FeatureKind::Curated)
        .expect("blob rows are finite");
    (x, labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_dataset, TaskKind};

    #[test]
    fn generation_is_deterministic() {
        let config = SynthConfig {
            n_issues: 50,
            ..SynthConfig::default()
        };
        let a = generate(&config);
        let b = generate(&config);
        assert_eq!(a, b);
        let c = generate(&SynthConfig {
            seed: 43,
            ..config
        });
        assert_ne!(a, c);
    }

    #[test]
    fn corpus_supports_both_tasks() {
        let records = generate(&SynthConfig {
            n_issues: 800,
            ..SynthConfig::default()
        });
        let team = build_dataset(&records, TaskKind::TeamAssignment).unwrap();
        assert_eq!(team.dataset.n_classes(), 4);
        let dev = build_dataset(&records, TaskKind::DeveloperAssignment).unwrap();
        assert_eq!(dev.dataset.n_classes(), 3);
        assert!(dev.dataset.len() < team.dataset.len());
    }

    #[test]
    fn blobs_are_balanced_and_nonnegative() {
        let (x, y) = separable_blobs::<f64>(300, 3, 7);
        assert_eq!(x.rows(), 300);
        assert_eq!(x.cols(), 6);
        for r in 0..x.rows() {
            for c in 0..x.cols() {
                assert!(x.get(r, c) >= 0.0);
            }
        }
        for class in 0..3 {
            assert_eq!(y.iter().filter(|&&c| c == class).count(), 100);
        }
    }
}
