//! Machine- and human-readable verification reports.
//!
//! The JSON form is stable, timestamp-free and byte-identical across runs
//! on the same input; wall-clock timings only appear in the text form.
//! Every check is reported with the formula it decides, so users can
//! reproduce the verification with external model-checking tools.

use std::fmt::Write;

use serde::Serialize;

use crate::build::BuildReport;
use crate::checks::{CheckResult, Verdict};
use crate::explore::{Path, ReachabilityGraph};
use crate::net::PetriNet;

pub const TOOL_NAME: &str = "skinet";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct Report {
    pub tool: ToolInfo,
    pub skillset: String,
    pub build: BuildReport,
    pub exploration: ExplorationStats,
    pub checks: Vec<CheckReport>,
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct ToolInfo {
    pub name: &'static str,
    pub version: &'static str,
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct ExplorationStats {
    pub states: usize,
    pub edges: usize,
    pub deadlocks: usize,
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct CheckReport {
    pub name: String,
    pub formula: String,
    pub verdict: String,
    pub findings: Vec<FindingReport>,
    #[serde(skip)]
    pub elapsed_ms: u128,
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct FindingReport {
    pub subject: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<Vec<PathStepReport>>,
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct PathStepReport {
    pub transition: String,
    pub marking_delta: MarkingDelta,
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct MarkingDelta {
    pub added: Vec<String>,
    pub removed: Vec<String>,
}

impl Report {
    pub fn new(skillset: &str, build: BuildReport, graph: &ReachabilityGraph) -> Self {
        Report {
            tool: ToolInfo {
                name: TOOL_NAME,
                version: TOOL_VERSION,
            },
            skillset: skillset.to_string(),
            build,
            exploration: ExplorationStats {
                states: graph.state_count(),
                edges: graph.edge_count(),
                deadlocks: graph.deadlock_states().len(),
            },
            checks: Vec::new(),
        }
    }

    pub fn push_check(&mut self, net: &PetriNet, graph: &ReachabilityGraph, result: &CheckResult) {
        let findings = result
            .findings
            .iter()
            .map(|f| FindingReport {
                subject: f.subject.clone(),
                message: f.message.clone(),
                state: f.state,
                path: f.path.as_ref().map(|p| render_path(net, graph, p)),
            })
            .collect();
        self.checks.push(CheckReport {
            name: result.name.clone(),
            formula: result.formula.clone(),
            verdict: match result.verdict {
                Verdict::Pass => "pass".into(),
                Verdict::Fail => "fail".into(),
            },
            findings,
            elapsed_ms: result.stats.elapsed.as_millis(),
        });
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.verdict == "pass")
    }

    /// Stable JSON rendering; no timestamps or durations.
    pub fn to_json(&self) -> String {
        let mut json = serde_json::to_string_pretty(self).expect("report serializes");
        json.push('\n');
        json
    }

    /// Human-readable rendering with per-check timing.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} {} — skillset '{}'",
            self.tool.name, self.tool.version, self.skillset
        );
        let _ = writeln!(
            out,
            "net: {} places, {} transitions ({} resets){}",
            self.build.place_count,
            self.build.transition_count,
            self.build.reset_count,
            if self.build.aliases.is_empty() {
                String::new()
            } else {
                format!(", {} merged duplicates", self.build.aliases.len())
            }
        );
        let _ = writeln!(
            out,
            "reachable: {} states, {} edges, {} deadlocks",
            self.exploration.states, self.exploration.edges, self.exploration.deadlocks
        );
        for warning in &self.build.warnings {
            let _ = writeln!(out, "warning: {warning}");
        }
        for check in &self.checks {
            let _ = writeln!(out);
            let _ = writeln!(out, "check {:<22} {}", check.name, check.formula);
            let _ = writeln!(
                out,
                "  verdict: {} ({} ms)",
                if check.verdict == "pass" {
                    "pass"
                } else {
                    "FAIL"
                },
                check.elapsed_ms
            );
            for finding in &check.findings {
                let _ = writeln!(out, "  - {}: {}", finding.subject, finding.message);
                if let Some(path) = &finding.path {
                    if path.is_empty() {
                        let _ = writeln!(out, "    path: (initial state)");
                    } else {
                        let _ = writeln!(out, "    path:");
                        for (i, step) in path.iter().enumerate() {
                            let delta_added: Vec<&str> = step
                                .marking_delta
                                .added
                                .iter()
                                .map(String::as_str)
                                .collect();
                            let delta_removed: Vec<&str> = step
                                .marking_delta
                                .removed
                                .iter()
                                .map(String::as_str)
                                .collect();
                            let _ = writeln!(
                                out,
                                "      {:>3}. {}  {}{}",
                                i + 1,
                                step.transition,
                                delta_added
                                    .iter()
                                    .map(|p| format!("+{p}"))
                                    .collect::<Vec<_>>()
                                    .join(" "),
                                delta_removed
                                    .iter()
                                    .map(|p| format!(" -{p}"))
                                    .collect::<Vec<_>>()
                                    .join("")
                            );
                        }
                    }
                }
            }
        }
        out
    }
}

/// Render a path as named steps with the marking difference each firing
/// makes.
pub fn render_path(net: &PetriNet, graph: &ReachabilityGraph, path: &Path) -> Vec<PathStepReport> {
    let mut steps = Vec::with_capacity(path.steps.len());
    let mut previous = 0;
    for step in &path.steps {
        let before = graph.state(previous);
        let after = graph.state(step.state);
        let added = (0..after.place_count())
            .filter(|&p| after.is_marked(p) && !before.is_marked(p))
            .map(|p| net.places()[p].name.clone())
            .collect();
        let removed = (0..before.place_count())
            .filter(|&p| before.is_marked(p) && !after.is_marked(p))
            .map(|p| net.places()[p].name.clone())
            .collect();
        steps.push(PathStepReport {
            transition: net.transitions()[step.transition].name.clone(),
            marking_delta: MarkingDelta { added, removed },
        });
        previous = step.state;
    }
    steps
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::build::{build_net, BuildOptions};
    use crate::checks::{check_dead, check_deadset, check_deadskill, check_live, check_safe};
    use crate::explore::{explore, ExploreOptions};
    use crate::parser::parse_skillset;

    const SPOT: &str = include_str!("../../../models/spot.skillset");

    fn spot_report() -> Report {
        let sk = parse_skillset(SPOT).unwrap();
        let (net, build) = build_net(&sk, &BuildOptions::default()).unwrap();
        let graph = explore(&net, &ExploreOptions::default()).unwrap();
        let mut report = Report::new(&sk.name, build, &graph);
        report.push_check(&net, &graph, &check_dead(&net, &graph));
        report.push_check(&net, &graph, &check_live(&net, &graph));
        report.push_check(&net, &graph, &check_safe(&net, &graph));
        for skill in ["init_power", "safe_poweroff", "go_to"] {
            report.push_check(&net, &graph, &check_deadskill(&net, &graph, skill).unwrap());
        }
        report.push_check(&net, &graph, &check_deadset(&net, &graph));
        report
    }

    #[test]
    fn json_report_is_stable_and_parses() {
        let a = spot_report().to_json();
        let b = spot_report().to_json();
        assert_eq!(a, b);
        let value: serde_json::Value = serde_json::from_str(&a).unwrap();
        assert_eq!(value["tool"]["name"], "skinet");
        assert_eq!(value["skillset"], "spot");
        assert_eq!(value["checks"][0]["name"], "dead");
        assert_eq!(value["checks"][0]["verdict"], "pass");
        // The live check fails on spot and carries findings.
        assert_eq!(value["checks"][1]["verdict"], "fail");
        assert!(!value["checks"][1]["findings"]
            .as_array()
            .unwrap()
            .is_empty());
        // No volatile fields anywhere in the JSON.
        assert!(!a.contains("elapsed"));
    }

    #[test]
    fn text_and_json_carry_identical_verdicts() {
        let report = spot_report();
        let text = report.to_text();
        for check in &report.checks {
            assert!(text.contains(&check.name));
            assert!(text.contains(&check.formula));
        }
        assert!(text.contains("FAIL"));
        assert!(text.contains("check dead"));
    }

    #[test]
    fn paths_render_with_marking_deltas() {
        let report = spot_report();
        let deadskill = report
            .checks
            .iter()
            .find(|c| c.name.starts_with("deadskill"))
            .unwrap();
        let path = deadskill.findings[0].path.as_ref().unwrap();
        assert!(!path.is_empty());
        let start_step = path
            .iter()
            .find(|s| s.transition == "t_start_go_to")
            .expect("witness passes through the go_to start");
        assert!(start_step
            .marking_delta
            .added
            .contains(&"i_go_to".to_string()));
        assert!(start_step
            .marking_delta
            .removed
            .contains(&"e_go_to".to_string()));
    }
}
