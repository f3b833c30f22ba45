//! The check catalog: dead, live, safe, deadskill, deadset.
//!
//! Each check is a dedicated graph algorithm over the explored state space,
//! not a general temporal-logic engine; the formula each one decides is
//! carried in the result for display. Counterexamples are shortest paths
//! from the initial state.

use std::time::{Duration, Instant};

use thiserror::Error;

use crate::explore::{backward_reachable, path_to_state, Path, ReachabilityGraph, StateId};
use crate::net::{PetriNet, PlaceRole, TransitionId};

pub const FORMULA_DEAD: &str = "A ¬dead";
pub const FORMULA_LIVE: &str = "∀ t ∈ T : A ¬t  (t is dead iff its formula holds)";
pub const FORMULA_SAFE: &str = "∀ r : A (Σ_{p∈P_r} m[p] = 1) ; ∀ s : A (m[e_s] + m[i_s] + Σ_k m[x_s,k] = 1) ; ∀ p : A ¬(m[p] ≥ 2)";
pub const FORMULA_DEADSKILL: &str = "AG EF i_s  (counterexamples from ¬AF EF i_s)";
pub const FORMULA_DEADSET: &str = "¬AF EF (Σ_{s∈S} i_s)";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

/// One reported violation: what is wrong, where, and how to get there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finding {
    pub subject: String,
    pub message: String,
    pub state: Option<StateId>,
    pub path: Option<Path>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckStats {
    pub states: usize,
    pub edges: usize,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckResult {
    pub name: String,
    pub formula: String,
    pub verdict: Verdict,
    pub findings: Vec<Finding>,
    pub stats: CheckStats,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    fn new(
        name: &str,
        formula: &str,
        findings: Vec<Finding>,
        graph: &ReachabilityGraph,
        started: Instant,
    ) -> Self {
        CheckResult {
            name: name.into(),
            formula: formula.into(),
            verdict: if findings.is_empty() {
                Verdict::Pass
            } else {
                Verdict::Fail
            },
            findings,
            stats: CheckStats {
                states: graph.state_count(),
                edges: graph.edge_count(),
                elapsed: started.elapsed(),
            },
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum CheckError {
    #[error("unknown skill '{skill}'")]
    UnknownSkill { skill: String },
}

/// No reachable marking may be a deadlock.
pub fn check_dead(net: &PetriNet, graph: &ReachabilityGraph) -> CheckResult {
    let started = Instant::now();
    let findings = graph
        .deadlock_states()
        .into_iter()
        .map(|s| Finding {
            subject: format!("state {s}"),
            message: format!(
                "deadlock: no transition is fireable in {}",
                net.format_marking(graph.state(s))
            ),
            state: Some(s),
            path: Some(path_to_state(graph, s)),
        })
        .collect();
    CheckResult::new("dead", FORMULA_DEAD, findings, graph, started)
}

/// Transitions that label no edge of the graph, ascending id.
pub fn dead_transitions(net: &PetriNet, graph: &ReachabilityGraph) -> Vec<TransitionId> {
    let mut fired = vec![false; net.transitions().len()];
    for (_, t, _) in graph.edges() {
        fired[t] = true;
    }
    (0..net.transitions().len())
        .filter(|&t| !fired[t])
        .collect()
}

/// Every transition must be fireable somewhere in the reachable space.
/// Dead transitions have no witness; nonexistence of a firing has none.
pub fn check_live(net: &PetriNet, graph: &ReachabilityGraph) -> CheckResult {
    let started = Instant::now();
    let findings = dead_transitions(net, graph)
        .into_iter()
        .map(|t| {
            let transition = &net.transitions()[t];
            let origins: Vec<String> = transition.labels.iter().map(|l| l.to_string()).collect();
            let origin = if origins.is_empty() {
                "hand-built transition".to_string()
            } else {
                origins.join(", merged with ")
            };
            Finding {
                subject: transition.name.clone(),
                message: format!("dead transition: never fireable; generated from {origin}"),
                state: None,
                path: None,
            }
        })
        .collect();
    CheckResult::new("live", FORMULA_LIVE, findings, graph, started)
}

/// Token invariants: each resource's places share exactly one token, each
/// skill's internal places share exactly one token, no place ever holds two.
pub fn check_safe(net: &PetriNet, graph: &ReachabilityGraph) -> CheckResult {
    let started = Instant::now();
    let mut findings = Vec::new();

    let resource_groups = net.resource_groups();
    let skill_groups = net.skill_groups();
    let mut resource_seen = vec![false; resource_groups.len()];
    let mut skill_seen = vec![false; skill_groups.len()];

    for s in 0..graph.state_count() {
        let marking = graph.state(s);
        for (i, (resource, places)) in resource_groups.iter().enumerate() {
            if resource_seen[i] {
                continue;
            }
            let tokens = places.iter().filter(|&&p| marking.is_marked(p)).count();
            if tokens != 1 {
                resource_seen[i] = true;
                findings.push(Finding {
                    subject: resource.clone(),
                    message: format!(
                        "resource token sum is {tokens}, expected 1, in {}",
                        net.format_marking(marking)
                    ),
                    state: Some(s),
                    path: Some(path_to_state(graph, s)),
                });
            }
        }
        for (i, group) in skill_groups.iter().enumerate() {
            if skill_seen[i] {
                continue;
            }
            let places = group
                .entry
                .iter()
                .chain(group.running.iter())
                .chain(group.exits.iter().map(|(_, p)| p));
            let tokens = places.filter(|&&p| marking.is_marked(p)).count();
            if tokens != 1 {
                skill_seen[i] = true;
                findings.push(Finding {
                    subject: group.skill.clone(),
                    message: format!(
                        "skill state token sum is {tokens}, expected 1, in {}",
                        net.format_marking(marking)
                    ),
                    state: Some(s),
                    path: Some(path_to_state(graph, s)),
                });
            }
        }
    }

    for violation in graph.safety_violations() {
        let place = &net.places()[violation.place].name;
        let transition = &net.transitions()[violation.transition].name;
        findings.push(Finding {
            subject: place.clone(),
            message: format!(
                "1-safety violated: firing '{transition}' from state {} puts a second \
                 token on '{place}'",
                violation.state
            ),
            state: Some(violation.state),
            path: Some(path_to_state(graph, violation.state)),
        });
    }

    CheckResult::new("safe", FORMULA_SAFE, findings, graph, started)
}

/// Reachable states from which the skill's running place is unreachable.
pub fn deadskill_violating_states(
    net: &PetriNet,
    graph: &ReachabilityGraph,
    skill: &str,
) -> Result<Vec<StateId>, CheckError> {
    let running = net
        .running_place(skill)
        .ok_or_else(|| CheckError::UnknownSkill {
            skill: skill.to_string(),
        })?;
    let reaches = backward_reachable(graph, |_, m| m.is_marked(running));
    Ok((0..graph.state_count()).filter(|&s| !reaches[s]).collect())
}

/// From every reachable state, the skill must still be able to eventually
/// run. Only the first violating state is reported, with its path.
pub fn check_deadskill(
    net: &PetriNet,
    graph: &ReachabilityGraph,
    skill: &str,
) -> Result<CheckResult, CheckError> {
    let started = Instant::now();
    let violating = deadskill_violating_states(net, graph, skill)?;
    let findings = first_violation_finding(
        net,
        graph,
        &violating,
        skill,
        &format!("skill '{skill}' can never run again"),
    );
    let mut result = CheckResult::new("deadskill", FORMULA_DEADSKILL, findings, graph, started);
    result.name = format!("deadskill({skill})");
    Ok(result)
}

/// From every reachable state, some skill must still be able to eventually
/// run.
pub fn check_deadset(net: &PetriNet, graph: &ReachabilityGraph) -> CheckResult {
    let started = Instant::now();
    let running_places: Vec<_> = net
        .places()
        .iter()
        .enumerate()
        .filter(|(_, p)| matches!(p.role, PlaceRole::SkillRunning { .. }))
        .map(|(id, _)| id)
        .collect();

    let findings = if running_places.is_empty() {
        vec![Finding {
            subject: "skillset".into(),
            message: "the skillset declares no skills, so no state can ever have a \
                      running skill; the property is unsatisfiable"
                .into(),
            state: Some(0),
            path: Some(Path::default()),
        }]
    } else {
        let reaches =
            backward_reachable(graph, |_, m| running_places.iter().any(|&p| m.is_marked(p)));
        let violating: Vec<StateId> = (0..graph.state_count()).filter(|&s| !reaches[s]).collect();
        first_violation_finding(
            net,
            graph,
            &violating,
            "skillset",
            "no skill can ever run again",
        )
    };
    CheckResult::new("deadset", FORMULA_DEADSET, findings, graph, started)
}

fn first_violation_finding(
    net: &PetriNet,
    graph: &ReachabilityGraph,
    violating: &[StateId],
    subject: &str,
    description: &str,
) -> Vec<Finding> {
    let Some(&first) = violating.first() else {
        return Vec::new();
    };
    let mut message = format!(
        "{description} from state {first} {} ({} violating state{})",
        net.format_marking(graph.state(first)),
        violating.len(),
        if violating.len() == 1 { "" } else { "s" },
    );
    if graph.is_deadlock(first) {
        message.push_str("; the state is also a deadlock");
    }
    vec![Finding {
        subject: subject.to_string(),
        message,
        state: Some(first),
        path: Some(witness_path(graph, first)),
    }]
}

/// Shortest path to `state`, extended through forced continuations: while
/// the path's end has exactly one successor, that step is inevitable
/// (typically a priority-forced invariant failure) and is appended so the
/// witness shows the consequence, not just the point of no return.
fn witness_path(graph: &ReachabilityGraph, state: StateId) -> Path {
    let mut path = path_to_state(graph, state);
    let mut visited: std::collections::HashSet<StateId> =
        path.steps.iter().map(|s| s.state).collect();
    visited.insert(0);
    let mut cursor = state;
    while graph.out_edges(cursor).len() == 1 {
        let (transition, next) = graph.out_edges(cursor)[0];
        if !visited.insert(next) {
            break;
        }
        path.steps.push(crate::explore::PathStep {
            transition,
            state: next,
        });
        cursor = next;
    }
    path
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::build::{build_net, BuildOptions};
    use crate::explore::{explore, ExploreOptions};
    use crate::parser::parse_skillset;

    const SPOT: &str = include_str!("../../../models/spot.skillset");
    const SPOT_FIXED: &str = include_str!("../../../models/spot_fixed.skillset");

    fn pipeline(src: &str, options: &BuildOptions) -> (PetriNet, ReachabilityGraph) {
        let sk = parse_skillset(src).unwrap();
        let (net, _) = build_net(&sk, options).unwrap();
        let graph = explore(&net, &ExploreOptions::default()).unwrap();
        (net, graph)
    }

    #[test]
    fn spot_has_no_deadlock() {
        let (net, graph) = pipeline(SPOT, &BuildOptions::default());
        let result = check_dead(&net, &graph);
        assert!(result.passed(), "findings: {:?}", result.findings);
    }

    #[test]
    fn spot_without_events_still_has_no_deadlock() {
        // Regression baseline: with events removed the skills alone keep
        // something fireable in every reachable marking.
        let options = BuildOptions {
            include_events: false,
            ..BuildOptions::default()
        };
        let (net, graph) = pipeline(SPOT, &options);
        let result = check_dead(&net, &graph);
        for finding in &result.findings {
            assert!(finding.path.is_some());
        }
        assert!(result.passed());
    }

    #[test]
    fn zero_transition_net_fails_dead_with_empty_path() {
        let (net, graph) = pipeline("skillset empty { }", &BuildOptions::default());
        let result = check_dead(&net, &graph);
        assert_eq!(result.verdict, Verdict::Fail);
        assert_eq!(result.findings.len(), 1);
        assert_eq!(result.findings[0].path, Some(Path::default()));
    }

    #[test]
    fn spot_dead_transitions_are_exactly_the_idle_variants() {
        let (net, graph) = pipeline(SPOT, &BuildOptions::default());
        let result = check_live(&net, &graph);
        assert_eq!(result.verdict, Verdict::Fail);
        let dead: Vec<&str> = result.findings.iter().map(|f| f.subject.as_str()).collect();
        assert!(dead.contains(&"t_go_to_success_is_arrived_1"));
        assert!(!dead.contains(&"t_go_to_success_is_arrived_0"));
        // control_mode is never Idle while a skill runs, and is_busy can
        // never be violated while init_power or safe_poweroff run.
        assert_eq!(
            dead,
            vec![
                "t_init_power_inv_fail_is_busy",
                "t_safe_poweroff_inv_fail_is_busy",
                "t_go_to_success_is_arrived_1",
                "t_go_to_failure_not_arrived_1",
                "t_go_to_interrupt_1",
                "t_init_power_reset_inv_fail_is_busy",
                "t_safe_poweroff_reset_inv_fail_is_busy",
            ]
        );
    }

    #[test]
    fn toggle_net_is_fully_live() {
        let src = "skillset toggle { resource { r { initial a a -> b b -> a } } \
                    event { flip { guard r == a r -> b } flop { guard r == b r -> a } } }";
        let (net, graph) = pipeline(src, &BuildOptions::default());
        assert!(check_live(&net, &graph).passed());
        assert!(dead_transitions(&net, &graph).is_empty());
    }

    #[test]
    fn spot_is_safe() {
        let (net, graph) = pipeline(SPOT, &BuildOptions::default());
        assert!(check_safe(&net, &graph).passed());
    }

    #[test]
    fn empty_skillset_is_safe_vacuously() {
        let (net, graph) = pipeline("skillset empty { }", &BuildOptions::default());
        assert!(check_safe(&net, &graph).passed());
    }

    #[test]
    fn corrupted_net_fails_safe_with_witness() {
        use crate::lower::PriorityClass;
        use crate::net::{Marking, NetTransition, Place, PlaceRole};
        // One resource with two state places and a transition that outputs
        // to both: firing from {a} tries to double-mark b after a round.
        let place = |state: &str| Place {
            name: format!("r_{state}"),
            role: PlaceRole::Resource {
                resource: "r".into(),
                state: state.into(),
            },
        };
        let mut initial = Marking::empty(2);
        initial.set(0);
        let net = PetriNet::new(
            "corrupt",
            vec![place("a"), place("b")],
            vec![
                NetTransition {
                    name: "t_ok".into(),
                    labels: Vec::new(),
                    inputs: vec![0],
                    outputs: vec![1],
                    priority: PriorityClass::Normal,
                },
                // The corrupting extra output arc: a -> {a, b}.
                NetTransition {
                    name: "t_extra".into(),
                    labels: Vec::new(),
                    inputs: vec![1],
                    outputs: vec![0, 1],
                    priority: PriorityClass::Normal,
                },
            ],
            initial,
            BuildOptions::default(),
        )
        .unwrap();
        let graph = explore(
            &net,
            &ExploreOptions {
                record_safety_violations: true,
                ..ExploreOptions::default()
            },
        )
        .unwrap();
        let result = check_safe(&net, &graph);
        assert_eq!(result.verdict, Verdict::Fail);
        let violation = result
            .findings
            .iter()
            .find(|f| f.message.contains("1-safety"))
            .expect("a 1-safety finding");
        assert!(violation.path.is_some());
    }

    #[test]
    fn unfixed_spot_deadskill_fails_through_an_invariant_failure() {
        let (net, graph) = pipeline(SPOT, &BuildOptions::default());
        for skill in ["init_power", "safe_poweroff", "go_to"] {
            let result = check_deadskill(&net, &graph, skill).unwrap();
            assert_eq!(result.verdict, Verdict::Fail, "skill {skill}");
            let path = result.findings[0].path.as_ref().unwrap();
            let transitions: Vec<&str> = path
                .steps
                .iter()
                .map(|s| net.transitions()[s.transition].name.as_str())
                .collect();
            assert!(
                transitions
                    .iter()
                    .any(|t| t.starts_with("t_go_to_inv_fail_")),
                "witness for {skill} does not traverse a go_to invariant failure: {transitions:?}"
            );
        }
    }

    #[test]
    fn fixed_spot_passes_deadskill_and_deadset() {
        let (net, graph) = pipeline(SPOT_FIXED, &BuildOptions::default());
        for skill in ["init_power", "safe_poweroff", "go_to"] {
            assert!(check_deadskill(&net, &graph, skill).unwrap().passed());
        }
        assert!(check_deadset(&net, &graph).passed());
    }

    #[test]
    fn unfixed_spot_fails_deadset() {
        let (net, graph) = pipeline(SPOT, &BuildOptions::default());
        let result = check_deadset(&net, &graph);
        assert_eq!(result.verdict, Verdict::Fail);
        assert!(result.findings[0].message.contains("violating state"));
    }

    #[test]
    fn guard_free_skill_passes_deadskill() {
        let src = "skillset x { skill s { start success done } }";
        let (net, graph) = pipeline(src, &BuildOptions::default());
        assert!(check_deadskill(&net, &graph, "s").unwrap().passed());
    }

    #[test]
    fn unknown_skill_is_an_error() {
        let (net, graph) = pipeline(SPOT, &BuildOptions::default());
        assert_eq!(
            check_deadskill(&net, &graph, "ghost").unwrap_err(),
            CheckError::UnknownSkill {
                skill: "ghost".into()
            }
        );
    }

    #[test]
    fn no_skills_fails_deadset_with_explanation() {
        let (net, graph) = pipeline(
            "skillset x { resource { r { initial a a -> b b -> a } } \
              event { e { guard r == a r -> b } } }",
            &BuildOptions::default(),
        );
        let result = check_deadset(&net, &graph);
        assert_eq!(result.verdict, Verdict::Fail);
        assert!(result.findings[0].message.contains("declares no skills"));
    }

    #[test]
    fn checks_are_deterministic() {
        let (net, graph) = pipeline(SPOT, &BuildOptions::default());
        let a = check_live(&net, &graph);
        let b = check_live(&net, &graph);
        assert_eq!(a.findings, b.findings);
        assert_eq!(a.verdict, b.verdict);
    }
}
