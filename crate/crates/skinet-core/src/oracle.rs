//! Direct interpreter of skillset execution semantics.
//!
//! Configurations track one state per resource and one phase per skill;
//! steps come straight from the model definition (events, skill starts,
//! precondition failures, terminators, resets) with broken invariants
//! preempting everything else. The interpreter never looks at the generated
//! net, which makes it an independent oracle: its labeled transition system
//! must match the net's reachability graph state for state and edge for
//! edge.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::build::BuildOptions;
use crate::explore::{ExploreError, ReachabilityGraph};
use crate::guard::{evaluate_with, involved_resources};
use crate::lower::{TerminationMode, TransitionLabel};
use crate::model::{EffectSet, Guard, Skillset};
use crate::net::{Marking, PetriNet, PlaceRole};

/// Execution phase of one skill.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SkillPhase {
    Idle,
    Running,
    Terminated(TerminationMode),
}

/// A semantic state: one state index per resource, one phase per skill,
/// both in declaration order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub resource_states: Vec<usize>,
    pub skill_phases: Vec<SkillPhase>,
}

impl Configuration {
    pub fn initial(skillset: &Skillset) -> Self {
        Configuration {
            resource_states: skillset
                .resources
                .iter()
                .map(|r| r.state_index(&r.initial).expect("initial state declared"))
                .collect(),
            skill_phases: vec![SkillPhase::Idle; skillset.skills.len()],
        }
    }

    pub fn format(&self, skillset: &Skillset) -> String {
        let resources: Vec<String> = skillset
            .resources
            .iter()
            .zip(&self.resource_states)
            .map(|(r, &s)| format!("{}={}", r.name, r.states[s]))
            .collect();
        let skills: Vec<String> = skillset
            .skills
            .iter()
            .zip(&self.skill_phases)
            .map(|(sk, phase)| match phase {
                SkillPhase::Idle => format!("{}=idle", sk.name),
                SkillPhase::Running => format!("{}=running", sk.name),
                SkillPhase::Terminated(mode) => {
                    format!("{}=terminated({})", sk.name, mode.label())
                }
            })
            .collect();
        format!("[{}; {}]", resources.join(", "), skills.join(", "))
    }
}

struct Interpreter<'a> {
    skillset: &'a Skillset,
    options: &'a BuildOptions,
}

impl<'a> Interpreter<'a> {
    fn state_name(&self, config: &Configuration, resource: &str) -> Option<String> {
        let idx = self
            .skillset
            .resources
            .iter()
            .position(|r| r.name == resource)?;
        Some(self.skillset.resources[idx].states[config.resource_states[idx]].clone())
    }

    fn holds(&self, guard: &Guard, config: &Configuration) -> bool {
        evaluate_with(guard, &|r| self.state_name(config, r)).unwrap_or(false)
    }

    /// Apply `effects` to the resource states, mirroring the net's
    /// expansion rules: a resource in `guard_scope` moves from its solution
    /// state (freely by default, along declared moves under strict mode);
    /// an unguarded resource only moves along a declared transition or the
    /// self move. Returns `None` when some effect cannot apply.
    fn apply_effects(
        &self,
        effects: &EffectSet,
        guard_scope: &[String],
        config: &Configuration,
    ) -> Option<Vec<usize>> {
        let mut next = config.resource_states.clone();
        for effect in effects.iter() {
            let idx = self
                .skillset
                .resources
                .iter()
                .position(|r| r.name == effect.resource)?;
            let resource = &self.skillset.resources[idx];
            let current = &resource.states[config.resource_states[idx]];
            let guarded = guard_scope.contains(&effect.resource);
            let allowed = if guarded {
                !self.options.strict_resource_moves || resource.allows_move(current, &effect.state)
            } else {
                resource.allows_move(current, &effect.state)
            };
            if !allowed {
                return None;
            }
            next[idx] = resource.state_index(&effect.state)?;
        }
        Some(next)
    }

    fn step(
        &self,
        config: &Configuration,
        guard_scope: &[String],
        effects: &EffectSet,
        skill: Option<(usize, SkillPhase)>,
    ) -> Option<Configuration> {
        let resource_states = self.apply_effects(effects, guard_scope, config)?;
        let mut skill_phases = config.skill_phases.clone();
        if let Some((idx, phase)) = skill {
            skill_phases[idx] = phase;
        }
        Some(Configuration {
            resource_states,
            skill_phases,
        })
    }

    /// Termination phase honoring the exit-place option: without exit
    /// places a terminating skill goes straight back to idle.
    fn terminated(&self, mode: TerminationMode) -> SkillPhase {
        if self.options.keep_exit_places {
            SkillPhase::Terminated(mode)
        } else {
            SkillPhase::Idle
        }
    }
}

/// All semantic steps from `config`. If any running skill has a violated
/// invariant with applicable failure effects, those steps preempt
/// everything else.
pub fn successors(
    skillset: &Skillset,
    config: &Configuration,
    options: &BuildOptions,
) -> Vec<(TransitionLabel, Configuration)> {
    let interp = Interpreter { skillset, options };

    let mut preempting = Vec::new();
    for (idx, skill) in skillset.skills.iter().enumerate() {
        if config.skill_phases[idx] != SkillPhase::Running {
            continue;
        }
        for inv in &skill.invariants {
            if interp.holds(&inv.guard, config) {
                continue;
            }
            let mode = TerminationMode::InvariantFailure(inv.name.clone());
            if let Some(next) = interp.step(
                config,
                &involved_resources(&inv.guard),
                &inv.failure_effects,
                Some((idx, interp.terminated(mode))),
            ) {
                preempting.push((
                    TransitionLabel::InvariantFailure {
                        skill: skill.name.clone(),
                        invariant: inv.name.clone(),
                    },
                    next,
                ));
            }
        }
    }
    if !preempting.is_empty() {
        return preempting;
    }

    let mut steps = Vec::new();

    if options.include_events {
        for event in &skillset.events {
            if !interp.holds(&event.guard, config) {
                continue;
            }
            if let Some(next) = interp.step(
                config,
                &involved_resources(&event.guard),
                &event.effects,
                None,
            ) {
                steps.push((
                    TransitionLabel::Event {
                        event: event.name.clone(),
                    },
                    next,
                ));
            }
        }
    }

    for (idx, skill) in skillset.skills.iter().enumerate() {
        match &config.skill_phases[idx] {
            SkillPhase::Idle => {
                if skill
                    .preconditions
                    .iter()
                    .all(|p| interp.holds(&p.guard, config))
                {
                    let scope: Vec<String> = {
                        let mut scope = Vec::new();
                        for p in &skill.preconditions {
                            for r in involved_resources(&p.guard) {
                                if !scope.contains(&r) {
                                    scope.push(r);
                                }
                            }
                        }
                        scope
                    };
                    if let Some(next) = interp.step(
                        config,
                        &scope,
                        &skill.start_effects,
                        Some((idx, SkillPhase::Running)),
                    ) {
                        steps.push((
                            TransitionLabel::Start {
                                skill: skill.name.clone(),
                            },
                            next,
                        ));
                    }
                }
                for pre in &skill.preconditions {
                    if interp.holds(&pre.guard, config) {
                        continue;
                    }
                    let mode = TerminationMode::PreconditionFailure(pre.name.clone());
                    if let Some(next) = interp.step(
                        config,
                        &involved_resources(&pre.guard),
                        &pre.failure_effects,
                        Some((idx, interp.terminated(mode))),
                    ) {
                        steps.push((
                            TransitionLabel::PreconditionFailure {
                                skill: skill.name.clone(),
                                precondition: pre.name.clone(),
                            },
                            next,
                        ));
                    }
                }
            }
            SkillPhase::Running => {
                if !skill
                    .invariants
                    .iter()
                    .all(|i| interp.holds(&i.guard, config))
                {
                    continue;
                }
                let scope: Vec<String> = {
                    let mut scope = Vec::new();
                    for i in &skill.invariants {
                        for r in involved_resources(&i.guard) {
                            if !scope.contains(&r) {
                                scope.push(r);
                            }
                        }
                    }
                    scope
                };
                let mut terminators: Vec<(TransitionLabel, TerminationMode, &EffectSet)> =
                    Vec::new();
                for s in &skill.successes {
                    terminators.push((
                        TransitionLabel::Success {
                            skill: skill.name.clone(),
                            success: s.name.clone(),
                        },
                        TerminationMode::Success(s.name.clone()),
                        &s.effects,
                    ));
                }
                for f in &skill.failures {
                    terminators.push((
                        TransitionLabel::Failure {
                            skill: skill.name.clone(),
                            failure: f.name.clone(),
                        },
                        TerminationMode::Failure(f.name.clone()),
                        &f.effects,
                    ));
                }
                if let Some(interrupt) = skill.interrupt() {
                    terminators.push((
                        TransitionLabel::Interrupt {
                            skill: skill.name.clone(),
                        },
                        TerminationMode::Interrupt,
                        interrupt,
                    ));
                }
                for (label, mode, effects) in terminators {
                    if let Some(next) = interp.step(
                        config,
                        &scope,
                        effects,
                        Some((idx, interp.terminated(mode))),
                    ) {
                        steps.push((label, next));
                    }
                }
            }
            SkillPhase::Terminated(mode) => {
                let mut next = config.clone();
                next.skill_phases[idx] = SkillPhase::Idle;
                steps.push((
                    TransitionLabel::Reset {
                        skill: skill.name.clone(),
                        mode: mode.clone(),
                    },
                    next,
                ));
            }
        }
    }

    steps
}

/// The labeled transition system of the direct interpreter.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectLts {
    pub options: BuildOptions,
    configs: Vec<Configuration>,
    index: HashMap<Configuration, usize>,
    edges: Vec<(usize, TransitionLabel, usize)>,
}

impl DirectLts {
    pub fn config_count(&self) -> usize {
        self.configs.len()
    }

    pub fn configs(&self) -> &[Configuration] {
        &self.configs
    }

    pub fn config_index(&self, config: &Configuration) -> Option<usize> {
        self.index.get(config).copied()
    }

    pub fn edges(&self) -> &[(usize, TransitionLabel, usize)] {
        &self.edges
    }
}

/// Breadth-first exploration of the semantic configurations.
pub fn explore_direct(
    skillset: &Skillset,
    options: &BuildOptions,
    state_limit: usize,
) -> Result<DirectLts, ExploreError> {
    let initial = Configuration::initial(skillset);
    let mut lts = DirectLts {
        options: *options,
        configs: vec![initial.clone()],
        index: HashMap::new(),
        edges: Vec::new(),
    };
    lts.index.insert(initial, 0);

    let mut current = 0;
    while current < lts.configs.len() {
        let steps = successors(skillset, &lts.configs[current], options);
        for (label, next) in steps {
            let target = match lts.index.get(&next) {
                Some(&id) => id,
                None => {
                    if lts.configs.len() + 1 > state_limit {
                        return Err(ExploreError::StateLimitExceeded { limit: state_limit });
                    }
                    let id = lts.configs.len();
                    lts.index.insert(next.clone(), id);
                    lts.configs.push(next);
                    id
                }
            };
            lts.edges.push((current, label, target));
        }
        current += 1;
    }
    Ok(lts)
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum EquivalenceError {
    #[error("the two explorations were built with different options")]
    OptionMismatch,
    #[error("behavior mismatch: {0}")]
    Mismatch(String),
}

/// Verify that the net's reachability graph and the direct interpreter
/// describe the same behavior: a bijection between markings and
/// configurations that preserves the initial state and the labeled edge
/// relation. Net transitions merged by deduplication contribute one edge
/// per merged label.
pub fn check_equivalence(
    lts: &DirectLts,
    graph: &ReachabilityGraph,
    net: &PetriNet,
    skillset: &Skillset,
) -> Result<(), EquivalenceError> {
    if *net.options() != lts.options {
        return Err(EquivalenceError::OptionMismatch);
    }

    // Decode every marking into a configuration and map it into the LTS.
    let mut to_lts: Vec<usize> = Vec::with_capacity(graph.state_count());
    for s in 0..graph.state_count() {
        let config = decode_marking(net, skillset, graph.state(s)).map_err(|e| {
            EquivalenceError::Mismatch(format!("net state {s} is not decodable: {e}"))
        })?;
        match lts.config_index(&config) {
            Some(id) => to_lts.push(id),
            None => {
                return Err(EquivalenceError::Mismatch(format!(
                    "net state {s} {} has no semantic counterpart",
                    config.format(skillset)
                )))
            }
        }
    }

    if graph.state_count() != lts.config_count() {
        let image: HashSet<usize> = to_lts.iter().copied().collect();
        let missing = (0..lts.config_count()).find(|id| !image.contains(id));
        if let Some(id) = missing {
            return Err(EquivalenceError::Mismatch(format!(
                "semantic state {} is unreachable in the net",
                lts.configs[id].format(skillset)
            )));
        }
        return Err(EquivalenceError::Mismatch(
            "state counts differ but every semantic state is covered; \
             the net marking decoding is not injective"
                .into(),
        ));
    }

    if to_lts[0] != 0 {
        return Err(EquivalenceError::Mismatch(
            "initial states do not correspond".into(),
        ));
    }

    let to_lts = &to_lts;
    let net_edges: HashSet<(usize, &TransitionLabel, usize)> = graph
        .edges()
        .flat_map(|(src, t, dst)| {
            net.transitions()[t]
                .labels
                .iter()
                .map(move |label| (to_lts[src], label, to_lts[dst]))
        })
        .collect();
    let sem_edges: HashSet<(usize, &TransitionLabel, usize)> = lts
        .edges
        .iter()
        .map(|(src, label, dst)| (*src, label, *dst))
        .collect();

    for edge in &net_edges {
        if !sem_edges.contains(edge) {
            return Err(EquivalenceError::Mismatch(format!(
                "net fires {} from {} to {}, but the semantics does not",
                edge.1,
                lts.configs[edge.0].format(skillset),
                lts.configs[edge.2].format(skillset),
            )));
        }
    }
    for edge in lts.edges.iter() {
        if !net_edges.contains(&(edge.0, &edge.1, edge.2)) {
            return Err(EquivalenceError::Mismatch(format!(
                "semantics allows {} from {} to {}, but the net does not",
                edge.1,
                lts.configs[edge.0].format(skillset),
                lts.configs[edge.2].format(skillset),
            )));
        }
    }
    Ok(())
}

/// Read a marking back into a configuration via the place roles. Exactly
/// one state place per resource and one internal place per skill must be
/// marked.
pub fn decode_marking(
    net: &PetriNet,
    skillset: &Skillset,
    marking: &Marking,
) -> Result<Configuration, String> {
    let mut resource_states = Vec::with_capacity(skillset.resources.len());
    let mut skill_phases = vec![None; skillset.skills.len()];

    for resource in &skillset.resources {
        let mut found = None;
        for (id, place) in net.places().iter().enumerate() {
            if let PlaceRole::Resource { resource: r, state } = &place.role {
                if r == &resource.name && marking.is_marked(id) {
                    if found.is_some() {
                        return Err(format!(
                            "resource '{}' has two marked states",
                            resource.name
                        ));
                    }
                    found = resource.state_index(state);
                }
            }
        }
        match found {
            Some(idx) => resource_states.push(idx),
            None => return Err(format!("resource '{}' has no marked state", resource.name)),
        }
    }

    for (id, place) in net.places().iter().enumerate() {
        if !marking.is_marked(id) {
            continue;
        }
        let (skill, phase) = match &place.role {
            PlaceRole::SkillEntry { skill } => (skill, SkillPhase::Idle),
            PlaceRole::SkillRunning { skill } => (skill, SkillPhase::Running),
            PlaceRole::SkillExit { skill, mode } => (skill, SkillPhase::Terminated(mode.clone())),
            PlaceRole::Resource { .. } => continue,
        };
        let idx = skillset
            .skills
            .iter()
            .position(|s| &s.name == skill)
            .ok_or_else(|| format!("place for unknown skill '{skill}'"))?;
        if skill_phases[idx].is_some() {
            return Err(format!("skill '{skill}' has two marked internal places"));
        }
        skill_phases[idx] = Some(phase);
    }

    let skill_phases = skill_phases
        .into_iter()
        .enumerate()
        .map(|(i, phase)| {
            phase.ok_or_else(|| {
                format!(
                    "skill '{}' has no marked internal place",
                    skillset.skills[i].name
                )
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    Ok(Configuration {
        resource_states,
        skill_phases,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::build::build_net;
    use crate::explore::{explore, ExploreOptions};
    use crate::net::NetTransition;
    use crate::parser::parse_skillset;

    const SPOT: &str = include_str!("../../../models/spot.skillset");

    fn spot() -> Skillset {
        parse_skillset(SPOT).unwrap()
    }

    #[test]
    fn initial_spot_successors() {
        let spot = spot();
        let options = BuildOptions::default();
        let config = Configuration::initial(&spot);
        let labels: Vec<TransitionLabel> = successors(&spot, &config, &options)
            .into_iter()
            .map(|(l, _)| l)
            .collect();
        assert_eq!(
            labels,
            vec![
                TransitionLabel::Event {
                    event: "tomanual_fromauto".into()
                },
                TransitionLabel::Event {
                    event: "power_switchon".into()
                },
                TransitionLabel::Start {
                    skill: "init_power".into()
                },
                TransitionLabel::PreconditionFailure {
                    skill: "safe_poweroff".into(),
                    precondition: "ispowered".into()
                },
                TransitionLabel::PreconditionFailure {
                    skill: "go_to".into(),
                    precondition: "ispowered".into()
                },
            ]
        );
    }

    #[test]
    fn broken_invariant_preempts_everything() {
        let spot = spot();
        let options = BuildOptions::default();
        let mut config = Configuration::initial(&spot);
        // go_to running, power on, lease manual: is_auto is violated.
        config.skill_phases[2] = SkillPhase::Running;
        config.resource_states[0] = 1; // power_status = PowerOn
        config.resource_states[1] = 1; // lease_status = ManualMode
        config.resource_states[2] = 1; // control_mode = Busy
        let steps = successors(&spot, &config, &options);
        assert_eq!(steps.len(), 1);
        assert_eq!(
            steps[0].0,
            TransitionLabel::InvariantFailure {
                skill: "go_to".into(),
                invariant: "is_auto".into()
            }
        );
        // The failure has no effects in the unfixed model: control_mode
        // stays Busy.
        assert_eq!(steps[0].1.resource_states[2], 1);
        assert_eq!(
            steps[0].1.skill_phases[2],
            SkillPhase::Terminated(TerminationMode::InvariantFailure("is_auto".into()))
        );
    }

    #[test]
    fn terminated_skills_only_reset() {
        let src = "skillset x { skill s { start success done } }";
        let sk = parse_skillset(src).unwrap();
        let mut config = Configuration::initial(&sk);
        config.skill_phases[0] = SkillPhase::Terminated(TerminationMode::Success("done".into()));
        let steps = successors(&sk, &config, &BuildOptions::default());
        assert_eq!(steps.len(), 1);
        assert!(matches!(steps[0].0, TransitionLabel::Reset { .. }));
        assert_eq!(steps[0].1.skill_phases[0], SkillPhase::Idle);
    }

    #[test]
    fn empty_skillset_has_one_configuration() {
        let sk = parse_skillset("skillset empty { }").unwrap();
        let lts = explore_direct(&sk, &BuildOptions::default(), 1000).unwrap();
        assert_eq!(lts.config_count(), 1);
        assert!(lts.edges().is_empty());
    }

    #[test]
    fn toggle_resource_has_two_configurations() {
        let src = "skillset toggle { resource { r { initial a a -> b b -> a } } \
                    event { flip { guard r == a r -> b } flop { guard r == b r -> a } } }";
        let sk = parse_skillset(src).unwrap();
        let lts = explore_direct(&sk, &BuildOptions::default(), 1000).unwrap();
        assert_eq!(lts.config_count(), 2);
        assert_eq!(lts.edges().len(), 2);
    }

    #[test]
    fn spot_lts_matches_net_graph_size() {
        let spot = spot();
        let options = BuildOptions::default();
        let (net, _) = build_net(&spot, &options).unwrap();
        let graph = explore(&net, &ExploreOptions::default()).unwrap();
        let lts = explore_direct(&spot, &options, 1_000_000).unwrap();
        assert_eq!(lts.config_count(), graph.state_count());
    }

    #[test]
    fn spot_is_equivalent_under_both_option_sets() {
        let spot = spot();
        for options in [
            BuildOptions::default(),
            BuildOptions {
                keep_exit_places: false,
                ..BuildOptions::default()
            },
        ] {
            let (net, _) = build_net(&spot, &options).unwrap();
            let graph = explore(&net, &ExploreOptions::default()).unwrap();
            let lts = explore_direct(&spot, &options, 1_000_000).unwrap();
            check_equivalence(&lts, &graph, &net, &spot)
                .unwrap_or_else(|e| panic!("options {options:?}: {e}"));
        }
    }

    #[test]
    fn deleting_a_reset_is_detected() {
        let spot = spot();
        let options = BuildOptions::default();
        let (net, _) = build_net(&spot, &options).unwrap();
        let victim = net
            .transition_named("t_go_to_reset_interrupt")
            .expect("reset transition exists");
        let transitions: Vec<NetTransition> = net
            .transitions()
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != victim)
            .map(|(_, t)| t.clone())
            .collect();
        let broken = PetriNet::new(
            net.name().to_string(),
            net.places().to_vec(),
            transitions,
            net.initial_marking().clone(),
            options,
        )
        .unwrap();
        let graph = explore(&broken, &ExploreOptions::default()).unwrap();
        let lts = explore_direct(&spot, &options, 1_000_000).unwrap();
        let err = check_equivalence(&lts, &graph, &broken, &spot).unwrap_err();
        match err {
            EquivalenceError::Mismatch(msg) => {
                assert!(msg.contains("reset"), "unexpected mismatch: {msg}")
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn option_mismatch_is_rejected() {
        let spot = spot();
        let with_exits = BuildOptions::default();
        let without_exits = BuildOptions {
            keep_exit_places: false,
            ..BuildOptions::default()
        };
        let (net, _) = build_net(&spot, &without_exits).unwrap();
        let graph = explore(&net, &ExploreOptions::default()).unwrap();
        let lts = explore_direct(&spot, &with_exits, 1_000_000).unwrap();
        assert_eq!(
            check_equivalence(&lts, &graph, &net, &spot),
            Err(EquivalenceError::OptionMismatch)
        );
    }

    #[test]
    fn empty_skillset_is_trivially_equivalent() {
        let sk = parse_skillset("skillset empty { }").unwrap();
        let options = BuildOptions::default();
        let (net, _) = build_net(&sk, &options).unwrap();
        let graph = explore(&net, &ExploreOptions::default()).unwrap();
        let lts = explore_direct(&sk, &options, 1000).unwrap();
        assert_eq!(check_equivalence(&lts, &graph, &net, &sk), Ok(()));
    }
}
