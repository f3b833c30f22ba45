//! Translation of a skillset into its Petri net.
//!
//! Each lowered skillset transition expands into one net transition per
//! guard solution. Per resource, three cases apply:
//!
//! * nominal (guarded and affected): the token moves from the solution
//!   state to the effect destination;
//! * unaffected (guarded only): the token is returned to the same state,
//!   the place is both input and output;
//! * unguarded (affected only): the origin is unknown, so one transition is
//!   generated per state that can reach the destination (declared
//!   predecessors plus the always-valid self move), each taking the token
//!   from that origin.
//!
//! Exit places get one reset transition each, moving the token back to the
//! skill's entry place. Invariant-failure transitions outrank everything
//! else. The initial marking puts one token on each resource's initial
//! state place and on each skill's entry place.

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::guard::{involved_resources, solutions};
use crate::lower::{
    lower_skillset, termination_modes, PriorityClass, SkillPlace, SkillsetTransition,
    TerminationMode, TransitionLabel,
};
use crate::model::Skillset;
use crate::net::{Marking, NetError, NetTransition, PetriNet, Place, PlaceId, PlaceRole};

/// Knobs of the translation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuildOptions {
    /// Translate events. Disabling them leaves only skill behavior.
    pub include_events: bool,
    /// Keep per-mode exit places and reset transitions. When disabled,
    /// terminating transitions move the skill token directly back to the
    /// entry place.
    pub keep_exit_places: bool,
    /// Also require guarded-and-affected resources to move along declared
    /// state-machine transitions (the unguarded case always does).
    pub strict_resource_moves: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            include_events: true,
            keep_exit_places: true,
            strict_resource_moves: false,
        }
    }
}

/// Deterministic place numbering for a skillset: resource state places in
/// declaration order, then each skill's entry, running and exit places.
pub struct PlaceTable {
    places: Vec<Place>,
    keep_exit_places: bool,
    resource_index: HashMap<(String, String), PlaceId>,
    entry_index: HashMap<String, PlaceId>,
    running_index: HashMap<String, PlaceId>,
    exit_index: HashMap<(String, TerminationMode), PlaceId>,
}

impl PlaceTable {
    pub fn new(skillset: &Skillset, options: &BuildOptions) -> Self {
        let mut table = PlaceTable {
            places: Vec::new(),
            keep_exit_places: options.keep_exit_places,
            resource_index: HashMap::new(),
            entry_index: HashMap::new(),
            running_index: HashMap::new(),
            exit_index: HashMap::new(),
        };
        for resource in &skillset.resources {
            for state in &resource.states {
                let id = table.places.len();
                table.places.push(Place {
                    name: format!("{}_{}", resource.name, state),
                    role: PlaceRole::Resource {
                        resource: resource.name.clone(),
                        state: state.clone(),
                    },
                });
                table
                    .resource_index
                    .insert((resource.name.clone(), state.clone()), id);
            }
        }
        for skill in &skillset.skills {
            let id = table.places.len();
            table.places.push(Place {
                name: format!("e_{}", skill.name),
                role: PlaceRole::SkillEntry {
                    skill: skill.name.clone(),
                },
            });
            table.entry_index.insert(skill.name.clone(), id);

            let id = table.places.len();
            table.places.push(Place {
                name: format!("i_{}", skill.name),
                role: PlaceRole::SkillRunning {
                    skill: skill.name.clone(),
                },
            });
            table.running_index.insert(skill.name.clone(), id);

            if options.keep_exit_places {
                for mode in termination_modes(skill) {
                    let id = table.places.len();
                    table.places.push(Place {
                        name: format!("x_{}_{}", skill.name, mode.label()),
                        role: PlaceRole::SkillExit {
                            skill: skill.name.clone(),
                            mode: mode.clone(),
                        },
                    });
                    table.exit_index.insert((skill.name.clone(), mode), id);
                }
            }
        }
        table
    }

    pub fn resource_place(&self, resource: &str, state: &str) -> Option<PlaceId> {
        self.resource_index
            .get(&(resource.to_string(), state.to_string()))
            .copied()
    }

    /// Place of a skill state. Without exit places, exits map to the entry
    /// place: termination goes straight back to idle.
    pub fn skill_place(&self, skill: &str, place: &SkillPlace) -> Option<PlaceId> {
        match place {
            SkillPlace::Entry => self.entry_index.get(skill).copied(),
            SkillPlace::Running => self.running_index.get(skill).copied(),
            SkillPlace::Exit(mode) => {
                if self.keep_exit_places {
                    self.exit_index
                        .get(&(skill.to_string(), mode.clone()))
                        .copied()
                } else {
                    self.entry_index.get(skill).copied()
                }
            }
        }
    }

    pub fn places(&self) -> &[Place] {
        &self.places
    }
}

/// One dedicated net transition kept for several structurally identical
/// generated ones.
#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct DedupAlias {
    pub kept: String,
    pub dropped: String,
}

/// Per-origin generation count for the build report.
#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct OriginCount {
    pub origin: String,
    pub transitions: usize,
}

/// What the builder did: sizes, per-origin counts, merged duplicates and
/// warnings (unsatisfiable guards, degenerate transitions).
#[derive(Debug, Clone, Serialize, Default, PartialEq, Eq)]
pub struct BuildReport {
    pub place_count: usize,
    pub transition_count: usize,
    pub reset_count: usize,
    pub per_origin: Vec<OriginCount>,
    pub aliases: Vec<DedupAlias>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum BuildError {
    #[error(transparent)]
    Net(#[from] NetError),
}

/// Expand one skillset transition into net transitions against `table`.
/// Returns one transition per (guard solution x unguarded-origin choice)
/// surviving strict-move pruning; an unsatisfiable guard yields none.
pub fn expand_transition(
    tau: &SkillsetTransition,
    skillset: &Skillset,
    options: &BuildOptions,
    table: &PlaceTable,
) -> Vec<NetTransition> {
    let sols = solutions(&tau.guard, skillset);
    let guard_order = involved_resources(&tau.guard);

    // Unguarded affected resources in effect declaration order, with their
    // candidate origin states.
    let mut unguarded: Vec<(&str, Vec<&str>)> = Vec::new();
    for effect in tau.effects.iter() {
        if guard_order.contains(&effect.resource) {
            continue;
        }
        match skillset.resource(&effect.resource) {
            Some(resource) => {
                unguarded.push((
                    effect.resource.as_str(),
                    resource.predecessors(&effect.state),
                ));
            }
            None => return Vec::new(),
        }
    }

    let mut arcs: Vec<(Vec<PlaceId>, Vec<PlaceId>)> = Vec::new();
    for assignment in &sols.assignments {
        let mut origin_choice = vec![0usize; unguarded.len()];
        'choices: loop {
            let keep = !options.strict_resource_moves
                || tau.effects.iter().all(|effect| {
                    match assignment.state_of(&effect.resource) {
                        Some(origin) => skillset
                            .resource(&effect.resource)
                            .is_some_and(|r| r.allows_move(origin, &effect.state)),
                        None => true, // unguarded: origins are valid moves already
                    }
                });
            if keep {
                let mut inputs = Vec::new();
                let mut outputs = Vec::new();
                for resource in &guard_order {
                    let state = assignment.state_of(resource).expect("solution is total");
                    let place = match table.resource_place(resource, state) {
                        Some(p) => p,
                        None => break 'choices,
                    };
                    inputs.push(place);
                    if tau.effects.destination(resource).is_none() {
                        outputs.push(place); // unaffected: token returned
                    }
                }
                for ((resource, origins), &choice) in unguarded.iter().zip(&origin_choice) {
                    match table.resource_place(resource, origins[choice]) {
                        Some(p) => inputs.push(p),
                        None => break 'choices,
                    }
                }
                for effect in tau.effects.iter() {
                    match table.resource_place(&effect.resource, &effect.state) {
                        Some(p) => outputs.push(p),
                        None => break 'choices,
                    }
                }
                if let Some(change) = &tau.state_change {
                    match (
                        table.skill_place(&change.skill, &change.from),
                        table.skill_place(&change.skill, &change.to),
                    ) {
                        (Some(from), Some(to)) => {
                            inputs.push(from);
                            outputs.push(to);
                        }
                        _ => break 'choices,
                    }
                }
                arcs.push((inputs, outputs));
            }

            // Odometer over unguarded origin choices, last varying fastest.
            let mut pos = unguarded.len();
            loop {
                if pos == 0 {
                    break 'choices;
                }
                pos -= 1;
                origin_choice[pos] += 1;
                if origin_choice[pos] < unguarded[pos].1.len() {
                    break;
                }
                origin_choice[pos] = 0;
            }
        }
    }

    let base = tau.label.base_name();
    let single = arcs.len() == 1;
    arcs.into_iter()
        .enumerate()
        .map(|(idx, (inputs, outputs))| NetTransition {
            name: if single {
                base.clone()
            } else {
                format!("{base}_{idx}")
            },
            labels: vec![tau.label.clone()],
            inputs,
            outputs,
            priority: tau.priority,
        })
        .collect()
}

/// Build the full net: expanded skillset transitions, reset transitions and
/// the initial marking. Structurally identical transitions are merged, the
/// first name kept and the merge recorded in the report.
pub fn build_net(
    skillset: &Skillset,
    options: &BuildOptions,
) -> Result<(PetriNet, BuildReport), BuildError> {
    let table = PlaceTable::new(skillset, options);
    let mut report = BuildReport {
        place_count: table.places().len(),
        ..BuildReport::default()
    };

    let mut transitions: Vec<NetTransition> = Vec::new();
    let mut by_shape: HashMap<(Vec<PlaceId>, Vec<PlaceId>, PriorityClass), usize> = HashMap::new();

    let mut push_deduped =
        |t: NetTransition, transitions: &mut Vec<NetTransition>, report: &mut BuildReport| {
            let mut key_inputs = t.inputs.clone();
            let mut key_outputs = t.outputs.clone();
            key_inputs.sort_unstable();
            key_outputs.sort_unstable();
            match by_shape.entry((key_inputs, key_outputs, t.priority)) {
                std::collections::hash_map::Entry::Occupied(slot) => {
                    let kept = &mut transitions[*slot.get()];
                    report.aliases.push(DedupAlias {
                        kept: kept.name.clone(),
                        dropped: t.name,
                    });
                    kept.labels.extend(t.labels);
                }
                std::collections::hash_map::Entry::Vacant(slot) => {
                    slot.insert(transitions.len());
                    transitions.push(t);
                }
            }
        };

    for tau in lower_skillset(skillset) {
        if !options.include_events && matches!(tau.label, TransitionLabel::Event { .. }) {
            continue;
        }
        let expanded = expand_transition(&tau, skillset, options, &table);
        report.per_origin.push(OriginCount {
            origin: tau.label.to_string(),
            transitions: expanded.len(),
        });
        if expanded.is_empty() {
            let sols = solutions(&tau.guard, skillset);
            if sols.is_unsatisfiable() {
                report.warnings.push(format!(
                    "{}: guard is unsatisfiable, no transition generated",
                    tau.label
                ));
            } else {
                report.warnings.push(format!(
                    "{}: every expansion was pruned by strict resource moves",
                    tau.label
                ));
            }
        }
        for t in expanded {
            if t.inputs.is_empty() && t.outputs.is_empty() {
                report.warnings.push(format!(
                    "{}: degenerate transition '{}' has no arcs",
                    tau.label, t.name
                ));
            }
            push_deduped(t, &mut transitions, &mut report);
        }
    }

    if options.keep_exit_places {
        for skill in &skillset.skills {
            let entry = table
                .skill_place(&skill.name, &SkillPlace::Entry)
                .expect("entry place exists");
            for mode in termination_modes(skill) {
                let exit = table
                    .skill_place(&skill.name, &SkillPlace::Exit(mode.clone()))
                    .expect("exit place exists");
                report.reset_count += 1;
                push_deduped(
                    NetTransition {
                        name: format!("t_{}_reset_{}", skill.name, mode.label()),
                        labels: vec![TransitionLabel::Reset {
                            skill: skill.name.clone(),
                            mode,
                        }],
                        inputs: vec![exit],
                        outputs: vec![entry],
                        priority: PriorityClass::Normal,
                    },
                    &mut transitions,
                    &mut report,
                );
            }
        }
    }

    let mut initial = Marking::empty(table.places().len());
    for resource in &skillset.resources {
        if let Some(p) = table.resource_place(&resource.name, &resource.initial) {
            initial.set(p);
        }
    }
    for skill in &skillset.skills {
        if let Some(p) = table.skill_place(&skill.name, &SkillPlace::Entry) {
            initial.set(p);
        }
    }

    report.transition_count = transitions.len();
    let net = PetriNet::new(
        skillset.name.clone(),
        table.places,
        transitions,
        initial,
        *options,
    )?;
    Ok((net, report))
}
