//! Lowering of a skillset into its transition catalog.
//!
//! Every event and every way a skill can move between its idle, running and
//! terminated states becomes one [`SkillsetTransition`]: a guard, an effect
//! set and an optional skill state change. The Petri net builder expands
//! these into net transitions; the direct interpreter executes the same
//! catalog symbolically.

use std::fmt;

use crate::model::{EffectSet, Guard, Skill, Skillset};

/// How a skill execution ended.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TerminationMode {
    PreconditionFailure(String),
    InvariantFailure(String),
    Success(String),
    Failure(String),
    Interrupt,
}

impl TerminationMode {
    /// Stable label used in place and transition names.
    pub fn label(&self) -> String {
        match self {
            TerminationMode::PreconditionFailure(name) => format!("pre_fail_{name}"),
            TerminationMode::InvariantFailure(name) => format!("inv_fail_{name}"),
            TerminationMode::Success(name) => format!("success_{name}"),
            TerminationMode::Failure(name) => format!("failure_{name}"),
            TerminationMode::Interrupt => "interrupt".into(),
        }
    }
}

/// All termination modes of a skill, in canonical order: precondition
/// failures, invariant failures, successes, failures, interrupt. This order
/// fixes exit place numbering everywhere.
pub fn termination_modes(skill: &Skill) -> Vec<TerminationMode> {
    let mut modes = Vec::new();
    for pre in &skill.preconditions {
        modes.push(TerminationMode::PreconditionFailure(pre.name.clone()));
    }
    for inv in &skill.invariants {
        modes.push(TerminationMode::InvariantFailure(inv.name.clone()));
    }
    for s in &skill.successes {
        modes.push(TerminationMode::Success(s.name.clone()));
    }
    for f in &skill.failures {
        modes.push(TerminationMode::Failure(f.name.clone()));
    }
    if skill.interrupt().is_some() {
        modes.push(TerminationMode::Interrupt);
    }
    modes
}

/// Identity of a lowered transition, also reused for net reset transitions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TransitionLabel {
    Event {
        event: String,
    },
    Start {
        skill: String,
    },
    PreconditionFailure {
        skill: String,
        precondition: String,
    },
    InvariantFailure {
        skill: String,
        invariant: String,
    },
    Success {
        skill: String,
        success: String,
    },
    Failure {
        skill: String,
        failure: String,
    },
    Interrupt {
        skill: String,
    },
    Reset {
        skill: String,
        mode: TerminationMode,
    },
}

impl TransitionLabel {
    /// Base net-transition name; an index suffix is appended when one
    /// skillset transition expands into several net transitions.
    pub fn base_name(&self) -> String {
        match self {
            TransitionLabel::Event { event } => format!("t_event_{event}"),
            TransitionLabel::Start { skill } => format!("t_start_{skill}"),
            TransitionLabel::PreconditionFailure {
                skill,
                precondition,
            } => format!("t_{skill}_pre_fail_{precondition}"),
            TransitionLabel::InvariantFailure { skill, invariant } => {
                format!("t_{skill}_inv_fail_{invariant}")
            }
            TransitionLabel::Success { skill, success } => format!("t_{skill}_success_{success}"),
            TransitionLabel::Failure { skill, failure } => format!("t_{skill}_failure_{failure}"),
            TransitionLabel::Interrupt { skill } => format!("t_{skill}_interrupt"),
            TransitionLabel::Reset { skill, mode } => format!("t_{skill}_reset_{}", mode.label()),
        }
    }
}

impl fmt::Display for TransitionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransitionLabel::Event { event } => write!(f, "event '{event}'"),
            TransitionLabel::Start { skill } => write!(f, "start of skill '{skill}'"),
            TransitionLabel::PreconditionFailure {
                skill,
                precondition,
            } => write!(f, "skill '{skill}' precondition '{precondition}' failure"),
            TransitionLabel::InvariantFailure { skill, invariant } => {
                write!(f, "skill '{skill}' invariant '{invariant}' failure")
            }
            TransitionLabel::Success { skill, success } => {
                write!(f, "skill '{skill}' success '{success}'")
            }
            TransitionLabel::Failure { skill, failure } => {
                write!(f, "skill '{skill}' failure '{failure}'")
            }
            TransitionLabel::Interrupt { skill } => write!(f, "skill '{skill}' interrupt"),
            TransitionLabel::Reset { skill, mode } => {
                write!(f, "skill '{skill}' reset from '{}'", mode.label())
            }
        }
    }
}

/// Priority class of a transition. Invariant failures preempt everything
/// else whenever they are enabled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PriorityClass {
    Normal,
    InvariantFailure,
}

/// The two internal skill states a state change can connect, plus the
/// per-mode exit states.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SkillPlace {
    Entry,
    Running,
    Exit(TerminationMode),
}

/// Skill state change `(from, to)` attached to a skill transition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateChange {
    pub skill: String,
    pub from: SkillPlace,
    pub to: SkillPlace,
}

/// Guard + effects + optional skill state change: the atomic step of
/// skillset execution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkillsetTransition {
    pub label: TransitionLabel,
    pub guard: Guard,
    pub effects: EffectSet,
    pub state_change: Option<StateChange>,
    pub priority: PriorityClass,
}

/// Lower every event and skill into the transition catalog. Events come
/// first in declaration order, then each skill's transitions: start,
/// precondition failures, invariant failures, successes, failures,
/// interrupt.
pub fn lower_skillset(skillset: &Skillset) -> Vec<SkillsetTransition> {
    let mut out = Vec::new();

    for event in &skillset.events {
        out.push(SkillsetTransition {
            label: TransitionLabel::Event {
                event: event.name.clone(),
            },
            guard: event.guard.clone(),
            effects: event.effects.clone(),
            state_change: None,
            priority: PriorityClass::Normal,
        });
    }

    for skill in &skillset.skills {
        let change = |from: SkillPlace, to: SkillPlace| {
            Some(StateChange {
                skill: skill.name.clone(),
                from,
                to,
            })
        };
        let invariant_conjunction =
            Guard::conjunction(skill.invariants.iter().map(|i| i.guard.clone()));

        out.push(SkillsetTransition {
            label: TransitionLabel::Start {
                skill: skill.name.clone(),
            },
            guard: Guard::conjunction(skill.preconditions.iter().map(|p| p.guard.clone())),
            effects: skill.start_effects.clone(),
            state_change: change(SkillPlace::Entry, SkillPlace::Running),
            priority: PriorityClass::Normal,
        });

        for pre in &skill.preconditions {
            out.push(SkillsetTransition {
                label: TransitionLabel::PreconditionFailure {
                    skill: skill.name.clone(),
                    precondition: pre.name.clone(),
                },
                guard: pre.guard.clone().negate(),
                effects: pre.failure_effects.clone(),
                state_change: change(
                    SkillPlace::Entry,
                    SkillPlace::Exit(TerminationMode::PreconditionFailure(pre.name.clone())),
                ),
                priority: PriorityClass::Normal,
            });
        }

        for inv in &skill.invariants {
            out.push(SkillsetTransition {
                label: TransitionLabel::InvariantFailure {
                    skill: skill.name.clone(),
                    invariant: inv.name.clone(),
                },
                guard: inv.guard.clone().negate(),
                effects: inv.failure_effects.clone(),
                state_change: change(
                    SkillPlace::Running,
                    SkillPlace::Exit(TerminationMode::InvariantFailure(inv.name.clone())),
                ),
                priority: PriorityClass::InvariantFailure,
            });
        }

        for success in &skill.successes {
            out.push(SkillsetTransition {
                label: TransitionLabel::Success {
                    skill: skill.name.clone(),
                    success: success.name.clone(),
                },
                guard: invariant_conjunction.clone(),
                effects: success.effects.clone(),
                state_change: change(
                    SkillPlace::Running,
                    SkillPlace::Exit(TerminationMode::Success(success.name.clone())),
                ),
                priority: PriorityClass::Normal,
            });
        }

        for failure in &skill.failures {
            out.push(SkillsetTransition {
                label: TransitionLabel::Failure {
                    skill: skill.name.clone(),
                    failure: failure.name.clone(),
                },
                guard: invariant_conjunction.clone(),
                effects: failure.effects.clone(),
                state_change: change(
                    SkillPlace::Running,
                    SkillPlace::Exit(TerminationMode::Failure(failure.name.clone())),
                ),
                priority: PriorityClass::Normal,
            });
        }

        if let Some(interrupt) = skill.interrupt() {
            out.push(SkillsetTransition {
                label: TransitionLabel::Interrupt {
                    skill: skill.name.clone(),
                },
                guard: invariant_conjunction.clone(),
                effects: interrupt.clone(),
                state_change: change(
                    SkillPlace::Running,
                    SkillPlace::Exit(TerminationMode::Interrupt),
                ),
                priority: PriorityClass::Normal,
            });
        }
    }

    out
}
