//! 1-safe Petri net with a two-class transition priority.
//!
//! Markings are fixed-width bit vectors indexed by place id; adding a token
//! to a marked place is a safety violation, never silently absorbed.
//! Invariant-failure transitions preempt all others: whenever one is
//! enabled, only invariant-failure transitions are fireable.

use thiserror::Error;

use crate::build::BuildOptions;
use crate::lower::{PriorityClass, TerminationMode, TransitionLabel};

pub type PlaceId = usize;
pub type TransitionId = usize;

/// What a place stands for in the source skillset.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PlaceRole {
    Resource {
        resource: String,
        state: String,
    },
    SkillEntry {
        skill: String,
    },
    SkillRunning {
        skill: String,
    },
    SkillExit {
        skill: String,
        mode: TerminationMode,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Place {
    pub name: String,
    pub role: PlaceRole,
}

/// A net transition. `labels` carries the skillset transition it was
/// generated from, plus the labels of any structurally identical transitions
/// merged into it; it is empty for hand-built nets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetTransition {
    pub name: String,
    pub labels: Vec<TransitionLabel>,
    /// Input places in canonical order, each listed once.
    pub inputs: Vec<PlaceId>,
    /// Output places in canonical order, each listed once.
    pub outputs: Vec<PlaceId>,
    pub priority: PriorityClass,
}

/// Token distribution over the places of one net.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Marking {
    bits: Vec<u64>,
    places: usize,
}

impl Marking {
    pub fn empty(places: usize) -> Self {
        Marking {
            bits: vec![0; places.div_ceil(64)],
            places,
        }
    }

    pub fn place_count(&self) -> usize {
        self.places
    }

    pub fn is_marked(&self, place: PlaceId) -> bool {
        self.bits[place / 64] & (1 << (place % 64)) != 0
    }

    pub fn set(&mut self, place: PlaceId) {
        self.bits[place / 64] |= 1 << (place % 64);
    }

    pub fn clear(&mut self, place: PlaceId) {
        self.bits[place / 64] &= !(1 << (place % 64));
    }

    pub fn token_count(&self) -> usize {
        self.bits.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn marked_places(&self) -> impl Iterator<Item = PlaceId> + '_ {
        (0..self.places).filter(|&p| self.is_marked(p))
    }

    fn contains_all(&self, other: &Marking) -> bool {
        self.bits.iter().zip(&other.bits).all(|(m, o)| m & o == *o)
    }

    fn remove_all(&mut self, other: &Marking) {
        for (m, o) in self.bits.iter_mut().zip(&other.bits) {
            *m &= !o;
        }
    }

    /// First place marked in both, if any.
    fn first_common(&self, other: &Marking) -> Option<PlaceId> {
        for (i, (m, o)) in self.bits.iter().zip(&other.bits).enumerate() {
            let common = m & o;
            if common != 0 {
                return Some(i * 64 + common.trailing_zeros() as usize);
            }
        }
        None
    }

    fn add_all(&mut self, other: &Marking) {
        for (m, o) in self.bits.iter_mut().zip(&other.bits) {
            *m |= o;
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum NetError {
    #[error("duplicate place name '{0}'")]
    DuplicatePlaceName(String),
    #[error("duplicate transition name '{0}'")]
    DuplicateTransitionName(String),
    #[error("transition '{transition}' references place {place} out of range")]
    ArcOutOfRange { transition: String, place: PlaceId },
    #[error("transition '{transition}' lists place {place} twice on one side")]
    DuplicateArc { transition: String, place: PlaceId },
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum FireError {
    #[error("transition {transition} is not fireable in this marking")]
    NotFireable { transition: TransitionId },
    #[error("firing transition {transition} would put a second token on place {place}")]
    SafetyViolation {
        transition: TransitionId,
        place: PlaceId,
    },
}

/// Immutable net: places, transitions, priority classes and the initial
/// marking.
#[derive(Debug, Clone)]
pub struct PetriNet {
    name: String,
    options: BuildOptions,
    places: Vec<Place>,
    transitions: Vec<NetTransition>,
    initial: Marking,
    input_masks: Vec<Marking>,
    output_masks: Vec<Marking>,
}

impl PetriNet {
    pub fn new(
        name: impl Into<String>,
        places: Vec<Place>,
        transitions: Vec<NetTransition>,
        initial: Marking,
        options: BuildOptions,
    ) -> Result<Self, NetError> {
        let mut seen = std::collections::HashSet::new();
        for p in &places {
            if !seen.insert(p.name.as_str()) {
                return Err(NetError::DuplicatePlaceName(p.name.clone()));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for t in &transitions {
            if !seen.insert(t.name.as_str()) {
                return Err(NetError::DuplicateTransitionName(t.name.clone()));
            }
        }

        let mut input_masks = Vec::with_capacity(transitions.len());
        let mut output_masks = Vec::with_capacity(transitions.len());
        for t in &transitions {
            let mut input = Marking::empty(places.len());
            let mut output = Marking::empty(places.len());
            for (side, mask) in [(&t.inputs, &mut input), (&t.outputs, &mut output)] {
                for &p in side.iter() {
                    if p >= places.len() {
                        return Err(NetError::ArcOutOfRange {
                            transition: t.name.clone(),
                            place: p,
                        });
                    }
                    if mask.is_marked(p) {
                        return Err(NetError::DuplicateArc {
                            transition: t.name.clone(),
                            place: p,
                        });
                    }
                    mask.set(p);
                }
            }
            input_masks.push(input);
            output_masks.push(output);
        }

        Ok(PetriNet {
            name: name.into(),
            options,
            places,
            transitions,
            initial,
            input_masks,
            output_masks,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn options(&self) -> &BuildOptions {
        &self.options
    }

    pub fn places(&self) -> &[Place] {
        &self.places
    }

    pub fn transitions(&self) -> &[NetTransition] {
        &self.transitions
    }

    pub fn initial_marking(&self) -> &Marking {
        &self.initial
    }

    pub fn place_named(&self, name: &str) -> Option<PlaceId> {
        self.places.iter().position(|p| p.name == name)
    }

    pub fn transition_named(&self, name: &str) -> Option<TransitionId> {
        self.transitions.iter().position(|t| t.name == name)
    }

    /// Transitions whose input places are all marked, ascending id.
    pub fn enabled(&self, marking: &Marking) -> Vec<TransitionId> {
        (0..self.transitions.len())
            .filter(|&t| marking.contains_all(&self.input_masks[t]))
            .collect()
    }

    /// Enabled transitions filtered by priority: if any invariant-failure
    /// transition is enabled, only those are fireable.
    pub fn fireable(&self, marking: &Marking) -> Vec<TransitionId> {
        let enabled = self.enabled(marking);
        let any_priority = enabled
            .iter()
            .any(|&t| self.transitions[t].priority == PriorityClass::InvariantFailure);
        if any_priority {
            enabled
                .into_iter()
                .filter(|&t| self.transitions[t].priority == PriorityClass::InvariantFailure)
                .collect()
        } else {
            enabled
        }
    }

    /// Fire `transition`, requiring it to be fireable under the priority
    /// rule. Input places lose their token, output places gain one; a place
    /// on both sides keeps its token.
    pub fn fire(&self, marking: &Marking, transition: TransitionId) -> Result<Marking, FireError> {
        if !self.fireable(marking).contains(&transition) {
            return Err(FireError::NotFireable { transition });
        }
        self.fire_unchecked(marking, transition)
    }

    /// Token move without the fireability check; exploration has already
    /// established it.
    pub(crate) fn fire_unchecked(
        &self,
        marking: &Marking,
        transition: TransitionId,
    ) -> Result<Marking, FireError> {
        let mut next = marking.clone();
        next.remove_all(&self.input_masks[transition]);
        if let Some(place) = next.first_common(&self.output_masks[transition]) {
            return Err(FireError::SafetyViolation { transition, place });
        }
        next.add_all(&self.output_masks[transition]);
        Ok(next)
    }

    /// Resource place groups in first-appearance order: `(resource, places)`.
    pub fn resource_groups(&self) -> Vec<(String, Vec<PlaceId>)> {
        let mut groups: Vec<(String, Vec<PlaceId>)> = Vec::new();
        for (id, place) in self.places.iter().enumerate() {
            if let PlaceRole::Resource { resource, .. } = &place.role {
                match groups.iter_mut().find(|(name, _)| name == resource) {
                    Some((_, ids)) => ids.push(id),
                    None => groups.push((resource.clone(), vec![id])),
                }
            }
        }
        groups
    }

    /// Per-skill internal places in first-appearance order.
    pub fn skill_groups(&self) -> Vec<SkillGroup> {
        let mut groups: Vec<SkillGroup> = Vec::new();
        let group_for = |groups: &mut Vec<SkillGroup>, skill: &str| -> usize {
            match groups.iter().position(|g| g.skill == skill) {
                Some(i) => i,
                None => {
                    groups.push(SkillGroup {
                        skill: skill.to_string(),
                        entry: None,
                        running: None,
                        exits: Vec::new(),
                    });
                    groups.len() - 1
                }
            }
        };
        for (id, place) in self.places.iter().enumerate() {
            match &place.role {
                PlaceRole::SkillEntry { skill } => {
                    let g = group_for(&mut groups, skill);
                    groups[g].entry = Some(id);
                }
                PlaceRole::SkillRunning { skill } => {
                    let g = group_for(&mut groups, skill);
                    groups[g].running = Some(id);
                }
                PlaceRole::SkillExit { skill, mode } => {
                    let g = group_for(&mut groups, skill);
                    groups[g].exits.push((mode.clone(), id));
                }
                PlaceRole::Resource { .. } => {}
            }
        }
        groups
    }

    /// Running place of `skill`, if the net has one.
    pub fn running_place(&self, skill: &str) -> Option<PlaceId> {
        self.places
            .iter()
            .position(|p| matches!(&p.role, PlaceRole::SkillRunning { skill: s } if s == skill))
    }

    /// Render a marking as the set of marked place names.
    pub fn format_marking(&self, marking: &Marking) -> String {
        let names: Vec<&str> = marking
            .marked_places()
            .map(|p| self.places[p].name.as_str())
            .collect();
        format!("{{{}}}", names.join(", "))
    }
}

/// Internal places of one skill.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkillGroup {
    pub skill: String,
    pub entry: Option<PlaceId>,
    pub running: Option<PlaceId>,
    pub exits: Vec<(TerminationMode, PlaceId)>,
}
