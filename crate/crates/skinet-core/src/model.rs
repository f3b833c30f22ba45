//! Skillset domain model: resources, guards, effects, events and skills.
//!
//! All types are plain immutable values produced by the parser (or built
//! directly in code) and checked by [`crate::validate`]. Name references are
//! kept as strings so that an invalid specification can still be represented
//! and reported on.

use std::fmt;

/// A resource is a small state machine: a set of named states, an initial
/// state and a set of declared transitions between states. The self
/// transition `(s, s)` is implicitly valid for every state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Resource {
    pub name: String,
    /// Declared states, in declaration order.
    pub states: Vec<String>,
    /// Name of the initial state.
    pub initial: String,
    /// Declared transitions as `(from, to)` state names, in declaration order.
    pub transitions: Vec<(String, String)>,
}

impl Resource {
    pub fn state_index(&self, state: &str) -> Option<usize> {
        self.states.iter().position(|s| s == state)
    }

    pub fn has_state(&self, state: &str) -> bool {
        self.state_index(state).is_some()
    }

    /// Whether `from -> to` is a valid move of the state machine. Self moves
    /// are always valid, declared or not.
    pub fn allows_move(&self, from: &str, to: &str) -> bool {
        from == to || self.transitions.iter().any(|(f, t)| f == from && t == to)
    }

    /// States from which `to` can be reached in one declared move, in
    /// declaration order of the transitions, with the self state appended
    /// (or kept in place if explicitly declared).
    pub fn predecessors<'a>(&'a self, to: &'a str) -> Vec<&'a str> {
        let mut preds: Vec<&str> = Vec::new();
        for (f, t) in &self.transitions {
            if t == to && !preds.contains(&f.as_str()) {
                preds.push(f);
            }
        }
        if !preds.contains(&to) {
            preds.push(to);
        }
        preds
    }
}

/// Boolean formula over resource-state atoms. `True` is the absent-guard
/// case; `r != s` parses as `Not(Eq)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Guard {
    True,
    /// Leaf `resource == state`.
    Eq {
        resource: String,
        state: String,
    },
    Not(Box<Guard>),
    And(Box<Guard>, Box<Guard>),
    Or(Box<Guard>, Box<Guard>),
}

impl Guard {
    pub fn eq(resource: impl Into<String>, state: impl Into<String>) -> Self {
        Guard::Eq {
            resource: resource.into(),
            state: state.into(),
        }
    }

    pub fn and(self, other: Guard) -> Self {
        Guard::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: Guard) -> Self {
        Guard::Or(Box::new(self), Box::new(other))
    }

    pub fn negate(self) -> Self {
        Guard::Not(Box::new(self))
    }

    pub fn is_true(&self) -> bool {
        matches!(self, Guard::True)
    }

    /// Left-associative conjunction of `guards`; `True` when empty, the
    /// guard itself when singleton.
    pub fn conjunction<I: IntoIterator<Item = Guard>>(guards: I) -> Guard {
        let mut iter = guards.into_iter();
        match iter.next() {
            None => Guard::True,
            Some(first) => iter.fold(first, |acc, g| acc.and(g)),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Guard::Or(..) => 0,
            Guard::And(..) => 1,
            Guard::Not(..) => 2,
            Guard::True | Guard::Eq { .. } => 3,
        }
    }

    fn fmt_child(&self, child: &Guard, strict: bool, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let needs_parens = if strict {
            child.precedence() <= self.precedence()
        } else {
            child.precedence() < self.precedence()
        };
        if needs_parens {
            write!(f, "({child})")
        } else {
            write!(f, "{child}")
        }
    }
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Guard::True => write!(f, "true"),
            Guard::Eq { resource, state } => write!(f, "{resource} == {state}"),
            Guard::Not(inner) => match inner.as_ref() {
                Guard::Eq { resource, state } => write!(f, "{resource} != {state}"),
                other => write!(f, "not ({other})"),
            },
            Guard::And(l, r) => {
                self.fmt_child(l, false, f)?;
                write!(f, " and ")?;
                self.fmt_child(r, true, f)
            }
            Guard::Or(l, r) => {
                self.fmt_child(l, false, f)?;
                write!(f, " or ")?;
                self.fmt_child(r, true, f)
            }
        }
    }
}

/// A single effect: move `resource` to state `state`. Origin is not part of
/// an effect.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Effect {
    pub resource: String,
    pub state: String,
}

/// An ordered collection of effects. The model allows duplicates per
/// resource so the validator can report them; a validated set holds at most
/// one effect per resource.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EffectSet {
    pub effects: Vec<Effect>,
}

impl EffectSet {
    pub fn new(effects: Vec<Effect>) -> Self {
        EffectSet { effects }
    }

    pub fn single(resource: impl Into<String>, state: impl Into<String>) -> Self {
        EffectSet {
            effects: vec![Effect {
                resource: resource.into(),
                state: state.into(),
            }],
        }
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn destination(&self, resource: &str) -> Option<&str> {
        self.effects
            .iter()
            .find(|e| e.resource == resource)
            .map(|e| e.state.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = &Effect> {
        self.effects.iter()
    }
}

/// External action on the resources: a guarded effect set with no skill
/// state change.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub name: String,
    pub guard: Guard,
    pub effects: EffectSet,
}

/// A named guard inside a skill (precondition or invariant) with the
/// effects applied when it fails.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedGuard {
    pub name: String,
    pub guard: Guard,
    pub failure_effects: EffectSet,
}

/// A named success or failure terminator of a skill.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Terminator {
    pub name: String,
    pub effects: EffectSet,
}

/// An elementary action of the system, with the guard/effect machinery that
/// governs its start, execution and termination.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Skill {
    pub name: String,
    pub preconditions: Vec<NamedGuard>,
    pub start_effects: EffectSet,
    pub invariants: Vec<NamedGuard>,
    pub successes: Vec<Terminator>,
    pub failures: Vec<Terminator>,
    /// Parsed interrupt clauses. At most one is allowed; extras are
    /// validation errors. [`Skill::interrupt`] exposes the first.
    pub interrupts: Vec<EffectSet>,
}

impl Skill {
    pub fn interrupt(&self) -> Option<&EffectSet> {
        self.interrupts.first()
    }
}

/// A full specification: resources, events and skills.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Skillset {
    pub name: String,
    pub resources: Vec<Resource>,
    pub events: Vec<Event>,
    pub skills: Vec<Skill>,
}

impl Skillset {
    pub fn resource(&self, name: &str) -> Option<&Resource> {
        self.resources.iter().find(|r| r.name == name)
    }

    pub fn skill(&self, name: &str) -> Option<&Skill> {
        self.skills.iter().find(|s| s.name == name)
    }

    pub fn event(&self, name: &str) -> Option<&Event> {
        self.events.iter().find(|e| e.name == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn predecessors_include_self_last() {
        let r = Resource {
            name: "control_mode".into(),
            states: vec!["Idle".into(), "Busy".into()],
            initial: "Idle".into(),
            transitions: vec![
                ("Idle".into(), "Busy".into()),
                ("Busy".into(), "Idle".into()),
            ],
        };
        assert_eq!(r.predecessors("Idle"), vec!["Busy", "Idle"]);
        assert_eq!(r.predecessors("Busy"), vec!["Idle", "Busy"]);
    }

    #[test]
    fn predecessors_keep_declared_self_position() {
        let r = Resource {
            name: "r".into(),
            states: vec!["a".into(), "b".into()],
            initial: "a".into(),
            transitions: vec![("a".into(), "a".into()), ("b".into(), "a".into())],
        };
        assert_eq!(r.predecessors("a"), vec!["a", "b"]);
    }

    #[test]
    fn self_moves_always_allowed() {
        let r = Resource {
            name: "r".into(),
            states: vec!["a".into(), "b".into()],
            initial: "a".into(),
            transitions: vec![],
        };
        assert!(r.allows_move("a", "a"));
        assert!(!r.allows_move("a", "b"));
    }

    #[test]
    fn guard_display_parenthesizes_by_precedence() {
        let g = Guard::eq("a", "x")
            .or(Guard::eq("b", "y"))
            .and(Guard::eq("c", "z"));
        assert_eq!(g.to_string(), "(a == x or b == y) and c == z");
        let n = Guard::eq("a", "x").negate();
        assert_eq!(n.to_string(), "a != x");
        let n2 = Guard::eq("a", "x").and(Guard::eq("b", "y")).negate();
        assert_eq!(n2.to_string(), "not (a == x and b == y)");
    }

    #[test]
    fn empty_conjunction_is_true() {
        assert_eq!(Guard::conjunction([]), Guard::True);
        let single = Guard::eq("r", "s");
        assert_eq!(Guard::conjunction([single.clone()]), single);
    }
}
