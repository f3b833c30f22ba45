//! Guard evaluation and solution enumeration.
//!
//! A solution of a guard assigns one state to every resource the guard
//! mentions such that the formula holds. Resource state spaces are tiny, so
//! solutions are found by exhaustive enumeration over the Cartesian product
//! of the involved resources' states rather than by a SAT solver; the cost
//! is the product of the involved state counts.

use thiserror::Error;

use crate::model::{Guard, Skillset};

/// One state per resource, for the resources a guard involves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    entries: Vec<(String, String)>,
}

impl Assignment {
    pub fn empty() -> Self {
        Assignment {
            entries: Vec::new(),
        }
    }

    pub fn new(entries: Vec<(String, String)>) -> Self {
        Assignment { entries }
    }

    pub fn state_of(&self, resource: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(r, _)| r == resource)
            .map(|(_, s)| s.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(r, s)| (r.as_str(), s.as_str()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// All solutions of a guard, over exactly the involved resources.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolutionSet {
    /// Involved resources in skillset declaration order.
    pub resources: Vec<String>,
    /// Satisfying assignments, each total over `resources`, enumerated in
    /// declaration order of resources and states.
    pub assignments: Vec<Assignment>,
}

impl SolutionSet {
    pub fn is_unsatisfiable(&self) -> bool {
        self.assignments.is_empty()
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum GuardError {
    #[error("assignment does not cover resource '{resource}'")]
    MissingResource { resource: String },
}

/// Resources mentioned by the guard, in order of first appearance.
pub fn involved_resources(guard: &Guard) -> Vec<String> {
    let mut out = Vec::new();
    collect_involved(guard, &mut out);
    out
}

fn collect_involved(guard: &Guard, out: &mut Vec<String>) {
    match guard {
        Guard::True => {}
        Guard::Eq { resource, .. } => {
            if !out.iter().any(|r| r == resource) {
                out.push(resource.clone());
            }
        }
        Guard::Not(inner) => collect_involved(inner, out),
        Guard::And(l, r) | Guard::Or(l, r) => {
            collect_involved(l, out);
            collect_involved(r, out);
        }
    }
}

/// Evaluate `guard` against a state lookup. The lookup must cover every
/// involved resource.
pub fn evaluate_with<F>(guard: &Guard, lookup: &F) -> Result<bool, GuardError>
where
    F: Fn(&str) -> Option<String>,
{
    match guard {
        Guard::True => Ok(true),
        Guard::Eq { resource, state } => match lookup(resource) {
            Some(current) => Ok(current == *state),
            None => Err(GuardError::MissingResource {
                resource: resource.clone(),
            }),
        },
        Guard::Not(inner) => Ok(!evaluate_with(inner, lookup)?),
        Guard::And(l, r) => Ok(evaluate_with(l, lookup)? && evaluate_with(r, lookup)?),
        Guard::Or(l, r) => Ok(evaluate_with(l, lookup)? || evaluate_with(r, lookup)?),
    }
}

/// Evaluate `guard` under `assignment`.
pub fn evaluate(guard: &Guard, assignment: &Assignment) -> Result<bool, GuardError> {
    evaluate_with(guard, &|resource| {
        assignment.state_of(resource).map(str::to_string)
    })
}

/// Enumerate every satisfying assignment of `guard` over the involved
/// resources of `skillset`. A `True` guard has the single empty assignment;
/// an unsatisfiable guard has none. Resources the skillset does not declare
/// contribute an empty state set, making the product empty.
pub fn solutions(guard: &Guard, skillset: &Skillset) -> SolutionSet {
    let involved = involved_resources(guard);
    // Reorder to skillset declaration order for deterministic output.
    let mut resources: Vec<String> = skillset
        .resources
        .iter()
        .filter(|r| involved.contains(&r.name))
        .map(|r| r.name.clone())
        .collect();
    for name in &involved {
        if !resources.iter().any(|r| r == name) {
            resources.push(name.clone());
        }
    }

    let state_sets: Vec<Vec<&str>> = resources
        .iter()
        .map(|name| match skillset.resource(name) {
            Some(r) => r.states.iter().map(String::as_str).collect(),
            None => Vec::new(),
        })
        .collect();

    let mut assignments = Vec::new();
    if state_sets.iter().all(|s| !s.is_empty()) {
        let mut current: Vec<usize> = vec![0; resources.len()];
        'enumerate: loop {
            let candidate = Assignment::new(
                resources
                    .iter()
                    .zip(&state_sets)
                    .zip(&current)
                    .map(|((r, states), &i)| (r.clone(), states[i].to_string()))
                    .collect(),
            );
            if evaluate(guard, &candidate).unwrap_or(false) {
                assignments.push(candidate);
            }
            // Odometer step, last resource varying fastest.
            let mut pos = resources.len();
            loop {
                if pos == 0 {
                    break 'enumerate;
                }
                pos -= 1;
                current[pos] += 1;
                if current[pos] < state_sets[pos].len() {
                    break;
                }
                current[pos] = 0;
            }
        }
    }

    SolutionSet {
        resources,
        assignments,
    }
}
