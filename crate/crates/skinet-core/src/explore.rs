//! Exhaustive reachability exploration under the priority semantics.
//!
//! Breadth-first from the initial marking, expanding fireable transitions
//! in ascending id order; state numbering is the BFS discovery order, so
//! two explorations of the same net are identical and parent pointers give
//! shortest, stably tie-broken counterexample paths.

use std::collections::HashMap;

use thiserror::Error;

use crate::net::{FireError, Marking, PetriNet, PlaceId, TransitionId};

pub type StateId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExploreOptions {
    /// Abort when the reachable set would exceed this many states.
    pub state_limit: usize,
    /// Record 1-safety violations and keep exploring instead of aborting.
    /// The violating successor is not added to the graph either way.
    pub record_safety_violations: bool,
}

impl Default for ExploreOptions {
    fn default() -> Self {
        ExploreOptions {
            state_limit: 1_000_000,
            record_safety_violations: false,
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ExploreError {
    #[error("state limit of {limit} states exceeded")]
    StateLimitExceeded { limit: usize },
    #[error(
        "1-safety violated: firing transition {transition} from state {state} \
         puts a second token on place {place}"
    )]
    SafetyViolation {
        state: StateId,
        transition: TransitionId,
        place: PlaceId,
    },
}

/// A 1-safety violation observed while exploring tolerantly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SafetyViolationRecord {
    pub state: StateId,
    pub transition: TransitionId,
    pub place: PlaceId,
}

/// The explored marking graph. State 0 is the initial marking; atomic
/// propositions of a state are its marked places.
#[derive(Debug, Clone, PartialEq)]
pub struct ReachabilityGraph {
    states: Vec<Marking>,
    index: HashMap<Marking, StateId>,
    out_edges: Vec<Vec<(TransitionId, StateId)>>,
    parents: Vec<Option<(StateId, TransitionId)>>,
    deadlocks: Vec<bool>,
    safety_violations: Vec<SafetyViolationRecord>,
}

impl ReachabilityGraph {
    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[Marking] {
        &self.states
    }

    pub fn state(&self, id: StateId) -> &Marking {
        &self.states[id]
    }

    pub fn state_index(&self, marking: &Marking) -> Option<StateId> {
        self.index.get(marking).copied()
    }

    pub fn out_edges(&self, state: StateId) -> &[(TransitionId, StateId)] {
        &self.out_edges[state]
    }

    /// All edges as `(source, transition, target)`, in exploration order.
    pub fn edges(&self) -> impl Iterator<Item = (StateId, TransitionId, StateId)> + '_ {
        self.out_edges
            .iter()
            .enumerate()
            .flat_map(|(src, edges)| edges.iter().map(move |&(t, dst)| (src, t, dst)))
    }

    pub fn edge_count(&self) -> usize {
        self.out_edges.iter().map(Vec::len).sum()
    }

    pub fn is_deadlock(&self, state: StateId) -> bool {
        self.deadlocks[state]
    }

    pub fn deadlock_states(&self) -> Vec<StateId> {
        (0..self.states.len())
            .filter(|&s| self.deadlocks[s])
            .collect()
    }

    pub fn safety_violations(&self) -> &[SafetyViolationRecord] {
        &self.safety_violations
    }
}

/// Explore the reachable markings of `net`.
pub fn explore(
    net: &PetriNet,
    options: &ExploreOptions,
) -> Result<ReachabilityGraph, ExploreError> {
    let mut graph = ReachabilityGraph {
        states: vec![net.initial_marking().clone()],
        index: HashMap::new(),
        out_edges: Vec::new(),
        parents: vec![None],
        deadlocks: Vec::new(),
        safety_violations: Vec::new(),
    };
    graph.index.insert(net.initial_marking().clone(), 0);
    if graph.states.len() > options.state_limit {
        return Err(ExploreError::StateLimitExceeded {
            limit: options.state_limit,
        });
    }

    let mut current = 0;
    while current < graph.states.len() {
        let fireable = net.fireable(&graph.states[current]);
        graph.deadlocks.push(fireable.is_empty());
        let mut edges = Vec::with_capacity(fireable.len());
        for t in fireable {
            match net.fire_unchecked(&graph.states[current], t) {
                Ok(next) => {
                    let target = match graph.index.get(&next) {
                        Some(&id) => id,
                        None => {
                            if graph.states.len() + 1 > options.state_limit {
                                return Err(ExploreError::StateLimitExceeded {
                                    limit: options.state_limit,
                                });
                            }
                            let id = graph.states.len();
                            graph.index.insert(next.clone(), id);
                            graph.states.push(next);
                            graph.parents.push(Some((current, t)));
                            id
                        }
                    };
                    edges.push((t, target));
                }
                Err(FireError::SafetyViolation { transition, place }) => {
                    if options.record_safety_violations {
                        graph.safety_violations.push(SafetyViolationRecord {
                            state: current,
                            transition,
                            place,
                        });
                    } else {
                        return Err(ExploreError::SafetyViolation {
                            state: current,
                            transition,
                            place,
                        });
                    }
                }
                Err(FireError::NotFireable { .. }) => unreachable!("transition was fireable"),
            }
        }
        graph.out_edges.push(edges);
        current += 1;
    }
    Ok(graph)
}

/// A path through the graph: the initial state, then one `(transition,
/// state)` step at a time.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Path {
    pub steps: Vec<PathStep>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathStep {
    pub transition: TransitionId,
    pub state: StateId,
}

impl Path {
    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    /// The state the path ends in (initial state for an empty path).
    pub fn target(&self) -> StateId {
        self.steps.last().map_or(0, |s| s.state)
    }
}

/// Shortest path from the initial state to `target`, following the BFS
/// parent pointers.
pub fn path_to_state(graph: &ReachabilityGraph, target: StateId) -> Path {
    let mut steps = Vec::new();
    let mut cursor = target;
    while let Some((parent, transition)) = graph.parents[cursor] {
        steps.push(PathStep {
            transition,
            state: cursor,
        });
        cursor = parent;
    }
    steps.reverse();
    Path { steps }
}

/// Shortest path (BFS order, transition-id tie-break) from the initial
/// state to the first state satisfying `target`; `None` if no reachable
/// state does.
pub fn path_to<F>(graph: &ReachabilityGraph, target: F) -> Option<Path>
where
    F: Fn(StateId, &Marking) -> bool,
{
    let first = (0..graph.state_count()).find(|&s| target(s, graph.state(s)))?;
    Some(path_to_state(graph, first))
}

/// States from which some path reaches a goal state: the backward fixpoint
/// of the predecessor relation seeded with the goal set. `result[s]` is
/// true iff `EF goal` holds at `s`.
pub fn backward_reachable<F>(graph: &ReachabilityGraph, goal: F) -> Vec<bool>
where
    F: Fn(StateId, &Marking) -> bool,
{
    let n = graph.state_count();
    let mut predecessors: Vec<Vec<StateId>> = vec![Vec::new(); n];
    for (src, _, dst) in graph.edges() {
        predecessors[dst].push(src);
    }

    let mut reaches = vec![false; n];
    let mut worklist: Vec<StateId> = Vec::new();
    for (s, flag) in reaches.iter_mut().enumerate() {
        if goal(s, graph.state(s)) {
            *flag = true;
            worklist.push(s);
        }
    }
    while let Some(s) = worklist.pop() {
        for &p in &predecessors[s] {
            if !reaches[p] {
                reaches[p] = true;
                worklist.push(p);
            }
        }
    }
    reaches
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::build::{build_net, BuildOptions};
    use crate::net::{NetTransition, Place, PlaceRole};
    use crate::parser::parse_skillset;

    const SPOT: &str = include_str!("../../../models/spot.skillset");

    fn toggle_net() -> PetriNet {
        let src = "skillset toggle { resource { r { initial a a -> b b -> a } } \
                    event { flip { guard r == a r -> b } flop { guard r == b r -> a } } }";
        let sk = parse_skillset(src).unwrap();
        build_net(&sk, &BuildOptions::default()).unwrap().0
    }

    #[test]
    fn toggle_has_two_states_and_two_edges() {
        let graph = explore(&toggle_net(), &ExploreOptions::default()).unwrap();
        assert_eq!(graph.state_count(), 2);
        assert_eq!(graph.edge_count(), 2);
        assert!(graph.deadlock_states().is_empty());
    }

    #[test]
    fn empty_net_is_one_deadlocked_state() {
        let sk = parse_skillset("skillset empty { }").unwrap();
        let (net, _) = build_net(&sk, &BuildOptions::default()).unwrap();
        let graph = explore(&net, &ExploreOptions::default()).unwrap();
        assert_eq!(graph.state_count(), 1);
        assert_eq!(graph.edge_count(), 0);
        assert_eq!(graph.deadlock_states(), vec![0]);
    }

    #[test]
    fn spot_explores_without_deadlocks() {
        let sk = parse_skillset(SPOT).unwrap();
        let (net, _) = build_net(&sk, &BuildOptions::default()).unwrap();
        let graph = explore(&net, &ExploreOptions::default()).unwrap();
        assert!(graph.state_count() > 6);
        assert!(graph.deadlock_states().is_empty());
    }

    #[test]
    fn priority_soundness_over_the_whole_graph() {
        use crate::lower::PriorityClass;
        let sk = parse_skillset(SPOT).unwrap();
        let (net, _) = build_net(&sk, &BuildOptions::default()).unwrap();
        let graph = explore(&net, &ExploreOptions::default()).unwrap();
        for (src, t, _) in graph.edges() {
            if net.transitions()[t].priority == PriorityClass::Normal {
                let enabled = net.enabled(graph.state(src));
                assert!(
                    !enabled
                        .iter()
                        .any(|&e| net.transitions()[e].priority == PriorityClass::InvariantFailure),
                    "normal transition fired while an invariant failure was enabled"
                );
            }
        }
    }

    #[test]
    fn exploration_is_reproducible() {
        let sk = parse_skillset(SPOT).unwrap();
        let (net, _) = build_net(&sk, &BuildOptions::default()).unwrap();
        let a = explore(&net, &ExploreOptions::default()).unwrap();
        let b = explore(&net, &ExploreOptions::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn state_limit_is_enforced() {
        let sk = parse_skillset(SPOT).unwrap();
        let (net, _) = build_net(&sk, &BuildOptions::default()).unwrap();
        let result = explore(
            &net,
            &ExploreOptions {
                state_limit: 3,
                record_safety_violations: false,
            },
        );
        assert_eq!(result, Err(ExploreError::StateLimitExceeded { limit: 3 }));
    }

    #[test]
    fn path_to_initial_is_empty() {
        let graph = explore(&toggle_net(), &ExploreOptions::default()).unwrap();
        let path = path_to(&graph, |s, _| s == 0).unwrap();
        assert!(path.is_empty());
        assert_eq!(path.target(), 0);
    }

    #[test]
    fn path_to_unreachable_goal_is_none() {
        let graph = explore(&toggle_net(), &ExploreOptions::default()).unwrap();
        assert_eq!(path_to(&graph, |_, _| false), None);
        // No deadlock in the toggle net either.
        assert_eq!(path_to(&graph, |s, _| graph.is_deadlock(s)), None);
    }

    #[test]
    fn backward_reachable_fixpoint() {
        let graph = explore(&toggle_net(), &ExploreOptions::default()).unwrap();
        // Goal holds at state 1 only; both states reach it.
        let reaches = backward_reachable(&graph, |s, _| s == 1);
        assert_eq!(reaches, vec![true, true]);
        // Unsatisfiable goal reaches nothing.
        let reaches = backward_reachable(&graph, |_, _| false);
        assert_eq!(reaches, vec![false, false]);
        // Goal at the initial state includes the initial state.
        let reaches = backward_reachable(&graph, |s, _| s == 0);
        assert!(reaches[0]);
    }

    #[test]
    fn running_go_to_is_not_reachable_from_the_trapped_region() {
        let sk = parse_skillset(SPOT).unwrap();
        let (net, _) = build_net(&sk, &BuildOptions::default()).unwrap();
        let graph = explore(&net, &ExploreOptions::default()).unwrap();
        let running = net.place_named("i_go_to").unwrap();
        let reaches = backward_reachable(&graph, |_, m| m.is_marked(running));
        let count = reaches.iter().filter(|&&r| r).count();
        // An invariant failure without release effects strands the model:
        // the goal is reachable from the initial state but not from the
        // post-failure region.
        assert!(reaches[0]);
        assert!(count > 0 && count < graph.state_count());
    }

    #[test]
    fn path_to_the_invariant_failure_exit() {
        let sk = parse_skillset(SPOT).unwrap();
        let (net, _) = build_net(&sk, &BuildOptions::default()).unwrap();
        let graph = explore(&net, &ExploreOptions::default()).unwrap();
        let exit = net.place_named("x_go_to_inv_fail_is_auto").unwrap();
        let path = path_to(&graph, |_, m| m.is_marked(exit)).expect("exit place reachable");
        let names: Vec<&str> = path
            .steps
            .iter()
            .map(|s| net.transitions()[s.transition].name.as_str())
            .collect();
        // Shortest witness: power on, start the skill, lose the lease,
        // fail the invariant.
        let pattern = [
            "t_start_go_to",
            "t_event_tomanual_fromauto",
            "t_go_to_inv_fail_is_auto",
        ];
        let mut remaining: &[&str] = &pattern;
        for name in &names {
            if let Some((first, rest)) = remaining.split_first() {
                if name == first {
                    remaining = rest;
                }
            }
        }
        assert!(
            remaining.is_empty(),
            "path {names:?} does not contain the pattern {pattern:?} in order"
        );
    }

    fn unsafe_net() -> PetriNet {
        let place = |name: &str| Place {
            name: name.into(),
            role: PlaceRole::Resource {
                resource: "r".into(),
                state: name.into(),
            },
        };
        let mut initial = Marking::empty(2);
        initial.set(0);
        initial.set(1);
        PetriNet::new(
            "unsafe",
            vec![place("a"), place("b")],
            vec![NetTransition {
                name: "t".into(),
                labels: Vec::new(),
                inputs: vec![0],
                outputs: vec![1],
                priority: crate::lower::PriorityClass::Normal,
            }],
            initial,
            BuildOptions::default(),
        )
        .unwrap()
    }

    #[test]
    fn safety_violation_aborts_strict_exploration() {
        let result = explore(&unsafe_net(), &ExploreOptions::default());
        assert_eq!(
            result,
            Err(ExploreError::SafetyViolation {
                state: 0,
                transition: 0,
                place: 1
            })
        );
    }

    #[test]
    fn safety_violation_recorded_when_tolerated() {
        let graph = explore(
            &unsafe_net(),
            &ExploreOptions {
                state_limit: 1_000_000,
                record_safety_violations: true,
            },
        )
        .unwrap();
        assert_eq!(
            graph.safety_violations(),
            &[SafetyViolationRecord {
                state: 0,
                transition: 0,
                place: 1
            }]
        );
        // The violating successor is not part of the graph.
        assert_eq!(graph.state_count(), 1);
    }
}
