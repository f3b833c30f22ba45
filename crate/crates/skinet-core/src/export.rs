//! Textual net export and graph dumps.
//!
//! `export_net` writes the net in the textual format of the Tina toolbox
//! (`net`/`tr`/`pl`/`pr` directives, names brace-quoted), so the generated
//! net can be cross-checked with external Petri net tools. `to_dot` renders
//! the explored reachability graph for visual debugging. Both outputs are
//! byte-stable across runs.

use std::collections::HashMap;
use std::fmt::Write;

use thiserror::Error;

use crate::explore::ReachabilityGraph;
use crate::lower::PriorityClass;
use crate::net::{PetriNet, PlaceRole};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExportOptions {
    /// Name resource places by their bare state name (`PowerOn`) instead of
    /// the qualified `power_status_PowerOn`. Fails if two resources share a
    /// state name.
    pub bare_state_names: bool,
    /// Emit the priority relation as one grouped `pr` line instead of one
    /// line per ordered pair.
    pub grouped_priorities: bool,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ExportError {
    #[error("bare state names collide: '{name}' would stand for two different places")]
    NameCollision { name: String },
}

/// Render `net` in Tina textual format: the `net` line, one `tr` line per
/// transition (arcs in canonical order), one `pl` line per initially marked
/// place, then the priority relation.
pub fn export_net(net: &PetriNet, options: &ExportOptions) -> Result<String, ExportError> {
    let names = place_names(net, options)?;
    let mut out = String::new();
    let _ = writeln!(out, "net {{{}}}", net.name());

    for t in net.transitions() {
        let _ = write!(out, "tr {{{}}}", t.name);
        for &p in &t.inputs {
            let _ = write!(out, " {{{}}}", names[p]);
        }
        let _ = write!(out, " ->");
        for &p in &t.outputs {
            let _ = write!(out, " {{{}}}", names[p]);
        }
        let _ = writeln!(out);
    }

    for p in net.initial_marking().marked_places() {
        let _ = writeln!(out, "pl {{{}}} (1)", names[p]);
    }

    let priority: Vec<&str> = net
        .transitions()
        .iter()
        .filter(|t| t.priority == PriorityClass::InvariantFailure)
        .map(|t| t.name.as_str())
        .collect();
    let normal: Vec<&str> = net
        .transitions()
        .iter()
        .filter(|t| t.priority == PriorityClass::Normal)
        .map(|t| t.name.as_str())
        .collect();
    if !priority.is_empty() && !normal.is_empty() {
        if options.grouped_priorities {
            let _ = write!(out, "pr");
            for name in &priority {
                let _ = write!(out, " {{{name}}}");
            }
            let _ = write!(out, " >");
            for name in &normal {
                let _ = write!(out, " {{{name}}}");
            }
            let _ = writeln!(out);
        } else {
            for high in &priority {
                for low in &normal {
                    let _ = writeln!(out, "pr {{{high}}} > {{{low}}}");
                }
            }
        }
    }

    Ok(out)
}

fn place_names(net: &PetriNet, options: &ExportOptions) -> Result<Vec<String>, ExportError> {
    let names: Vec<String> = net
        .places()
        .iter()
        .map(|p| match (&p.role, options.bare_state_names) {
            (PlaceRole::Resource { state, .. }, true) => state.clone(),
            _ => p.name.clone(),
        })
        .collect();
    let mut seen: HashMap<&str, usize> = HashMap::new();
    for (id, name) in names.iter().enumerate() {
        if seen.insert(name.as_str(), id).is_some() {
            return Err(ExportError::NameCollision { name: name.clone() });
        }
    }
    Ok(names)
}

/// Graphviz dump of the reachability graph: one node per state labeled with
/// its marked places, one edge per firing.
pub fn to_dot(net: &PetriNet, graph: &ReachabilityGraph) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "digraph reachability {{");
    let _ = writeln!(out, "  node [shape=box fontname=\"monospace\"];");
    for s in 0..graph.state_count() {
        let label = net.format_marking(graph.state(s)).replace('"', "'");
        let style = if graph.is_deadlock(s) {
            " style=filled fillcolor=lightcoral"
        } else if s == 0 {
            " peripheries=2"
        } else {
            ""
        };
        let _ = writeln!(out, "  s{s} [label=\"{s}: {label}\"{style}];");
    }
    for (src, t, dst) in graph.edges() {
        let _ = writeln!(
            out,
            "  s{src} -> s{dst} [label=\"{}\"];",
            net.transitions()[t].name
        );
    }
    let _ = writeln!(out, "}}");
    out
}
