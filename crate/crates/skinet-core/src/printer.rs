//! Canonical pretty-printer for skillsets.
//!
//! Printing a parsed skillset and reparsing the output yields a
//! structurally equal model. The printer is also what `Display` for
//! [`Skillset`] would be if we wanted one; it lives here to keep the model
//! free of syntax concerns.

use std::fmt::Write;

use crate::model::{EffectSet, NamedGuard, Skillset};

/// Render `skillset` in canonical concrete syntax.
pub fn print_skillset(skillset: &Skillset) -> String {
    let mut out = String::new();
    let w = &mut out;
    let _ = writeln!(w, "skillset {} {{", skillset.name);

    if !skillset.resources.is_empty() {
        let _ = writeln!(w, "  resource {{");
        for r in &skillset.resources {
            let _ = writeln!(w, "    {} {{", r.name);
            let _ = writeln!(w, "      initial {}", r.initial);
            for (from, to) in &r.transitions {
                let _ = writeln!(w, "      {from} -> {to}");
            }
            let _ = writeln!(w, "    }}");
        }
        let _ = writeln!(w, "  }}");
    }

    if !skillset.events.is_empty() {
        let _ = writeln!(w, "  event {{");
        for e in &skillset.events {
            let _ = writeln!(w, "    {} {{", e.name);
            if !e.guard.is_true() {
                let _ = writeln!(w, "      guard {}", e.guard);
            }
            write_effects(w, &e.effects, "      ");
            let _ = writeln!(w, "    }}");
        }
        let _ = writeln!(w, "  }}");
    }

    for s in &skillset.skills {
        let _ = writeln!(w, "  skill {} {{", s.name);
        if !s.preconditions.is_empty() {
            let _ = writeln!(w, "    precondition {{");
            for pre in &s.preconditions {
                write_named_guard(w, pre, "      ");
            }
            let _ = writeln!(w, "    }}");
        }
        if s.start_effects.is_empty() {
            let _ = writeln!(w, "    start");
        } else {
            let _ = write!(w, "    start");
            write_effects_inline(w, &s.start_effects);
        }
        if !s.invariants.is_empty() {
            let _ = writeln!(w, "    invariant {{");
            for inv in &s.invariants {
                write_named_guard(w, inv, "      ");
            }
            let _ = writeln!(w, "    }}");
        }
        for interrupt in &s.interrupts {
            let _ = write!(w, "    interrupt");
            write_effects_inline(w, interrupt);
        }
        for term in &s.successes {
            let _ = write!(w, "    success {}", term.name);
            write_effects_inline(w, &term.effects);
        }
        for term in &s.failures {
            let _ = write!(w, "    failure {}", term.name);
            write_effects_inline(w, &term.effects);
        }
        let _ = writeln!(w, "  }}");
    }

    let _ = writeln!(w, "}}");
    out
}

fn write_named_guard(w: &mut String, named: &NamedGuard, indent: &str) {
    let _ = writeln!(w, "{indent}{} {{", named.name);
    let _ = writeln!(w, "{indent}  guard {}", named.guard);
    if !named.failure_effects.is_empty() {
        let _ = write!(w, "{indent}  effect");
        write_effects_inline(w, &named.failure_effects);
    }
    let _ = writeln!(w, "{indent}}}");
}

fn write_effects(w: &mut String, effects: &EffectSet, indent: &str) {
    for e in effects.iter() {
        let _ = writeln!(w, "{indent}{} -> {}", e.resource, e.state);
    }
}

fn write_effects_inline(w: &mut String, effects: &EffectSet) {
    match effects.effects.len() {
        0 => {
            let _ = writeln!(w);
        }
        1 => {
            let e = &effects.effects[0];
            let _ = writeln!(w, " {} -> {}", e.resource, e.state);
        }
        _ => {
            let _ = write!(w, " {{");
            for e in effects.iter() {
                let _ = write!(w, " {} -> {}", e.resource, e.state);
            }
            let _ = writeln!(w, " }}");
        }
    }
}
