//! Structural validation of a parsed skillset.
//!
//! Validation never fails; it returns a report of errors and warnings.
//! Downstream stages (lowering, net construction) require a report with no
//! errors.

use std::collections::HashSet;

use crate::model::{EffectSet, Guard, Skillset};

/// Findings of [`validate`]. Errors make the skillset unusable for net
/// construction; warnings flag suspicious but legal constructs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }
}

/// Check every structural invariant of the model: name uniqueness, declared
/// state references in guards and effects, at most one effect per resource,
/// at most one interrupt per skill.
pub fn validate(skillset: &Skillset) -> ValidationReport {
    let mut report = ValidationReport::default();

    check_top_level_names(skillset, &mut report);
    check_resources(skillset, &mut report);

    for event in &skillset.events {
        let ctx = format!("event '{}'", event.name);
        check_guard(skillset, &event.guard, &ctx, &mut report);
        check_effects(skillset, &event.effects, &ctx, &mut report);
        if event.guard.is_true() && event.effects.is_empty() {
            report
                .errors
                .push(format!("{ctx}: has no guard and no effects"));
        }
    }

    for skill in &skillset.skills {
        let ctx = format!("skill '{}'", skill.name);
        let mut component_names = HashSet::new();
        let mut check_component_name = |name: &str, report: &mut ValidationReport| {
            if !component_names.insert(name.to_string()) {
                report
                    .errors
                    .push(format!("{ctx}: duplicate component name '{name}'"));
            }
        };

        for pre in &skill.preconditions {
            check_component_name(&pre.name, &mut report);
            let pctx = format!("{ctx}, precondition '{}'", pre.name);
            check_guard(skillset, &pre.guard, &pctx, &mut report);
            check_effects(skillset, &pre.failure_effects, &pctx, &mut report);
        }
        for inv in &skill.invariants {
            check_component_name(&inv.name, &mut report);
            let ictx = format!("{ctx}, invariant '{}'", inv.name);
            check_guard(skillset, &inv.guard, &ictx, &mut report);
            check_effects(skillset, &inv.failure_effects, &ictx, &mut report);
        }
        check_effects(
            skillset,
            &skill.start_effects,
            &format!("{ctx}, start"),
            &mut report,
        );
        for term in skill.successes.iter().chain(&skill.failures) {
            check_component_name(&term.name, &mut report);
            let tctx = format!("{ctx}, terminator '{}'", term.name);
            check_effects(skillset, &term.effects, &tctx, &mut report);
        }
        if skill.interrupts.len() > 1 {
            report.errors.push(format!("{ctx}: multiple interrupts"));
        }
        for interrupt in &skill.interrupts {
            check_effects(
                skillset,
                interrupt,
                &format!("{ctx}, interrupt"),
                &mut report,
            );
        }

        if skill.successes.is_empty() && skill.failures.is_empty() {
            report.warnings.push(format!(
                "{ctx}: no success or failure terminator; once started it can only \
                 end through an invariant failure or an interrupt"
            ));
        }
    }

    report
}

fn check_top_level_names(skillset: &Skillset, report: &mut ValidationReport) {
    let mut seen = HashSet::new();
    let names = skillset
        .resources
        .iter()
        .map(|r| r.name.as_str())
        .chain(skillset.events.iter().map(|e| e.name.as_str()))
        .chain(skillset.skills.iter().map(|s| s.name.as_str()));
    for name in names {
        if !seen.insert(name) {
            report
                .errors
                .push(format!("duplicate top-level name '{name}'"));
        }
    }
}

fn check_resources(skillset: &Skillset, report: &mut ValidationReport) {
    for resource in &skillset.resources {
        let ctx = format!("resource '{}'", resource.name);
        if resource.states.is_empty() {
            report.errors.push(format!("{ctx}: has no states"));
            continue;
        }
        let mut seen = HashSet::new();
        for state in &resource.states {
            if !seen.insert(state.as_str()) {
                report
                    .errors
                    .push(format!("{ctx}: duplicate state '{state}'"));
            }
        }
        if !resource.has_state(&resource.initial) {
            report.errors.push(format!(
                "{ctx}: initial state '{}' is not declared",
                resource.initial
            ));
        }
        for (from, to) in &resource.transitions {
            for endpoint in [from, to] {
                if !resource.has_state(endpoint) {
                    report.errors.push(format!(
                        "{ctx}: transition endpoint '{endpoint}' is not a declared state"
                    ));
                }
            }
        }
        for state in &resource.states {
            if state == &resource.initial {
                continue;
            }
            let incoming = resource
                .transitions
                .iter()
                .any(|(from, to)| to == state && from != state);
            if !incoming {
                report.warnings.push(format!(
                    "{ctx}: state '{state}' has no incoming transition and is not initial"
                ));
            }
        }
    }
}

fn check_guard(skillset: &Skillset, guard: &Guard, ctx: &str, report: &mut ValidationReport) {
    match guard {
        Guard::True => {}
        Guard::Eq { resource, state } => match skillset.resource(resource) {
            None => report.errors.push(format!(
                "{ctx}: guard references unknown resource '{resource}'"
            )),
            Some(r) => {
                if !r.has_state(state) {
                    report.errors.push(format!(
                        "{ctx}: guard references unknown state '{state}' of resource '{resource}'"
                    ));
                }
            }
        },
        Guard::Not(inner) => check_guard(skillset, inner, ctx, report),
        Guard::And(l, r) | Guard::Or(l, r) => {
            check_guard(skillset, l, ctx, report);
            check_guard(skillset, r, ctx, report);
        }
    }
}

fn check_effects(
    skillset: &Skillset,
    effects: &EffectSet,
    ctx: &str,
    report: &mut ValidationReport,
) {
    let mut seen = HashSet::new();
    for effect in effects.iter() {
        match skillset.resource(&effect.resource) {
            None => report.errors.push(format!(
                "{ctx}: effect targets unknown resource '{}'",
                effect.resource
            )),
            Some(r) => {
                if !r.has_state(&effect.state) {
                    report.errors.push(format!(
                        "{ctx}: effect targets unknown state '{}' of resource '{}'",
                        effect.state, effect.resource
                    ));
                }
            }
        }
        if !seen.insert(effect.resource.as_str()) {
            report.errors.push(format!(
                "{ctx}: more than one effect for resource '{}'",
                effect.resource
            ));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_skillset;

    const SPOT: &str = include_str!("../../../models/spot.skillset");

    #[test]
    fn spot_validates_clean() {
        let sk = parse_skillset(SPOT).unwrap();
        let report = validate(&sk);
        assert!(report.is_valid(), "errors: {:?}", report.errors);
        assert!(
            report.warnings.is_empty(),
            "warnings: {:?}",
            report.warnings
        );
    }

    #[test]
    fn double_interrupt_is_an_error() {
        let src = "skillset x { skill s { start interrupt interrupt success ok } }";
        let sk = parse_skillset(src).unwrap();
        let report = validate(&sk);
        assert!(report
            .errors
            .iter()
            .any(|e| e.contains("multiple interrupts")));
    }

    #[test]
    fn undeclared_effect_state_is_an_error() {
        let src = "skillset x { \
                     resource { power_status { initial PowerOff PowerOff -> PowerOn } } \
                     event { e { power_status -> Half } } }";
        let sk = parse_skillset(src).unwrap();
        let report = validate(&sk);
        assert!(report.errors.iter().any(|e| e.contains("Half")));
    }

    #[test]
    fn duplicate_effect_resource_is_an_error() {
        let src = "skillset x { \
                     resource { r { initial a a -> b } } \
                     event { e { r -> a r -> b } } }";
        let sk = parse_skillset(src).unwrap();
        let report = validate(&sk);
        assert!(report
            .errors
            .iter()
            .any(|e| e.contains("more than one effect")));
    }

    #[test]
    fn guard_on_unknown_resource_is_an_error() {
        let src = "skillset x { event { e { guard ghost == a  } } }";
        let sk = parse_skillset(src).unwrap();
        let report = validate(&sk);
        assert!(report.errors.iter().any(|e| e.contains("ghost")));
    }

    #[test]
    fn pointless_event_is_an_error() {
        let src = "skillset x { event { e { } } }";
        let sk = parse_skillset(src).unwrap();
        let report = validate(&sk);
        assert!(report
            .errors
            .iter()
            .any(|e| e.contains("no guard and no effects")));
    }

    #[test]
    fn terminator_free_skill_warns_only() {
        let src = "skillset x { skill s { start interrupt } }";
        let sk = parse_skillset(src).unwrap();
        let report = validate(&sk);
        assert!(report.is_valid());
        assert_eq!(report.warnings.len(), 1);
    }

    #[test]
    fn unreachable_state_warns() {
        let src = "skillset x { resource { r { initial a a -> b c -> a } } }";
        let sk = parse_skillset(src).unwrap();
        let report = validate(&sk);
        assert!(report.is_valid());
        assert!(report.warnings.iter().any(|w| w.contains("'c'")));
    }

    #[test]
    fn duplicate_top_level_names_error() {
        let src = "skillset x { resource { a { initial s } } event { a { guard a == s } } }";
        let sk = parse_skillset(src).unwrap();
        let report = validate(&sk);
        assert!(report
            .errors
            .iter()
            .any(|e| e.contains("duplicate top-level")));
    }
}
