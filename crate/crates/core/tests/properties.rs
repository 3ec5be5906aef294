//! Generated-case laws; see `laws/mod.rs`.

mod common;
#[allow(dead_code)]
mod laws;

#[test]
fn strictly_positive_implies_positive() {
    laws::strictly_positive_implies_positive();
}

#[test]
fn absent_variables_have_no_flags() {
    laws::absent_variables_have_no_flags();
}

#[test]
fn arrow_domain_flips_polarity() {
    laws::arrow_domain_flips_polarity();
}

#[test]
fn data_constructors_preserve_polarity() {
    laws::data_constructors_preserve_polarity();
}

#[test]
fn unifier_is_sound_and_most_general() {
    laws::unifier_is_sound_and_most_general();
}

#[test]
fn unifier_against_a_known_unifier() {
    laws::unifier_against_a_known_unifier();
}

#[test]
fn decomposition_is_unique_and_refills() {
    laws::decomposition_is_unique_and_refills();
}

#[test]
fn small_step_agrees_with_big_step() {
    laws::small_step_agrees_with_big_step();
}

#[test]
fn pretty_output_reparses() {
    laws::pretty_output_reparses();
}

#[test]
fn alpha_equivalence_is_reflexive_and_sees_renaming() {
    laws::alpha_equivalence_is_reflexive_and_sees_renaming();
}
