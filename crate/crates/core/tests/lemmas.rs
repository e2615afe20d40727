mod common;

use common::*;

fn assert_clean(c: Check) {
    assert!(c.cases > 0);
    assert!(c.ok(), "{:#?}", c.violations);
}

#[test]
fn ceiling_preserves_class() {
    assert_clean(check_ceiling(120));
}

#[test]
fn unmatched_complement_has_surplus() {
    assert_clean(check_rem(300));
}

#[test]
fn mcmwm_has_winners_and_losers() {
    assert_clean(check_wm(300));
}

#[test]
fn random_removal_keeps_most_value() {
    assert_clean(check_removal_average(200));
}

#[test]
fn random_addition_gains_enough() {
    assert_clean(check_addition_average(200));
}

#[test]
fn xos_split_losses_are_bounded() {
    assert_clean(check_xos_split(200));
}

#[test]
fn small_items_split_twice_as_fine() {
    assert_clean(check_double_split(100));
}

#[test]
fn item_removal_keeps_share() {
    assert_clean(check_item_removal(150));
}

#[test]
fn prefix_stays_below_twice_target() {
    assert_clean(check_prefix(300));
}

#[test]
fn cores_are_minimal() {
    assert_clean(check_core(300));
}
