//! The per-degree normal-form solve against the hand-written systems.

#[path = "support/hand.rs"]
mod hand;

#[test]
fn generic_solve_matches_hand_systems() {
    let n = hand::compare_with_generic(17, 10).unwrap_or_else(|e| panic!("{e}"));
    assert_eq!(n, 4 * 3 * 10);
}
