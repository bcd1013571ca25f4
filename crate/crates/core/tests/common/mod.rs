#![allow(dead_code)]

use lawmix_core::env::{initial_state, transition, Action};
use lawmix_core::inference::Transition;
use lawmix_core::state::WorldState;

/// State after `actions` from a generated world.
pub fn walk(seed: u64, size: i32, actions: &[usize]) -> Vec<Transition> {
    let mut s = initial_state(seed, (size, size)).unwrap();
    let mut out = Vec::new();
    for &i in actions {
        let a = Action::ALL[i % Action::ALL.len()];
        let next = transition(&s, a);
        out.push(Transition {
            state: s,
            action: a,
            next: next.clone(),
        });
        s = next;
    }
    out
}

pub fn last_state(seed: u64, size: i32, actions: &[usize]) -> WorldState {
    walk(seed, size, actions)
        .pop()
        .map(|t| t.next)
        .unwrap_or_else(|| initial_state(seed, (size, size)).unwrap())
}
