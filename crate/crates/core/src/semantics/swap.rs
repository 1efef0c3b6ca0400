use super::{Action, BundleState, Control};

fn swap(v: u64, x: u64, y: u64) -> u64 {
    if v == x {
        y
    } else if v == y {
        x
    } else {
        v
    }
}

/// Exchanges addresses `x` and `y` in every user id and role.
pub fn swap_state(state: &BundleState, x: u64, y: u64) -> BundleState {
    let mut out = state.clone();
    for u in &mut out.users {
        u.id = swap(u.id, x, y);
    }
    if let Control::Live(c) = &mut out.control {
        for r in &mut c.roles {
            *r = swap(*r, x, y);
        }
    }
    out
}

/// Exchanges addresses `x` and `y` among an action's clients.
pub fn swap_action(action: &Action, x: u64, y: u64) -> Action {
    Action {
        clients: action.clients.iter().map(|&c| swap(c, x, y)).collect(),
        ..action.clone()
    }
}
