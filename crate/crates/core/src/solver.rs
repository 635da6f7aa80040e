//! Fixed-step classical Runge-Kutta integration over a three-component state.

pub(crate) type State3 = [f64; 3];

/// One classical fourth-order Runge-Kutta step of size `dt`.
///
/// The derivative closure sees intermediate states only; any held inputs are
/// captured by the closure so they stay constant across the four stages.
pub(crate) fn rk4_step<F>(f: F, state: &State3, dt: f64) -> State3
where
    F: Fn(&State3) -> State3,
{
    let k1 = f(state);
    let k2 = f(&offset(state, &k1, 0.5 * dt));
    let k3 = f(&offset(state, &k2, 0.5 * dt));
    let k4 = f(&offset(state, &k3, dt));
    let mut next = *state;
    for i in 0..3 {
        next[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    next
}

fn offset(state: &State3, k: &State3, h: f64) -> State3 {
    [state[0] + h * k[0], state[1] + h * k[1], state[2] + h * k[2]]
}
