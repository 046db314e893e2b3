use super::state::PhaseState;

/// One velocity-Verlet step under a position-dependent force field.
///
/// `force(x, out)` writes the force at all row-major positions `x` into
/// `out`. The field is evaluated at the start and at the end of the step.
pub fn verlet_step<F>(state: &PhaseState, mut force: F, dt: f64) -> PhaseState
where
    F: FnMut(&[f64], &mut [f64]),
{
    let mut f = vec![0.0; state.positions.len()];
    force(&state.positions, &mut f);
    let mut next = state.clone();
    kick_drift(&mut next, &f, dt);
    force(&next.positions, &mut f);
    kick(&mut next.momenta, &f, 0.5 * dt);
    next.time = state.time + dt;
    next
}

/// Half kick with `f` followed by a full drift.
#[inline]
pub(crate) fn kick_drift(state: &mut PhaseState, f: &[f64], dt: f64) {
    kick(&mut state.momenta, f, 0.5 * dt);
    for (x, p) in state.positions.iter_mut().zip(&state.momenta) {
        *x += dt * p;
    }
}

#[inline]
pub(crate) fn kick(momenta: &mut [f64], f: &[f64], h: f64) {
    for (p, g) in momenta.iter_mut().zip(f) {
        *p += h * g;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn harmonic(x: &[f64], out: &mut [f64]) {
        for (o, v) in out.iter_mut().zip(x) {
            *o = -v;
        }
    }

    #[test]
    fn free_streaming() {
        let s = PhaseState::new(1, vec![0.0], vec![1.0], 0.0).unwrap();
        let n = verlet_step(&s, |_, out| out.fill(0.0), 0.1);
        assert_eq!(n.positions, vec![0.1]);
        assert_eq!(n.momenta, vec![1.0]);
        assert!((n.time - 0.1).abs() < 1e-16);
    }

    #[test]
    fn reversible() {
        let s = PhaseState::new(2, vec![0.3, -1.2], vec![0.7, 0.4], 0.0).unwrap();
        let f = |x: &[f64], out: &mut [f64]| {
            for (o, v) in out.iter_mut().zip(x) {
                *o = -v.sin() - 0.1 * v * v * v;
            }
        };
        let fwd = verlet_step(&s, f, 0.05);
        let back = verlet_step(&fwd, f, -0.05);
        for (a, b) in back.positions.iter().chain(&back.momenta).zip(s.positions.iter().chain(&s.momenta)) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn harmonic_energy_has_no_drift() {
        // the Verlet energy oscillates at O(dt²); drift is measured between
        // averages over whole oscillation windows
        let mut s = PhaseState::new(1, vec![1.0], vec![0.0], 0.0).unwrap();
        let energy = |s: &PhaseState| 0.5 * (s.positions[0].powi(2) + s.momenta[0].powi(2));
        let e0 = energy(&s);
        let window = 3142; // ten periods of the energy oscillation
        let mut first = 0.0;
        let mut last = 0.0;
        let steps = 10_000;
        for k in 0..steps {
            s = verlet_step(&s, harmonic, 0.01);
            if k < window {
                first += energy(&s);
            }
            if k >= steps - window {
                last += energy(&s);
            }
        }
        let drift = (last - first).abs() / window as f64 / e0;
        assert!(drift < 1e-6, "{drift}");
    }
}
