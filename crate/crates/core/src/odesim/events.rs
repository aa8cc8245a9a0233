use super::Trajectory;

/// A sign change of a section function along a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct SectionEvent {
    pub time: f64,
    pub state: Vec<f64>,
    /// `+1` for an upward crossing (negative to nonnegative), `-1` otherwise.
    pub direction: i8,
}

/// All crossings of `section(x) = 0`, refined by bisection on the linear
/// interpolant to a time tolerance of `1e-10` times the trajectory span.
///
/// Values are classified as nonnegative or negative, so a trajectory that
/// starts exactly on the section and moves to the negative side reports an
/// event just after the start. Events closer than `min_separation` to the
/// previously accepted event are dropped.
pub fn detect_crossings<S>(traj: &Trajectory, section: S, min_separation: f64) -> Vec<SectionEvent>
where
    S: Fn(&[f64]) -> f64,
{
    let mut events = Vec::new();
    if traj.len() < 2 {
        return events;
    }
    let span = traj.t_end().unwrap() - traj.t_start().unwrap();
    let tol = 1e-10 * span;
    let mut prev = section(traj.state(0));
    let mut last_accepted: Option<f64> = None;
    let mut buf = vec![0.0; traj.dimension()];

    for i in 1..traj.len() {
        let cur = section(traj.state(i));
        if (prev >= 0.0) != (cur >= 0.0) && prev.is_finite() && cur.is_finite() {
            let direction: i8 = if cur >= 0.0 { 1 } else { -1 };
            let (xa, xb) = (traj.state(i - 1), traj.state(i));
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            let ta = traj.time(i - 1);
            let dt = traj.time(i) - ta;
            let lo_sign = prev >= 0.0;
            while (hi - lo) * dt > tol {
                let mid = 0.5 * (lo + hi);
                lerp(xa, xb, mid, &mut buf);
                if (section(&buf) >= 0.0) == lo_sign {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let w = 0.5 * (lo + hi);
            let time = ta + w * dt;
            if last_accepted.is_none_or(|t| time - t >= min_separation) {
                lerp(xa, xb, w, &mut buf);
                events.push(SectionEvent {
                    time,
                    state: buf.clone(),
                    direction,
                });
                last_accepted = Some(time);
            }
        }
        prev = cur;
    }
    events
}

fn lerp(a: &[f64], b: &[f64], w: f64, out: &mut [f64]) {
    for ((o, x), y) in out.iter_mut().zip(a).zip(b) {
        *o = x + w * (y - x);
    }
}

/// Mean gap between consecutive same-direction crossings, using the final
/// half of the crossings in the better-populated direction (upward on ties).
/// Returns `None` with fewer than two crossings in that direction.
pub fn estimate_period<S>(traj: &Trajectory, section: S, min_separation: f64) -> Option<f64>
where
    S: Fn(&[f64]) -> f64,
{
    let events = detect_crossings(traj, section, min_separation);
    let up: Vec<f64> = events.iter().filter(|e| e.direction > 0).map(|e| e.time).collect();
    let down: Vec<f64> = events.iter().filter(|e| e.direction < 0).map(|e| e.time).collect();
    let times = if down.len() > up.len() { down } else { up };
    if times.len() < 2 {
        return None;
    }
    let keep = times.len().div_ceil(2).max(2);
    let tail = &times[times.len() - keep..];
    let period = (tail[tail.len() - 1] - tail[0]) / (tail.len() - 1) as f64;
    (period > 0.0).then_some(period)
}

/// Default event separation: `1e-3` of the trajectory span.
pub fn default_min_separation(traj: &Trajectory) -> f64 {
    match (traj.t_start(), traj.t_end()) {
        (Some(a), Some(b)) => 1e-3 * (b - a),
        _ => 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_trajectory_has_no_events() {
        let mut tr = Trajectory::new(1);
        for i in 0..10 {
            tr.push(i as f64, &[2.0]);
        }
        assert!(detect_crossings(&tr, |x| x[0], 1e-3).is_empty());
        assert_eq!(estimate_period(&tr, |x| x[0], 1e-3), None);
    }

    #[test]
    fn refines_linear_crossing() {
        let mut tr = Trajectory::new(1);
        tr.push(0.0, &[-1.0]);
        tr.push(1.0, &[3.0]);
        let ev = detect_crossings(&tr, |x| x[0], 1e-3);
        assert_eq!(ev.len(), 1);
        assert!((ev[0].time - 0.25).abs() < 1e-9);
        assert_eq!(ev[0].direction, 1);
    }

    #[test]
    fn min_separation_drops_chatter() {
        let mut tr = Trajectory::new(1);
        let vals = [-1.0, 1.0, -1.0, 1.0, 1.0, 1.0, -1.0];
        for (i, v) in vals.iter().enumerate() {
            tr.push(i as f64 * 0.01, &[*v]);
        }
        let all = detect_crossings(&tr, |x| x[0], 0.0);
        assert_eq!(all.len(), 4);
        let filtered = detect_crossings(&tr, |x| x[0], 0.025);
        assert_eq!(filtered.len(), 2);
    }
}
