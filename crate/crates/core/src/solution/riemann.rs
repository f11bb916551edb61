use crate::error::{Error, Result};
use crate::grid::Rect;

use super::{Fan, Front, PiecewiseSolution, Policy, Wave};

/// Rankine-Hugoniot speed of a jump for the flux `u²/2`.
pub fn shock_speed(u_l: f64, u_r: f64) -> Result<f64> {
    if u_l == u_r {
        return Err(Error::DegenerateFront(u_l));
    }
    Ok(0.5 * (u_l + u_r))
}

/// Riemann problem with data `u_l | u_r` at `center = (t_c, x_c)`, restricted to
/// `domain`. Jumps are extended over the whole time span of the domain; a rarefaction
/// needs `t_c ≤ domain.t_min`.
pub fn riemann_solution(
    u_l: f64,
    u_r: f64,
    policy: Policy,
    center: (f64, f64),
    domain: Rect,
) -> Result<PiecewiseSolution> {
    if !u_l.is_finite() || !u_r.is_finite() {
        return Err(Error::precondition("riemann_solution", "states must be finite"));
    }
    if u_l == u_r {
        return Ok(PiecewiseSolution::constant(domain, u_l));
    }
    let wave = if u_l < u_r && !policy.keeps_increasing_jumps() {
        if center.0 > domain.t_min {
            return Err(Error::precondition(
                "riemann_solution",
                "a rarefaction centre must not lie after the initial time of the domain",
            ));
        }
        Wave::Fan(Fan { center, t_start: domain.t_min, t_end: domain.t_max, u_l, u_r })
    } else {
        let s = shock_speed(u_l, u_r)?;
        let x0 = center.1 + s * (domain.t_min - center.0);
        Wave::Front(Front::new(domain.t_min, domain.t_max, x0, u_l, u_r)?)
    };
    Ok(PiecewiseSolution { domain, far_left: u_l, waves: vec![wave] })
}

/// Parameters of [`front_tracking`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackingOptions {
    /// Largest state increment of a single jump inside a rarefaction fan.
    pub fan_step: f64,
    /// Complexity guard on the number of collision events.
    pub max_interactions: usize,
}

impl Default for TrackingOptions {
    fn default() -> Self {
        TrackingOptions { fan_step: 0.05, max_interactions: 10_000 }
    }
}

#[derive(Clone, Copy)]
struct Live {
    t0: f64,
    x0: f64,
    speed: f64,
    u_l: f64,
    u_r: f64,
}

impl Live {
    fn x_at(&self, t: f64) -> f64 {
        self.x0 + self.speed * (t - self.t0)
    }
}

fn emit(u_l: f64, u_r: f64, t: f64, x: f64, policy: Policy, fan_step: f64, out: &mut Vec<Live>) {
    if u_l == u_r {
        return;
    }
    if u_l < u_r && !policy.keeps_increasing_jumps() {
        let n = ((u_r - u_l) / fan_step).ceil().max(1.0) as usize;
        let step = (u_r - u_l) / n as f64;
        for k in 0..n {
            let a = u_l + k as f64 * step;
            let b = if k + 1 == n { u_r } else { u_l + (k + 1) as f64 * step };
            out.push(Live { t0: t, x0: x, speed: 0.5 * (a + b), u_l: a, u_r: b });
        }
    } else {
        out.push(Live { t0: t, x0: x, speed: 0.5 * (u_l + u_r), u_l, u_r });
    }
}

/// Front tracking for piecewise-constant initial data on `domain.t_min`: `states` has
/// one more entry than the increasing `breaks`. Rarefactions become fans of jumps no
/// larger than `fan_step`; colliding fronts are merged and the outgoing Riemann
/// problem is solved with the same policy. Simultaneous collisions are processed in
/// ascending `x`.
pub fn front_tracking(
    states: &[f64],
    breaks: &[f64],
    policy: Policy,
    domain: Rect,
    opts: TrackingOptions,
) -> Result<PiecewiseSolution> {
    if states.len() != breaks.len() + 1 {
        return Err(Error::precondition(
            "front_tracking",
            format!("{} states need {} breaks, got {}", states.len(), states.len().saturating_sub(1), breaks.len()),
        ));
    }
    if states.iter().any(|s| !s.is_finite()) || breaks.iter().any(|b| !b.is_finite()) {
        return Err(Error::precondition("front_tracking", "states and breaks must be finite"));
    }
    if breaks.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::precondition("front_tracking", "breaks must be strictly increasing"));
    }
    if !(opts.fan_step > 0.0) {
        return Err(Error::precondition("front_tracking", "fan_step must be positive"));
    }
    let t_start = domain.t_min;
    let horizon = domain.t_max;
    let tol = 1e-10 * domain.scale();

    let mut live: Vec<Live> = Vec::new();
    for (k, &x) in breaks.iter().enumerate() {
        emit(states[k], states[k + 1], t_start, x, policy, opts.fan_step, &mut live);
    }
    let mut done: Vec<Front> = Vec::new();
    let mut now = t_start;
    let mut interactions = 0usize;

    loop {
        // collision time of each neighbouring pair, measured from `now`
        let times: Vec<f64> = live
            .windows(2)
            .map(|w| {
                if w[0].speed > w[1].speed {
                    let gap = w[1].x_at(now) - w[0].x_at(now);
                    now + gap.max(0.0) / (w[0].speed - w[1].speed)
                } else {
                    f64::INFINITY
                }
            })
            .collect();
        let next = times.iter().copied().fold(f64::INFINITY, f64::min);
        if !(next < horizon) {
            break;
        }
        now = next;

        let mut merged: Vec<Live> = Vec::with_capacity(live.len());
        let mut k = 0;
        while k < live.len() {
            let mut m = k;
            while m < times.len() && times[m] <= next + tol {
                m += 1;
            }
            if m == k {
                merged.push(live[k]);
                k += 1;
                continue;
            }
            interactions += 1;
            if interactions > opts.max_interactions {
                return Err(Error::TooManyInteractions(opts.max_interactions));
            }
            for w in &live[k..=m] {
                if now > w.t0 {
                    done.push(Front {
                        t_start: w.t0,
                        t_end: now,
                        x_start: w.x0,
                        speed: w.speed,
                        left_state: w.u_l,
                        right_state: w.u_r,
                    });
                }
            }
            let xs: f64 = live[k..=m].iter().map(|w| w.x_at(now)).sum::<f64>() / (m - k + 1) as f64;
            emit(live[k].u_l, live[m].u_r, now, xs, policy, opts.fan_step, &mut merged);
            k = m + 1;
        }
        live = merged;
    }

    for w in live {
        done.push(Front {
            t_start: w.t0,
            t_end: horizon,
            x_start: w.x0,
            speed: w.speed,
            left_state: w.u_l,
            right_state: w.u_r,
        });
    }
    done.sort_by(|a, b| {
        a.t_start
            .total_cmp(&b.t_start)
            .then(a.x_start.total_cmp(&b.x_start))
            .then(a.speed.total_cmp(&b.speed))
    });
    Ok(PiecewiseSolution {
        domain,
        far_left: states[0],
        waves: done.into_iter().map(Wave::Front).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn speeds() {
        assert_eq!(shock_speed(1.0, -1.0).unwrap(), 0.0);
        assert_eq!(shock_speed(2.0, 0.0).unwrap(), 1.0);
        assert_eq!(shock_speed(0.3, 0.7).unwrap(), 0.5);
        assert!(matches!(shock_speed(0.2, 0.2), Err(Error::DegenerateFront(_))));
    }

    #[test]
    fn decreasing_data_always_shock() {
        for p in [Policy::Entropic, Policy::KeepJump, Policy::AntiEntropic] {
            let s = riemann_solution(1.0, -1.0, p, (0.0, 0.5), Rect::unit()).unwrap();
            let fronts: Vec<_> = s.fronts().collect();
            assert_eq!(fronts.len(), 1);
            assert_eq!(fronts[0].speed, 0.0);
        }
    }

    #[test]
    fn equal_states_give_constant() {
        let s = riemann_solution(0.4, 0.4, Policy::Entropic, (0.0, 0.5), Rect::unit()).unwrap();
        assert!(s.waves.is_empty());
        assert_eq!(s.eval(0.5, 0.1), 0.4);
    }

    #[test]
    fn single_break_stationary() {
        let s = front_tracking(&[1.0, -1.0], &[0.5], Policy::Entropic, Rect::unit(), TrackingOptions::default()).unwrap();
        let f: Vec<_> = s.fronts().collect();
        assert_eq!(f.len(), 1);
        assert_eq!((f[0].t_start, f[0].t_end, f[0].x_start, f[0].speed), (0.0, 1.0, 0.5, 0.0));
    }

    #[test]
    fn three_states_merge_at_analytic_point() {
        let domain = Rect::new(0.0, 2.0, -1.0, 2.0);
        let s = front_tracking(&[1.0, 0.0, -1.0], &[0.0, 1.0], Policy::Entropic, domain, TrackingOptions::default()).unwrap();
        let f: Vec<_> = s.fronts().collect();
        assert_eq!(f.len(), 3);
        let merged = f.iter().find(|f| f.t_start > 0.0).unwrap();
        assert_relative_eq!(merged.t_start, 1.0, epsilon = 1e-14);
        assert_relative_eq!(merged.x_start, 0.5, epsilon = 1e-14);
        assert_eq!((merged.left_state, merged.right_state, merged.speed), (1.0, -1.0, 0.0));
    }

    #[test]
    fn fans_are_made_of_small_jumps() {
        let domain = Rect::new(0.0, 1.0, -2.0, 2.0);
        let opts = TrackingOptions { fan_step: 0.1, ..Default::default() };
        let s = front_tracking(&[-1.0, 1.0], &[0.0], Policy::Entropic, domain, opts).unwrap();
        let f: Vec<_> = s.fronts().collect();
        assert_eq!(f.len(), 20);
        assert!(f.iter().all(|f| f.jump() <= 0.1 + 1e-12 && f.jump() > 0.0));
    }

    #[test]
    fn interaction_guard() {
        let opts = TrackingOptions { fan_step: 0.01, max_interactions: 3 };
        let domain = Rect::new(0.0, 4.0, -1.0, 3.0);
        let r = front_tracking(&[-1.0, 1.0, -1.0], &[0.0, 0.5], Policy::Entropic, domain, opts);
        assert!(matches!(r, Err(Error::TooManyInteractions(3))));
    }

    #[test]
    fn mismatched_lengths_rejected() {
        let r = front_tracking(&[1.0, 0.0], &[0.1, 0.2], Policy::Entropic, Rect::unit(), TrackingOptions::default());
        assert!(r.is_err());
    }
}
