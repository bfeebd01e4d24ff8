//! Fluid-limit differential equations for the greedy processes.
//!
//! Scaled by `1/n`, the greedy run on a random d-regular graph tracks a
//! deterministic trajectory: `y_i(x)` is the fraction of dominated vertices
//! with `i` undominated neighbours after `x·n` steps and `u(x)` the
//! undominated fraction. The trajectory splits into phases; in phase `k`
//! types up to `d-k-1` are consumed as fast as they appear while type `d-k`
//! carries the bulk of the processing. The phase ends when its top type's
//! share of the processing mix reaches zero. The last phase processes type
//! 1 only and ends when the reservoir empties, at `x_end`; the expected
//! forcing-set fraction of the plain greedy is `1 - x_end`.

mod rates;
mod rk;
mod smart;
mod tau;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use rates::rate_f;
pub use smart::{run_smart_d3, smart_rate_f};
pub use tau::solve_tau;

use rates::arc_probability;
use rk::{dp_step, error_ratio};

/// Tolerances and step limits for the phase integrator.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SolverConfig {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_max: f64,
    /// Width to which an event crossing is localized in x.
    pub event_xtol: f64,
    /// The reservoir variable is integrated down to this floor; the exact
    /// linear remainder is appended analytically.
    pub u_floor: f64,
    pub max_steps: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            rtol: 1e-10,
            atol: 1e-12,
            h_init: 1e-6,
            h_max: 5e-4,
            event_xtol: 1e-10,
            u_floor: 1e-6,
            max_steps: 4_000_000,
        }
    }
}

/// Accumulating variables this far below zero abort the run: the phase
/// ordering no longer describes the trajectory.
const BACKWARDS_TOL: f64 = 1e-8;

/// Mixing components this far below zero at an accepted state mean the
/// assumed phase structure is wrong. (Trial evaluations just past a phase
/// boundary dip mildly negative and are fine.)
const TAU_BACKWARDS_TOL: f64 = 0.05;

/// How a phase integration ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndEvent {
    /// The top type's mixing share reached zero (interior phase boundary).
    TauTopZero,
    /// The reservoir emptied; the process is complete.
    Exhausted,
}

#[derive(Clone, Debug, Serialize)]
pub struct PhaseSample {
    pub x: f64,
    pub y: Vec<f64>,
    pub u: f64,
    pub tau: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PhaseTrajectory {
    /// Phase number, 1-based.
    pub index: usize,
    /// Largest type processed in this phase.
    pub top_type: usize,
    pub x_start: f64,
    pub x_end: f64,
    pub end: EndEvent,
    pub samples: Vec<PhaseSample>,
}

/// Result of integrating a single phase.
#[derive(Clone, Debug)]
pub struct PhaseOutcome {
    pub trajectory: PhaseTrajectory,
    pub y_end: Vec<f64>,
    pub u_end: f64,
    pub x_end: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgoKind {
    Plain,
    Smart,
}

/// Full solution: phase trajectories, boundaries, and the resulting bound
/// on the forcing-set fraction.
#[derive(Clone, Debug, Serialize)]
pub struct PhasePortrait {
    pub d: usize,
    pub algo: AlgoKind,
    pub phases: Vec<PhaseTrajectory>,
    /// `x_1..x_{d-1}` for the plain system (the last entry is `x_end`).
    pub phase_boundaries: Vec<f64>,
    pub x_end: f64,
    pub upper_bound: f64,
    /// State at `x_end`: `y` for the plain system, the six class cells for
    /// the smart one.
    pub final_y: Vec<f64>,
    pub config: SolverConfig,
}

impl PhasePortrait {
    /// Compact JSON summary (no trajectory grids).
    pub fn summary_json(&self) -> String {
        let v = serde_json::json!({
            "d": self.d,
            "algo": self.algo,
            "phase_boundaries": self.phase_boundaries,
            "x_end": self.x_end,
            "upper_bound": self.upper_bound,
            "config": self.config,
        });
        serde_json::to_string_pretty(&v).expect("static shape")
    }

    /// CSV of one phase grid: `x,y...,u,tau...` with one tau column per
    /// processed type of that phase.
    pub fn phase_csv(&self, phase: usize) -> Result<String> {
        let traj = self
            .phases
            .get(phase)
            .ok_or_else(|| Error::invalid(format!("no phase {phase}")))?;
        let mut head = String::from("x");
        match self.algo {
            AlgoKind::Plain => {
                for i in 0..self.d {
                    head.push_str(&format!(",y{i}"));
                }
            }
            AlgoKind::Smart => {
                for k in 1..=2 {
                    for i in 0..3 {
                        head.push_str(&format!(",y{i}_{k}"));
                    }
                }
            }
        }
        head.push_str(",u");
        let tau_cols = traj.samples.first().map_or(0, |s| s.tau.len());
        match self.algo {
            AlgoKind::Plain => {
                for j in 1..=tau_cols {
                    head.push_str(&format!(",tau{j}"));
                }
            }
            AlgoKind::Smart => {
                for j in 1..=tau_cols / 2 {
                    for k in 1..=2 {
                        head.push_str(&format!(",tau{j}_{k}"));
                    }
                }
            }
        }
        head.push('\n');
        let mut out = head;
        for s in &traj.samples {
            out.push_str(&format!("{:.9}", s.x));
            for v in &s.y {
                out.push_str(&format!(",{v:.9}"));
            }
            out.push_str(&format!(",{:.9}", s.u));
            for t in &s.tau {
                out.push_str(&format!(",{:.9}", t.max(0.0)));
            }
            out.push('\n');
        }
        Ok(out)
    }

    /// Linear interpolation of `(y, u)` at `x`, clamped to the solved range.
    pub fn eval(&self, x: f64) -> (Vec<f64>, f64) {
        let traj = self
            .phases
            .iter()
            .find(|p| x <= p.x_end)
            .unwrap_or_else(|| self.phases.last().expect("portrait has phases"));
        let samples = &traj.samples;
        let pos = samples.partition_point(|s| s.x < x);
        if pos == 0 {
            let s = &samples[0];
            return (s.y.clone(), s.u);
        }
        if pos == samples.len() {
            let s = samples.last().unwrap();
            return (s.y.clone(), s.u);
        }
        let (a, b) = (&samples[pos - 1], &samples[pos]);
        let w = if b.x > a.x { (x - a.x) / (b.x - a.x) } else { 0.0 };
        let y = a
            .y
            .iter()
            .zip(&b.y)
            .map(|(&ya, &yb)| ya + w * (yb - ya))
            .collect();
        (y, a.u + w * (b.u - a.u))
    }
}

/// Checks that a scaled state is usable: positive reservoir and an arc
/// probability inside [0, 1] up to numerical slack.
fn validate_scaled_state(d: usize, y: &[f64], u: f64) -> Result<()> {
    if y.len() != d {
        return Err(Error::invalid(format!(
            "state has {} type entries, expected {d}",
            y.len()
        )));
    }
    if u <= 0.0 {
        return Err(Error::invalid(format!("reservoir fraction u={u} not positive")));
    }
    let p = arc_probability(d, y, u);
    if !(-1e-3..=1.0 + 1e-3).contains(&p) {
        return Err(Error::numerical(format!(
            "arc probability {p:.6} left [0,1]; state is unphysical"
        )));
    }
    Ok(())
}

/// Net flow `dy/dx` and `du/dx` in phase `k` at state `(y, u)` under the
/// solved processing mix.
pub fn phase_derivative(d: usize, k: usize, y: &[f64], u: f64) -> Result<(Vec<f64>, f64)> {
    validate_scaled_state(d, y, u)?;
    let tau = solve_tau(d, k, y, u)?;
    let top = d - k;
    let dy = (0..d)
        .map(|i| (0..top).map(|c| tau[c] * rate_f(d, y, u, i, c + 1)).sum())
        .collect();
    let du = -(0..top).map(|c| (c + 1) as f64 * tau[c]).sum::<f64>();
    Ok((dy, du))
}

/// A zero crossing that can stop the integration, armed only after its
/// function has exceeded `arm_above` (so a function starting at its
/// boundary value does not fire immediately).
pub(crate) struct EventSpec<'a> {
    pub g: Box<dyn Fn(&[f64]) -> Result<f64> + 'a>,
    pub arm_above: f64,
    pub kind: EndEvent,
}

fn locate_crossing(
    deriv: &dyn Fn(&[f64]) -> Result<Vec<f64>>,
    g: &dyn Fn(&[f64]) -> Result<f64>,
    xa0: f64,
    sa0: &[f64],
    xb0: f64,
    xtol: f64,
) -> Result<(f64, Vec<f64>)> {
    let mut xa = xa0;
    let mut sa = sa0.to_vec();
    let mut xb = xb0;
    while xb - xa > xtol {
        let xm = 0.5 * (xa + xb);
        let (sm, _) = dp_step(deriv, &sa, xm - xa)?;
        if g(&sm)? > 0.0 {
            xa = xm;
            sa = sm;
        } else {
            xb = xm;
        }
    }
    let (sb, _) = dp_step(deriv, &sa, xb - xa)?;
    Ok((xb, sb))
}

/// Adaptive integration of an autonomous system until the first event
/// fires. `check` runs on every accepted state and may abort; `h_ceil`
/// bounds the next step as a function of the current state (so trial
/// stages cannot leave the domain where the derivative is defined);
/// `on_sample` receives each accepted `(x, state)` including both
/// endpoints.
pub(crate) fn integrate_autonomous(
    deriv: &dyn Fn(&[f64]) -> Result<Vec<f64>>,
    x0: f64,
    s0: Vec<f64>,
    events: &[EventSpec],
    check: &dyn Fn(&[f64]) -> Result<()>,
    h_ceil: &dyn Fn(&[f64]) -> f64,
    cfg: &SolverConfig,
    on_sample: &mut dyn FnMut(f64, &[f64]) -> Result<()>,
) -> Result<(f64, Vec<f64>, EndEvent)> {
    let mut x = x0;
    let mut s = s0;
    let mut h = cfg.h_init.min(cfg.h_max);
    let mut armed = Vec::with_capacity(events.len());
    for ev in events {
        armed.push((ev.g)(&s)? > ev.arm_above);
    }
    check(&s)?;
    on_sample(x, &s)?;
    for _ in 0..cfg.max_steps {
        let h_try = h.min(h_ceil(&s));
        let (s_new, err) = dp_step(deriv, &s, h_try)?;
        let ratio = error_ratio(&s, &s_new, &err, cfg.rtol, cfg.atol);
        if ratio > 1.0 {
            h = h_try * (0.9 * ratio.powf(-0.2)).clamp(0.2, 0.9);
            if h < 1e-13 {
                return Err(Error::numerical("step size underflow"));
            }
            continue;
        }
        let x_new = x + h_try;
        let mut fired: Option<(f64, Vec<f64>, EndEvent)> = None;
        for (idx, ev) in events.iter().enumerate() {
            let g_new = (ev.g)(&s_new)?;
            if armed[idx] && g_new <= 0.0 {
                let (xc, sc) = locate_crossing(deriv, &ev.g, x, &s, x_new, cfg.event_xtol)?;
                if fired.as_ref().map_or(true, |(xf, _, _)| xc < *xf) {
                    fired = Some((xc, sc, ev.kind));
                }
            } else if !armed[idx] && g_new > ev.arm_above {
                armed[idx] = true;
            }
        }
        if let Some((xc, sc, kind)) = fired {
            check(&sc)?;
            on_sample(xc, &sc)?;
            return Ok((xc, sc, kind));
        }
        check(&s_new)?;
        x = x_new;
        s = s_new;
        on_sample(x, &s)?;
        h = (h_try * (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0)).min(cfg.h_max);
    }
    Err(Error::numerical("step budget exhausted before any event"))
}

/// Integrates phase `k` of the plain system from `(y0, u0)` at `x0`.
///
/// Interior phases stop when the top type's mixing share crosses zero. Any
/// phase may instead exhaust the reservoir; the integration then stops at a
/// small floor and the exact linear remainder (the mix is constant to first
/// order there) is appended analytically, including one Euler step for the
/// type variables.
pub fn integrate_phase(
    d: usize,
    k: usize,
    x0: f64,
    y0: &[f64],
    u0: f64,
    cfg: &SolverConfig,
) -> Result<PhaseOutcome> {
    validate_scaled_state(d, y0, u0)?;
    let top = d - k;
    let deriv = |s: &[f64]| -> Result<Vec<f64>> {
        let (y, u) = s.split_at(d);
        let (mut dy, du) = phase_derivative(d, k, y, u[0])?;
        dy.push(du);
        Ok(dy)
    };
    let mut events: Vec<EventSpec> = vec![EventSpec {
        g: Box::new(move |s: &[f64]| Ok(s[d] - cfg.u_floor)),
        arm_above: 0.0,
        kind: EndEvent::Exhausted,
    }];
    if top >= 2 {
        events.push(EventSpec {
            g: Box::new(move |s: &[f64]| {
                let (y, u) = s.split_at(d);
                Ok(solve_tau(d, k, y, u[0])?[top - 1])
            }),
            arm_above: 1e-12,
            kind: EndEvent::TauTopZero,
        });
    }
    let check = |s: &[f64]| -> Result<()> {
        if s[top] < -BACKWARDS_TOL {
            return Err(Error::numerical(format!(
                "y_{top} = {:.3e} went negative in phase {k} (d={d}): backwards trajectory",
                s[top]
            )));
        }
        let (y, u) = s.split_at(d);
        let tau = solve_tau(d, k, y, u[0])?;
        if tau.iter().any(|&t| t < -TAU_BACKWARDS_TOL) {
            return Err(Error::numerical(format!(
                "mixing proportions {tau:?} far below zero in phase {k} (d={d}): \
                 the phase ordering does not describe this trajectory"
            )));
        }
        Ok(())
    };
    // The reservoir drains at most d-1 per step and trial stages probe a
    // few step-lengths around the endpoint, so this ceiling keeps every
    // evaluation at positive u while still reaching the floor crossing.
    let h_ceil =
        move |s: &[f64]| (s[d] - 0.45 * cfg.u_floor).max(0.0) / (10.0 * (d - 1) as f64);
    let mut samples = Vec::new();
    let mut on_sample = |x: f64, s: &[f64]| -> Result<()> {
        let (y, u) = s.split_at(d);
        samples.push(PhaseSample {
            x,
            y: y.to_vec(),
            u: u[0],
            tau: solve_tau(d, k, y, u[0])?,
        });
        Ok(())
    };

    let mut state = y0.to_vec();
    state.push(u0);
    let (x_stop, s_stop, end) = integrate_autonomous(
        &deriv,
        x0,
        state,
        &events,
        &check,
        &h_ceil,
        cfg,
        &mut on_sample,
    )?;

    let (mut x_end, mut y_end, mut u_end) = (x_stop, s_stop[..d].to_vec(), s_stop[d]);
    if end == EndEvent::Exhausted {
        let (dy, du) = phase_derivative(d, k, &y_end, u_end)?;
        let remaining_x = u_end / (-du);
        x_end += remaining_x;
        for (yi, di) in y_end.iter_mut().zip(&dy) {
            *yi += remaining_x * di;
        }
        let tau = solve_tau(d, k, &s_stop[..d], s_stop[d])?;
        u_end = 0.0;
        samples.push(PhaseSample {
            x: x_end,
            y: y_end.clone(),
            u: 0.0,
            tau,
        });
    }

    Ok(PhaseOutcome {
        trajectory: PhaseTrajectory {
            index: k,
            top_type: top,
            x_start: x0,
            x_end,
            end,
            samples,
        },
        y_end,
        u_end,
        x_end,
    })
}

/// Solves the plain system phase chain for degree `d` and returns the
/// portrait with `upper_bound = 1 - x_end`.
///
/// Degrees 3 through 14 are the validated range; larger degrees integrate
/// with the same machinery but without reference values.
pub fn run_plain(d: usize, cfg: &SolverConfig) -> Result<PhasePortrait> {
    if d < 3 {
        return Err(Error::invalid("the phase system needs d >= 3"));
    }
    let mut x = 0.0;
    let mut y = vec![0.0; d];
    let mut u = 1.0;
    let mut phases = Vec::new();
    let mut boundaries = Vec::new();
    let mut exhausted = false;
    for k in 1..=d - 1 {
        let out = integrate_phase(d, k, x, &y, u, cfg)?;
        x = out.x_end;
        y = out.y_end;
        u = out.u_end;
        boundaries.push(x);
        let end = out.trajectory.end;
        phases.push(out.trajectory);
        if end == EndEvent::Exhausted {
            exhausted = true;
            break;
        }
    }
    if !exhausted {
        return Err(Error::numerical(
            "the final phase ended without exhausting the reservoir",
        ));
    }
    Ok(PhasePortrait {
        d,
        algo: AlgoKind::Plain,
        phases,
        phase_boundaries: boundaries,
        x_end: x,
        upper_bound: 1.0 - x,
        final_y: y,
        config: *cfg,
    })
}
