//! Fluid limit of the smart greedy variant for d = 3.
//!
//! Dominated vertices are tracked in six cells `y_{i,k}`: type `i` in
//! {0,1,2} crossed with the destination class `k` (1 = future forcing set,
//! 2 = witness set). The expected bound improves on the plain system
//! because the insertion move converts a class-1 vertex into a witness
//! whenever a fully dominated reservoir vertex with an all-class-1
//! neighbourhood appears; the probability of that trigger depends on the
//! class split of the typed arcs, which is why classes must be tracked.

use crate::error::{Error, Result};
use crate::ode::rates::binom;
use crate::ode::tau::gauss_solve;
use crate::ode::{
    integrate_autonomous, AlgoKind, EndEvent, EventSpec, PhasePortrait, PhaseSample,
    PhaseTrajectory, SolverConfig, BACKWARDS_TOL, TAU_BACKWARDS_TOL,
};

/// Processing-step kinds in mixing-vector order: (type, class).
const STEP_KINDS: [(usize, usize); 4] = [(1, 1), (1, 2), (2, 1), (2, 2)];

fn cell(cells: &[f64], i: usize, k: usize) -> f64 {
    if i >= 3 {
        0.0
    } else {
        cells[(k - 1) * 3 + i]
    }
}

fn class_totals(cells: &[f64]) -> [f64; 3] {
    [
        cell(cells, 0, 1) + cell(cells, 0, 2),
        cell(cells, 1, 1) + cell(cells, 1, 2),
        cell(cells, 2, 1) + cell(cells, 2, 2),
    ]
}

fn arc_prob(cells: &[f64], u: f64) -> f64 {
    let t = class_totals(cells);
    (t[1] + 2.0 * t[2]) / (3.0 * u)
}

/// Share of typed arcs belonging to class 1; zero when no typed arcs exist
/// (then no trigger is possible and the value is immaterial).
fn class1_arc_share(cells: &[f64]) -> f64 {
    let t = class_totals(cells);
    let typed = t[1] + 2.0 * t[2];
    if typed > 0.0 {
        (cell(cells, 1, 1) + 2.0 * cell(cells, 2, 1)) / typed
    } else {
        0.0
    }
}

/// Expected contribution to `dy_{i,k}/dx` of one step processing a type-`j`
/// class-`l` vertex, in the scaled limit.
///
/// For a type-2 step the two freed vertices land at types `(a, b)`; the one
/// with more undominated neighbours joins class 1 and the other becomes the
/// witness, except that a freed vertex with no undominated neighbours left
/// triggers the insertion move when the processed vertex is class 1 and the
/// freed vertex's neighbourhood is entirely class 1 (probability `rho^2`
/// per such vertex, `rho` the class-1 share of typed arcs): the processed
/// vertex then changes class while the freed vertex joins class 1.
pub fn smart_rate_f(i: usize, j: usize, k: usize, l: usize, cells: &[f64], u: f64) -> f64 {
    debug_assert!(cells.len() == 6 && u > 0.0);
    debug_assert!(i < 3 && (1..=2).contains(&j) && (1..=2).contains(&k) && (1..=2).contains(&l));
    let p = arc_prob(cells, u);
    let jf = j as f64;
    let mut f =
        2.0 * jf * ((i + 1) as f64 * cell(cells, i + 1, k) - i as f64 * cell(cells, i, k))
            / (3.0 * u);
    if j == 1 {
        if k == l {
            if i == 0 {
                f += 1.0;
            }
            if i == 1 {
                f -= 1.0;
            }
        }
        if k == 2 {
            f += binom(2, i) * p.powi(2 - i as i32) * (1.0 - p).powi(i as i32);
        }
        return f;
    }
    let rho = class1_arc_share(cells);
    let pab = |a: usize, b: usize| {
        let sym = if a != b { 2.0 } else { 1.0 };
        sym * binom(2, a)
            * binom(2, b)
            * p.powi(4 - (a + b) as i32)
            * (1.0 - p).powi((a + b) as i32)
    };
    for (a, b) in [(2, 2), (2, 1), (1, 1)] {
        let w = pab(a, b);
        if i == a && k == 1 {
            f += w;
        }
        if i == b && k == 2 {
            f += w;
        }
        if i == 0 && k == l {
            f += w;
        }
        if i == 2 && k == l {
            f -= w;
        }
    }
    let trig = if l == 1 { rho * rho } else { 0.0 };
    for a in [1, 2] {
        let w = pab(a, 0);
        let wt = w * trig;
        if i == a && k == 2 {
            f += wt;
        }
        if i == 0 && k == 1 {
            f += wt;
        }
        if i == 0 && k == 2 {
            f += wt;
        }
        if i == 2 && k == 1 {
            f -= wt;
        }
        let wn = w * (1.0 - trig);
        if i == a && k == 1 {
            f += wn;
        }
        if i == 0 && k == 2 {
            f += wn;
        }
        if i == 0 && k == l {
            f += wn;
        }
        if i == 2 && k == l {
            f -= wn;
        }
    }
    let w = pab(0, 0);
    let trig00 = if l == 1 {
        1.0 - (1.0 - rho * rho) * (1.0 - rho * rho)
    } else {
        0.0
    };
    let wt = w * trig00;
    if i == 0 {
        f += wt;
    }
    if i == 0 && k == 2 {
        f += wt;
    }
    if i == 2 && k == 1 {
        f -= wt;
    }
    let wn = w * (1.0 - trig00);
    if i == 0 {
        f += wn;
    }
    if i == 0 && k == l {
        f += wn;
    }
    if i == 2 && k == l {
        f -= wn;
    }
    f
}

fn validate_state(cells: &[f64], u: f64) -> Result<()> {
    if u <= 0.0 {
        return Err(Error::invalid(format!("reservoir fraction u={u} not positive")));
    }
    let p = arc_prob(cells, u);
    if !(-1e-3..=1.0 + 1e-3).contains(&p) {
        return Err(Error::numerical(format!(
            "arc probability {p:.6} left [0,1]; state is unphysical"
        )));
    }
    Ok(())
}

/// Phase-1 mixing proportions `(tau_{1,1}, tau_{1,2}, tau_{2,1}, tau_{2,2})`.
///
/// Normalization, zero net flow into both type-1 cells, and the policy row:
/// type-2 processing splits between the classes proportionally to their
/// type-2 masses (equally while both are still empty at the start).
fn solve_tau_phase1(cells: &[f64], u: f64) -> Result<Vec<f64>> {
    let mut a = vec![vec![0.0; 4]; 4];
    let mut rhs = vec![0.0; 4];
    for col in 0..4 {
        a[0][col] = 1.0;
    }
    rhs[0] = 1.0;
    for (row, cell_class) in [1, 2].into_iter().enumerate() {
        for (col, &(j, l)) in STEP_KINDS.iter().enumerate() {
            a[row + 1][col] = smart_rate_f(1, j, cell_class, l, cells, u);
        }
    }
    let (y21, y22) = (cell(cells, 2, 1), cell(cells, 2, 2));
    a[3] = if y21 + y22 < 1e-9 {
        vec![0.0, 0.0, 1.0, -1.0]
    } else {
        vec![0.0, 0.0, y22, -y21]
    };
    let mut tau = gauss_solve(a, rhs)?;
    for t in &mut tau {
        if (-1e-12..0.0).contains(t) {
            *t = 0.0;
        }
    }
    Ok(tau)
}

/// Class-1 share of phase-2 processing. Proportional to the type-1 cell
/// masses; at the phase start both are zero and the attracting fixed point
/// of the inflow balance is used instead.
fn phase2_theta(cells: &[f64], u: f64) -> f64 {
    let tot = cell(cells, 1, 1) + cell(cells, 1, 2);
    if tot >= 1e-9 {
        return cell(cells, 1, 1) / tot;
    }
    let m1 = 4.0 * cell(cells, 2, 1) / (3.0 * u);
    let m2 = 4.0 * cell(cells, 2, 2) / (3.0 * u);
    let p = arc_prob(cells, u);
    let fresh = 2.0 * p * (1.0 - p);
    let denom = m1 + m2 + fresh;
    if denom > 0.0 {
        m1 / denom
    } else {
        0.0
    }
}

/// Solves the smart two-phase system for d = 3.
///
/// The portrait's `y` vectors hold the six cells in the order
/// `y_{0,1}, y_{1,1}, y_{2,1}, y_{0,2}, y_{1,2}, y_{2,2}`. The bound is one
/// minus the final witness-class mass: the forcing set is everything that
/// never became a witness.
pub fn run_smart_d3(cfg: &SolverConfig) -> Result<PhasePortrait> {
    let deriv1 = |s: &[f64]| -> Result<Vec<f64>> {
        let (cells, u) = s.split_at(6);
        let u = u[0];
        validate_state(cells, u)?;
        let tau = solve_tau_phase1(cells, u)?;
        let mut out = vec![0.0; 7];
        for k in 1..=2 {
            for i in 0..3 {
                let mut v = 0.0;
                for (col, &(j, l)) in STEP_KINDS.iter().enumerate() {
                    v += tau[col] * smart_rate_f(i, j, k, l, cells, u);
                }
                out[(k - 1) * 3 + i] = v;
            }
        }
        out[6] = -(tau[0] + tau[1] + 2.0 * (tau[2] + tau[3]));
        Ok(out)
    };
    let events = [
        EventSpec {
            g: Box::new(move |s: &[f64]| Ok(s[6] - cfg.u_floor)),
            arm_above: 0.0,
            kind: EndEvent::Exhausted,
        },
        EventSpec {
            g: Box::new(|s: &[f64]| {
                let (cells, u) = s.split_at(6);
                let tau = solve_tau_phase1(cells, u[0])?;
                Ok(tau[2] + tau[3])
            }),
            arm_above: 1e-12,
            kind: EndEvent::TauTopZero,
        },
    ];
    let check1 = |s: &[f64]| -> Result<()> {
        let (cells, u) = s.split_at(6);
        if cell(cells, 2, 1) < -BACKWARDS_TOL || cell(cells, 2, 2) < -BACKWARDS_TOL {
            return Err(Error::numerical(
                "a type-2 cell went negative in smart phase 1: backwards trajectory",
            ));
        }
        let tau = solve_tau_phase1(cells, u[0])?;
        if tau.iter().any(|&t| t < -TAU_BACKWARDS_TOL) {
            return Err(Error::numerical(format!(
                "mixing proportions {tau:?} far below zero in smart phase 1"
            )));
        }
        Ok(())
    };
    let h_ceil = move |s: &[f64]| (s[6] - 0.45 * cfg.u_floor).max(0.0) / 20.0;
    let mut samples1 = Vec::new();
    let mut on_sample1 = |x: f64, s: &[f64]| -> Result<()> {
        let (cells, u) = s.split_at(6);
        samples1.push(PhaseSample {
            x,
            y: cells.to_vec(),
            u: u[0],
            tau: solve_tau_phase1(cells, u[0])?,
        });
        Ok(())
    };
    let mut state = vec![0.0; 7];
    state[6] = 1.0;
    let (x1, s1, end1) = integrate_autonomous(
        &deriv1,
        0.0,
        state,
        &events,
        &check1,
        &h_ceil,
        cfg,
        &mut on_sample1,
    )?;
    if end1 != EndEvent::TauTopZero {
        return Err(Error::numerical(
            "smart phase 1 exhausted the reservoir before its boundary",
        ));
    }
    let phase1 = PhaseTrajectory {
        index: 1,
        top_type: 2,
        x_start: 0.0,
        x_end: x1,
        end: end1,
        samples: samples1,
    };

    let deriv2 = |s: &[f64]| -> Result<Vec<f64>> {
        let (cells, u) = s.split_at(6);
        let u = u[0];
        validate_state(cells, u)?;
        let theta = phase2_theta(cells, u);
        let mut out = vec![0.0; 7];
        for k in 1..=2 {
            for i in 0..3 {
                out[(k - 1) * 3 + i] = theta * smart_rate_f(i, 1, k, 1, cells, u)
                    + (1.0 - theta) * smart_rate_f(i, 1, k, 2, cells, u);
            }
        }
        out[6] = -1.0;
        Ok(out)
    };
    let events2 = [EventSpec {
        g: Box::new(move |s: &[f64]| Ok(s[6] - cfg.u_floor)),
        arm_above: 0.0,
        kind: EndEvent::Exhausted,
    }];
    let check2 = |s: &[f64]| -> Result<()> {
        let (cells, _) = s.split_at(6);
        if cell(cells, 1, 1) < -BACKWARDS_TOL || cell(cells, 1, 2) < -BACKWARDS_TOL {
            return Err(Error::numerical(
                "a type-1 cell went negative in smart phase 2: backwards trajectory",
            ));
        }
        Ok(())
    };
    let mut samples2 = Vec::new();
    let mut on_sample2 = |x: f64, s: &[f64]| -> Result<()> {
        let (cells, u) = s.split_at(6);
        let theta = phase2_theta(cells, u[0]);
        samples2.push(PhaseSample {
            x,
            y: cells.to_vec(),
            u: u[0],
            tau: vec![theta, 1.0 - theta],
        });
        Ok(())
    };
    let (x_stop, s_stop, _) = integrate_autonomous(
        &deriv2,
        x1,
        s1,
        &events2,
        &check2,
        &h_ceil,
        cfg,
        &mut on_sample2,
    )?;

    // The reservoir drains one vertex per step here, so the remainder below
    // the floor is exact in x; one Euler step carries the cells there.
    let u_stop = s_stop[6];
    let x_end = x_stop + u_stop;
    let dcells = deriv2(&s_stop)?;
    let mut cells_end: Vec<f64> = s_stop[..6].to_vec();
    for (c, dc) in cells_end.iter_mut().zip(&dcells) {
        *c += u_stop * dc;
    }
    let theta_end = phase2_theta(&cells_end, cfg.u_floor);
    samples2.push(PhaseSample {
        x: x_end,
        y: cells_end.clone(),
        u: 0.0,
        tau: vec![theta_end, 1.0 - theta_end],
    });
    let phase2 = PhaseTrajectory {
        index: 2,
        top_type: 1,
        x_start: x1,
        x_end,
        end: EndEvent::Exhausted,
        samples: samples2,
    };

    let witness_mass: f64 = cells_end[3..6].iter().sum();
    Ok(PhasePortrait {
        d: 3,
        algo: AlgoKind::Smart,
        phases: vec![phase1, phase2],
        phase_boundaries: vec![x1, x_end],
        x_end,
        upper_bound: 1.0 - witness_mass,
        final_y: cells_end,
        config: *cfg,
    })
}
