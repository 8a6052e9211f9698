//! The acceptance checks, runnable from tests and from the command line.
//!
//! Every check returns a [`CheckOutcome`]; a check passes only if its
//! numerical condition holds and it finished inside its time budget.

use std::time::{Duration, Instant};

use crate::analysis::{assess_possibility, compare_engines, entropy_surface, resource_curve, ReservoirSearch, Verdict};
use crate::collision::Coupling;
use crate::error::Result;
use crate::exactsim::{channel_linearity_check, exact_metrics, ExactHomogenizer};
use crate::metrics::{diagonal_log_r, record_at};
use crate::recurrence::{check_symmetries, closed_form, run_protocol, TaskDirection};
use crate::tolerances::*;

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub budget: Duration,
}

impl std::fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{}] {:>2}. {} ({:.2}s / {}s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs(),
            self.detail
        )
    }
}

fn timed(id: u8, title: &'static str, budget_secs: u64, body: impl FnOnce() -> Result<(bool, String)>) -> CheckOutcome {
    let start = Instant::now();
    let (ok, detail) = match body() {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    let elapsed = start.elapsed();
    let budget = Duration::from_secs(budget_secs);
    CheckOutcome {
        id,
        title,
        passed: ok && elapsed < budget,
        detail,
        elapsed,
        budget,
    }
}

fn c(eta: f64) -> Coupling {
    Coupling::new(eta).expect("fixed coupling in range")
}

/// Single reservoir qubit: recurrence and exact engine agree to 1e-12.
pub fn oracle_equivalence() -> CheckOutcome {
    timed(1, "single-qubit oracle equivalence", 10, || {
        let mut worst: f64 = 0.0;
        for eta in [0.01, 0.1, 0.3, 0.5] {
            for dir in TaskDirection::BOTH {
                let trace = run_protocol(dir, 1, 50, c(eta))?;
                for exact in exact_metrics(dir, 1, 50, c(eta))? {
                    let approx = record_at(&trace, 1, exact.iterations);
                    worst = worst
                        .max((exact.epsilon - approx.epsilon).abs())
                        .max((exact.delta() - approx.delta()).abs())
                        .max((exact.relative_deterioration - approx.relative_deterioration).abs());
                }
            }
        }
        Ok((worst <= SINGLE_QUBIT_ENGINE_TOL, format!("max |diff| = {worst:.3e}")))
    })
}

/// Closed-form double sums reproduce the iteration to 1e-10.
pub fn closed_form_equivalence() -> CheckOutcome {
    timed(2, "closed-form equivalence", 5, || {
        let mut worst: f64 = 0.0;
        for eta in [0.01, 0.1, 0.3, 0.5] {
            for dir in TaskDirection::BOTH {
                let it = run_protocol(dir, 10, 10, c(eta))?;
                let cf = closed_form(dir, 10, 10, c(eta))?;
                worst = worst.max(it.max_abs_diff(&cf)?);
            }
        }
        Ok((worst <= CLOSED_FORM_TOL, format!("max |diff| = {worst:.3e}")))
    })
}

/// Complement and transpose identities hold to 1e-12.
pub fn symmetries() -> CheckOutcome {
    timed(3, "transpose symmetries", 5, || {
        let mut worst: f64 = 0.0;
        for eta in [0.01, 0.1, 0.5] {
            let p = run_protocol(TaskDirection::PureToMixed, 20, 20, c(eta))?;
            let m = run_protocol(TaskDirection::MixedToPure, 20, 20, c(eta))?;
            worst = worst.max(check_symmetries(&p, &m)?.max_violation());
        }
        Ok((worst <= SYMMETRY_TOL, format!("max violation = {worst:.3e}")))
    })
}

/// Weak coupling: pure-to-mixed converges, mixed-to-pure diverges.
pub fn weak_coupling_asymmetry() -> CheckOutcome {
    timed(4, "weak-coupling asymmetry", 30, || {
        let p = assess_possibility(TaskDirection::PureToMixed, c(0.01), 60)?;
        let m = assess_possibility(TaskDirection::MixedToPure, c(0.01), 60)?;
        let ordered = p.evidence.iter().zip(&m.evidence).all(|(a, b)| b.1 > a.1);
        let ok = p.verdict == Verdict::Converging && m.verdict == Verdict::Diverging && ordered;
        Ok((
            ok,
            format!(
                "p2m {}, m2p {}, R_m2p > R_p2m on all 60 points: {ordered}",
                p.verdict.label(),
                m.verdict.label()
            ),
        ))
    })
}

/// Strong coupling: pure-to-mixed `R` bottoms out for `10 <= k <= 30`.
pub fn strong_coupling_minimum() -> CheckOutcome {
    timed(5, "strong-coupling interior minimum", 30, || {
        let series = diagonal_log_r(TaskDirection::PureToMixed, c(0.1), 60)?;
        let (k, log_r) = series
            .iter()
            .copied()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty");
        Ok(((10..=30).contains(&k), format!("minimum R = {:.6} at k = {k}", log_r.exp())))
    })
}

/// Exact 3x3 comparison: ordering preserved, weak-coupling gap tiny.
pub fn exact_comparison() -> CheckOutcome {
    timed(6, "exact vs approximate 3x3", 60, || {
        let mut ok = true;
        let mut notes = Vec::new();
        for eta in [0.01, 0.1] {
            let p = compare_engines(TaskDirection::PureToMixed, c(eta), 3)?;
            let m = compare_engines(TaskDirection::MixedToPure, c(eta), 3)?;
            for (a, b) in p.iter().zip(&m) {
                ok &= b.approx.relative_deterioration > a.approx.relative_deterioration;
                ok &= b.exact.relative_deterioration > a.exact.relative_deterioration;
            }
            let gap = p.iter().chain(&m).map(|r| r.relative_gap()).fold(0.0, f64::max);
            if eta == 0.01 {
                ok &= gap < WEAK_COMPARE_GAP_TOL;
            }
            notes.push(format!("eta={eta}: max rel gap {gap:.3e}"));
        }
        Ok((ok, notes.join("; ")))
    })
}

/// Entropy surfaces: flat at weak coupling, rising at strong coupling.
pub fn entropy_surfaces() -> CheckOutcome {
    timed(7, "entropy surfaces", 10, || {
        let weak = entropy_surface(c(0.01), 30, 30)?;
        let strong = entropy_surface(c(0.1), 30, 30)?;
        let mut max_excess: f64 = 0.0;
        let mut max_ratio: f64 = 0.0;
        let mut strong_ok = true;
        for n_res in 1..=30 {
            let base = n_res as f64;
            for n in 0..=30 {
                max_excess = max_excess.max((weak.s_tot(n_res, n) - base).abs());
                if n >= 5 {
                    strong_ok &= strong.s_tot(n_res, n) > base;
                }
                if n >= 1 {
                    strong_ok &= strong.s_tot(n_res, n) > strong.s_tot(n_res, n - 1);
                }
            }
            let weak_rise = weak.s_tot(n_res, 30) - weak.s_tot(n_res, 0);
            let strong_rise = strong.s_tot(n_res, 30) - strong.s_tot(n_res, 0);
            max_ratio = max_ratio.max(weak_rise / strong_rise);
        }
        let ok = max_excess < WEAK_ENTROPY_EXCESS_TOL && max_ratio < WEAK_ENTROPY_RISE_RATIO && strong_ok;
        Ok((
            ok,
            format!(
                "weak max |S-N| = {max_excess:.4}, weak/strong rise <= {max_ratio:.4}, strong rising: {strong_ok}"
            ),
        ))
    })
}

/// Resource curves at `eta = 0.3`, `epsilon* = 0.1`.
pub fn resources() -> CheckOutcome {
    timed(8, "resource curves", 60, || {
        let coupling = c(0.3);
        // Single pass: beta = c^2N (p2m) or 1 - c^2N (m2p), solved for N.
        let ln_c2 = coupling.cos2().ln();
        let p2m_closed = ((0.36f64).ln() / (2.0 * ln_c2)).ceil() as usize;
        let m2p_closed = ((0.2f64).ln() / ln_c2).ceil() as usize;
        let p = resource_curve(TaskDirection::PureToMixed, coupling, 0.1, 30)?;
        let m = resource_curve(TaskDirection::MixedToPure, coupling, 0.1, 30)?;
        let first = (p.points[0].1, m.points[0].1);
        let mut ok = first == (ReservoirSearch::Found(6), ReservoirSearch::Found(18))
            && (p2m_closed, m2p_closed) == (6, 18)
            && p.is_monotone()
            && m.is_monotone();
        for (a, b) in p.points.iter().zip(&m.points) {
            match (a.1.found(), b.1.found()) {
                (Some(x), Some(y)) => ok &= y >= x,
                _ => ok = false,
            }
        }
        let last = (p.points[29].1.found(), m.points[29].1.found());
        Ok((
            ok,
            format!("N_min(1) = {first:?} (closed form {p2m_closed}, {m2p_closed}); N_min(30) = {last:?}"),
        ))
    })
}

/// Physicality of the exact reservoir and affinity of the machine map.
pub fn physicality() -> CheckOutcome {
    timed(9, "physicality and channel linearity", 30, || {
        let mut machine = ExactHomogenizer::new(TaskDirection::PureToMixed, 4, c(0.3))?;
        let mut worst = None;
        for _ in 0..10 {
            machine.step()?;
            let r = machine.reservoir().invariant_report(true);
            let score = r.hermiticity.max(r.trace_error).max(-r.min_eigenvalue.unwrap_or(0.0));
            worst = Some(worst.map_or(score, |w: f64| w.max(score)));
        }
        let worst = worst.unwrap_or(0.0);
        let linearity = channel_linearity_check(c(0.3), 2, 100, 0x11ea)?;
        let ok = worst <= INVARIANT_TOL && linearity <= LINEARITY_TOL;
        Ok((ok, format!("worst invariant deviation {worst:.3e}, linearity deviation {linearity:.3e}")))
    })
}

/// All checks in order.
pub fn run_all() -> Vec<CheckOutcome> {
    vec![
        oracle_equivalence(),
        closed_form_equivalence(),
        symmetries(),
        weak_coupling_asymmetry(),
        strong_coupling_minimum(),
        exact_comparison(),
        entropy_surfaces(),
        resources(),
        physicality(),
    ]
}
