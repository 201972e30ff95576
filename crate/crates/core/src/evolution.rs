//! Time marching of the nonlocal form and wave-breaking detection.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid, State};
use crate::nonlocal::{rhs_values, spectral_derivative};

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct SolverConfig {
    pub cfl: f64,
    pub dt_max: f64,
    /// Floor below which the run is abandoned as `DtUnderflow`.
    pub dt_min: f64,
    pub t_end: f64,
    pub snapshot_interval: f64,
    pub breaking_slope_threshold: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            cfl: 0.3,
            dt_max: 0.01,
            dt_min: 1e-8,
            t_end: 1.0,
            snapshot_interval: 0.1,
            breaking_slope_threshold: 1e3,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        let check = |ok: bool, msg: &str| if ok { Ok(()) } else { Err(Error::InvalidConfig(msg.into())) };
        check(positive(self.cfl), "cfl must be positive")?;
        check(positive(self.dt_max), "dt_max must be positive")?;
        check(positive(self.dt_min), "dt_min must be positive")?;
        check(self.dt_min < self.dt_max, "dt_min must be below dt_max")?;
        check(positive(self.t_end), "t_end must be positive")?;
        check(positive(self.snapshot_interval), "snapshot_interval must be positive")?;
        check(self.snapshot_interval <= self.t_end, "snapshot_interval must not exceed t_end")?;
        check(positive(self.breaking_slope_threshold), "breaking_slope_threshold must be positive")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Termination {
    Completed,
    BreakingDetected,
    DtUnderflow,
}

/// Snapshots of one run, starting with the initial condition.
#[derive(Clone, Debug)]
pub struct Trajectory {
    snapshots: Vec<State>,
    config: SolverConfig,
    termination: Termination,
}

impl Trajectory {
    /// Assembles a trajectory from stored snapshots (e.g. read back from disk).
    pub fn new(snapshots: Vec<State>, config: SolverConfig, termination: Termination) -> Result<Self> {
        if snapshots.is_empty() {
            return Err(Error::InsufficientSnapshots { needed: 1, got: 0 });
        }
        for pair in snapshots.windows(2) {
            if pair[1].time() <= pair[0].time() {
                return Err(Error::InvalidConfig(format!(
                    "snapshot times must increase: {} then {}",
                    pair[0].time(),
                    pair[1].time()
                )));
            }
            pair[0].u().ensure_same_grid(pair[1].u())?;
        }
        Ok(Self { snapshots, config, termination })
    }

    pub fn snapshots(&self) -> &[State] {
        &self.snapshots
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn termination(&self) -> Termination {
        self.termination
    }

    pub fn grid(&self) -> &Grid {
        self.snapshots[0].grid()
    }

    pub fn initial(&self) -> &State {
        &self.snapshots[0]
    }

    pub fn last(&self) -> &State {
        self.snapshots.last().expect("trajectory is never empty")
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.snapshots.iter().map(State::time)
    }
}

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// One classical RK4 step of size `dt`.
pub fn step(state: &State, dt: f64) -> Result<State> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidConfig(format!("time step {dt} must be positive")));
    }
    let grid = state.grid();
    let u = state.u().values();
    let fail = || Error::IntegrationFailure { time: state.time() };
    let axpy = |a: f64, k: &[f64]| -> Vec<f64> { u.iter().zip(k).map(|(x, y)| x + a * y).collect() };

    let k1 = rhs_values(grid, u);
    if !all_finite(&k1) {
        return Err(fail());
    }
    let k2 = rhs_values(grid, &axpy(0.5 * dt, &k1));
    if !all_finite(&k2) {
        return Err(fail());
    }
    let k3 = rhs_values(grid, &axpy(0.5 * dt, &k2));
    if !all_finite(&k3) {
        return Err(fail());
    }
    let k4 = rhs_values(grid, &axpy(dt, &k3));
    let next: Vec<f64> = (0..u.len())
        .map(|j| u[j] + dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]))
        .collect();
    if !all_finite(&next) {
        return Err(fail());
    }
    State::new(state.time() + dt, Field::from_parts(grid.clone(), next))
}

/// Largest stable step: `cfl * h / (1 + max|1 + 14u|)`, capped at `dt_max`.
pub fn cfl_time_step(u: &Field, config: &SolverConfig) -> f64 {
    let speed = u.values().iter().fold(0.0f64, |m, v| m.max((1.0 + 14.0 * v).abs()));
    (config.cfl * u.grid().spacing() / (1.0 + speed)).min(config.dt_max)
}

pub fn max_slope(u: &Field) -> f64 {
    spectral_derivative(u, 1).map(|d| d.sup_norm()).unwrap_or(f64::INFINITY)
}

/// Integrates from `initial` to `config.t_end` (measured from the initial time).
///
/// Steps are clipped so that snapshots land exactly on multiples of
/// `snapshot_interval`. A failed step is retried at half the size; the run
/// ends with `DtUnderflow` once the step would drop below `dt_min`, and with
/// `BreakingDetected` as soon as `max|u_x|` reaches the slope threshold.
pub fn evolve(initial: &State, config: &SolverConfig) -> Result<Trajectory> {
    config.validate()?;
    let t0 = initial.time();
    let t_end = t0 + config.t_end;
    let tol = 1e-12 * t_end.max(1.0);
    let mut snapshots = alloc::vec![initial.clone()];
    let mut state = initial.clone();
    let mut next_index = 1u64;
    let termination = loop {
        if state.time() >= t_end - tol {
            break Termination::Completed;
        }
        let target = (t0 + next_index as f64 * config.snapshot_interval).min(t_end);
        let mut dt = cfl_time_step(state.u(), config).min(target - state.time());
        if dt < config.dt_min {
            break Termination::DtUnderflow;
        }
        let next = loop {
            match step(&state, dt) {
                Ok(next) => break Some(next),
                Err(_) => {
                    dt *= 0.5;
                    if dt < config.dt_min {
                        break None;
                    }
                }
            }
        };
        let Some(mut next) = next else {
            break Termination::DtUnderflow;
        };
        let reached = (target - next.time()).abs() <= tol;
        if reached {
            next = State::new(target, next.into_field())?;
        }
        let breaking = max_slope(next.u()) >= config.breaking_slope_threshold;
        state = next;
        if reached || breaking {
            snapshots.push(state.clone());
        }
        if reached {
            next_index += 1;
        }
        if breaking {
            break Termination::BreakingDetected;
        }
    };
    Ok(Trajectory { snapshots, config: config.clone(), termination })
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BreakingReport {
    pub detected: bool,
    pub t_detect: Option<f64>,
    pub threshold: f64,
    /// `(t, max|u_x|)` per snapshot.
    pub max_slope_history: Vec<(f64, f64)>,
    /// `(t, ||u||_inf)` per snapshot.
    pub sup_norm_history: Vec<(f64, f64)>,
}

/// Flags the first snapshot where the slope reached the configured threshold
/// while the profile stayed within twice its initial sup-norm.
pub fn detect_breaking(traj: &Trajectory) -> BreakingReport {
    let threshold = traj.config().breaking_slope_threshold;
    let max_slope_history: Vec<(f64, f64)> =
        traj.snapshots().iter().map(|s| (s.time(), max_slope(s.u()))).collect();
    let sup_norm_history: Vec<(f64, f64)> =
        traj.snapshots().iter().map(|s| (s.time(), s.u().sup_norm())).collect();
    let bound = 2.0 * sup_norm_history[0].1;
    let t_detect = max_slope_history
        .iter()
        .zip(&sup_norm_history)
        .find(|((_, slope), (_, sup))| *slope >= threshold && *sup <= bound)
        .map(|((t, _), _)| *t);
    BreakingReport { detected: t_detect.is_some(), t_detect, threshold, max_slope_history, sup_norm_history }
}

/// Phase speed `(1 - k^2) / (1 + k^2)` of the linearized equation.
pub fn linear_phase_speed(k: f64) -> f64 {
    (1.0 - k * k) / (1.0 + k * k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::new(64, 20.0).unwrap()
    }

    #[test]
    fn equilibria_are_fixed_points() {
        for c in [0.0, 0.4, -0.2] {
            let s = State::new(0.0, Field::constant(&grid(), c).unwrap()).unwrap();
            let next = step(&s, 0.01).unwrap();
            assert!((next.time() - 0.01).abs() < 1e-15);
            assert!(next.u().values().iter().all(|v| (v - c).abs() < 1e-14));
        }
    }

    #[test]
    fn phase_speed_values() {
        assert_eq!(linear_phase_speed(0.0), 1.0);
        assert_eq!(linear_phase_speed(1.0), 0.0);
        assert!((linear_phase_speed(2.0) + 0.6).abs() < 1e-15);
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::default().validate().is_ok());
        let bad = SolverConfig { dt_min: 1.0, dt_max: 0.1, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = SolverConfig { snapshot_interval: 2.0, t_end: 1.0, ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn zero_run_completes() {
        let s = State::new(0.0, Field::zeros(&grid())).unwrap();
        let config = SolverConfig { t_end: 1.0, snapshot_interval: 0.25, ..Default::default() };
        let traj = evolve(&s, &config).unwrap();
        assert_eq!(traj.termination(), Termination::Completed);
        let times: Vec<f64> = traj.times().collect();
        assert_eq!(times, [0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(traj.snapshots().iter().all(|s| s.u().sup_norm() == 0.0));
        assert!(!detect_breaking(&traj).detected);
    }

    #[test]
    fn trajectory_requires_increasing_times() {
        let s = State::new(1.0, Field::zeros(&grid())).unwrap();
        let r = Trajectory::new(alloc::vec![s.clone(), s], SolverConfig::default(), Termination::Completed);
        assert!(r.is_err());
    }

    #[test]
    fn non_positive_step_rejected() {
        let s = State::new(0.0, Field::zeros(&grid())).unwrap();
        assert!(step(&s, 0.0).is_err());
    }
}
