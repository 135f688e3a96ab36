//! World-space multi-person tracking.
//!
//! The proposed tracker runs a 2-axis constant-velocity Kalman filter per
//! person with gated Hungarian association, advances a unit orientation
//! vector by blending the previous orientation with the walking direction
//! and angular velocity, coasts through missed detections, and RTS-smooths
//! finished tracks. A frame-by-frame Hungarian baseline without any motion
//! model is included for comparison.

use alloc::vec;
use alloc::vec::Vec;
use nalgebra::Matrix4;
use thiserror::Error;

use crate::assignment::{self, CostMatrix};
use crate::filtering::{self, BeliefState, LinearCVModel};
use crate::model::{FrameTime, Track, TrackState, TrackStatus, UnitVec2, Vec2, WorldObservation};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrackError {
    #[error("frame time must advance by exactly one step: expected {expected}, got {got}")]
    NonMonotonicTime { expected: FrameTime, got: FrameTime },
}

/// How the walking-direction term enters the orientation advance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MotionTermMode {
    /// Add `w * velocity` exactly as written, whatever the speed.
    LiteralVelocity,
    /// Add `w * velocity / |velocity|`, dropping the term below a minimum
    /// speed so standing people keep their orientation.
    NormalizedVelocity,
}

/// Configuration of the world-space tracker.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackerConfig {
    /// Association gate in meters per frame.
    pub gate: f64,
    /// Consecutive coasts a track survives.
    pub max_coast: usize,
    /// Weighting of the walking direction in the orientation advance.
    pub w_motion: f64,
    /// Frame interval in seconds.
    pub dt: f64,
    /// Position/velocity process model (2 axes).
    pub kalman: LinearCVModel,
    /// Std of the zero-velocity prior for new tracks, m/s.
    pub velocity_prior: f64,
    /// Spherical blend factor toward the observed orientation on update.
    pub orientation_blend: f64,
    pub motion_term: MotionTermMode,
    /// Speed threshold for [`MotionTermMode::NormalizedVelocity`], m/s.
    pub min_speed: f64,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            gate: 1.5,
            max_coast: 10,
            w_motion: 0.1,
            dt: 1.0,
            kalman: LinearCVModel::new(2, 1.0, 0.5, 0.5),
            velocity_prior: 1.42,
            orientation_blend: 0.7,
            motion_term: MotionTermMode::NormalizedVelocity,
            min_speed: 0.05,
        }
    }
}

/// One step of the orientation advance.
///
/// Computes `O + w * motion_term + dt * angular_velocity`, renormalized.
/// When the sum nearly vanishes the previous orientation is kept.
pub fn advance_orientation(
    orientation: UnitVec2,
    velocity: Vec2,
    angular_velocity: Vec2,
    cfg: &TrackerConfig,
) -> UnitVec2 {
    let motion = match cfg.motion_term {
        MotionTermMode::LiteralVelocity => velocity,
        MotionTermMode::NormalizedVelocity => {
            let speed = velocity.norm();
            if speed > cfg.min_speed {
                velocity / speed
            } else {
                Vec2::zeros()
            }
        }
    };
    let raw = orientation.into_inner() + cfg.w_motion * motion + cfg.dt * angular_velocity;
    if raw.norm() < 1e-9 {
        orientation
    } else {
        UnitVec2::new_normalize(raw)
    }
}

/// Rotates `from` toward `to` by `fraction` of the angle between them.
/// Antipodal inputs rotate counterclockwise by convention.
fn slerp_unit(from: UnitVec2, to: UnitVec2, fraction: f64) -> UnitVec2 {
    let cross = from.perp(&to);
    let dot = from.dot(&to).clamp(-1.0, 1.0);
    let mut angle = cross.atan2(dot);
    if dot <= -1.0 + 1e-12 {
        angle = core::f64::consts::PI;
    }
    let step = fraction * angle;
    let (s, c) = (step.sin(), step.cos());
    let v = from.into_inner();
    UnitVec2::new_normalize(Vec2::new(c * v.x - s * v.y, s * v.x + c * v.y))
}

struct LiveWorldTrack {
    id: u64,
    birth_t: FrameTime,
    filtered: Vec<BeliefState>,
    predicted: Vec<BeliefState>,
    orientations: Vec<UnitVec2>,
    angular_velocities: Vec<Vec2>,
    observed: Vec<bool>,
    consecutive_coasts: usize,
    last_observed: usize,
}

impl LiveWorldTrack {
    fn spawn(id: u64, t: FrameTime, obs: &WorldObservation, cfg: &TrackerConfig) -> Self {
        let sigma_z = cfg.kalman.measurement_sigma;
        let belief = BeliefState::from_first_measurement(
            &[obs.location.x, obs.location.y],
            sigma_z * sigma_z,
            cfg.velocity_prior * cfg.velocity_prior,
        );
        // without an observed orientation a new track faces north until
        // motion or a later observation corrects it
        let orientation = obs
            .orientation
            .unwrap_or_else(|| UnitVec2::new_normalize(Vec2::new(0.0, 1.0)));
        Self {
            id,
            birth_t: t,
            filtered: vec![belief.clone()],
            predicted: vec![belief],
            orientations: vec![orientation],
            angular_velocities: vec![Vec2::zeros()],
            observed: vec![true],
            consecutive_coasts: 0,
            last_observed: 0,
        }
    }

    fn last_velocity(&self) -> Vec2 {
        let b = self.filtered.last().unwrap();
        Vec2::new(b.velocity(0), b.velocity(1))
    }

    fn finish(mut self, cfg: &TrackerConfig) -> Track {
        let keep = self.last_observed + 1;
        self.filtered.truncate(keep);
        self.predicted.truncate(keep);
        self.orientations.truncate(keep);
        self.angular_velocities.truncate(keep);
        self.observed.truncate(keep);
        let smoothed = filtering::rts_smooth(&cfg.kalman, &self.filtered, &self.predicted)
            .expect("positive-definite covariances by construction");
        let states = smoothed
            .iter()
            .enumerate()
            .map(|(k, belief)| {
                let mut covariance = Matrix4::zeros();
                for r in 0..4 {
                    for c in 0..4 {
                        covariance[(r, c)] = belief.cov[(r, c)];
                    }
                }
                TrackState {
                    t: self.birth_t + k as FrameTime,
                    position: Vec2::new(belief.mean[0], belief.mean[1]),
                    velocity: Vec2::new(belief.mean[2], belief.mean[3]),
                    orientation: self.orientations[k],
                    angular_velocity: self.angular_velocities[k],
                    covariance,
                    observed: self.observed[k],
                }
            })
            .collect();
        Track {
            track_id: self.id,
            states,
            status: TrackStatus::Finished,
        }
    }
}

/// Sequential world-space tracker; feed frames in order via [`WorldTracker::step`].
pub struct WorldTracker {
    cfg: TrackerConfig,
    live: Vec<LiveWorldTrack>,
    finished: Vec<Track>,
    next_id: u64,
    last_t: Option<FrameTime>,
}

impl WorldTracker {
    pub fn new(cfg: TrackerConfig) -> Self {
        Self {
            cfg,
            live: Vec::new(),
            finished: Vec::new(),
            next_id: 0,
            last_t: None,
        }
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.cfg
    }

    /// Advances all tracks to frame `t` and associates the observations.
    ///
    /// Predict: position by the CV Kalman model, orientation by
    /// `O + w * motion + dt * angular_velocity` renormalized. Match:
    /// Euclidean cost gated at `cfg.gate`, Hungarian solve. Update: matched
    /// tracks absorb the observed location, blend their orientation toward
    /// the observed one, and re-derive the angular velocity; unmatched
    /// observations spawn tracks; unmatched tracks coast and finish after
    /// `cfg.max_coast` consecutive misses.
    pub fn step(&mut self, t: FrameTime, observations: &[WorldObservation]) -> Result<(), TrackError> {
        if let Some(prev) = self.last_t {
            if t != prev + 1 {
                return Err(TrackError::NonMonotonicTime {
                    expected: prev + 1,
                    got: t,
                });
            }
        }
        self.last_t = Some(t);
        let cfg = self.cfg.clone();

        // predict
        let predictions: Vec<(BeliefState, UnitVec2)> = self
            .live
            .iter()
            .map(|track| {
                let belief = filtering::predict(&cfg.kalman, track.filtered.last().unwrap());
                let orientation = advance_orientation(
                    *track.orientations.last().unwrap(),
                    track.last_velocity(),
                    *track.angular_velocities.last().unwrap(),
                    &cfg,
                );
                (belief, orientation)
            })
            .collect();

        // associate
        let costs = CostMatrix::from_fn(self.live.len(), observations.len(), |i, j| {
            let p = &predictions[i].0;
            let predicted_pos = Vec2::new(p.mean[0], p.mean[1]);
            Some((predicted_pos - observations[j].location).norm())
        })
        .expect("distances are nonnegative");
        let solution = assignment::solve(&assignment::gate_costs(&costs, cfg.gate));

        let mut matched: Vec<Option<usize>> = vec![None; self.live.len()];
        for &(i, j) in &solution.pairs {
            matched[i] = Some(j);
        }

        // update or coast
        let mut retired = Vec::new();
        for (i, track) in self.live.iter_mut().enumerate() {
            let (predicted_belief, predicted_orientation) = predictions[i].clone();
            match matched[i] {
                Some(j) => {
                    let obs = &observations[j];
                    let posterior = filtering::update(
                        &cfg.kalman,
                        &predicted_belief,
                        &[obs.location.x, obs.location.y],
                    )
                    .expect("positive measurement noise");
                    let orientation = match obs.orientation {
                        Some(observed) => {
                            slerp_unit(predicted_orientation, observed, cfg.orientation_blend)
                        }
                        None => predicted_orientation,
                    };
                    let previous = *track.orientations.last().unwrap();
                    let angular_velocity =
                        (orientation.into_inner() - previous.into_inner()) / cfg.dt;
                    track.predicted.push(predicted_belief);
                    track.filtered.push(posterior);
                    track.orientations.push(orientation);
                    track.angular_velocities.push(angular_velocity);
                    track.observed.push(true);
                    track.last_observed = track.observed.len() - 1;
                    track.consecutive_coasts = 0;
                }
                None => {
                    track.consecutive_coasts += 1;
                    if track.consecutive_coasts > cfg.max_coast {
                        retired.push(i);
                        continue;
                    }
                    track.predicted.push(predicted_belief.clone());
                    track.filtered.push(predicted_belief);
                    let previous = *track.orientations.last().unwrap();
                    let angular_velocity =
                        (predicted_orientation.into_inner() - previous.into_inner()) / cfg.dt;
                    track.orientations.push(predicted_orientation);
                    track.angular_velocities.push(angular_velocity);
                    track.observed.push(false);
                }
            }
        }
        for &i in retired.iter().rev() {
            let track = self.live.remove(i);
            self.finished.push(track.finish(&cfg));
        }

        // spawn
        for &j in &solution.unmatched_cols {
            self.live
                .push(LiveWorldTrack::spawn(self.next_id, t, &observations[j], &cfg));
            self.next_id += 1;
        }
        Ok(())
    }

    /// Finalizes every live track and returns all tracks sorted by id.
    pub fn finish(mut self) -> Vec<Track> {
        let cfg = self.cfg.clone();
        for track in self.live.drain(..) {
            self.finished.push(track.finish(&cfg));
        }
        self.finished.sort_by_key(|t| t.track_id);
        self.finished
    }
}

/// Runs the tracker over an ordered observation stream.
///
/// Frames between the first and last observed timestep with no
/// observations still advance (coast) all live tracks.
pub fn run(observations: &[WorldObservation], cfg: &TrackerConfig) -> Vec<Track> {
    if observations.is_empty() {
        return Vec::new();
    }
    let mut by_frame: alloc::collections::BTreeMap<FrameTime, Vec<WorldObservation>> =
        alloc::collections::BTreeMap::new();
    for obs in observations {
        by_frame.entry(obs.t).or_default().push(obs.clone());
    }
    let (&first, _) = by_frame.first_key_value().unwrap();
    let (&last, _) = by_frame.last_key_value().unwrap();
    let mut tracker = WorldTracker::new(cfg.clone());
    let empty = Vec::new();
    for t in first..=last {
        let frame = by_frame.get(&t).unwrap_or(&empty);
        tracker.step(t, frame).expect("contiguous frame loop");
    }
    tracker.finish()
}

/// Frame-by-frame Hungarian baseline without any motion model.
///
/// Chains observations by gated Hungarian on the Euclidean distance to the
/// chain's last location. A chain that misses one frame gets a second
/// chance at the next frame (with a doubled gate, two frames of walking);
/// on success the missing state is filled by linear interpolation. Longer
/// gaps end the chain. No Kalman, no smoothing.
pub fn baseline_hungarian_run(observations: &[WorldObservation], gate: f64) -> Vec<Track> {
    struct Chain {
        id: u64,
        states: Vec<TrackState>,
        last_t: FrameTime,
        done: bool,
    }
    impl Chain {
        fn last_position(&self) -> Vec2 {
            self.states.last().unwrap().position
        }
    }

    if observations.is_empty() {
        return Vec::new();
    }
    let mut by_frame: alloc::collections::BTreeMap<FrameTime, Vec<&WorldObservation>> =
        alloc::collections::BTreeMap::new();
    for obs in observations {
        by_frame.entry(obs.t).or_default().push(obs);
    }

    let state_from = |t: FrameTime, obs: &WorldObservation, prev: Option<&TrackState>| {
        let velocity = match prev {
            Some(p) if t > p.t => (obs.location - p.position) / (t - p.t) as f64,
            _ => Vec2::zeros(),
        };
        let orientation = obs
            .orientation
            .or(prev.map(|p| p.orientation))
            .unwrap_or_else(|| UnitVec2::new_normalize(Vec2::new(0.0, 1.0)));
        TrackState {
            t,
            position: obs.location,
            velocity,
            orientation,
            angular_velocity: Vec2::zeros(),
            covariance: Matrix4::zeros(),
            observed: true,
        }
    };

    let mut chains: Vec<Chain> = Vec::new();
    let mut next_id = 0u64;
    for (&t, frame) in &by_frame {
        let candidates: Vec<usize> = chains
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.done && t - c.last_t <= 2)
            .map(|(i, _)| i)
            .collect();
        let costs = CostMatrix::from_fn(candidates.len(), frame.len(), |row, j| {
            let chain = &chains[candidates[row]];
            let d = (chain.last_position() - frame[j].location).norm();
            let row_gate = gate * (t - chain.last_t) as f64;
            (d <= row_gate).then_some(d)
        })
        .expect("distances are nonnegative");
        let solution = assignment::solve(&costs);

        let mut taken = vec![false; frame.len()];
        for &(row, j) in &solution.pairs {
            taken[j] = true;
            let chain = &mut chains[candidates[row]];
            let obs = frame[j];
            if t - chain.last_t == 2 {
                // bridge the single missing frame by interpolation
                let prev = chain.states.last().unwrap().clone();
                let mid = TrackState {
                    t: t - 1,
                    position: 0.5 * (prev.position + obs.location),
                    velocity: (obs.location - prev.position) / 2.0,
                    orientation: prev.orientation,
                    angular_velocity: Vec2::zeros(),
                    covariance: Matrix4::zeros(),
                    observed: false,
                };
                chain.states.push(mid);
            }
            let prev = chain.states.last().cloned();
            chain.states.push(state_from(t, obs, prev.as_ref()));
            chain.last_t = t;
        }
        // chains that exhausted their second chance end now
        for chain in chains.iter_mut() {
            if !chain.done && t - chain.last_t >= 2 {
                chain.done = true;
            }
        }
        for (j, obs) in frame.iter().enumerate() {
            if !taken[j] {
                chains.push(Chain {
                    id: next_id,
                    states: vec![state_from(t, obs, None)],
                    last_t: t,
                    done: false,
                });
                next_id += 1;
            }
        }
    }

    chains
        .into_iter()
        .map(|c| Track {
            track_id: c.id,
            states: c.states,
            status: TrackStatus::Finished,
        })
        .collect()
}
