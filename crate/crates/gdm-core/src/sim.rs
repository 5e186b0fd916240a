//! Exact continuous-time simulation of the grouped-dispersal dynamics:
//! group release, seed diffusion, maturation, boundary reflection/killing.
//!
//! Two event schemes are provided.
//!
//! - `Thinning` (default, statistically exact): candidate maturation clocks
//!   run at the uniform rate bound per seed; a candidate is accepted with
//!   probability `lambda(x, y(t))/lambda_bar` evaluated at the current,
//!   diffused position. Release clocks are exact as release rates do not
//!   depend on position.
//! - `Algorithm1` (event rates frozen between events): the next event is
//!   drawn from rates evaluated at the current positions, applied to the
//!   pre-diffusion state, and then every seed (the newly released group
//!   included) diffuses over the waiting time. Inexact when `lambda` depends
//!   on the diffusing position, kept as a faithful reference scheme.

use crate::domain::{reflect_into, Boundary, Domain, Point};
use crate::float;
use crate::kernels::{self, KernelError};
use crate::observables::MomentSeries;
use crate::params::{DiffusionSpec, ModelParams};
use crate::population::{PlantPopulation, Seed, SeedPopulation};
use crate::rng::RngStream;
use alloc::vec::Vec;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counters {
    pub releases: u64,
    /// Total seeds deposited over all releases (sum of group sizes).
    pub released_seeds: u64,
    pub maturations: u64,
    pub kills: u64,
}

/// Full simulation state. The RNG stream is part of the state so a run is a
/// deterministic function of (initial state, config).
#[derive(Debug, Clone)]
pub struct SimState {
    pub t: f64,
    pub plants: PlantPopulation,
    pub seeds: SeedPopulation,
    pub rng: RngStream,
    pub counters: Counters,
    /// Measure weight is `1/k`.
    pub k: u64,
    n_p0: usize,
    n_s0: usize,
}

impl SimState {
    pub fn new(plants: PlantPopulation, seeds: SeedPopulation, k: u64, rng: RngStream) -> Self {
        assert!(k >= 1);
        let (n_p0, n_s0) = (plants.len(), seeds.len());
        SimState { t: 0.0, plants, seeds, rng, counters: Counters::default(), k, n_p0, n_s0 }
    }

    /// One plant at the origin, no seeds.
    pub fn singleton_at_origin(k: u64, rng: RngStream) -> Self {
        SimState::new(PlantPopulation::singleton([0.0; 2]), SeedPopulation::new(), k, rng)
    }

    pub fn n_plants(&self) -> usize {
        self.plants.len()
    }

    pub fn n_seeds(&self) -> usize {
        self.seeds.len()
    }

    /// Counting identity: every individual is accounted for by the counters.
    fn debug_check(&self) {
        debug_assert_eq!(
            self.plants.len() as u64,
            self.n_p0 as u64 + self.counters.maturations,
            "plant count disagrees with maturation counter"
        );
        debug_assert_eq!(
            self.seeds.len() as u64,
            self.n_s0 as u64 + self.counters.released_seeds
                - self.counters.maturations
                - self.counters.kills,
            "seed count disagrees with release/maturation/kill counters"
        );
    }
}

/// Stop when the time horizon is hit or the plant count reaches the target,
/// whichever happens first; at least one must be set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopRule {
    pub t_max: Option<f64>,
    pub plant_target: Option<usize>,
}

impl StopRule {
    pub fn at_time(t_max: f64) -> Self {
        StopRule { t_max: Some(t_max), plant_target: None }
    }

    pub fn at_plant_count(n: usize) -> Self {
        StopRule { t_max: None, plant_target: Some(n) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventScheme {
    Algorithm1,
    Thinning,
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub params: ModelParams,
    pub k: u64,
    pub stop: StopRule,
    /// Diffusion substep cap.
    pub dt_max: f64,
    pub scheme: EventScheme,
    /// Record a population snapshot every this many time units (t = 0
    /// included); the final state is always recorded.
    pub snapshot_every: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EventKind {
    Release { plant: usize, kappa: u64, barycenter: Point },
    Maturation { seed: usize },
    Kill { seed: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordKind {
    Release,
    Maturation,
    Kill,
}

/// Self-contained log entry (indices in a `SeedPopulation` are unstable, so
/// the entry carries the payload positions).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventRecord {
    pub t: f64,
    pub kind: RecordKind,
    /// Plant index for releases, seed slot at event time otherwise.
    pub index: usize,
    /// Group size for releases, 0 otherwise.
    pub kappa: u64,
    /// The parent plant position (release) or the seed origin.
    pub x: Point,
    /// Barycenter (release), maturation position, or boundary exit point.
    pub y: Point,
}

/// Log entry for `event`, read off the state the event is about to act on.
/// Must be taken before `apply_event` (the payload positions are gone after).
pub fn record_for(state: &SimState, event: &Event) -> EventRecord {
    match event.kind {
        EventKind::Release { plant, kappa, barycenter } => EventRecord {
            t: event.time,
            kind: RecordKind::Release,
            index: plant,
            kappa,
            x: state.plants.positions[plant],
            y: barycenter,
        },
        EventKind::Maturation { seed } => {
            let s = state.seeds.seeds[seed];
            EventRecord {
                t: event.time,
                kind: RecordKind::Maturation,
                index: seed,
                kappa: 0,
                x: s.origin,
                y: s.position,
            }
        }
        EventKind::Kill { seed } => {
            let s = state.seeds.seeds[seed];
            EventRecord {
                t: event.time,
                kind: RecordKind::Kill,
                index: seed,
                kappa: 0,
                x: s.origin,
                y: s.position,
            }
        }
    }
}

/// A seed removed by the killing boundary during a diffusion stretch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KillRecord {
    pub t: f64,
    /// Slot at removal time.
    pub index: usize,
    pub origin: Point,
    /// Substep endpoint outside the domain that triggered the removal.
    pub position: Point,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SimError {
    /// A position left the finite range (diverging user-supplied drift).
    NonFinitePosition { time: f64, origin: Point },
    Kernel(KernelError),
}

impl core::fmt::Display for SimError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SimError::NonFinitePosition { time, origin } => {
                write!(f, "seed position became non-finite at t={time} (origin {origin:?})")
            }
            SimError::Kernel(e) => write!(f, "{e}"),
        }
    }
}

impl From<KernelError> for SimError {
    fn from(e: KernelError) -> Self {
        SimError::Kernel(e)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionOutcome {
    pub kills: Vec<KillRecord>,
    /// Where the tracked slot ended up; `None` once killed.
    pub tracked: Option<usize>,
}

/// Advances every seed by Euler steps over `dt`, split into substeps of
/// length at most `dt_max`: `y <- y + a(y) h + sigma(y) sqrt(h) xi` per axis.
/// A reflecting boundary folds each substep endpoint back into the box; a
/// killing boundary removes seeds whose substep endpoint exits (reported in
/// the kill list, stamped at the substep time). Origins never move.
///
/// `tracked` names a seed slot to follow through kill compaction.
#[allow(clippy::too_many_arguments)]
pub fn diffuse(
    seeds: &mut SeedPopulation,
    t0: f64,
    dt: f64,
    dt_max: f64,
    spec: &DiffusionSpec,
    domain: &Domain,
    tracked: Option<usize>,
    rng: &mut RngStream,
) -> Result<DiffusionOutcome, SimError> {
    assert!(dt >= 0.0 && dt_max > 0.0);
    let mut out = DiffusionOutcome { kills: Vec::new(), tracked };
    if dt == 0.0 || seeds.is_empty() {
        return Ok(out);
    }
    let d = domain.dimension;
    let n_sub = ((dt / dt_max) as usize + 1).max(1);
    let h = dt / n_sub as f64;
    let sqrt_h = float::sqrt(h);
    let mut killed: Vec<usize> = Vec::new();

    for sub in 1..=n_sub {
        let t_sub = t0 + h * sub as f64;
        killed.clear();
        for (i, seed) in seeds.seeds.iter_mut().enumerate() {
            let y = &mut seed.position;
            match *spec {
                DiffusionSpec::Constant { sigma2 } => {
                    if sigma2 > 0.0 {
                        let s = float::sqrt(sigma2) * sqrt_h;
                        for axis in 0..d {
                            let xi: f64 = StandardNormal.sample(rng);
                            y[axis] += s * xi;
                        }
                    }
                }
                DiffusionSpec::Varying { drift, sigma } => {
                    let a = drift(*y);
                    let s = sigma(*y) * sqrt_h;
                    debug_assert!(s >= 0.0, "sigma must be nonnegative");
                    for axis in 0..d {
                        let xi: f64 = StandardNormal.sample(rng);
                        y[axis] += a[axis] * h + s * xi;
                    }
                }
            }
            if !y[0].is_finite() || (d == 2 && !y[1].is_finite()) {
                return Err(SimError::NonFinitePosition { time: t_sub, origin: seed.origin });
            }
            match domain.boundary {
                Boundary::Reflect => *y = reflect_into(domain, *y),
                Boundary::Kill => {
                    if !domain.contains(*y) {
                        killed.push(i);
                    }
                }
                Boundary::None => {}
            }
        }
        // descending order keeps the pending indices valid under swap_remove
        for &idx in killed.iter().rev() {
            let last = seeds.len() - 1;
            let seed = seeds.swap_remove(idx);
            out.kills.push(KillRecord {
                t: t_sub,
                index: idx,
                origin: seed.origin,
                position: seed.position,
            });
            if let Some(slot) = out.tracked {
                if slot == idx {
                    out.tracked = None;
                } else if slot == last {
                    out.tracked = Some(idx);
                }
            }
        }
    }
    Ok(out)
}

/// Draws the next event with all rates frozen at the current positions:
/// waiting time `Exp(R)` with `R = rho N_p + sum_i lambda(x_i, y_i)`, event
/// release with probability `rho N_p / R` (plant uniform, group size and
/// barycenter drawn on the spot) else maturation of a seed chosen with
/// weights `lambda_i`. Returns `None` when `R = 0` (nothing can ever fire).
///
/// Only the state's RNG is advanced; the caller applies the event and then
/// realizes the diffusion over the waiting time.
pub fn next_event_algorithm1(
    state: &mut SimState,
    config: &SimConfig,
) -> Result<Option<(f64, Event)>, SimError> {
    let params = &config.params;
    let d = params.domain.dimension;
    let release_rate = params.release_rate * state.plants.len() as f64;

    let mut cum = Vec::with_capacity(state.seeds.len());
    let mut total_seed_rate = 0.0f64;
    for seed in &state.seeds.seeds {
        total_seed_rate += params.rate.eval(seed.origin, seed.position, d);
        cum.push(total_seed_rate);
    }
    let r = release_rate + total_seed_rate;
    if r <= 0.0 {
        return Ok(None);
    }

    let e: f64 = Exp1.sample(&mut state.rng);
    let eps = e / r;
    let time = state.t + eps;
    let theta: f64 = state.rng.random();
    let kind = if theta <= release_rate / r {
        let plant = state.rng.random_range(0..state.plants.len());
        let x = state.plants.positions[plant];
        let kappa = kernels::sample_count(&params.counting, &mut state.rng);
        let barycenter = kernels::sample_displacement(
            &params.kernel,
            x,
            &params.domain,
            params.kernel_normalization,
            &mut state.rng,
        )?;
        EventKind::Release { plant, kappa, barycenter }
    } else {
        let u: f64 = state.rng.random::<f64>() * total_seed_rate;
        let seed = cum.partition_point(|&c| c <= u).min(state.seeds.len() - 1);
        EventKind::Maturation { seed }
    };
    Ok(Some((eps, Event { time, kind })))
}

/// What one thinning interval did.
#[derive(Debug, Clone, PartialEq)]
pub struct ThinningStep {
    /// Time actually consumed.
    pub dt: f64,
    /// The applied event, if the candidate fired and was accepted.
    pub event: Option<EventRecord>,
    pub kills: Vec<KillRecord>,
    /// The interval ran into `cap` before the candidate time.
    pub capped: bool,
    /// Total rate was zero; nothing advanced.
    pub exhausted: bool,
}

/// One interval of the exact scheme. Freezes the dominating rate
/// `R = rho N_p + lambda_bar N_s` at the interval start, draws the candidate
/// time and type, diffuses every seed to the decision instant, and resolves
/// the candidate there: releases always fire; a maturation candidate on a
/// killed slot is void, otherwise it is accepted with probability
/// `lambda(x, y)/lambda_bar` at the diffused position. Restarting at `cap`
/// is statistically neutral (memoryless clocks under a dominating rate that
/// only ever overestimates: seeds killed mid-interval keep phantom candidate
/// clocks whose candidates are void).
///
/// Advances `state.t` and applies the event internally.
pub fn next_event_thinning(
    state: &mut SimState,
    config: &SimConfig,
    cap: Option<f64>,
) -> Result<ThinningStep, SimError> {
    let params = &config.params;
    let lambda_bar = params
        .rate
        .bound(&params.domain)
        .expect("validated configs have a finite rate bound");
    let release_rate = params.release_rate * state.plants.len() as f64;
    let candidate_rate = lambda_bar * state.seeds.len() as f64;
    let r = release_rate + candidate_rate;
    if r <= 0.0 {
        return Ok(ThinningStep {
            dt: 0.0,
            event: None,
            kills: Vec::new(),
            capped: false,
            exhausted: true,
        });
    }

    let e: f64 = Exp1.sample(&mut state.rng);
    let mut target = state.t + e / r;
    let capped = match cap {
        Some(c) if target > c => {
            target = c;
            true
        }
        _ => false,
    };

    enum Candidate {
        Release { plant: usize },
        Maturation { slot: usize },
    }
    // the candidate draw is independent of the diffusion noise, so drawing
    // it before moving the seeds keeps the slot bookkeeping simple
    let candidate = if capped {
        None
    } else {
        let u: f64 = state.rng.random();
        Some(if u < release_rate / r {
            Candidate::Release { plant: state.rng.random_range(0..state.plants.len()) }
        } else {
            Candidate::Maturation { slot: state.rng.random_range(0..state.seeds.len()) }
        })
    };

    let tracked = match candidate {
        Some(Candidate::Maturation { slot }) => Some(slot),
        _ => None,
    };
    let dt = target - state.t;
    let outcome = diffuse(
        &mut state.seeds,
        state.t,
        dt,
        config.dt_max,
        &params.diffusion,
        &params.domain,
        tracked,
        &mut state.rng,
    )?;
    state.counters.kills += outcome.kills.len() as u64;
    state.t = target;

    let event = match candidate {
        None => None,
        Some(Candidate::Release { plant }) => {
            let x = state.plants.positions[plant];
            let kappa = kernels::sample_count(&params.counting, &mut state.rng);
            let barycenter = kernels::sample_displacement(
                &params.kernel,
                x,
                &params.domain,
                params.kernel_normalization,
                &mut state.rng,
            )?;
            let ev = Event {
                time: target,
                kind: EventKind::Release { plant, kappa, barycenter },
            };
            let rec = record_for(state, &ev);
            apply_event(state, &ev);
            Some(rec)
        }
        Some(Candidate::Maturation { .. }) => match outcome.tracked {
            None => None, // the candidate seed was killed mid-interval
            Some(slot) => {
                let seed = state.seeds.seeds[slot];
                let lam = params.rate.eval(seed.origin, seed.position, params.domain.dimension);
                debug_assert!(lam <= lambda_bar * (1.0 + 1e-12), "rate bound violated");
                let u: f64 = state.rng.random();
                if u * lambda_bar < lam {
                    let ev = Event { time: target, kind: EventKind::Maturation { seed: slot } };
                    let rec = record_for(state, &ev);
                    apply_event(state, &ev);
                    Some(rec)
                } else {
                    None
                }
            }
        },
    };
    state.debug_check();
    Ok(ThinningStep { dt, event, kills: outcome.kills, capped, exhausted: false })
}

/// Applies an already-drawn event to the populations and counters. Does not
/// touch `state.t`; the caller owns the clock.
pub fn apply_event(state: &mut SimState, event: &Event) {
    match event.kind {
        EventKind::Release { plant, kappa, barycenter } => {
            debug_assert!(plant < state.plants.len());
            let origin = state.plants.positions[plant];
            for _ in 0..kappa {
                state.seeds.push(Seed { origin, position: barycenter });
            }
            state.counters.releases += 1;
            state.counters.released_seeds += kappa;
        }
        EventKind::Maturation { seed } => {
            let s = state.seeds.swap_remove(seed);
            state.plants.positions.push(s.position);
            state.counters.maturations += 1;
        }
        EventKind::Kill { seed } => {
            state.seeds.swap_remove(seed);
            state.counters.kills += 1;
        }
    }
    state.debug_check();
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub plants: Vec<Point>,
    pub seeds: Vec<Seed>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopCause {
    TimeMax,
    PlantTarget,
    /// Total rate hit zero with no time horizon to run out.
    Absorbed,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub snapshots: Vec<Snapshot>,
    pub events: Vec<EventRecord>,
    pub moments: MomentSeries,
    pub stop: StopCause,
    pub final_state: SimState,
}

/// Event log, snapshots, and the counting series of a run. Counts follow the
/// event timeline (an event takes effect at its stamped time). Under
/// `Algorithm1` that differs from state mutation order: the event mutates
/// the state before the interval's diffusion is realized but is stamped at
/// the interval end, so interval kills share the event's stamp.
struct RunSink {
    records: Vec<EventRecord>,
    snapshots: Vec<Snapshot>,
    moments: MomentSeries,
    n_p: u64,
    n_s: u64,
}

impl RunSink {
    fn new(state: &SimState) -> Self {
        let mut moments = MomentSeries::new(1.0 / state.k as f64);
        let (n_p, n_s) = (state.plants.len() as u64, state.seeds.len() as u64);
        moments.push(state.t, n_p, n_s);
        RunSink { records: Vec::new(), snapshots: Vec::new(), moments, n_p, n_s }
    }

    fn kill(&mut self, k: &KillRecord, stamp: Option<f64>) {
        let t = stamp.unwrap_or(k.t);
        self.records.push(EventRecord {
            t,
            kind: RecordKind::Kill,
            index: k.index,
            kappa: 0,
            x: k.origin,
            y: k.position,
        });
        self.n_s -= 1;
        self.moments.push(t, self.n_p, self.n_s);
    }

    fn event(&mut self, rec: &EventRecord) {
        match rec.kind {
            RecordKind::Release => self.n_s += rec.kappa,
            RecordKind::Maturation => {
                self.n_p += 1;
                self.n_s -= 1;
            }
            RecordKind::Kill => self.n_s -= 1,
        }
        self.records.push(*rec);
        self.moments.push(rec.t, self.n_p, self.n_s);
    }

    fn snapshot(&mut self, state: &SimState) {
        if self.snapshots.last().map(|s| s.t) == Some(state.t) {
            return;
        }
        self.snapshots.push(Snapshot {
            t: state.t,
            plants: state.plants.positions.clone(),
            seeds: state.seeds.seeds.clone(),
        });
    }
}

/// Runs the configured scheme until the stop rule fires. Snapshots land at
/// exact multiples of the cadence (the diffusion is split there, which is
/// statistically neutral). Deterministic: the same initial state and config
/// produce the identical trajectory.
pub fn run(config: &SimConfig, initial: SimState) -> Result<Trajectory, SimError> {
    assert!(config.dt_max > 0.0, "dt_max must be positive");
    assert!(
        config.stop.t_max.is_some() || config.stop.plant_target.is_some(),
        "a stop rule is required"
    );
    if let Some(t) = config.stop.t_max {
        assert!(t > initial.t, "time horizon precedes the initial time");
    }
    if let Some(every) = config.snapshot_every {
        assert!(every > 0.0);
    }

    let mut state = initial;
    let mut sink = RunSink::new(&state);
    let mut snap_idx: u64 = 0;
    if config.snapshot_every.is_some() {
        sink.snapshot(&state);
        snap_idx = 1;
    }
    let next_snap = |idx: u64| config.snapshot_every.map(|dt| dt * idx as f64);

    // diffuses to `target`, splitting at snapshot times
    fn diffuse_to(
        state: &mut SimState,
        config: &SimConfig,
        sink: &mut RunSink,
        snap_idx: &mut u64,
        target: f64,
        kill_stamp: Option<f64>,
    ) -> Result<(), SimError> {
        while state.t < target {
            let snap_t = config.snapshot_every.map(|dt| dt * *snap_idx as f64);
            let cut = match snap_t {
                Some(s) if s < target => s,
                _ => target,
            };
            let out = diffuse(
                &mut state.seeds,
                state.t,
                cut - state.t,
                config.dt_max,
                &config.params.diffusion,
                &config.params.domain,
                None,
                &mut state.rng,
            )?;
            state.counters.kills += out.kills.len() as u64;
            for k in &out.kills {
                sink.kill(k, kill_stamp);
            }
            state.t = cut;
            if Some(cut) == snap_t {
                sink.snapshot(state);
                *snap_idx += 1;
            }
        }
        state.debug_check();
        Ok(())
    }

    let plant_target_hit =
        |state: &SimState| config.stop.plant_target.is_some_and(|n| state.plants.len() >= n);

    let stop = 'outer: loop {
        if plant_target_hit(&state) {
            break StopCause::PlantTarget;
        }
        match config.scheme {
            EventScheme::Algorithm1 => {
                match next_event_algorithm1(&mut state, config)? {
                    None => match config.stop.t_max {
                        Some(t_max) => {
                            diffuse_to(&mut state, config, &mut sink, &mut snap_idx, t_max, None)?;
                            break 'outer StopCause::TimeMax;
                        }
                        None => break 'outer StopCause::Absorbed,
                    },
                    Some((_, event)) => {
                        if let Some(t_max) = config.stop.t_max {
                            if event.time > t_max {
                                // no event fires inside the horizon
                                diffuse_to(
                                    &mut state, config, &mut sink, &mut snap_idx, t_max, None,
                                )?;
                                break 'outer StopCause::TimeMax;
                            }
                        }
                        // event first, then the whole population (new group
                        // included) diffuses over the waiting time
                        let rec = record_for(&state, &event);
                        apply_event(&mut state, &event);
                        sink.event(&rec);
                        diffuse_to(
                            &mut state,
                            config,
                            &mut sink,
                            &mut snap_idx,
                            event.time,
                            Some(event.time),
                        )?;
                    }
                }
            }
            EventScheme::Thinning => {
                let cap = match (config.stop.t_max, next_snap(snap_idx)) {
                    (Some(a), Some(b)) => Some(a.min(b)),
                    (a, b) => a.or(b),
                };
                let step = next_event_thinning(&mut state, config, cap)?;
                if step.exhausted {
                    match config.stop.t_max {
                        Some(t_max) => {
                            diffuse_to(&mut state, config, &mut sink, &mut snap_idx, t_max, None)?;
                            break 'outer StopCause::TimeMax;
                        }
                        None => break 'outer StopCause::Absorbed,
                    }
                }
                for k in &step.kills {
                    sink.kill(k, None);
                }
                if let Some(rec) = &step.event {
                    sink.event(rec);
                }
                if Some(state.t) == next_snap(snap_idx) {
                    sink.snapshot(&state);
                    snap_idx += 1;
                }
            }
        }
        if let Some(t_max) = config.stop.t_max {
            if state.t >= t_max {
                break StopCause::TimeMax;
            }
        }
    };

    sink.snapshot(&state);
    debug_assert_eq!(sink.n_p, state.plants.len() as u64, "timeline counts drifted");
    debug_assert_eq!(sink.n_s, state.seeds.len() as u64, "timeline counts drifted");
    Ok(Trajectory {
        snapshots: sink.snapshots,
        events: sink.records,
        moments: sink.moments,
        stop,
        final_state: state,
    })
}
