//! Law-level checks on the event-driven simulator: waiting times, scheme
//! agreement, diffusion statistics, and the branching scaling.

use gdm_core::domain::Domain;
use gdm_core::kernels::DispersalKernel;
use gdm_core::params::{
    CountingDistribution, DiffusionSpec, MaturationRate, ModelParams, Normalization,
};
use gdm_core::population::{PlantPopulation, Seed, SeedPopulation};
use gdm_core::rng::RngStream;
use gdm_core::sim::{
    diffuse, next_event_algorithm1, run, EventScheme, RecordKind, SimConfig, SimState, StopCause,
    StopRule,
};

/// Asymptotic Kolmogorov-Smirnov coefficient at level 1e-3; conservative on
/// discrete data.
const KS_COEFF_1E3: f64 = 1.9494746035;

fn boxed_params(rate: MaturationRate) -> ModelParams {
    ModelParams {
        domain: Domain::reflecting_box(2, [-100.0, -100.0], [100.0, 100.0]),
        counting: CountingDistribution::NegativeBinomial { mu1: 1.0, mu2: 25.0 },
        kernel: DispersalKernel::exponential(5.0, 2),
        rate,
        diffusion: DiffusionSpec::Constant { sigma2: 5.0 },
        release_rate: 1.0,
        kernel_normalization: Normalization::Renormalize,
    }
}

fn config(rate: MaturationRate, scheme: EventScheme, stop: StopRule) -> SimConfig {
    SimConfig {
        params: boxed_params(rate),
        k: 1,
        stop,
        dt_max: 0.1,
        scheme,
        snapshot_every: None,
    }
}

#[test]
fn lone_plant_waits_an_exponential_unit_time() {
    let cfg = config(
        MaturationRate::Constant { value: 1.0 },
        EventScheme::Algorithm1,
        StopRule::at_time(1.0),
    );
    let n = 100_000usize;
    let mut sum = 0.0;
    for i in 0..n {
        let mut state = SimState::singleton_at_origin(1, RngStream::new(7002, i as u64));
        let (eps, event) = next_event_algorithm1(&mut state, &cfg).unwrap().unwrap();
        assert!(matches!(
            event.kind,
            gdm_core::sim::EventKind::Release { plant: 0, .. }
        ));
        sum += eps;
    }
    let mean = sum / n as f64;
    let band = 4.0 / (n as f64).sqrt();
    assert!((mean - 1.0).abs() < band, "mean wait {mean} vs 1 +- {band}");
}

/// Two-sample KS on the plant count at t = 2: the frozen-rate scheme and the
/// thinning scheme simulate the same law through different event machinery.
#[test]
fn event_schemes_agree_in_law() {
    let n = 10_000usize;
    let sample = |scheme: EventScheme, master: u64| -> Vec<f64> {
        let cfg = config(
            MaturationRate::Constant { value: 1.0 },
            scheme,
            StopRule::at_time(2.0),
        );
        let mut counts: Vec<f64> = (0..n)
            .map(|i| {
                let state = SimState::singleton_at_origin(1, RngStream::new(master, i as u64));
                let traj = run(&cfg, state).unwrap();
                assert_eq!(traj.stop, StopCause::TimeMax);
                traj.final_state.n_plants() as f64
            })
            .collect();
        counts.sort_by(f64::total_cmp);
        counts
    };
    let a = sample(EventScheme::Algorithm1, 4401);
    let b = sample(EventScheme::Thinning, 4402);
    let mut d_stat = 0.0f64;
    let mut values: Vec<f64> = a.iter().chain(&b).cloned().collect();
    values.sort_by(f64::total_cmp);
    values.dedup();
    for v in &values {
        let fa = a.partition_point(|x| x <= v) as f64 / n as f64;
        let fb = b.partition_point(|x| x <= v) as f64 / n as f64;
        d_stat = d_stat.max((fa - fb).abs());
    }
    let threshold = KS_COEFF_1E3 * (2.0 / n as f64).sqrt();
    assert!(d_stat < threshold, "KS distance {d_stat} over {threshold}");
}

#[test]
fn free_seeds_spread_at_the_configured_diffusivity() {
    let n = 100_000usize;
    let mut seeds = SeedPopulation {
        seeds: (0..n).map(|_| Seed { origin: [0.0, 0.0], position: [0.0, 0.0] }).collect(),
    };
    let mut rng = RngStream::new(88, 3);
    let spec = DiffusionSpec::Constant { sigma2: 5.0 };
    let free = Domain::all_space(2);
    let out = diffuse(&mut seeds, 0.0, 1.0, 0.25, &spec, &free, None, &mut rng).unwrap();
    assert!(out.kills.is_empty());
    for axis in 0..2 {
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for s in &seeds.seeds {
            sum += s.position[axis];
            sum_sq += s.position[axis] * s.position[axis];
        }
        let nf = n as f64;
        let mean = sum / nf;
        let var = (sum_sq - sum * sum / nf) / (nf - 1.0);
        assert!(mean.abs() < 4.0 * (5.0f64 / nf).sqrt(), "axis {axis} mean {mean}");
        let band = 4.0 * 5.0 * (2.0 / nf).sqrt();
        assert!((var - 5.0).abs() < band, "axis {axis} variance {var} vs 5 +- {band}");
    }
}

/// Reflected diffusion relaxes to the uniform law; one-sample KS at 1e-3.
#[test]
fn reflected_seeds_relax_to_uniform() {
    let n = 10_000usize;
    let mut seeds = SeedPopulation {
        seeds: (0..n).map(|_| Seed { origin: [0.3, 0.0], position: [0.3, 0.0] }).collect(),
    };
    let mut rng = RngStream::new(88, 4);
    let spec = DiffusionSpec::Constant { sigma2: 1.0 };
    let domain = Domain::reflecting_box(1, [0.0, 0.0], [1.0, 0.0]);
    diffuse(&mut seeds, 0.0, 10.0, 0.05, &spec, &domain, None, &mut rng).unwrap();
    let mut xs: Vec<f64> = seeds.seeds.iter().map(|s| s.position[0]).collect();
    xs.sort_by(f64::total_cmp);
    let mut d_stat = 0.0f64;
    for (i, x) in xs.iter().enumerate() {
        let hi = (i + 1) as f64 / n as f64 - x;
        let lo = x - i as f64 / n as f64;
        d_stat = d_stat.max(hi.max(lo));
    }
    let threshold = KS_COEFF_1E3 / (n as f64).sqrt();
    assert!(d_stat < threshold, "KS distance {d_stat} over {threshold}");
}

/// Plants are immobile and immortal: every release origin must still be a
/// plant position, to the bit, when the run ends.
#[test]
fn release_origins_persist_as_plants() {
    let cfg = config(
        MaturationRate::DistanceProportional { lambda0: 0.05 },
        EventScheme::Thinning,
        StopRule::at_plant_count(200),
    );
    let state = SimState::singleton_at_origin(1, RngStream::new(606, 0));
    let traj = run(&cfg, state).unwrap();
    assert_eq!(traj.stop, StopCause::PlantTarget);
    assert_eq!(traj.final_state.n_plants(), 200);
    let plants = &traj.final_state.plants.positions;
    for record in &traj.events {
        if record.kind == RecordKind::Release {
            assert!(
                plants.iter().any(|p| p[0] == record.x[0] && p[1] == record.x[1]),
                "release origin {:?} not among final plants",
                record.x
            );
        }
    }
    let releases = traj.events.iter().filter(|e| e.kind == RecordKind::Release).count();
    let maturations = traj.events.iter().filter(|e| e.kind == RecordKind::Maturation).count();
    assert_eq!(maturations, 199);
    assert!(releases > 0);
}

/// The same master seed and stream index must replay the identical
/// trajectory, event for event and bit for bit, under both schemes.
#[test]
fn identical_streams_replay_identical_trajectories() {
    for scheme in [EventScheme::Algorithm1, EventScheme::Thinning] {
        let cfg = config(
            MaturationRate::DistanceProportional { lambda0: 0.05 },
            scheme,
            StopRule::at_time(3.0),
        );
        let run_once = || {
            let state = SimState::singleton_at_origin(1, RngStream::new(31337, 5));
            run(&cfg, state).unwrap()
        };
        let a = run_once();
        let b = run_once();
        assert_eq!(a.events, b.events);
        assert_eq!(a.final_state.plants.positions, b.final_state.plants.positions);
        assert_eq!(a.final_state.seeds.seeds, b.final_state.seeds.seeds);
        assert_eq!(a.moments.times, b.moments.times);
    }
}

/// Independent founding families make `K * Var(N_p(t)/K)` exactly
/// K-independent; the estimates across K must agree within sampling error.
#[test]
fn plant_count_fluctuations_scale_like_independent_families() {
    let replicas = 100usize;
    let mut normalized_vars = Vec::new();
    for (slot, k) in [25usize, 100, 400].into_iter().enumerate() {
        let cfg = config(
            MaturationRate::Constant { value: 1.0 },
            EventScheme::Algorithm1,
            StopRule::at_time(2.0),
        );
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for i in 0..replicas {
            let plants = PlantPopulation::new(vec![[0.0, 0.0]; k]);
            let state = SimState::new(
                plants,
                SeedPopulation::new(),
                k as u64,
                RngStream::new(7700 + slot as u64, i as u64),
            );
            let scaled = run(&cfg, state).unwrap().final_state.n_plants() as f64 / k as f64;
            sum += scaled;
            sum_sq += scaled * scaled;
        }
        let nf = replicas as f64;
        let var = (sum_sq - sum * sum / nf) / (nf - 1.0);
        normalized_vars.push(var * k as f64);
    }
    let lo = normalized_vars.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = normalized_vars.iter().cloned().fold(0.0f64, f64::max);
    assert!(hi / lo < 2.0, "normalized variances {normalized_vars:?} spread beyond 2x");
    assert!(lo > 0.0);
}
