use netslice_core::agents::ActorTraining;
use netslice_core::jammer::{location_objectives, JammerAgent, JammerConfig, JammerKind, JammerPhase};
use netslice_core::radio::{Geometry, Position, RadioParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn one_station() -> Geometry {
    Geometry {
        bs_positions: vec![Position::new(0.7, 0.0)],
        user_positions: Vec::new(),
        jammer_position: None,
        coverage_radius_km: 2.5,
    }
}

#[test]
fn single_station_optimum_sits_on_it() {
    let line: Vec<Position> = (0..15).map(|i| Position::new(-1.05 + 0.25 * i as f64, 0.0)).collect();
    let params = RadioParams { link_gain: 3.0e5, ..Default::default() };
    let obj = location_objectives(&one_station(), &params, &line, 4000, &mut ChaCha8Rng::seed_from_u64(31)).unwrap();
    let best = (0..obj.len()).fold(0, |b, i| if obj[i] < obj[b] { i } else { b });
    assert!((line[best].x - 0.7).abs() < 0.13, "best at {:?}", line[best]);
}

#[test]
fn silent_jammer_makes_position_irrelevant() {
    let cands = vec![Position::new(-2.0, 1.0), Position::new(0.7, 0.0), Position::new(2.0, -2.0)];
    let params = RadioParams { link_gain: 3.0e5, jam_power_to_noise: 1e-12, ..Default::default() };
    let obj = location_objectives(&one_station(), &params, &cands, 2000, &mut ChaCha8Rng::seed_from_u64(32)).unwrap();
    let spread =
        obj.iter().copied().fold(f64::NEG_INFINITY, f64::max) - obj.iter().copied().fold(f64::INFINITY, f64::min);
    assert!(spread < 1e-6 * obj[0], "{obj:?}");
}

fn agent(kind: JammerKind) -> JammerAgent {
    let cfg = JammerConfig { kind, max_channels: 2, channels_per_attack: 2, start_slot: 0, ..Default::default() };
    JammerAgent::new(cfg, 4, 1000, ActorTraining::Shared { zeta: 0.0 }, 1, &mut ChaCha8Rng::seed_from_u64(33)).unwrap()
}

#[test]
fn last_interference_follows_the_loudest_channels() {
    let mut j = agent(JammerKind::LastInterference);
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    assert_eq!(j.phase(0), JammerPhase::Jam);
    j.choose(0, 0, &[1.0], None, &mut rng).unwrap();
    let out = j.listen(1, &[5.0, 1.0, 3.0, 2.0]).unwrap();
    assert!(out.reward <= 0.0);
    assert_eq!(j.choose(2, 0, &[1.0], None, &mut rng).unwrap(), vec![true, false, true, false]);
}

#[test]
fn equal_max_rates_jam_uniformly() {
    let mut j = agent(JammerKind::MaxRate);
    let mut rng = ChaCha8Rng::seed_from_u64(35);
    let mut counts = [0usize; 4];
    let rounds = 20_000;
    for r in 0..rounds {
        let t = 2 * r as u64;
        let a = j.choose(t, 0, &[1.0], Some(&[1.5; 4]), &mut rng).unwrap();
        assert_eq!(a.iter().filter(|x| **x).count(), 2);
        for (c, on) in a.iter().enumerate() {
            counts[c] += usize::from(*on);
        }
        j.listen(t + 1, &[1.0; 4]);
    }
    for n in counts {
        assert!((n as f64 / rounds as f64 - 0.5).abs() < 0.02, "{counts:?}");
    }
}

#[test]
fn jammer_exploration_decays_linearly() {
    let mut cfg = JammerConfig { start_slot: 100, ..Default::default() };
    cfg.eps_start = 1.0;
    cfg.eps_end = 0.01;
    let j = JammerAgent::new(cfg, 8, 1100, ActorTraining::Shared { zeta: 0.0 }, 1, &mut ChaCha8Rng::seed_from_u64(36))
        .unwrap();
    assert_eq!(j.epsilon(100), 1.0);
    assert!((j.epsilon(600) - 0.505).abs() < 1e-12);
    assert_eq!(j.epsilon(1100), 0.01);
    assert_eq!(j.phase(99), JammerPhase::Warmup);
    assert_eq!(j.phase(101), JammerPhase::Listen);
}
