use std::collections::HashSet;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::agents::{
    baseline_action, max_rate_action, random_action, ActionMode, CriticKind, Decision, ObservationBundle,
    ObservationDims, SlicingLearner,
};
use crate::error::{Error, Result};
use crate::game::{classify_victim, DifferenceQueue, EnsembleController, EnsembleKind};
use crate::jammer::{optimize_location, JammerAgent, JammerPhase};
use crate::neural::Checkpoint;
use crate::radio::{Geometry, Position, RadioEnv, TxMap};
use crate::traffic::{move_users, place_users, ActionMatrix, BaseStation, RequestId, RequestSource, RequestStatus};

use super::config::{Scenario, VictimKind};
use super::metrics::{EnsembleSnapshot, MetricsLog, Outcome, Phase, SlotRow, Summary};

pub const VICTIM_PREFIX: &str = "victim";
pub const JAMMER_PREFIX: &str = "jammer";

#[derive(Clone, Debug)]
struct Streams {
    fading: ChaCha8Rng,
    mobility: ChaCha8Rng,
    traffic: ChaCha8Rng,
    agent: ChaCha8Rng,
    explore: ChaCha8Rng,
    ensemble: ChaCha8Rng,
    jam_fading: ChaCha8Rng,
    jammer: ChaCha8Rng,
    jammer_ensemble: ChaCha8Rng,
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(id);
    r
}

impl Streams {
    fn new(seed: u64, jammer_seed: u64) -> Self {
        Streams {
            fading: stream(seed, 1),
            mobility: stream(seed, 2),
            traffic: stream(seed, 3),
            agent: stream(seed, 4),
            explore: stream(seed, 5),
            ensemble: stream(seed, 6),
            jam_fading: stream(jammer_seed, 1),
            jammer: stream(jammer_seed, 2),
            jammer_ensemble: stream(jammer_seed, 3),
        }
    }
}

#[derive(Clone, Debug)]
pub struct JammerRuntime {
    pub agent: JammerAgent,
    pub ensemble: EnsembleController,
    pub differences: DifferenceQueue,
    pub position: Position,
    jammed: Vec<bool>,
}

fn label<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        Ok(other) => other.to_string(),
        Err(_) => String::new(),
    }
}

/// Jammer location for a scenario: the configured position, or the grid
/// optimum plus the configured offset.
pub fn jammer_location(scenario: &Scenario) -> Result<Position> {
    let cfg = &scenario.jammer.agent;
    if let Some((x, y)) = cfg.position {
        return Ok(Position::new(x, y));
    }
    let geometry = Geometry {
        bs_positions: scenario.station_positions(),
        user_positions: Vec::new(),
        jammer_position: None,
        coverage_radius_km: scenario.radio.cell_radius_km,
    };
    let mut rng = stream(scenario.jammer_seed, 9);
    let (p, _) = optimize_location(&geometry, &scenario.radio, &scenario.jammer.search, &mut rng)?;
    Ok(Position::new(p.x + cfg.offset_km.0, p.y + cfg.offset_km.1))
}

/// One seeded run of the slot loop.
#[derive(Clone, Debug)]
pub struct Simulation {
    pub scenario: Scenario,
    pub env: RadioEnv,
    pub stations: Vec<BaseStation>,
    pub source: RequestSource,
    pub dims: ObservationDims,
    pub learner: Option<SlicingLearner>,
    pub ensembles: Vec<EnsembleController>,
    pub jammer: Option<JammerRuntime>,
    pub log: MetricsLog,
    pub t: u64,
    rng: Streams,
    emitted: f64,
    expected: f64,
    resolved: HashSet<RequestId>,
    violations: Vec<String>,
}

impl Simulation {
    pub fn new(scenario: Scenario) -> Result<Self> {
        scenario.validate()?;
        let s = &scenario;
        let mut rng = Streams::new(s.seed, s.jammer_seed);
        let mut geometry = Geometry {
            bs_positions: s.station_positions(),
            user_positions: Vec::new(),
            jammer_position: None,
            coverage_radius_km: s.radio.cell_radius_km,
        };
        place_users(&mut geometry, &mut rng.mobility, s.num_users);
        let jammer_pos = if s.jammer.enabled { Some(jammer_location(s)?) } else { None };
        geometry.jammer_position = jammer_pos;
        let env = RadioEnv::new(s.radio.clone(), geometry, &mut rng.fading, &mut rng.jam_fading)?;

        let n = s.radio.num_channels;
        let nb = s.stations.len();
        let stations = (0..nb).map(|b| BaseStation::new(b, s.limits, s.num_users, n, s.history_depth)).collect();
        let dims = ObservationDims::new(n, s.limits);
        let v = &s.victim;
        let learner = match v.kind {
            VictimKind::Macc | VictimKind::Iac => {
                let kind = if v.kind == VictimKind::Macc { CriticKind::Centralized } else { CriticKind::Independent };
                let mut init = stream(s.seed, 7);
                Some(SlicingLearner::new(
                    dims,
                    nb,
                    kind,
                    v.ensemble.training(),
                    v.ensemble.num_policies(),
                    v.learner.clone(),
                    &mut init,
                ))
            }
            _ => None,
        };
        let ensembles = (0..nb).map(|_| EnsembleController::new(&v.ensemble)).collect();
        let jammer = match jammer_pos {
            Some(position) => {
                let j = &s.jammer;
                let mut init = stream(s.jammer_seed, 7);
                let agent = JammerAgent::new(
                    j.agent.clone(),
                    n,
                    s.train_slots,
                    j.ensemble.training(),
                    j.ensemble.num_policies(),
                    &mut init,
                )?;
                Some(JammerRuntime {
                    agent,
                    ensemble: EnsembleController::new(&j.ensemble),
                    differences: DifferenceQueue::new(j.difference_window),
                    position,
                    jammed: vec![false; n],
                })
            }
            None => None,
        };
        let mut sim = Simulation {
            source: RequestSource::new(s.arrivals.clone(), s.num_users),
            log: MetricsLog::new(nb, s.ma_window),
            env,
            stations,
            dims,
            learner,
            ensembles,
            jammer,
            t: 0,
            rng,
            emitted: 0.0,
            expected: 0.0,
            resolved: HashSet::new(),
            violations: Vec::new(),
            scenario,
        };
        if let Some(path) = sim.scenario.victim.checkpoint.clone() {
            let ck = Checkpoint::load(Path::new(&path))?;
            sim.warm_start(&ck)?;
        }
        Ok(sim)
    }

    /// Loads victim (and, when present, jammer) parameters. Extra ensemble
    /// members start as jittered copies of the first policy.
    pub fn warm_start(&mut self, ck: &Checkpoint) -> Result<()> {
        let jitter = self.scenario.victim.ensemble.warm_start_jitter;
        if let Some(l) = self.learner.as_mut() {
            l.load_from(ck, VICTIM_PREFIX)?;
            if l.num_policies() > 1 && !ck.contains(&format!("{VICTIM_PREFIX}.actor.1")) {
                l.clone_policy(0, jitter, &mut self.rng.ensemble);
            }
        }
        if let Some(j) = self.jammer.as_mut() {
            if ck.contains(&format!("{JAMMER_PREFIX}.critic")) {
                j.agent.load_from(ck, JAMMER_PREFIX)?;
            }
        }
        Ok(())
    }

    pub fn checkpoint(&self) -> Checkpoint {
        let mut ck = Checkpoint::new();
        if let Some(l) = &self.learner {
            l.save_into(&mut ck, VICTIM_PREFIX);
        }
        if let Some(j) = &self.jammer {
            j.agent.save_into(&mut ck, JAMMER_PREFIX);
        }
        ck
    }

    pub fn violations(&self) -> &[String] {
        &self.violations
    }

    fn phase(&self, t: u64) -> Phase {
        if t < self.scenario.train_slots {
            Phase::Train
        } else {
            Phase::Test
        }
    }

    fn violation(&mut self, msg: String) {
        self.violations.push(format!("slot {}: {msg}", self.t));
    }

    /// Runs every remaining slot and returns the summary.
    pub fn run(&mut self) -> Result<Summary> {
        while self.t < self.scenario.total_slots() {
            self.step()?;
        }
        Ok(self.summary())
    }

    pub fn step(&mut self) -> Result<()> {
        let t = self.t;
        let phase = self.phase(t);
        let n = self.env.num_channels();
        let n_c = self.scenario.channels_per_action();
        let nb = self.stations.len();
        let check = self.scenario.check_invariants;
        let learning = match phase {
            Phase::Train => self.scenario.victim.learn_in_train,
            Phase::Test => self.scenario.victim.learn_in_test,
        };

        self.env.fading.evolve(&mut self.rng.fading, &mut self.rng.jam_fading);
        move_users(&mut self.env.geometry, &mut self.rng.mobility, self.scenario.mobility_step_km);
        self.env.refresh_path_loss()?;
        if check && !self.env.geometry.all_users_covered() {
            self.violation("a user left every coverage area".into());
        }
        let report = self.source.arrivals(t, &mut self.rng.traffic, &self.env.geometry, &mut self.stations);

        let bundle = ObservationBundle::observe(&self.stations, &self.dims, &self.scenario.features);
        let present: Vec<Vec<RequestId>> = self.stations.iter().map(BaseStation::present_ids).collect();
        if learning {
            if let Some(l) = self.learner.as_mut() {
                l.observe(&bundle);
            }
        }

        let kind = self.scenario.victim.kind;
        let mut actions = Vec::with_capacity(nb);
        let mut decisions = Vec::new();
        let mut chosen = vec![None; nb];
        for b in 0..nb {
            let obs = &bundle.stations[b];
            let n_r = obs.num_serving();
            let action = if n_r == 0 {
                ActionMatrix::empty(n)
            } else if let Some(base) = kind.baseline() {
                baseline_action(base, obs, n_c, &mut self.rng.agent)
            } else {
                let learner =
                    self.learner.as_ref().ok_or_else(|| Error::Config("learned victim without a learner".into()))?;
                let policy = self.ensembles[b].select(&mut self.rng.ensemble);
                let sigma = self.ensembles[b].sigma().to_vec();
                let action = match self.scenario.victim.exploration.draw(t, &mut self.rng.explore) {
                    ActionMode::Actor => learner.act(policy, obs, n_c)?,
                    ActionMode::MaxRate => max_rate_action(&obs.history, n, n_c),
                    ActionMode::Random => random_action(n_r, n, n_c, &mut self.rng.agent),
                };
                chosen[b] = Some(policy);
                if learning {
                    decisions.push(Decision { bs: b, policy, obs: obs.clone(), action: action.clone(), sigma });
                }
                action
            };
            if check {
                if let Err(e) = self.stations[b].check_constraints(&action) {
                    self.violation(e.to_string());
                }
            }
            actions.push(action);
        }

        let mut tx = TxMap::new(nb, n);
        for (b, a) in actions.iter().enumerate() {
            for (k, c) in a.entries() {
                tx.set(b, c, Some(self.stations[b].serving[k].user));
            }
        }

        let mut jam_phase = None;
        if let Some(j) = self.jammer.as_mut() {
            let p = j.agent.phase(t);
            j.jammed.iter_mut().for_each(|x| *x = false);
            if p == JammerPhase::Jam {
                j.agent.learning = phase == Phase::Train || self.scenario.jammer.learn_in_test;
                let policy = j.ensemble.select(&mut self.rng.jammer_ensemble);
                let sigma = j.ensemble.sigma().to_vec();
                let max_rates: Option<Vec<f64>> = (j.agent.cfg.kind == crate::jammer::JammerKind::MaxRate)
                    .then(|| (0..n).map(|c| self.env.max_potential_rate(c)).collect());
                j.jammed = j.agent.choose(t, policy, &sigma, max_rates.as_deref(), &mut self.rng.jammer)?;
            }
            jam_phase = Some(p);
        }
        let no_jam = vec![false; n];
        let jammed: &[bool] = self.jammer.as_ref().map_or(&no_jam, |j| &j.jammed);

        let nespe = self.scenario.victim.ensemble.kind == EnsembleKind::Nespe;
        let mut realized: Vec<Vec<f64>> = Vec::with_capacity(nb);
        let mut used: Vec<Vec<(usize, usize, f64)>> = Vec::with_capacity(nb);
        let mut classes = vec![0usize; nb];
        for (b, a) in actions.iter().enumerate() {
            let st = &self.stations[b];
            let mut r = vec![0.0; st.serving.len()];
            let mut u_list = Vec::new();
            for (k, c) in a.entries() {
                let u = st.serving[k].user;
                let rate = self.env.channel_rate(b, u, c, &tx, jammed);
                r[k] += rate;
                u_list.push((u, c, rate));
            }
            if nespe && chosen[b].is_some() {
                let queues: Vec<Vec<f64>> =
                    u_list.iter().map(|&(u, c, _)| st.history.queue(u, c).iter().copied().collect()).collect();
                let pairs: Vec<(&[f64], f64)> =
                    queues.iter().zip(&u_list).map(|(q, &(_, _, rate))| (q.as_slice(), rate)).collect();
                classes[b] = classify_victim(&pairs);
            }
            realized.push(r);
            used.push(u_list);
        }

        let mut jam_reward = None;
        if let (Some(j), Some(p)) = (self.jammer.as_mut(), jam_phase) {
            if p != JammerPhase::Jam {
                let heard = self.env.listen(&tx);
                if let Some(out) = j.agent.listen(t, &heard) {
                    let l = j.differences.classify_and_push(out.difference);
                    j.ensemble.record(out.policy, l, out.reward, &mut self.rng.jammer_ensemble);
                    jam_reward = Some(out.reward);
                }
            }
        }

        let mut completions = Vec::new();
        for b in 0..nb {
            self.stations[b].record_action(&actions[b]);
            completions.extend(self.stations[b].step_requests(&realized[b]));
            self.stations[b].history.update(&used[b]);
        }

        let mut stats = None;
        if let Some(l) = self.learner.as_mut() {
            if learning {
                l.record(t, &bundle, decisions, &present);
            }
            for c in &completions {
                if learning {
                    l.complete(c.bs, c.request.id, c.reward);
                }
            }
        }

        let mut slot_reward = 0.0;
        let mut station_reward = vec![0.0; nb];
        let (mut successes, mut failures) = (0, 0);
        for c in &completions {
            let req = &c.request;
            self.source.resolve(req.user, req.id, t);
            let success = req.status == RequestStatus::Success;
            if success {
                successes += 1;
            } else {
                failures += 1;
            }
            slot_reward += c.reward;
            station_reward[c.bs] += c.reward;
            if check {
                let want = if success { req.initial_payload } else { -req.initial_payload };
                self.emitted += c.reward;
                self.expected += want;
                if c.reward != want || self.emitted != self.expected {
                    self.violation(format!("reward conservation broken by request {}", req.id));
                }
                if !self.resolved.insert(req.id) {
                    self.violation(format!("request {} resolved twice", req.id));
                }
            }
            self.log.push_outcome(phase, Outcome { slot: t, bs: c.bs, request: req.id, success, reward: c.reward });
        }
        if check {
            let bad: Vec<RequestId> = self
                .stations
                .iter()
                .flat_map(|st| st.serving.iter().chain(st.queue.iter()))
                .filter(|r| r.payload < 0.0 || r.lifetime < 0.0)
                .map(|r| r.id)
                .collect();
            for id in bad {
                self.violation(format!("request {id} has negative payload or lifetime"));
            }
        }

        if nespe {
            for b in 0..nb {
                if let Some(e) = chosen[b] {
                    self.ensembles[b].record(e, classes[b], station_reward[b], &mut self.rng.ensemble);
                }
            }
        }

        if learning {
            if let Some(l) = self.learner.as_mut() {
                if (t + 1) % l.cfg.train_period == 0 {
                    let s = l.train(&mut self.rng.agent)?;
                    if s.samples > 0 {
                        stats = Some(s.mean_sq_td);
                    }
                }
            }
        }

        let jammed_count = self.jammer.as_ref().map_or(0, |j| j.jammed.iter().filter(|x| **x).count());
        self.log.push_slot(SlotRow {
            slot: t,
            phase,
            reward: slot_reward,
            moving_avg: 0.0,
            successes,
            failures,
            admitted: report.admitted.len(),
            denied: report.denied,
            jammed: jammed_count,
            jam_reward,
            td_sq: stats,
        });
        if (t + 1) % self.scenario.ma_window as u64 == 0 {
            self.snapshot(t);
        }
        self.t += 1;
        Ok(())
    }

    fn snapshot(&mut self, t: u64) {
        if self.scenario.victim.ensemble.kind == EnsembleKind::Nespe {
            for (b, e) in self.ensembles.iter_mut().enumerate() {
                let sigma = e.sigma().to_vec();
                let utility = e.history.averages();
                self.log.snapshots.push(EnsembleSnapshot { slot: t, owner: format!("bs{b}"), sigma, utility });
            }
        }
        if let Some(j) = self.jammer.as_mut() {
            if j.ensemble.kind == EnsembleKind::Nespe {
                let sigma = j.ensemble.sigma().to_vec();
                let utility = j.ensemble.history.averages();
                self.log.snapshots.push(EnsembleSnapshot { slot: t, owner: JAMMER_PREFIX.into(), sigma, utility });
            }
        }
    }

    pub fn summary(&self) -> Summary {
        let s = &self.scenario;
        Summary {
            scenario: s.name.clone(),
            seed: s.seed,
            victim: label(&s.victim.kind),
            jammer: self.jammer.as_ref().map(|j| label(&j.agent.cfg.kind)),
            victim_ensemble: label(&s.victim.ensemble.kind),
            jammer_ensemble: self.jammer.as_ref().map(|_| label(&s.jammer.ensemble.kind)),
            jammer_position: self.jammer.as_ref().map(|j| (j.position.x, j.position.y)),
            train: self.log.phase_summary(Phase::Train),
            test: self.log.phase_summary(Phase::Test),
            invariant_violations: self.violations.clone(),
        }
    }

    /// Writes `scenario.toml`, `metrics.csv`, `outcomes.csv`, `summary.json`,
    /// `ensembles.json` and `checkpoint.json` into `dir`.
    pub fn write_outputs(&self, dir: &Path) -> Result<Summary> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("scenario.toml"), self.scenario.to_toml_string()?)?;
        self.log.write_csv(&dir.join("metrics.csv"))?;
        self.log.write_outcomes_csv(&dir.join("outcomes.csv"))?;
        let summary = self.summary();
        std::fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;
        std::fs::write(dir.join("ensembles.json"), serde_json::to_string(&self.log.snapshots)?)?;
        self.checkpoint().save(&dir.join("checkpoint.json"))?;
        Ok(summary)
    }
}
