use std::collections::{HashSet, VecDeque};
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::dual_reward;
use crate::neural::{Adam, Checkpoint, Ffn, Parametric};
use crate::traffic::{ActionMatrix, RequestId};

use super::observation::{ObservationBundle, ObservationDims, StationObservation};
use super::pointer::PointerNet;

/// `delta = R + gamma * V(next) - V(prev)`.
pub fn critic_td(reward: f64, gamma: f64, v_next: f64, v_prev: f64) -> f64 {
    reward + gamma * v_next - v_prev
}

/// Number of positions set in both binary actions.
pub fn overlap(a: &[bool], b: &[bool]) -> usize {
    a.iter().zip(b).filter(|(x, y)| **x && **y).count()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CriticKind {
    /// One critic over all stations, trained on the global reward.
    Centralized,
    /// One critic per station, trained on its local reward.
    Independent,
}

/// How an ensemble of actors shares experience.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ActorTraining {
    /// Every policy trains on every record, with a correlation penalty `zeta`.
    Shared { zeta: f64 },
    /// Each policy trains only on records it produced.
    Isolated,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LearnerConfig {
    pub hidden: usize,
    pub critic_hidden: usize,
    pub gamma: f64,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub batch_size: usize,
    pub train_period: u64,
    pub replay_capacity: usize,
    pub reward_scale: f64,
    /// Global-norm gradient clip; zero disables.
    pub grad_clip: f64,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig {
            hidden: 70,
            critic_hidden: 70,
            gamma: 0.9,
            actor_lr: 1e-3,
            critic_lr: 1e-3,
            batch_size: 10,
            train_period: 10,
            replay_capacity: 1000,
            reward_scale: 0.1,
            grad_clip: 5.0,
        }
    }
}

/// Fixed-capacity ring buffer with uniform sampling.
#[derive(Clone, Debug)]
pub struct ReplayBuffer<T> {
    capacity: usize,
    items: VecDeque<T>,
}

impl<T> ReplayBuffer<T> {
    pub fn new(capacity: usize) -> Self {
        ReplayBuffer { capacity: capacity.max(1), items: VecDeque::with_capacity(capacity.max(1)) }
    }

    pub fn push(&mut self, item: T) {
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back(item);
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.items.iter()
    }

    /// Draws `n` items with replacement.
    pub fn sample<'a, R: Rng + ?Sized>(&'a self, rng: &mut R, n: usize) -> Vec<&'a T> {
        if self.items.is_empty() {
            return Vec::new();
        }
        (0..n).map(|_| &self.items[rng.random_range(0..self.items.len())]).collect()
    }
}

/// One station's decision in one slot.
#[derive(Clone, Debug)]
pub struct Decision {
    pub bs: usize,
    pub policy: usize,
    pub obs: StationObservation,
    pub action: ActionMatrix,
    /// Policy mix in force when the decision was made.
    pub sigma: Vec<f64>,
}

/// A finished training sample.
#[derive(Clone, Debug)]
pub struct Record {
    pub slot: u64,
    pub decision: Arc<Decision>,
    pub critic: usize,
    pub prev: Arc<Vec<f64>>,
    pub next: Arc<Vec<f64>>,
    pub reward: f64,
}

#[derive(Clone, Debug)]
struct PendingSlot {
    slot: u64,
    decisions: Vec<Arc<Decision>>,
    prev: Vec<Arc<Vec<f64>>>,
    next: Option<Vec<Arc<Vec<f64>>>>,
    outstanding: HashSet<RequestId>,
    reward: Vec<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TrainStats {
    pub mean_td: f64,
    pub mean_sq_td: f64,
    pub samples: usize,
}

/// Pointer-network actors with one or more value critics, trained from a
/// replay buffer of samples whose rewards arrive once every request present
/// at decision time has resolved.
#[derive(Clone, Debug)]
pub struct SlicingLearner {
    pub cfg: LearnerConfig,
    pub critic_kind: CriticKind,
    pub training: ActorTraining,
    pub actors: Vec<PointerNet<f64>>,
    pub critics: Vec<Ffn<f64>>,
    actor_opts: Vec<Adam<f64>>,
    critic_opts: Vec<Adam<f64>>,
    num_bs: usize,
    replay: ReplayBuffer<Record>,
    own: Vec<ReplayBuffer<Record>>,
    pending: VecDeque<PendingSlot>,
}

fn clip(grads: &mut [f64], max_norm: f64) {
    if max_norm <= 0.0 {
        return;
    }
    let norm = grads.iter().map(|g| g * g).sum::<f64>().sqrt();
    if norm > max_norm {
        let s = max_norm / norm;
        grads.iter_mut().for_each(|g| *g *= s);
    }
}

impl SlicingLearner {
    pub fn new<R: Rng + ?Sized>(
        dims: ObservationDims,
        num_bs: usize,
        critic_kind: CriticKind,
        training: ActorTraining,
        num_policies: usize,
        cfg: LearnerConfig,
        rng: &mut R,
    ) -> Self {
        let actors: Vec<PointerNet<f64>> =
            (0..num_policies.max(1)).map(|_| PointerNet::new(dims, cfg.hidden, rng)).collect();
        let (n_critics, critic_in) = match critic_kind {
            CriticKind::Centralized => (1, dims.critic_part() * num_bs),
            CriticKind::Independent => (num_bs, dims.critic_part()),
        };
        let critics: Vec<Ffn<f64>> =
            (0..n_critics).map(|_| Ffn::new(&[critic_in, cfg.critic_hidden, 1], rng)).collect();
        SlicingLearner {
            actor_opts: actors.iter().map(|a| Adam::for_model(a, cfg.actor_lr)).collect(),
            critic_opts: critics.iter().map(|c| Adam::for_model(c, cfg.critic_lr)).collect(),
            own: (0..actors.len()).map(|_| ReplayBuffer::new(cfg.replay_capacity)).collect(),
            replay: ReplayBuffer::new(cfg.replay_capacity),
            pending: VecDeque::new(),
            actors,
            critics,
            critic_kind,
            training,
            num_bs,
            cfg,
        }
    }

    pub fn num_policies(&self) -> usize {
        self.actors.len()
    }

    pub fn replay_len(&self) -> usize {
        self.replay.len()
    }

    pub fn own_replay(&self, policy: usize) -> &ReplayBuffer<Record> {
        &self.own[policy]
    }

    pub fn pending_len(&self) -> usize {
        self.pending.len()
    }

    /// Greedy actor output for one station.
    pub fn act(&self, policy: usize, obs: &StationObservation, n_c: usize) -> Result<ActionMatrix> {
        Ok(self.actors[policy].forward(obs)?.greedy(n_c))
    }

    fn critic_inputs(&self, bundle: &ObservationBundle) -> Vec<Arc<Vec<f64>>> {
        match self.critic_kind {
            CriticKind::Centralized => vec![Arc::new(bundle.global_critic_input())],
            CriticKind::Independent => bundle.stations.iter().map(|s| Arc::new(s.critic.clone())).collect(),
        }
    }

    /// Supplies the successor observation of the most recent recorded slot.
    pub fn observe(&mut self, bundle: &ObservationBundle) {
        let inputs = self.critic_inputs(bundle);
        if let Some(last) = self.pending.back_mut() {
            if last.next.is_none() {
                last.next = Some(inputs);
            }
        }
        self.flush();
    }

    /// Stores a slot's decisions until their rewards are known. `present[b]`
    /// lists the requests at station `b` when the decisions were made.
    pub fn record(
        &mut self,
        slot: u64,
        bundle: &ObservationBundle,
        decisions: Vec<Decision>,
        present: &[Vec<RequestId>],
    ) {
        if decisions.is_empty() {
            return;
        }
        let outstanding: HashSet<RequestId> = present.iter().flatten().copied().collect();
        self.pending.push_back(PendingSlot {
            slot,
            decisions: decisions.into_iter().map(Arc::new).collect(),
            prev: self.critic_inputs(bundle),
            next: None,
            outstanding,
            reward: vec![0.0; self.num_bs],
        });
    }

    /// Credits a resolved request to every waiting sample that saw it.
    pub fn complete(&mut self, bs: usize, id: RequestId, reward: f64) {
        for p in self.pending.iter_mut() {
            if p.outstanding.remove(&id) {
                p.reward[bs] += reward;
            }
        }
        self.flush();
    }

    fn flush(&mut self) {
        let mut i = 0;
        while i < self.pending.len() {
            let ready = self.pending[i].outstanding.is_empty() && self.pending[i].next.is_some();
            if !ready {
                i += 1;
                continue;
            }
            let p = self.pending.remove(i).expect("index in range");
            let next = p.next.expect("checked above");
            let total: f64 = p.reward.iter().sum();
            for d in p.decisions {
                let (critic, reward) = match self.critic_kind {
                    CriticKind::Centralized => (0, total),
                    CriticKind::Independent => (d.bs, p.reward[d.bs]),
                };
                let rec = Record {
                    slot: p.slot,
                    critic,
                    prev: p.prev[critic].clone(),
                    next: next[critic].clone(),
                    reward,
                    decision: d,
                };
                if let ActorTraining::Isolated = self.training {
                    self.own[rec.decision.policy].push(rec.clone());
                }
                self.replay.push(rec);
            }
        }
    }

    pub fn value(&self, critic: usize, input: &[f64]) -> Result<f64> {
        Ok(self.critics[critic].predict(input)?[0])
    }

    pub fn td_error(&self, rec: &Record) -> Result<f64> {
        let v_prev = self.value(rec.critic, &rec.prev)?;
        let v_next = self.value(rec.critic, &rec.next)?;
        Ok(critic_td(rec.reward * self.cfg.reward_scale, self.cfg.gamma, v_next, v_prev))
    }

    /// One critic pass and one actor pass over a sampled mini-batch.
    pub fn train<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<TrainStats> {
        if self.replay.len() < self.cfg.batch_size || self.cfg.batch_size == 0 {
            return Ok(TrainStats::default());
        }
        let batch: Vec<Record> = self.replay.sample(rng, self.cfg.batch_size).into_iter().cloned().collect();
        let deltas: Vec<f64> = batch.iter().map(|r| self.td_error(r)).collect::<Result<_>>()?;

        match self.training {
            ActorTraining::Shared { zeta } => self.train_shared(&batch, &deltas, zeta)?,
            ActorTraining::Isolated => {
                for e in 0..self.actors.len() {
                    if self.own[e].len() < self.cfg.batch_size {
                        continue;
                    }
                    let own: Vec<Record> = self.own[e].sample(rng, self.cfg.batch_size).into_iter().cloned().collect();
                    let d: Vec<f64> = own.iter().map(|r| self.td_error(r)).collect::<Result<_>>()?;
                    self.train_policy_on(e, &own, &d)?;
                }
            }
        }
        self.train_critics(&batch, &deltas)?;

        let n = deltas.len() as f64;
        Ok(TrainStats {
            mean_td: deltas.iter().sum::<f64>() / n,
            mean_sq_td: deltas.iter().map(|d| d * d).sum::<f64>() / n,
            samples: deltas.len(),
        })
    }

    fn train_critics(&mut self, batch: &[Record], deltas: &[f64]) -> Result<()> {
        let mut grads: Vec<Vec<f64>> = self.critics.iter().map(|c| c.zero_grads()).collect();
        let mut counts = vec![0usize; self.critics.len()];
        for (rec, &delta) in batch.iter().zip(deltas) {
            let net = &self.critics[rec.critic];
            let cache = net.forward(&rec.prev)?;
            net.backward(&cache, &[-delta], &mut grads[rec.critic])?;
            counts[rec.critic] += 1;
        }
        for (i, g) in grads.iter_mut().enumerate() {
            if counts[i] == 0 {
                continue;
            }
            g.iter_mut().for_each(|x| *x /= counts[i] as f64);
            clip(g, self.cfg.grad_clip);
            self.critic_opts[i].step_model(&mut self.critics[i], g)?;
        }
        Ok(())
    }

    fn train_policy_on(&mut self, e: usize, batch: &[Record], deltas: &[f64]) -> Result<()> {
        let mut grads = self.actors[e].zero_grads();
        for (rec, &delta) in batch.iter().zip(deltas) {
            if delta == 0.0 {
                continue;
            }
            let d = &rec.decision;
            let pass = self.actors[e].forward(&d.obs)?;
            self.actors[e].accumulate_policy_grad(&pass, &d.action, delta, &mut grads)?;
        }
        self.apply_actor(e, grads, batch.len())
    }

    fn train_shared(&mut self, batch: &[Record], deltas: &[f64], zeta: f64) -> Result<()> {
        let e_count = self.actors.len();
        let mut grads: Vec<Vec<f64>> = self.actors.iter().map(|a| a.zero_grads()).collect();
        for (rec, &delta) in batch.iter().zip(deltas) {
            let d = &rec.decision;
            let n_c = d.action.ones();
            let passes: Vec<_> = self.actors.iter().map(|a| a.forward(&d.obs)).collect::<Result<_>>()?;
            let greedy: Vec<Vec<bool>> = if e_count > 1 && zeta != 0.0 {
                passes.iter().map(|p| p.greedy(n_c).flatten()).collect()
            } else {
                Vec::new()
            };
            for e in 0..e_count {
                let mut adv = delta;
                if e_count > 1 && zeta != 0.0 {
                    let rho: Vec<f64> = greedy.iter().map(|g| overlap(&greedy[e], g) as f64).collect();
                    adv = dual_reward(delta, zeta * self.cfg.reward_scale, &d.sigma, &rho, e);
                }
                if adv != 0.0 {
                    self.actors[e].accumulate_policy_grad(&passes[e], &d.action, adv, &mut grads[e])?;
                }
            }
        }
        for (e, g) in grads.into_iter().enumerate() {
            self.apply_actor(e, g, batch.len())?;
        }
        Ok(())
    }

    fn apply_actor(&mut self, e: usize, mut grads: Vec<f64>, n: usize) -> Result<()> {
        if grads.iter().all(|g| *g == 0.0) {
            return Ok(());
        }
        grads.iter_mut().for_each(|g| *g /= n.max(1) as f64);
        clip(&mut grads, self.cfg.grad_clip);
        self.actor_opts[e].step_model(&mut self.actors[e], &grads)
    }

    /// Copies policy `from` into every other policy and jitters the copies.
    pub fn clone_policy<R: Rng + ?Sized>(&mut self, from: usize, jitter: f64, rng: &mut R) {
        let src = self.actors[from].params().to_vec();
        for (e, a) in self.actors.iter_mut().enumerate() {
            if e == from {
                continue;
            }
            for (p, s) in a.params_mut().iter_mut().zip(&src) {
                *p = s + jitter * (2.0 * rng.random::<f64>() - 1.0);
            }
        }
    }

    pub fn save_into(&self, ck: &mut Checkpoint, prefix: &str) {
        for (e, a) in self.actors.iter().enumerate() {
            ck.insert(&format!("{prefix}.actor.{e}"), a);
        }
        for (i, c) in self.critics.iter().enumerate() {
            ck.insert(&format!("{prefix}.critic.{i}"), c);
        }
    }

    /// Restores actors (and critics when shapes agree). Missing actor slots
    /// are filled from actor 0 of the checkpoint.
    pub fn load_from(&mut self, ck: &Checkpoint, prefix: &str) -> Result<()> {
        let first = format!("{prefix}.actor.0");
        if !ck.contains(&first) {
            return Err(Error::Checkpoint(format!("missing model {first}")));
        }
        for e in 0..self.actors.len() {
            let name = format!("{prefix}.actor.{e}");
            let name = if ck.contains(&name) { name } else { first.clone() };
            ck.restore(&name, &mut self.actors[e])?;
        }
        for i in 0..self.critics.len() {
            let name = format!("{prefix}.critic.{i}");
            if ck.contains(&name) {
                // a critic of the other kind has a different input width
                let _ = ck.restore(&name, &mut self.critics[i]);
            }
        }
        Ok(())
    }
}
