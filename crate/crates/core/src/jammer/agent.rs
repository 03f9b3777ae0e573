use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::agents::{overlap, ActorTraining, ReplayBuffer};
use crate::error::{Error, Result};
use crate::game::dual_reward;
use crate::neural::{softmax, Adam, Checkpoint, Ffn, Parametric};

use super::target::{
    indicator, interpolate_target, jam_reward, listen_difference, top_k, BetaEstimator, ObservationWindow,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JammerKind {
    /// Learned policy imitating the interpolated interference target.
    ActorCritic,
    /// Learned policy whose target is the next listening vector only.
    NextInterference,
    /// Jams the loudest channels of the last listening phase.
    LastInterference,
    /// Samples channels in proportion to their best interference-free rate.
    MaxRate,
}

impl JammerKind {
    pub fn is_learned(self) -> bool {
        matches!(self, JammerKind::ActorCritic | JammerKind::NextInterference)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JammerConfig {
    pub kind: JammerKind,
    pub max_channels: usize,
    pub channels_per_attack: usize,
    pub period: usize,
    pub gamma: f64,
    pub start_slot: u64,
    /// Fixed position in km; the optimized location is used when absent.
    pub position: Option<(f64, f64)>,
    /// Displacement applied to the optimized location.
    pub offset_km: (f64, f64),
    pub actor_hidden: usize,
    pub critic_hidden: usize,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub eps_start: f64,
    pub eps_end: f64,
    pub batch_size: usize,
    pub replay_capacity: usize,
    pub reward_scale: f64,
    /// Number of recent jamming phases in the attack-difference window.
    pub beta_window: usize,
    pub initial_beta: f64,
}

impl Default for JammerConfig {
    fn default() -> Self {
        JammerConfig {
            kind: JammerKind::ActorCritic,
            max_channels: 8,
            channels_per_attack: 8,
            period: 2,
            gamma: 0.9,
            start_slot: 100,
            position: None,
            offset_km: (0.1, 0.0),
            actor_hidden: 16,
            critic_hidden: 16,
            actor_lr: 1e-3,
            critic_lr: 1e-3,
            eps_start: 1.0,
            eps_end: 0.01,
            batch_size: 10,
            replay_capacity: 500,
            reward_scale: 0.1,
            beta_window: 50,
            initial_beta: 1.0,
        }
    }
}

impl JammerConfig {
    pub fn validate(&self, num_channels: usize) -> Result<()> {
        if self.channels_per_attack > self.max_channels || self.max_channels > num_channels {
            return Err(Error::Config(format!(
                "jammer needs n_J <= N_J <= N, got {} / {} / {num_channels}",
                self.channels_per_attack, self.max_channels
            )));
        }
        if self.period < 2 {
            return Err(Error::Config("jammer period must be at least 2 slots".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum JammerPhase {
    /// Before the attack starts: listen every slot to learn the baseline.
    Warmup,
    Listen,
    Jam,
}

#[derive(Clone, Debug)]
pub struct JamSample {
    pub state: Vec<f64>,
    pub action: Vec<bool>,
    pub reward: f64,
    pub next: Vec<f64>,
    pub policy: usize,
    pub sigma: Vec<f64>,
}

#[derive(Clone, Debug)]
struct Pending {
    state: Option<Vec<f64>>,
    action: Vec<bool>,
    before: Vec<f64>,
    policy: usize,
    sigma: Vec<f64>,
}

/// What the jammer learned from the listening slot after an attack.
#[derive(Clone, Debug, PartialEq)]
pub struct JamOutcome {
    pub policy: usize,
    pub reward: f64,
    /// Summed listening difference across the attack.
    pub difference: f64,
    pub beta: f64,
}

/// Listening/jamming agent. It only ever sees its own listening vectors and
/// its own past actions.
#[derive(Clone, Debug)]
pub struct JammerAgent {
    pub cfg: JammerConfig,
    pub num_channels: usize,
    pub train_slots: u64,
    pub training: ActorTraining,
    pub actors: Vec<Ffn<f64>>,
    pub critic: Ffn<f64>,
    pub beta: BetaEstimator,
    actor_opts: Vec<Adam<f64>>,
    critic_opt: Adam<f64>,
    window: ObservationWindow,
    listens: Vec<Vec<f64>>,
    pending: Option<Pending>,
    awaiting_next: Option<(Vec<f64>, Vec<bool>, f64, usize, Vec<f64>)>,
    replay: ReplayBuffer<JamSample>,
    own: Vec<ReplayBuffer<JamSample>>,
    pub learning: bool,
}

impl JammerAgent {
    pub fn new<R: Rng + ?Sized>(
        cfg: JammerConfig,
        num_channels: usize,
        train_slots: u64,
        training: ActorTraining,
        num_policies: usize,
        rng: &mut R,
    ) -> Result<Self> {
        cfg.validate(num_channels)?;
        let n_in = cfg.period * num_channels;
        let actors: Vec<Ffn<f64>> =
            (0..num_policies.max(1)).map(|_| Ffn::new(&[n_in, cfg.actor_hidden, num_channels], rng)).collect();
        let critic = Ffn::new(&[n_in, cfg.critic_hidden, 1], rng);
        Ok(JammerAgent {
            actor_opts: actors.iter().map(|a| Adam::for_model(a, cfg.actor_lr)).collect(),
            critic_opt: Adam::for_model(&critic, cfg.critic_lr),
            window: ObservationWindow::new(num_channels, cfg.period),
            beta: BetaEstimator::new(cfg.beta_window, cfg.initial_beta),
            replay: ReplayBuffer::new(cfg.replay_capacity),
            own: (0..actors.len()).map(|_| ReplayBuffer::new(cfg.replay_capacity)).collect(),
            listens: Vec::new(),
            pending: None,
            awaiting_next: None,
            learning: true,
            actors,
            critic,
            num_channels,
            train_slots,
            training,
            cfg,
        })
    }

    pub fn num_policies(&self) -> usize {
        self.actors.len()
    }

    pub fn phase(&self, t: u64) -> JammerPhase {
        if t < self.cfg.start_slot {
            JammerPhase::Warmup
        } else if (t - self.cfg.start_slot) % self.cfg.period as u64 == 0 {
            JammerPhase::Jam
        } else {
            JammerPhase::Listen
        }
    }

    /// Exploration probability at slot `t`.
    pub fn epsilon(&self, t: u64) -> f64 {
        let start = self.cfg.start_slot;
        if t >= self.train_slots || self.train_slots <= start {
            return self.cfg.eps_end;
        }
        let frac = t.saturating_sub(start) as f64 / (self.train_slots - start) as f64;
        self.cfg.eps_start + (self.cfg.eps_end - self.cfg.eps_start) * frac
    }

    pub fn replay_len(&self) -> usize {
        self.replay.len()
    }

    pub fn policy_probs(&self, policy: usize, state: &[f64]) -> Result<Vec<f64>> {
        Ok(softmax(&self.actors[policy].predict(state)?))
    }

    /// Channels to jam in a jamming slot. `max_rates` is only consulted by the
    /// max-rate baseline, which is assumed to know the channel environment.
    pub fn choose<R: Rng + ?Sized>(
        &mut self,
        t: u64,
        policy: usize,
        sigma: &[f64],
        max_rates: Option<&[f64]>,
        rng: &mut R,
    ) -> Result<Vec<bool>> {
        let n = self.num_channels;
        let k = self.cfg.channels_per_attack;
        let state = self.window.is_complete().then(|| self.window.flatten());
        if let (Some(next), Some((s, a, r, p, sg))) = (state.as_ref(), self.awaiting_next.take()) {
            let sample = JamSample { state: s, action: a, reward: r, next: next.clone(), policy: p, sigma: sg };
            if let ActorTraining::Isolated = self.training {
                self.own[p].push(sample.clone());
            }
            self.replay.push(sample);
            if self.learning && self.cfg.kind.is_learned() {
                self.train(rng)?;
            }
        }
        let last = self.listens.last().cloned().unwrap_or_else(|| vec![1.0; n]);
        let set = match self.cfg.kind {
            JammerKind::LastInterference => top_k(&last, k),
            JammerKind::MaxRate => {
                let w: Vec<f64> = match max_rates {
                    Some(r) if r.iter().any(|&x| x > 0.0) => r.to_vec(),
                    _ => vec![1.0; n],
                };
                index::sample_weighted(rng, n, |i| w[i], k)
                    .map_err(|e| Error::Config(format!("max-rate jammer weights: {e}")))?
                    .into_vec()
            }
            JammerKind::ActorCritic | JammerKind::NextInterference => match &state {
                Some(s) if rng.random::<f64>() >= self.epsilon(t) => top_k(&self.policy_probs(policy, s)?, k),
                _ => index::sample(rng, n, k).into_vec(),
            },
        };
        let action = indicator(n, &set);
        self.pending = Some(Pending { state, action: action.clone(), before: last, policy, sigma: sigma.to_vec() });
        self.window.push_jam(&action);
        Ok(action)
    }

    /// Feeds a listening vector. Returns the attack outcome when this slot
    /// follows a jamming slot.
    pub fn listen(&mut self, t: u64, listen: &[f64]) -> Option<JamOutcome> {
        let warm = self.phase(t) == JammerPhase::Warmup;
        if warm {
            if self.listens.len() >= 2 {
                let before = &self.listens[self.listens.len() - 2];
                self.beta.push_baseline(listen_difference(before, listen));
            }
        }
        let mut outcome = None;
        if let Some(p) = self.pending.take() {
            let d = listen_difference(&p.before, listen);
            let beta = match self.cfg.kind {
                JammerKind::NextInterference => 0.0,
                _ => self.beta.push_attack(d),
            };
            let target = interpolate_target(&p.before, listen, beta);
            let reward = jam_reward(&p.action, &target);
            if let Some(s) = p.state {
                self.awaiting_next = Some((s, p.action, reward, p.policy, p.sigma));
            }
            outcome = Some(JamOutcome { policy: p.policy, reward, difference: d, beta });
        }
        self.window.push_listen(listen);
        self.listens.push(listen.to_vec());
        if self.listens.len() > 2 {
            self.listens.remove(0);
        }
        outcome
    }

    pub fn train<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<()> {
        let bs = self.cfg.batch_size;
        if self.replay.len() < bs || bs == 0 {
            return Ok(());
        }
        let batch: Vec<JamSample> = self.replay.sample(rng, bs).into_iter().cloned().collect();
        let deltas: Vec<f64> = batch.iter().map(|s| self.td_error(s)).collect::<Result<_>>()?;
        match self.training {
            ActorTraining::Shared { zeta } => {
                let e_count = self.actors.len();
                let mut grads: Vec<Vec<f64>> = self.actors.iter().map(|a| a.zero_grads()).collect();
                for (s, &delta) in batch.iter().zip(&deltas) {
                    let greedy: Vec<Vec<bool>> = if e_count > 1 {
                        (0..e_count)
                            .map(|e| {
                                Ok(indicator(
                                    self.num_channels,
                                    &top_k(&self.policy_probs(e, &s.state)?, self.cfg.channels_per_attack),
                                ))
                            })
                            .collect::<Result<_>>()?
                    } else {
                        Vec::new()
                    };
                    for e in 0..e_count {
                        let mut adv = delta;
                        if e_count > 1 && zeta != 0.0 {
                            let rho: Vec<f64> = greedy.iter().map(|g| overlap(&greedy[e], g) as f64).collect();
                            adv = dual_reward(delta, zeta * self.cfg.reward_scale, &s.sigma, &rho, e);
                        }
                        self.policy_grad(e, s, adv, &mut grads[e])?;
                    }
                }
                for (e, g) in grads.into_iter().enumerate() {
                    self.apply_actor(e, g, bs)?;
                }
            }
            ActorTraining::Isolated => {
                for e in 0..self.actors.len() {
                    if self.own[e].len() < bs {
                        continue;
                    }
                    let own: Vec<JamSample> = self.own[e].sample(rng, bs).into_iter().cloned().collect();
                    let mut g = self.actors[e].zero_grads();
                    for s in &own {
                        let delta = self.td_error(s)?;
                        self.policy_grad(e, s, delta, &mut g)?;
                    }
                    self.apply_actor(e, g, bs)?;
                }
            }
        }
        let mut g = self.critic.zero_grads();
        for (s, &delta) in batch.iter().zip(&deltas) {
            let cache = self.critic.forward(&s.state)?;
            self.critic.backward(&cache, &[-delta], &mut g)?;
        }
        g.iter_mut().for_each(|x| *x /= bs as f64);
        self.critic_opt.step_model(&mut self.critic, &g)?;
        Ok(())
    }

    pub fn td_error(&self, s: &JamSample) -> Result<f64> {
        let v = self.critic.predict(&s.state)?[0];
        let v_next = self.critic.predict(&s.next)?[0];
        Ok(s.reward * self.cfg.reward_scale + self.cfg.gamma * v_next - v)
    }

    /// Accumulates the gradient of `-adv * sum_{c in set} log p_c`.
    fn policy_grad(&self, e: usize, s: &JamSample, adv: f64, grads: &mut [f64]) -> Result<()> {
        if adv == 0.0 {
            return Ok(());
        }
        let net = &self.actors[e];
        let cache = net.forward(&s.state)?;
        let p = softmax(cache.output());
        let chosen = s.action.iter().filter(|a| **a).count() as f64;
        let dy: Vec<f64> =
            p.iter().zip(&s.action).map(|(&pi, &a)| -adv * (if a { 1.0 } else { 0.0 } - chosen * pi)).collect();
        net.backward(&cache, &dy, grads)?;
        Ok(())
    }

    fn apply_actor(&mut self, e: usize, mut g: Vec<f64>, n: usize) -> Result<()> {
        if g.iter().all(|x| *x == 0.0) {
            return Ok(());
        }
        g.iter_mut().for_each(|x| *x /= n as f64);
        self.actor_opts[e].step_model(&mut self.actors[e], &g)
    }

    pub fn save_into(&self, ck: &mut Checkpoint, prefix: &str) {
        for (e, a) in self.actors.iter().enumerate() {
            ck.insert(&format!("{prefix}.actor.{e}"), a);
        }
        ck.insert(&format!("{prefix}.critic"), &self.critic);
    }

    pub fn load_from(&mut self, ck: &Checkpoint, prefix: &str) -> Result<()> {
        let first = format!("{prefix}.actor.0");
        for e in 0..self.actors.len() {
            let name = format!("{prefix}.actor.{e}");
            let name = if ck.contains(&name) { name } else { first.clone() };
            ck.restore(&name, &mut self.actors[e])?;
        }
        ck.restore(&format!("{prefix}.critic"), &mut self.critic)
    }
}
