use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::agents::{BaselineKind, ExplorationSchedule, FeatureScale, LearnerConfig};
use crate::error::{Error, Result};
use crate::game::{EnsembleConfig, EnsembleKind};
use crate::jammer::{JammerConfig, LocationSearch};
use crate::radio::{Position, RadioParams};
use crate::traffic::{ArrivalParams, StationLimits};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VictimKind {
    /// Pointer actors with one critic over every station.
    Macc,
    /// Pointer actors with one critic per station on local reward.
    Iac,
    Fifo,
    HardSlicing,
    MaxRate,
    Random,
}

impl VictimKind {
    pub fn is_learned(self) -> bool {
        matches!(self, VictimKind::Macc | VictimKind::Iac)
    }

    pub fn baseline(self) -> Option<BaselineKind> {
        match self {
            VictimKind::Fifo => Some(BaselineKind::Fifo),
            VictimKind::HardSlicing => Some(BaselineKind::HardSlicing),
            VictimKind::MaxRate => Some(BaselineKind::MaxRate),
            VictimKind::Random => Some(BaselineKind::Random),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VictimConfig {
    pub kind: VictimKind,
    pub learner: LearnerConfig,
    pub exploration: ExplorationSchedule,
    pub ensemble: EnsembleConfig,
    /// Checkpoint to start from; relative paths resolve against the working directory.
    pub checkpoint: Option<String>,
    pub learn_in_train: bool,
    pub learn_in_test: bool,
}

impl Default for VictimConfig {
    fn default() -> Self {
        VictimConfig {
            kind: VictimKind::Macc,
            learner: LearnerConfig::default(),
            exploration: ExplorationSchedule::default(),
            ensemble: EnsembleConfig::default(),
            checkpoint: None,
            learn_in_train: true,
            learn_in_test: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JammerSetup {
    pub enabled: bool,
    pub agent: JammerConfig,
    pub ensemble: EnsembleConfig,
    pub search: LocationSearch,
    pub learn_in_test: bool,
    /// Capacity of the listening-difference queue used for opponent classes.
    pub difference_window: usize,
}

impl Default for JammerSetup {
    fn default() -> Self {
        JammerSetup {
            enabled: false,
            agent: JammerConfig::default(),
            ensemble: EnsembleConfig { classes: 2, policies: 2, ..Default::default() },
            search: LocationSearch::default(),
            learn_in_test: true,
            difference_window: 20,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    /// Seed of every jammer-owned random stream.
    pub jammer_seed: u64,
    pub stations: Vec<(f64, f64)>,
    pub num_users: usize,
    pub radio: RadioParams,
    pub limits: StationLimits,
    pub history_depth: usize,
    pub mobility_step_km: f64,
    pub arrivals: ArrivalParams,
    pub features: FeatureScale,
    pub train_slots: u64,
    pub test_slots: u64,
    pub ma_window: usize,
    pub check_invariants: bool,
    pub victim: VictimConfig,
    pub jammer: JammerSetup,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            name: "desk".into(),
            seed: 1,
            jammer_seed: 101,
            stations: vec![(0.0, 0.0), (2.5, 2.5), (-2.5, 2.5), (-2.5, -2.5), (2.5, -2.5)],
            num_users: 30,
            radio: RadioParams { link_gain: 3.0e5, ..Default::default() },
            limits: StationLimits { max_channels: 8, max_serving: 4, max_queue: 2 },
            history_depth: 4,
            mobility_step_km: 0.05,
            arrivals: ArrivalParams { arrival_prob: 1.0, ..Default::default() },
            features: FeatureScale::default(),
            train_slots: 10_000,
            test_slots: 20_000,
            ma_window: 500,
            check_invariants: true,
            victim: VictimConfig::default(),
            jammer: JammerSetup::default(),
        }
    }
}

/// Sets `path` (dot separated) in a TOML document. The value is parsed as a
/// TOML literal and falls back to a bare string.
pub fn set_dotted(doc: &mut toml::Table, path: &str, raw: &str) -> Result<()> {
    let value = parse_value(raw);
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(Error::Config(format!("bad override path '{path}'")));
    }
    let mut table = doc;
    for (i, key) in keys.iter().enumerate() {
        if i + 1 == keys.len() {
            table.insert((*key).to_string(), value);
            return Ok(());
        }
        let entry = table.entry((*key).to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = match entry {
            toml::Value::Table(t) => t,
            _ => return Err(Error::Config(format!("'{key}' in '{path}' is not a table"))),
        };
    }
    Ok(())
}

fn parse_value(raw: &str) -> toml::Value {
    let wrapped = format!("v = {raw}");
    match wrapped.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.to_string())),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

impl Scenario {
    /// Named starting points: `desk`, `attack` and `smoke`.
    pub fn preset(name: &str) -> Option<Self> {
        let mut s = Scenario { name: name.to_string(), ..Default::default() };
        match name {
            "desk" => {}
            "attack" => {
                let eps = s.victim.exploration.eps_end;
                s.victim.exploration.eps_start = eps;
                s.victim.learn_in_test = true;
                s.jammer.enabled = true;
            }
            "smoke" => {
                s.train_slots = 300;
                s.test_slots = 200;
                s.ma_window = 50;
                s.jammer.search.samples = 200;
            }
            _ => return None,
        }
        Some(s)
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Applies `key=value` overrides, e.g. `victim.learner.actor_lr=3e-4`.
    pub fn with_overrides<S: AsRef<str>>(&self, overrides: &[S]) -> Result<Self> {
        if overrides.is_empty() {
            return Ok(self.clone());
        }
        let mut doc: toml::Table = toml::Table::try_from(self).map_err(|e| Error::Config(e.to_string()))?;
        for o in overrides {
            let o = o.as_ref();
            let (k, v) = o.split_once('=').ok_or_else(|| Error::Config(format!("override '{o}' needs key=value")))?;
            set_dotted(&mut doc, k.trim(), v.trim())?;
        }
        let s = toml::to_string(&doc).map_err(|e| Error::Config(e.to_string()))?;
        Self::from_toml_str(&s)
    }

    pub fn station_positions(&self) -> Vec<Position> {
        self.stations.iter().map(|&(x, y)| Position::new(x, y)).collect()
    }

    pub fn total_slots(&self) -> u64 {
        self.train_slots + self.test_slots
    }

    /// Actions per station per slot, `min(N_c, N)`.
    pub fn channels_per_action(&self) -> usize {
        self.limits.max_channels.min(self.radio.num_channels)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        self.radio.validate()?;
        if self.stations.is_empty() {
            return bad("at least one station is required".into());
        }
        if self.num_users == 0 {
            return bad("num_users must be at least 1".into());
        }
        let l = self.limits;
        if l.max_channels == 0 || l.max_serving == 0 {
            return bad("N_c and N_r must be at least 1".into());
        }
        if self.history_depth == 0 {
            return bad("history_depth must be at least 1".into());
        }
        if self.ma_window == 0 {
            return bad("ma_window must be at least 1".into());
        }
        let a = &self.arrivals;
        if !(0.0..=1.0).contains(&a.arrival_prob) {
            return bad(format!("arrival_prob {} outside [0, 1]", a.arrival_prob));
        }
        for (name, (lo, hi)) in
            [("payload", a.payload_range), ("min_rate", a.min_rate_range), ("lifetime_slack", a.lifetime_slack_range)]
        {
            if lo > hi || lo < 0.0 {
                return bad(format!("{name} range ({lo}, {hi}) is invalid"));
            }
        }
        if a.payload_range.0 <= 0.0 {
            return bad("payloads must be positive".into());
        }
        for (name, e) in [("victim", &self.victim.ensemble), ("jammer", &self.jammer.ensemble)] {
            if e.kind != EnsembleKind::Single && (e.policies == 0 || e.classes == 0 || e.queue_capacity == 0) {
                return bad(format!("{name} ensemble needs policies, classes and queue capacity"));
            }
        }
        let v = &self.victim.learner;
        if self.victim.kind.is_learned() && (v.hidden == 0 || v.critic_hidden == 0 || v.train_period == 0) {
            return bad("learner sizes and train period must be positive".into());
        }
        if self.jammer.enabled {
            self.jammer.agent.validate(self.radio.num_channels)?;
        }
        Ok(())
    }
}
