//! Scenario configuration, the slot-loop simulation, metric streams and
//! table comparisons.

pub mod compare;
pub mod config;
pub mod metrics;
pub mod sim;

pub use compare::{compare, reference_cell, Cell, Comparison, Table};
pub use config::{set_dotted, JammerSetup, Scenario, VictimConfig, VictimKind};
pub use metrics::{
    completion_ratio, replay_completion_ratio, EnsembleSnapshot, MetricsLog, MovingAverage, Outcome, Phase,
    PhaseSummary, SlotRow, Summary,
};
pub use sim::{jammer_location, JammerRuntime, Simulation, JAMMER_PREFIX, VICTIM_PREFIX};

/// Runs independent scenarios on up to `threads` worker threads, returning
/// results in input order.
pub fn run_many(scenarios: Vec<Scenario>, threads: usize) -> Vec<crate::Result<Simulation>> {
    let threads = threads.max(1);
    let jobs: Vec<(usize, Scenario)> = scenarios.into_iter().enumerate().collect();
    let mut out: Vec<Option<crate::Result<Simulation>>> = (0..jobs.len()).map(|_| None).collect();
    for chunk in jobs.chunks(threads) {
        let done: Vec<(usize, crate::Result<Simulation>)> = std::thread::scope(|scope| {
            let handles: Vec<_> = chunk
                .iter()
                .map(|(i, s)| {
                    let s = s.clone();
                    let i = *i;
                    scope.spawn(move || {
                        let r = Simulation::new(s).and_then(|mut sim| sim.run().map(|_| sim));
                        (i, r)
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("simulation thread panicked")).collect()
        });
        for (i, r) in done {
            out[i] = Some(r);
        }
    }
    out.into_iter().map(|r| r.expect("every job ran")).collect()
}
