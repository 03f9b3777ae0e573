use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::EnsembleKind;

use super::config::Scenario;
use super::metrics::Summary;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Table {
    /// Rows are jammer kinds.
    Jammers,
    /// Rows are jammer ensembles, columns victim ensembles.
    Ensembles,
}

/// Published `(average reward, completion %)` cells at `P_J = P_B`.
pub fn reference_cell(table: Table, row: &str, column: &str) -> Option<(f64, f64)> {
    match table {
        Table::Jammers => match row {
            "none" => Some((19.47, 93.33)),
            "last-interference" => Some((14.82, 82.36)),
            "next-interference" => Some((11.67, 81.34)),
            "max-rate" => Some((11.03, 76.07)),
            "actor-critic" => Some((9.16, 73.89)),
            _ => None,
        },
        Table::Ensembles => {
            let r = match row {
                "none" => [(19.90, 94.78), (20.08, 95.23), (20.07, 95.16)],
                "single" => [(10.09, 73.68), (14.96, 84.90), (11.53, 77.04)],
                "nespe" => [(9.68, 72.57), (12.22, 78.76), (11.36, 76.92)],
                "ape" => [(12.93, 80.26), (14.44, 83.55), (13.23, 80.75)],
                _ => return None,
            };
            match column {
                "single" => Some(r[0]),
                "nespe" => Some(r[1]),
                "ape" => Some(r[2]),
                _ => None,
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub row: String,
    pub column: String,
    pub runs: usize,
    pub avg_reward: f64,
    pub completion_pct: f64,
    pub reference: Option<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub table: Table,
    pub cells: Vec<Cell>,
}

fn normalized(s: &Scenario) -> Result<String> {
    let mut s = s.clone();
    s.name.clear();
    s.seed = 0;
    s.jammer_seed = 0;
    s.victim.checkpoint = None;
    s.jammer.enabled = false;
    s.jammer.agent.kind = crate::jammer::JammerKind::ActorCritic;
    s.victim.ensemble.kind = EnsembleKind::Single;
    s.jammer.ensemble.kind = EnsembleKind::Single;
    s.to_toml_string()
}

fn keys(table: Table, s: &Summary) -> (String, String) {
    let row = match table {
        Table::Jammers => s.jammer.clone(),
        Table::Ensembles => s.jammer_ensemble.clone(),
    };
    let column = match table {
        Table::Jammers => "victim".to_string(),
        Table::Ensembles => s.victim_ensemble.clone(),
    };
    (row.unwrap_or_else(|| "none".into()), column)
}

/// Groups runs into table cells, averaging test-phase metrics over seeds.
pub fn compare(table: Table, runs: &[(Scenario, Summary)]) -> Result<Comparison> {
    let Some((first, _)) = runs.first() else {
        return Ok(Comparison { table, cells: Vec::new() });
    };
    let base = normalized(first)?;
    for (s, _) in &runs[1..] {
        if normalized(s)? != base {
            return Err(Error::Mismatch(format!(
                "scenario '{}' differs from '{}' outside the compared axis",
                s.name, first.name
            )));
        }
    }
    let mut groups: BTreeMap<(String, String), Vec<&Summary>> = BTreeMap::new();
    for (_, sum) in runs {
        groups.entry(keys(table, sum)).or_default().push(sum);
    }
    let cells = groups
        .into_iter()
        .map(|((row, column), group)| {
            let n = group.len() as f64;
            Cell {
                reference: reference_cell(table, &row, &column),
                avg_reward: group.iter().map(|s| s.test.avg_reward).sum::<f64>() / n,
                completion_pct: 100.0 * group.iter().map(|s| s.test.completion_ratio).sum::<f64>() / n,
                runs: group.len(),
                row,
                column,
            }
        })
        .collect();
    Ok(Comparison { table, cells })
}

impl Comparison {
    pub fn cell(&self, row: &str, column: &str) -> Option<&Cell> {
        self.cells.iter().find(|c| c.row == row && c.column == column)
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::from(
            "| row | column | runs | avg reward | completion % | reference |\n|---|---|---|---|---|---|\n",
        );
        for c in &self.cells {
            let reference = c.reference.map_or("-".to_string(), |(r, p)| format!("{r:.2}, {p:.2}%"));
            let _ = writeln!(
                out,
                "| {} | {} | {} | {:.3} | {:.2} | {} |",
                c.row, c.column, c.runs, c.avg_reward, c.completion_pct, reference
            );
        }
        out
    }
}
