//! Sweep plans: the 12-parameter one-factor study and the 3^4 correlation
//! grid, plus user-defined plans loaded from JSON.

use super::SweepError;
use crate::config::HyperParams;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    /// Vary one axis at a time, all other parameters at their defaults; the
    /// shared all-defaults setting is counted once.
    OneFactor,
    /// Cartesian product over all axes.
    FullGrid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPlan {
    pub base: HyperParams,
    /// (parameter name, values) with names from [`HyperParams::SWEEP_KEYS`].
    pub axes: Vec<(String, Vec<f64>)>,
    pub mode: SweepMode,
    pub repetitions: usize,
    /// One seed per repetition.
    pub seeds: Vec<u64>,
}

/// One concrete parameter setting generated from a plan, tagged with the
/// axes on which it differs from the base.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannedSetting {
    pub params: HyperParams,
    pub swept: Vec<(String, f64)>,
}

impl SweepPlan {
    pub fn validate(&self) -> Result<(), SweepError> {
        self.base.validate()?;
        if self.repetitions < 1 {
            return Err(SweepError::InvalidPlan("repetitions must be >= 1".into()));
        }
        if self.seeds.len() != self.repetitions {
            return Err(SweepError::InvalidPlan(format!(
                "{} seeds for {} repetitions",
                self.seeds.len(),
                self.repetitions
            )));
        }
        for (name, values) in &self.axes {
            if !HyperParams::SWEEP_KEYS.contains(&name.as_str()) {
                return Err(SweepError::InvalidPlan(format!("unknown axis `{name}`")));
            }
            if values.is_empty() {
                return Err(SweepError::InvalidPlan(format!("axis `{name}` has no values")));
            }
            for &v in values {
                let mut probe = self.base.clone();
                probe.set_numeric(name, v)?;
                probe.validate()?;
            }
        }
        Ok(())
    }

    /// Expands the plan into distinct settings.
    pub fn settings(&self) -> Vec<PlannedSetting> {
        match self.mode {
            SweepMode::OneFactor => {
                let mut out = vec![PlannedSetting {
                    params: self.base.clone(),
                    swept: Vec::new(),
                }];
                for (name, values) in &self.axes {
                    for &value in values {
                        let mut params = self.base.clone();
                        params.set_numeric(name, value).expect("validated axis");
                        if params == self.base {
                            continue; // the default value collapses into the base run
                        }
                        out.push(PlannedSetting {
                            params,
                            swept: vec![(name.clone(), value)],
                        });
                    }
                }
                out
            }
            SweepMode::FullGrid => {
                let mut out = vec![PlannedSetting {
                    params: self.base.clone(),
                    swept: Vec::new(),
                }];
                for (name, values) in &self.axes {
                    let mut next = Vec::with_capacity(out.len() * values.len());
                    for setting in &out {
                        for &value in values {
                            let mut params = setting.params.clone();
                            params.set_numeric(name, value).expect("validated axis");
                            let mut swept = setting.swept.clone();
                            swept.push((name.clone(), value));
                            next.push(PlannedSetting { params, swept });
                        }
                    }
                    out = next;
                }
                out
            }
        }
    }

    /// Applies the desk-scale budget reduction to the base and every axis
    /// value of the budget-heavy parameters, preserving value orderings.
    pub fn desk_scale(&self) -> SweepPlan {
        let scale_axis = |name: &str, v: f64| -> f64 {
            match name {
                "I" | "E" => (v / 10.0).ceil().max(1.0),
                "m" | "n" => (v / 4.0).ceil().max(1.0),
                _ => v,
            }
        };
        SweepPlan {
            base: self.base.desk_scale(),
            axes: self
                .axes
                .iter()
                .map(|(name, values)| {
                    (
                        name.clone(),
                        values.iter().map(|&v| scale_axis(name, v)).collect(),
                    )
                })
                .collect(),
            mode: self.mode,
            repetitions: self.repetitions,
            seeds: self.seeds.clone(),
        }
    }

    pub fn from_json(json: &str) -> Result<SweepPlan, SweepError> {
        let plan: SweepPlan = serde_json::from_str(json)?;
        plan.validate()?;
        Ok(plan)
    }
}

/// The 12-axis one-factor plan: every parameter at its minimum, default and
/// maximum study value, everything else at the defaults. Single repetition.
pub fn plan_table1_sweep() -> SweepPlan {
    let axes: Vec<(String, Vec<f64>)> = vec![
        ("I".into(), vec![50.0, 100.0, 150.0]),
        ("E".into(), vec![10.0, 50.0, 100.0]),
        ("T_prime".into(), vec![10.0, 15.0, 20.0]),
        ("m".into(), vec![25.0, 100.0, 200.0]),
        ("c".into(), vec![0.5, 1.0, 2.0]),
        ("rs".into(), vec![1.0, 20.0, 40.0]),
        ("ep".into(), vec![5.0, 10.0, 15.0]),
        ("bs".into(), vec![32.0, 64.0, 96.0]),
        ("lr".into(), vec![0.001, 0.005, 0.01]),
        ("d".into(), vec![0.2, 0.3, 0.4]),
        ("n".into(), vec![20.0, 40.0, 100.0]),
        ("u".into(), vec![0.5, 0.6, 0.7]),
    ];
    SweepPlan {
        base: HyperParams::default(),
        axes,
        mode: SweepMode::OneFactor,
        repetitions: 1,
        seeds: vec![0],
    }
}

/// The 3^4 full grid over I, E, m and ep; the arena stage is cut off and
/// every trained model is accepted automatically.
pub fn plan_correlation_grid() -> SweepPlan {
    let mut base = HyperParams::default();
    base.arena_enabled = false;
    let axes: Vec<(String, Vec<f64>)> = vec![
        ("I".into(), vec![25.0, 50.0, 75.0]),
        ("E".into(), vec![10.0, 20.0, 30.0]),
        ("m".into(), vec![25.0, 50.0, 75.0]),
        ("ep".into(), vec![5.0, 10.0, 15.0]),
    ];
    SweepPlan {
        base,
        axes,
        mode: SweepMode::FullGrid,
        repetitions: 1,
        seeds: vec![0],
    }
}
