//! TOML scenario and linear-system configs.

use std::path::Path;
use std::sync::Arc;

use nrflow::scenarios::{
    bicycle_dynamics, pendulum_dynamics, unicycle_dynamics, BicycleParams, FollowerMode, PendulumParams, PlatoonAgent,
    PlatoonConfig, SCurve,
};
use nrflow::{
    ControllerConfig, LinearSystem64, LtiPredictor, Matrix64, NumericPredictor, Plant64, PredictorModel, Reference64,
    Scheme, StaticPlant64, TimeGrid, UnicyclePredictor, Variant,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub plant: PlantSpec,
    pub controller: ControllerSpec,
    pub grid: GridSpec,
    #[serde(default)]
    pub initial: InitialSpec,
    pub reference: ReferenceSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub platoon: Option<PlatoonSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PlantSpec {
    Pendulum {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cart_mass: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bob_mass: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        length: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gravity: Option<f64>,
    },
    Bicycle {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mass: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lf: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lr: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        iz: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        caf: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        car: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        v_floor: Option<f64>,
    },
    Unicycle {},
    Lti {
        a: Vec<Vec<f64>>,
        b: Vec<Vec<f64>>,
        c: Vec<Vec<f64>>,
    },
    StaticLinear {
        k: Vec<Vec<f64>>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerSpec {
    /// basic | enhanced | full | intermediate | memoryless
    pub variant: String,
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    /// numeric | lti | unicycle; defaults by plant kind.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predictor: Option<String>,
    /// Inner steps of the numeric predictor.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predictor_steps: Option<usize>,
    /// euler | rk4
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<String>,
    /// Constant injected error added to the control bracket.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e2: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub singularity_tol: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub t0: f64,
    pub tf: f64,
    pub dt: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    #[serde(default)]
    pub x: Vec<f64>,
    #[serde(default)]
    pub u: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ReferenceSpec {
    /// `offset + amplitude·sin(frequency·t + phase)` per component.
    Sinusoid {
        offset: Vec<f64>,
        amplitude: Vec<f64>,
        frequency: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        phase: Option<Vec<f64>>,
    },
    Constant {
        value: Vec<f64>,
    },
    /// The S-shaped road with its speed profile.
    SCurve {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lead_in: Option<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlatoonSpec {
    pub agents: usize,
    pub spacing: f64,
    /// arclength_offset | target_line
    pub follower_mode: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub velocity_lookahead: Option<bool>,
    /// One initial state per agent, leader first.
    pub initial_states: Vec<Vec<f64>>,
    /// One initial input per agent; `initial.u` for all when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_inputs: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<String>,
}

/// Linear system for `certify` and `rootlocus`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub system: SystemSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    pub c: Vec<Vec<f64>>,
    pub horizon: f64,
    /// basic | intermediate | full
    #[serde(default = "default_system_variant")]
    pub variant: String,
}

fn default_system_variant() -> String {
    "basic".into()
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse<T: for<'de> Deserialize<'de>>(path: &Path, text: &str) -> Result<T> {
    toml::from_str(text).map_err(|e| CliError::config(path, e.to_string().trim_end().to_string()))
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self> {
        Self::parse_str(path, &read(path)?)
    }

    pub fn parse_str(path: &Path, text: &str) -> Result<Self> {
        parse(path, text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

impl SystemConfig {
    pub fn load(path: &Path) -> Result<Self> {
        parse(path, &read(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn build(&self, path: &Path) -> Result<LinearSystem64> {
        let s = &self.system;
        let variant = parse_variant(path, &s.variant)?;
        Ok(LinearSystem64::new(
            matrix(path, "system.a", &s.a)?,
            matrix(path, "system.b", &s.b)?,
            matrix(path, "system.c", &s.c)?,
            s.horizon,
            variant,
        )?)
    }
}

fn matrix(path: &Path, key: &str, rows: &[Vec<f64>]) -> Result<Matrix64> {
    Matrix64::from_rows(rows).map_err(|e| CliError::config(path, format!("{key}: {e}")))
}

fn parse_variant(path: &Path, s: &str) -> Result<Variant> {
    s.parse::<Variant>().map_err(|e| CliError::config(path, format!("controller.variant: {e}")))
}

/// Runnable pieces of a scenario.
pub enum Scenario {
    Dynamic {
        plant: Plant64,
        predictor: Arc<dyn PredictorModel<f64>>,
        controller: ControllerConfig<f64>,
        reference: Reference64,
        grid: TimeGrid<f64>,
        x0: Vec<f64>,
        u0: Vec<f64>,
    },
    Static {
        plant: StaticPlant64,
        controller: ControllerConfig<f64>,
        reference: Reference64,
        grid: TimeGrid<f64>,
        u0: Vec<f64>,
    },
    Platoon {
        config: PlatoonConfig<f64>,
        reference: Reference64,
        grid: TimeGrid<f64>,
        /// Arclength where the final straight of the road begins.
        final_straight: Option<f64>,
    },
}

impl ScenarioConfig {
    /// Validates the config and assembles plants, predictors and references.
    /// `alpha` overrides the configured gain.
    pub fn build(&self, path: &Path, alpha: Option<f64>) -> Result<Scenario> {
        let cfg_err = |msg: String| CliError::config(path, msg);
        let variant = parse_variant(path, &self.controller.variant)?;
        let alpha = alpha.unwrap_or(self.controller.alpha);
        let grid = TimeGrid::new(self.grid.t0, self.grid.tf, self.grid.dt)?;

        let mut road: Option<SCurve<f64>> = None;
        let reference = match &self.reference {
            ReferenceSpec::Sinusoid {
                offset,
                amplitude,
                frequency,
                phase,
            } => {
                let phase = phase.clone().unwrap_or_else(|| vec![0.0; offset.len()]);
                Reference64::sinusoid(offset.clone(), amplitude.clone(), frequency.clone(), phase)?
            }
            ReferenceSpec::Constant { value } => Reference64::constant(value.clone()),
            ReferenceSpec::SCurve { lead_in } => {
                let curve = SCurve::standard(lead_in.unwrap_or(50.0))?;
                let r = curve.reference()?;
                road = Some(curve);
                r
            }
        };

        if variant == Variant::Memoryless {
            let PlantSpec::StaticLinear { k } = &self.plant else {
                return Err(cfg_err("the memoryless variant needs a static_linear plant".into()));
            };
            if self.platoon.is_some() {
                return Err(cfg_err("platoons need a dynamic plant".into()));
            }
            let plant = StaticPlant64::linear(matrix(path, "plant.k", k)?)?;
            let mut controller = ControllerConfig::memoryless(alpha)?;
            if let Some(e2) = &self.controller.e2 {
                controller = controller.with_constant_e2(e2.clone());
            }
            if let Some(tol) = self.controller.singularity_tol {
                controller = controller.with_singularity_tol(tol)?;
            }
            let u0 = if self.initial.u.is_empty() {
                vec![0.0; plant.dim()]
            } else {
                self.initial.u.clone()
            };
            return Ok(Scenario::Static {
                plant,
                controller,
                reference,
                grid,
                u0,
            });
        }

        let horizon = self
            .controller
            .horizon
            .ok_or_else(|| cfg_err("controller.horizon is required for dynamic variants".into()))?;
        let mut controller = ControllerConfig::new(variant, alpha, horizon)?;
        if let Some(e2) = &self.controller.e2 {
            controller = controller.with_constant_e2(e2.clone());
        }
        if let Some(tol) = self.controller.singularity_tol {
            controller = controller.with_singularity_tol(tol)?;
        }

        let make_plant = || -> Result<Plant64> {
            Ok(match &self.plant {
                PlantSpec::Pendulum {
                    cart_mass,
                    bob_mass,
                    length,
                    gravity,
                } => {
                    let d = PendulumParams::default();
                    pendulum_dynamics(PendulumParams {
                        cart_mass: cart_mass.unwrap_or(d.cart_mass),
                        bob_mass: bob_mass.unwrap_or(d.bob_mass),
                        length: length.unwrap_or(d.length),
                        gravity: gravity.unwrap_or(d.gravity),
                    })?
                }
                PlantSpec::Bicycle {
                    mass,
                    lf,
                    lr,
                    iz,
                    caf,
                    car,
                    v_floor,
                } => {
                    let d = BicycleParams::default();
                    bicycle_dynamics(BicycleParams {
                        mass: mass.unwrap_or(d.mass),
                        lf: lf.unwrap_or(d.lf),
                        lr: lr.unwrap_or(d.lr),
                        iz: iz.unwrap_or(d.iz),
                        caf: caf.unwrap_or(d.caf),
                        car: car.unwrap_or(d.car),
                        v_floor: v_floor.unwrap_or(d.v_floor),
                    })?
                }
                PlantSpec::Unicycle {} => unicycle_dynamics(),
                PlantSpec::Lti { a, b, c } => {
                    Plant64::linear(&matrix(path, "plant.a", a)?, &matrix(path, "plant.b", b)?, &matrix(path, "plant.c", c)?)?
                }
                PlantSpec::StaticLinear { .. } => {
                    return Err(cfg_err("static_linear plants need the memoryless variant".into()));
                }
            })
        };

        let predictor_kind = self.controller.predictor.clone().unwrap_or_else(|| {
            match self.plant {
                PlantSpec::Lti { .. } => "lti",
                PlantSpec::Unicycle {} => "unicycle",
                _ => "numeric",
            }
            .to_string()
        });
        let default_steps = match self.plant {
            PlantSpec::Bicycle { .. } => 1000,
            _ => 100,
        };
        let scheme = match self.controller.scheme.as_deref() {
            None | Some("euler") => Scheme::Euler,
            Some("rk4") => Scheme::Rk4,
            Some(other) => return Err(cfg_err(format!("controller.scheme: unknown scheme '{other}'"))),
        };
        let make_predictor = |plant: &Plant64| -> Result<Arc<dyn PredictorModel<f64>>> {
            Ok(match predictor_kind.as_str() {
                "numeric" => Arc::new(
                    NumericPredictor::new(plant.clone(), horizon, self.controller.predictor_steps.unwrap_or(default_steps))?
                        .with_scheme(scheme),
                ),
                "lti" => {
                    let PlantSpec::Lti { a, b, c } = &self.plant else {
                        return Err(cfg_err("the lti predictor needs an lti plant".into()));
                    };
                    Arc::new(LtiPredictor::new(
                        matrix(path, "plant.a", a)?,
                        matrix(path, "plant.b", b)?,
                        matrix(path, "plant.c", c)?,
                        horizon,
                    )?)
                }
                "unicycle" => {
                    if !matches!(self.plant, PlantSpec::Unicycle {}) {
                        return Err(cfg_err("the unicycle predictor needs a unicycle plant".into()));
                    }
                    Arc::new(UnicyclePredictor::with_default_eps(horizon)?)
                }
                other => return Err(cfg_err(format!("controller.predictor: unknown predictor '{other}'"))),
            })
        };

        if let Some(p) = &self.platoon {
            if p.agents == 0 || p.initial_states.len() != p.agents {
                return Err(cfg_err(format!(
                    "platoon.initial_states has {} entries for {} agents",
                    p.initial_states.len(),
                    p.agents
                )));
            }
            let inputs = match &p.initial_inputs {
                Some(u) if u.len() != p.agents => {
                    return Err(cfg_err("platoon.initial_inputs must have one entry per agent".into()))
                }
                Some(u) => u.clone(),
                None => vec![self.initial.u.clone(); p.agents],
            };
            let follower_mode: FollowerMode = p.follower_mode.parse().map_err(|e: nrflow::Error| cfg_err(e.to_string()))?;
            let mut agents = Vec::with_capacity(p.agents);
            for (x0, u0) in p.initial_states.iter().zip(inputs) {
                let plant = make_plant()?;
                agents.push(PlatoonAgent {
                    predictor: make_predictor(&plant)?,
                    plant,
                    x0: x0.clone(),
                    u0,
                });
            }
            let config = PlatoonConfig {
                agents,
                spacing: p.spacing,
                controller,
                follower_mode,
                path: road.as_ref().map(|c| Arc::clone(&c.path)),
                velocity_lookahead: p.velocity_lookahead.unwrap_or(true),
            };
            config.validate()?;
            return Ok(Scenario::Platoon {
                config,
                reference,
                grid,
                final_straight: road.map(|c| c.final_straight),
            });
        }

        let plant = make_plant()?;
        let predictor = make_predictor(&plant)?;
        let u0 = if self.initial.u.is_empty() {
            vec![0.0; plant.io_dim()]
        } else {
            self.initial.u.clone()
        };
        Ok(Scenario::Dynamic {
            plant,
            predictor,
            controller,
            reference,
            grid,
            x0: self.initial.x.clone(),
            u0,
        })
    }
}
