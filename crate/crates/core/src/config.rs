//! TOML run configuration.
//!
//! ```toml
//! [plant]
//! delay = 2
//! a11 = [[1.1]]
//! a12 = [[0.4]]
//! a21 = [[0.3]]
//! a22 = [[0.8]]
//! b1 = [[1.0]]
//! b2 = [[1.0]]
//! q1 = [[1.0]]          # or a full augmented `q`
//! q2 = [[1.0]]
//! r = [[1.0, 0.0], [0.0, 1.0]]
//! w1 = [[1.0]]
//! w2 = [[1.0]]
//!
//! [delay]
//! pmf = [{ delay = 0, prob = 0.5 }, { delay = 2, prob = 0.5 }]
//! ```
//!
//! Initial means default to zero and initial covariances to the identity.
//! `[delay]` takes either `pmf` (both directions) or `pmf1` and `pmf2`.

use serde::{Deserialize, Serialize};

use crate::delay::DelayModel;
use crate::error::{Error, Result};
use crate::infograph::NodeId;
use crate::linalg::{from_rows, to_rows, Mat, Vector};
use crate::plant::{Plant, PlantSpec};

type Rows = Vec<Vec<f64>>;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPlant {
    delay: usize,
    a11: Rows,
    a12: Rows,
    a21: Rows,
    a22: Rows,
    b1: Rows,
    b2: Rows,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    q: Option<Rows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    q1: Option<Rows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    q2: Option<Rows>,
    r: Rows,
    w1: Rows,
    w2: Rows,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mu0_1: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mu0_2: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sigma0_1: Option<Rows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sigma0_2: Option<Rows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    q_terminal: Option<Rows>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMass {
    delay: usize,
    prob: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDelay {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pmf: Option<Vec<RawMass>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pmf1: Option<Vec<RawMass>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pmf2: Option<Vec<RawMass>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHorizon {
    /// Finite horizon length; absent means infinite horizon.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    finite: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSimulation {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    episodes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    burn_in: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dir: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStudy {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    epsilons: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    directions: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    nodes: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    episodes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    steps: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    plant: RawPlant,
    delay: RawDelay,
    #[serde(default)]
    horizon: RawHorizon,
    #[serde(default)]
    simulation: RawSimulation,
    #[serde(default)]
    output: RawOutput,
    #[serde(default)]
    study: RawStudy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Horizon {
    Infinite,
    Finite(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SimulationSettings {
    pub episodes: usize,
    /// Episode length; ignored for finite horizons, which use the horizon.
    pub steps: usize,
    pub burn_in: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StudySettings {
    pub epsilons: Vec<f64>,
    /// Random unit directions per node.
    pub directions: usize,
    /// Nodes to perturb; every node when empty.
    pub nodes: Vec<NodeId>,
    pub episodes: usize,
    pub steps: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub plant: PlantSpec,
    pub delay: DelayModel,
    pub horizon: Horizon,
    pub simulation: SimulationSettings,
    pub output: String,
    pub study: StudySettings,
}

const DEFAULT_EPISODES: usize = 2000;
const DEFAULT_STEPS: usize = 500;

fn matrix(rows: &Rows, field: &str) -> Result<Mat> {
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::validation(field, "entries must be finite"));
    }
    from_rows(rows, field)
}

fn vector(v: &[f64], field: &str) -> Result<Vector> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::validation(field, "entries must be finite"));
    }
    Ok(Vector::from_column_slice(v))
}

fn pairs(masses: &[RawMass]) -> Vec<(usize, f64)> {
    masses.iter().map(|m| (m.delay, m.prob)).collect()
}

fn masses(pairs: Vec<(usize, f64)>) -> Vec<RawMass> {
    pairs.into_iter().map(|(delay, prob)| RawMass { delay, prob }).collect()
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::validation("config", e.to_string().trim_end()))?;
        Self::from_raw(raw)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&self.to_raw()).expect("configuration serializes")
    }

    fn from_raw(raw: RawConfig) -> Result<Self> {
        let p = &raw.plant;
        let d = p.delay;
        let a11 = matrix(&p.a11, "plant.a11")?;
        let a22 = matrix(&p.a22, "plant.a22")?;
        let (n1, n2) = (a11.nrows(), a22.nrows());
        let q = match (&p.q, &p.q1, &p.q2) {
            (Some(q), None, None) => matrix(q, "plant.q")?,
            (None, Some(q1), Some(q2)) => {
                let q1 = matrix(q1, "plant.q1")?;
                let q2 = matrix(q2, "plant.q2")?;
                if q1.shape() != (n1, n1) {
                    return Err(Error::validation("plant.q1", format!("expected {n1}x{n1}")));
                }
                if q2.shape() != (n2, n2) {
                    return Err(Error::validation("plant.q2", format!("expected {n2}x{n2}")));
                }
                PlantSpec::local_state_cost(d, &q1, &q2)
            }
            _ => {
                return Err(Error::validation(
                    "plant.q",
                    "give either a full augmented q or both q1 and q2",
                ))
            }
        };
        let optional_matrix = |m: &Option<Rows>, field: &str, default: Mat| match m {
            Some(rows) => matrix(rows, field),
            None => Ok(default),
        };
        let plant = PlantSpec {
            delay: d,
            a12: matrix(&p.a12, "plant.a12")?,
            a21: matrix(&p.a21, "plant.a21")?,
            b1: matrix(&p.b1, "plant.b1")?,
            b2: matrix(&p.b2, "plant.b2")?,
            q,
            r: matrix(&p.r, "plant.r")?,
            w1: matrix(&p.w1, "plant.w1")?,
            w2: matrix(&p.w2, "plant.w2")?,
            mu0_1: match &p.mu0_1 {
                Some(v) => vector(v, "plant.mu0_1")?,
                None => Vector::zeros(n1),
            },
            mu0_2: match &p.mu0_2 {
                Some(v) => vector(v, "plant.mu0_2")?,
                None => Vector::zeros(n2),
            },
            sigma0_1: optional_matrix(&p.sigma0_1, "plant.sigma0_1", Mat::identity(n1, n1))?,
            sigma0_2: optional_matrix(&p.sigma0_2, "plant.sigma0_2", Mat::identity(n2, n2))?,
            q_terminal: p
                .q_terminal
                .as_ref()
                .map(|m| matrix(m, "plant.q_terminal"))
                .transpose()?,
            a11,
            a22,
        };
        plant.validate()?;

        let delay = match (&raw.delay.pmf, &raw.delay.pmf1, &raw.delay.pmf2) {
            (Some(pmf), None, None) => DelayModel::symmetric(d, &pairs(pmf))?,
            (None, Some(p1), Some(p2)) => DelayModel::new(d, &pairs(p1), &pairs(p2))?,
            (None, None, None) => return Err(Error::validation("delay.pmf", "missing delay distribution")),
            (Some(_), _, _) => {
                return Err(Error::validation("delay.pmf", "give either pmf or pmf1 and pmf2, not both"))
            }
            (None, None, Some(_)) => return Err(Error::validation("delay.pmf1", "missing")),
            (None, Some(_), None) => return Err(Error::validation("delay.pmf2", "missing")),
        };

        let horizon = match raw.horizon.finite {
            None => Horizon::Infinite,
            Some(0) => return Err(Error::validation("horizon.finite", "must be at least 1")),
            Some(t) => Horizon::Finite(t),
        };

        let s = &raw.simulation;
        let steps = s.steps.unwrap_or(DEFAULT_STEPS);
        if steps == 0 {
            return Err(Error::validation("simulation.steps", "must be at least 1"));
        }
        let burn_in = s.burn_in.unwrap_or(steps / 5);
        if horizon == Horizon::Infinite && burn_in >= steps {
            return Err(Error::validation("simulation.burn_in", "must be below simulation.steps"));
        }
        let episodes = s.episodes.unwrap_or(DEFAULT_EPISODES);
        if episodes < 2 {
            return Err(Error::validation("simulation.episodes", "need at least 2 episodes"));
        }
        let simulation = SimulationSettings {
            episodes,
            steps,
            burn_in,
            seed: s.seed.unwrap_or(0),
        };

        let st = &raw.study;
        let nodes = st
            .nodes
            .iter()
            .flatten()
            .map(|k| {
                NodeId::parse_key(k)
                    .filter(|n| n.size(d) <= d || *n == NodeId::Root)
                    .ok_or_else(|| Error::validation("study.nodes", format!("unknown node {k:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let study = StudySettings {
            epsilons: st.epsilons.clone().unwrap_or_else(|| vec![-0.1, -0.01, 0.0, 0.01, 0.1]),
            directions: st.directions.unwrap_or(1),
            nodes,
            episodes: st.episodes.unwrap_or(episodes),
            steps: st.steps.unwrap_or(steps),
        };
        if study.epsilons.iter().any(|e| !e.is_finite()) {
            return Err(Error::validation("study.epsilons", "entries must be finite"));
        }
        if study.episodes < 2 {
            return Err(Error::validation("study.episodes", "need at least 2 episodes"));
        }
        if study.steps == 0 {
            return Err(Error::validation("study.steps", "must be at least 1"));
        }

        Ok(RunConfig {
            plant,
            delay,
            horizon,
            simulation,
            output: raw.output.dir.unwrap_or_else(|| "out".to_string()),
            study,
        })
    }

    fn to_raw(&self) -> RawConfig {
        let p = &self.plant;
        let symmetric = self.delay.pmf(Plant::One) == self.delay.pmf(Plant::Two);
        RawConfig {
            plant: RawPlant {
                delay: p.delay,
                a11: to_rows(&p.a11),
                a12: to_rows(&p.a12),
                a21: to_rows(&p.a21),
                a22: to_rows(&p.a22),
                b1: to_rows(&p.b1),
                b2: to_rows(&p.b2),
                q: Some(to_rows(&p.q)),
                q1: None,
                q2: None,
                r: to_rows(&p.r),
                w1: to_rows(&p.w1),
                w2: to_rows(&p.w2),
                mu0_1: Some(p.mu0_1.iter().copied().collect()),
                mu0_2: Some(p.mu0_2.iter().copied().collect()),
                sigma0_1: Some(to_rows(&p.sigma0_1)),
                sigma0_2: Some(to_rows(&p.sigma0_2)),
                q_terminal: p.q_terminal.as_ref().map(to_rows),
            },
            delay: if symmetric {
                RawDelay {
                    pmf: Some(masses(self.delay.pairs(Plant::One))),
                    ..RawDelay::default()
                }
            } else {
                RawDelay {
                    pmf: None,
                    pmf1: Some(masses(self.delay.pairs(Plant::One))),
                    pmf2: Some(masses(self.delay.pairs(Plant::Two))),
                }
            },
            horizon: RawHorizon {
                finite: match self.horizon {
                    Horizon::Infinite => None,
                    Horizon::Finite(t) => Some(t),
                },
            },
            simulation: RawSimulation {
                episodes: Some(self.simulation.episodes),
                steps: Some(self.simulation.steps),
                burn_in: Some(self.simulation.burn_in),
                seed: Some(self.simulation.seed),
            },
            output: RawOutput {
                dir: Some(self.output.clone()),
            },
            study: RawStudy {
                epsilons: Some(self.study.epsilons.clone()),
                directions: Some(self.study.directions),
                nodes: Some(self.study.nodes.iter().map(|n| n.key()).collect()),
                episodes: Some(self.study.episodes),
                steps: Some(self.study.steps),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const SCALAR: &str = r#"
[plant]
delay = 2
a11 = [[1.1]]
a12 = [[0.4]]
a21 = [[0.3]]
a22 = [[0.8]]
b1 = [[1.0]]
b2 = [[1.0]]
q1 = [[1.0]]
q2 = [[1.0]]
r = [[1.0, 0.0], [0.0, 1.0]]
w1 = [[1.0]]
w2 = [[1.0]]

[delay]
pmf = [{ delay = 0, prob = 0.5 }, { delay = 2, prob = 0.5 }]
"#;

    #[test]
    fn parses_with_defaults() {
        let c = RunConfig::from_toml(SCALAR).unwrap();
        assert_eq!(c.plant.delay, 2);
        assert_eq!(c.plant.q.shape(), (4, 4));
        assert_eq!(c.plant.q[(3, 3)], 1.0);
        assert_eq!(c.plant.q[(1, 1)], 0.0);
        assert_eq!(c.horizon, Horizon::Infinite);
        assert_eq!(c.simulation.burn_in, 100);
        assert_eq!(c.delay.pmf(Plant::Two), &[0.5, 0.0, 0.5]);
        assert_eq!(c.plant.sigma0_1, Mat::identity(1, 1));
    }

    #[test]
    fn round_trip() {
        let c = RunConfig::from_toml(SCALAR).unwrap();
        let text = c.to_toml();
        assert_eq!(RunConfig::from_toml(&text).unwrap(), c);
    }

    fn field_of(text: &str) -> String {
        match RunConfig::from_toml(text).unwrap_err() {
            Error::Validation { field, .. } => field,
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn bad_pmf_names_direction() {
        let text = SCALAR.replace(
            "pmf = [{ delay = 0, prob = 0.5 }, { delay = 2, prob = 0.5 }]",
            "pmf1 = [{ delay = 0, prob = 0.5 }, { delay = 2, prob = 0.4 }]\npmf2 = [{ delay = 1, prob = 1.0 }]",
        );
        assert_eq!(field_of(&text), "delay.pmf1");
    }

    #[test]
    fn shape_errors_name_the_matrix() {
        assert_eq!(field_of(&SCALAR.replace("a12 = [[0.4]]", "a12 = [[0.4, 1.0]]")), "plant.a12");
        assert_eq!(field_of(&SCALAR.replace("r = [[1.0, 0.0], [0.0, 1.0]]", "r = [[1.0, 0.0], [0.0]]")), "plant.r");
        assert_eq!(field_of(&SCALAR.replace("q2 = [[1.0]]\n", "")), "plant.q");
    }

    #[test]
    fn syntax_errors_are_validation_errors() {
        assert_eq!(field_of("[plant\n"), "config");
        assert_eq!(field_of(&format!("{SCALAR}\n[extra]\nx = 1\n")), "config");
    }

    #[test]
    fn study_nodes_parse() {
        let text = format!("{SCALAR}\n[study]\nnodes = [\"1:2\", \"root\"]\n");
        let c = RunConfig::from_toml(&text).unwrap();
        assert_eq!(c.study.nodes, vec![NodeId::branch(Plant::One, 2), NodeId::Root]);
        let bad = format!("{SCALAR}\n[study]\nnodes = [\"1:3\"]\n");
        assert_eq!(field_of(&bad), "study.nodes");
    }
}
