//! One interface over all search algorithms, plus plain-text state snapshots.

use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use rand::Rng;

use crate::baselines::{AlState, PicHunterState, DEFAULT_AL_DISCOUNT, DEFAULT_PICHUNTER_SIGMA};
use crate::be::BetaState;
use crate::dataset::Dataset;
use crate::ds::{ds_gibbs_select, DirichletState, GibbsOptions, RoundHistory, RoundRecord};
use crate::error::{Error, Result};
use crate::partition::{assign_partitions, DisplaySet};
use crate::scalar::Scalar;

pub const SNAPSHOT_HEADER: &str = "relfeed-state v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    BetaExperts,
    DirichletVb,
    DirichletGibbs,
    Al,
    PicHunter,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::BetaExperts,
        Algorithm::DirichletVb,
        Algorithm::DirichletGibbs,
        Algorithm::Al,
        Algorithm::PicHunter,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::BetaExperts => "be",
            Algorithm::DirichletVb => "ds_vb",
            Algorithm::DirichletGibbs => "ds_gibbs",
            Algorithm::Al => "al",
            Algorithm::PicHunter => "pichunter",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "be" | "beta_experts" => Ok(Algorithm::BetaExperts),
            "ds_vb" | "vb" | "ds" => Ok(Algorithm::DirichletVb),
            "ds_gibbs" | "gibbs" => Ok(Algorithm::DirichletGibbs),
            "al" => Ok(Algorithm::Al),
            "pichunter" | "ph" => Ok(Algorithm::PicHunter),
            other => Err(Error::validation(format!("unknown algorithm {other:?}"))),
        }
    }
}

/// Tunables for every algorithm; each engine reads only its own fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineParams<F> {
    pub a0: F,
    pub b0: F,
    pub gibbs: GibbsOptions,
    pub al_discount: F,
    pub sigma: F,
    /// Exponent applied to Gamma shapes in Dirichlet selection.
    pub tau: F,
}

impl<F: Scalar> Default for EngineParams<F> {
    fn default() -> Self {
        EngineParams {
            a0: F::one(),
            b0: F::one(),
            gibbs: GibbsOptions::default(),
            al_discount: F::lit(DEFAULT_AL_DISCOUNT),
            sigma: F::lit(DEFAULT_PICHUNTER_SIGMA),
            tau: F::one(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GibbsEngine {
    pub history: RoundHistory,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EngineState<F> {
    BetaExperts(BetaState<F>),
    DirichletVb(DirichletState<F>),
    DirichletGibbs(GibbsEngine),
    Al(AlState<F>),
    PicHunter(PicHunterState<F>),
}

/// An algorithm's posterior state together with its selection parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Engine<F> {
    state: EngineState<F>,
    params: EngineParams<F>,
}

impl<F: Scalar> Engine<F> {
    pub fn new(algorithm: Algorithm, n: usize, params: EngineParams<F>) -> Result<Self> {
        if params.gibbs.sweeps == 0 {
            return Err(Error::validation("gibbs sweeps must be >= 1"));
        }
        let state = match algorithm {
            Algorithm::BetaExperts => EngineState::BetaExperts(BetaState::new(n, params.a0, params.b0)?),
            Algorithm::DirichletVb => EngineState::DirichletVb(DirichletState::new(n)?),
            Algorithm::DirichletGibbs => {
                if n < 2 {
                    return Err(Error::validation(format!("need at least 2 items, got {n}")));
                }
                EngineState::DirichletGibbs(GibbsEngine {
                    history: RoundHistory::new(),
                    n,
                })
            }
            Algorithm::Al => EngineState::Al(AlState::new(n, params.al_discount)?),
            Algorithm::PicHunter => EngineState::PicHunter(PicHunterState::new(n, params.sigma)?),
        };
        Ok(Engine { state, params })
    }

    pub fn algorithm(&self) -> Algorithm {
        match self.state {
            EngineState::BetaExperts(_) => Algorithm::BetaExperts,
            EngineState::DirichletVb(_) => Algorithm::DirichletVb,
            EngineState::DirichletGibbs(_) => Algorithm::DirichletGibbs,
            EngineState::Al(_) => Algorithm::Al,
            EngineState::PicHunter(_) => Algorithm::PicHunter,
        }
    }

    pub fn state(&self) -> &EngineState<F> {
        &self.state
    }

    pub fn params(&self) -> &EngineParams<F> {
        &self.params
    }

    pub fn len(&self) -> usize {
        match &self.state {
            EngineState::BetaExperts(s) => s.len(),
            EngineState::DirichletVb(s) => s.len(),
            EngineState::DirichletGibbs(g) => g.n,
            EngineState::Al(s) => s.len(),
            EngineState::PicHunter(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Chooses the next `k` items to show.
    pub fn select<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> Result<DisplaySet> {
        match &self.state {
            EngineState::BetaExperts(s) => s.select(k, rng),
            EngineState::DirichletVb(s) => s.select(k, self.params.tau, rng),
            EngineState::DirichletGibbs(g) => {
                ds_gibbs_select(&g.history, g.n, k, self.params.gibbs, self.params.tau, rng)
            }
            EngineState::Al(s) => s.select(k, rng),
            EngineState::PicHunter(s) => s.select(k),
        }
    }

    /// Folds in the user's pick of `display[chosen_position]`.
    pub fn observe(
        &mut self,
        dataset: &Dataset<F>,
        display: &DisplaySet,
        chosen_position: usize,
    ) -> Result<()> {
        if dataset.len() != self.len() {
            return Err(Error::validation(format!(
                "engine has {} items, dataset {}",
                self.len(),
                dataset.len()
            )));
        }
        let chosen = display.item(chosen_position).ok_or(Error::IndexOutOfRange {
            index: chosen_position,
            len: display.len(),
        })?;
        if let EngineState::PicHunter(s) = &mut self.state {
            return s.update(chosen, dataset);
        }
        let cell = assign_partitions(dataset, display)?.members(chosen_position)?;
        match &mut self.state {
            EngineState::BetaExperts(s) => s.update(&cell),
            EngineState::DirichletVb(s) => s.vb_update(&cell),
            EngineState::Al(s) => s.update(&cell),
            EngineState::DirichletGibbs(g) => {
                g.history.push(RoundRecord::new(display.clone(), chosen_position, cell)?);
                Ok(())
            }
            EngineState::PicHunter(_) => unreachable!(),
        }
    }

    /// Versioned plain-text dump of the posterior state, one item per line.
    /// Floats use the shortest representation that parses back exactly.
    pub fn snapshot(&self, ids: &[String]) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{SNAPSHOT_HEADER}");
        let _ = writeln!(out, "algorithm {}", self.algorithm());
        match &self.state {
            EngineState::BetaExperts(s) => {
                let (a0, b0) = s.prior();
                let _ = writeln!(out, "prior {a0} {b0}");
                let _ = writeln!(out, "rounds {}", s.rounds());
                let _ = writeln!(out, "items {}", s.len());
                for (i, id) in ids.iter().enumerate() {
                    let _ = writeln!(out, "{id}\t{}\t{}", s.a()[i], s.b()[i]);
                }
            }
            EngineState::DirichletVb(s) => {
                let _ = writeln!(out, "items {}", s.len());
                for (id, a) in ids.iter().zip(s.alpha()) {
                    let _ = writeln!(out, "{id}\t{a}");
                }
            }
            EngineState::Al(s) => {
                let _ = writeln!(out, "discount {}", s.discount());
                let _ = writeln!(out, "items {}", s.len());
                for (id, w) in ids.iter().zip(s.weights()) {
                    let _ = writeln!(out, "{id}\t{w}");
                }
            }
            EngineState::PicHunter(s) => {
                let _ = writeln!(out, "sigma {}", s.sigma());
                let _ = writeln!(out, "items {}", s.len());
                for (id, p) in ids.iter().zip(s.probabilities()) {
                    let _ = writeln!(out, "{id}\t{p}");
                }
            }
            EngineState::DirichletGibbs(g) => {
                let join = |items: &[usize]| {
                    items.iter().map(|&i| ids[i].as_str()).collect::<Vec<_>>().join(",")
                };
                let _ = writeln!(out, "items {}", g.n);
                let _ = writeln!(out, "rounds {}", g.history.len());
                for r in g.history.rounds() {
                    let _ = writeln!(
                        out,
                        "round\t{}\t{}\t{}",
                        r.chosen_position(),
                        join(r.display().indices()),
                        join(r.chosen_partition())
                    );
                }
            }
        }
        out
    }

    /// Parses [`Engine::snapshot`] output. `ids` must be the dataset's ids
    /// in item order; selection parameters come from `params`.
    pub fn from_snapshot(text: &str, ids: &[String], params: EngineParams<F>) -> Result<Self> {
        let bad = |m: String| Error::Snapshot(m);
        let mut lines = text.lines();
        if lines.next() != Some(SNAPSHOT_HEADER) {
            return Err(bad(format!("missing {SNAPSHOT_HEADER:?} header")));
        }
        let mut field = |key: &str| -> Result<String> {
            let line = lines.next().ok_or_else(|| bad(format!("missing {key}")))?;
            line.strip_prefix(key)
                .and_then(|r| r.strip_prefix(' '))
                .map(str::to_string)
                .ok_or_else(|| bad(format!("expected {key}, found {line:?}")))
        };
        let num = |s: &str| -> Result<F> { s.trim().parse().map_err(|e| bad(format!("{s:?}: {e}"))) };
        let count = |s: &str| -> Result<usize> { s.trim().parse().map_err(|e| bad(format!("{s:?}: {e}"))) };

        let algorithm: Algorithm = field("algorithm")?.parse()?;
        let mut engine = Engine::new(algorithm, ids.len(), params)?;
        let (prior, rounds, scalar) = match algorithm {
            Algorithm::BetaExperts => {
                let prior = field("prior")?;
                let (a0, b0) = prior
                    .split_once(' ')
                    .ok_or_else(|| bad(format!("bad prior {prior:?}")))?;
                (Some((num(a0)?, num(b0)?)), Some(count(&field("rounds")?)?), None)
            }
            Algorithm::Al => (None, None, Some(num(&field("discount")?)?)),
            Algorithm::PicHunter => (None, None, Some(num(&field("sigma")?)?)),
            _ => (None, None, None),
        };
        let items = count(&field("items")?)?;
        if items != ids.len() {
            return Err(bad(format!("snapshot has {items} items, dataset {}", ids.len())));
        }

        if let EngineState::DirichletGibbs(g) = &mut engine.state {
            let rounds = count(&field("rounds")?)?;
            let index: HashMap<&str, usize> =
                ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
            let parse_ids = |s: &str| -> Result<Vec<usize>> {
                s.split(',')
                    .map(|id| index.get(id).copied().ok_or_else(|| bad(format!("unknown item {id:?}"))))
                    .collect()
            };
            for _ in 0..rounds {
                let line = lines.next().ok_or_else(|| bad("missing round line".into()))?;
                let parts: Vec<&str> = line.split('\t').collect();
                if parts.len() != 4 || parts[0] != "round" {
                    return Err(bad(format!("bad round line {line:?}")));
                }
                let display = DisplaySet::new(parse_ids(parts[2])?, g.n)?;
                g.history
                    .push(RoundRecord::new(display, count(parts[1])?, parse_ids(parts[3])?)?);
            }
            return Ok(engine);
        }

        let mut columns: Vec<Vec<F>> = Vec::new();
        for (i, id) in ids.iter().enumerate() {
            let line = lines.next().ok_or_else(|| bad(format!("missing item line {i}")))?;
            let mut parts = line.split('\t');
            if parts.next() != Some(id.as_str()) {
                return Err(bad(format!("item line {i} does not start with id {id:?}")));
            }
            for (c, value) in parts.enumerate() {
                if columns.len() <= c {
                    columns.push(Vec::with_capacity(ids.len()));
                }
                columns[c].push(num(value)?);
            }
        }
        let wanted = if algorithm == Algorithm::BetaExperts { 2 } else { 1 };
        if columns.len() != wanted || columns.iter().any(|c| c.len() != ids.len()) {
            return Err(bad(format!("expected {wanted} value columns per item")));
        }
        let mut columns = columns.into_iter();
        engine.state = match algorithm {
            Algorithm::BetaExperts => {
                let (a0, b0) = prior.unwrap();
                let (a, b) = (columns.next().unwrap(), columns.next().unwrap());
                EngineState::BetaExperts(BetaState::from_parts(a, b, a0, b0, rounds.unwrap())?)
            }
            Algorithm::DirichletVb => {
                EngineState::DirichletVb(DirichletState::from_alpha(columns.next().unwrap())?)
            }
            Algorithm::Al => EngineState::Al(AlState::from_weights(columns.next().unwrap(), scalar.unwrap())?),
            Algorithm::PicHunter => EngineState::PicHunter(PicHunterState::from_probabilities(
                columns.next().unwrap(),
                scalar.unwrap(),
            )?),
            Algorithm::DirichletGibbs => unreachable!(),
        };
        Ok(engine)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::generate_synthetic;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert!("nope".parse::<Algorithm>().is_err());
    }

    #[test]
    fn snapshots_round_trip_for_every_algorithm() {
        let data = generate_synthetic::<f64>(30, 3, 1).unwrap();
        for algorithm in Algorithm::ALL {
            let params = EngineParams {
                gibbs: GibbsOptions { sweeps: 5, thin: None },
                ..EngineParams::default()
            };
            let mut engine = Engine::new(algorithm, data.len(), params).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            for round in 0..4 {
                let display = engine.select(4, &mut rng).unwrap();
                engine.observe(&data, &display, round % 4).unwrap();
            }
            let text = engine.snapshot(data.ids());
            assert!(text.starts_with(SNAPSHOT_HEADER));
            let back = Engine::from_snapshot(&text, data.ids(), params).unwrap();
            assert_eq!(back, engine, "{algorithm}");
            assert_eq!(back.snapshot(data.ids()), text);
        }
    }

    #[test]
    fn snapshot_rejects_garbage() {
        let ids: Vec<String> = (0..3).map(|i| i.to_string()).collect();
        let p = EngineParams::<f64>::default();
        assert!(Engine::from_snapshot("hello", &ids, p).is_err());
        let text = format!("{SNAPSHOT_HEADER}\nalgorithm ds_vb\nitems 3\n0\t1\n1\t1\n");
        assert!(Engine::from_snapshot(&text, &ids, p).is_err());
        let text = format!("{SNAPSHOT_HEADER}\nalgorithm ds_vb\nitems 3\n0\t1\n1\t1\n9\t1\n");
        assert!(Engine::from_snapshot(&text, &ids, p).is_err());
        let text = format!("{SNAPSHOT_HEADER}\nalgorithm ds_vb\nitems 3\n0\t1\n1\t1\n2\t0.5\n");
        assert!(Engine::from_snapshot(&text, &ids, p).is_ok());
    }

    #[test]
    fn observe_rejects_bad_position() {
        let data = generate_synthetic::<f64>(10, 2, 1).unwrap();
        let mut e = Engine::new(Algorithm::BetaExperts, 10, EngineParams::default()).unwrap();
        let d = DisplaySet::new(vec![1, 2], 10).unwrap();
        assert!(e.observe(&data, &d, 2).is_err());
    }
}
