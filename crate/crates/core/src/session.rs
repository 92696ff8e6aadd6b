//! Interactive search sessions driven by a human's choices.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::{euclidean, Dataset};
use crate::engine::{Algorithm, Engine, EngineParams};
use crate::error::{Error, Result};
use crate::partition::DisplaySet;
use crate::scalar::Scalar;

pub const DEFAULT_MAX_ROUNDS: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct SessionConfig<F> {
    pub algorithm: Algorithm,
    pub k: usize,
    pub seed: u64,
    pub max_rounds: usize,
    pub params: EngineParams<F>,
    /// Item the user is looking for, if known; only used for summaries.
    pub target_preview: Option<usize>,
}

impl<F: Scalar> SessionConfig<F> {
    pub fn new(algorithm: Algorithm, k: usize, seed: u64) -> Self {
        SessionConfig {
            algorithm,
            k,
            seed,
            max_rounds: DEFAULT_MAX_ROUNDS,
            params: EngineParams::default(),
            target_preview: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SessionStatus {
    Active,
    Found(usize),
    Abandoned,
}

/// One accepted choice: the display shown and the item picked from it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranscriptEntry {
    pub display: Vec<usize>,
    pub chosen: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionSummary<F> {
    pub status: SessionStatus,
    pub rounds: usize,
    /// Mean display-to-preview distance per round; `None` without a preview.
    pub distances: Option<Vec<F>>,
}

#[derive(Debug, Clone)]
pub struct Session<F> {
    config: SessionConfig<F>,
    engine: Engine<F>,
    rng: ChaCha8Rng,
    round: usize,
    display: DisplaySet,
    status: SessionStatus,
    transcript: Vec<TranscriptEntry>,
    distances: Vec<F>,
}

impl<F: Scalar> Session<F> {
    /// Starts a session and selects the round-1 display.
    pub fn create(dataset: &Dataset<F>, config: SessionConfig<F>) -> Result<Self> {
        let n = dataset.len();
        if config.k == 0 || config.k > n {
            return Err(Error::InvalidDisplaySize { k: config.k, n });
        }
        if config.max_rounds == 0 {
            return Err(Error::validation("max_rounds must be >= 1"));
        }
        if let Some(t) = config.target_preview {
            dataset.check_index(t)?;
        }
        let engine = Engine::new(config.algorithm, n, config.params)?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let display = engine.select(config.k, &mut rng)?;
        let mut session = Session {
            config,
            engine,
            rng,
            round: 1,
            display,
            status: SessionStatus::Active,
            transcript: Vec::new(),
            distances: Vec::new(),
        };
        session.record_distance(dataset);
        Ok(session)
    }

    fn record_distance(&mut self, dataset: &Dataset<F>) {
        if let Some(t) = self.config.target_preview {
            let t = dataset.vector(t);
            let sum: F = self
                .display
                .indices()
                .iter()
                .map(|&i| euclidean(dataset.vector(i), t))
                .sum();
            self.distances.push(sum / F::from_usize(self.display.len()).unwrap());
        }
    }

    pub fn config(&self) -> &SessionConfig<F> {
        &self.config
    }

    pub fn engine(&self) -> &Engine<F> {
        &self.engine
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn display(&self) -> &DisplaySet {
        &self.display
    }

    pub fn status(&self) -> SessionStatus {
        self.status
    }

    pub fn transcript(&self) -> &[TranscriptEntry] {
        &self.transcript
    }

    pub fn rounds_remaining(&self) -> usize {
        self.config.max_rounds - self.round
    }

    /// Applies the choice of `item` and moves to the next round. On error the
    /// session is left untouched.
    pub fn choose(&mut self, dataset: &Dataset<F>, item: usize) -> Result<()> {
        if self.status != SessionStatus::Active {
            return Err(Error::SessionFinished);
        }
        let position = self.display.position_of(item).ok_or(Error::NotDisplayed(item))?;
        if self.round >= self.config.max_rounds {
            return Err(Error::RoundLimit(self.config.max_rounds));
        }
        let mut engine = self.engine.clone();
        engine.observe(dataset, &self.display, position)?;
        let next = engine.select(self.config.k, &mut self.rng)?;
        self.engine = engine;
        let shown = std::mem::replace(&mut self.display, next);
        self.transcript.push(TranscriptEntry {
            display: shown.into_vec(),
            chosen: item,
        });
        self.round += 1;
        self.record_distance(dataset);
        Ok(())
    }

    /// Ends the session: `Some(item)` marks `item` (which must be on screen)
    /// as found, `None` abandons.
    pub fn finish(&mut self, found: Option<usize>) -> Result<SessionSummary<F>> {
        if self.status != SessionStatus::Active {
            return Err(Error::SessionFinished);
        }
        self.status = match found {
            Some(item) if self.display.contains(item) => SessionStatus::Found(item),
            Some(item) => return Err(Error::NotDisplayed(item)),
            None => SessionStatus::Abandoned,
        };
        Ok(self.summary())
    }

    pub fn summary(&self) -> SessionSummary<F> {
        SessionSummary {
            status: self.status,
            rounds: self.round,
            distances: self.config.target_preview.map(|_| self.distances.clone()),
        }
    }
}

/// Rebuilds an engine from a transcript alone.
pub fn replay_transcript<F: Scalar>(
    dataset: &Dataset<F>,
    algorithm: Algorithm,
    params: EngineParams<F>,
    transcript: &[TranscriptEntry],
) -> Result<Engine<F>> {
    let mut engine = Engine::new(algorithm, dataset.len(), params)?;
    for entry in transcript {
        let display = DisplaySet::new(entry.display.clone(), dataset.len())?;
        let position = display
            .position_of(entry.chosen)
            .ok_or(Error::NotDisplayed(entry.chosen))?;
        engine.observe(dataset, &display, position)?;
    }
    Ok(engine)
}
