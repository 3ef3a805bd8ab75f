use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::chain::{apply_event, sample_event, ChainParams};
use crate::error::{Error, Result};
use crate::multigraph::{snapshot_save, MultigraphState, SnapshotMeta};

/// Called every `cadence` steps (by absolute step counter) during `run`.
pub trait Observer {
    fn cadence(&self) -> u64;
    fn observe(&mut self, state: &MultigraphState) -> Result<()>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSummary {
    pub steps: u64,
    pub final_step: u64,
    /// Steps in which the moving endpoint actually changed vertex.
    pub moves: u64,
}

fn next_due(step: u64, cadence: u64) -> u64 {
    (step / cadence + 1) * cadence
}

/// Apply `steps` transitions, calling each observer whenever the step
/// counter hits a multiple of its cadence (including the starting state
/// if it already does).
pub fn run<R: Rng + ?Sized>(
    state: &mut MultigraphState,
    params: &ChainParams,
    steps: u64,
    rng: &mut R,
    observers: &mut [&mut dyn Observer],
) -> Result<RunSummary> {
    if observers.iter().any(|o| o.cadence() == 0) {
        return Err(Error::param("observer cadence must be positive"));
    }
    let start = state.steps();
    let end = start + steps;
    let mut due: Vec<u64> = observers
        .iter_mut()
        .map(|o| {
            let c = o.cadence();
            if start % c == 0 {
                start
            } else {
                next_due(start, c)
            }
        })
        .collect();
    let mut moves = 0;
    loop {
        let now = state.steps();
        for (o, d) in observers.iter_mut().zip(due.iter_mut()) {
            if *d == now {
                o.observe(state)?;
                *d = next_due(now, o.cadence());
            }
        }
        if now == end {
            break;
        }
        let target = due.iter().copied().filter(|&d| d > now).min().unwrap_or(end).min(end);
        for _ in now..target {
            let ev = sample_event(state, params.kappa, rng)?;
            moves += u64::from(!ev.is_noop());
            apply_event(state, &ev);
        }
    }
    Ok(RunSummary {
        steps,
        final_step: end,
        moves,
    })
}

/// Records the step, the watched window's upper triangle and the degrees
/// of the window vertices.
#[derive(Debug, Clone, Default)]
pub struct TrajectoryRecorder {
    pub cadence: u64,
    pub k: usize,
    pub rows: Vec<TrajectoryRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub step: u64,
    /// `(i, j)` entries for `i <= j`, row-major.
    pub window: Vec<u32>,
    pub degrees: Vec<u32>,
}

impl TrajectoryRecorder {
    pub fn new(k: usize, cadence: u64) -> Self {
        Self {
            cadence,
            k,
            rows: Vec::new(),
        }
    }

    pub fn write_csv<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let mut w = csv::Writer::from_path(path.as_ref())?;
        let mut header = vec!["step".to_string()];
        for i in 0..self.k {
            for j in i..self.k {
                header.push(format!("x_{}_{}", i + 1, j + 1));
            }
        }
        for i in 0..self.k {
            header.push(format!("d_{}", i + 1));
        }
        w.write_record(&header)?;
        for r in &self.rows {
            let mut rec = vec![r.step.to_string()];
            rec.extend(r.window.iter().map(u32::to_string));
            rec.extend(r.degrees.iter().map(u32::to_string));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io(path.as_ref(), e))
    }
}

impl Observer for TrajectoryRecorder {
    fn cadence(&self) -> u64 {
        self.cadence
    }

    fn observe(&mut self, state: &MultigraphState) -> Result<()> {
        let k = self.k;
        let counts = match state.window() {
            Some(w) if w.k() == k => w.counts().clone(),
            _ => state.adjacency_window(k)?,
        };
        let mut window = Vec::with_capacity(k * (k + 1) / 2);
        for i in 0..k {
            for j in i..k {
                window.push(counts.get(i, j));
            }
        }
        self.rows.push(TrajectoryRow {
            step: state.steps(),
            window,
            degrees: state.degree()[..k].to_vec(),
        });
        Ok(())
    }
}

/// Full degree vectors at each observation.
#[derive(Debug, Clone, Default)]
pub struct DegreeRecorder {
    pub cadence: u64,
    pub samples: Vec<(u64, Vec<u32>)>,
}

impl DegreeRecorder {
    pub fn new(cadence: u64) -> Self {
        Self {
            cadence,
            samples: Vec::new(),
        }
    }
}

impl Observer for DegreeRecorder {
    fn cadence(&self) -> u64 {
        self.cadence
    }

    fn observe(&mut self, state: &MultigraphState) -> Result<()> {
        self.samples.push((state.steps(), state.degree().to_vec()));
        Ok(())
    }
}

/// Writes `snapshot_<step>.txt` into a directory.
#[derive(Debug, Clone)]
pub struct SnapshotWriter {
    pub cadence: u64,
    pub dir: PathBuf,
    pub meta: SnapshotMeta,
    pub written: Vec<PathBuf>,
}

impl SnapshotWriter {
    pub fn new(dir: impl Into<PathBuf>, cadence: u64, meta: SnapshotMeta) -> Self {
        Self {
            cadence,
            dir: dir.into(),
            meta,
            written: Vec::new(),
        }
    }
}

impl Observer for SnapshotWriter {
    fn cadence(&self) -> u64 {
        self.cadence
    }

    fn observe(&mut self, state: &MultigraphState) -> Result<()> {
        std::fs::create_dir_all(&self.dir).map_err(|e| Error::io(&self.dir, e))?;
        let path = self.dir.join(format!("snapshot_{:012}.txt", state.steps()));
        snapshot_save(state, self.meta, &path)?;
        self.written.push(path);
        Ok(())
    }
}
