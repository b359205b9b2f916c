//! Multilevel PCM weight programming with a per-cell refresh guard.

use serde::{Deserialize, Serialize};

use super::mvm::Matrix;
use super::quant::{quantize, QuantSpec};
use super::rng::{inject_noise, KeyedRng, Site};
use crate::catalog::DeviceCatalog;
use crate::error::{Error, Result};
use crate::power::vcsel_program_energy;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProgramEvent {
    pub cell: usize,
    pub t_ns: f64,
    pub program_pj: f64,
    pub erase_pj: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EventLog {
    pub events: Vec<ProgramEvent>,
}

impl EventLog {
    /// Optical energy delivered to the cells, pJ.
    pub fn optical_pj(&self) -> f64 {
        self.events.iter().map(|e| e.program_pj + e.erase_pj).sum()
    }

    /// Electrical VCSEL energy behind the logged optical energy, pJ.
    pub fn electrical_pj(&self, cat: &DeviceCatalog) -> Result<f64> {
        vcsel_program_energy(
            self.optical_pj(),
            cat.grating_coupler.insertion_loss_db,
            cat.vcsel.efficiency,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Programmed {
    pub levels: Vec<u32>,
    pub values: Matrix,
}

/// A `rows × cols` PCM array that remembers when each cell was last written.
#[derive(Debug, Clone)]
pub struct PcmArray {
    rows: usize,
    cols: usize,
    last_ns: Vec<Option<f64>>,
    cycle_ns: f64,
    program_pj: f64,
    erase_pj: f64,
    levels_bits: u32,
    program_std: f64,
}

impl PcmArray {
    pub fn new(rows: usize, cols: usize, cat: &DeviceCatalog) -> Self {
        let pcm = &cat.pcm;
        Self {
            rows,
            cols,
            last_ns: vec![None; rows * cols],
            cycle_ns: pcm.cycle_ns(),
            program_pj: pcm.program_energy_pj,
            erase_pj: pcm.erase_energy_pj,
            levels_bits: pcm.levels_bits,
            program_std: pcm.program_std,
        }
    }

    pub fn cells(&self) -> usize {
        self.rows * self.cols
    }

    /// Records a write of `cells` at `t_ns`. Fails without side effects if
    /// any cell was written less than one full PCM cycle earlier.
    pub fn touch(&mut self, cells: &[usize], t_ns: f64, log: &mut EventLog) -> Result<()> {
        for &c in cells {
            if c >= self.cells() {
                return Err(Error::Dimension(format!("cell {c} outside {}x{} array", self.rows, self.cols)));
            }
            if let Some(prev) = self.last_ns[c] {
                let dt = t_ns - prev;
                if dt < self.cycle_ns {
                    return Err(Error::RefreshViolation {
                        cell: c,
                        interval_ns: dt,
                        cycle_ns: self.cycle_ns,
                    });
                }
            }
        }
        for &c in cells {
            self.last_ns[c] = Some(t_ns);
            log.events.push(ProgramEvent {
                cell: c,
                t_ns,
                program_pj: self.program_pj,
                erase_pj: self.erase_pj,
            });
        }
        Ok(())
    }

    /// Programs every cell to the nearest of `2^levels_bits` levels on
    /// `range`, with relative Gaussian programming error.
    pub fn program(
        &mut self,
        weights: &Matrix,
        range: (f64, f64),
        t_ns: f64,
        rng: &KeyedRng,
        log: &mut EventLog,
    ) -> Result<Programmed> {
        if weights.rows != self.rows || weights.cols != self.cols {
            return Err(Error::Dimension(format!(
                "{}x{} weights on a {}x{} array",
                weights.rows, weights.cols, self.rows, self.cols
            )));
        }
        let q = QuantSpec::new(self.levels_bits, range.0, range.1)?;
        if let Some((i, v)) = weights
            .data
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v >= q.lo && **v <= q.hi))
        {
            return Err(Error::field(format!("weights[{i}]"), format!("{v} outside [{}, {}]", q.lo, q.hi)));
        }
        let all: Vec<usize> = (0..self.cells()).collect();
        self.touch(&all, t_ns, log)?;

        let mut levels = Vec::with_capacity(self.cells());
        let mut values = Matrix::zeros(self.rows, self.cols);
        for (c, &w) in weights.data.iter().enumerate() {
            let (l, v) = quantize(w, &q);
            levels.push(l);
            values.data[c] = if self.program_std == 0.0 {
                v
            } else {
                let mut r = rng.stream(0, 0, Site::Program, c as u64);
                inject_noise(v, self.program_std, &mut r)
            };
        }
        Ok(Programmed { levels, values })
    }
}

/// One-shot programming of a fresh array.
pub fn pcm_program(weights: &Matrix, range: (f64, f64), cat: &DeviceCatalog, seed: u64) -> Result<(Programmed, EventLog)> {
    let mut arr = PcmArray::new(weights.rows, weights.cols, cat);
    let mut log = EventLog::default();
    let p = arr.program(weights, range, 0.0, &KeyedRng::new(seed), &mut log)?;
    Ok((p, log))
}
