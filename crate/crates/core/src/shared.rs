//! Shared parameter matrix for asynchronous (Hogwild-style) SGD.
//!
//! Workers copy rows out, compute locally, and store them back with relaxed
//! atomics. Interleaved updates to the same row from different threads can
//! overwrite each other, so results depend on scheduling; only the
//! deterministic single-threaded trainers are reproducible.

use std::sync::atomic::{AtomicU64, Ordering};

pub(crate) struct SharedRows {
    cells: Vec<AtomicU64>,
    dim: usize,
}

impl SharedRows {
    pub(crate) fn new(data: &[f64], dim: usize) -> Self {
        SharedRows {
            cells: data.iter().map(|x| AtomicU64::new(x.to_bits())).collect(),
            dim,
        }
    }

    pub(crate) fn load(&self, row: usize, out: &mut [f64]) {
        let cells = &self.cells[row * self.dim..(row + 1) * self.dim];
        for (o, c) in out.iter_mut().zip(cells) {
            *o = f64::from_bits(c.load(Ordering::Relaxed));
        }
    }

    pub(crate) fn store(&self, row: usize, values: &[f64]) {
        let cells = &self.cells[row * self.dim..(row + 1) * self.dim];
        for (c, v) in cells.iter().zip(values) {
            c.store(v.to_bits(), Ordering::Relaxed);
        }
    }

    pub(crate) fn into_vec(self) -> Vec<f64> {
        self.cells
            .into_iter()
            .map(|c| f64::from_bits(c.into_inner()))
            .collect()
    }
}

/// How an embedding trainer schedules its updates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TrainMode {
    /// Single-threaded, bit-reproducible for a fixed seed.
    #[default]
    Deterministic,
    /// Lock-free updates from `threads` workers; nondeterministic.
    Hogwild { threads: usize },
}
