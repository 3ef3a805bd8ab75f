use std::fmt;

use serde::{Deserialize, Serialize};

/// Dense `k x k` matrix of edge multiplicities.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SquareMatrix {
    k: usize,
    data: Vec<u32>,
}

impl SquareMatrix {
    pub fn zeros(k: usize) -> Self {
        Self {
            k,
            data: vec![0; k * k],
        }
    }

    /// Build from rows; `None` if the rows are ragged.
    pub fn from_rows(rows: &[Vec<u32>]) -> Option<Self> {
        let k = rows.len();
        if rows.iter().any(|r| r.len() != k) {
            return None;
        }
        Some(Self {
            k,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.k + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u32) {
        self.data[i * self.k + j] = v;
    }

    #[inline]
    pub(crate) fn add(&mut self, i: usize, j: usize, dv: i64) {
        let cell = &mut self.data[i * self.k + j];
        *cell = (i64::from(*cell) + dv) as u32;
    }

    /// Symmetric with every diagonal entry even.
    pub fn is_adjacency(&self) -> bool {
        (0..self.k).all(|i| self.get(i, i) % 2 == 0 && (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn max_entry(&self) -> u32 {
        self.data.iter().copied().max().unwrap_or(0)
    }

    pub fn rows(&self) -> Vec<Vec<u32>> {
        self.data.chunks(self.k.max(1)).map(|c| c.to_vec()).take(self.k).collect()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.data
    }
}

impl fmt::Debug for SquareMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.rows()).finish()
    }
}
