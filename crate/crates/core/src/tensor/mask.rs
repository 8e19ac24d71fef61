use crate::error::{shape_err, Error, Result};

/// Set of observed linear offsets into a tensor's element ordering.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mask {
    n1: usize,
    n2: usize,
    n3: usize,
    indices: Vec<usize>,
}

impl Mask {
    /// Validates that `indices` are strictly increasing and in range.
    pub fn new(n1: usize, n2: usize, n3: usize, indices: Vec<usize>) -> Result<Self> {
        let total = n1 * n2 * n3;
        if total == 0 {
            return shape_err(format!("extents must be positive, got {n1}x{n2}x{n3}"));
        }
        if let Some(w) = indices.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::Format(format!(
                "mask offsets not strictly increasing at {} -> {}",
                w[0], w[1]
            )));
        }
        if let Some(&last) = indices.last() {
            if last >= total {
                return Err(Error::Format(format!(
                    "mask offset {last} out of range for {total} entries"
                )));
            }
        }
        Ok(Self {
            n1,
            n2,
            n3,
            indices,
        })
    }

    /// Sorts and deduplicates before validating.
    pub fn from_unsorted(n1: usize, n2: usize, n3: usize, mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        indices.dedup();
        Self::new(n1, n2, n3, indices)
    }

    pub fn full(n1: usize, n2: usize, n3: usize) -> Self {
        Self {
            n1,
            n2,
            n3,
            indices: (0..n1 * n2 * n3).collect(),
        }
    }

    pub fn empty(n1: usize, n2: usize, n3: usize) -> Self {
        Self {
            n1,
            n2,
            n3,
            indices: Vec::new(),
        }
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.n1, self.n2, self.n3)
    }

    pub fn total(&self) -> usize {
        self.n1 * self.n2 * self.n3
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn sampling_rate(&self) -> f64 {
        self.indices.len() as f64 / self.total() as f64
    }

    pub fn contains(&self, offset: usize) -> bool {
        self.indices.binary_search(&offset).is_ok()
    }

    /// Dense membership vector over all offsets.
    pub fn to_bitmap(&self) -> Vec<bool> {
        let mut bits = vec![false; self.total()];
        for &o in &self.indices {
            bits[o] = true;
        }
        bits
    }

    pub fn complement(&self) -> Mask {
        let bits = self.to_bitmap();
        Mask {
            indices: (0..self.total()).filter(|&o| !bits[o]).collect(),
            ..*self
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_offsets() {
        assert!(Mask::new(2, 2, 2, vec![1, 1]).is_err());
        assert!(Mask::new(2, 2, 2, vec![3, 2]).is_err());
        assert!(Mask::new(2, 2, 2, vec![8]).is_err());
        assert!(Mask::new(2, 2, 2, vec![0, 7]).is_ok());
    }

    #[test]
    fn complement_partitions() {
        let m = Mask::from_unsorted(3, 1, 2, vec![4, 0, 4, 2]).unwrap();
        assert_eq!(m.indices(), &[0, 2, 4]);
        assert_eq!(m.complement().indices(), &[1, 3, 5]);
        assert_eq!(m.sampling_rate(), 0.5);
        assert!(m.contains(2) && !m.contains(3));
        assert_eq!(Mask::full(2, 2, 2).sampling_rate(), 1.0);
        assert_eq!(Mask::empty(2, 2, 2).sampling_rate(), 0.0);
    }
}
