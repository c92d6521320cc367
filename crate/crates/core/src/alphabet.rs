//! Product alphabets over M discrete modalities.

use crate::error::{Error, Result};
use crate::numerics::DEFAULT_CELL_CAP;
use crate::subset::{SubsetIndex, MAX_MODALITIES};

/// Sizes |X_1|,…,|X_M| of the per-modality supports, with row-major strides
/// over the product space.
///
/// Construction rejects alphabets whose dense table would exceed the cell
/// cap (default 10^7), so oversized instances fail early.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    sizes: Vec<usize>,
    strides: Vec<usize>,
    table_len: usize,
}

impl Alphabet {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        Self::with_cap(sizes, DEFAULT_CELL_CAP)
    }

    pub fn with_cap(sizes: Vec<usize>, cap: usize) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::InvalidAlphabet("need at least one modality".into()));
        }
        if sizes.len() > MAX_MODALITIES {
            return Err(Error::InvalidAlphabet(format!(
                "at most {MAX_MODALITIES} modalities supported, got {}",
                sizes.len()
            )));
        }
        if let Some(m) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::InvalidAlphabet(format!("modality {} has size 0", m + 1)));
        }
        let mut cells = 1usize;
        for &s in &sizes {
            cells = cells
                .checked_mul(s)
                .ok_or(Error::BudgetExceeded { cells: usize::MAX, cap })?;
            if cells > cap {
                return Err(Error::BudgetExceeded { cells, cap });
            }
        }
        Ok(Self::unchecked(sizes))
    }

    /// Skips the cap check; used for marginals of already-validated alphabets.
    pub(crate) fn unchecked(sizes: Vec<usize>) -> Self {
        let mut strides = vec![1usize; sizes.len()];
        for m in (0..sizes.len().saturating_sub(1)).rev() {
            strides[m] = strides[m + 1] * sizes[m + 1];
        }
        let table_len = sizes.iter().product();
        Alphabet {
            sizes,
            strides,
            table_len,
        }
    }

    pub fn modality_count(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn size(&self, modality: usize) -> usize {
        self.sizes[modality]
    }

    /// Number of cells in the dense joint table.
    pub fn table_len(&self) -> usize {
        self.table_len
    }

    pub fn full_set(&self) -> SubsetIndex {
        SubsetIndex::full(self.modality_count())
    }

    /// Row-major index of the tuple (x_1,…,x_M).
    pub fn index_of(&self, x: &[usize]) -> usize {
        debug_assert_eq!(x.len(), self.sizes.len());
        x.iter()
            .zip(&self.strides)
            .map(|(&xi, &stride)| xi * stride)
            .sum()
    }

    /// Inverse of `index_of`.
    pub fn decode(&self, index: usize) -> Vec<usize> {
        let mut out = vec![0usize; self.sizes.len()];
        self.decode_into(index, &mut out);
        out
    }

    pub fn decode_into(&self, index: usize, out: &mut [usize]) {
        let mut rem = index;
        for (m, &stride) in self.strides.iter().enumerate() {
            out[m] = rem / stride;
            rem %= stride;
        }
    }

    /// Visits every cell in index order, passing (flat index, digits);
    /// the digit buffer is maintained as an odometer.
    pub fn visit_cells(&self, mut f: impl FnMut(usize, &[usize])) {
        let mut digits = vec![0usize; self.sizes.len()];
        for idx in 0..self.table_len {
            f(idx, &digits);
            for m in (0..self.sizes.len()).rev() {
                digits[m] += 1;
                if digits[m] < self.sizes[m] {
                    break;
                }
                digits[m] = 0;
            }
        }
    }

    /// Alphabet of the marginal over `subset` (modalities in ascending order).
    pub fn project(&self, subset: SubsetIndex) -> Result<Alphabet> {
        subset.validate(self.modality_count())?;
        if subset.is_empty() {
            return Err(Error::EmptySubset);
        }
        Ok(Alphabet::unchecked(
            subset.iter().map(|m| self.sizes[m]).collect(),
        ))
    }
}
