/// Binary expansion of a bounded integer: weights `1, 2, .., 2^(m-2)` plus a
/// final weight that caps the representable maximum exactly at `upper`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitGroup {
    pub bits: Vec<usize>,
    pub weights: Vec<u64>,
    pub upper: u64,
}

/// Weights for `0..=upper`; bits are numbered from 0 until [`BitGroup::offset`].
pub fn binary_expand(upper: u64) -> BitGroup {
    if upper == 0 {
        return BitGroup { bits: Vec::new(), weights: Vec::new(), upper };
    }
    // m = ceil(log2(upper + 1)) = number of bits of `upper`.
    let m = 64 - upper.leading_zeros();
    let mut weights: Vec<u64> = (0..m - 1).map(|i| 1u64 << i).collect();
    weights.push(upper - ((1u64 << (m - 1)) - 1));
    BitGroup { bits: (0..m as usize).collect(), weights, upper }
}

impl BitGroup {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn offset(mut self, base: usize) -> Self {
        self.bits.iter_mut().for_each(|b| *b += base);
        self
    }

    pub fn decode(&self, bits: &[bool]) -> u64 {
        self.bits.iter().zip(&self.weights).filter(|(&b, _)| bits[b]).map(|(_, &w)| w).sum()
    }

    /// Bit pattern (in group order) whose weighted sum is `value`.
    pub fn represent(&self, value: u64) -> Option<Vec<bool>> {
        if value > self.upper {
            return None;
        }
        let Some((&last, low)) = self.weights.split_last() else {
            return Some(Vec::new());
        };
        let take_last = value >= last;
        let rest = if take_last { value - last } else { value };
        let mut out: Vec<bool> = (0..low.len()).map(|i| rest >> i & 1 == 1).collect();
        out.push(take_last);
        Some(out)
    }
}
