use super::BinMatrix;

/// Incremental echelon basis indexed by pivot bit.
///
/// `slots[b]` holds a basis vector whose leading bit is `b`, or 0. Reducing a
/// vector walks the pivots from the top bit down, so membership and
/// insertion cost `O(n)` word operations.
#[derive(Clone, Debug)]
pub struct EchelonBasis {
    n: usize,
    slots: [u32; 32],
    dim: usize,
}

impl EchelonBasis {
    pub fn new(n: usize) -> Self {
        EchelonBasis {
            n,
            slots: [0; 32],
            dim: 0,
        }
    }

    pub fn from_rows(n: usize, rows: &[u32]) -> Self {
        let mut b = EchelonBasis::new(n);
        for &r in rows {
            b.insert(r);
        }
        b
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Residue of `v` after elimination against the pivots; zero iff `v` is
    /// in the span.
    #[inline]
    pub fn reduce(&self, mut v: u32) -> u32 {
        while v != 0 {
            let top = 31 - v.leading_zeros() as usize;
            let s = self.slots[top];
            if s == 0 {
                return v;
            }
            v ^= s;
        }
        0
    }

    #[inline]
    pub fn contains(&self, v: u32) -> bool {
        self.reduce(v) == 0
    }

    /// Adds `v` to the basis. Returns `false` (and leaves the basis
    /// unchanged) when `v` is already in the span.
    #[inline]
    pub fn insert(&mut self, v: u32) -> bool {
        let r = self.reduce(v);
        if r == 0 {
            return false;
        }
        let top = 31 - r.leading_zeros() as usize;
        self.slots[top] = r;
        self.dim += 1;
        true
    }

    /// Reduced row-echelon form, pivots in decreasing bit order (x_1 first).
    pub fn to_rref(&self) -> BinMatrix {
        let mut slots = self.slots;
        // clear every pivot bit from the rows above it
        for p in 0..32 {
            if slots[p] == 0 {
                continue;
            }
            for q in (p + 1)..32 {
                if (slots[q] >> p) & 1 == 1 {
                    slots[q] ^= slots[p];
                }
            }
        }
        let rows = slots.iter().rev().copied().filter(|&s| s != 0).collect();
        BinMatrix { n: self.n, rows }
    }
}
