/// Two-dimensional Sobol sequence, unscrambled, in Gray-code order.
///
/// Dimension 1 is the van der Corput sequence in base 2. Dimension 2 uses
/// the primitive polynomial `x + 1` with `m_1 = 1`, which gives direction
/// numbers `m_k = 2 m_{k-1} ^ m_{k-1}`.
#[derive(Debug, Clone)]
pub struct Sobol2 {
    dirs: [[u32; BITS]; 2],
}

const BITS: usize = 32;
const SCALE: f64 = 1.0 / 4_294_967_296.0;

impl Default for Sobol2 {
    fn default() -> Self {
        Self::new()
    }
}

impl Sobol2 {
    pub fn new() -> Self {
        let mut dirs = [[0u32; BITS]; 2];
        let mut m: u32 = 1;
        for k in 0..BITS {
            dirs[0][k] = 1u32 << (BITS - 1 - k);
            if k > 0 {
                m = (m << 1) ^ m;
            }
            dirs[1][k] = m << (BITS - 1 - k);
        }
        Sobol2 { dirs }
    }

    /// Point number `n` (point 0 is the origin).
    pub fn point(&self, n: u64) -> [f64; 2] {
        let gray = n ^ (n >> 1);
        let mut x = [0u32; 2];
        for k in 0..BITS {
            if (gray >> k) & 1 == 1 {
                x[0] ^= self.dirs[0][k];
                x[1] ^= self.dirs[1][k];
            }
        }
        [x[0] as f64 * SCALE, x[1] as f64 * SCALE]
    }

    /// `count` points taken after skipping `skip` and keeping every
    /// `stride`-th point thereafter.
    pub fn thinned(&self, count: usize, skip: u64, stride: u64) -> Vec<[f64; 2]> {
        (0..count as u64).map(|k| self.point(skip + k * stride)).collect()
    }
}
