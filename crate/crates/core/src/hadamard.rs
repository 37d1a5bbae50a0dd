//! Sylvester Hadamard matrices, the modified 0/1 sensing matrix built from
//! them, and the fast transform used to apply both without materializing
//! an N×N matrix.
//!
//! The sensing matrix is `A = (H + J) / 2` where `H` is the Sylvester
//! Hadamard matrix of order `N = 2^k` and `J` is the all-ones matrix. Its
//! inverse has the closed form `A⁻¹ = (2/N)·H − O`, where `O` is zero except
//! for a one in the top-left corner.

use ndarray::Array2;

use crate::error::{invalid, Error, Result};

/// Largest `log2(N)` for which dense matrices are materialized.
pub const DENSE_MAX_LOG2: u32 = 12;

/// Largest order for which dense matrices are materialized.
pub const DENSE_MAX_ORDER: usize = 1 << DENSE_MAX_LOG2;

/// Largest order accepted by [`reduced_inverse_check`].
pub const REDUCED_CHECK_MAX_ORDER: usize = 256;

/// Entrywise tolerance used by the identity checks.
pub const IDENTITY_TOLERANCE: f64 = 1e-9;

fn check_power_of_two(len: usize) -> Result<u32> {
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(len));
    }
    Ok(len.trailing_zeros())
}

/// Dense ±1 Sylvester Hadamard matrix of order `2^k`.
pub fn sylvester_hadamard(k: u32) -> Result<Array2<f64>> {
    if k > DENSE_MAX_LOG2 {
        return Err(Error::DenseLimit {
            order: 1usize.checked_shl(k).unwrap_or(usize::MAX),
            limit: DENSE_MAX_ORDER,
        });
    }
    let n = 1usize << k;
    let mut h = Array2::<f64>::zeros((n, n));
    h[[0, 0]] = 1.0;
    let mut size = 1;
    while size < n {
        for i in 0..size {
            for j in 0..size {
                let v = h[[i, j]];
                h[[i, j + size]] = v;
                h[[i + size, j]] = v;
                h[[i + size, j + size]] = -v;
            }
        }
        size *= 2;
    }
    Ok(h)
}

/// In-place fast Walsh–Hadamard transform, `v ← H·v` in Sylvester order.
///
/// Radix-2 butterflies with ascending stride; the reduction order is fixed
/// so the output is bit-reproducible.
pub fn fwht_in_place(v: &mut [f64]) -> Result<()> {
    check_power_of_two(v.len())?;
    let n = v.len();
    let mut half = 1;
    while half < n {
        for block in v.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        half *= 2;
    }
    Ok(())
}

/// Returns `H·v`.
pub fn fwht(v: &[f64]) -> Result<Vec<f64>> {
    let mut out = v.to_vec();
    fwht_in_place(&mut out)?;
    Ok(out)
}

/// Dense modified sensing matrix `a_ij = (h_ij + 1) / 2`.
pub fn sensing_matrix(order: usize) -> Result<Array2<f64>> {
    let k = check_power_of_two(order)?;
    Ok(sylvester_hadamard(k)?.mapv(|h| (h + 1.0) / 2.0))
}

/// Dense closed-form inverse `(2/N)·H − O`.
pub fn inverse_matrix(order: usize) -> Result<Array2<f64>> {
    let k = check_power_of_two(order)?;
    let scale = 2.0 / order as f64;
    let mut inv = sylvester_hadamard(k)?.mapv(|h| scale * h);
    inv[[0, 0]] -= 1.0;
    Ok(inv)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorMode {
    MatrixFree,
    DenseOracle,
}

#[derive(Clone, Debug)]
struct DensePair {
    forward: Array2<f64>,
    inverse: Array2<f64>,
}

/// The order-N modified Hadamard sensing operator.
///
/// Immutable once built. The matrix-free mode is the production path; the
/// dense mode stores `A` and its closed-form inverse and applies them by
/// plain matrix–vector products, for cross-checking.
#[derive(Clone, Debug)]
pub struct SensingOperator {
    order: usize,
    dense: Option<DensePair>,
}

impl SensingOperator {
    pub fn new(order: usize) -> Result<Self> {
        check_power_of_two(order)?;
        if order < 2 {
            return Err(invalid("sensing operator order must be at least 2"));
        }
        Ok(Self { order, dense: None })
    }

    pub fn dense_oracle(order: usize) -> Result<Self> {
        let mut op = Self::new(order)?;
        op.dense = Some(DensePair {
            forward: sensing_matrix(order)?,
            inverse: inverse_matrix(order)?,
        });
        Ok(op)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn mode(&self) -> OperatorMode {
        if self.dense.is_some() {
            OperatorMode::DenseOracle
        } else {
            OperatorMode::MatrixFree
        }
    }

    /// The dense `A`, present only in dense-oracle mode.
    pub fn dense_matrix(&self) -> Option<&Array2<f64>> {
        self.dense.as_ref().map(|d| &d.forward)
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.order {
            return Err(Error::LengthMismatch {
                expected: self.order,
                actual: len,
            });
        }
        Ok(())
    }

    /// Noise-free measurements `y = A·x`.
    ///
    /// The first pixel is reserved dark and must be exactly zero. The first
    /// measurement is set to `Σ x_j` computed by a sequential sum, so it
    /// agrees bit-for-bit with a scene's stored brightness.
    pub fn apply_sensing(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x.len())?;
        if x[0] != 0.0 {
            return Err(Error::DarkPixel(x[0]));
        }
        let total: f64 = x.iter().sum();
        let mut y = match &self.dense {
            Some(d) => d.forward.dot(&ndarray::ArrayView1::from(x)).to_vec(),
            None => {
                let mut y = fwht(x)?;
                for v in &mut y {
                    *v = 0.5 * (*v + total);
                }
                y
            }
        };
        y[0] = total;
        Ok(y)
    }

    /// Reconstruction `x̃ = A⁻¹·z = (2/N)·H·z − O·z`.
    pub fn apply_inverse(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.check_len(z.len())?;
        match &self.dense {
            Some(d) => Ok(d.inverse.dot(&ndarray::ArrayView1::from(z)).to_vec()),
            None => {
                let scale = 2.0 / self.order as f64;
                let mut x = fwht(z)?;
                for v in &mut x {
                    *v *= scale;
                }
                x[0] -= z[0];
                Ok(x)
            }
        }
    }
}

/// How the symbol `n` in the reduced-matrix inverse formula is read.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReducedOrder {
    /// `n = N`, the order of the full sensing matrix.
    FullOrder,
    /// `n = N − 1`, the order of the reduced matrix itself.
    ReducedOrder,
}

impl ReducedOrder {
    pub fn value(self, order: usize) -> f64 {
        match self {
            ReducedOrder::FullOrder => order as f64,
            ReducedOrder::ReducedOrder => (order - 1) as f64,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ReducedOrder::FullOrder => "n=N",
            ReducedOrder::ReducedOrder => "n=N-1",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    NotApplicable,
}

/// Outcome of [`reduced_inverse_check`].
#[derive(Clone, Debug)]
pub struct ReducedInverseReport {
    pub order: usize,
    /// Max entrywise deviation of `A_R·A_R⁻¹` from `I` per reading of `n`;
    /// `None` where the formula divides by zero.
    pub candidates: Vec<(ReducedOrder, Option<f64>)>,
}

impl ReducedInverseReport {
    /// The reading of `n` with the smallest deviation, if any is defined.
    pub fn resolved(&self) -> Option<(ReducedOrder, f64)> {
        self.candidates
            .iter()
            .filter_map(|&(r, d)| d.map(|d| (r, d)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    pub fn status(&self) -> CheckStatus {
        // A_R is the 1×1 zero matrix at N = 2.
        if self.order <= 2 {
            return CheckStatus::NotApplicable;
        }
        match self.resolved() {
            Some((_, d)) if d < IDENTITY_TOLERANCE => CheckStatus::Pass,
            Some(_) => CheckStatus::Fail,
            None => CheckStatus::NotApplicable,
        }
    }
}

/// Evaluates the closed-form inverse of `A_R` (A without its first row and
/// column), `A_R⁻¹ = 2/(n−2)·(A_R − (n−4)/n·(Θ − A_R))`, under both
/// readings of `n`, and measures how far `A_R·A_R⁻¹` is from the identity.
pub fn reduced_inverse_check(k: u32) -> Result<ReducedInverseReport> {
    let order = 1usize
        .checked_shl(k)
        .filter(|&n| (2..=REDUCED_CHECK_MAX_ORDER).contains(&n))
        .ok_or_else(|| {
            invalid(format!(
                "reduced inverse check needs 2 <= 2^k <= {REDUCED_CHECK_MAX_ORDER}, got k={k}"
            ))
        })?;
    let a = sensing_matrix(order)?;
    let reduced = a.slice(ndarray::s![1.., 1..]).to_owned();
    let m = order - 1;

    let candidates = [ReducedOrder::FullOrder, ReducedOrder::ReducedOrder]
        .into_iter()
        .map(|reading| {
            let n = reading.value(order);
            if n - 2.0 == 0.0 || n == 0.0 {
                return (reading, None);
            }
            let c = (n - 4.0) / n;
            let s = 2.0 / (n - 2.0);
            let inv = reduced.mapv(|r| s * (r - c * (1.0 - r)));
            let prod = reduced.dot(&inv);
            let mut dev = 0.0f64;
            for i in 0..m {
                for j in 0..m {
                    let target = if i == j { 1.0 } else { 0.0 };
                    dev = dev.max((prod[[i, j]] - target).abs());
                }
            }
            (reading, Some(dev))
        })
        .collect();

    Ok(ReducedInverseReport { order, candidates })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dense_mul(h: &Array2<f64>, v: &[f64]) -> Vec<f64> {
        let n = v.len();
        (0..n)
            .map(|i| (0..n).map(|j| h[[i, j]] * v[j]).sum())
            .collect()
    }

    #[test]
    fn sylvester_base_cases() {
        assert_eq!(sylvester_hadamard(0).unwrap(), ndarray::arr2(&[[1.0]]));
        assert_eq!(
            sylvester_hadamard(1).unwrap(),
            ndarray::arr2(&[[1.0, 1.0], [1.0, -1.0]])
        );
    }

    #[test]
    fn sylvester_order_8_is_orthogonal() {
        let h = sylvester_hadamard(3).unwrap();
        for i in 0..8 {
            assert_eq!(h[[0, i]], 1.0);
            assert_eq!(h[[i, 0]], 1.0);
            for j in 0..8 {
                let dot: f64 = (0..8).map(|l| h[[i, l]] * h[[j, l]]).sum();
                assert_eq!(dot, if i == j { 8.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn sylvester_rejects_oversized() {
        let err = sylvester_hadamard(DENSE_MAX_LOG2 + 1).unwrap_err();
        assert!(err.to_string().contains("4096"), "{err}");
    }

    #[test]
    fn fwht_small_cases() {
        assert_eq!(fwht(&[3.0, 5.0]).unwrap(), vec![8.0, -2.0]);
        assert_eq!(fwht(&[1.0, 0.0, 0.0, 0.0]).unwrap(), vec![1.0; 4]);
        assert!(matches!(fwht(&[1.0; 6]), Err(Error::NotPowerOfTwo(6))));
        assert!(matches!(fwht(&[]), Err(Error::NotPowerOfTwo(0))));
    }

    #[test]
    fn fwht_matches_dense_at_1024() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let v: Vec<f64> = (0..1024).map(|_| rng.random_range(-1.0..1.0)).collect();
        let h = sylvester_hadamard(10).unwrap();
        let expected = dense_mul(&h, &v);
        let got = fwht(&v).unwrap();
        let scale = expected.iter().map(|x| x.abs()).fold(0.0, f64::max);
        for (g, e) in got.iter().zip(&expected) {
            assert!((g - e).abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn sensing_two_by_two() {
        let op = SensingOperator::new(2).unwrap();
        assert_eq!(op.apply_sensing(&[0.0, 3.0]).unwrap(), vec![3.0, 0.0]);
        assert!(matches!(
            op.apply_sensing(&[1.0, 3.0]),
            Err(Error::DarkPixel(_))
        ));
        assert!(matches!(
            op.apply_sensing(&[0.0, 1.0, 2.0, 3.0]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn inverse_two_by_two() {
        let inv = inverse_matrix(2).unwrap();
        assert_eq!(inv, ndarray::arr2(&[[0.0, 1.0], [1.0, -1.0]]));
        let a = sensing_matrix(2).unwrap();
        assert_eq!(a.dot(&inv), Array2::<f64>::eye(2));
    }

    #[test]
    fn operator_rejects_bad_orders() {
        assert!(SensingOperator::new(1).is_err());
        assert!(SensingOperator::new(12).is_err());
        assert!(SensingOperator::dense_oracle(DENSE_MAX_ORDER * 2).is_err());
    }

    #[test]
    fn matrix_free_matches_dense_at_256() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut x: Vec<f64> = (0..256).map(|_| rng.random_range(0.0..100.0)).collect();
        x[0] = 0.0;
        let fast = SensingOperator::new(256).unwrap();
        let dense = SensingOperator::dense_oracle(256).unwrap();
        assert_eq!(dense.mode(), OperatorMode::DenseOracle);
        let yf = fast.apply_sensing(&x).unwrap();
        let yd = dense.apply_sensing(&x).unwrap();
        let scale = yd.iter().map(|v| v.abs()).fold(0.0, f64::max);
        for (a, b) in yf.iter().zip(&yd) {
            assert!((a - b).abs() <= 1e-9 * scale);
        }
        assert_eq!(yf[0], x.iter().sum::<f64>());
    }

    #[test]
    fn column_sums_without_first_row() {
        for k in 2..=10 {
            let n = 1usize << k;
            let a = sensing_matrix(n).unwrap();
            for j in 1..n {
                let s: f64 = (1..n).map(|i| a[[i, j]]).sum();
                assert_eq!(s, (n / 2 - 1) as f64, "N={n} column {j}");
            }
        }
    }

    #[test]
    fn reduced_inverse_resolves_full_order() {
        for k in [2, 4] {
            let report = reduced_inverse_check(k).unwrap();
            assert_eq!(report.status(), CheckStatus::Pass);
            let (reading, dev) = report.resolved().unwrap();
            assert_eq!(reading, ReducedOrder::FullOrder);
            assert!(dev < 1e-9);
        }
        let degenerate = reduced_inverse_check(1).unwrap();
        assert_eq!(degenerate.status(), CheckStatus::NotApplicable);
        assert!(reduced_inverse_check(0).is_err());
        assert!(reduced_inverse_check(9).is_err());
    }

    proptest! {
        #[test]
        fn fwht_is_an_involution_up_to_scale(
            k in 1u32..9,
            seed in any::<u64>(),
        ) {
            use rand::{Rng, SeedableRng};
            let n = 1usize << k;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let v: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
            let back = fwht(&fwht(&v).unwrap()).unwrap();
            for (b, x) in back.iter().zip(&v) {
                prop_assert!((b - n as f64 * x).abs() <= 1e-9 * n as f64 * 10.0);
            }
        }

        #[test]
        fn inverse_undoes_sensing(k in 1u32..11, seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let n = 1usize << k;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut x: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1e4)).collect();
            x[0] = 0.0;
            let op = SensingOperator::new(n).unwrap();
            let back = op.apply_inverse(&op.apply_sensing(&x).unwrap()).unwrap();
            let scale = x.iter().copied().fold(1.0, f64::max);
            for (b, v) in back.iter().zip(&x) {
                prop_assert!((b - v).abs() <= 1e-9 * scale);
            }
        }
    }
}
