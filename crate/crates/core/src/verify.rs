//! Matrix identity checks behind `lci-snr --cmd verify`.

use ndarray::Array2;

use crate::error::Result;
use crate::hadamard::{
    inverse_matrix, reduced_inverse_check, sensing_matrix, CheckStatus, SensingOperator,
    IDENTITY_TOLERANCE, REDUCED_CHECK_MAX_ORDER,
};
use crate::rng::RngStream;

#[derive(Clone, Debug)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub order: usize,
    pub status: CheckStatus,
    pub detail: String,
}

#[derive(Clone, Debug, Default)]
pub struct VerificationReport {
    pub checks: Vec<IdentityCheck>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub min_log2: u32,
    pub max_log2: u32,
    /// Flip one entry of every dense matrix before checking (negative
    /// control; every identity should then fail).
    pub corrupt: bool,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            min_log2: 2,
            max_log2: 10,
            corrupt: false,
            seed: crate::rng::DEFAULT_SEED,
        }
    }
}

/// Max entrywise deviation of `a·((2/N)·H − O)` from the identity.
pub fn inverse_identity_deviation(a: &Array2<f64>) -> Result<f64> {
    let n = a.nrows();
    let prod = a.dot(&inverse_matrix(n)?);
    let mut dev = 0.0f64;
    for ((i, j), v) in prod.indexed_iter() {
        let target = if i == j { 1.0 } else { 0.0 };
        dev = dev.max((v - target).abs());
    }
    Ok(dev)
}

/// Columns `j ≥ 2` (0-based `j ≥ 1`) whose sum without the first row is not
/// exactly `N/2 − 1`.
pub fn column_sum_violations(a: &Array2<f64>) -> Vec<usize> {
    let n = a.nrows();
    let target = (n / 2) as f64 - 1.0;
    (1..n)
        .filter(|&j| a.column(j).iter().skip(1).sum::<f64>() != target)
        .collect()
}

/// Relative max deviation between the matrix-free forward operator and
/// `a·x` on a random scene.
pub fn forward_dense_deviation(a: &Array2<f64>, seed: u64) -> Result<f64> {
    let n = a.nrows();
    let mut rng = RngStream::new(seed, n as u64);
    let mut x: Vec<f64> = (0..n).map(|_| 1000.0 * rng.unit()).collect();
    x[0] = 0.0;
    let fast = SensingOperator::new(n)?.apply_sensing(&x)?;
    let dense = a.dot(&ndarray::ArrayView1::from(&x[..]));
    let scale = dense.iter().fold(f64::MIN_POSITIVE, |m, v| m.max(v.abs()));
    Ok(fast
        .iter()
        .zip(dense.iter())
        .map(|(f, d)| (f - d).abs() / scale)
        .fold(0.0, f64::max))
}

fn status(ok: bool) -> CheckStatus {
    if ok {
        CheckStatus::Pass
    } else {
        CheckStatus::Fail
    }
}

pub fn run_verification(opts: &VerifyOptions) -> Result<VerificationReport> {
    let mut report = VerificationReport::default();
    for k in opts.min_log2..=opts.max_log2 {
        let n = 1usize << k;
        let mut a = sensing_matrix(n)?;
        if opts.corrupt {
            a[[n - 1, n - 1]] = 1.0 - a[[n - 1, n - 1]];
        }

        let dev = inverse_identity_deviation(&a)?;
        report.checks.push(IdentityCheck {
            name: "A*inv(A)=I",
            order: n,
            status: status(dev < IDENTITY_TOLERANCE),
            detail: format!("max deviation {dev:.3e}"),
        });

        let bad = column_sum_violations(&a);
        report.checks.push(IdentityCheck {
            name: "column sums N/2-1",
            order: n,
            status: status(bad.is_empty()),
            detail: format!("{} bad columns", bad.len()),
        });

        let dev = forward_dense_deviation(&a, opts.seed)?;
        report.checks.push(IdentityCheck {
            name: "fwht vs dense",
            order: n,
            status: status(dev < IDENTITY_TOLERANCE),
            detail: format!("relative deviation {dev:.3e}"),
        });
    }

    let reduced_max = opts.max_log2.min(REDUCED_CHECK_MAX_ORDER.trailing_zeros());
    for k in 1..=reduced_max {
        let r = reduced_inverse_check(k)?;
        let detail = match r.resolved() {
            _ if r.status() == CheckStatus::NotApplicable => "reduced matrix is singular".to_string(),
            Some((reading, dev)) => format!("{} max deviation {dev:.3e}", reading.label()),
            None => "formula undefined".to_string(),
        };
        report.checks.push(IdentityCheck {
            name: "reduced inverse",
            order: r.order,
            status: r.status(),
            detail,
        });
    }
    Ok(report)
}
