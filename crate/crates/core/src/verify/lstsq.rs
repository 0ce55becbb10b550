//! Dense least squares through Householder QR with column equilibration.

use crate::error::{Error, Result};

/// Columns whose scaled `|R_kk|` fall below this are flagged as ill-conditioned.
pub const CONDITION_TOL: f64 = 1e-10;

/// Below this the column is treated as exactly dependent.
const RANK_TOL: f64 = 64.0 * f64::EPSILON;

#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares<const N: usize> {
    pub coef: [f64; N],
    /// `|R_kk|` of the column-equilibrated design.
    pub r_diag: [f64; N],
    /// Some `|R_kk|` lies below [`CONDITION_TOL`].
    pub ill_conditioned: bool,
}

/// Minimizes `‖A c − b‖₂` for the `m × N` design `rows`.
///
/// Columns are scaled to unit norm before factorization so the rank test is
/// relative. A design with a zero column or an `|R_kk|` at rounding level
/// yields [`Error::RankDeficient`].
pub fn solve_least_squares<const N: usize>(
    rows: &[[f64; N]],
    rhs: &[f64],
) -> Result<LeastSquares<N>> {
    let m = rows.len();
    assert_eq!(m, rhs.len(), "design and right-hand side lengths differ");
    if m < N {
        return Err(Error::RankDeficient { rank: m });
    }

    // column-major copy, equilibrated
    let mut cols: Vec<Vec<f64>> = (0..N)
        .map(|j| rows.iter().map(|r| r[j]).collect())
        .collect();
    let mut scale = [0.0; N];
    for (j, col) in cols.iter_mut().enumerate() {
        let norm = col.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !norm.is_finite() {
            return Err(Error::DomainViolation("non-finite value in design".into()));
        }
        scale[j] = norm;
        if norm > 0.0 {
            col.iter_mut().for_each(|x| *x /= norm);
        }
    }
    let mut b = rhs.to_vec();
    let mut r_diag = [0.0; N];

    for k in 0..N {
        let norm = cols[k][k..].iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            r_diag[k] = 0.0;
            continue;
        }
        let alpha = if cols[k][k] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = cols[k][k..].to_vec();
        v[0] -= alpha;
        let vtv: f64 = v.iter().map(|x| x * x).sum();
        let reflect = |target: &mut [f64]| {
            let dot: f64 = v.iter().zip(target.iter()).map(|(a, b)| a * b).sum();
            let f = 2.0 * dot / vtv;
            target.iter_mut().zip(&v).for_each(|(t, vi)| *t -= f * vi);
        };
        for col in cols.iter_mut().skip(k + 1) {
            reflect(&mut col[k..]);
        }
        reflect(&mut b[k..]);
        cols[k][k] = alpha;
        cols[k][k + 1..].iter_mut().for_each(|x| *x = 0.0);
        r_diag[k] = alpha.abs();
    }

    let rank = r_diag.iter().filter(|&&d| d > RANK_TOL).count();
    if rank < N {
        return Err(Error::RankDeficient { rank });
    }

    let mut coef = [0.0; N];
    for k in (0..N).rev() {
        let mut acc = b[k];
        for j in k + 1..N {
            acc -= cols[j][k] * coef[j];
        }
        coef[k] = acc / cols[k][k];
    }
    for j in 0..N {
        coef[j] /= scale[j];
    }

    Ok(LeastSquares {
        coef,
        r_diag,
        ill_conditioned: r_diag.iter().any(|&d| d <= CONDITION_TOL),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};

    fn svd_oracle<const N: usize>(rows: &[[f64; N]], rhs: &[f64]) -> Vec<f64> {
        let a = DMatrix::from_fn(rows.len(), N, |i, j| rows[i][j]);
        let b = DVector::from_column_slice(rhs);
        a.svd(true, true)
            .solve(&b, 1e-14)
            .unwrap()
            .iter()
            .copied()
            .collect()
    }

    #[test]
    fn exact_fit_recovers_coefficients() {
        let truth = [0.3, -1.2, 2.0, 0.7];
        let rows: Vec<[f64; 4]> = (0..30)
            .map(|i| {
                let x = (i as f64 * 0.37).sin() * 3.0;
                let y = (i as f64 * 0.91).cos() * 2.0;
                [1.0, x, y, x * y]
            })
            .collect();
        let rhs: Vec<f64> = rows
            .iter()
            .map(|r| r.iter().zip(&truth).map(|(a, b)| a * b).sum())
            .collect();
        let sol = solve_least_squares(&rows, &rhs).unwrap();
        for (c, t) in sol.coef.iter().zip(&truth) {
            assert!((c - t).abs() < 1e-13, "{c} vs {t}");
        }
        assert!(!sol.ill_conditioned);
    }

    #[test]
    fn agrees_with_svd_on_noisy_data() {
        let rows: Vec<[f64; 3]> = (0..40)
            .map(|i| {
                let x = i as f64 / 7.0;
                [1.0, x, x * x]
            })
            .collect();
        let rhs: Vec<f64> = (0..40).map(|i| ((i * 17 % 11) as f64).sqrt()).collect();
        let ours = solve_least_squares(&rows, &rhs).unwrap();
        let oracle = svd_oracle(&rows, &rhs);
        for (a, b) in ours.coef.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-10 * (1.0 + b.abs()), "{a} vs {b}");
        }
    }

    #[test]
    fn zero_column_is_rank_deficient() {
        let rows: Vec<[f64; 4]> = (0..25).map(|_| [1.0, 0.0, 0.0, 0.0]).collect();
        let rhs = vec![0.0; 25];
        assert_eq!(
            solve_least_squares(&rows, &rhs).unwrap_err(),
            Error::RankDeficient { rank: 1 }
        );
    }

    #[test]
    fn duplicated_column_is_rank_deficient() {
        let rows: Vec<[f64; 3]> = (0..10).map(|i| [1.0, i as f64, i as f64]).collect();
        let rhs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        assert!(matches!(
            solve_least_squares(&rows, &rhs),
            Err(Error::RankDeficient { rank: 2 })
        ));
    }

    #[test]
    fn nearly_dependent_columns_are_flagged() {
        let rows: Vec<[f64; 2]> = (0..10).map(|i| [1.0, 1.0 + 1e-12 * i as f64]).collect();
        let rhs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let sol = solve_least_squares(&rows, &rhs).unwrap();
        assert!(sol.ill_conditioned);
    }
}
