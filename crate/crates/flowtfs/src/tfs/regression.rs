//! Least-squares fitting of the component weights from observed attack
//! success rates, via the normal equations.

use serde::{Deserialize, Serialize};

use super::{TfsComponents, TfsWeights};
use crate::error::{Error, Result};

/// One (components, observed success rate) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessRateObservation {
    pub components: TfsComponents,
    pub success_rate: f64,
}

impl SuccessRateObservation {
    pub fn new(components: TfsComponents, success_rate: f64) -> Result<SuccessRateObservation> {
        if !(0.0..=1.0).contains(&success_rate) {
            return Err(Error::InvalidParameter(format!(
                "success_rate must be in [0, 1], got {success_rate}"
            )));
        }
        Ok(SuccessRateObservation {
            components,
            success_rate,
        })
    }
}

/// Fitted weights plus regression diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightFit {
    pub weights: TfsWeights,
    pub sse: f64,
    pub condition_number: f64,
    pub constrained: bool,
}

const COLUMN_NAMES: [&str; 3] = ["f_align", "a_sim", "d_hom"];
const CONDITION_LIMIT: f64 = 1e12;
const MIN_OBSERVATIONS: usize = 3;

/// Fit (alpha, beta, gamma) minimizing the sum of squared errors between
/// predicted and observed success rates.
///
/// Unconstrained mode solves the normal equations exactly. Constrained
/// mode eliminates gamma via alpha + beta + gamma = 1 and solves the
/// reduced system, so the returned weights sum to one.
///
/// Columns that are identically zero carry no information and receive a
/// zero coefficient; the conditioning check applies to the rest, and a
/// condition number beyond 1e12 is reported as rank deficiency naming
/// the collinear columns.
pub fn fit_weights(obs: &[SuccessRateObservation], constrained: bool) -> Result<WeightFit> {
    if obs.len() < MIN_OBSERVATIONS {
        return Err(Error::InsufficientObservations {
            min: MIN_OBSERVATIONS,
            got: obs.len(),
        });
    }

    let rows: Vec<[f64; 3]> = obs
        .iter()
        .map(|o| [o.components.f_align, o.components.a_sim, o.components.d_hom])
        .collect();
    let y: Vec<f64> = obs.iter().map(|o| o.success_rate).collect();

    let (coeffs, condition) = if constrained {
        // gamma = 1 - alpha - beta turns the model into
        // (y - d) = alpha (f - d) + beta (a - d).
        let reduced: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| vec![r[0] - r[2], r[1] - r[2]])
            .collect();
        let shifted: Vec<f64> = y.iter().zip(&rows).map(|(yi, r)| yi - r[2]).collect();
        let (ab, condition) =
            solve_least_squares(&reduced, &shifted, &[COLUMN_NAMES[0], COLUMN_NAMES[1]])?;
        ([ab[0], ab[1], 1.0 - ab[0] - ab[1]], condition)
    } else {
        let full: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        let (w, condition) = solve_least_squares(&full, &y, &COLUMN_NAMES)?;
        ([w[0], w[1], w[2]], condition)
    };

    let weights = TfsWeights {
        alpha: coeffs[0],
        beta: coeffs[1],
        gamma: coeffs[2],
    };
    let sse = rows
        .iter()
        .zip(&y)
        .map(|(r, yi)| {
            let predicted = weights.alpha * r[0] + weights.beta * r[1] + weights.gamma * r[2];
            (yi - predicted) * (yi - predicted)
        })
        .sum();

    Ok(WeightFit {
        weights,
        sse,
        condition_number: condition,
        constrained,
    })
}

/// Solve min ||y - Xw||^2 by the normal equations, returning the
/// coefficients and the condition number of the active Gram matrix.
fn solve_least_squares(
    x: &[Vec<f64>],
    y: &[f64],
    names: &[&str],
) -> Result<(Vec<f64>, f64)> {
    let cols = names.len();

    // Drop identically-zero columns: they cannot affect predictions and
    // would otherwise make every system singular.
    let scale: f64 = x
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
        .max(1.0);
    let active: Vec<usize> = (0..cols)
        .filter(|&c| x.iter().any(|r| r[c].abs() > 1e-12 * scale))
        .collect();
    if active.is_empty() {
        return Err(Error::RankDeficient {
            condition: f64::INFINITY,
            columns: names.iter().map(|s| s.to_string()).collect(),
        });
    }

    let k = active.len();
    let mut gram = vec![vec![0.0f64; k]; k];
    let mut rhs = vec![0.0f64; k];
    for (row, &yi) in x.iter().zip(y) {
        for (ai, &ca) in active.iter().enumerate() {
            rhs[ai] += row[ca] * yi;
            for (bi, &cb) in active.iter().enumerate() {
                gram[ai][bi] += row[ca] * row[cb];
            }
        }
    }

    let (eigenvalues, eigenvectors) = jacobi_eigen(&gram);
    let max_eig = eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    let min_eig = eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let condition = if min_eig > 0.0 {
        max_eig / min_eig
    } else {
        f64::INFINITY
    };

    if !(condition.is_finite() && condition <= CONDITION_LIMIT) {
        // Columns loading on near-null eigenvectors are the collinear ones.
        let mut flagged = Vec::new();
        for (ei, &lambda) in eigenvalues.iter().enumerate() {
            if lambda <= max_eig / CONDITION_LIMIT {
                for (ci, &col) in active.iter().enumerate() {
                    let name = names[col].to_string();
                    if eigenvectors[ci][ei].abs() > 1e-8 && !flagged.contains(&name) {
                        flagged.push(name);
                    }
                }
            }
        }
        flagged.sort();
        return Err(Error::RankDeficient {
            condition,
            columns: flagged,
        });
    }

    let solution = solve_linear(&gram, &rhs);
    let mut coeffs = vec![0.0; cols];
    for (ai, &col) in active.iter().enumerate() {
        coeffs[col] = solution[ai];
    }
    Ok((coeffs, condition))
}

/// Gaussian elimination with partial pivoting for a small SPD system.
fn solve_linear(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.iter().map(|r| r.clone()).collect();
    let mut v = b.to_vec();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())
            .unwrap();
        m.swap(col, pivot);
        v.swap(col, pivot);
        let diag = m[col][col];
        for row in col + 1..n {
            let factor = m[row][col] / diag;
            for k in col..n {
                m[row][k] -= factor * m[col][k];
            }
            v[row] -= factor * v[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = v[row];
        for k in row + 1..n {
            acc -= m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
    }
    x
}

/// Cyclic Jacobi eigendecomposition of a small symmetric matrix.
/// Returns eigenvalues and the matrix of eigenvectors (columns).
fn jacobi_eigen(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.iter().map(|r| r.clone()).collect();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }

    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                off += m[i][j] * m[i][j];
            }
        }
        if off <= 1e-28 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q].abs() <= 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k][p];
                    let mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p][k];
                    let mqk = m[q][k];
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k][p];
                    let vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let eigenvalues = (0..n).map(|i| m[i][i]).collect();
    (eigenvalues, v)
}
