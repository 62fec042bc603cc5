//! Sequential two-variable optimizer for SVM duals.
//!
//! Solves  min  1/2 a'Qa + p'a   s.t.  y'a fixed,  0 <= a_i <= c_i
//! by repeatedly picking the maximal-KKT-violating pair (one index free to
//! move up, one free to move down) and solving the two-variable subproblem
//! exactly, with box clipping. First-order working-set selection; gradient
//! maintained incrementally.

/// Result of a dual solve.
#[derive(Debug, Clone)]
pub struct SmoSolution {
    pub alpha: Vec<f64>,
    /// Offset recovered from the KKT conditions (mean over free points, or
    /// the midpoint of the bound-derived interval when none are free).
    pub rho: f64,
    /// Final gradient Qa + p, for problem-specific offset conventions.
    pub gradient: Vec<f64>,
    /// Final dual objective value.
    pub objective: f64,
    pub iterations: usize,
    /// Final maximal KKT violation.
    pub violation: f64,
}

const TAU: f64 = 1e-12;

/// Solve the dual. `q` is the full n x n matrix row-major (already
/// including label signs for classification problems), `p` the linear
/// term, `y` the +/-1 labels, `c` the per-index upper bounds, `alpha` a
/// feasible starting point.
pub fn solve(
    q: &[f64],
    y: &[f64],
    p: &[f64],
    c: &[f64],
    mut alpha: Vec<f64>,
    tol: f64,
    max_iter: usize,
) -> SmoSolution {
    let n = y.len();
    debug_assert_eq!(q.len(), n * n);

    let mut g: Vec<f64> = p.to_vec();
    for (i, gi) in g.iter_mut().enumerate() {
        for j in 0..n {
            if alpha[j] != 0.0 {
                *gi += q[i * n + j] * alpha[j];
            }
        }
    }

    let in_up = |t: usize, alpha: &[f64]| {
        (y[t] > 0.0 && alpha[t] < c[t]) || (y[t] < 0.0 && alpha[t] > 0.0)
    };
    let in_low = |t: usize, alpha: &[f64]| {
        (y[t] > 0.0 && alpha[t] > 0.0) || (y[t] < 0.0 && alpha[t] < c[t])
    };

    let mut iterations = 0;
    let mut stalls = 0;
    let mut violation = f64::INFINITY;
    while iterations < max_iter {
        // Maximal violating pair.
        let mut i_best: Option<usize> = None;
        let mut m_val = f64::NEG_INFINITY;
        let mut j_best: Option<usize> = None;
        let mut m_low = f64::INFINITY;
        for t in 0..n {
            let v = -y[t] * g[t];
            if in_up(t, &alpha) && v > m_val {
                m_val = v;
                i_best = Some(t);
            }
            if in_low(t, &alpha) && v < m_low {
                m_low = v;
                j_best = Some(t);
            }
        }
        let (i, j) = match (i_best, j_best) {
            (Some(i), Some(j)) => (i, j),
            _ => break,
        };
        violation = m_val - m_low;
        if violation <= tol {
            break;
        }
        iterations += 1;

        let old_i = alpha[i];
        let old_j = alpha[j];
        if y[i] != y[j] {
            let mut quad = q[i * n + i] + q[j * n + j] + 2.0 * q[i * n + j];
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-g[i] - g[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > c[i] - c[j] {
                if alpha[i] > c[i] {
                    alpha[i] = c[i];
                    alpha[j] = c[i] - diff;
                }
            } else if alpha[j] > c[j] {
                alpha[j] = c[j];
                alpha[i] = c[j] + diff;
            }
        } else {
            let mut quad = q[i * n + i] + q[j * n + j] - 2.0 * q[i * n + j];
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (g[i] - g[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c[i] {
                if alpha[i] > c[i] {
                    alpha[i] = c[i];
                    alpha[j] = sum - c[i];
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c[j] {
                if alpha[j] > c[j] {
                    alpha[j] = c[j];
                    alpha[i] = sum - c[j];
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let d_i = alpha[i] - old_i;
        let d_j = alpha[j] - old_j;
        if d_i.abs() < 1e-16 && d_j.abs() < 1e-16 {
            stalls += 1;
            if stalls >= 3 {
                break;
            }
            continue;
        }
        stalls = 0;
        for t in 0..n {
            g[t] += q[t * n + i] * d_i + q[t * n + j] * d_j;
        }
    }

    // rho per the KKT conditions.
    let mut upper = f64::INFINITY;
    let mut lower = f64::NEG_INFINITY;
    let mut sum_free = 0.0;
    let mut n_free = 0usize;
    for t in 0..n {
        let yg = y[t] * g[t];
        if alpha[t] >= c[t] - TAU {
            if y[t] < 0.0 {
                upper = upper.min(yg);
            } else {
                lower = lower.max(yg);
            }
        } else if alpha[t] <= TAU {
            if y[t] > 0.0 {
                upper = upper.min(yg);
            } else {
                lower = lower.max(yg);
            }
        } else {
            sum_free += yg;
            n_free += 1;
        }
    }
    let rho = if n_free > 0 {
        sum_free / n_free as f64
    } else {
        match (lower.is_finite(), upper.is_finite()) {
            (true, true) => (upper + lower) / 2.0,
            (true, false) => lower,
            (false, true) => upper,
            (false, false) => 0.0,
        }
    };

    // objective = 1/2 a'(G + p) summed, since G = Qa + p.
    let objective: f64 =
        0.5 * alpha.iter().zip(&g).zip(p).map(|((a, gi), pi)| a * (gi + pi)).sum::<f64>();

    SmoSolution { alpha, rho, gradient: g, objective, iterations, violation }
}
