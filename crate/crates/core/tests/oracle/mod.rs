//! Independent reference computations for tests. Nothing here calls into the
//! crate's linear algebra: matrices are plain `Vec<Vec<f64>>`, eigenvalues
//! come from a cyclic Jacobi sweep and linear systems from Gaussian
//! elimination with partial pivoting.

#![allow(dead_code)]

pub type Mat = Vec<Vec<f64>>;

pub fn identity(n: usize) -> Mat {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

pub fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let m = b[0].len();
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| (0..b.len()).map(|k| a[i][k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}

pub fn mat_vec(a: &Mat, v: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum())
        .collect()
}

pub fn sub(a: &Mat, b: &Mat) -> Mat {
    a.iter()
        .zip(b)
        .map(|(r, s)| r.iter().zip(s).map(|(x, y)| x - y).collect())
        .collect()
}

pub fn pi_dot(f: &[f64], g: &[f64], pi: &[f64]) -> f64 {
    f.iter().zip(g).zip(pi).map(|((a, b), p)| a * b * p).sum()
}

pub fn centered(f: &[f64], pi: &[f64]) -> Vec<f64> {
    let m: f64 = f.iter().zip(pi).map(|(a, p)| a * p).sum();
    f.iter().map(|a| a - m).collect()
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, descending.
pub fn jacobi_eigenvalues(a: &Mat) -> Vec<f64> {
    let n = a.len();
    let mut m = a.clone();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if m[p][q].abs() < 1e-300 {
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
            }
        }
    }
    let mut values: Vec<f64> = (0..n).map(|i| m[i][i]).collect();
    values.sort_by(|a, b| b.total_cmp(a));
    values
}

/// Eigenvalues of an operator that is self-adjoint in the `pi` inner
/// product, via `D^{1/2} A D^{-1/2}`.
pub fn weighted_eigenvalues(a: &Mat, pi: &[f64]) -> Vec<f64> {
    let n = a.len();
    let s: Mat = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let x = pi[i].sqrt() * a[i][j] / pi[j].sqrt();
                    let y = pi[j].sqrt() * a[j][i] / pi[i].sqrt();
                    0.5 * (x + y)
                })
                .collect()
        })
        .collect();
    jacobi_eigenvalues(&s)
}

pub fn solve(a: &Mat, b: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut m: Mat = a.iter().zip(b).map(|(r, &v)| {
        let mut row = r.clone();
        row.push(v);
        row
    }).collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        m.swap(col, pivot);
        for r in 0..n {
            if r != col {
                let factor = m[r][col] / m[col][col];
                for c in col..=n {
                    m[r][c] -= factor * m[col][c];
                }
            }
        }
    }
    (0..n).map(|i| m[i][n] / m[i][i]).collect()
}

/// `v(f, P)` from the fundamental matrix `(I - P + Pi)^{-1}` solved by
/// Gaussian elimination.
pub fn variance_fundamental(p: &Mat, pi: &[f64], f: &[f64]) -> f64 {
    let n = p.len();
    let a: Mat = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { 1.0 } else { 0.0 } - p[i][j] + pi[j])
                .collect()
        })
        .collect();
    let f0 = centered(f, pi);
    let z = solve(&a, &f0);
    2.0 * pi_dot(&f0, &z, pi) - pi_dot(&f0, &f0, pi)
}

/// `v(f, P)` by summing autocovariances `<f0, P^k f0>` computed with repeated
/// matrix-vector products until the terms fall below `1e-18` for a long run.
pub fn variance_brute_force(p: &Mat, pi: &[f64], f: &[f64]) -> f64 {
    let f0 = centered(f, pi);
    let gamma0 = pi_dot(&f0, &f0, pi);
    let mut total = gamma0;
    let mut g = f0.clone();
    let mut quiet = 0;
    for _ in 0..5_000_000 {
        g = mat_vec(p, &g);
        let gamma = pi_dot(&f0, &g, pi);
        total += 2.0 * gamma;
        if gamma.abs() < 1e-18 * (1.0 + gamma0) {
            quiet += 1;
            if quiet > 50 {
                break;
            }
        } else {
            quiet = 0;
        }
    }
    total
}

/// Quadratic form `Delta(f) = v(f, Q) - v(f, P)` recovered in the standard
/// basis by polarization from variances of indicators and of their pairwise
/// sums: `B_ij = (Delta(e_i + e_j) - Delta(e_i) - Delta(e_j)) / 2`.
pub fn polarized_form(delta: impl Fn(&[f64]) -> f64, n: usize) -> Mat {
    let unit = |i: usize| -> Vec<f64> { (0..n).map(|k| if k == i { 1.0 } else { 0.0 }).collect() };
    let diag: Vec<f64> = (0..n).map(|i| delta(&unit(i))).collect();
    let mut b = vec![vec![0.0; n]; n];
    for i in 0..n {
        b[i][i] = diag[i];
        for j in (i + 1)..n {
            let both: Vec<f64> = (0..n).map(|k| if k == i || k == j { 1.0 } else { 0.0 }).collect();
            let v = 0.5 * (delta(&both) - diag[i] - diag[j]);
            b[i][j] = v;
            b[j][i] = v;
        }
    }
    b
}

/// Sign pattern of a spectrum relative to a tolerance:
/// `(has value below -tol, has value above tol)`.
pub fn signs(values: &[f64], tol: f64) -> (bool, bool) {
    (
        values.iter().any(|&v| v < -tol),
        values.iter().any(|&v| v > tol),
    )
}

/// Relation label from a difference spectrum with the convention
/// "non-negative means the first chain dominates".
pub fn label(values: &[f64], tol: f64) -> &'static str {
    match signs(values, tol) {
        (false, false) => "equal",
        (false, true) => "first_dominates",
        (true, false) => "second_dominates",
        (true, true) => "incomparable",
    }
}
