use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

/// Smallest admissible squared pivot in a Cholesky factorization.
pub const PIVOT_TOL: f64 = 1e-10;

/// Cholesky factorization that rejects matrices whose pivots fall below
/// [`PIVOT_TOL`]. On failure returns the smallest pivot seen (possibly negative).
pub fn cholesky(m: &DMatrix<f64>) -> Result<Cholesky<f64, Dyn>, f64> {
    let n = m.nrows();
    if n == 0 {
        return Ok(Cholesky::new(m.clone()).expect("empty matrix factorizes"));
    }
    match Cholesky::new(m.clone()) {
        Some(ch) => {
            let l = ch.l_dirty();
            let min = (0..n).map(|i| l[(i, i)] * l[(i, i)]).fold(f64::INFINITY, f64::min);
            if min < PIVOT_TOL {
                Err(min)
            } else {
                Ok(ch)
            }
        }
        None => Err(min_pivot(m)),
    }
}

// Plain LDL^T sweep used only to report how badly a matrix fails.
fn min_pivot(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut a = m.clone();
    let mut min = f64::INFINITY;
    for k in 0..n {
        let p = a[(k, k)];
        min = min.min(p);
        if p <= 0.0 {
            return min;
        }
        for i in k + 1..n {
            let f = a[(i, k)] / p;
            for j in k + 1..n {
                a[(i, j)] -= f * a[(k, j)];
            }
        }
    }
    min
}

/// Schur complement `m[rows, cols] - m[rows, z] m[z, z]^{-1} m[z, cols]`.
pub fn schur_block(
    m: &DMatrix<f64>,
    rows: &[usize],
    cols: &[usize],
    z: &[usize],
) -> Result<DMatrix<f64>, f64> {
    let mut out = DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])]);
    if z.is_empty() {
        return Ok(out);
    }
    let zz = DMatrix::from_fn(z.len(), z.len(), |i, j| m[(z[i], z[j])]);
    let ch = cholesky(&zz)?;
    let zc = DMatrix::from_fn(z.len(), cols.len(), |i, j| m[(z[i], cols[j])]);
    let solved = ch.solve(&zc);
    for (i, &r) in rows.iter().enumerate() {
        let rz = DVector::from_fn(z.len(), |k, _| m[(r, z[k])]);
        for j in 0..cols.len() {
            out[(i, j)] -= rz.dot(&solved.column(j));
        }
    }
    Ok(out)
}
