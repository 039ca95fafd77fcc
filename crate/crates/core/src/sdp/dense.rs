//! Small dense real kernels for the normal equations.

use crate::scalar::Real;

/// In-place lower Cholesky factor of the row-major symmetric `a` (`n×n`).
/// Pivots at or below `floor` are replaced by `floor` when `regularize`
/// is set, otherwise the factorization fails.
pub(crate) fn cholesky_in_place<T: Real>(a: &mut [T], n: usize, floor: T, regularize: bool) -> Result<usize, ()> {
    let mut bumped = 0;
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if !d.is_finite() {
            return Err(());
        }
        if d <= floor {
            if !regularize {
                return Err(());
            }
            d = floor.max(T::min_positive_value());
            bumped += 1;
        }
        let djj = d.sqrt();
        a[j * n + j] = djj;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / djj;
        }
        for i in 0..j {
            a[i * n + j] = T::zero();
        }
    }
    Ok(bumped)
}

/// Solves `L Lᵀ x = b` in place.
pub(crate) fn cholesky_solve<T: Real>(l: &[T], n: usize, b: &mut [T]) {
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= l[k * n + i] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
}

/// Greedy pivoted Cholesky of a positive semidefinite Gram matrix. Returns
/// the indices of a maximal linearly independent subset, in ascending order.
pub(crate) fn independent_rows<T: Real>(gram: &[T], n: usize, rel_tol: T) -> Vec<usize> {
    let scale = (0..n).map(|i| gram[i * n + i]).fold(T::zero(), T::max);
    if scale <= T::zero() {
        return Vec::new();
    }
    let tol = rel_tol * scale;
    let mut diag: Vec<T> = (0..n).map(|i| gram[i * n + i]).collect();
    let mut chosen: Vec<usize> = Vec::new();
    // columns of the partial factor, one per chosen pivot
    let mut cols: Vec<Vec<T>> = Vec::new();
    let mut alive = vec![true; n];
    loop {
        let mut best = None;
        for i in 0..n {
            if alive[i] && diag[i] > tol && best.is_none_or(|b: usize| diag[i] > diag[b]) {
                best = Some(i);
            }
        }
        let Some(p) = best else { break };
        alive[p] = false;
        let piv = diag[p].sqrt();
        let mut col = vec![T::zero(); n];
        for i in 0..n {
            if !alive[i] {
                continue;
            }
            let mut s = gram[i * n + p];
            for c in &cols {
                s -= c[i] * c[p];
            }
            col[i] = s / piv;
            diag[i] -= col[i] * col[i];
        }
        col[p] = piv;
        cols.push(col);
        chosen.push(p);
    }
    chosen.sort_unstable();
    chosen
}
