//! Sparse storage and symmetric eigensolvers.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Compressed sparse row matrix.
#[derive(Clone, Debug)]
pub struct CsrMatrix<T> {
    pub nrows: usize,
    pub ncols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<u32>,
    pub data: Vec<T>,
}

impl<T: Scalar> CsrMatrix<T> {
    /// Builds from per-row `(column, value)` lists; duplicate columns are summed.
    pub fn from_rows(ncols: usize, rows: Vec<Vec<(u32, T)>>) -> Self {
        let mut indptr = Vec::with_capacity(rows.len() + 1);
        let mut indices = Vec::new();
        let mut data = Vec::new();
        indptr.push(0);
        let nrows = rows.len();
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            let mut last: Option<u32> = None;
            for (c, v) in row {
                if last == Some(c) {
                    *data.last_mut().unwrap() += v;
                } else {
                    indices.push(c);
                    data.push(v);
                    last = Some(c);
                }
            }
            indptr.push(indices.len());
        }
        CsrMatrix { nrows, ncols, indptr, indices, data }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_rows(n, (0..n).map(|i| vec![(i as u32, T::one())]).collect())
    }

    pub fn from_dense(m: &[Vec<T>]) -> Self {
        let ncols = m.first().map_or(0, Vec::len);
        let rows = m
            .iter()
            .map(|r| r.iter().enumerate().filter(|(_, v)| **v != T::zero()).map(|(j, v)| (j as u32, *v)).collect())
            .collect();
        Self::from_rows(ncols, rows)
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let (s, e) = (self.indptr[i], self.indptr[i + 1]);
        match self.indices[s..e].binary_search(&(j as u32)) {
            Ok(p) => self.data[s + p],
            Err(_) => T::zero(),
        }
    }

    pub fn matvec(&self, x: &[T], y: &mut [T]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        y.par_iter_mut().enumerate().with_min_len(256).for_each(|(i, yi)| {
            let mut acc = T::zero();
            for p in self.indptr[i]..self.indptr[i + 1] {
                acc += self.data[p] * x[self.indices[p] as usize];
            }
            *yi = acc;
        });
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.nrows];
        self.matvec(x, &mut y);
        y
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut m = vec![vec![T::zero(); self.ncols]; self.nrows];
        for (i, row) in m.iter_mut().enumerate() {
            for p in self.indptr[i]..self.indptr[i + 1] {
                row[self.indices[p] as usize] += self.data[p];
            }
        }
        m
    }

    /// Largest `|A_ij − A_ji|`.
    pub fn asymmetry(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.nrows {
            for p in self.indptr[i]..self.indptr[i + 1] {
                let j = self.indices[p] as usize;
                worst = worst.max((self.data[p] - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Gershgorin bound on the spectral radius.
    pub fn norm_bound(&self) -> T {
        (0..self.nrows)
            .map(|i| (self.indptr[i]..self.indptr[i + 1]).map(|p| self.data[p].abs()).sum::<T>())
            .fold(T::zero(), T::max)
    }
}

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

pub fn norm<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

fn axpy<T: Scalar>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * *xi;
    }
}

/// Eigenpairs in ascending order.
#[derive(Clone, Debug)]
pub struct EigenResult<T> {
    pub eigenvalues: Vec<T>,
    /// One vector per eigenvalue.
    pub eigenvectors: Vec<Vec<T>>,
    pub residuals: Vec<T>,
}

/// Full eigendecomposition of a real symmetric matrix (Householder + implicit QL).
///
/// Returns ascending eigenvalues and the matching eigenvectors, each with its
/// largest-magnitude component made positive.
pub fn symmetric_eigen<T: Scalar>(a: &[Vec<T>]) -> (Vec<T>, Vec<Vec<T>>) {
    let n = a.len();
    if n == 0 {
        return (vec![], vec![]);
    }
    let mut v: Vec<Vec<T>> = a.to_vec();
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    tred2(&mut v, &mut d, &mut e);
    tql2(&mut v, &mut d, &mut e);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap());
    let vals = order.iter().map(|&i| d[i]).collect();
    let vecs = order
        .iter()
        .map(|&j| {
            let mut col: Vec<T> = (0..n).map(|i| v[i][j]).collect();
            fix_sign(&mut col);
            col
        })
        .collect();
    (vals, vecs)
}

/// Makes the first component of maximal magnitude positive.
pub fn fix_sign<T: Scalar>(v: &mut [T]) {
    let mut best = T::zero();
    let mut idx = 0;
    let eps = T::of(1e-9);
    for (i, x) in v.iter().enumerate() {
        if x.abs() > best + eps {
            best = x.abs();
            idx = i;
        }
    }
    if v.get(idx).is_some_and(|x| *x < T::zero()) {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

fn tred2<T: Scalar>(v: &mut [Vec<T>], d: &mut [T], e: &mut [T]) {
    let n = d.len();
    for j in 0..n {
        d[j] = v[n - 1][j];
    }
    for i in (1..n).rev() {
        let mut scale = T::zero();
        let mut h = T::zero();
        for dk in d.iter().take(i) {
            scale += dk.abs();
        }
        if scale == T::zero() {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[i - 1][j];
                v[i][j] = T::zero();
                v[j][i] = T::zero();
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > T::zero() {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = T::zero();
            }
            for j in 0..i {
                f = d[j];
                v[j][i] = f;
                g = e[j] + v[j][j] * f;
                for k in j + 1..i {
                    g += v[k][j] * d[k];
                    e[k] += v[k][j] * f;
                }
                e[j] = g;
            }
            f = T::zero();
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    let t = f * e[k] + g * d[k];
                    v[k][j] -= t;
                }
                d[j] = v[i - 1][j];
                v[i][j] = T::zero();
            }
        }
        d[i] = h;
    }
    for i in 0..n - 1 {
        v[n - 1][i] = v[i][i];
        v[i][i] = T::one();
        let h = d[i + 1];
        if h != T::zero() {
            for k in 0..=i {
                d[k] = v[k][i + 1] / h;
            }
            for j in 0..=i {
                let mut g = T::zero();
                for k in 0..=i {
                    g += v[k][i + 1] * v[k][j];
                }
                for k in 0..=i {
                    let t = g * d[k];
                    v[k][j] -= t;
                }
            }
        }
        for k in 0..=i {
            v[k][i + 1] = T::zero();
        }
    }
    for j in 0..n {
        d[j] = v[n - 1][j];
        v[n - 1][j] = T::zero();
    }
    v[n - 1][n - 1] = T::one();
    e[0] = T::zero();
}

fn tql2<T: Scalar>(v: &mut [Vec<T>], d: &mut [T], e: &mut [T]) {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = T::zero();
    let mut f = T::zero();
    let mut tst1 = T::zero();
    let eps = T::epsilon();
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            loop {
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (T::of(2.0) * e[l]);
                let mut r = p.hypot(T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;
                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = T::zero();
                let mut s2 = T::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for row in v.iter_mut() {
                        h = row[i + 1];
                        row[i + 1] = s * row[i] + c * h;
                        row[i] = c * row[i] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = T::zero();
    }
}

/// Options for the restarted Lanczos solver.
#[derive(Clone, Debug)]
pub struct LanczosOptions {
    /// Krylov basis size before a restart.
    pub max_basis: usize,
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions { max_basis: 0, max_restarts: 400, seed: 7 }
    }
}

/// Matrices below this size are diagonalized densely.
pub const DENSE_LIMIT: usize = 512;

/// Lowest `k` eigenpairs; dense below [`DENSE_LIMIT`], restarted Lanczos above.
///
/// Convergence requires `‖Av − θv‖ ≤ tol · max(1, ‖A‖)` for every returned pair.
pub fn lowest_eigenpairs<T: Scalar>(a: &CsrMatrix<T>, k: usize, tol: T) -> Result<EigenResult<T>> {
    if k > a.nrows {
        return Err(Error::Dimension { expected: a.nrows, got: k });
    }
    if a.nrows <= DENSE_LIMIT {
        let (vals, vecs) = symmetric_eigen(&a.to_dense());
        let eigenvectors: Vec<Vec<T>> = vecs.into_iter().take(k).collect();
        let residuals = eigenvectors.iter().zip(&vals).map(|(v, &e)| residual(a, v, e)).collect();
        return Ok(EigenResult { eigenvalues: vals[..k].to_vec(), eigenvectors, residuals });
    }
    lanczos(a, k, tol, &LanczosOptions::default())
}

fn residual<T: Scalar>(a: &CsrMatrix<T>, v: &[T], e: T) -> T {
    let mut w = a.mul_vec(v);
    axpy(-e, v, &mut w);
    norm(&w)
}

/// Thick-restarted Lanczos with full reorthogonalization.
pub fn lanczos<T: Scalar>(a: &CsrMatrix<T>, k: usize, tol: T, opts: &LanczosOptions) -> Result<EigenResult<T>> {
    let n = a.nrows;
    let mmax = if opts.max_basis > 0 { opts.max_basis } else { (2 * k + 30).max(50) }.min(n);
    let keep = (k + (mmax - k) / 2).min(mmax - 1).max(k);
    let scale = a.norm_bound().max(T::one());
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut random_vec = |basis: &[Vec<T>]| -> Vec<T> {
        let mut v: Vec<T> = (0..n).map(|_| T::of(rng.gen::<f64>() - 0.5)).collect();
        for _ in 0..2 {
            for b in basis {
                let c = dot(b, &v);
                axpy(-c, b, &mut v);
            }
        }
        let s = norm(&v);
        v.iter_mut().for_each(|x| *x /= s);
        v
    };

    let mut basis: Vec<Vec<T>> = vec![random_vec(&[])];
    let mut proj: Vec<Vec<T>> = vec![vec![T::zero(); mmax]; mmax];
    let mut worst = T::zero();
    for restart in 0..=opts.max_restarts {
        let mut resid: Vec<T>;
        let mut beta;
        loop {
            let j = basis.len() - 1;
            let mut w = a.mul_vec(&basis[j]);
            let mut h = vec![T::zero(); j + 1];
            for _ in 0..2 {
                let coeffs: Vec<T> = basis.par_iter().map(|b| dot(b, &w)).collect();
                for (i, c) in coeffs.into_iter().enumerate() {
                    axpy(-c, &basis[i], &mut w);
                    h[i] += c;
                }
            }
            for (i, hi) in h.iter().enumerate() {
                proj[i][j] = *hi;
                proj[j][i] = *hi;
            }
            beta = norm(&w);
            resid = w;
            if basis.len() == mmax || beta <= T::of(1e-12) * scale {
                break;
            }
            resid.iter_mut().for_each(|x| *x /= beta);
            basis.push(std::mem::take(&mut resid));
        }
        let m = basis.len();
        let small: Vec<Vec<T>> = (0..m).map(|i| proj[i][..m].to_vec()).collect();
        let (theta, s) = symmetric_eigen(&small);
        let kk = k.min(m);
        let res: Vec<T> = (0..kk).map(|i| (beta * s[i][m - 1]).abs()).collect();
        worst = res.iter().copied().fold(T::zero(), T::max);
        let thresh = tol * scale;
        let exhausted = beta <= T::of(1e-12) * scale;
        if (kk == k && worst <= thresh) || (exhausted && m == n) {
            return Ok(ritz(a, &basis, &theta, &s, k.min(m)));
        }
        if restart == opts.max_restarts {
            break;
        }
        let p = if exhausted { m.min(keep.max(kk)) } else { keep.min(m - 1) };
        let new_basis: Vec<Vec<T>> = (0..p).into_par_iter().map(|i| combine(&basis, &s[i])).collect();
        for row in proj.iter_mut() {
            row.iter_mut().for_each(|x| *x = T::zero());
        }
        for i in 0..p {
            proj[i][i] = theta[i];
        }
        basis = new_basis;
        if exhausted {
            let v = random_vec(&basis);
            basis.push(v);
        } else {
            resid.iter_mut().for_each(|x| *x /= beta);
            basis.push(resid);
        }
    }
    Err(Error::NoConvergence { iterations: opts.max_restarts, residual: worst.as_f64() })
}

fn combine<T: Scalar>(basis: &[Vec<T>], coeffs: &[T]) -> Vec<T> {
    let mut y = vec![T::zero(); basis[0].len()];
    for (b, c) in basis.iter().zip(coeffs) {
        axpy(*c, b, &mut y);
    }
    y
}

fn ritz<T: Scalar>(a: &CsrMatrix<T>, basis: &[Vec<T>], theta: &[T], s: &[Vec<T>], k: usize) -> EigenResult<T> {
    let eigenvectors: Vec<Vec<T>> = (0..k)
        .into_par_iter()
        .map(|i| {
            let mut y = combine(basis, &s[i]);
            let nn = norm(&y);
            y.iter_mut().for_each(|x| *x /= nn);
            fix_sign(&mut y);
            y
        })
        .collect();
    let residuals = eigenvectors.iter().zip(theta).map(|(v, &e)| residual(a, v, e)).collect();
    EigenResult { eigenvalues: theta[..k].to_vec(), eigenvectors, residuals }
}
