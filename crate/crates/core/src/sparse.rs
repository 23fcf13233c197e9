//! Sparse symmetric matrices, a fill-reducing ordering, an up-looking
//! Cholesky factorization and Jacobi-preconditioned conjugate gradients.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::Point;

const NONE: usize = usize::MAX;

/// Compressed sparse rows with both triangles stored and sorted columns.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Zero matrix with the given per-row column sets (need not be sorted).
    pub fn from_pattern(rows: Vec<Vec<usize>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        for mut r in rows {
            r.sort_unstable();
            r.dedup();
            col_idx.extend(r);
            row_ptr.push(col_idx.len());
        }
        let values = vec![0.0; col_idx.len()];
        CsrMatrix { n, row_ptr, col_idx, values }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let r = &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]];
        r.binary_search(&j).ok().map(|k| self.row_ptr[i] + k)
    }

    /// Adds `v` at `(i, j)`; the entry must be in the pattern.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.slot(i, j).expect("entry outside sparsity pattern");
        self.values[k] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |k| self.values[k])
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }
}

/// Lower-triangular factor `L` with `P A P^T = L L^T`, stored by columns;
/// the diagonal entry is first in each column.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    perm: Vec<usize>,
    lp: Vec<usize>,
    li: Vec<usize>,
    lx: Vec<f64>,
}

impl CholeskyFactor {
    pub fn nnz(&self) -> usize {
        self.lx.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.perm.len();
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for j in 0..n {
            x[j] /= self.lx[self.lp[j]];
            let xj = x[j];
            for q in self.lp[j] + 1..self.lp[j + 1] {
                x[self.li[q]] -= self.lx[q] * xj;
            }
        }
        for j in (0..n).rev() {
            let mut s = x[j];
            for q in self.lp[j] + 1..self.lp[j + 1] {
                s -= self.lx[q] * x[self.li[q]];
            }
            x[j] = s / self.lx[self.lp[j]];
        }
        let mut out = vec![0.0; n];
        for (k, &p) in self.perm.iter().enumerate() {
            out[p] = x[k];
        }
        out
    }
}

/// Upper triangle of `P A P^T` by columns: column k lists (row, value) with row <= k.
fn permuted_upper(a: &CsrMatrix, perm: &[usize]) -> Vec<Vec<(usize, f64)>> {
    let n = a.n;
    let mut pinv = vec![0; n];
    for (k, &p) in perm.iter().enumerate() {
        pinv[p] = k;
    }
    (0..n)
        .map(|k| {
            a.row(perm[k])
                .map(|(j, v)| (pinv[j], v))
                .filter(|&(i, _)| i <= k)
                .collect()
        })
        .collect()
}

fn etree(c: &[Vec<(usize, f64)>]) -> Vec<usize> {
    let n = c.len();
    let mut parent = vec![NONE; n];
    let mut ancestor = vec![NONE; n];
    for k in 0..n {
        for &(start, _) in &c[k] {
            let mut i = start;
            while i != NONE && i < k {
                let next = ancestor[i];
                ancestor[i] = k;
                if next == NONE {
                    parent[i] = k;
                }
                i = next;
            }
        }
    }
    parent
}

/// Nonzero pattern of row `k` of `L` (excluding the diagonal) written to
/// `s[top..]`; returns `top`.
fn ereach(
    col: &[(usize, f64)],
    k: usize,
    parent: &[usize],
    s: &mut [usize],
    mark: &mut [usize],
) -> usize {
    let n = s.len();
    let mut top = n;
    mark[k] = k;
    for &(start, _) in col {
        let mut i = start;
        if i > k {
            continue;
        }
        let mut len = 0;
        while mark[i] != k {
            s[len] = i;
            len += 1;
            mark[i] = k;
            i = parent[i];
        }
        while len > 0 {
            len -= 1;
            top -= 1;
            s[top] = s[len];
        }
    }
    top
}

/// Elimination tree and column pointers of the factor.
pub struct Symbolic {
    perm: Vec<usize>,
    upper: Vec<Vec<(usize, f64)>>,
    parent: Vec<usize>,
    lp: Vec<usize>,
}

impl Symbolic {
    pub fn factor_nnz(&self) -> usize {
        self.lp[self.lp.len() - 1]
    }
}

/// Symbolic analysis of `A` under the symmetric permutation `perm`
/// (`perm[k]` is the original index placed at position k).
pub fn analyze(a: &CsrMatrix, perm: &[usize]) -> Symbolic {
    let n = a.n;
    let upper = permuted_upper(a, perm);
    let parent = etree(&upper);
    let mut s = vec![0; n];
    let mut mark = vec![NONE; n];
    let mut counts = vec![1usize; n];
    for k in 0..n {
        let top = ereach(&upper[k], k, &parent, &mut s, &mut mark);
        for &j in &s[top..] {
            counts[j] += 1;
        }
    }
    let mut lp = Vec::with_capacity(n + 1);
    lp.push(0);
    for &cnt in &counts {
        lp.push(lp[lp.len() - 1] + cnt);
    }
    Symbolic { perm: perm.to_vec(), upper, parent, lp }
}

/// Numeric up-looking factorization. A pivot that is not positive relative
/// to its diagonal entry reports `SingularSystem`.
pub fn factor(sym: Symbolic) -> Result<CholeskyFactor> {
    let Symbolic { perm, upper, parent, lp } = sym;
    let n = perm.len();
    let nnz = lp[n];
    let mut li = vec![0; nnz];
    let mut lx = vec![0.0; nnz];
    // first slot of every column is reserved for the diagonal
    let mut next: Vec<usize> = (0..n).map(|j| lp[j] + 1).collect();
    let mut x = vec![0.0; n];
    let mut s = vec![0; n];
    let mut mark = vec![NONE; n];
    for k in 0..n {
        let top = ereach(&upper[k], k, &parent, &mut s, &mut mark);
        let mut akk = 0.0;
        for &(i, v) in &upper[k] {
            if i == k {
                akk = v;
            }
            x[i] = v;
        }
        let mut d = x[k];
        x[k] = 0.0;
        for &i in &s[top..] {
            let lki = x[i] / lx[lp[i]];
            x[i] = 0.0;
            for q in lp[i] + 1..next[i] {
                x[li[q]] -= lx[q] * lki;
            }
            d -= lki * lki;
            li[next[i]] = k;
            lx[next[i]] = lki;
            next[i] += 1;
        }
        if !(d > 1e-13 * akk.abs()) || !d.is_finite() {
            return Err(Error::SingularSystem);
        }
        li[lp[k]] = k;
        lx[lp[k]] = libm::sqrt(d);
    }
    Ok(CholeskyFactor { perm, lp, li, lx })
}

pub fn cholesky(a: &CsrMatrix, perm: &[usize]) -> Result<CholeskyFactor> {
    factor(analyze(a, perm))
}

/// Jacobi-preconditioned conjugate gradients from a zero initial guess.
/// Returns the solution and the iteration count.
pub fn pcg_jacobi(a: &CsrMatrix, b: &[f64], tol: f64, max_iters: usize) -> Result<(Vec<f64>, usize)> {
    let n = a.n;
    let bnorm = norm(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok((x, 0));
    }
    let dinv: Vec<f64> = a
        .diagonal()
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&dinv).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for it in 1..=max_iters {
        let ap = a.mul_vec(&p);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::SolveFailed { iterations: it, residual: norm(&r) / bnorm });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if norm(&r) <= tol * bnorm {
            return Ok((x, it));
        }
        for i in 0..n {
            z[i] = r[i] * dinv[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::SolveFailed { iterations: max_iters, residual: norm(&r) / bnorm })
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

/// Which path produced a solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    Cholesky,
    ConjugateGradient,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveInfo {
    pub method: SolveMethod,
    pub iterations: usize,
    pub relative_residual: f64,
}

pub const PCG_TOL: f64 = 1e-12;
pub const PCG_MAX_ITERS: usize = 20_000;
pub const RESIDUAL_TOL: f64 = 1e-10;
/// Factors with more entries than this are not formed; PCG is used instead.
pub const MAX_FACTOR_NNZ: usize = 150_000_000;

/// Solves `A x = b` for SPD `A`: sparse Cholesky, with one step of
/// iterative refinement if the residual is above `RESIDUAL_TOL * |b|`.
/// Jacobi-PCG takes over when the factor would be too large.
pub fn solve_spd(a: &CsrMatrix, b: &[f64], perm: &[usize]) -> Result<(Vec<f64>, SolveInfo)> {
    let bnorm = norm(b);
    let residual = |x: &[f64]| -> Vec<f64> {
        let ax = a.mul_vec(x);
        b.iter().zip(&ax).map(|(b, ax)| b - ax).collect()
    };
    let rel = |r: &[f64]| if bnorm > 0.0 { norm(r) / bnorm } else { norm(r) };
    let sym = analyze(a, perm);
    if sym.factor_nnz() > MAX_FACTOR_NNZ {
        let (x, it) = pcg_jacobi(a, b, PCG_TOL, PCG_MAX_ITERS)?;
        let r = residual(&x);
        let info = SolveInfo {
            method: SolveMethod::ConjugateGradient,
            iterations: it,
            relative_residual: rel(&r),
        };
        return Ok((x, info));
    }
    let f = factor(sym)?;
    let mut x = f.solve(b);
    let mut r = residual(&x);
    if rel(&r) > RESIDUAL_TOL {
        let dx = f.solve(&r);
        x.iter_mut().zip(&dx).for_each(|(x, d)| *x += d);
        r = residual(&x);
    }
    let info = SolveInfo { method: SolveMethod::Cholesky, iterations: 0, relative_residual: rel(&r) };
    Ok((x, info))
}

/// Geometric nested dissection of a graph whose nodes have coordinates.
/// Returns the elimination order (a permutation of node indices).
pub fn nested_dissection(points: &[Point], adjacency: &[Vec<usize>]) -> Vec<usize> {
    const LEAF: usize = 64;
    let n = points.len();
    let mut order = Vec::with_capacity(n);
    let mut side = vec![0u8; n];
    // explicit stack; an entry either dissects a set or emits it verbatim
    let mut stack: Vec<(Vec<usize>, bool)> = vec![((0..n).collect(), false)];
    while let Some((set, emit)) = stack.pop() {
        if emit || set.len() <= LEAF {
            order.extend(set);
            continue;
        }
        let (mut lo, mut hi) = (points[set[0]], points[set[0]]);
        for &v in &set {
            lo.x = lo.x.min(points[v].x);
            lo.y = lo.y.min(points[v].y);
            hi.x = hi.x.max(points[v].x);
            hi.y = hi.y.max(points[v].y);
        }
        let key = |v: usize| if hi.x - lo.x >= hi.y - lo.y { (points[v].x, points[v].y) } else { (points[v].y, points[v].x) };
        let mut sorted = set.clone();
        sorted.sort_by(|&a, &b| {
            let (ka, kb) = (key(a), key(b));
            ka.0.total_cmp(&kb.0).then(ka.1.total_cmp(&kb.1)).then(a.cmp(&b))
        });
        let half = sorted.len() / 2;
        for &v in &sorted[..half] {
            side[v] = 1;
        }
        for &v in &sorted[half..] {
            side[v] = 2;
        }
        let touches = |v: usize, other: u8, side: &[u8]| adjacency[v].iter().any(|&w| side[w] == other);
        let sep_left: Vec<usize> = sorted[..half].iter().copied().filter(|&v| touches(v, 2, &side)).collect();
        let sep_right: Vec<usize> = sorted[half..].iter().copied().filter(|&v| touches(v, 1, &side)).collect();
        let sep = if sep_left.len() <= sep_right.len() { sep_left } else { sep_right };
        for &v in &sep {
            side[v] = 3;
        }
        let left: Vec<usize> = sorted[..half].iter().copied().filter(|&v| side[v] == 1).collect();
        let right: Vec<usize> = sorted[half..].iter().copied().filter(|&v| side[v] == 2).collect();
        for &v in &set {
            side[v] = 0;
        }
        if left.is_empty() || right.is_empty() {
            order.extend(sorted);
            continue;
        }
        // popped in reverse: left, then right, then separator
        stack.push((sep, true));
        stack.push((right, false));
        stack.push((left, false));
    }
    order
}
