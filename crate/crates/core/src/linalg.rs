//! Dense complex linear algebra for small nonsymmetric matrices: Householder
//! reduction to Hessenberg form, single-shift QR iteration to a Schur form,
//! triangular eigenvector back-substitution and LU inversion.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::{Float, Zero};

use crate::error::{Error, Result};

/// Row-major square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![Complex64::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_real(n: usize, values: &[f64]) -> Self {
        assert_eq!(values.len(), n * n, "matrix data length");
        Self { n, data: values.iter().map(|&v| Complex64::new(v, 0.0)).collect() }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.n).map(|i| self[(i, j)]).collect()
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        let n = self.n;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn norm_frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

/// Complex Schur factorization `A = Z T Zᴴ` with `T` upper triangular.
#[derive(Debug, Clone)]
pub struct Schur {
    pub t: CMatrix,
    pub z: CMatrix,
}

fn abs1(z: Complex64) -> f64 {
    z.re.abs() + z.im.abs()
}

/// Reduces `a` to upper Hessenberg form in place and returns the unitary
/// `Q` with `A_original = Q H Qᴴ`.
pub fn hessenberg(a: &mut CMatrix) -> CMatrix {
    let n = a.dim();
    let mut q = CMatrix::identity(n);
    if n < 3 {
        return q;
    }
    let mut v = vec![Complex64::zero(); n];
    for k in 0..n - 2 {
        let alpha_norm: f64 = (k + 1..n).map(|i| a[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if alpha_norm == 0.0 {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let phase = if x0.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { x0 / x0.norm() };
        // v = x + e^{iarg x0}·‖x‖·e₁, H = I − 2vvᴴ/(vᴴv)
        for i in 0..n {
            v[i] = Complex64::zero();
        }
        for i in k + 1..n {
            v[i] = a[(i, k)];
        }
        v[k + 1] += phase * alpha_norm;
        let vnorm2: f64 = (k + 1..n).map(|i| v[i].norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm2;
        // A ← H A
        for j in 0..n {
            let mut s = Complex64::zero();
            for i in k + 1..n {
                s += v[i].conj() * a[(i, j)];
            }
            s *= beta;
            for i in k + 1..n {
                let vi = v[i];
                a[(i, j)] -= vi * s;
            }
        }
        // A ← A H, Q ← Q H
        for m in [&mut *a, &mut q] {
            for i in 0..n {
                let mut s = Complex64::zero();
                for j in k + 1..n {
                    s += m[(i, j)] * v[j];
                }
                s *= beta;
                for j in k + 1..n {
                    let vj = v[j].conj();
                    m[(i, j)] -= s * vj;
                }
            }
        }
        for i in k + 2..n {
            a[(i, k)] = Complex64::zero();
        }
    }
    q
}

/// Plane rotation `G = [[c, s], [−s̄, c]]` with `G·(a, b)ᵀ = (r, 0)ᵀ`.
#[derive(Debug, Clone, Copy)]
struct Givens {
    c: f64,
    s: Complex64,
}

impl Givens {
    fn new(a: Complex64, b: Complex64) -> Self {
        let na = a.norm();
        let nb = b.norm();
        if nb == 0.0 {
            return Self { c: 1.0, s: Complex64::zero() };
        }
        if na == 0.0 {
            return Self { c: 0.0, s: b.conj() / nb };
        }
        let norm = na.hypot(nb);
        let phase = a / na;
        Self { c: na / norm, s: phase * b.conj() / norm }
    }

    /// Rows `(x, y) ← G (x, y)`.
    fn apply_left(&self, x: &mut Complex64, y: &mut Complex64) {
        let (a, b) = (*x, *y);
        *x = a * self.c + self.s * b;
        *y = -self.s.conj() * a + b * self.c;
    }

    /// Columns `(x, y) ← (x, y) Gᴴ`.
    fn apply_right(&self, x: &mut Complex64, y: &mut Complex64) {
        let (a, b) = (*x, *y);
        *x = a * self.c + b * self.s.conj();
        *y = -a * self.s + b * self.c;
    }
}

/// Wilkinson shift: the eigenvalue of `[[a, b], [c, d]]` closer to `d`.
fn wilkinson(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half_tr = (a + d) * 0.5;
    let disc = ((a - d) * 0.5).powi(2) + b * c;
    let root = disc.sqrt();
    let l1 = half_tr + root;
    let l2 = half_tr - root;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Complex Schur decomposition of a general square matrix.
pub fn schur(a: &CMatrix) -> Result<Schur> {
    let n = a.dim();
    let mut h = a.clone();
    let mut z = hessenberg(&mut h);
    if n <= 1 {
        return Ok(Schur { t: h, z });
    }
    let eps = f64::EPSILON;
    let hnorm = h.norm_frobenius().max(f64::MIN_POSITIVE);
    let max_iter = 30 * n;

    let mut hi = n - 1;
    let mut iters = 0usize;
    let mut total = 0usize;
    let mut rots: Vec<Givens> = Vec::with_capacity(n);
    while hi > 0 {
        // Locate the top of the active unreduced block.
        let mut lo = hi;
        while lo > 0 {
            let sub = abs1(h[(lo, lo - 1)]);
            let mut scale = abs1(h[(lo, lo)]) + abs1(h[(lo - 1, lo - 1)]);
            if scale == 0.0 {
                scale = hnorm;
            }
            if sub <= eps * scale {
                h[(lo, lo - 1)] = Complex64::zero();
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            iters = 0;
            continue;
        }
        iters += 1;
        total += 1;
        if total > max_iter * n.max(1) || iters > max_iter {
            return Err(Error::EigenNoConvergence);
        }

        let mu = if iters % 10 == 0 {
            // Exceptional shift to break symmetric cycles.
            h[(hi, hi)] + Complex64::new(0.75 * abs1(h[(hi, hi - 1)]), 0.0)
        } else {
            wilkinson(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };

        for k in lo..=hi {
            h[(k, k)] -= mu;
        }
        rots.clear();
        for k in lo..hi {
            let g = Givens::new(h[(k, k)], h[(k + 1, k)]);
            for j in k..n {
                let (mut x, mut y) = (h[(k, j)], h[(k + 1, j)]);
                g.apply_left(&mut x, &mut y);
                h[(k, j)] = x;
                h[(k + 1, j)] = y;
            }
            h[(k + 1, k)] = Complex64::zero();
            rots.push(g);
        }
        for (offset, g) in rots.iter().enumerate() {
            let k = lo + offset;
            for i in 0..=(k + 1).min(hi) {
                let (mut x, mut y) = (h[(i, k)], h[(i, k + 1)]);
                g.apply_right(&mut x, &mut y);
                h[(i, k)] = x;
                h[(i, k + 1)] = y;
            }
            for i in 0..n {
                let (mut x, mut y) = (z[(i, k)], z[(i, k + 1)]);
                g.apply_right(&mut x, &mut y);
                z[(i, k)] = x;
                z[(i, k + 1)] = y;
            }
        }
        for k in lo..=hi {
            h[(k, k)] += mu;
        }
    }
    for j in 0..n {
        for i in j + 1..n {
            h[(i, j)] = Complex64::zero();
        }
    }
    Ok(Schur { t: h, z })
}

/// Eigenvectors of an upper triangular matrix, one per column, with a unit
/// entry on the diagonal. Near-zero pivots are floored at `ε‖T‖`.
pub fn triangular_eigenvectors(t: &CMatrix) -> CMatrix {
    let n = t.dim();
    let small = (f64::EPSILON * t.norm_frobenius()).max(f64::MIN_POSITIVE);
    let mut x = CMatrix::zeros(n);
    for k in 0..n {
        let lambda = t[(k, k)];
        x[(k, k)] = Complex64::new(1.0, 0.0);
        for j in (0..k).rev() {
            let mut s = Complex64::zero();
            for m in j + 1..=k {
                s += t[(j, m)] * x[(m, k)];
            }
            let mut d = t[(j, j)] - lambda;
            if d.norm() < small {
                d = Complex64::new(small, 0.0);
            }
            x[(j, k)] = -s / d;
        }
    }
    x
}

/// Inverse by LU factorization with partial pivoting; `None` if singular.
pub fn invert(a: &CMatrix) -> Option<CMatrix> {
    let n = a.dim();
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let (p, pmax) = (k..n)
            .map(|i| (i, lu[(i, k)].norm()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pmax == 0.0 || !pmax.is_finite() {
            return None;
        }
        if p != k {
            for j in 0..n {
                let tmp = lu[(k, j)];
                lu[(k, j)] = lu[(p, j)];
                lu[(p, j)] = tmp;
            }
            perm.swap(k, p);
        }
        let pivot = lu[(k, k)];
        for i in k + 1..n {
            let f = lu[(i, k)] / pivot;
            lu[(i, k)] = f;
            if f.is_zero() {
                continue;
            }
            for j in k + 1..n {
                let u = lu[(k, j)];
                lu[(i, j)] -= f * u;
            }
        }
    }
    let mut inv = CMatrix::zeros(n);
    let mut col = vec![Complex64::zero(); n];
    for c in 0..n {
        for i in 0..n {
            col[i] = if perm[i] == c { Complex64::new(1.0, 0.0) } else { Complex64::zero() };
        }
        for i in 0..n {
            let mut s = col[i];
            for j in 0..i {
                s -= lu[(i, j)] * col[j];
            }
            col[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = col[i];
            for j in i + 1..n {
                s -= lu[(i, j)] * col[j];
            }
            col[i] = s / lu[(i, i)];
        }
        for i in 0..n {
            inv[(i, c)] = col[i];
        }
    }
    Some(inv)
}
