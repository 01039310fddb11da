//! Symmetric eigensolver: Householder tridiagonalization followed by the
//! implicit QL iteration (after the EISPACK `tred2`/`tql2` pair).
//!
//! [`EigenWork`] owns every buffer so the hot loops of the sphere searches
//! can evaluate millions of small spectra without allocating.

use crate::scalar::Scalar;

use super::SymMatrix;

/// Reusable buffers for an `n × n` eigen decomposition.
#[derive(Clone, Debug)]
pub struct EigenWork<T> {
    n: usize,
    /// Row-major `n × n`; holds the input, then the eigenvectors (columns).
    v: Vec<T>,
    d: Vec<T>,
    e: Vec<T>,
}

impl<T: Scalar> EigenWork<T> {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            v: vec![T::zero(); n * n],
            d: vec![T::zero(); n],
            e: vec![T::zero(); n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Loads a packed upper triangle (same layout as [`SymMatrix`]).
    pub fn load_packed(&mut self, packed: &[T]) {
        let n = self.n;
        let mut idx = 0;
        for i in 0..n {
            for j in i..n {
                let x = packed[idx];
                self.v[i * n + j] = x;
                self.v[j * n + i] = x;
                idx += 1;
            }
        }
    }

    /// Eigenvalues of the loaded matrix, ascending.
    pub fn eigenvalues(&mut self) -> &[T] {
        self.run(false);
        &self.d
    }

    /// Eigenvalues, ascending, by closed form when `n <= 3`. Cheaper than
    /// [`EigenWork::eigenvalues`] but near a repeated eigenvalue of a 3 × 3
    /// matrix it can be off by about `sqrt(eps) * ‖M‖`, so it is meant for
    /// screening, not for final answers.
    pub fn eigenvalues_fast(&mut self) -> &[T] {
        match self.n {
            2 => {
                let (a, b, c) = (self.v[0], self.v[1], self.v[3]);
                let half = T::of(0.5);
                let mean = half * (a + c);
                let rad = hypot(half * (a - c), b);
                self.d[0] = mean - rad;
                self.d[1] = mean + rad;
                &self.d
            }
            3 => {
                trig3(&self.v, &mut self.d);
                &self.d
            }
            _ => self.eigenvalues(),
        }
    }

    /// Eigenvalues (ascending) and eigenvectors; column `j` of the returned
    /// row-major matrix pairs with eigenvalue `j`.
    pub fn decompose(&mut self) -> (&[T], &[T]) {
        self.run(true);
        (&self.d, &self.v)
    }

    fn run(&mut self, vectors: bool) {
        match self.n {
            0 => {}
            1 => {
                self.d[0] = self.v[0];
                self.v[0] = T::one();
            }
            _ => {
                tred2(self.n, &mut self.v, &mut self.d, &mut self.e, vectors);
                tql2(self.n, &mut self.v, &mut self.d, &mut self.e, vectors);
                sort_ascending(self.n, &mut self.v, &mut self.d, vectors);
            }
        }
    }
}

/// Trigonometric solution of the characteristic cubic of a 3 × 3
/// symmetric matrix (row-major in `a`).
fn trig3<T: Scalar>(a: &[T], out: &mut [T]) {
    let (a00, a01, a02, a11, a12, a22) = (a[0], a[1], a[2], a[4], a[5], a[8]);
    let p1 = a01 * a01 + a02 * a02 + a12 * a12;
    let three = T::of(3.0);
    let q = (a00 + a11 + a22) / three;
    let (b00, b11, b22) = (a00 - q, a11 - q, a22 - q);
    let p2 = b00 * b00 + b11 * b11 + b22 * b22 + T::of(2.0) * p1;
    if p2 == T::zero() {
        out[..3].iter_mut().for_each(|x| *x = q);
        return;
    }
    let p = (p2 / T::of(6.0)).sqrt();
    let det = b00 * (b11 * b22 - a12 * a12) - a01 * (a01 * b22 - a12 * a02) + a02 * (a01 * a12 - b11 * a02);
    let r = (det / (T::of(2.0) * p * p * p)).max(-T::one()).min(T::one());
    let phi = r.acos() / three;
    let two_p = T::of(2.0) * p;
    let hi = q + two_p * phi.cos();
    let lo = q + two_p * (phi + T::of(2.0 * std::f64::consts::PI / 3.0)).cos();
    let mid = three * q - hi - lo;
    out[0] = lo;
    out[1] = mid.max(lo).min(hi);
    out[2] = hi;
}

#[inline]
fn hypot<T: Scalar>(a: T, b: T) -> T {
    let (a, b) = (a.abs(), b.abs());
    let (big, small) = if a > b { (a, b) } else { (b, a) };
    if big == T::zero() {
        return T::zero();
    }
    let r = small / big;
    big * (T::one() + r * r).sqrt()
}

fn tred2<T: Scalar>(n: usize, v: &mut [T], d: &mut [T], e: &mut [T], vectors: bool) {
    let at = |i: usize, j: usize| i * n + j;
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
    }

    for i in (1..n).rev() {
        let mut scale = T::zero();
        let mut h = T::zero();
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == T::zero() {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = T::zero();
                v[at(j, i)] = T::zero();
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > T::zero() {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for item in e.iter_mut().take(i) {
                *item = T::zero();
            }

            for j in 0..i {
                f = d[j];
                v[at(j, i)] = f;
                g = e[j] + v[at(j, j)] * f;
                for k in (j + 1)..i {
                    g += v[at(k, j)] * d[k];
                    e[k] += v[at(k, j)] * f;
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
                    let upd = f * e[k] + g * d[k];
                    v[at(k, j)] -= upd;
                }
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = T::zero();
            }
        }
        d[i] = h;
    }

    if vectors {
        for i in 0..(n - 1) {
            v[at(n - 1, i)] = v[at(i, i)];
            v[at(i, i)] = T::one();
            let h = d[i + 1];
            if h != T::zero() {
                for k in 0..=i {
                    d[k] = v[at(k, i + 1)] / h;
                }
                for j in 0..=i {
                    let mut g = T::zero();
                    for k in 0..=i {
                        g += v[at(k, i + 1)] * v[at(k, j)];
                    }
                    for k in 0..=i {
                        let upd = g * d[k];
                        v[at(k, j)] -= upd;
                    }
                }
            }
            for k in 0..=i {
                v[at(k, i + 1)] = T::zero();
            }
        }
        for j in 0..n {
            d[j] = v[at(n - 1, j)];
            v[at(n - 1, j)] = T::zero();
        }
        v[at(n - 1, n - 1)] = T::one();
    } else {
        for j in 0..n {
            d[j] = v[at(j, j)];
        }
    }
    e[0] = T::zero();
}

fn tql2<T: Scalar>(n: usize, v: &mut [T], d: &mut [T], e: &mut [T], vectors: bool) {
    let at = |i: usize, j: usize| i * n + j;
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = T::zero();

    let two = T::of(2.0);
    let eps = T::epsilon();
    let mut f = T::zero();
    let mut tst1 = T::zero();
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }

        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (two * e[l]);
                let mut r = hypot(p, T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for item in d.iter_mut().take(n).skip(l + 2) {
                    *item -= h;
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
                    r = hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if vectors {
                        for k in 0..n {
                            let hk = v[at(k, i + 1)];
                            v[at(k, i + 1)] = s * v[at(k, i)] + c * hk;
                            v[at(k, i)] = c * v[at(k, i)] - s * hk;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;

                if e[l].abs() <= eps * tst1 || iter >= 60 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = T::zero();
    }
}

fn sort_ascending<T: Scalar>(n: usize, v: &mut [T], d: &mut [T], vectors: bool) {
    // selection sort: n is tiny and this keeps the vector swaps in lockstep
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        let mut p = d[i];
        for (j, &dj) in d.iter().enumerate().take(n).skip(i + 1) {
            if dj < p {
                k = j;
                p = dj;
            }
        }
        if k != i {
            d.swap(i, k);
            if vectors {
                for r in 0..n {
                    v.swap(r * n + i, r * n + k);
                }
            }
        }
    }
}

/// Eigenvalues (ascending) and unit eigenvectors of a symmetric matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Eigen<T> {
    pub values: Vec<T>,
    /// `vectors[j]` is the eigenvector for `values[j]`.
    pub vectors: Vec<Vec<T>>,
}

pub(super) fn eigh<T: Scalar>(m: &SymMatrix<T>) -> Eigen<T> {
    let n = m.dim();
    let mut work = EigenWork::new(n);
    work.load_packed(m.packed());
    let (vals, vecs) = work.decompose();
    let vectors = (0..n)
        .map(|j| (0..n).map(|i| vecs[i * n + j]).collect())
        .collect();
    Eigen {
        values: vals.to_vec(),
        vectors,
    }
}

pub(super) fn eigenvalues<T: Scalar>(m: &SymMatrix<T>) -> Vec<T> {
    let mut work = EigenWork::new(m.dim());
    work.load_packed(m.packed());
    work.eigenvalues().to_vec()
}
