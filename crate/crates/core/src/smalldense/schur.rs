//! Real Schur form `B = U T Uᵀ` by Householder reduction to Hessenberg form
//! followed by Francis double-shift QR, plus reordering by orthogonal
//! adjacent-block swaps.

use super::DenseMatrix;
use crate::error::{Error, Result};

/// Real Schur decomposition: `U` orthogonal, `T` quasi upper triangular with
/// 1×1 blocks for real eigenvalues and 2×2 blocks for complex pairs.
#[derive(Clone, Debug)]
pub struct RealSchur {
    pub u: DenseMatrix,
    pub t: DenseMatrix,
}

impl RealSchur {
    /// Starting index and size of each diagonal block.
    pub fn blocks(&self) -> Vec<(usize, usize)> {
        let n = self.t.n_rows();
        let mut out = Vec::new();
        let mut i = 0;
        while i < n {
            if i + 1 < n && self.t[(i + 1, i)] != 0.0 {
                out.push((i, 2));
                i += 2;
            } else {
                out.push((i, 1));
                i += 1;
            }
        }
        out
    }

    /// Eigenvalues as `(re, im)` in diagonal order.
    pub fn eigenvalues(&self) -> Vec<(f64, f64)> {
        let t = &self.t;
        let mut ev = Vec::with_capacity(t.n_rows());
        for (i, size) in self.blocks() {
            if size == 1 {
                ev.push((t[(i, i)], 0.0));
            } else {
                let (a, b, c, d) = (t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]);
                let p = 0.5 * (a - d);
                let disc = p * p + b * c;
                let mid = 0.5 * (a + d);
                if disc >= 0.0 {
                    // unreachable for standardized blocks, kept for robustness
                    let s = disc.sqrt();
                    ev.push((mid + s, 0.0));
                    ev.push((mid - s, 0.0));
                } else {
                    let s = (-disc).sqrt();
                    ev.push((mid, s));
                    ev.push((mid, -s));
                }
            }
        }
        ev
    }
}

/// Householder reduction `B = Q H Qᵀ` with `H` upper Hessenberg.
fn hessenberg(b: &DenseMatrix) -> (DenseMatrix, DenseMatrix) {
    let n = b.n_rows();
    let mut h = b.clone();
    let mut q = DenseMatrix::identity(n);
    for k in 0..n.saturating_sub(2) {
        let mut v: Vec<f64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let alpha = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if alpha == 0.0 {
            continue;
        }
        let sign = if v[0] >= 0.0 { 1.0 } else { -1.0 };
        v[0] += sign * alpha;
        let vn = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= vn);
        // H ← (I − 2vvᵀ) H on rows k+1..n
        for j in 0..n {
            let s: f64 = v.iter().enumerate().map(|(a, vi)| vi * h[(k + 1 + a, j)]).sum();
            for (a, vi) in v.iter().enumerate() {
                h[(k + 1 + a, j)] -= 2.0 * s * vi;
            }
        }
        // H ← H (I − 2vvᵀ), Q ← Q (I − 2vvᵀ) on columns k+1..n
        for m in [&mut h, &mut q] {
            for i in 0..n {
                let s: f64 = v.iter().enumerate().map(|(a, vi)| vi * m[(i, k + 1 + a)]).sum();
                for (a, vi) in v.iter().enumerate() {
                    m[(i, k + 1 + a)] -= 2.0 * s * vi;
                }
            }
        }
        for i in k + 2..n {
            h[(i, k)] = 0.0;
        }
    }
    (q, h)
}

/// Real Schur decomposition of a square matrix.
///
/// Fails with [`Error::SchurNoConvergence`] after `30·n` QR sweeps.
pub fn real_schur(b: &DenseMatrix) -> Result<RealSchur> {
    let nn = b.n_rows();
    if b.n_cols() != nn {
        return Err(Error::InvalidInput("Schur decomposition needs a square matrix".into()));
    }
    if !b.is_finite() {
        return Err(Error::Numerical("non-finite entry in Schur input".into()));
    }
    if nn == 0 {
        return Ok(RealSchur { u: DenseMatrix::zeros(0, 0), t: DenseMatrix::zeros(0, 0) });
    }
    let (mut v, mut h) = hessenberg(b);
    let eps = f64::EPSILON;
    let max_sweeps = 30 * nn;
    let mut sweeps = 0usize;

    let norm: f64 = (0..nn)
        .flat_map(|i| (i.saturating_sub(1)..nn).map(move |j| (i, j)))
        .map(|(i, j)| h[(i, j)].abs())
        .sum();

    let mut n = nn as isize - 1;
    let mut exshift = 0.0;
    let mut iter = 0usize;
    let (mut p, mut q, mut r, mut s, mut z);
    let (mut w, mut x, mut y);

    while n >= 0 {
        let nu = n as usize;
        // single small subdiagonal element
        let mut l = nu;
        while l > 0 {
            s = h[(l - 1, l - 1)].abs() + h[(l, l)].abs();
            if s == 0.0 {
                s = norm;
            }
            if h[(l, l - 1)].abs() < eps * s {
                h[(l, l - 1)] = 0.0;
                break;
            }
            l -= 1;
        }

        if l == nu {
            h[(nu, nu)] += exshift;
            n -= 1;
            iter = 0;
        } else if l + 1 == nu {
            w = h[(nu, nu - 1)] * h[(nu - 1, nu)];
            p = (h[(nu - 1, nu - 1)] - h[(nu, nu)]) / 2.0;
            q = p * p + w;
            z = q.abs().sqrt();
            h[(nu, nu)] += exshift;
            h[(nu - 1, nu - 1)] += exshift;
            if q >= 0.0 {
                // real pair: rotate to upper triangular
                z = if p >= 0.0 { p + z } else { p - z };
                x = h[(nu, nu - 1)];
                s = x.abs() + z.abs();
                p = x / s;
                q = z / s;
                r = (p * p + q * q).sqrt();
                p /= r;
                q /= r;
                for j in nu - 1..nn {
                    z = h[(nu - 1, j)];
                    h[(nu - 1, j)] = q * z + p * h[(nu, j)];
                    h[(nu, j)] = q * h[(nu, j)] - p * z;
                }
                for i in 0..=nu {
                    z = h[(i, nu - 1)];
                    h[(i, nu - 1)] = q * z + p * h[(i, nu)];
                    h[(i, nu)] = q * h[(i, nu)] - p * z;
                }
                for i in 0..nn {
                    z = v[(i, nu - 1)];
                    v[(i, nu - 1)] = q * z + p * v[(i, nu)];
                    v[(i, nu)] = q * v[(i, nu)] - p * z;
                }
                h[(nu, nu - 1)] = 0.0;
            }
            n -= 2;
            iter = 0;
        } else {
            sweeps += 1;
            if sweeps > max_sweeps {
                return Err(Error::SchurNoConvergence { sweeps: max_sweeps });
            }
            x = h[(nu, nu)];
            y = 0.0;
            w = 0.0;
            if l < nu {
                y = h[(nu - 1, nu - 1)];
                w = h[(nu, nu - 1)] * h[(nu - 1, nu)];
            }
            // exceptional shifts
            if iter == 10 {
                exshift += x;
                for i in 0..=nu {
                    h[(i, i)] -= x;
                }
                s = h[(nu, nu - 1)].abs() + h[(nu - 1, nu - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            if iter == 30 {
                s = (y - x) / 2.0;
                s = s * s + w;
                if s > 0.0 {
                    s = s.sqrt();
                    if y < x {
                        s = -s;
                    }
                    s = x - w / ((y - x) / 2.0 + s);
                    for i in 0..=nu {
                        h[(i, i)] -= s;
                    }
                    exshift += s;
                    x = 0.964;
                    y = x;
                    w = x;
                }
            }
            iter += 1;

            // two consecutive small subdiagonal elements
            let mut m = nu - 2;
            loop {
                z = h[(m, m)];
                r = x - z;
                s = y - z;
                p = (r * s - w) / h[(m + 1, m)] + h[(m, m + 1)];
                q = h[(m + 1, m + 1)] - z - r - s;
                r = h[(m + 2, m + 1)];
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                if h[(m, m - 1)].abs() * (q.abs() + r.abs())
                    < eps * (p.abs() * (h[(m - 1, m - 1)].abs() + z.abs() + h[(m + 1, m + 1)].abs()))
                {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nu {
                h[(i, i - 2)] = 0.0;
                if i > m + 2 {
                    h[(i, i - 3)] = 0.0;
                }
            }

            // double QR step on rows l..=n, columns m..=n
            for k in m..nu {
                let notlast = k != nu - 1;
                if k != m {
                    p = h[(k, k - 1)];
                    q = h[(k + 1, k - 1)];
                    r = if notlast { h[(k + 2, k - 1)] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x == 0.0 {
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                }
                s = (p * p + q * q + r * r).sqrt();
                if p < 0.0 {
                    s = -s;
                }
                if s != 0.0 {
                    if k != m {
                        h[(k, k - 1)] = -s * x;
                    } else if l != m {
                        h[(k, k - 1)] = -h[(k, k - 1)];
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..nn {
                        p = h[(k, j)] + q * h[(k + 1, j)];
                        if notlast {
                            p += r * h[(k + 2, j)];
                            h[(k + 2, j)] -= p * z;
                        }
                        h[(k, j)] -= p * x;
                        h[(k + 1, j)] -= p * y;
                    }
                    for i in 0..=nu.min(k + 3) {
                        p = x * h[(i, k)] + y * h[(i, k + 1)];
                        if notlast {
                            p += z * h[(i, k + 2)];
                            h[(i, k + 2)] -= p * r;
                        }
                        h[(i, k)] -= p;
                        h[(i, k + 1)] -= p * q;
                    }
                    for i in 0..nn {
                        p = x * v[(i, k)] + y * v[(i, k + 1)];
                        if notlast {
                            p += z * v[(i, k + 2)];
                            v[(i, k + 2)] -= p * r;
                        }
                        v[(i, k)] -= p;
                        v[(i, k + 1)] -= p * q;
                    }
                }
            }
        }
    }

    for i in 0..nn {
        for j in 0..i.saturating_sub(1) {
            h[(i, j)] = 0.0;
        }
    }
    // a 2×2 block left with real eigenvalues is not expected, but split it if
    // rounding ever produces one
    let mut schur = RealSchur { u: v, t: h };
    split_real_blocks(&mut schur);
    Ok(schur)
}

fn split_real_blocks(s: &mut RealSchur) {
    for (i, size) in s.blocks() {
        if size != 2 {
            continue;
        }
        let t = &s.t;
        let (a, b, c, d) = (t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]);
        let p = 0.5 * (a - d);
        let disc = p * p + b * c;
        if disc < 0.0 {
            continue;
        }
        // eigenvector of the block for one real eigenvalue, rotated onto e₁
        let lam = 0.5 * (a + d) + if p >= 0.0 { disc.sqrt() } else { -disc.sqrt() };
        let (vx, vy) = if b.abs() >= c.abs() { (b, lam - a) } else { (lam - d, c) };
        let r = vx.hypot(vy);
        if r == 0.0 {
            continue;
        }
        apply_reflector(s, i, &[vx / r, vy / r]);
        s.t[(i + 1, i)] = 0.0;
    }
}

/// Applies the Householder reflector mapping unit vector `x` onto `±e₁` as a
/// similarity on indices `q..q+x.len()`.
fn apply_reflector(s: &mut RealSchur, q: usize, x: &[f64]) {
    let n = s.t.n_rows();
    let m = x.len();
    let mut v = x.to_vec();
    let sign = if v[0] >= 0.0 { 1.0 } else { -1.0 };
    v[0] += sign;
    let vn = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    v.iter_mut().for_each(|a| *a /= vn);
    let t = &mut s.t;
    for j in 0..n {
        let d: f64 = (0..m).map(|a| v[a] * t[(q + a, j)]).sum();
        for a in 0..m {
            t[(q + a, j)] -= 2.0 * d * v[a];
        }
    }
    for mat in [&mut s.t, &mut s.u] {
        for i in 0..n {
            let d: f64 = (0..m).map(|a| v[a] * mat[(i, q + a)]).sum();
            for a in 0..m {
                mat[(i, q + a)] -= 2.0 * d * v[a];
            }
        }
    }
}

/// Moves the 1×1 block at diagonal index `pos` to index 0 by a sequence of
/// orthogonal swaps with the blocks above it.
pub fn move_to_front(s: &mut RealSchur, pos: usize) -> Result<()> {
    let n = s.t.n_rows();
    if pos >= n || (pos + 1 < n && s.t[(pos + 1, pos)] != 0.0) {
        return Err(Error::InvalidInput(format!("no 1x1 block at index {pos}")));
    }
    let scale = s.t.max_abs().max(f64::MIN_POSITIVE);
    let mut p = pos;
    while p > 0 {
        let size = if p >= 2 && s.t[(p - 1, p - 2)] != 0.0 { 2 } else { 1 };
        let q = p - size;
        let lam = s.t[(p, p)];
        // eigenvector [x; 1] of the (size+1) leading block for λ:
        // (T11 − λI) x = −t12
        let x = if size == 1 {
            let mut d = s.t[(q, q)] - lam;
            if d.abs() < f64::EPSILON * scale {
                d = f64::EPSILON * scale;
            }
            vec![-s.t[(q, p)] / d]
        } else {
            let (a, b) = (s.t[(q, q)] - lam, s.t[(q, q + 1)]);
            let (c, d) = (s.t[(q + 1, q)], s.t[(q + 1, q + 1)] - lam);
            let mut det = a * d - b * c;
            if det.abs() < f64::EPSILON * scale * scale {
                det = f64::EPSILON * scale * scale;
            }
            let (r0, r1) = (-s.t[(q, p)], -s.t[(q + 1, p)]);
            vec![(d * r0 - b * r1) / det, (a * r1 - c * r0) / det]
        };
        let mut vec: Vec<f64> = x;
        vec.push(1.0);
        let vn = vec.iter().map(|a| a * a).sum::<f64>().sqrt();
        vec.iter_mut().for_each(|a| *a /= vn);
        apply_reflector(s, q, &vec);
        for i in q + 1..=p {
            s.t[(i, q)] = 0.0;
        }
        // the displaced block now sits at q+1..=p
        if size == 2 {
            // keep the quasi-triangular pattern below the 2×2 block
            for j in q + 1..=p {
                for i in j + 2..=p {
                    s.t[(i, j)] = 0.0;
                }
            }
        }
        p = q;
    }
    Ok(())
}

/// Real Schur form of `b` with the eigenvalue closest to `target` moved to
/// `T[0][0]`.
///
/// Fails with [`Error::ComplexLeadingBlock`] when the closest eigenvalue
/// belongs to a complex conjugate pair.
pub fn ordered_schur_leading(b: &DenseMatrix, target: f64) -> Result<RealSchur> {
    let mut s = real_schur(b)?;
    let ev = s.eigenvalues();
    let Some((idx, _)) = ev
        .iter()
        .enumerate()
        .map(|(i, &(re, im))| (i, (re - target).hypot(im)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
    else {
        return Ok(s);
    };
    if ev[idx].1 != 0.0 {
        return Err(Error::ComplexLeadingBlock);
    }
    move_to_front(&mut s, idx)?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(n: usize, seed: u64) -> DenseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DenseMatrix::from_row_major(n, n, (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect())
    }

    fn check_decomposition(b: &DenseMatrix, s: &RealSchur) {
        let n = b.n_rows();
        let recon = s.u.matmul(&s.t).matmul(&s.u.transpose());
        assert!(b.sub(&recon).frobenius_norm() <= 1e-10 * b.frobenius_norm().max(1.0));
        let gram = s.u.transpose().matmul(&s.u).sub(&DenseMatrix::identity(n));
        assert!(gram.frobenius_norm() <= 1e-11);
        for (i, size) in s.blocks() {
            for r in i + size..n {
                for c in i..i + size {
                    assert_eq!(s.t[(r, c)], 0.0, "entry ({r},{c}) below the block diagonal");
                }
            }
        }
    }

    /// Characteristic polynomial coefficients by Faddeev–LeVerrier:
    /// `det(λI − A) = λⁿ + c[1] λⁿ⁻¹ + … + c[n]`.
    fn char_poly(a: &DenseMatrix) -> Vec<f64> {
        let n = a.n_rows();
        let mut c = vec![1.0; n + 1];
        let mut m = DenseMatrix::zeros(n, n);
        for k in 1..=n {
            let am = a.matmul(&m);
            m = am.add(&DenseMatrix::identity(n).scale(c[k - 1]));
            let tr: f64 = (0..n).map(|i| a.matmul(&m)[(i, i)]).sum();
            c[k] = -tr / k as f64;
        }
        c
    }

    /// Durand–Kerner simultaneous root iteration.
    fn poly_roots(c: &[f64]) -> Vec<Complex64> {
        let n = c.len() - 1;
        let eval = |z: Complex64| c.iter().fold(Complex64::new(0.0, 0.0), |acc, &ci| acc * z + ci);
        let seed = Complex64::new(0.4, 0.9);
        let mut roots: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32)).collect();
        for _ in 0..2000 {
            let prev = roots.clone();
            for i in 0..n {
                let denom = (0..n).filter(|&j| j != i).fold(Complex64::new(1.0, 0.0), |acc, j| acc * (roots[i] - roots[j]));
                let step = eval(roots[i]) / denom;
                roots[i] -= step;
            }
            if roots.iter().zip(&prev).all(|(a, b)| (a - b).norm() < 1e-15) {
                break;
            }
        }
        roots
    }

    #[test]
    fn diagonal_input_with_target() {
        let b = DenseMatrix::from_diagonal(&[0.5, 1.0, 0.2]);
        let s = ordered_schur_leading(&b, 1.0).unwrap();
        check_decomposition(&b, &s);
        assert!((s.t[(0, 0)] - 1.0).abs() <= 1e-15);
        for i in 0..3 {
            for j in 0..3 {
                let v = s.u[(i, j)].abs();
                assert!(v < 1e-14 || (v - 1.0).abs() < 1e-14, "U is not a signed permutation");
            }
        }
    }

    #[test]
    fn rotation_block_and_appended_one() {
        let rot = DenseMatrix::from_rows(&[&[0.0, -1.0], &[1.0, 0.0]]);
        let s = real_schur(&rot).unwrap();
        assert_eq!(s.blocks(), vec![(0, 2)]);
        for (re, im) in s.eigenvalues() {
            assert!(re.abs() < 1e-14 && (im.abs() - 1.0).abs() < 1e-14);
        }
        let b = DenseMatrix::from_rows(&[&[0.0, -1.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 0.0, 1.0]]);
        let s = ordered_schur_leading(&b, 1.0).unwrap();
        check_decomposition(&b, &s);
        assert!((s.t[(0, 0)] - 1.0).abs() < 1e-14);
        assert_eq!(s.blocks(), vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn complex_closest_is_an_error() {
        let b = DenseMatrix::from_rows(&[&[1.0, -0.1, 0.0], &[0.1, 1.0, 0.0], &[0.0, 0.0, 0.2]]);
        assert!(matches!(ordered_schur_leading(&b, 1.0), Err(Error::ComplexLeadingBlock)));
    }

    #[test]
    fn random_spectrum_matches_polynomial_roots() {
        for seed in 0..5 {
            let b = random(6, 100 + seed);
            let s = real_schur(&b).unwrap();
            check_decomposition(&b, &s);
            let mut roots = poly_roots(&char_poly(&b));
            for (re, im) in s.eigenvalues() {
                let z = Complex64::new(re, im);
                let (k, d) = roots
                    .iter()
                    .enumerate()
                    .map(|(k, r)| (k, (r - z).norm()))
                    .min_by(|a, b| a.1.total_cmp(&b.1))
                    .unwrap();
                assert!(d <= 1e-8, "eigenvalue {z} missing from polynomial roots (closest {d:e})");
                roots.swap_remove(k);
            }
        }
    }

    #[test]
    fn reordering_preserves_decomposition() {
        for seed in 0..30 {
            let n = 2 + (seed as usize % 20);
            let b = random(n, seed);
            let mut s = real_schur(&b).unwrap();
            check_decomposition(&b, &s);
            let before = s.eigenvalues();
            let last_real = s.blocks().into_iter().filter(|&(_, sz)| sz == 1).last();
            if let Some((pos, _)) = last_real {
                let lam = s.t[(pos, pos)];
                move_to_front(&mut s, pos).unwrap();
                check_decomposition(&b, &s);
                assert!((s.t[(0, 0)] - lam).abs() <= 1e-10 * b.max_abs());
                let mut after = s.eigenvalues();
                for (re, im) in before {
                    let k = after
                        .iter()
                        .enumerate()
                        .min_by(|x, y| {
                            let dx = (x.1 .0 - re).hypot(x.1 .1 - im);
                            let dy = (y.1 .0 - re).hypot(y.1 .1 - im);
                            dx.total_cmp(&dy)
                        })
                        .unwrap()
                        .0;
                    assert!((after[k].0 - re).hypot(after[k].1 - im) <= 1e-8);
                    after.swap_remove(k);
                }
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn reconstruction_up_to_50(seed in 0u64..200, n in 1usize..50) {
            let b = random(n, seed);
            let s = real_schur(&b).unwrap();
            check_decomposition(&b, &s);
        }
    }
}
