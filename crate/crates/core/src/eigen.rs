//! Eigenvalues of 4x4 real matrices through the characteristic polynomial.
//!
//! The quartic is solved with simultaneous Aberth-Ehrlich iterations.
//! Multiple roots, which a perturbed polynomial splits into a small ring of
//! simple roots, are recognised by overlapping inclusion disks and replaced
//! by the ring's centroid; the centroid of a cluster is far better
//! conditioned than its individual members.

use num_complex::Complex64;

pub type Matrix4 = [[f64; 4]; 4];

const MAX_ITER: usize = 500;

/// Monic characteristic polynomial `det(lambda I - m)` as coefficients
/// `[1, c3, c2, c1, c0]` (highest degree first).
pub fn characteristic_polynomial(m: &Matrix4) -> [f64; 5] {
    let trace: f64 = (0..4).map(|i| m[i][i]).sum();
    let mut minors2 = 0.0;
    for i in 0..4 {
        for j in i + 1..4 {
            minors2 += m[i][i] * m[j][j] - m[i][j] * m[j][i];
        }
    }
    let mut minors3 = 0.0;
    for skip in 0..4 {
        let idx: Vec<usize> = (0..4).filter(|&k| k != skip).collect();
        minors3 += det3(m, [idx[0], idx[1], idx[2]]);
    }
    [1.0, -trace, minors2, -minors3, det4(m)]
}

fn det3(m: &Matrix4, k: [usize; 3]) -> f64 {
    let a = |i: usize, j: usize| m[k[i]][k[j]];
    a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0))
        + a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0))
}

/// Determinant by cofactor expansion along the first row.
pub fn det4(m: &Matrix4) -> f64 {
    let mut det = 0.0;
    for col in 0..4 {
        let idx: Vec<usize> = (0..4).filter(|&k| k != col).collect();
        let a = |i: usize, j: usize| m[1 + i][idx[j]];
        let minor = a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1))
            - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0))
            + a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
        let sign = if col % 2 == 0 { 1.0 } else { -1.0 };
        det += sign * m[0][col] * minor;
    }
    det
}

/// `det(m - lambda I)` evaluated directly, without the polynomial.
pub fn shifted_determinant(m: &Matrix4, lambda: Complex64) -> Complex64 {
    let mut a: [[Complex64; 4]; 4] = std::array::from_fn(|i| std::array::from_fn(|j| Complex64::new(m[i][j], 0.0)));
    for (i, row) in a.iter_mut().enumerate() {
        row[i] -= lambda;
    }
    // Gaussian elimination with partial pivoting.
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..4 {
        let pivot = (col..4)
            .max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))
            .unwrap();
        if a[pivot][col].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        det *= a[col][col];
        for row in col + 1..4 {
            let factor = a[row][col] / a[col][col];
            for k in col..4 {
                let v = a[col][k];
                a[row][k] -= factor * v;
            }
        }
    }
    det
}

fn horner(coeffs: &[f64; 5], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(coeffs[0], 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in &coeffs[1..] {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Radius of a disk around `z` guaranteed to contain a root of the monic
/// quartic.
fn inclusion_radius(coeffs: &[f64; 5], z: Complex64) -> f64 {
    let (p, dp) = horner(coeffs, z);
    let by_modulus = p.norm().powf(0.25);
    if dp.norm() == 0.0 {
        by_modulus
    } else {
        (4.0 * p.norm() / dp.norm()).min(by_modulus)
    }
}

/// All four roots of the monic quartic `coeffs`.
pub fn quartic_roots(coeffs: &[f64; 5]) -> [Complex64; 4] {
    debug_assert_eq!(coeffs[0], 1.0);
    // Fujiwara bound on root modulus.
    let bound = (1..5)
        .map(|k| {
            let scale = if k == 4 { 2.0 } else { 1.0 };
            2.0 * (coeffs[k].abs() / scale).powf(1.0 / k as f64)
        })
        .fold(0.0, f64::max);
    if bound == 0.0 {
        return [Complex64::new(0.0, 0.0); 4];
    }
    let centre = -coeffs[1] / 4.0;
    let radius = 0.5 * bound;
    let mut z: [Complex64; 4] = std::array::from_fn(|k| {
        let angle = 2.0 * std::f64::consts::PI * k as f64 / 4.0 + 0.4;
        Complex64::new(centre, 0.0) + Complex64::from_polar(radius, angle)
    });

    for _ in 0..MAX_ITER {
        let mut largest_step: f64 = 0.0;
        for i in 0..4 {
            let (p, dp) = horner(coeffs, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let newton = p / dp;
            let repulsion: Complex64 = (0..4)
                .filter(|&j| j != i)
                .map(|j| {
                    let d = z[i] - z[j];
                    if d.norm() == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        d.inv()
                    }
                })
                .sum();
            let step = newton / (Complex64::new(1.0, 0.0) - newton * repulsion);
            if step.is_finite() {
                z[i] -= step;
                largest_step = largest_step.max(step.norm() / (1.0 + z[i].norm()));
            }
        }
        if largest_step < 1e-16 {
            break;
        }
    }

    merge_clusters(coeffs, &mut z);
    z
}

fn merge_clusters(coeffs: &[f64; 5], z: &mut [Complex64; 4]) {
    let radii: [f64; 4] = std::array::from_fn(|i| inclusion_radius(coeffs, z[i]));
    let mut group: [usize; 4] = [0, 1, 2, 3];
    let root = |group: &[usize; 4], mut i: usize| {
        while group[i] != i {
            i = group[i];
        }
        i
    };
    for i in 0..4 {
        for j in i + 1..4 {
            if (z[i] - z[j]).norm() <= radii[i] + radii[j] {
                let (a, b) = (root(&group, i), root(&group, j));
                if a != b {
                    group[b.max(a)] = a.min(b);
                }
            }
        }
    }
    for g in 0..4 {
        let members: Vec<usize> = (0..4).filter(|&i| root(&group, i) == g).collect();
        if members.len() > 1 {
            let centroid = members.iter().map(|&i| z[i]).sum::<Complex64>() / members.len() as f64;
            let merged = refine_multiple(coeffs, centroid, members.len());
            for &i in &members {
                z[i] = merged;
            }
        }
    }
}

/// A root of multiplicity `k` is a simple root of the `(k-1)`-th derivative,
/// where Newton's method regains full precision.
fn refine_multiple(coeffs: &[f64; 5], start: Complex64, k: usize) -> Complex64 {
    let order = k - 1;
    let degree = 4 - order;
    // Descending coefficients of the derivative.
    let d: Vec<f64> = (0..=degree)
        .map(|i| {
            let power = degree - i;
            let falling: f64 = (power + 1..=power + order).map(|v| v as f64).product();
            coeffs[i] * falling
        })
        .collect();
    let eval = |z: Complex64| {
        let mut p = Complex64::new(d[0], 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &c in &d[1..] {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    };
    let mut z = start;
    for _ in 0..50 {
        let (p, dp) = eval(z);
        if dp.norm() == 0.0 {
            break;
        }
        let step = p / dp;
        if !step.is_finite() {
            break;
        }
        z -= step;
        if step.norm() <= 1e-16 * (1.0 + z.norm()) {
            break;
        }
    }
    // Newton may wander off when the cluster is several distinct roots.
    if (z - start).norm() <= inclusion_radius(coeffs, start).max(1e-300) * 2.0 {
        z
    } else {
        start
    }
}

/// Eigenvalues of `m`, sorted by real part descending (ties by imaginary
/// part descending).
pub fn eigenvalues_4x4(m: &Matrix4) -> [Complex64; 4] {
    let mut roots = quartic_roots(&characteristic_polynomial(m));
    // Drop components that are pure rounding noise.
    let scale = roots.iter().map(|r| r.norm()).fold(1.0, f64::max);
    for r in roots.iter_mut() {
        if r.im.abs() <= 1e-14 * scale {
            r.im = 0.0;
        }
        if r.re.abs() <= 1e-14 * scale {
            r.re = 0.0;
        }
    }
    roots.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    roots
}

/// Largest absolute row sum.
pub fn norm_inf(m: &Matrix4) -> f64 {
    m.iter()
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn diag(d: [f64; 4]) -> Matrix4 {
        std::array::from_fn(|i| std::array::from_fn(|j| if i == j { d[i] } else { 0.0 }))
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn identity_spectrum() {
        let ev = eigenvalues_4x4(&diag([1.0; 4]));
        for e in ev {
            assert!(close(e, Complex64::new(1.0, 0.0), 1e-12), "{e}");
        }
    }

    #[test]
    fn diagonal_spectrum() {
        let ev = eigenvalues_4x4(&diag([3.0, -1.0, 0.0, 0.0]));
        let expected = [3.0, 0.0, 0.0, -1.0];
        for (e, x) in ev.iter().zip(expected) {
            assert!(close(*e, Complex64::new(x, 0.0), 1e-12), "{ev:?}");
        }
    }

    #[test]
    fn rotation_block_spectrum() {
        let mut m = [[0.0; 4]; 4];
        m[0][1] = -1.0;
        m[1][0] = 1.0;
        let ev = eigenvalues_4x4(&m);
        assert!(close(ev[0], Complex64::new(0.0, 1.0), 1e-12), "{ev:?}");
        assert!(close(ev[1], Complex64::new(0.0, 0.0), 1e-12), "{ev:?}");
        assert!(close(ev[2], Complex64::new(0.0, 0.0), 1e-12), "{ev:?}");
        assert!(close(ev[3], Complex64::new(0.0, -1.0), 1e-12), "{ev:?}");
    }

    #[test]
    fn zero_matrix() {
        assert_eq!(eigenvalues_4x4(&[[0.0; 4]; 4]), [Complex64::new(0.0, 0.0); 4]);
    }

    #[test]
    fn jordan_block_double_root() {
        // Defective double eigenvalue 2 next to simple -1 and 5.
        let m = [
            [2.0, 1.0, 0.0, 0.0],
            [0.0, 2.0, 0.0, 0.0],
            [0.0, 0.0, -1.0, 0.0],
            [0.0, 0.0, 0.0, 5.0],
        ];
        let ev = eigenvalues_4x4(&m);
        let expected = [5.0, 2.0, 2.0, -1.0];
        for (e, x) in ev.iter().zip(expected) {
            assert!(close(*e, Complex64::new(x, 0.0), 1e-7), "{ev:?}");
        }
    }

    #[test]
    fn char_poly_of_companion_like_matrix() {
        let m = [
            [1.0, 2.0, 0.0, -1.0],
            [0.5, -3.0, 4.0, 0.0],
            [0.0, 1.0, 2.0, 1.0],
            [2.0, 0.0, -1.0, 1.0],
        ];
        let c = characteristic_polynomial(&m);
        // det(lambda I - m) at lambda = 0 equals det(-m) = det(m).
        assert!((c[4] - det4(&m)).abs() < 1e-12);
        for lambda in [0.3, -1.7, 2.2] {
            let p = c.iter().fold(0.0, |acc, &k| acc * lambda + k);
            let d = shifted_determinant(&m, Complex64::new(lambda, 0.0)).re;
            assert!((p - d).abs() < 1e-10, "{p} vs {d}");
        }
    }

    proptest! {
        #[test]
        fn roots_annihilate_the_determinant(entries in prop::array::uniform16(-3.0..3.0f64)) {
            let m: Matrix4 = std::array::from_fn(|i| std::array::from_fn(|j| entries[4 * i + j]));
            let ev = eigenvalues_4x4(&m);
            let scale = norm_inf(&m).max(1e-300).powi(4);
            for e in ev {
                prop_assert!(shifted_determinant(&m, e).norm() / scale < 1e-8, "{:?}", ev);
            }
            let trace: f64 = (0..4).map(|i| m[i][i]).sum();
            let sum: Complex64 = ev.iter().sum();
            prop_assert!((sum.re - trace).abs() < 1e-9 * (1.0 + norm_inf(&m)));
            prop_assert!(sum.im.abs() < 1e-9 * (1.0 + norm_inf(&m)));
            prop_assert!(ev.windows(2).all(|w| w[0].re >= w[1].re));
        }

        #[test]
        fn triangular_spectrum_is_diagonal(d in prop::array::uniform4(-5.0..5.0f64), upper in prop::array::uniform6(-2.0..2.0f64)) {
            let mut m = diag(d);
            let mut k = 0;
            for i in 0..4 {
                for j in i + 1..4 {
                    m[i][j] = upper[k];
                    k += 1;
                }
            }
            let ev = eigenvalues_4x4(&m);
            let mut want = d;
            want.sort_by(|a, b| b.total_cmp(a));
            for (e, w) in ev.iter().zip(want) {
                // Close diagonal entries form ill-conditioned clusters.
                prop_assert!((e.re - w).abs() < 1e-5 * (1.0 + w.abs()), "{:?} vs {:?}", ev, want);
            }
        }
    }
}
