//! Tiny dense linear algebra for fixed sizes (2 and 3, determinants up to
//! 6). Everything here operates on stack arrays; the sizes are small and
//! known, so pulling in a matrix library would buy nothing.

/// Solves the symmetric positive definite 2x2 system a*x = b.
/// Returns None when the determinant is not safely positive.
pub fn solve2(a: [[f64; 2]; 2], b: [f64; 2]) -> Option<[f64; 2]> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if det.abs() < 1e-300 {
        return None;
    }
    Some([
        (b[0] * a[1][1] - b[1] * a[0][1]) / det,
        (a[0][0] * b[1] - a[1][0] * b[0]) / det,
    ])
}

/// In-place Gaussian elimination determinant with partial pivoting.
pub fn det(mut m: Vec<Vec<f64>>) -> f64 {
    let n = m.len();
    let mut sign = 1.0;
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .expect("non-empty column");
        if m[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            m.swap(pivot, col);
            sign = -sign;
        }
        det *= m[col][col];
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            for k in col..n {
                m[row][k] -= f * m[col][k];
            }
        }
    }
    sign * det
}

/// Inverse of a symmetric 2x2 metric; None when degenerate.
pub fn invert2(g: [[f64; 2]; 2]) -> Option<[[f64; 2]; 2]> {
    let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    if det.abs() < 1e-300 {
        return None;
    }
    Some([
        [g[1][1] / det, -g[0][1] / det],
        [-g[1][0] / det, g[0][0] / det],
    ])
}

/// Deterministic completion of a unit 3-vector to a right-handed
/// orthonormal basis (u, v, w). The seed axis is the coordinate axis least
/// aligned with u, ties broken toward the smaller index.
pub fn complete_unit3(u: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let mut seed = [0.0; 3];
    let k = (0..3)
        .min_by(|&a, &b| u[a].abs().total_cmp(&u[b].abs()))
        .expect("three axes");
    seed[k] = 1.0;
    let proj = dot3(seed, u);
    let mut v = [
        seed[0] - proj * u[0],
        seed[1] - proj * u[1],
        seed[2] - proj * u[2],
    ];
    let n = dot3(v, v).sqrt();
    for x in &mut v {
        *x /= n;
    }
    let w = cross3(u, v);
    (v, w)
}

pub fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn normalize3(mut a: [f64; 3]) -> [f64; 3] {
    let n = dot3(a, a).sqrt();
    for x in &mut a {
        *x /= n;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn det_of_identity_and_swap() {
        let id = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        assert_eq!(det(id), 1.0);
        let swapped = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        assert_eq!(det(swapped), -1.0);
    }

    #[test]
    fn det_matches_cofactor_3x3() {
        let m = vec![
            vec![2.0, -1.0, 0.5],
            vec![1.0, 3.0, -2.0],
            vec![0.0, 4.0, 1.0],
        ];
        // cofactor expansion along the first row
        let minors = [
            3.0 * 1.0 - (-2.0) * 4.0,
            1.0 * 1.0 - (-2.0) * 0.0,
            1.0 * 4.0 - 3.0 * 0.0,
        ];
        let expected = m[0][0] * minors[0] - m[0][1] * minors[1] + m[0][2] * minors[2];
        assert!((det(m) - expected).abs() < 1e-12);
    }

    #[test]
    fn completion_is_orthonormal() {
        for u in [
            normalize3([1.0, 2.0, -0.5]),
            [1.0, 0.0, 0.0],
            normalize3([-0.3, 0.1, 0.9]),
        ] {
            let (v, w) = complete_unit3(u);
            assert!(dot3(u, v).abs() < 1e-14);
            assert!(dot3(u, w).abs() < 1e-14);
            assert!(dot3(v, w).abs() < 1e-14);
            assert!((dot3(v, v) - 1.0).abs() < 1e-14);
            assert!((dot3(w, w) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn solve2_roundtrip() {
        let a = [[2.0, 0.3], [0.3, 1.5]];
        let x = [0.7, -1.1];
        let b = [
            a[0][0] * x[0] + a[0][1] * x[1],
            a[1][0] * x[0] + a[1][1] * x[1],
        ];
        let got = solve2(a, b).unwrap();
        assert!((got[0] - x[0]).abs() < 1e-12 && (got[1] - x[1]).abs() < 1e-12);
    }
}
