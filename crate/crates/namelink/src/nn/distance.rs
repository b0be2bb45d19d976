/// `[L1, L2, L∞, cosine distance, |u−v|...]` of two encodings; symmetric in its arguments.
pub fn distance_vector(u: &[f64], v: &[f64]) -> Vec<f64> {
    let n = u.len();
    let mut out = vec![0.0; 4 + n];
    let (mut l1, mut l2sq, mut linf) = (0.0_f64, 0.0_f64, 0.0_f64);
    for j in 0..n {
        let a = (u[j] - v[j]).abs();
        out[4 + j] = a;
        l1 += a;
        l2sq += a * a;
        linf = linf.max(a);
    }
    out[0] = l1;
    out[1] = l2sq.sqrt();
    out[2] = linf;
    out[3] = cosine_distance(u, v);
    out
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// `1 − u·v / (‖u‖‖v‖)`, or 1 when either vector is zero.
pub fn cosine_distance(u: &[f64], v: &[f64]) -> f64 {
    let (nu, nv) = (dot(u, u).sqrt(), dot(v, v).sqrt());
    if nu == 0.0 || nv == 0.0 {
        return 1.0;
    }
    1.0 - dot(u, v) / (nu * nv)
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Gradients with respect to `u` and `v` given `d` = ∂loss/∂distance_vector.
pub fn distance_backward(u: &[f64], v: &[f64], d: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = u.len();
    let diff: Vec<f64> = u.iter().zip(v).map(|(a, b)| a - b).collect();
    let l2 = diff.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut arg = 0;
    let mut best = -1.0;
    for (j, x) in diff.iter().enumerate() {
        if x.abs() > best {
            best = x.abs();
            arg = j;
        }
    }
    // gradient w.r.t. diff; dv gets the negation
    let mut gd = vec![0.0; n];
    for j in 0..n {
        let s = sign(diff[j]);
        gd[j] += (d[0] + d[4 + j]) * s;
        if l2 > 0.0 {
            gd[j] += d[1] * diff[j] / l2;
        }
    }
    if n > 0 {
        gd[arg] += d[2] * sign(diff[arg]);
    }
    let mut du = gd.clone();
    let mut dv: Vec<f64> = gd.iter().map(|x| -x).collect();
    let (nu, nv) = (dot(u, u).sqrt(), dot(v, v).sqrt());
    if nu > 0.0 && nv > 0.0 && d[3] != 0.0 {
        let s = dot(u, v) / (nu * nv);
        for j in 0..n {
            du[j] -= d[3] * (v[j] / (nu * nv) - s * u[j] / (nu * nu));
            dv[j] -= d[3] * (u[j] / (nu * nv) - s * v[j] / (nv * nv));
        }
    }
    (du, dv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthogonal_unit_vectors() {
        let mut u = vec![0.0; 16];
        let mut v = vec![0.0; 16];
        u[0] = 1.0;
        v[1] = 1.0;
        let d = distance_vector(&u, &v);
        assert_eq!(d.len(), 20);
        assert_eq!(d[0], 2.0);
        assert_eq!(d[1], 2f64.sqrt());
        assert_eq!(d[2], 1.0);
        assert_eq!(d[3], 1.0);
    }

    #[test]
    fn identical_vectors_are_at_distance_zero() {
        let u = vec![0.3, -0.2, 0.9];
        let d = distance_vector(&u, &u);
        assert!(d[..3].iter().all(|&x| x == 0.0));
        assert!(d[3].abs() < 1e-15);
        assert!(d[4..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn zero_vector_cosine_is_one() {
        assert_eq!(cosine_distance(&[0.0, 0.0], &[1.0, 2.0]), 1.0);
    }

    #[test]
    fn swap_is_bit_exact() {
        let u = vec![0.123456789, -0.987654321, 0.5, 1e-3];
        let v = vec![-0.3, 0.25, 0.5000001, 7.0];
        assert_eq!(distance_vector(&u, &v), distance_vector(&v, &u));
    }
}
