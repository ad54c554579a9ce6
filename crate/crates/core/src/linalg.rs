//! Dense helpers for the tiny systems that show up in projections and cone
//! membership (a handful of rows, never more than a few dozen).

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
/// `a` is row-major `n x n`. Returns `None` when (numerically) singular.
pub fn solve(a: &[f64], b: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut m = a.to_vec();
    let mut r = b.to_vec();
    let scale = m.iter().fold(0.0f64, |s, x| s.max(x.abs())).max(1e-300);
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i * n + col].abs().total_cmp(&m[j * n + col].abs()))?;
        if m[piv * n + col].abs() <= 1e-13 * scale {
            return None;
        }
        if piv != col {
            for k in 0..n {
                m.swap(piv * n + k, col * n + k);
            }
            r.swap(piv, col);
        }
        for row in col + 1..n {
            let f = m[row * n + col] / m[col * n + col];
            if f != 0.0 {
                for k in col..n {
                    m[row * n + k] -= f * m[col * n + k];
                }
                r[row] -= f * r[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| m[row * n + k] * x[k]).sum();
        x[row] = (r[row] - s) / m[row * n + row];
    }
    Some(x)
}

/// Nonnegative least squares `min ||G^T l - v||_2, l >= 0` where the rows of
/// `gens` are the generators. Lawson-Hanson active set; returns `(l, residual)`.
pub fn nnls(gens: &[Vec<f64>], v: &[f64]) -> (Vec<f64>, f64) {
    let m = gens.len();
    let d = v.len();
    if m == 0 {
        return (vec![], v.iter().map(|x| x * x).sum::<f64>().sqrt());
    }
    let resid = |l: &[f64]| -> Vec<f64> {
        let mut r = v.to_vec();
        for (g, li) in gens.iter().zip(l) {
            for (rk, gk) in r.iter_mut().zip(g) {
                *rk -= li * gk;
            }
        }
        r
    };
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let gscale = gens.iter().map(|g| dot(g, g)).fold(0.0f64, f64::max).sqrt().max(1e-300);
    let tol = 1e-12 * gscale * (1.0 + dot(v, v).sqrt());

    let mut l = vec![0.0; m];
    let mut passive = vec![false; m];
    for _outer in 0..(3 * m + 10) {
        let r = resid(&l);
        let w: Vec<f64> = gens.iter().map(|g| dot(g, &r)).collect();
        let cand = (0..m).filter(|&j| !passive[j] && w[j] > tol).max_by(|&a, &b| w[a].total_cmp(&w[b]));
        let Some(j) = cand else { break };
        passive[j] = true;
        for _inner in 0..(3 * m + 10) {
            let idx: Vec<usize> = (0..m).filter(|&j| passive[j]).collect();
            let z = ls_subset(gens, v, &idx, d);
            let Some(z) = z else {
                passive[j] = false;
                break;
            };
            if z.iter().all(|x| *x > 0.0) {
                for (k, &i) in idx.iter().enumerate() {
                    l[i] = z[k];
                }
                for i in 0..m {
                    if !passive[i] {
                        l[i] = 0.0;
                    }
                }
                break;
            }
            // step back towards feasibility
            let mut alpha = 1.0f64;
            for (k, &i) in idx.iter().enumerate() {
                if z[k] <= 0.0 {
                    let den = l[i] - z[k];
                    if den > 0.0 {
                        alpha = alpha.min(l[i] / den);
                    }
                }
            }
            for (k, &i) in idx.iter().enumerate() {
                l[i] += alpha * (z[k] - l[i]);
                if l[i] <= 1e-15 * gscale {
                    l[i] = 0.0;
                    passive[i] = false;
                }
            }
        }
    }
    let r = resid(&l);
    (l, dot(&r, &r).sqrt())
}

fn ls_subset(gens: &[Vec<f64>], v: &[f64], idx: &[usize], d: usize) -> Option<Vec<f64>> {
    let k = idx.len();
    let mut a = vec![0.0; k * k];
    let mut b = vec![0.0; k];
    for (r, &i) in idx.iter().enumerate() {
        for (c, &j) in idx.iter().enumerate() {
            a[r * k + c] = (0..d).map(|t| gens[i][t] * gens[j][t]).sum();
        }
        b[r] = (0..d).map(|t| gens[i][t] * v[t]).sum();
    }
    solve(&a, &b, k)
}

/// Golden-section minimisation of a unimodal-ish `f` on `[a, b]`.
pub fn golden<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
        if (b - a).abs() <= 1e-15 * (a.abs() + b.abs()) {
            break;
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Dense sampling of `f` on `[a, b]` followed by golden refinement around the
/// best few samples. Returns the best `(x, f(x))` seen.
pub fn min_1d<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, samples: usize) -> (f64, f64) {
    let n = samples.max(3);
    let h = (b - a) / (n - 1) as f64;
    let mut vals: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let x = if i == n - 1 { b } else { a + h * i as f64 };
            (x, f(x))
        })
        .collect();
    let mut best = vals.iter().copied().filter(|v| !v.1.is_nan()).fold((a, f64::INFINITY), |m, v| if v.1 < m.1 { v } else { m });
    vals.sort_by(|x, y| x.1.total_cmp(&y.1));
    for &(x, _) in vals.iter().take(4) {
        let lo = (x - h).max(a);
        let hi = (x + h).min(b);
        let r = golden(&f, lo, hi, 80);
        if r.1 < best.1 {
            best = r;
        }
    }
    best
}
