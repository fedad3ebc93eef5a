//! Restarted GMRES for the Newton correction equations.

#[derive(Debug, Clone)]
pub struct GmresOutcome {
    pub x: Vec<f64>,
    /// ||b - A x|| / ||b||
    pub relative_residual: f64,
    pub matvecs: usize,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solves A x = b from x = 0 with GMRES(restart).
pub fn gmres<A>(mut apply: A, b: &[f64], rtol: f64, restart: usize, max_cycles: usize) -> GmresOutcome
where
    A: FnMut(&[f64]) -> Vec<f64>,
{
    let n = b.len();
    let bnorm = norm(b);
    let mut x = vec![0.0; n];
    let mut matvecs = 0;
    if bnorm == 0.0 {
        return GmresOutcome {
            x,
            relative_residual: 0.0,
            matvecs,
            converged: true,
        };
    }
    let mut rel = 1.0;
    for cycle in 0..max_cycles {
        let r: Vec<f64> = if cycle == 0 {
            b.to_vec()
        } else {
            matvecs += 1;
            b.iter().zip(apply(&x)).map(|(b, a)| b - a).collect()
        };
        let beta = norm(&r);
        rel = beta / bnorm;
        if rel <= rtol {
            return GmresOutcome {
                x,
                relative_residual: rel,
                matvecs,
                converged: true,
            };
        }
        let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
        // Hessenberg columns after rotation, plus the Givens pairs
        let mut hess: Vec<Vec<f64>> = Vec::with_capacity(restart);
        let mut rot: Vec<(f64, f64)> = Vec::with_capacity(restart);
        let mut g = vec![0.0; restart + 1];
        g[0] = beta;
        let mut k_used = 0;
        for k in 0..restart {
            let mut w = apply(&basis[k]);
            matvecs += 1;
            let mut col = vec![0.0; k + 2];
            for (i, v) in basis.iter().enumerate() {
                let hij = dot(&w, v);
                col[i] = hij;
                w.iter_mut().zip(v).for_each(|(wi, vi)| *wi -= hij * vi);
            }
            let wn = norm(&w);
            col[k + 1] = wn;
            for (i, &(c, s)) in rot.iter().enumerate() {
                let (a, b) = (col[i], col[i + 1]);
                col[i] = c * a + s * b;
                col[i + 1] = -s * a + c * b;
            }
            let (a, b) = (col[k], col[k + 1]);
            let d = a.hypot(b);
            let (c, s) = if d == 0.0 { (1.0, 0.0) } else { (a / d, b / d) };
            col[k] = d;
            col[k + 1] = 0.0;
            rot.push((c, s));
            g[k + 1] = -s * g[k];
            g[k] *= c;
            hess.push(col);
            k_used = k + 1;
            rel = g[k + 1].abs() / bnorm;
            if rel <= rtol || wn == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / wn).collect());
        }
        // back substitution on the k_used x k_used triangle
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in i + 1..k_used {
                s -= hess[j][i] * y[j];
            }
            y[i] = s / hess[i][i];
        }
        for (yj, v) in y.iter().zip(&basis) {
            x.iter_mut().zip(v).for_each(|(xi, vi)| *xi += yj * vi);
        }
        if rel <= rtol {
            return GmresOutcome {
                x,
                relative_residual: rel,
                matvecs,
                converged: true,
            };
        }
    }
    GmresOutcome {
        x,
        relative_residual: rel,
        matvecs,
        converged: false,
    }
}
