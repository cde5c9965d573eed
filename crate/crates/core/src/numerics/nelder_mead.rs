//! Bounded Nelder-Mead simplex minimizer.
//!
//! Candidates are clamped into the box, which is the usual pragmatic
//! treatment when the objective is defined everywhere inside and the
//! optimum is interior. Deterministic: no randomized restarts.

#[derive(Debug, Clone)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub fx: f64,
    pub evals: usize,
    pub converged: bool,
}

pub struct Options {
    pub f_tol: f64,
    pub x_tol: f64,
    pub max_evals: usize,
    /// Initial simplex edge, as a fraction of each box width.
    pub initial_step: f64,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            f_tol: 1e-10,
            x_tol: 1e-8,
            max_evals: 2000,
            initial_step: 0.10,
        }
    }
}

fn clamp_into(x: &mut [f64], lo: &[f64], hi: &[f64]) {
    for i in 0..x.len() {
        x[i] = x[i].clamp(lo[i], hi[i]);
    }
}

/// One Nelder-Mead run from a given start point.
pub fn minimize<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    start: &[f64],
    lo: &[f64],
    hi: &[f64],
    opts: &Options,
) -> NelderMeadResult {
    let n = start.len();
    assert!(n >= 1 && lo.len() == n && hi.len() == n);
    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);

    let mut evals = 0;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        f(x)
    };

    // Simplex: start plus one vertex per coordinate.
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let mut s0 = start.to_vec();
    clamp_into(&mut s0, lo, hi);
    let f0 = eval(&s0, &mut evals);
    simplex.push((s0.clone(), f0));
    for i in 0..n {
        let mut v = s0.clone();
        let step = opts.initial_step * (hi[i] - lo[i]);
        v[i] = if v[i] + step <= hi[i] { v[i] + step } else { v[i] - step };
        clamp_into(&mut v, lo, hi);
        let fv = eval(&v, &mut evals);
        simplex.push((v, fv));
    }

    let mut converged = false;
    while evals < opts.max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[n].1;
        let spread: f64 = (0..n)
            .map(|i| {
                let (mut mn, mut mx) = (f64::INFINITY, f64::NEG_INFINITY);
                for (v, _) in &simplex {
                    mn = mn.min(v[i]);
                    mx = mx.max(v[i]);
                }
                (mx - mn) / (hi[i] - lo[i]).max(1e-300)
            })
            .fold(0.0, f64::max);
        if (worst - best).abs() <= opts.f_tol * (best.abs() + 1e-12) && spread <= opts.x_tol {
            converged = true;
            break;
        }

        // Centroid of all but the worst vertex.
        let mut centroid = vec![0.0; n];
        for (v, _) in simplex.iter().take(n) {
            for i in 0..n {
                centroid[i] += v[i] / n as f64;
            }
        }

        let point = |coef: f64, centroid: &[f64], worst: &[f64]| -> Vec<f64> {
            let mut p: Vec<f64> = (0..n)
                .map(|i| centroid[i] + coef * (centroid[i] - worst[i]))
                .collect();
            clamp_into(&mut p, lo, hi);
            p
        };

        let xr = point(alpha, &centroid, &simplex[n].0);
        let fr = eval(&xr, &mut evals);
        if fr < simplex[0].1 {
            let xe = point(gamma, &centroid, &simplex[n].0);
            let fe = eval(&xe, &mut evals);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let xc = point(-rho, &centroid, &simplex[n].0);
            let fc = eval(&xc, &mut evals);
            if fc < simplex[n].1 {
                simplex[n] = (xc, fc);
            } else {
                // Shrink toward the best vertex.
                let best_v = simplex[0].0.clone();
                for item in simplex.iter_mut().skip(1) {
                    for i in 0..n {
                        item.0[i] = best_v[i] + sigma * (item.0[i] - best_v[i]);
                    }
                    item.1 = eval(&item.0, &mut evals);
                }
            }
        }
    }

    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    NelderMeadResult {
        x: simplex[0].0.clone(),
        fx: simplex[0].1,
        evals,
        converged,
    }
}

/// Minimize from several starts and keep the best outcome.
pub fn minimize_multistart<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    starts: &[Vec<f64>],
    lo: &[f64],
    hi: &[f64],
    opts: &Options,
) -> NelderMeadResult {
    let mut best: Option<NelderMeadResult> = None;
    let mut total_evals = 0;
    for s in starts {
        let mut r = minimize(&mut f, s, lo, hi, opts);
        total_evals += r.evals;
        r.evals = total_evals;
        best = match best {
            Some(b) if b.fx <= r.fx => Some(b),
            _ => Some(r),
        };
    }
    best.expect("at least one start point")
}
