//! First-passage machinery: the mean-exit-time double quadrature, the
//! survival operator's slowest decay rate, ensemble statistics and the
//! exponential tail fit.

use serde::Serialize;

use crate::eigensolver::BoundState;
use crate::error::{Error, Result};
use crate::numerics::tridiag::smallest_eigenvalue;
use crate::potentials::Potential;

/// FNV-1a 64-bit hash, used for provenance digests of numeric inputs.
pub fn fnv1a64(data: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in data {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Mean first-passage time from `x_start` to the absorbing point `x_end`,
/// with a reflecting boundary at `a`:
/// tau = (2m/hbar) int_{x_start}^{x_end} [1/p(y)] int_a^y p(z) dz dy,
/// p = |psi|^2.
///
/// The inner cumulative is a trapezoid prefix sum; the outer integrand
/// falls back to log-space where p underflows inside high barriers.
pub fn mfpt_quadrature(state: &BoundState, a: f64, x_start: f64, x_end: f64) -> Result<f64> {
    let integral = exit_time_integral(state, a, x_start, x_end)?;
    Ok(2.0 * state.units.mass() / state.units.hbar() * integral)
}

fn exit_time_integral(state: &BoundState, a: f64, x_start: f64, x_end: f64) -> Result<f64> {
    if !(a < x_start && x_start < x_end) {
        return Err(Error::Domain(format!(
            "need a < x_start < x_end, got {a}, {x_start}, {x_end}"
        )));
    }
    let grid = &state.grid;
    for &x in &[a, x_start, x_end] {
        if !grid.contains(x) {
            return Err(Error::OutOfGrid {
                x,
                lo: grid.start,
                hi: grid.end(),
            });
        }
    }

    let h = grid.step;
    let p = |i: usize| state.psi[i] * state.psi[i];
    let p_at = |x: f64| -> f64 {
        let i = grid.cell(x);
        let t = (x - grid.x(i)) / h;
        let v = state.psi[i] * (1.0 - t) + state.psi[i + 1] * t;
        v * v
    };

    // Nodelessness on (a, x_end]: the density may vanish at the reflecting
    // endpoint itself (hard wall), but nowhere we divide by it.
    let ia = grid.cell(a);
    let ie = grid.cell(x_end) + 1;
    let mut min_p = p_at(x_start).min(p_at(x_end));
    for i in ia + 1..=ie.min(grid.n - 1) {
        if grid.x(i) <= a {
            continue;
        }
        min_p = min_p.min(p(i));
    }
    if !(min_p > 0.0) {
        return Err(Error::Numerics(
            "density vanishes inside the integration window (nodeless state required)".into(),
        ));
    }

    // Cumulative integral of p from a, at every node index > cell(a).
    let first_full = ia + 1;
    let mut cum = vec![0.0; grid.n];
    cum[first_full] = 0.5 * (grid.x(first_full) - a) * (p_at(a) + p(first_full));
    for i in first_full + 1..grid.n {
        cum[i] = cum[i - 1] + 0.5 * h * (p(i - 1) + p(i));
    }
    let cum_at = |x: f64| -> f64 {
        if x <= a {
            return 0.0;
        }
        let i = grid.cell(x);
        if i < first_full {
            return 0.5 * (x - a) * (p_at(a) + p_at(x));
        }
        cum[i] + 0.5 * (x - grid.x(i)) * (p(i) + p_at(x))
    };

    // Outer integrand, with a log-space path for underflowing densities.
    let g_at = |x: f64, c: f64| -> f64 {
        let pv = p_at(x);
        if pv > 1e-280 {
            c / pv
        } else {
            let psi = state.psi_at(x).unwrap_or(0.0).abs().max(f64::MIN_POSITIVE);
            (c.ln() - 2.0 * psi.ln()).exp()
        }
    };

    // Trapezoid over [x_start, x_end]: interior nodes plus the cut points.
    let is = grid.cell(x_start) + 1;
    let ie_last = grid.cell(x_end);
    let mut acc = 0.0;
    let mut prev_x = x_start;
    let mut prev_g = g_at(x_start, cum_at(x_start));
    for i in is..=ie_last {
        let x = grid.x(i);
        if x <= prev_x {
            continue;
        }
        let g = g_at(x, cum[i].max(0.0));
        acc += 0.5 * (x - prev_x) * (prev_g + g);
        prev_x = x;
        prev_g = g;
    }
    if x_end > prev_x {
        let g = g_at(x_end, cum_at(x_end));
        acc += 0.5 * (x_end - prev_x) * (prev_g + g);
    }
    Ok(acc)
}

/// Factorized high-barrier mean exit time:
/// tau ~ (2m/hbar) [int_{-b}^{b} dx/p] [plateau of int p inside the
/// barrier], with the inner turning points +/- b taken at the given energy.
///
/// Inside a high barrier the inner cumulative of the nested quadrature is
/// flat at the mass left of the barrier center — exactly 1/2 for a
/// normalized symmetric state, the value the idealized well integral is
/// meant to carry. The turning-point window itself undercounts it by the
/// evanescent leak (11% for the reference ammonia well), so the leak-free
/// plateau is what multiplies the barrier factor; the left-well mass is
/// still reported as the localization diagnostic.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HighBarrierMfpt {
    pub tau: f64,
    /// Density mass left of the barrier (grid edge to -b); 1/2 minus the
    /// evanescent leak for a localized symmetric doublet member.
    pub well_occupancy: f64,
    /// False when the occupancy drops below 0.4 and the factorization is
    /// unreliable.
    pub factorization_valid: bool,
}

pub fn mfpt_high_barrier_quadrature(
    state: &BoundState,
    potential: &Potential,
    energy: f64,
) -> Result<HighBarrierMfpt> {
    let tp = potential.turning_points(energy)?;
    let grid = &state.grid;
    let h = grid.step;

    let mut inv_p = 0.0; // int_{-b}^{b} dx / p
    let mut occupancy = 0.0; // int of p left of -b
    let mut left_half = 0.0; // int of p left of 0
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..grid.n {
        let x = grid.x(i);
        let p = state.psi[i] * state.psi[i];
        if let Some((px, pp)) = prev {
            let mid = 0.5 * (px + x);
            if mid.abs() < tp.b_inner && p > 0.0 && pp > 0.0 {
                inv_p += 0.5 * h * (1.0 / pp + 1.0 / p);
            }
            if mid < -tp.b_inner {
                occupancy += 0.5 * h * (pp + p);
            }
            if mid < 0.0 {
                left_half += 0.5 * h * (pp + p);
            }
        }
        prev = Some((x, p));
    }

    let tau = 2.0 * state.units.mass() / state.units.hbar() * inv_p * left_half;
    Ok(HighBarrierMfpt {
        tau,
        well_occupancy: occupancy,
        factorization_valid: occupancy >= 0.4,
    })
}

/// Slowest decay rate lambda_1 of the survival probability on the window
/// (a, b_abs): reflecting at `a`, absorbing at `b_abs`.
///
/// The generator u d/dx + (hbar/2m) d2/dx2 is symmetrized by the similarity
/// transform with sqrt(rho), giving a self-adjoint tridiagonal problem with
/// effective potential (sigma^2/2) psi''/psi; the smallest eigenvalue comes
/// from Sturm bisection. Fails if the value moves more than 1% when the
/// window grid is coarsened twofold.
pub fn survival_decay_rate(state: &BoundState, a: f64, b_abs: f64) -> Result<f64> {
    let full = survival_rate_on_stride(state, a, b_abs, 1)?;
    let half = survival_rate_on_stride(state, a, b_abs, 2)?;
    if (full - half).abs() > 0.01 * full.abs() {
        return Err(Error::Resolution(format!(
            "decay rate moved {:.2}% under grid coarsening",
            100.0 * (full - half).abs() / full.abs()
        )));
    }
    if !(full > 0.0) {
        return Err(Error::Numerics(format!("nonpositive decay rate {full}")));
    }
    Ok(full)
}

fn survival_rate_on_stride(state: &BoundState, a: f64, b_abs: f64, stride: usize) -> Result<f64> {
    let grid = &state.grid;
    if !(a < b_abs) || !grid.contains(a) || !grid.contains(b_abs) {
        return Err(Error::Domain(format!(
            "window ({a}, {b_abs}) not inside the state's grid"
        )));
    }
    let ia = grid.nearest(a);
    let ib = grid.nearest(b_abs);
    if ib <= ia || (ib - ia) / stride < 16 {
        return Err(Error::Domain("survival window too narrow".into()));
    }
    let h = grid.step * stride as f64;
    let sigma2 = state.units.sigma_sq();
    let psi_max = state.psi.iter().fold(0.0f64, |m, p| m.max(p.abs()));

    // Effective potential W = (sigma^2/2) psi''/psi at a window node.
    let w_at = |i: usize| -> f64 {
        let (im, c, ip) = if i < stride {
            (i, i + stride, i + 2 * stride)
        } else if i + stride > grid.n - 1 {
            (i - 2 * stride, i - stride, i)
        } else {
            (i - stride, i, i + stride)
        };
        if state.psi[c].abs() < 1e-12 * psi_max {
            return 0.0;
        }
        let dd = (state.psi[im] - 2.0 * state.psi[c] + state.psi[ip]) / (h * h);
        0.5 * sigma2 * dd / state.psi[c]
    };

    // Reflecting end: Robin coefficient alpha = psi'(a)/psi(a). A node of
    // psi at the boundary (hard wall) makes the transformed problem
    // Dirichlet there instead.
    let dirichlet_left = state.psi[ia].abs() < 1e-6 * psi_max;
    let alpha = if dirichlet_left {
        0.0
    } else {
        let d1 = (-3.0 * state.psi[ia] + 4.0 * state.psi[ia + stride]
            - state.psi[ia + 2 * stride])
            / (2.0 * h);
        d1 / state.psi[ia]
    };

    // Unknown nodes: strictly before the absorbing node (Dirichlet there),
    // and after the reflecting node too when it is Dirichlet.
    let start = if dirichlet_left { ia + stride } else { ia };
    let mut idxs = Vec::new();
    let mut i = start;
    while i < ib {
        idxs.push(i);
        i += stride;
    }
    if idxs.len() < 8 {
        return Err(Error::Domain("survival window too narrow".into()));
    }

    let n = idxs.len();
    let base_off = -0.5 * sigma2 / (h * h);
    let mut diag: Vec<f64> = idxs.iter().map(|&i| sigma2 / (h * h) + w_at(i)).collect();
    let mut off = vec![base_off; n - 1];
    if !dirichlet_left {
        // Half-cell row at the reflecting end, symmetrized: the diagonal
        // keeps the full 1/h^2 weight plus the Robin term, the first
        // off-diagonal gains sqrt(2).
        diag[0] = sigma2 / (h * h) + sigma2 * alpha / h + w_at(idxs[0]);
        off[0] = base_off * std::f64::consts::SQRT_2;
    }

    Ok(smallest_eigenvalue(&diag, &off))
}

/// Collection of first-passage times with provenance.
#[derive(Debug, Clone, Serialize)]
pub struct FptEnsemble {
    /// Sorted ascending.
    taus: Vec<f64>,
    n: usize,
    timed_out: usize,
    mean: f64,
    stderr: f64,
    config_digest: u64,
}

impl FptEnsemble {
    /// Timed-out trajectories are excluded from the statistics but counted.
    pub fn from_taus(mut taus: Vec<f64>, timed_out: usize, config_digest: u64) -> Result<Self> {
        if taus.is_empty() {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        if taus.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
            return Err(Error::Domain("passage times must be positive".into()));
        }
        taus.sort_by(f64::total_cmp);
        let n = taus.len();
        let mean = taus.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            taus.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0)
        } else {
            0.0
        };
        Ok(FptEnsemble {
            taus,
            n,
            timed_out,
            mean,
            stderr: (var / n as f64).sqrt(),
            config_digest,
        })
    }

    pub fn taus(&self) -> &[f64] {
        &self.taus
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn timed_out(&self) -> usize {
        self.timed_out
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn stderr(&self) -> f64 {
        self.stderr
    }

    pub fn config_digest(&self) -> u64 {
        self.config_digest
    }

    pub fn median(&self) -> f64 {
        let n = self.n;
        if n % 2 == 1 {
            self.taus[n / 2]
        } else {
            0.5 * (self.taus[n / 2 - 1] + self.taus[n / 2])
        }
    }

    /// Fraction of trajectories that timed out, against the whole batch.
    pub fn timeout_fraction(&self) -> f64 {
        self.timed_out as f64 / (self.n + self.timed_out) as f64
    }
}

/// Exponential tail fit p(tau) ~ amplitude * exp(-rate * tau) for
/// tau >= threshold.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TailFit {
    /// Decay constant 1/tau_l.
    pub rate: f64,
    pub amplitude: f64,
    pub threshold: f64,
    /// R^2 of the log-density histogram regression over the fit window.
    pub goodness: f64,
    pub n_exceedances: usize,
    /// Asymptotic MLE standard error of the rate.
    pub rate_stderr: f64,
}

impl TailFit {
    pub fn tau_l(&self) -> f64 {
        1.0 / self.rate
    }
}

/// Maximum-likelihood exponential fit on the exceedances over `threshold`:
/// rate = 1 / mean(tau - threshold | tau >= threshold).
pub fn fit_exponential_tail(ensemble: &FptEnsemble, threshold: f64) -> Result<TailFit> {
    if threshold < 0.0 {
        return Err(Error::Domain(format!(
            "threshold must be nonnegative, got {threshold}"
        )));
    }
    let taus = ensemble.taus();
    let start = taus.partition_point(|t| *t < threshold);
    let exceed = &taus[start..];
    if exceed.len() < 100 {
        return Err(Error::InsufficientData {
            needed: 100,
            got: exceed.len(),
        });
    }
    let n_exc = exceed.len();
    let mean_excess = exceed.iter().map(|t| t - threshold).sum::<f64>() / n_exc as f64;
    if !(mean_excess > 0.0) {
        return Err(Error::Numerics("degenerate exceedances".into()));
    }
    let rate = 1.0 / mean_excess;
    let frac = n_exc as f64 / ensemble.len() as f64;
    let amplitude = frac * rate * (rate * threshold).exp();

    // Goodness: linear regression of the log histogram over the tail.
    let bins = (n_exc / 50).clamp(10, 50);
    let hist = histogram_of(exceed, threshold, threshold + 6.0 / rate, bins);
    let pts: Vec<(f64, f64)> = hist
        .iter()
        .filter(|b| b.count > 0)
        .map(|b| (0.5 * (b.left + b.right), (b.count as f64 / b.width()).ln()))
        .collect();
    let goodness = r_squared(&pts);

    Ok(TailFit {
        rate,
        amplitude,
        threshold,
        goodness,
        n_exceedances: n_exc,
        rate_stderr: rate / (n_exc as f64).sqrt(),
    })
}

/// One histogram bin with its density estimate.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HistBin {
    pub left: f64,
    pub right: f64,
    pub count: usize,
    pub density: f64,
}

impl HistBin {
    pub fn width(&self) -> f64 {
        self.right - self.left
    }
}

/// Equal-width histogram of the passage times, with density normalized by
/// the total sample count.
pub fn histogram(ensemble: &FptEnsemble, n_bins: usize) -> Vec<HistBin> {
    let taus = ensemble.taus();
    let hi = taus.last().copied().unwrap_or(1.0);
    let mut bins = histogram_of(taus, 0.0, hi, n_bins.max(1));
    let n = ensemble.len() as f64;
    for b in &mut bins {
        b.density = b.count as f64 / (n * b.width());
    }
    bins
}

fn histogram_of(sorted: &[f64], lo: f64, hi: f64, n_bins: usize) -> Vec<HistBin> {
    let hi = hi.max(lo + f64::MIN_POSITIVE);
    let width = (hi - lo) / n_bins as f64;
    let mut bins: Vec<HistBin> = (0..n_bins)
        .map(|i| HistBin {
            left: lo + width * i as f64,
            right: lo + width * (i + 1) as f64,
            count: 0,
            density: 0.0,
        })
        .collect();
    for &t in sorted {
        if t < lo || t > hi {
            continue;
        }
        let idx = (((t - lo) / width) as usize).min(n_bins - 1);
        bins[idx].count += 1;
    }
    bins
}

fn r_squared(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    if pts.len() < 3 {
        return 0.0;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx <= 0.0 || syy <= 0.0 {
        return 0.0;
    }
    (sxy * sxy) / (sxx * syy)
}
