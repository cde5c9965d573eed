//! Numerov shooting for bound states of smooth 1D potentials.
//!
//! Strategy: bidirectional integration with the match point at the rightmost
//! classically allowed node (clamped into the grid interior), eigenvalues
//! bracketed by node counting and refined on the derivative-mismatch
//! (Wronskian) function with bisection and a secant polish. Node-count
//! bracketing is what separates near-degenerate doublets, where the
//! splitting can be four orders of magnitude below the level spacing.

use crate::error::{Error, Result};
use crate::eigensolver::{BoundState, Parity, UniformGrid};
use crate::numerics::bisect;
use crate::potentials::RosenMorseDouble;
use crate::units::UnitSystem;

/// Which bound state to solve for, by interior node count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Ground,
    FirstExcited,
    SecondEven,
    SecondOdd,
}

impl Level {
    pub fn node_count(self) -> usize {
        match self {
            Level::Ground => 0,
            Level::FirstExcited => 1,
            Level::SecondEven => 2,
            Level::SecondOdd => 3,
        }
    }

    pub fn parity(self) -> Parity {
        if self.node_count().is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// Grid request for the Numerov solver.
#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    pub points: usize,
    /// Half-width of the symmetric grid; None derives it from the potential's
    /// turning points plus enough evanescent margin for 1e-8 tail closure.
    pub half_width: Option<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            points: 8001,
            half_width: None,
        }
    }
}

/// Auto grid for a Rosen-Morse double well: turning points at a high-energy
/// reference plus an evanescent margin with integrated attenuation >= 20, so
/// the tail mass at the edges is negligible for every state up to the second
/// doublet.
pub fn rm_grid(pot: &RosenMorseDouble, units: &UnitSystem, points: usize) -> Result<UniformGrid> {
    let g = pot.geometry();
    let v_min = pot.value(0.0) - g.v0;
    let asym = pot.asymmetry();
    let e_ref = v_min + 0.75 * (asym - v_min);

    // Outer crossing V(x) = e_ref beyond the minimum.
    let d = pot.length_scale();
    let mut hi = g.x0 + d;
    let mut guard = 0;
    while pot.value(hi) < e_ref {
        hi += d;
        guard += 1;
        if guard > 10_000 {
            return Err(Error::GridTooSmall(
                "no outer crossing for the reference energy".into(),
            ));
        }
    }
    let crossing = bisect(|x| pot.value(x) - e_ref, g.x0, hi, 1e-12 * d)?;

    // March outward until the accumulated attenuation integral reaches 20
    // (tail suppression e^-20 ~ 2e-9 of the interior amplitude).
    let coef = 2.0 * units.mass() / units.hbar().powi(2);
    let step = d / 50.0;
    let kappa = |x: f64| (coef * (pot.value(x) - e_ref)).max(0.0).sqrt();
    let mut acc = 0.0;
    let mut x = crossing;
    let mut k_prev = kappa(x);
    while acc < 20.0 {
        x += step;
        let k_here = kappa(x);
        acc += 0.5 * step * (k_prev + k_here);
        k_prev = k_here;
        if x > crossing + 1000.0 * d {
            return Err(Error::GridTooSmall(
                "evanescent margin did not close within 1000 length scales".into(),
            ));
        }
    }
    Ok(UniformGrid::symmetric(x + 2.0 * step, points))
}

/// Solve a bound state of a Rosen-Morse double well.
pub fn numerov_bound_state(
    pot: &RosenMorseDouble,
    spec: &GridSpec,
    which: Level,
    units: &UnitSystem,
) -> Result<BoundState> {
    let grid = match spec.half_width {
        Some(hw) => UniformGrid::symmetric(hw, spec.points),
        None => rm_grid(pot, units, spec.points)?,
    };
    numerov_bound_state_fn(|x| pot.value(x), grid, false, which, units)
}

/// Solve a bound state of an arbitrary potential sampled on `grid`.
///
/// `walls = true` treats the grid edges as infinite walls (psi = 0 exactly)
/// instead of requiring evanescent tail closure there.
pub fn numerov_bound_state_fn<V: Fn(f64) -> f64>(
    v: V,
    grid: UniformGrid,
    walls: bool,
    which: Level,
    units: &UnitSystem,
) -> Result<BoundState> {
    let v_nodes: Vec<f64> = (0..grid.n).map(|i| v(grid.x(i))).collect();
    let shooter = Shooter {
        grid,
        v: v_nodes,
        coef: 2.0 * units.mass() / units.hbar().powi(2),
        walls,
    };
    shooter.solve(which, units)
}

struct Shooter {
    grid: UniformGrid,
    v: Vec<f64>,
    /// 2m / hbar^2 in working units.
    coef: f64,
    walls: bool,
}

struct Sweep {
    psi: Vec<f64>,
    nodes: usize,
}

impl Shooter {
    fn q(&self, i: usize, e: f64) -> f64 {
        self.coef * (self.v[i] - e)
    }

    /// Numerov integration across the full grid from one side, with
    /// periodic renormalization against overflow. `forward` selects the
    /// direction; node counting only applies to the forward sweep.
    fn sweep(&self, e: f64, forward: bool) -> Sweep {
        let n = self.grid.n;
        let h2 = self.grid.step * self.grid.step;
        let f = |i: usize| 1.0 - h2 * self.q(i, e) / 12.0;

        let mut psi = vec![0.0; n];
        let idx = |j: usize| if forward { j } else { n - 1 - j };
        psi[idx(0)] = 0.0;
        psi[idx(1)] = self.grid.step;

        let mut nodes = 0;
        let mut last_sign = 1i8;
        for j in 1..n - 1 {
            let (im, i0, ip) = (idx(j - 1), idx(j), idx(j + 1));
            let next = ((12.0 - 10.0 * f(i0)) * psi[i0] - f(im) * psi[im]) / f(ip);
            psi[ip] = next;
            if next != 0.0 {
                let s = if next > 0.0 { 1 } else { -1 };
                if s != last_sign {
                    nodes += 1;
                    last_sign = s;
                }
            }
            if next.abs() > 1e200 {
                let scale = next.abs().recip();
                let upto = j + 1;
                for jj in 0..=upto {
                    psi[idx(jj)] *= scale;
                }
            }
        }
        Sweep { psi, nodes }
    }

    fn node_count(&self, e: f64) -> usize {
        self.sweep(e, true).nodes
    }

    /// Match index: rightmost classically allowed node, clamped to the grid
    /// interior. Keeps the matching away from x = 0, where even/odd doublet
    /// members are hard to tell apart, and away from in-well nodes of the
    /// second doublet.
    fn match_index(&self, e: f64) -> usize {
        let n = self.grid.n;
        let lo = n / 10;
        let hi = n - 1 - n / 10;
        let mut m = lo + (hi - lo) * 62 / 100; // fallback for flat potentials
        for i in (0..n).rev() {
            if self.v[i] <= e {
                m = i;
                break;
            }
        }
        m.clamp(lo, hi)
    }

    /// Scaled Wronskian of the two sweeps at the match index; changes sign
    /// exactly at an eigenvalue.
    fn mismatch(&self, e: f64) -> f64 {
        let m = self.match_index(e);
        let left = self.sweep(e, true);
        let right = self.sweep(e, false);
        let h2 = 2.0 * self.grid.step;
        let dl = (left.psi[m + 1] - left.psi[m - 1]) / h2;
        let dr = (right.psi[m + 1] - right.psi[m - 1]) / h2;
        let w = dl * right.psi[m] - left.psi[m] * dr;
        let scale = (dl * right.psi[m]).abs() + (left.psi[m] * dr).abs() + f64::MIN_POSITIVE;
        w / scale
    }

    fn solve(&self, which: Level, units: &UnitSystem) -> Result<BoundState> {
        let target = which.node_count();
        let n = self.grid.n;
        let width = self.grid.end() - self.grid.start;
        let v_min = self.v.iter().cloned().fold(f64::INFINITY, f64::min);
        let v_max = self.v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        // Fundamental kinetic scale of the box, a floor for flat potentials.
        let kinetic = units.hbar().powi(2) * (std::f64::consts::PI / width).powi(2)
            / (2.0 * units.mass());
        let scale = (v_max - v_min).max(kinetic);

        let e_cap = if self.walls {
            None
        } else {
            Some(self.v[0].min(self.v[n - 1]))
        };

        // Upward ladder to the first energy with count > target.
        let mut lo = v_min + 1e-9 * scale;
        if self.node_count(lo) > target {
            return Err(Error::Bracketing(format!(
                "node count at the well bottom already exceeds {target}"
            )));
        }
        let mut step = kinetic.max(1e-6 * scale);
        let mut hi = lo;
        loop {
            hi += step;
            step *= 1.6;
            if let Some(cap) = e_cap {
                if hi >= cap {
                    hi = cap - 1e-12 * scale;
                    if self.node_count(hi) <= target {
                        return Err(Error::Bracketing(format!(
                            "state with {target} nodes is not bound below the grid-edge potential"
                        )));
                    }
                    break;
                }
            }
            let c = self.node_count(hi);
            if c > target {
                break;
            }
            lo = hi;
            if step > 1e6 * scale {
                return Err(Error::Bracketing(
                    "energy ladder failed to find the requested node count".into(),
                ));
            }
        }

        // Node-count bisection isolates the eigenvalue between doublet
        // members before any mismatch evaluation.
        for _ in 0..30 {
            let mid = 0.5 * (lo + hi);
            if self.node_count(mid) > target {
                hi = mid;
            } else {
                lo = mid;
            }
        }

        // Mismatch refinement inside the isolated bracket.
        let e = {
            let glo = self.mismatch(lo);
            let ghi = self.mismatch(hi);
            if glo.signum() != ghi.signum() && glo.is_finite() && ghi.is_finite() {
                let (mut a, mut b, mut ga) = (lo, hi, glo);
                for _ in 0..40 {
                    let mid = 0.5 * (a + b);
                    if mid <= a || mid >= b {
                        break;
                    }
                    let gm = self.mismatch(mid);
                    if gm == 0.0 {
                        a = mid;
                        b = mid;
                        break;
                    }
                    if gm.signum() == ga.signum() {
                        a = mid;
                        ga = gm;
                    } else {
                        b = mid;
                    }
                }
                // Secant polish on the final bracket.
                let mut x0 = a;
                let mut x1 = b;
                let mut f0 = self.mismatch(x0);
                for _ in 0..6 {
                    let f1 = self.mismatch(x1);
                    let denom = f1 - f0;
                    if denom == 0.0 || !denom.is_finite() {
                        break;
                    }
                    let x2 = x1 - f1 * (x1 - x0) / denom;
                    if !x2.is_finite() || x2 < a || x2 > b {
                        break;
                    }
                    x0 = x1;
                    f0 = f1;
                    x1 = x2;
                }
                x1
            } else {
                // Fall back to pure node bisection at machine resolution.
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if self.node_count(mid) > target {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                0.5 * (lo + hi)
            }
        };

        // Stability: Numerov needs h^2 max|Q| well below 1.
        let h2 = self.grid.step * self.grid.step;
        let q_max = (0..n).map(|i| self.q(i, e).abs()).fold(0.0, f64::max);
        if h2 * q_max > 0.1 {
            return Err(Error::Numerics(format!(
                "grid too coarse: h^2 max|Q| = {:.3} (need < 0.1); raise the point count",
                h2 * q_max
            )));
        }

        // Tail closure: integrated attenuation from the outermost allowed
        // node to each edge must suppress the wavefunction below 1e-8.
        if !self.walls {
            let needed = (1e8f64).ln();
            for (range, label) in [
                ((0..n).find(|&i| self.v[i] <= e), "left"),
                ((0..n).rev().find(|&i| self.v[i] <= e), "right"),
            ] {
                let Some(turn) = range else {
                    return Err(Error::Bracketing("no classically allowed region".into()));
                };
                let (a, b) = if label == "left" { (0, turn) } else { (turn, n - 1) };
                let mut acc = 0.0;
                for i in a..b {
                    let k0 = self.q(i, e).max(0.0).sqrt();
                    let k1 = self.q(i + 1, e).max(0.0).sqrt();
                    acc += 0.5 * self.grid.step * (k0 + k1);
                }
                if acc < needed {
                    return Err(Error::GridTooSmall(format!(
                        "{label} evanescent margin gives attenuation {acc:.1} < {needed:.1}"
                    )));
                }
            }
        }

        // Assemble: left sweep up to the match point, scaled right sweep
        // beyond it.
        let m = self.match_index(e);
        let left = self.sweep(e, true);
        let right = self.sweep(e, false);
        let ratio = if right.psi[m].abs() > 1e-120 * left.psi[m].abs().max(1.0) {
            left.psi[m] / right.psi[m]
        } else {
            (left.psi[m + 1] - left.psi[m - 1]) / (right.psi[m + 1] - right.psi[m - 1])
        };
        let mut psi: Vec<f64> = (0..n)
            .map(|i| if i <= m { left.psi[i] } else { right.psi[i] * ratio })
            .collect();

        // For a symmetric problem, project onto the exact parity sector.
        let symmetric = (0..n).all(|i| {
            let d = (self.v[i] - self.v[n - 1 - i]).abs();
            d <= 1e-10 * (self.v[i].abs() + self.v[n - 1 - i].abs() + 1e-300)
        });
        if symmetric {
            let sign = match which.parity() {
                Parity::Even => 1.0,
                Parity::Odd => -1.0,
            };
            let old = psi.clone();
            for i in 0..n {
                psi[i] = 0.5 * (old[i] + sign * old[n - 1 - i]);
            }
        }

        let state = BoundState::from_samples(
            self.grid,
            psi,
            e,
            None,
            which.parity(),
            *units,
        )?;
        if state.node_count() != target {
            return Err(Error::Bracketing(format!(
                "node-count mismatch after convergence: wanted {target}, got {}",
                state.node_count()
            )));
        }
        Ok(state)
    }
}
