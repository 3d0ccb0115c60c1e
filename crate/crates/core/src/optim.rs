//! Quasi-Newton minimization with central-difference gradients and a
//! deterministic multi-start driver.

use rayon::prelude::*;

/// Whether a reported value is exact or only an upper bound on the true minimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundDirection {
    UpperBound,
    Exact,
}

impl BoundDirection {
    pub fn name(self) -> &'static str {
        match self {
            BoundDirection::UpperBound => "upper-bound",
            BoundDirection::Exact => "exact",
        }
    }
}

impl std::fmt::Display for BoundDirection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Settings shared by every optimizing quantifier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimOptions {
    /// `None` selects the quantifier's own default.
    pub restarts: Option<usize>,
    pub seed: u64,
    /// Stop when the objective decreases by less than `tol·(1 + |f|)` in one step.
    pub tol: f64,
    pub max_iter: usize,
    /// Halves the default restart count.
    pub fast: bool,
}

impl Default for OptimOptions {
    fn default() -> Self {
        OptimOptions {
            restarts: None,
            seed: 0,
            tol: 1e-10,
            max_iter: 300,
            fast: false,
        }
    }
}

impl OptimOptions {
    pub fn with_seed(seed: u64) -> Self {
        OptimOptions {
            seed,
            ..OptimOptions::default()
        }
    }

    pub fn restarts(mut self, restarts: usize) -> Self {
        self.restarts = Some(restarts);
        self
    }

    pub fn fast(mut self, fast: bool) -> Self {
        self.fast = fast;
        self
    }

    /// Explicit count if given, otherwise `default` (halved in fast mode, at least 1).
    pub fn restart_count(&self, default: usize) -> usize {
        match self.restarts {
            Some(r) => r.max(1),
            None if self.fast => (default / 2).max(1),
            None => default.max(1),
        }
    }

    pub fn bfgs(&self) -> BfgsOptions {
        BfgsOptions {
            max_iter: self.max_iter,
            ftol: self.tol,
            ..BfgsOptions::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BfgsOptions {
    pub max_iter: usize,
    /// Gradient sup-norm below which the run counts as converged.
    pub gtol: f64,
    /// Relative objective decrease below which (twice in a row) the run stops.
    pub ftol: f64,
    /// Central-difference step.
    pub fd_step: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        BfgsOptions {
            max_iter: 300,
            gtol: 1e-7,
            ftol: 1e-10,
            fd_step: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

pub fn central_gradient(f: &dyn Fn(&[f64]) -> f64, x: &[f64], h: f64, evals: &mut usize) -> Vec<f64> {
    let mut xp = x.to_vec();
    let mut g = vec![0.0; x.len()];
    for i in 0..x.len() {
        let xi = x[i];
        xp[i] = xi + h;
        let fp = f(&xp);
        xp[i] = xi - h;
        let fm = f(&xp);
        xp[i] = xi;
        g[i] = (fp - fm) / (2.0 * h);
    }
    *evals += 2 * x.len();
    g
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sup_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// BFGS on the inverse Hessian with Armijo backtracking.
pub fn bfgs(f: &dyn Fn(&[f64]) -> f64, x0: Vec<f64>, opts: &BfgsOptions) -> Minimum {
    let n = x0.len();
    let mut evals = 1;
    let mut x = x0;
    let mut fx = f(&x);
    if n == 0 {
        return Minimum {
            x,
            value: fx,
            iterations: 0,
            evaluations: evals,
            converged: true,
        };
    }
    let mut g = central_gradient(f, &x, opts.fd_step, &mut evals);
    let mut hinv = identity(n);
    let mut first_step = true;
    let mut converged = false;
    let mut iterations = 0;
    let mut small_steps = 0;

    while iterations < opts.max_iter {
        if sup_norm(&g) <= opts.gtol {
            converged = true;
            break;
        }
        iterations += 1;
        let mut p = mat_vec(&hinv, &g);
        p.iter_mut().for_each(|v| *v = -*v);
        let mut slope = dot(&g, &p);
        if slope >= 0.0 {
            hinv = identity(n);
            p = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }

        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..50 {
            let xn: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a + alpha * b).collect();
            let fn_ = f(&xn);
            evals += 1;
            if fn_ <= fx + 1e-4 * alpha * slope {
                accepted = Some((xn, fn_));
                break;
            }
            alpha *= 0.5;
        }
        let Some((xn, fn_)) = accepted else {
            // no descent along the quasi-Newton direction: the gradient is at noise level
            converged = sup_norm(&g) <= 1e3 * opts.gtol;
            break;
        };

        let gn = central_gradient(f, &xn, opts.fd_step, &mut evals);
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let decrease = fx - fn_;
        x = xn;
        g = gn;
        let f_old = fx;
        fx = fn_;

        let sy = dot(&s, &y);
        if sy > 1e-16 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() && sy > 0.0 {
            if first_step {
                let scale = sy / dot(&y, &y);
                hinv = identity(n);
                hinv.iter_mut().for_each(|v| *v *= scale);
                first_step = false;
            }
            update_inverse_hessian(&mut hinv, &s, &y, sy);
        }

        // two consecutive negligible decreases end the run
        if decrease <= opts.ftol * (1.0 + f_old.abs()) {
            small_steps += 1;
            if small_steps == 2 {
                converged = true;
                break;
            }
        } else {
            small_steps = 0;
        }
    }
    Minimum {
        x,
        value: fx,
        iterations,
        evaluations: evals,
        converged,
    }
}

fn identity(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}

fn mat_vec(m: &[f64], v: &[f64]) -> Vec<f64> {
    let n = v.len();
    (0..n).map(|i| dot(&m[i * n..(i + 1) * n], v)).collect()
}

/// `H ← (I − ρ s yᵀ) H (I − ρ y sᵀ) + ρ s sᵀ`.
fn update_inverse_hessian(h: &mut [f64], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let rho = 1.0 / sy;
    let hy = mat_vec(h, y);
    let yhy = dot(y, &hy);
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] += -rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
        }
    }
}

/// Terminal point of one restart.
#[derive(Debug, Clone)]
pub struct RestartOutcome<T> {
    pub value: f64,
    pub converged: bool,
    pub payload: T,
}

/// Results of every restart, in restart order, plus the winner.
#[derive(Debug, Clone)]
pub struct MultiStart<T> {
    pub outcomes: Vec<RestartOutcome<T>>,
    pub best: usize,
}

impl<T> MultiStart<T> {
    pub fn best(&self) -> &RestartOutcome<T> {
        &self.outcomes[self.best]
    }

    pub fn into_best(mut self) -> RestartOutcome<T> {
        self.outcomes.swap_remove(self.best)
    }

    pub fn converged_fraction(&self) -> f64 {
        let c = self.outcomes.iter().filter(|o| o.converged).count();
        c as f64 / self.outcomes.len() as f64
    }

    pub fn values(&self) -> Vec<f64> {
        self.outcomes.iter().map(|o| o.value).collect()
    }
}

/// Runs `restarts` independent restarts (possibly in parallel) and folds them
/// by restart index: a later restart replaces the incumbent only if strictly better.
pub fn multistart<T, F>(restarts: usize, run: F) -> MultiStart<T>
where
    T: Send,
    F: Fn(usize) -> RestartOutcome<T> + Sync + Send,
{
    assert!(restarts >= 1, "at least one restart is required");
    let outcomes: Vec<RestartOutcome<T>> = (0..restarts).into_par_iter().map(&run).collect();
    let mut best = 0;
    for (k, o) in outcomes.iter().enumerate().skip(1) {
        if o.value < outcomes[best].value {
            best = k;
        }
    }
    MultiStart { outcomes, best }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64]) -> f64 {
        (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)
    }

    #[test]
    fn bfgs_solves_rosenbrock() {
        let opts = BfgsOptions {
            max_iter: 2000,
            ftol: 1e-16,
            ..BfgsOptions::default()
        };
        let m = bfgs(&rosenbrock, vec![-1.2, 1.0], &opts);
        assert!(m.value < 1e-10, "{m:?}");
        assert!((m.x[0] - 1.0).abs() < 1e-4 && (m.x[1] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn bfgs_on_quadratic_is_exact() {
        let f = |x: &[f64]| x.iter().enumerate().map(|(i, v)| (i as f64 + 1.0) * (v - 0.5).powi(2)).sum::<f64>();
        let m = bfgs(&f, vec![0.0; 5], &BfgsOptions::default());
        assert!(m.value < 1e-12 && m.converged);
    }

    #[test]
    fn multistart_prefers_lowest_index_on_ties() {
        let ms = multistart(6, |k| RestartOutcome {
            value: if k % 2 == 1 { 1.0 } else { 2.0 },
            converged: k != 0,
            payload: k,
        });
        assert_eq!(ms.best().payload, 1);
        assert!((ms.converged_fraction() - 5.0 / 6.0).abs() < 1e-15);
        assert_eq!(ms.values(), vec![2.0, 1.0, 2.0, 1.0, 2.0, 1.0]);
    }

    #[test]
    fn restart_counts() {
        let o = OptimOptions::default();
        assert_eq!(o.restart_count(16), 16);
        assert_eq!(o.fast(true).restart_count(16), 8);
        assert_eq!(o.restarts(3).fast(true).restart_count(16), 3);
    }
}
