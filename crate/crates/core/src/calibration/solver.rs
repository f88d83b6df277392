use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Positive search interval, explored in log space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

impl Bracket {
    pub const LAMBDA: Bracket = Bracket { lo: 1e2, hi: 1e7 };
    pub const STIFFNESS: Bracket = Bracket { lo: 10.0, hi: 1e7 };
    pub const FRICTION: Bracket = Bracket { lo: 0.01, hi: 5.0 };

    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        let b = Self { lo, hi };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo > 0.0 && self.hi > self.lo && self.hi.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "bracket",
                reason: "needs 0 < lo < hi < inf",
            });
        }
        Ok(())
    }

    /// Geometric midpoint.
    pub fn midpoint(&self) -> f64 {
        libm::sqrt(self.lo * self.hi)
    }

    /// `n >= 2` log-spaced points including both ends.
    pub fn log_points(&self, n: usize) -> Vec<f64> {
        let (a, b) = (libm::log(self.lo), libm::log(self.hi));
        (0..n)
            .map(|i| match i {
                0 => self.lo,
                _ if i == n - 1 => self.hi,
                _ => libm::exp(a + (b - a) * i as f64 / (n - 1) as f64),
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Coarse log-spaced scan used to pick the golden-section interval.
    pub scan_points: usize,
    /// Stop when the log-space interval is narrower than this.
    pub log_tolerance: f64,
    pub max_iterations: usize,
    /// The objective counts as flat when its scanned spread is below this
    /// fraction of its largest value.
    pub flat_tolerance: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            scan_points: 24,
            log_tolerance: 1e-7,
            max_iterations: 200,
            flat_tolerance: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Degeneracy {
    /// The objective does not vary over the bracket.
    Flat,
    AtLowerBound,
    AtUpperBound,
}

impl Degeneracy {
    pub fn describe(self) -> &'static str {
        match self {
            Degeneracy::Flat => "objective is flat over the bracket",
            Degeneracy::AtLowerBound => "optimum at the lower bracket bound",
            Degeneracy::AtUpperBound => "optimum at the upper bracket bound",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarSolution {
    pub x: f64,
    pub residual: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub degeneracy: Option<Degeneracy>,
    /// Best residual after the scan and after every golden-section step.
    pub history: Vec<f64>,
}

/// Bounded scalar minimization: a log-spaced scan followed by golden-section
/// search between the neighbours of the best scanned point.
///
/// The returned point is the best one evaluated, so its residual never
/// exceeds the residual at either bracket end.
pub fn minimize_scalar<F>(mut f: F, bracket: Bracket, opts: &SolverOptions, stage: &'static str) -> Result<ScalarSolution>
where
    F: FnMut(f64) -> Result<f64>,
{
    bracket.validate()?;
    let n = opts.scan_points.max(3);
    let mut evaluations = 0usize;
    let mut eval = |x: f64| -> Result<f64> {
        evaluations += 1;
        let r = f(x)?;
        if r.is_finite() {
            Ok(r)
        } else {
            Err(Error::NonFinite(stage))
        }
    };

    let xs = bracket.log_points(n);
    let mut ys = Vec::with_capacity(n);
    for &x in &xs {
        ys.push(eval(x)?);
    }
    let (mut best_i, mut hi_val) = (0usize, f64::NEG_INFINITY);
    for (i, &y) in ys.iter().enumerate() {
        if y < ys[best_i] {
            best_i = i;
        }
        hi_val = hi_val.max(y);
    }
    let lo_val = ys[best_i];
    if hi_val - lo_val <= opts.flat_tolerance * libm::fabs(hi_val) {
        let x = bracket.midpoint();
        let residual = eval(x)?;
        return Ok(ScalarSolution {
            x,
            residual,
            iterations: 0,
            evaluations,
            degeneracy: Some(Degeneracy::Flat),
            history: alloc::vec![residual],
        });
    }

    let (mut best_x, mut best_y) = (xs[best_i], lo_val);
    let mut history = alloc::vec![best_y];
    let mut a = libm::log(xs[best_i.saturating_sub(1)]);
    let mut b = libm::log(xs[(best_i + 1).min(n - 1)]);
    let inv_phi = (libm::sqrt(5.0) - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = eval(libm::exp(c))?;
    let mut fd = eval(libm::exp(d))?;
    let mut iterations = 0;
    while b - a > opts.log_tolerance && iterations < opts.max_iterations {
        iterations += 1;
        if fc <= fd {
            if fc < best_y {
                best_y = fc;
                best_x = libm::exp(c);
            }
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = eval(libm::exp(c))?;
        } else {
            if fd < best_y {
                best_y = fd;
                best_x = libm::exp(d);
            }
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = eval(libm::exp(d))?;
        }
        history.push(best_y);
    }
    for (x, y) in [(c, fc), (d, fd)] {
        if y < best_y {
            best_y = y;
            best_x = libm::exp(x);
        }
    }
    history.push(best_y);

    let u = libm::log(best_x);
    let edge = 2.0 * opts.log_tolerance.max(1e-12);
    let degeneracy = if u - libm::log(bracket.lo) <= edge {
        Some(Degeneracy::AtLowerBound)
    } else if libm::log(bracket.hi) - u <= edge {
        Some(Degeneracy::AtUpperBound)
    } else {
        None
    };
    Ok(ScalarSolution {
        x: best_x,
        residual: best_y,
        iterations,
        evaluations,
        degeneracy,
        history,
    })
}
