//! The iteration itself: recurrence, quantization condition, root finding,
//! convergence diagnosis and eigenfunction generation.
//!
//! A problem is `y'' = λ₀(x) y' + s₀(x) y` with `λ₀`, `s₀` depending on an
//! energy parameter. The recurrence
//!
//! ```text
//! λₙ = λₙ₋₁' + sₙ₋₁ + λ₀ λₙ₋₁
//! sₙ = sₙ₋₁' + s₀ λₙ₋₁
//! ```
//!
//! runs exactly in the carrier ring, and the quantization condition
//! `δₙ = λₙ₊₁ sₙ − λₙ sₙ₊₁` is evaluated at a single point `x0`.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::AimError;
use crate::real::{BigReal, Precision};
use crate::series::{Differential, GammaSeries, LaurentPoly, Ring, TaylorJet};

/// Energy argument: a truncated γ-series of scalars. Plain problems use
/// order 0, so this is a single number.
pub type Energy = GammaSeries<BigReal>;

/// `λ₀` or `s₀` as a function of the energy.
pub type CoefficientFn<C> = Arc<dyn Fn(&Energy) -> GammaSeries<C> + Send + Sync>;

/// An eigenproblem in normal form, ready for iteration.
#[derive(Clone)]
pub struct AimProblem<C = LaurentPoly> {
    lambda0: CoefficientFn<C>,
    s0: CoefficientFn<C>,
    x0: BigReal,
    gamma_order: usize,
    label: String,
    precision: Precision,
}

impl<C> fmt::Debug for AimProblem<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AimProblem")
            .field("label", &self.label)
            .field("x0", &self.x0.to_sci_string(12))
            .field("gamma_order", &self.gamma_order)
            .field("digits", &self.precision.decimal_digits())
            .finish()
    }
}

impl<C: Differential + 'static> AimProblem<C> {
    /// Builds a problem and checks it by trial evaluation at `E = 1`.
    ///
    /// `λ₀(x0)` must be nonzero, unless `x0` is a zero of `λ₀` at which the
    /// quantization condition still evaluates to a finite number.
    pub fn new(
        label: impl Into<String>,
        precision: Precision,
        gamma_order: usize,
        x0: BigReal,
        lambda0: CoefficientFn<C>,
        s0: CoefficientFn<C>,
    ) -> Result<Self, AimError> {
        let problem = AimProblem {
            lambda0,
            s0,
            x0: x0.with_precision(precision),
            gamma_order,
            label: label.into(),
            precision,
        };
        problem.validate()?;
        Ok(problem)
    }

    fn validate(&self) -> Result<(), AimError> {
        let trial = self.scalar_energy(&BigReal::one(self.precision));
        let (l0, s0) = self.coefficients(&trial);
        if l0.order() != self.gamma_order || s0.order() != self.gamma_order {
            return Err(AimError::InvalidProblem(format!(
                "coefficient functions return order {}/{}, expected {}",
                l0.order(),
                s0.order(),
                self.gamma_order
            )));
        }
        let l0_at = l0
            .eval_at(&self.x0)
            .map_err(|e| AimError::InvalidProblem(format!("lambda0 at x0: {e}")))?;
        s0.eval_at(&self.x0)
            .map_err(|e| AimError::InvalidProblem(format!("s0 at x0: {e}")))?;
        if l0_at.coeff(0).is_zero() {
            let d = delta_series(self, 1, &trial)
                .map_err(|e| AimError::InvalidProblem(format!("lambda0(x0) = 0 and {e}")))?;
            if !d.value.coeffs().iter().all(BigReal::is_finite) {
                return Err(AimError::InvalidProblem(
                    "lambda0(x0) = 0 and delta is not finite".into(),
                ));
            }
        }
        Ok(())
    }

    /// The same problem evaluated at another point.
    pub fn with_x0(&self, x0: BigReal) -> Result<Self, AimError> {
        let mut p = self.clone();
        p.x0 = x0.with_precision(self.precision);
        p.validate()?;
        Ok(p)
    }

    /// The problem with its γ-series cut at `order` (`order <= gamma_order`).
    ///
    /// Coefficients of order `j` only depend on energy coefficients of order
    /// `<= j`, so truncation commutes with the recurrence.
    pub fn truncated(&self, order: usize) -> Self {
        let full = self.gamma_order;
        let l0 = Arc::clone(&self.lambda0);
        let s0 = Arc::clone(&self.s0);
        AimProblem {
            lambda0: Arc::new(move |e: &Energy| l0(&e.with_order(full)).with_order(order)),
            s0: Arc::new(move |e: &Energy| s0(&e.with_order(full)).with_order(order)),
            x0: self.x0.clone(),
            gamma_order: order.min(full),
            label: self.label.clone(),
            precision: self.precision,
        }
    }
}

impl AimProblem<LaurentPoly> {
    /// The same problem with coefficients expanded as Taylor jets at `x0`,
    /// long enough for the quantization condition up to `max_depth`.
    ///
    /// Point values at `x0` are unchanged, but each iteration step costs
    /// `O(depth²)` instead of growing with the polynomial degrees.
    pub fn to_jets(&self, max_depth: usize) -> Result<AimProblem<TaylorJet>, AimError> {
        let len = max_depth + 2;
        let x0 = self.x0.clone();
        let (l0, s0) = self.coefficients(&self.scalar_energy(&BigReal::one(self.precision)));
        for p in l0.coeffs().iter().chain(s0.coeffs()) {
            TaylorJet::from_laurent(p, &x0, 1)?;
        }
        let expand = move |f: CoefficientFn<LaurentPoly>, x0: BigReal| -> CoefficientFn<TaylorJet> {
            Arc::new(move |e: &Energy| {
                f(e).map(|p| TaylorJet::from_laurent(p, &x0, len).unwrap_or_else(|_| nan_jet(&x0, len)))
            })
        };
        AimProblem::new(
            self.label.clone(),
            self.precision,
            self.gamma_order,
            self.x0.clone(),
            expand(Arc::clone(&self.lambda0), x0.clone()),
            expand(Arc::clone(&self.s0), x0),
        )
    }
}

fn nan_jet(x0: &BigReal, len: usize) -> TaylorJet {
    TaylorJet::constant(x0, BigReal::from_f64(x0.precision(), f64::NAN), len)
}

impl<C: Differential> AimProblem<C> {
    pub fn x0(&self) -> &BigReal {
        &self.x0
    }

    pub fn gamma_order(&self) -> usize {
        self.gamma_order
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    /// `e + 0·γ + …` at this problem's order and precision.
    pub fn scalar_energy(&self, e: &BigReal) -> Energy {
        GammaSeries::constant(e.with_precision(self.precision), self.gamma_order)
    }

    /// `(λ₀, s₀)` at the given energy.
    pub fn coefficients(&self, energy: &Energy) -> (GammaSeries<C>, GammaSeries<C>) {
        let e = energy.with_order(self.gamma_order);
        ((self.lambda0)(&e), (self.s0)(&e))
    }
}

/// One step of the recurrence.
#[derive(Clone, Debug, PartialEq)]
pub struct AimState<C = LaurentPoly> {
    pub n: usize,
    pub lambda: GammaSeries<C>,
    pub s: GammaSeries<C>,
}

fn step<C: Ring + Differential>(
    l0: &GammaSeries<C>,
    s0: &GammaSeries<C>,
    l: &GammaSeries<C>,
    s: &GammaSeries<C>,
) -> (GammaSeries<C>, GammaSeries<C>) {
    let l_next = Ring::add(&Ring::add(&l.derivative(), s), &Ring::mul(l0, l));
    let s_next = Ring::add(&s.derivative(), &Ring::mul(s0, l));
    (l_next, s_next)
}

/// States `0..=n_max` at the given energy.
pub fn aim_iterate<C: Differential>(problem: &AimProblem<C>, energy: &Energy, n_max: usize) -> Vec<AimState<C>> {
    let (l0, s0) = problem.coefficients(energy);
    let mut states = Vec::with_capacity(n_max + 1);
    states.push(AimState {
        n: 0,
        lambda: l0.clone(),
        s: s0.clone(),
    });
    for n in 1..=n_max {
        let prev = &states[n - 1];
        let (lambda, s) = step(&l0, &s0, &prev.lambda, &prev.s);
        states.push(AimState { n, lambda, s });
    }
    states
}

/// The pair `(λₙ, sₙ)` and its successor, without keeping the history.
fn states_at<C: Differential>(
    problem: &AimProblem<C>,
    energy: &Energy,
    n: usize,
) -> [(GammaSeries<C>, GammaSeries<C>); 2] {
    let (l0, s0) = problem.coefficients(energy);
    let (mut l, mut s) = (l0.clone(), s0.clone());
    for _ in 0..n {
        (l, s) = step(&l0, &s0, &l, &s);
    }
    let next = step(&l0, &s0, &l, &s);
    [(l, s), next]
}

/// Quantization condition at `x0`, divided by a positive scale.
#[derive(Clone, Debug, PartialEq)]
pub struct Delta {
    /// `δ / scale`, one coefficient per power of γ.
    pub value: GammaSeries<BigReal>,
    /// `max(|λₙ₊₁ sₙ|, |λₙ sₙ₊₁|)` at `x0`, order-0 parts only; 1 if both vanish.
    pub scale: BigReal,
}

impl Delta {
    /// Order-0 coefficient.
    pub fn scalar(&self) -> &BigReal {
        self.value.coeff(0)
    }
}

/// `δₙ(E)` for a scalar energy.
pub fn delta<C: Differential>(problem: &AimProblem<C>, n: usize, e: &BigReal) -> Result<Delta, AimError> {
    delta_series(problem, n, &problem.scalar_energy(e))
}

/// `δₙ` for a γ-series energy.
///
/// Evaluation at `x0` is a ring homomorphism, so the four factors are
/// evaluated first and the products are taken between scalar series.
/// The scale depends only on order-0 data, which keeps every higher
/// coefficient affine in the energy coefficient of the same order.
pub fn delta_series<C: Differential>(problem: &AimProblem<C>, n: usize, energy: &Energy) -> Result<Delta, AimError> {
    let [(l_n, s_n), (l_next, s_next)] = states_at(problem, energy, n);
    let x0 = problem.x0();
    let l_n = l_n.eval_at(x0)?;
    let s_n = s_n.eval_at(x0)?;
    let l_next = l_next.eval_at(x0)?;
    let s_next = s_next.eval_at(x0)?;
    let a = Ring::mul(&l_next, &s_n);
    let b = Ring::mul(&l_n, &s_next);
    let scale = a.coeff(0).abs().max(b.coeff(0).abs());
    let scale = if scale.is_zero() {
        BigReal::one(problem.precision())
    } else {
        scale
    };
    let raw = Ring::sub(&a, &b);
    let value = raw.map(|c| c / &scale);
    Ok(Delta { value, scale })
}

/// Residual of the termination ratio: `|sₙ/λₙ − sₙ₋₁/λₙ₋₁|` at `x0`,
/// relative to `|sₙ/λₙ|` (order 0, `n >= 1`).
pub fn ratio_residual<C: Differential>(problem: &AimProblem<C>, n: usize, e: &BigReal) -> Result<BigReal, AimError> {
    let energy = problem.scalar_energy(e);
    let [(l_prev, s_prev), (l_n, s_n)] = states_at(problem, &energy, n.max(1) - 1);
    let x0 = problem.x0();
    let at = |g: GammaSeries<C>| g.eval_at(x0).map(|v| v.coeff(0).clone());
    let (l_prev, s_prev, l_n, s_n) = (at(l_prev)?, at(s_prev)?, at(l_n)?, at(s_n)?);
    if l_n.is_zero() || l_prev.is_zero() {
        return Err(AimError::InvalidProblem("lambda vanishes at x0".into()));
    }
    let alpha = &s_n / &l_n;
    let alpha_prev = &s_prev / &l_prev;
    Ok(alpha.relative_diff(&alpha_prev))
}

/// Default step tolerance of the root polish: `10^(-p/2)`, relative.
pub fn default_root_tolerance(precision: Precision) -> BigReal {
    precision.ten_pow_neg(precision.decimal_digits() as i32 / 2)
}

type ScalarFn<'a> = dyn Fn(&BigReal) -> Result<BigReal, AimError> + Sync + 'a;

fn bisect_then_polish(
    f: &ScalarFn<'_>,
    mut a: BigReal,
    mut fa: BigReal,
    mut b: BigReal,
    mut fb: BigReal,
    precision: Precision,
) -> Result<BigReal, AimError> {
    let coarse = BigReal::from_ratio(precision, 1, 1000);
    while (&b - &a).abs() > coarse {
        let m = (&a + &b).div_int(2);
        let fm = f(&m)?;
        if fm.is_zero() {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            (a, fa) = (m, fm);
        } else {
            (b, fb) = (m, fm);
        }
    }
    // Illinois-modified regula falsi: keeps the bracket, converges superlinearly.
    let tol = default_root_tolerance(precision);
    let mut side = 0i8;
    let mut prev: Option<BigReal> = None;
    for _ in 0..400 {
        if fa.is_zero() {
            return Ok(a);
        }
        if fb.is_zero() {
            return Ok(b);
        }
        let c = &(&(&a * &fb) - &(&b * &fa)) / &(&fb - &fa);
        let fc = f(&c)?;
        let done = fc.is_zero()
            || prev
                .as_ref()
                .is_some_and(|p| (&c - p).abs() <= &tol * &c.abs().max(BigReal::one(precision)))
            || (&b - &a).abs() <= &tol * &c.abs().max(BigReal::one(precision));
        if done {
            return Ok(c);
        }
        if fc.signum() == fb.signum() {
            (b, fb) = (c.clone(), fc);
            if side == -1 {
                fa = fa.div_int(2);
            }
            side = -1;
        } else {
            (a, fa) = (c.clone(), fc);
            if side == 1 {
                fb = fb.div_int(2);
            }
            side = 1;
        }
        prev = Some(c);
    }
    Ok(prev.expect("at least one polish step"))
}

fn secant_inside(
    f: &ScalarFn<'_>,
    lo: &BigReal,
    hi: &BigReal,
    flo: &BigReal,
    fhi: &BigReal,
    precision: Precision,
) -> Option<BigReal> {
    let tol = default_root_tolerance(precision);
    let (mut x0, mut f0) = (lo.clone(), flo.clone());
    let (mut x1, mut f1) = (hi.clone(), fhi.clone());
    for _ in 0..80 {
        let denom = &f1 - &f0;
        if denom.is_zero() {
            return None;
        }
        let x2 = &x1 - &(&(&f1 * &(&x1 - &x0)) / &denom);
        if x2 < *lo || x2 > *hi || !x2.is_finite() {
            return None;
        }
        if (&x2 - &x1).abs() <= &tol * &x2.abs().max(BigReal::one(precision)) {
            return Some(x2);
        }
        let f2 = f(&x2).ok()?;
        (x0, f0, x1, f1) = (x1, f1, x2, f2);
    }
    None
}

/// Root of a scalar function on `[lo, hi]`: bisection down to width 10⁻³,
/// then bracketed polish. Without a sign change a plain secant run seeded
/// at the ends is tried and accepted only if it stays inside.
pub fn solve_scalar(f: &ScalarFn<'_>, lo: &BigReal, hi: &BigReal, precision: Precision) -> Result<BigReal, AimError> {
    let flo = f(lo)?;
    let fhi = f(hi)?;
    if flo.is_zero() {
        return Ok(lo.clone());
    }
    if fhi.is_zero() {
        return Ok(hi.clone());
    }
    if flo.signum() != fhi.signum() {
        return bisect_then_polish(f, lo.clone(), flo, hi.clone(), fhi, precision);
    }
    secant_inside(f, lo, hi, &flo, &fhi, precision).ok_or_else(|| AimError::RootNotFound {
        lo: lo.to_sci_string(12),
        hi: hi.to_sci_string(12),
        delta_lo: flo.to_sci_string(6),
        delta_hi: fhi.to_sci_string(6),
    })
}

/// Eigenvalue of the depth-`n` condition inside `[lo, hi]`.
pub fn find_eigenvalue<C: Differential>(
    problem: &AimProblem<C>,
    n: usize,
    lo: &BigReal,
    hi: &BigReal,
) -> Result<BigReal, AimError> {
    let f = |e: &BigReal| delta(problem, n, e).map(|d| d.scalar().clone());
    solve_scalar(&f, lo, hi, problem.precision())
}

/// Root search window and which root to take.
#[derive(Clone, Debug, PartialEq)]
pub struct RootSelector {
    pub lo: BigReal,
    pub hi: BigReal,
    /// Number of scan intervals.
    pub grid: usize,
    /// Index among the roots found, ascending.
    pub rank: usize,
    /// Keep roots with `E <= 0` (mirror branch).
    pub allow_negative: bool,
}

impl RootSelector {
    pub fn new(lo: BigReal, hi: BigReal, rank: usize) -> Self {
        RootSelector {
            lo,
            hi,
            grid: 120,
            rank,
            allow_negative: false,
        }
    }

    pub fn with_grid(mut self, grid: usize) -> Self {
        self.grid = grid.max(1);
        self
    }

    pub fn with_negative(mut self, allow: bool) -> Self {
        self.allow_negative = allow;
        self
    }
}

/// All sign changes of a scalar function on a uniform grid, refined.
pub fn scan_scalar(
    f: &ScalarFn<'_>,
    lo: &BigReal,
    hi: &BigReal,
    grid: usize,
    precision: Precision,
) -> Result<Vec<BigReal>, AimError> {
    let width = hi - lo;
    let points: Vec<BigReal> = (0..=grid)
        .map(|i| lo + &width.mul_int(i as i64).div_int(grid as i64))
        .collect();
    let values: Vec<BigReal> = points.par_iter().map(f).collect::<Result<_, _>>()?;
    let brackets: Vec<usize> = (0..grid)
        .filter(|&i| !values[i].is_zero() && values[i].signum() != values[i + 1].signum())
        .collect();
    let mut roots: Vec<BigReal> = brackets
        .par_iter()
        .map(|&i| {
            if values[i + 1].is_zero() {
                return Ok(points[i + 1].clone());
            }
            bisect_then_polish(
                f,
                points[i].clone(),
                values[i].clone(),
                points[i + 1].clone(),
                values[i + 1].clone(),
                precision,
            )
        })
        .collect::<Result<_, _>>()?;
    if values[0].is_zero() {
        roots.insert(0, points[0].clone());
    }
    Ok(roots)
}

/// All roots of `δₙ` found by scanning `[lo, hi]` with `grid` intervals.
pub fn scan_roots<C: Differential>(
    problem: &AimProblem<C>,
    n: usize,
    lo: &BigReal,
    hi: &BigReal,
    grid: usize,
) -> Result<Vec<BigReal>, AimError> {
    let f = |e: &BigReal| delta(problem, n, e).map(|d| d.scalar().clone());
    scan_scalar(&f, lo, hi, grid, problem.precision())
}

/// The `rank`-th root of `δₙ` in the selector's window.
pub fn select_root<C: Differential>(
    problem: &AimProblem<C>,
    n: usize,
    sel: &RootSelector,
) -> Result<BigReal, AimError> {
    let roots: Vec<BigReal> = scan_roots(problem, n, &sel.lo, &sel.hi, sel.grid)?
        .into_iter()
        .filter(|r| sel.allow_negative || r.signum() > 0)
        .collect();
    let found = roots.len();
    roots
        .into_iter()
        .nth(sel.rank)
        .ok_or(AimError::RankNotFound { rank: sel.rank, found })
}

/// Outcome of a depth scan.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceStatus {
    Converged,
    Oscillating,
    MaxIterations,
}

impl fmt::Display for TraceStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TraceStatus::Converged => "converged",
            TraceStatus::Oscillating => "oscillating",
            TraceStatus::MaxIterations => "max-iterations",
        })
    }
}

/// Root at one iteration depth.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceEntry {
    pub k: usize,
    pub root: Option<BigReal>,
    /// Unscaled `|δ|` at the root. The scaled value is uninformative when
    /// one of `λₙ₊₁sₙ`, `λₙsₙ₊₁` vanishes at `x0`.
    pub residual: Option<BigReal>,
    /// Why the root is missing.
    pub error: Option<String>,
}

/// Root versus depth, with its classification.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantizationTrace {
    pub entries: Vec<TraceEntry>,
    pub status: TraceStatus,
    /// Depth completing the first window of three agreeing roots.
    pub converged_at: Option<usize>,
    /// First depth of the first oscillating window.
    pub oscillation_onset: Option<usize>,
}

/// Depth schedule and agreement tolerance for [`converge_spectrum`].
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceOptions {
    pub k_min: usize,
    pub k_max: usize,
    pub k_step: usize,
    /// Absolute agreement tolerance; `f64::INFINITY` accepts anything.
    pub tol: f64,
}

impl ConvergenceOptions {
    pub fn new(k_min: usize, k_max: usize, tol: f64) -> Self {
        ConvergenceOptions {
            k_min,
            k_max,
            k_step: 1,
            tol,
        }
    }

    pub fn with_step(mut self, k_step: usize) -> Self {
        self.k_step = k_step.max(1);
        self
    }

    pub fn depths(&self) -> Vec<usize> {
        (self.k_min..=self.k_max).step_by(self.k_step.max(1)).collect()
    }
}

/// Agreement window length.
pub const CONVERGENCE_WINDOW: usize = 3;
/// Number of consecutive differences inspected for oscillation.
pub const OSCILLATION_WINDOW: usize = 6;

/// Runs the root selection at each depth of the schedule and classifies
/// the sequence. Lost roots are recorded and break any window.
pub fn converge_spectrum<C: Differential>(
    problem: &AimProblem<C>,
    sel: &RootSelector,
    opts: &ConvergenceOptions,
) -> QuantizationTrace {
    trace_depths(problem, sel, &opts.depths(), opts.tol)
}

/// [`converge_spectrum`] over an explicit ascending list of depths.
pub fn trace_depths<C: Differential>(
    problem: &AimProblem<C>,
    sel: &RootSelector,
    depths: &[usize],
    tol: f64,
) -> QuantizationTrace {
    let entries: Vec<TraceEntry> = depths
        .par_iter()
        .map(|&k| match select_root(problem, k, sel) {
            Ok(root) => {
                let residual = delta(problem, k, &root).ok().map(|d| (d.scalar() * &d.scale).abs());
                TraceEntry {
                    k,
                    root: Some(root),
                    residual,
                    error: None,
                }
            }
            Err(e) => TraceEntry {
                k,
                root: None,
                residual: None,
                error: Some(e.to_string()),
            },
        })
        .collect();
    let series: Vec<(usize, Option<f64>)> = entries
        .iter()
        .map(|e| (e.k, e.root.as_ref().map(BigReal::to_f64)))
        .collect();
    let (status, converged_at, oscillation_onset) = classify_trace(&series, tol);
    QuantizationTrace {
        entries,
        status,
        converged_at,
        oscillation_onset,
    }
}

/// Classifies a root-versus-depth sequence.
///
/// Converged: three consecutive roots within `tol` of their neighbours.
/// Oscillating: six consecutive differences that alternate in sign and whose
/// magnitudes do not shrink (each at least the first one of the window).
pub fn classify_trace(roots: &[(usize, Option<f64>)], tol: f64) -> (TraceStatus, Option<usize>, Option<usize>) {
    let runs = contiguous_runs(roots);
    for run in &runs {
        for w in run.windows(CONVERGENCE_WINDOW) {
            if w.windows(2).all(|p| (p[1].1 - p[0].1).abs() <= tol) {
                return (TraceStatus::Converged, Some(w[CONVERGENCE_WINDOW - 1].0), None);
            }
        }
    }
    for run in &runs {
        let diffs: Vec<(usize, f64)> = run.windows(2).map(|p| (p[0].0, p[1].1 - p[0].1)).collect();
        for w in diffs.windows(OSCILLATION_WINDOW) {
            let alternates = w.windows(2).all(|p| p[0].1 * p[1].1 < 0.0);
            let first = w[0].1.abs();
            let sustained = w.iter().all(|d| d.1.abs() >= first);
            if alternates && sustained {
                return (TraceStatus::Oscillating, None, Some(w[0].0));
            }
        }
    }
    (TraceStatus::MaxIterations, None, None)
}

fn contiguous_runs(roots: &[(usize, Option<f64>)]) -> Vec<Vec<(usize, f64)>> {
    let mut runs = Vec::new();
    let mut current = Vec::new();
    for (k, r) in roots {
        match r {
            Some(v) if v.is_finite() => current.push((*k, *v)),
            _ => {
                if !current.is_empty() {
                    runs.push(std::mem::take(&mut current));
                }
            }
        }
    }
    if !current.is_empty() {
        runs.push(current);
    }
    runs
}

/// Polynomial factor `f(x)` of the eigenfunction at an eigenvalue.
///
/// Solves `f'' − λ₀ f' − s₀ f = 0` for a polynomial of the lowest degree
/// `<= max_degree` that admits one (order-0 coefficients). The result is
/// normalized to `f(0) = 1`, or to leading coefficient 1 when `f(0) = 0`.
pub fn wavefunction_coefficients(
    problem: &AimProblem<LaurentPoly>,
    n: usize,
    e: &BigReal,
    max_degree: usize,
) -> Result<LaurentPoly, AimError> {
    let prec = problem.precision();
    let eps = prec.ten_pow_neg(prec.decimal_digits() as i32 / 4);
    let d = delta(problem, n, e)?;
    if d.scalar().abs() > eps {
        return Err(AimError::NotAnEigenvalue {
            depth: n,
            residual: d.scalar().to_sci_string(6),
        });
    }
    let (l0, s0) = problem.coefficients(&problem.scalar_energy(e));
    let (l0, s0) = (l0.coeff(0).clone(), s0.coeff(0).clone());
    let var = l0.var();
    for degree in 0..=max_degree {
        let columns: Vec<LaurentPoly> = (0..=degree as i32)
            .map(|i| {
                let xi = LaurentPoly::monomial(var, BigReal::one(prec), i);
                let d1 = xi.derivative();
                let d2 = d1.derivative();
                Ring::sub(&Ring::sub(&d2, &Ring::mul(&l0, &d1)), &Ring::mul(&s0, &xi))
            })
            .collect();
        if let Some(coeffs) = null_vector(&columns, &eps) {
            let mut f =
                LaurentPoly::from_terms(var, prec, coeffs.iter().enumerate().map(|(i, c)| (i as i32, c.clone())));
            let max = f.max_abs();
            f = LaurentPoly::from_terms(
                var,
                prec,
                f.terms()
                    .filter(|(_, c)| c.abs() > &eps * &max)
                    .map(|(i, c)| (i, c.clone())),
            );
            let norm = match f.coeff(0) {
                Some(c0) => c0.clone(),
                None => f
                    .terms()
                    .next_back()
                    .map(|(_, c)| c.clone())
                    .expect("nonzero null vector"),
            };
            return Ok(f.scale(&norm.recip()));
        }
    }
    Err(AimError::NoPolynomialSolution { max_degree })
}

/// A nonzero vector in the numerical null space of the matrix whose
/// columns are the coefficient maps of `columns`, if the rank is deficient.
fn null_vector(columns: &[LaurentPoly], eps: &BigReal) -> Option<Vec<BigReal>> {
    let prec = columns[0].precision();
    let mut rows: Vec<i32> = columns.iter().flat_map(|c| c.terms().map(|(e, _)| e)).collect();
    rows.sort_unstable();
    rows.dedup();
    let ncols = columns.len();
    let mut m: Vec<Vec<BigReal>> = rows
        .iter()
        .map(|&r| {
            columns
                .iter()
                .map(|c| c.coeff(r).cloned().unwrap_or_else(|| BigReal::zero(prec)))
                .collect()
        })
        .collect();
    let scale = m
        .iter()
        .flatten()
        .map(BigReal::abs)
        .reduce(BigReal::max)
        .unwrap_or_else(|| BigReal::zero(prec));
    if scale.is_zero() {
        let mut v = vec![BigReal::zero(prec); ncols];
        v[0] = BigReal::one(prec);
        return Some(v);
    }
    let threshold = eps * &scale;
    // Gaussian elimination with full pivoting.
    let mut col_perm: Vec<usize> = (0..ncols).collect();
    let mut rank = 0;
    while rank < ncols.min(m.len()) {
        let mut best: Option<(usize, usize, BigReal)> = None;
        for (i, row) in m.iter().enumerate().skip(rank) {
            for (j, v) in row.iter().enumerate().skip(rank) {
                let a = v.abs();
                if best.as_ref().is_none_or(|b| a > b.2) {
                    best = Some((i, j, a));
                }
            }
        }
        let (pi, pj, pv) = best?;
        if pv <= threshold {
            break;
        }
        m.swap(rank, pi);
        for row in m.iter_mut() {
            row.swap(rank, pj);
        }
        col_perm.swap(rank, pj);
        for i in rank + 1..m.len() {
            let factor = &m[i][rank] / &m[rank][rank];
            if factor.is_zero() {
                continue;
            }
            let (head, tail) = m.split_at_mut(i);
            for (x, p) in tail[0][rank..ncols].iter_mut().zip(&head[rank][rank..ncols]) {
                *x -= &(&factor * p);
            }
        }
        rank += 1;
    }
    if rank == ncols {
        return None;
    }
    // Free variable at permuted column `rank` set to 1, back-substitute.
    let mut y = vec![BigReal::zero(prec); ncols];
    y[rank] = BigReal::one(prec);
    for i in (0..rank).rev() {
        let mut acc = BigReal::zero(prec);
        for j in i + 1..ncols {
            acc += &(&m[i][j] * &y[j]);
        }
        y[i] = -(&acc / &m[i][i]);
    }
    let mut v = vec![BigReal::zero(prec); ncols];
    for (k, &orig) in col_perm.iter().enumerate() {
        v[orig] = y[k].clone();
    }
    Some(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::Var;

    fn p() -> Precision {
        Precision::default()
    }

    /// `λ₀ = 2(kr − (J+1)/r)`, `s₀ = 3k + 2kJ − E` with `k = 1`.
    fn oscillator(j: i64) -> AimProblem {
        let prec = p();
        AimProblem::new(
            "oscillator",
            prec,
            0,
            BigReal::one(prec),
            Arc::new(move |_: &Energy| {
                GammaSeries::new(vec![LaurentPoly::from_ints(
                    Var::R,
                    prec,
                    &[(1, 2), (-1, -2 * (j + 1))],
                )])
            }),
            Arc::new(move |e: &Energy| {
                let c = &BigReal::from_int(prec, 3 + 2 * j) - e.coeff(0);
                GammaSeries::new(vec![LaurentPoly::constant(Var::R, c)])
            }),
        )
        .unwrap()
    }

    #[test]
    fn ladder_first_step() {
        // λ₁ = 5 + 2/r² − E + 4(r − 1/r)², s₁ = 2(3 − E)(r − 1/r) at J = 0
        let prob = oscillator(0);
        let e = BigReal::from_int(p(), 4);
        let states = aim_iterate(&prob, &prob.scalar_energy(&e), 1);
        let l1 = states[1].lambda.coeff(0);
        let expected = LaurentPoly::from_ints(Var::R, p(), &[(2, 4), (0, 5 - 8 - 4), (-2, 6)]);
        assert_eq!(*l1, expected);
        let s1 = states[1].s.coeff(0);
        assert_eq!(*s1, LaurentPoly::from_ints(Var::R, p(), &[(1, -2), (-1, 2)]));
        assert_eq!(aim_iterate(&prob, &prob.scalar_energy(&e), 0).len(), 1);
    }

    #[test]
    fn exact_levels_zero_delta() {
        let prob = oscillator(0);
        let tiny = p().ten_pow_neg(100);
        for (n, e) in [(0, 3), (1, 7)] {
            let d = delta(&prob, n, &BigReal::from_int(p(), e)).unwrap();
            assert!(d.scalar().abs() < tiny, "n={n}");
        }
        // hand substitution at E = 4, n = 0: s0 = -1, λ0(1) = 0, λ0'(1) = 4 → δ = s0(λ0' + s0) = -3
        let d = delta(&prob, 0, &BigReal::from_int(p(), 4)).unwrap();
        let raw = d.scalar() * &d.scale;
        assert_eq!(raw, BigReal::from_int(p(), -3));
    }

    #[test]
    fn bracketed_root() {
        let prob = oscillator(0);
        let e = find_eigenvalue(&prob, 3, &BigReal::from_int(p(), 9), &BigReal::from_int(p(), 13)).unwrap();
        assert!((&e - &BigReal::from_int(p(), 11)).abs() < p().ten_pow_neg(50));
    }

    #[test]
    fn missing_root_reports_bracket() {
        let prob = oscillator(0);
        let err = find_eigenvalue(&prob, 0, &BigReal::from_int(p(), 20), &BigReal::from_int(p(), 21)).unwrap_err();
        assert!(matches!(err, AimError::RootNotFound { .. }));
    }

    #[test]
    fn vacuous_tolerance_converges_after_one_window() {
        let prob = oscillator(0);
        let sel = RootSelector::new(BigReal::from_ratio(p(), 1, 2), BigReal::from_int(p(), 20), 0);
        let trace = converge_spectrum(&prob, &sel, &ConvergenceOptions::new(2, 8, f64::INFINITY));
        assert_eq!(trace.status, TraceStatus::Converged);
        assert_eq!(trace.converged_at, Some(4));
    }

    #[test]
    fn classifier_windows() {
        let alt: Vec<(usize, Option<f64>)> = (0..10)
            .map(|k| {
                (
                    k,
                    Some(1.0 + if k % 2 == 0 { 0.1 } else { -0.1 } * (1.0 + k as f64 * 0.1)),
                )
            })
            .collect();
        assert_eq!(classify_trace(&alt, 1e-6).0, TraceStatus::Oscillating);
        let flat: Vec<(usize, Option<f64>)> = (0..5).map(|k| (k, Some(2.0))).collect();
        assert_eq!(classify_trace(&flat, 1e-6), (TraceStatus::Converged, Some(2), None));
        let gap = vec![(0, Some(2.0)), (1, None), (2, Some(2.0)), (3, Some(2.0))];
        assert_eq!(classify_trace(&gap, 1e-6).0, TraceStatus::MaxIterations);
    }

    #[test]
    fn first_excited_polynomial() {
        // f₁ = 1 − (2/3) r² at k = 1, J = 0
        let prob = oscillator(0);
        let f = wavefunction_coefficients(&prob, 2, &BigReal::from_int(p(), 7), 8).unwrap();
        let expected = LaurentPoly::from_terms(
            Var::R,
            p(),
            [(0, BigReal::one(p())), (2, BigReal::from_ratio(p(), -2, 3))],
        );
        assert!(Ring::sub(&f, &expected).max_abs() < p().ten_pow_neg(50));
        let f0 = wavefunction_coefficients(&prob, 1, &BigReal::from_int(p(), 3), 8).unwrap();
        assert_eq!(f0, LaurentPoly::constant(Var::R, BigReal::one(p())));
    }

    #[test]
    fn non_eigenvalue_is_rejected() {
        let prob = oscillator(0);
        let err = wavefunction_coefficients(&prob, 2, &BigReal::from_int(p(), 6), 8).unwrap_err();
        assert!(matches!(err, AimError::NotAnEigenvalue { .. }));
    }
}
