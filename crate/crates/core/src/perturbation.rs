//! Order-by-order solution of the γ-expanded quantization condition.

use rayon::prelude::*;

use crate::aim::{delta_series, select_root, AimProblem, Energy, RootSelector};
use crate::error::PerturbationError;
use crate::models::{anharmonic_problem, AnharmonicMode, AnharmonicParams};
use crate::real::{BigReal, Precision};
use crate::series::{Differential, GammaSeries, TaylorJet};

/// Energy as a truncated γ-series `E⁰ + γE¹ + … + γᴾEᴾ` for one state.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyExpansion {
    pub state: usize,
    pub coefficients: Vec<BigReal>,
}

impl EnergyExpansion {
    /// All coefficients zero, order `order`.
    pub fn zeros(prec: Precision, order: usize, state: usize) -> Self {
        EnergyExpansion {
            state,
            coefficients: vec![BigReal::zero(prec); order + 1],
        }
    }

    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// Value at `γ = 1`.
    pub fn total(&self) -> BigReal {
        let prec = self.coefficients[0].precision();
        self.coefficients.iter().fold(BigReal::zero(prec), |acc, c| &acc + c)
    }

    pub fn as_series(&self) -> Energy {
        GammaSeries::new(self.coefficients.clone())
    }
}

/// γ-series of `δ_k` at `x0` with `E` replaced by the expansion.
pub fn delta_gamma<C: Differential>(
    problem: &AimProblem<C>,
    k: usize,
    expansion: &EnergyExpansion,
) -> Result<GammaSeries<BigReal>, PerturbationError> {
    if expansion.order() != problem.gamma_order() {
        return Err(PerturbationError::OrderMismatch {
            expansion: expansion.order(),
            problem: problem.gamma_order(),
        });
    }
    Ok(delta_series(problem, k, &expansion.as_series())?.value)
}

/// Solves `δ_k` at order `j` for `E_j`, with `E_0 … E_{j−1}` taken from
/// `expansion` (entries above `j` are ignored).
///
/// Order 0 is a rank-selected root in `sel`. For `j >= 1` the order-`j`
/// coefficient is affine in `E_j`, so two probes at `0` and
/// `−0.1·|E_{j−1}|` determine it exactly.
pub fn solve_order<C: Differential + 'static>(
    problem: &AimProblem<C>,
    k: usize,
    expansion: &EnergyExpansion,
    j: usize,
    sel: &RootSelector,
) -> Result<BigReal, PerturbationError> {
    let prec = problem.precision();
    if j > problem.gamma_order() || expansion.order() < j {
        return Err(PerturbationError::OrderMismatch {
            expansion: expansion.order(),
            problem: problem.gamma_order(),
        });
    }
    let cut = problem.truncated(j);
    if j == 0 {
        return select_root(&cut, k, sel).map_err(|source| PerturbationError::OrderZero { depth: k, source });
    }
    let probe = |ej: &BigReal| -> Result<BigReal, PerturbationError> {
        let mut coeffs = expansion.coefficients[..j].to_vec();
        coeffs.push(ej.clone());
        Ok(delta_series(&cut, k, &GammaSeries::new(coeffs))?.value.coeff(j).clone())
    };
    let p0 = BigReal::zero(prec);
    let mut p1 = -(&expansion.coefficients[j - 1].abs().div_int(10));
    if p1.is_zero() {
        p1 = -BigReal::from_ratio(prec, 1, 10);
    }
    let f0 = probe(&p0)?;
    let f1 = probe(&p1)?;
    let slope = &(&f1 - &f0) / &(&p1 - &p0);
    if slope.abs() < BigReal::from_f64(prec, 1e-30) {
        return Err(PerturbationError::Degenerate {
            order: j,
            depth: k,
            slope: slope.to_sci_string(6),
        });
    }
    Ok(&p0 - &(&f0 / &slope))
}

/// Expansion at depth `k` with every order solved in turn in the same row.
pub fn solve_row<C: Differential + 'static>(
    problem: &AimProblem<C>,
    k: usize,
    sel: &RootSelector,
) -> Result<EnergyExpansion, PerturbationError> {
    let mut exp = EnergyExpansion::zeros(problem.precision(), problem.gamma_order(), sel.rank);
    for j in 0..=problem.gamma_order() {
        exp.coefficients[j] = solve_order(problem, k, &exp, j, sel)?;
    }
    Ok(exp)
}

/// Which lower orders a table cell is solved against.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TableScheme {
    /// `E⁽ʲ⁾(k)` uses `E⁽⁰⁾ … E⁽ʲ⁻¹⁾` from the last row of the schedule.
    #[default]
    ColumnFrozen,
    /// `E⁽ʲ⁾(k)` uses the lower orders of row `k`.
    SameRow,
}

/// One row of a perturbation table.
#[derive(Clone, Debug, PartialEq)]
pub struct PerturbationRow {
    pub k: usize,
    /// `E⁽⁰⁾ … E⁽ᴾ⁾`; `None` where the solve failed.
    pub cells: Vec<Option<BigReal>>,
    /// `Σ E⁽ʲ⁾`, when every cell is present.
    pub total: Option<BigReal>,
    pub errors: Vec<String>,
}

/// Settling of one column along the schedule.
#[derive(Clone, Debug, PartialEq)]
pub struct ColumnConvergence {
    pub order: usize,
    /// First `k` from which every later value is within `tol` of the last.
    pub settled_at: Option<usize>,
    /// `|E(k_last) − E(k_prev)|`.
    pub last_change: Option<f64>,
}

/// Table of corrections by depth with per-column convergence.
#[derive(Clone, Debug, PartialEq)]
pub struct PerturbationResult {
    pub state: usize,
    pub scheme: TableScheme,
    pub rows: Vec<PerturbationRow>,
    pub columns: Vec<ColumnConvergence>,
    /// Agreement tolerance used for [`ColumnConvergence::settled_at`].
    pub tol: f64,
}

impl PerturbationResult {
    pub fn row(&self, k: usize) -> Option<&PerturbationRow> {
        self.rows.iter().find(|r| r.k == k)
    }

    pub fn order(&self) -> usize {
        self.rows.first().map_or(0, |r| r.cells.len() - 1)
    }
}

/// Options for [`perturb_table`].
#[derive(Clone, Debug, PartialEq)]
pub struct TableOptions {
    pub schedule: Vec<usize>,
    pub scheme: TableScheme,
    /// Column agreement tolerance.
    pub tol: f64,
}

impl TableOptions {
    /// `k = 5, 10, …, 50`, column-frozen, `tol = 5·10⁻⁷`.
    pub fn standard() -> Self {
        TableOptions {
            schedule: (1..=10).map(|i| 5 * i).collect(),
            scheme: TableScheme::ColumnFrozen,
            tol: 5e-7,
        }
    }
}

/// Default order-0 window for the anharmonic states.
pub fn default_anharmonic_selector(prec: Precision, rank: usize) -> RootSelector {
    RootSelector::new(BigReal::from_ratio(prec, 1, 20), BigReal::from_int(prec, 8), rank)
}

/// Builds the table for an already expanded problem.
pub fn perturb_table<C: Differential + 'static>(
    problem: &AimProblem<C>,
    sel: &RootSelector,
    opts: &TableOptions,
) -> Result<PerturbationResult, PerturbationError> {
    let mut schedule = opts.schedule.clone();
    if schedule.is_empty() || schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(PerturbationError::Model(crate::error::ModelError::InvalidParams(
            "k schedule must be non-empty and strictly ascending".into(),
        )));
    }
    let order = problem.gamma_order();
    let k_last = *schedule.last().expect("non-empty");
    let rows: Vec<PerturbationRow> = match opts.scheme {
        TableScheme::SameRow => schedule.par_iter().map(|&k| same_row(problem, k, sel)).collect(),
        TableScheme::ColumnFrozen => {
            let last = same_row(problem, k_last, sel);
            schedule.pop();
            let frozen = EnergyExpansion {
                state: sel.rank,
                coefficients: last
                    .cells
                    .iter()
                    .map(|c| c.clone().unwrap_or_else(|| BigReal::zero(problem.precision())))
                    .collect(),
            };
            let solved: Vec<(usize, usize, Result<BigReal, String>)> = schedule
                .par_iter()
                .flat_map_iter(|&k| (0..=order).map(move |j| (k, j)))
                .map(|(k, j)| {
                    let res = if j > 0 && last.cells[..j].iter().any(Option::is_none) {
                        Err(format!("order {j}: lower orders missing at k = {k_last}"))
                    } else {
                        solve_order(problem, k, &frozen, j, sel).map_err(|e| format!("order {j}: {e}"))
                    };
                    (k, j, res)
                })
                .collect();
            let mut rows: Vec<PerturbationRow> = schedule
                .iter()
                .map(|&k| {
                    let mut cells = vec![None; order + 1];
                    let mut errors = Vec::new();
                    for (_, j, res) in cells_for(&solved, k) {
                        match res {
                            Ok(v) => cells[*j] = Some(v.clone()),
                            Err(e) => errors.push(e.clone()),
                        }
                    }
                    finish_row(k, cells, errors)
                })
                .collect();
            rows.push(last);
            rows
        }
    };
    let columns = (0..=order).map(|j| column_convergence(&rows, j, opts.tol)).collect();
    Ok(PerturbationResult {
        state: sel.rank,
        scheme: opts.scheme,
        rows,
        columns,
        tol: opts.tol,
    })
}

fn cells_for(
    cells: &[(usize, usize, Result<BigReal, String>)],
    k: usize,
) -> impl Iterator<Item = &(usize, usize, Result<BigReal, String>)> {
    cells.iter().filter(move |c| c.0 == k)
}

fn same_row<C: Differential + 'static>(problem: &AimProblem<C>, k: usize, sel: &RootSelector) -> PerturbationRow {
    let order = problem.gamma_order();
    let mut exp = EnergyExpansion::zeros(problem.precision(), order, sel.rank);
    let mut cells = vec![None; order + 1];
    let mut errors = Vec::new();
    for (j, cell) in cells.iter_mut().enumerate() {
        match solve_order(problem, k, &exp, j, sel) {
            Ok(v) => {
                exp.coefficients[j] = v.clone();
                *cell = Some(v);
            }
            Err(e) => {
                errors.push(format!("order {j}: {e}"));
                break;
            }
        }
    }
    finish_row(k, cells, errors)
}

fn finish_row(k: usize, cells: Vec<Option<BigReal>>, errors: Vec<String>) -> PerturbationRow {
    let total = cells
        .iter()
        .try_fold(None::<BigReal>, |acc, c| {
            let c = c.as_ref()?;
            Some(Some(match acc {
                Some(a) => &a + c,
                None => c.clone(),
            }))
        })
        .flatten();
    PerturbationRow {
        k,
        cells,
        total,
        errors,
    }
}

fn column_convergence(rows: &[PerturbationRow], j: usize, tol: f64) -> ColumnConvergence {
    let values: Vec<(usize, Option<f64>)> = rows
        .iter()
        .map(|r| (r.k, r.cells[j].as_ref().map(BigReal::to_f64)))
        .collect();
    let last = values.last().and_then(|v| v.1);
    let last_change = match values.len() {
        n if n >= 2 => match (values[n - 2].1, last) {
            (Some(a), Some(b)) => Some((b - a).abs()),
            _ => None,
        },
        _ => None,
    };
    let settled_at = last.and_then(|fin| {
        let mut at = None;
        for (k, v) in values.iter().rev() {
            match v {
                Some(v) if (v - fin).abs() <= tol => at = Some(*k),
                _ => break,
            }
        }
        at
    });
    ColumnConvergence {
        order: j,
        settled_at,
        last_change,
    }
}

/// The anharmonic perturbation table for state `rank` (0: ground state,
/// 2: first even excited state) at `x0`.
///
/// The problem is expanded as Taylor jets at `x0`, which keeps depth 50
/// at a few seconds.
pub fn perturb_solve(
    params: &AnharmonicParams,
    rank: usize,
    x0: &BigReal,
    opts: &TableOptions,
) -> Result<PerturbationResult, PerturbationError> {
    let problem = anharmonic_jets(params, AnharmonicMode::Perturbative, x0, max_depth(opts))?;
    let sel = default_anharmonic_selector(params.precision(), rank);
    perturb_table(&problem, &sel, opts)
}

fn max_depth(opts: &TableOptions) -> usize {
    opts.schedule.iter().copied().max().unwrap_or(0)
}

/// Anharmonic problem expanded for depths up to `max_depth`.
pub fn anharmonic_jets(
    params: &AnharmonicParams,
    mode: AnharmonicMode,
    x0: &BigReal,
    max_depth: usize,
) -> Result<AimProblem<TaylorJet>, PerturbationError> {
    Ok(anharmonic_problem(params, mode, x0)?.to_jets(max_depth)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aim::delta;
    use crate::models::default_anharmonic_x0;

    fn p() -> Precision {
        Precision::default()
    }

    fn problem(depth: usize) -> AimProblem<TaylorJet> {
        let params = AnharmonicParams::standard(p());
        anharmonic_jets(
            &params,
            AnharmonicMode::Perturbative,
            &default_anharmonic_x0(p()),
            depth,
        )
        .unwrap()
    }

    #[test]
    fn order_zero_expansion_is_plain_delta() {
        let prob = problem(6).truncated(0);
        let e = BigReal::from_ratio(p(), 5, 2);
        let exp = EnergyExpansion {
            state: 0,
            coefficients: vec![e.clone()],
        };
        let series = delta_gamma(&prob, 5, &exp).unwrap();
        assert_eq!(series.order(), 0);
        assert_eq!(*series.coeff(0), *delta(&prob, 5, &e).unwrap().scalar());
    }

    #[test]
    fn mismatched_order_is_rejected() {
        let prob = problem(6);
        let exp = EnergyExpansion::zeros(p(), 2, 0);
        assert!(matches!(
            delta_gamma(&prob, 3, &exp),
            Err(PerturbationError::OrderMismatch { .. })
        ));
    }

    #[test]
    fn first_row_of_ground_state_table() {
        let prob = problem(5);
        let sel = default_anharmonic_selector(p(), 0);
        let row = solve_row(&prob, 5, &sel).unwrap();
        assert!((row.coefficients[0].to_f64() - 2.478891).abs() < 5e-6);
        assert!((row.coefficients[1].to_f64() + 0.480438).abs() < 5e-6);
    }

    #[test]
    fn corrections_are_exact_roots_of_their_order() {
        let prob = problem(10);
        let sel = default_anharmonic_selector(p(), 0);
        let row = solve_row(&prob, 10, &sel).unwrap();
        let series = delta_gamma(&prob, 10, &row).unwrap();
        for j in 1..=row.order() {
            assert!(series.coeff(j).abs() < p().ten_pow_neg(60), "order {j}");
        }
    }
}
