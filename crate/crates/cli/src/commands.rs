use dkp_aim::aim::{find_eigenvalue, select_root, trace_depths, AimProblem, QuantizationTrace, RootSelector};
use dkp_aim::closed_form::{
    general_aim_eigenvalue, general_default_x0, general_eigenfunction, general_eigenvalue, general_exact_depth,
    general_problem, GeneralFamilyParams,
};
use dkp_aim::golden::{compare, golden_table, COLUMNS};
use dkp_aim::models::{
    coulomb_components, coulomb_problem, coulomb_spectrum, coulomb_wavefunction, default_anharmonic_x0,
    default_coulomb_x0, default_oscillator_x0, energy_from_xi, oscillator_components, oscillator_exact_depth,
    oscillator_problem, oscillator_spectrum, oscillator_wavefunction, AnharmonicMode, AnharmonicParams, CoulombParams,
    EnergyBranch, OscillatorParams, WavefunctionTable,
};
use dkp_aim::oracle::{coulomb_operator, coulomb_xi, oscillator_operator, richardson_eigenvalues, AnharmonicOracle};
use dkp_aim::perturbation::{
    anharmonic_jets, default_anharmonic_selector, perturb_table, PerturbationResult, TableOptions, TableScheme,
};
use dkp_aim::series::Differential;
use dkp_aim::{BigReal, Precision};
use rayon::prelude::*;

use crate::config::{Branch, Mode, Problem, RunConfig};
use crate::error::CliError;
use crate::report::{Cell, Report, Section, Status};

/// Working precision unless `--precision` is given.
pub const DEFAULT_PRECISION: u32 = 120;
/// Default depth of the anharmonic perturbation tables.
pub const ANHARMONIC_K_MAX: usize = 50;
/// Default last depth of the anharmonic diagnosis.
pub const DIAGNOSE_K_MAX: usize = 60;
/// Default agreement tolerance of the anharmonic diagnosis.
pub const DIAGNOSE_TOL: f64 = 1e-6;
/// Default agreement tolerance of the exactly solvable diagnoses.
pub const EXACT_TOL: f64 = 1e-12;
/// Default number of wavefunction grid points.
pub const WAVEFUNCTION_POINTS: usize = 201;
/// Default oracle grid sizes.
pub const ORACLE_GRID: usize = 2000;
pub const COULOMB_ORACLE_GRID: usize = 4000;

struct Ctx<'a> {
    cfg: &'a RunConfig,
    prec: Precision,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

impl<'a> Ctx<'a> {
    fn new(cfg: &'a RunConfig) -> Result<Self, CliError> {
        let digits = cfg.precision.unwrap_or(DEFAULT_PRECISION);
        if !(10..=10_000).contains(&digits) {
            return Err(usage(format!("--precision {digits} outside 10..=10000")));
        }
        Ok(Ctx {
            cfg,
            prec: Precision::digits(digits),
        })
    }

    fn problem(&self) -> Result<Problem, CliError> {
        self.cfg.problem.ok_or_else(|| usage("--problem is required"))
    }

    fn real(&self, name: &str, v: Option<&String>, default: &str) -> Result<BigReal, CliError> {
        let s = v.map_or(default, String::as_str);
        BigReal::parse(self.prec, s).map_err(|_| usage(format!("--{name}: not a number: {s:?}")))
    }

    fn opt_real(&self, name: &str, v: Option<&String>) -> Result<Option<BigReal>, CliError> {
        v.map(|s| self.real(name, Some(s), "")).transpose()
    }

    fn x0(&self, default: BigReal) -> Result<BigReal, CliError> {
        Ok(self.opt_real("x0", self.cfg.x0.as_ref())?.unwrap_or(default))
    }

    fn bracket(&self) -> Result<Option<(BigReal, BigReal)>, CliError> {
        let Some(b) = &self.cfg.bracket else { return Ok(None) };
        let lo = self.real("bracket", b.first(), "")?;
        let hi = self.real("bracket", b.get(1), "")?;
        if lo >= hi {
            return Err(usage("--bracket LO HI needs LO < HI"));
        }
        Ok(Some((lo, hi)))
    }

    fn selector(&self, lo: BigReal, hi: BigReal, rank: usize, grid: usize) -> Result<RootSelector, CliError> {
        let (lo, hi) = self.bracket()?.unwrap_or((lo, hi));
        Ok(RootSelector::new(lo, hi, self.cfg.state_rank.unwrap_or(rank)).with_grid(self.cfg.grid.unwrap_or(grid)))
    }

    fn branch(&self) -> EnergyBranch {
        match self.cfg.branch.unwrap_or_default() {
            Branch::Particle => EnergyBranch::Particle,
            Branch::Antiparticle => EnergyBranch::Antiparticle,
        }
    }

    fn single_state(&self, default: usize) -> Result<usize, CliError> {
        match self.cfg.states(default)?.as_slice() {
            [n] => Ok(*n),
            _ => Err(usage("this command takes a single state (--n)")),
        }
    }

    fn oscillator(&self) -> Result<OscillatorParams, CliError> {
        let c = self.cfg;
        let j = c.j.unwrap_or(0);
        if let Some(k) = &c.k {
            if c.mass.is_some() || c.omega.is_some() || c.hbar.is_some() || c.c.is_some() {
                return Err(usage("--k excludes --mass, --omega, --hbar and --c"));
            }
            return Ok(OscillatorParams::natural(self.real("k", Some(k), "")?, j)?);
        }
        Ok(OscillatorParams::new(
            self.real("mass", c.mass.as_ref(), "1")?,
            self.real("omega", c.omega.as_ref(), "1")?,
            self.real("hbar", c.hbar.as_ref(), "1")?,
            self.real("c", c.c.as_ref(), "1")?,
            j,
        )?)
    }

    fn coulomb(&self) -> Result<CoulombParams, CliError> {
        let c = self.cfg;
        let j = c.j.unwrap_or(0);
        if let Some(g) = &c.alpha_z {
            if c.z.is_some() || c.alpha.is_some() || c.mass.is_some() || c.hbar.is_some() || c.c.is_some() {
                return Err(usage("--alphaZ excludes --Z, --alpha, --mass, --hbar and --c"));
            }
            return Ok(CoulombParams::natural(self.real("alphaZ", Some(g), "")?, j)?);
        }
        Ok(CoulombParams::new(
            self.real("mass", c.mass.as_ref(), "1")?,
            self.real("hbar", c.hbar.as_ref(), "1")?,
            self.real("c", c.c.as_ref(), "1")?,
            self.real("Z", c.z.as_ref(), "1")?,
            self.real("alpha", c.alpha.as_ref(), "0.0072973525693")?,
            j,
        )?)
    }

    fn general(&self) -> Result<GeneralFamilyParams, CliError> {
        let c = self.cfg;
        Ok(GeneralFamilyParams::new(
            self.real("a", c.a.as_ref(), "1")?,
            self.real("b", c.b.as_ref(), "1")?,
            self.real("m", c.m.as_ref(), "0")?,
            c.big_n.unwrap_or(0),
        )?)
    }

    fn anharmonic(&self) -> Result<AnharmonicParams, CliError> {
        let mut p = AnharmonicParams::standard(self.prec);
        if let Some(b) = self.opt_real("beta", self.cfg.beta.as_ref())? {
            p.beta = b;
        }
        if let Some(order) = self.cfg.gamma_order {
            p.gamma_order = order;
        }
        p.j = self.cfg.j.unwrap_or(0);
        Ok(p)
    }

    fn anharmonic_x0(&self) -> Result<BigReal, CliError> {
        self.x0(default_anharmonic_x0(self.prec))
    }

    fn anharmonic_selector(&self, rank: usize) -> Result<RootSelector, CliError> {
        let d = default_anharmonic_selector(self.prec, rank);
        self.selector(d.lo, d.hi, rank, d.grid)
    }
}

/// Runs `f` for every state in parallel, in order. Usage errors abort;
/// numeric failures drop the row and mark the report partial.
fn per_state<T: Send>(
    report: &mut Report,
    states: &[usize],
    f: impl Fn(usize) -> Result<T, CliError> + Sync,
) -> Result<Vec<(usize, T)>, CliError> {
    let results: Vec<(usize, Result<T, CliError>)> = states.par_iter().map(|&n| (n, f(n))).collect();
    let mut out = Vec::new();
    for (n, r) in results {
        match r {
            Ok(v) => out.push((n, v)),
            Err(CliError::Numeric(msg)) => {
                report.note(format!("state {n}: {msg}"));
                report.status = Status::Partial;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

fn mode_or(cfg: &RunConfig, default: Mode) -> Mode {
    cfg.mode.unwrap_or(default)
}

fn unsupported(problem: Problem, mode: Mode) -> CliError {
    usage(format!("mode {mode:?} is not available for the {problem:?} problem").to_lowercase())
}

fn dev(a: &BigReal, b: &BigReal) -> Cell {
    Cell::Sci((a - b).abs())
}

fn compare_section(report: &mut Report, quantity: &str, rows: Vec<(usize, [Option<BigReal>; 3])>) {
    let mut s = Section::new(
        "compare",
        &[
            "n",
            "closed_form",
            "aim",
            "oracle",
            "dev_cf_aim",
            "dev_cf_oracle",
            "dev_aim_oracle",
        ],
    );
    for (n, [cf, aim, or]) in rows {
        let d = |a: &Option<BigReal>, b: &Option<BigReal>| match (a, b) {
            (Some(a), Some(b)) => dev(a, b),
            _ => Cell::Missing,
        };
        s.push(vec![
            n.into(),
            Cell::opt_real(cf.as_ref()),
            Cell::opt_real(aim.as_ref()),
            Cell::opt_real(or.as_ref()),
            d(&cf, &aim),
            d(&cf, &or),
            d(&aim, &or),
        ]);
    }
    report.note(format!("compared quantity: {quantity}"));
    report.sections.push(s);
}

pub fn spectrum(cfg: &RunConfig) -> Result<Report, CliError> {
    let ctx = Ctx::new(cfg)?;
    let mut report = Report::new("spectrum", cfg);
    match ctx.problem()? {
        Problem::Oscillator => oscillator_levels(&ctx, &mut report)?,
        Problem::Coulomb => coulomb_levels(&ctx, &mut report)?,
        Problem::General => general_levels(&ctx, &mut report)?,
        Problem::Anharmonic => anharmonic_levels(&ctx, &mut report)?,
    }
    Ok(report)
}

fn oscillator_aim(ctx: &Ctx, p: &OscillatorParams, n: usize) -> Result<BigReal, CliError> {
    let x0 = ctx.x0(default_oscillator_x0(p))?;
    let problem = oscillator_problem(p, &x0)?;
    let hi = p.k().mul_int(4 * n as i64 + 5 + 2 * i64::from(p.j));
    let sel = ctx.selector(BigReal::zero(ctx.prec), hi, n, 40 * (n + 2))?;
    let depth = ctx.cfg.k_max.unwrap_or_else(|| oscillator_exact_depth(n));
    Ok(select_root(&problem, depth, &sel)?)
}

fn oscillator_oracle(
    ctx: &Ctx,
    report: &mut Report,
    p: &OscillatorParams,
    n_max: usize,
) -> Result<Vec<BigReal>, CliError> {
    let k = p.k().to_f64();
    let top = k * (4 * n_max + 3 + 2 * p.j as usize) as f64;
    let r_max = match &ctx.cfg.r_max {
        Some(_) => ctx.real("r-max", ctx.cfg.r_max.as_ref(), "")?.to_f64(),
        None => (top.sqrt() + 6.0) / k.sqrt(),
    };
    let spec = oscillator_operator(k, p.j, r_max, ctx.cfg.points.unwrap_or(ORACLE_GRID))?;
    let ev = richardson_eigenvalues(&spec, n_max + 1)?;
    report.notes.extend(ev.warnings);
    Ok(ev.values.iter().map(|v| BigReal::from_f64(ctx.prec, *v)).collect())
}

fn oscillator_levels(ctx: &Ctx, report: &mut Report) -> Result<(), CliError> {
    let p = ctx.oscillator()?;
    let states = ctx.cfg.states(0)?;
    let branch = ctx.branch();
    let mode = mode_or(ctx.cfg, Mode::ClosedForm);
    let n_max = states.iter().copied().max().unwrap_or(0);
    let closed = |n: usize| oscillator_spectrum(&p, n, branch);
    match mode {
        Mode::ClosedForm | Mode::Aim | Mode::Oracle => {
            let oracle = if mode == Mode::Oracle {
                Some(oscillator_oracle(ctx, report, &p, n_max)?)
            } else {
                None
            };
            let levels = per_state(report, &states, |n| match mode {
                Mode::ClosedForm => Ok(closed(n).e_eff.expect("oscillator level has E_eff")),
                Mode::Aim => oscillator_aim(ctx, &p, n),
                _ => Ok(oracle.as_ref().expect("oracle computed")[n].clone()),
            })?;
            let mut s = Section::new("levels", &["n", "J", "N", "E_eff", "E", "method"]);
            for (n, e_eff) in levels {
                let e = p.energy_of_e_eff(&e_eff, branch)?;
                s.push(vec![
                    n.into(),
                    p.j.into(),
                    (2 * n + p.j as usize).into(),
                    e_eff.into(),
                    e.into(),
                    mode_name(mode).into(),
                ]);
            }
            report.sections.push(s);
        }
        Mode::Compare => {
            let oracle = oscillator_oracle(ctx, report, &p, n_max)?;
            let aim = per_state(report, &states, |n| oscillator_aim(ctx, &p, n))?;
            let rows = states
                .iter()
                .map(|&n| {
                    let a = aim.iter().find(|(m, _)| *m == n).map(|(_, v)| v.clone());
                    (n, [closed(n).e_eff, a, Some(oracle[n].clone())])
                })
                .collect();
            compare_section(report, "E_eff", rows);
        }
        other => return Err(unsupported(Problem::Oscillator, other)),
    }
    Ok(())
}

fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::ClosedForm => "closed-form",
        Mode::Aim => "aim",
        Mode::Perturbative => "perturbative",
        Mode::Direct => "direct",
        Mode::Oracle => "oracle",
        Mode::Compare => "compare",
    }
}

fn coulomb_aim(ctx: &Ctx, p: &CoulombParams, n: usize) -> Result<BigReal, CliError> {
    let n_radial = coulomb_spectrum(p, n)?.n;
    let x0 = ctx.x0(default_coulomb_x0(ctx.prec))?;
    let problem = coulomb_problem(p, &x0)?;
    let hi = &(&p.lambda() + &BigReal::from_int(ctx.prec, n_radial as i64)) + &BigReal::from_ratio(ctx.prec, 1, 2);
    let sel = ctx.selector(BigReal::zero(ctx.prec), hi, n_radial - 1, 40 * (n_radial + 1))?;
    Ok(select_root(&problem, ctx.cfg.k_max.unwrap_or(n_radial), &sel)?)
}

fn coulomb_oracle(
    ctx: &Ctx,
    report: &mut Report,
    p: &CoulombParams,
    radial_max: usize,
) -> Result<Vec<BigReal>, CliError> {
    let lambda = p.lambda().to_f64();
    let xi_top = lambda + radial_max as f64;
    let rho_max = match &ctx.cfg.r_max {
        Some(_) => ctx.real("r-max", ctx.cfg.r_max.as_ref(), "")?.to_f64(),
        None => 10.0 * xi_top * xi_top + 40.0,
    };
    let spec = coulomb_operator(lambda, rho_max, ctx.cfg.points.unwrap_or(COULOMB_ORACLE_GRID))?;
    let ev = richardson_eigenvalues(&spec, radial_max)?;
    report.notes.extend(ev.warnings);
    ev.values
        .iter()
        .map(|eps| {
            coulomb_xi(*eps)
                .map(|xi| BigReal::from_f64(ctx.prec, xi))
                .ok_or_else(|| CliError::Numeric(format!("oracle eigenvalue {eps} is not bound")))
        })
        .collect()
}

fn coulomb_levels(ctx: &Ctx, report: &mut Report) -> Result<(), CliError> {
    let p = ctx.coulomb()?;
    let states = ctx.cfg.states(p.j as usize + 1)?;
    for &n in &states {
        coulomb_spectrum(&p, n)?;
    }
    let mode = mode_or(ctx.cfg, Mode::ClosedForm);
    let radial = |n: usize| n - p.j as usize;
    let radial_max = states.iter().map(|&n| radial(n)).max().unwrap_or(1);
    let closed_xi = |n: usize| &p.lambda() + &BigReal::from_int(ctx.prec, radial(n) as i64);
    match mode {
        Mode::ClosedForm | Mode::Aim | Mode::Oracle => {
            let oracle = if mode == Mode::Oracle {
                Some(coulomb_oracle(ctx, report, &p, radial_max)?)
            } else {
                None
            };
            let levels = per_state(report, &states, |n| match mode {
                Mode::ClosedForm => Ok((closed_xi(n), coulomb_spectrum(&p, n)?.energy)),
                Mode::Aim => {
                    let xi = coulomb_aim(ctx, &p, n)?;
                    let e = energy_from_xi(&p, &xi);
                    Ok((xi, e))
                }
                _ => {
                    let xi = oracle.as_ref().expect("oracle computed")[radial(n) - 1].clone();
                    let e = energy_from_xi(&p, &xi);
                    Ok((xi, e))
                }
            })?;
            let mut s = Section::new("levels", &["n", "n_radial", "J", "xi", "E", "B", "method"]);
            for (n, (xi, e)) in levels {
                let b = &p.rest_energy() - &e;
                s.push(vec![
                    n.into(),
                    radial(n).into(),
                    p.j.into(),
                    xi.into(),
                    e.into(),
                    b.into(),
                    mode_name(mode).into(),
                ]);
            }
            report.sections.push(s);
        }
        Mode::Compare => {
            let oracle = coulomb_oracle(ctx, report, &p, radial_max)?;
            let aim = per_state(report, &states, |n| coulomb_aim(ctx, &p, n))?;
            let rows = states
                .iter()
                .map(|&n| {
                    let a = aim.iter().find(|(m, _)| *m == n).map(|(_, xi)| energy_from_xi(&p, xi));
                    let cf = coulomb_spectrum(&p, n).ok().map(|e| e.energy);
                    (n, [cf, a, Some(energy_from_xi(&p, &oracle[radial(n) - 1]))])
                })
                .collect();
            compare_section(report, "E", rows);
        }
        other => return Err(unsupported(Problem::Coulomb, other)),
    }
    Ok(())
}

fn general_aim(ctx: &Ctx, p: &GeneralFamilyParams, n: usize) -> Result<BigReal, CliError> {
    let x0 = ctx.x0(general_default_x0(p))?;
    if ctx.cfg.k_max.is_none() && ctx.cfg.bracket.is_none() {
        return Ok(general_aim_eigenvalue(p, n, &x0)?);
    }
    let depth = ctx.cfg.k_max.unwrap_or_else(|| general_exact_depth(p, n));
    let (lo, hi) = match ctx.bracket()? {
        Some(b) => b,
        None => {
            let w = general_eigenvalue(p, n);
            let above = general_eigenvalue(p, n + 1);
            let below = if n == 0 {
                &w.mul_int(2) - &above
            } else {
                general_eigenvalue(p, n - 1)
            };
            let (a, b) = ((&w + &below).div_int(2), (&w + &above).div_int(2));
            if a < b {
                (a, b)
            } else {
                (b, a)
            }
        }
    };
    let problem = general_problem(p, &x0, depth)?;
    Ok(find_eigenvalue(&problem, depth, &lo, &hi)?)
}

fn general_levels(ctx: &Ctx, report: &mut Report) -> Result<(), CliError> {
    let p = ctx.general()?;
    let states = ctx.cfg.states(0)?;
    let mode = mode_or(ctx.cfg, Mode::ClosedForm);
    match mode {
        Mode::ClosedForm | Mode::Aim => {
            let levels = per_state(report, &states, |n| match mode {
                Mode::ClosedForm => Ok(general_eigenvalue(&p, n)),
                _ => general_aim(ctx, &p, n),
            })?;
            let mut s = Section::new("levels", &["n", "N", "w", "method"]);
            for (n, w) in levels {
                s.push(vec![
                    n.into(),
                    Cell::Int(i64::from(p.big_n)),
                    w.into(),
                    mode_name(mode).into(),
                ]);
            }
            report.sections.push(s);
        }
        Mode::Compare => {
            let aim = per_state(report, &states, |n| general_aim(ctx, &p, n))?;
            let rows = states
                .iter()
                .map(|&n| {
                    let a = aim.iter().find(|(m, _)| *m == n).map(|(_, v)| v.clone());
                    (n, [Some(general_eigenvalue(&p, n)), a, None])
                })
                .collect();
            report.note("no finite-difference oracle for the general family");
            compare_section(report, "w", rows);
        }
        other => return Err(unsupported(Problem::General, other)),
    }
    Ok(())
}

fn perturbative(
    ctx: &Ctx,
    p: &AnharmonicParams,
    rank: usize,
    schedule: Vec<usize>,
) -> Result<PerturbationResult, CliError> {
    let x0 = ctx.anharmonic_x0()?;
    let k_max = schedule.iter().copied().max().unwrap_or(0);
    let problem = anharmonic_jets(p, AnharmonicMode::Perturbative, &x0, k_max)?;
    let opts = TableOptions {
        schedule,
        scheme: TableScheme::ColumnFrozen,
        tol: ctx.cfg.tolerance.unwrap_or(TableOptions::standard().tol),
    };
    Ok(perturb_table(&problem, &ctx.anharmonic_selector(rank)?, &opts)?)
}

fn anharmonic_schedule(ctx: &Ctx, default_max: usize) -> Result<Vec<usize>, CliError> {
    let schedule = match &ctx.cfg.k_schedule {
        Some(s) => s.clone(),
        None => vec![ctx.cfg.k_max.unwrap_or(default_max)],
    };
    if schedule.is_empty() || schedule.contains(&0) {
        return Err(usage("iteration depths must be positive"));
    }
    Ok(schedule)
}

fn oracle_settings(ctx: &Ctx, p: &AnharmonicParams, rank: usize) -> AnharmonicOracle {
    AnharmonicOracle {
        beta: p.beta.to_f64(),
        order: p.gamma_order,
        grid: ctx.cfg.points.unwrap_or(ORACLE_GRID),
        ..AnharmonicOracle::standard(rank)
    }
}

fn expansion_columns(order: usize) -> Vec<String> {
    (0..=order)
        .map(|j| format!("e{j}"))
        .chain(["total".to_string()])
        .collect()
}

fn anharmonic_levels(ctx: &Ctx, report: &mut Report) -> Result<(), CliError> {
    let p = ctx.anharmonic()?;
    let states = ctx.cfg.states(0)?;
    let mode = mode_or(ctx.cfg, Mode::Perturbative);
    let order = p.gamma_order;
    let named = |fixed: &[&str]| {
        let mut cols: Vec<String> = fixed.iter().map(|s| s.to_string()).collect();
        cols.extend(expansion_columns(order));
        cols
    };
    match mode {
        Mode::Perturbative => {
            let schedule = anharmonic_schedule(ctx, ANHARMONIC_K_MAX)?;
            let tables = per_state(report, &states, |n| perturbative(ctx, &p, n, schedule.clone()))?;
            let cols = named(&["n", "k"]);
            let mut s = Section::new("levels", &cols.iter().map(String::as_str).collect::<Vec<_>>());
            for (n, t) in tables {
                for row in &t.rows {
                    let mut cells: Vec<Cell> = vec![n.into(), row.k.into()];
                    cells.extend(row.cells.iter().map(|c| Cell::opt_real(c.as_ref())));
                    cells.push(Cell::opt_real(row.total.as_ref()));
                    for e in &row.errors {
                        report.notes.push(format!("state {n}, k = {}: {e}", row.k));
                        report.status = Status::Partial;
                    }
                    s.push(cells);
                }
            }
            report.sections.push(s);
        }
        Mode::Direct | Mode::Aim => {
            let schedule = anharmonic_schedule(ctx, ANHARMONIC_K_MAX)?;
            let k_max = schedule.iter().copied().max().unwrap_or(0);
            let x0 = ctx.anharmonic_x0()?;
            let problem = anharmonic_jets(&p, AnharmonicMode::Direct, &x0, k_max)?;
            let roots = per_state(report, &states, |n| {
                let sel = ctx.anharmonic_selector(n)?;
                schedule
                    .iter()
                    .map(|&k| Ok((k, select_root(&problem, k, &sel)?)))
                    .collect::<Result<Vec<_>, CliError>>()
            })?;
            let mut s = Section::new("levels", &["n", "k", "E", "method"]);
            for (n, rows) in roots {
                for (k, e) in rows {
                    s.push(vec![n.into(), k.into(), e.into(), "direct".into()]);
                }
            }
            report.sections.push(s);
        }
        Mode::Oracle => {
            let results = per_state(report, &states, |n| Ok(oracle_settings(ctx, &p, n).run()?))?;
            let cols = named(&["n"]);
            let mut s = Section::new("levels", &cols.iter().map(String::as_str).collect::<Vec<_>>());
            for (n, r) in results {
                let mut cells: Vec<Cell> = vec![n.into()];
                cells.extend((0..=order).map(|j| r.coefficients.get(j).copied().map_or(Cell::Missing, Cell::Float)));
                cells.push(r.total.into());
                s.push(cells);
            }
            report.sections.push(s);
        }
        Mode::Compare => {
            let k = ctx.cfg.k_max.unwrap_or(ANHARMONIC_K_MAX);
            let rows = per_state(report, &states, |n| {
                let t = perturbative(ctx, &p, n, vec![k])?;
                let total = t.rows[0].total.clone();
                let oracle = oracle_settings(ctx, &p, n).run()?.total;
                Ok((total, oracle))
            })?;
            let mut s = Section::new("compare", &["n", "k", "perturbative", "oracle", "deviation"]);
            for (n, (total, oracle)) in rows {
                let d = total
                    .as_ref()
                    .map_or(Cell::Missing, |t| Cell::SciFloat((t.to_f64() - oracle).abs()));
                s.push(vec![
                    n.into(),
                    k.into(),
                    Cell::opt_real(total.as_ref()),
                    oracle.into(),
                    d,
                ]);
            }
            report.note("compared quantity: summed energy expansion");
            report.sections.push(s);
        }
        Mode::ClosedForm => return Err(unsupported(Problem::Anharmonic, mode)),
    }
    Ok(())
}

pub fn reproduce_table(cfg: &RunConfig) -> Result<Report, CliError> {
    let ctx = Ctx::new(cfg)?;
    if let Some(p) = cfg.problem.filter(|p| *p != Problem::Anharmonic) {
        return Err(usage(
            format!("reproduce-table applies to the anharmonic problem, not {p:?}").to_lowercase(),
        ));
    }
    let which = cfg.table.ok_or_else(|| usage("--table 1|2 is required"))?;
    let mut golden = golden_table(which).ok_or_else(|| usage(format!("no table {which} (choose 1 or 2)")))?;
    if let Some(t) = cfg.tolerance {
        golden.cell_tol = t;
    }
    let schedule = match &cfg.k_schedule {
        Some(s) => s.clone(),
        None => golden.schedule(cfg.k_max.unwrap_or(golden.final_k)),
    };
    let params = ctx.anharmonic()?;
    if params.gamma_order != 5 {
        return Err(usage("the reference tables have gamma order 5"));
    }
    let result = perturbative(&ctx, &params, cfg.state_rank.unwrap_or(golden.state), schedule)?;

    let mut report = Report::new("reproduce-table", cfg);
    let mut table = Section::new("table", &["k", "e0", "e1", "e2", "e3", "e4", "e5", "total"]);
    for row in &result.rows {
        let mut cells: Vec<Cell> = vec![row.k.into()];
        cells.extend(row.cells.iter().map(|c| Cell::opt_real(c.as_ref())));
        cells.push(Cell::opt_real(row.total.as_ref()));
        table.push(cells);
        for e in &row.errors {
            report.note(format!("k = {}: {e}", row.k));
        }
    }
    report.sections.push(table);

    let mut conv = Section::new("columns", &["order", "settled_at", "last_change"]);
    for c in &result.columns {
        conv.push(vec![
            c.order.into(),
            Cell::opt_int(c.settled_at),
            c.last_change.map_or(Cell::Missing, Cell::SciFloat),
        ]);
    }
    report.sections.push(conv);

    let diffs = compare(&result, &golden);
    let mut diff = Section::new(
        "diff",
        &["k", "column", "expected", "got", "deviation", "tolerance", "status"],
    );
    let mut failed = Vec::new();
    for d in &diffs {
        let status = if d.passed() { "pass" } else { "FAIL" };
        let ditto = golden
            .row(d.k)
            .zip(COLUMNS.iter().position(|c| *c == d.column))
            .is_some_and(|(r, i)| r.ditto[i]);
        if !d.passed() {
            failed.push(format!("k={} {}", d.k, d.column));
        }
        diff.push(vec![
            d.k.into(),
            Cell::text(if ditto {
                format!("{} (repeat)", d.column)
            } else {
                d.column.to_string()
            }),
            Cell::Float(d.expected),
            d.got.map_or(Cell::Missing, Cell::Float),
            d.deviation().map_or(Cell::Missing, Cell::SciFloat),
            Cell::SciFloat(d.tol),
            status.into(),
        ]);
    }
    report.sections.push(diff);
    let passed = diffs.iter().filter(|d| d.passed()).count();
    report.note(format!(
        "table {which}: {passed}/{} reference cells reproduced",
        diffs.len()
    ));
    if !failed.is_empty() {
        report.note(format!("cells outside tolerance: {}", failed.join(", ")));
        report.status = Status::Mismatch;
    }
    Ok(report)
}

fn grid(ctx: &Ctx, r_min_default: f64, r_max_default: f64) -> Result<Vec<BigReal>, CliError> {
    let points = ctx.cfg.points.unwrap_or(WAVEFUNCTION_POINTS);
    if points < 2 {
        return Err(usage("--points must be at least 2"));
    }
    let lo = match ctx.opt_real("r-min", ctx.cfg.r_min.as_ref())? {
        Some(v) => v,
        None => BigReal::from_f64(ctx.prec, r_min_default),
    };
    let hi = match ctx.opt_real("r-max", ctx.cfg.r_max.as_ref())? {
        Some(v) => v,
        None => BigReal::from_f64(ctx.prec, r_max_default),
    };
    if lo >= hi {
        return Err(usage("--r-min must be below --r-max"));
    }
    let width = &hi - &lo;
    Ok((0..points)
        .map(|i| &lo + &width.mul_int(i as i64).div_int(points as i64 - 1))
        .collect())
}

/// Sign changes of `f`, located by linear interpolation.
fn nodes(radii: &[BigReal], f: &[BigReal]) -> Vec<BigReal> {
    let pts: Vec<(&BigReal, &BigReal)> = radii.iter().zip(f).filter(|(_, v)| !v.is_zero()).collect();
    pts.windows(2)
        .filter(|w| w[0].1.signum() != w[1].1.signum())
        .map(|w| {
            let (r0, f0) = w[0];
            let (r1, f1) = w[1];
            let t = f0 / &(f0 - f1);
            r0 + &(&(r1 - r0) * &t)
        })
        .collect()
}

fn table_section(name: &str, var: &str, t: &WavefunctionTable) -> Section {
    let mut cols = vec![var, "F"];
    if t.g.is_some() {
        cols.extend(["G", "H+1", "H-1"]);
    }
    let mut s = Section::new(name, &cols);
    for (i, r) in t.radii.iter().enumerate() {
        let mut row: Vec<Cell> = vec![r.clone().into(), t.f[i].clone().into()];
        for c in [&t.g, &t.h_plus, &t.h_minus].into_iter().flatten() {
            row.push(c[i].clone().into());
        }
        s.push(row);
    }
    s
}

pub fn wavefunction(cfg: &RunConfig) -> Result<Report, CliError> {
    let ctx = Ctx::new(cfg)?;
    let mut report = Report::new("wavefunction", cfg);
    let problem = ctx.problem()?;
    if cfg.mode.is_some_and(|m| m != Mode::ClosedForm) {
        return Err(usage("wavefunctions are tabulated from the closed form only"));
    }
    let components_start = |r_max: f64| {
        if cfg.components {
            r_max / (cfg.points.unwrap_or(WAVEFUNCTION_POINTS) as f64)
        } else {
            0.0
        }
    };
    let (var, table) = match problem {
        Problem::Oscillator => {
            let p = ctx.oscillator()?;
            let n = ctx.single_state(0)?;
            let k = p.k().to_f64();
            let r_max = ((4 * n + 3 + 2 * p.j as usize) as f64).sqrt() / k.sqrt() + 4.0 / k.sqrt();
            let radii = grid(&ctx, components_start(r_max), r_max)?;
            let f = oscillator_wavefunction(&p, n)?;
            let table = if cfg.components {
                let e = oscillator_spectrum(&p, n, ctx.branch()).energy;
                oscillator_components(&p, &f, &e).table(&radii)?
            } else {
                WavefunctionTable::from_function(&f, &radii)
            };
            ("r", table)
        }
        Problem::Coulomb => {
            let p = ctx.coulomb()?;
            let n = ctx.single_state(p.j as usize + 1)?;
            let level = coulomb_spectrum(&p, n)?;
            let xi = p.lambda().to_f64() + level.n as f64;
            let rho_max = 4.0 * xi + 6.0 * (level.n as f64) + 10.0;
            let radii = grid(&ctx, components_start(rho_max), rho_max)?;
            let f = coulomb_wavefunction(&p, n)?;
            let table = if cfg.components {
                coulomb_components(&p, &f, &level.energy).table(&radii)?
            } else {
                WavefunctionTable::from_function(&f, &radii)
            };
            ("rho", table)
        }
        Problem::General => {
            if cfg.components {
                return Err(usage("--components applies to the oscillator and Coulomb problems"));
            }
            let p = ctx.general()?;
            let n = ctx.single_state(0)?;
            let end = p.domain_end().to_f64();
            let xs = grid(&ctx, 0.0, end * 0.999)?;
            let f = xs
                .iter()
                .map(|x| general_eigenfunction(&p, n, x))
                .collect::<Result<Vec<_>, _>>()?;
            (
                "x",
                WavefunctionTable {
                    radii: xs,
                    f,
                    g: None,
                    h_plus: None,
                    h_minus: None,
                },
            )
        }
        Problem::Anharmonic => return Err(usage("no closed-form wavefunction for the anharmonic problem")),
    };
    let found = nodes(&table.radii, &table.f);
    report.sections.push(table_section("wavefunction", var, &table));
    let mut s = Section::new("nodes", &["index", var]);
    for (i, r) in found.iter().enumerate() {
        s.push(vec![i.into(), r.clone().into()]);
    }
    report.sections.push(s);
    report.note(format!("F changes sign {} times on the grid", table.sign_changes()));
    Ok(report)
}

fn trace_sections(report: &mut Report, trace: &QuantizationTrace) {
    let mut s = Section::new("trace", &["k", "root", "residual", "error"]);
    for e in &trace.entries {
        s.push(vec![
            e.k.into(),
            Cell::opt_real(e.root.as_ref()),
            Cell::opt_sci(e.residual.as_ref()),
            e.error.clone().map_or(Cell::Missing, Cell::Text),
        ]);
    }
    report.sections.push(s);
    let mut summary = Section::new("summary", &["status", "converged_at", "oscillation_onset"]);
    summary.push(vec![
        Cell::text(trace.status.to_string()),
        Cell::opt_int(trace.converged_at),
        Cell::opt_int(trace.oscillation_onset),
    ]);
    report.sections.push(summary);
    report.note(format!("trace status: {}", trace.status));
}

fn depths(ctx: &Ctx, first: usize, step: usize, default_max: usize) -> Result<Vec<usize>, CliError> {
    let d = match &ctx.cfg.k_schedule {
        Some(s) => s.clone(),
        None => (first..=ctx.cfg.k_max.unwrap_or(default_max)).step_by(step).collect(),
    };
    if d.is_empty() || d.contains(&0) || d.windows(2).any(|w| w[0] >= w[1]) {
        return Err(usage("iteration depths must be positive and ascending"));
    }
    Ok(d)
}

fn x0_scan<C: Differential + 'static>(
    ctx: &Ctx,
    report: &mut Report,
    k: usize,
    sel: &RootSelector,
    build: impl Fn(&BigReal) -> Result<AimProblem<C>, CliError> + Sync,
) -> Result<(), CliError> {
    let Some(points) = &ctx.cfg.x0_scan else { return Ok(()) };
    let xs = points
        .iter()
        .map(|s| ctx.real("x0-scan", Some(s), ""))
        .collect::<Result<Vec<_>, _>>()?;
    let results: Vec<Result<BigReal, CliError>> = xs.par_iter().map(|x| Ok(select_root(&build(x)?, k, sel)?)).collect();
    let mut s = Section::new("x0-scan", &["x0", "k", "root", "error"]);
    for (x, r) in xs.into_iter().zip(results) {
        match r {
            Ok(root) => s.push(vec![x.into(), k.into(), root.into(), Cell::Missing]),
            Err(e @ CliError::Usage(_)) => return Err(e),
            Err(e) => s.push(vec![x.into(), k.into(), Cell::Missing, Cell::Text(e.to_string())]),
        }
    }
    report.sections.push(s);
    Ok(())
}

pub fn diagnose(cfg: &RunConfig) -> Result<Report, CliError> {
    let ctx = Ctx::new(cfg)?;
    let mut report = Report::new("diagnose", cfg);
    match ctx.problem()? {
        Problem::Anharmonic => {
            let p = ctx.anharmonic()?;
            let n = ctx.single_state(0)?;
            let mode = mode_or(cfg, Mode::Direct);
            let am = match mode {
                Mode::Direct | Mode::Aim => AnharmonicMode::Direct,
                Mode::Perturbative => AnharmonicMode::Perturbative,
                other => return Err(unsupported(Problem::Anharmonic, other)),
            };
            let ks = depths(&ctx, 5, 5, DIAGNOSE_K_MAX)?;
            let k_max = *ks.last().expect("non-empty schedule");
            let sel = ctx.anharmonic_selector(n)?;
            let build = |x0: &BigReal| -> Result<AimProblem<_>, CliError> {
                let prob = anharmonic_jets(&p, am, x0, k_max)?;
                Ok(if am == AnharmonicMode::Perturbative {
                    prob.truncated(0)
                } else {
                    prob
                })
            };
            let problem = build(&ctx.anharmonic_x0()?)?;
            let trace = trace_depths(&problem, &sel, &ks, cfg.tolerance.unwrap_or(DIAGNOSE_TOL));
            trace_sections(&mut report, &trace);
            if am == AnharmonicMode::Perturbative {
                report.note("order-0 column of the perturbative scheme");
            }
            x0_scan(&ctx, &mut report, k_max, &sel, build)?;
        }
        Problem::Oscillator => {
            let p = ctx.oscillator()?;
            let n = ctx.single_state(0)?;
            let ks = depths(&ctx, 1, 1, oscillator_exact_depth(n) + 4)?;
            let hi = p.k().mul_int(4 * n as i64 + 5 + 2 * i64::from(p.j));
            let sel = ctx.selector(BigReal::zero(ctx.prec), hi, n, 40 * (n + 2))?;
            let problem = oscillator_problem(&p, &ctx.x0(default_oscillator_x0(&p))?)?;
            let trace = trace_depths(&problem, &sel, &ks, cfg.tolerance.unwrap_or(EXACT_TOL));
            trace_sections(&mut report, &trace);
            report.note(format!("exact from depth {}", oscillator_exact_depth(n)));
            x0_scan(&ctx, &mut report, *ks.last().expect("non-empty"), &sel, |x| {
                Ok(oscillator_problem(&p, x)?)
            })?;
        }
        Problem::Coulomb => {
            let p = ctx.coulomb()?;
            let n = ctx.single_state(p.j as usize + 1)?;
            let n_radial = coulomb_spectrum(&p, n)?.n;
            let ks = depths(&ctx, 1, 1, n_radial + 4)?;
            let hi =
                &(&p.lambda() + &BigReal::from_int(ctx.prec, n_radial as i64)) + &BigReal::from_ratio(ctx.prec, 1, 2);
            let sel = ctx.selector(BigReal::zero(ctx.prec), hi, n_radial - 1, 40 * (n_radial + 1))?;
            let problem = coulomb_problem(&p, &ctx.x0(default_coulomb_x0(ctx.prec))?)?;
            let trace = trace_depths(&problem, &sel, &ks, cfg.tolerance.unwrap_or(EXACT_TOL));
            trace_sections(&mut report, &trace);
            x0_scan(&ctx, &mut report, *ks.last().expect("non-empty"), &sel, |x| {
                Ok(coulomb_problem(&p, x)?)
            })?;
        }
        Problem::General => {
            let p = ctx.general()?;
            let n = ctx.single_state(0)?;
            let exact = general_exact_depth(&p, n);
            let ks = depths(&ctx, 1, 1, exact + 4)?;
            let k_max = *ks.last().expect("non-empty");
            let w = general_eigenvalue(&p, n);
            let above = general_eigenvalue(&p, n + 1);
            let below = if n == 0 {
                &w.mul_int(2) - &above
            } else {
                general_eigenvalue(&p, n - 1)
            };
            let (a, b) = ((&w + &below).div_int(2), (&w + &above).div_int(2));
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let sel = ctx.selector(lo, hi, 0, 40)?.with_negative(true);
            let problem = general_problem(&p, &ctx.x0(general_default_x0(&p))?, k_max)?;
            let trace = trace_depths(&problem, &sel, &ks, cfg.tolerance.unwrap_or(EXACT_TOL));
            trace_sections(&mut report, &trace);
            report.note(format!("exact from depth {exact}"));
            x0_scan(&ctx, &mut report, k_max, &sel, |x| Ok(general_problem(&p, x, k_max)?))?;
        }
    }
    Ok(report)
}
