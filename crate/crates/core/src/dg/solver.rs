//! Semi-discrete DG operator, SSP-RK3 stepping and the limiting chain.

use std::path::PathBuf;

use rayon::prelude::*;

use crate::dy_limiter::{limit_cell_averages, DYReport};
use crate::error::{Error, Result};
use crate::mhd_state::MAX_DIM;

use super::basis::{Face, GAUSS_W, GAUSS_X, NMODES, TABLES};
use super::boundary::BoundarySpec;
use super::cases::init_case;
use super::config::RunConfig;
use super::limiters::{divfree_project, tvb_limit, zhang_shu_limit};
use super::output::{write_averages_csv, write_vtk, DiagnosticsWriter};
use super::physics::{llf_with_alpha, unpack, wave_speed, xy_flux, StateVec, NVARS};
use super::{eval_state, DGField, CELL_LEN};

type Trace = [[StateVec; 3]; 4];
type FaceFlux = [StateVec; 3];

fn traces(field: &DGField) -> Vec<Trace> {
    let t = &*TABLES;
    (0..field.n_cells())
        .into_par_iter()
        .map(|c| {
            let cell = field.cell(c);
            std::array::from_fn(|f| std::array::from_fn(|g| eval_state(cell, &t.face_phi[f][g])))
        })
        .collect()
}

fn face_flux(um: &FaceFlux, up: &FaceFlux, n: &[f64; 3], gamma: f64) -> Result<(FaceFlux, f64)> {
    let mut alpha = 0.0f64;
    for g in 0..3 {
        alpha = alpha
            .max(wave_speed(&um[g], n, gamma)?)
            .max(wave_speed(&up[g], n, gamma)?);
    }
    let flux = std::array::from_fn(|g| llf_with_alpha(&um[g], &up[g], n, alpha, gamma));
    Ok((flux, alpha))
}

/// Evaluates the DG right-hand side into `out` and returns the largest
/// face dissipation coefficient.
pub fn rhs(field: &DGField, cfg: &RunConfig, bc: &BoundarySpec, out: &mut [f64]) -> Result<f64> {
    let (nx, ny, dx) = (field.nx(), field.ny(), field.dx());
    let gamma = cfg.gamma;
    let tab = &*TABLES;
    let tr = traces(field);
    let (y0, y1) = (cfg.domain.2, cfg.domain.3);
    let (px, py) = (bc.periodic_x(), bc.periodic_y());
    let nfx = if px { nx } else { nx + 1 };
    let nfy = if py { ny } else { ny + 1 };
    let ex = [1.0, 0.0, 0.0];
    let ey = [0.0, 1.0, 0.0];

    let xfaces: Vec<(FaceFlux, f64)> = (0..ny * nfx)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx % nfx, idx / nfx);
            let yc = y0 + (j as f64 + 0.5) * dx;
            let ys: [f64; 3] = std::array::from_fn(|g| yc + 0.5 * dx * GAUSS_X[g]);
            let left = if i > 0 { Some(i - 1) } else if px { Some(nx - 1) } else { None };
            let right = if i < nx { Some(i) } else { None };
            let (um, up) = match (left, right) {
                (Some(l), Some(r)) => (tr[j * nx + l][Face::Right as usize], tr[j * nx + r][Face::Left as usize]),
                (None, Some(r)) => {
                    let up = tr[j * nx + r][Face::Left as usize];
                    (std::array::from_fn(|g| bc.ghost(Face::Left, &up[g], ys[g])), up)
                }
                (Some(l), None) => {
                    let um = tr[j * nx + l][Face::Right as usize];
                    (um, std::array::from_fn(|g| bc.ghost(Face::Right, &um[g], ys[g])))
                }
                (None, None) => unreachable!(),
            };
            face_flux(&um, &up, &ex, gamma)
        })
        .collect::<Result<_>>()?;

    let yfaces: Vec<(FaceFlux, f64)> = (0..nfy * nx)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx % nx, idx / nx);
            let below = if j > 0 { Some(j - 1) } else if py { Some(ny - 1) } else { None };
            let above = if j < ny { Some(j) } else { None };
            let (um, up) = match (below, above) {
                (Some(b), Some(a)) => (tr[b * nx + i][Face::Top as usize], tr[a * nx + i][Face::Bottom as usize]),
                (None, Some(a)) => {
                    let up = tr[a * nx + i][Face::Bottom as usize];
                    (std::array::from_fn(|g| bc.ghost(Face::Bottom, &up[g], y0)), up)
                }
                (Some(b), None) => {
                    let um = tr[b * nx + i][Face::Top as usize];
                    (um, std::array::from_fn(|g| bc.ghost(Face::Top, &um[g], y1)))
                }
                (None, None) => unreachable!(),
            };
            face_flux(&um, &up, &ey, gamma)
        })
        .collect::<Result<_>>()?;

    let alpha_max = xfaces
        .iter()
        .chain(yfaces.iter())
        .map(|(_, a)| *a)
        .fold(0.0, f64::max);

    let scale = 0.5 / dx;
    out.par_chunks_mut(CELL_LEN)
        .enumerate()
        .for_each(|(c, acc)| {
            let (i, j) = (c % nx, c / nx);
            let cell = field.cell(c);
            acc.fill(0.0);
            for q in 0..9 {
                let u = eval_state(cell, &tab.vol_phi[q]);
                let (fx, fy) = xy_flux(&u, gamma);
                let w = tab.vol_w[q];
                for v in 0..NVARS {
                    let (a, b) = (w * fx[v], w * fy[v]);
                    for k in 1..NMODES {
                        acc[v * NMODES + k] += a * tab.vol_dxi[q][k] + b * tab.vol_deta[q][k];
                    }
                }
            }
            let ir = if px { (i + 1) % nx } else { i + 1 };
            let jt = if py { (j + 1) % ny } else { j + 1 };
            // outward flux is +F on right/top faces and -F on left/bottom
            let faces = [
                (&xfaces[j * nfx + i].0, Face::Left, -1.0),
                (&xfaces[j * nfx + ir].0, Face::Right, 1.0),
                (&yfaces[j * nx + i].0, Face::Bottom, -1.0),
                (&yfaces[jt * nx + i].0, Face::Top, 1.0),
            ];
            for (flux, face, sign) in faces {
                for g in 0..3 {
                    let phi = &tab.face_phi[face as usize][g];
                    for v in 0..NVARS {
                        let f = sign * GAUSS_W[g] * flux[g][v];
                        for k in 0..NMODES {
                            acc[v * NMODES + k] -= f * phi[k];
                        }
                    }
                }
            }
            for a in acc.iter_mut() {
                *a *= scale;
            }
        });
    Ok(alpha_max)
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct StepDiagnostics {
    /// Time at the end of the step.
    pub time: f64,
    pub dt: f64,
    pub dy_triggered: bool,
    /// Davis–Yin iterations summed over the stages of this step.
    pub dy_iters: usize,
    /// Largest conservation residual among this step's limiter calls.
    pub conservation_residual: f64,
    pub min_rho: f64,
    pub min_internal_energy: f64,
    pub dy_reports: Vec<DYReport>,
}

fn post_stage(field: &mut DGField, cfg: &RunConfig, bc: &BoundarySpec, diag: &mut StepDiagnostics) -> Result<()> {
    let avg = field.averages()?;
    if !avg.inadmissible_rows(cfg.eps).is_empty() {
        let (x, rep) = limit_cell_averages(&avg, cfg.eps, cfg.dy_tol, cfg.dy_max_iters)?;
        if !rep.converged {
            return Err(Error::Domain(format!(
                "cell-average limiter did not converge in {} iterations (last increment {:e})",
                rep.n_iters,
                rep.increment_history.last().copied().unwrap_or(f64::NAN)
            )));
        }
        field.set_averages(&x)?;
        diag.dy_triggered = true;
        diag.dy_iters += rep.n_iters;
        diag.conservation_residual = diag.conservation_residual.max(rep.conservation_residual);
        diag.dy_reports.push(rep);
    }
    tvb_limit(field, cfg.tvb_m, bc);
    zhang_shu_limit(field, cfg.eps)?;
    Ok(())
}

fn combine(out: &mut DGField, a: f64, u0: &DGField, b: f64, u: &DGField, bdt: f64, l: &[f64]) {
    out.coeffs_mut()
        .par_iter_mut()
        .zip(u0.coeffs().par_iter().zip(u.coeffs().par_iter().zip(l.par_iter())))
        .for_each(|(o, (x0, (x, lx)))| *o = a * x0 + b * x + bdt * lx);
}

/// Smallest density and internal energy over the cell averages.
pub fn average_minima(field: &DGField) -> (f64, f64) {
    (0..field.n_cells())
        .map(|c| {
            let s = unpack(&field.average(c));
            (s.rho, s.internal_energy_unchecked())
        })
        .fold((f64::INFINITY, f64::INFINITY), |(a, b), (r, e)| (a.min(r), b.min(e)))
}

/// Advances `field` from time `t` by one SSP-RK3 step, clipped so as not to
/// pass `cfg.t_final`.
///
/// The divergence-free projection and a Zhang–Shu pass run at the start of
/// the step; each stage is followed by the cell-average limiter (only if an
/// average left `G^eps`), the TVB limiter and the Zhang–Shu limiter.
pub fn step_ssprk3(field: &DGField, cfg: &RunConfig, t: f64) -> Result<(DGField, StepDiagnostics)> {
    let bc = cfg.boundary_spec();
    let mut diag = StepDiagnostics::default();
    let mut u0 = field.clone();
    divfree_project(&mut u0);
    zhang_shu_limit(&mut u0, cfg.eps)?;

    let mut l = vec![0.0; u0.coeffs().len()];
    let alpha = rhs(&u0, cfg, &bc, &mut l)?;
    let mut dt = match cfg.fixed_dt() {
        Some(dt) => dt,
        None => cfg.cfl * cfg.dx() / alpha,
    };
    let remaining = cfg.t_final - t;
    if dt >= remaining * (1.0 - 1e-9) {
        dt = remaining;
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Domain(format!("invalid time step {dt:e} (max wave speed {alpha:e})")));
    }

    let mut u1 = u0.clone();
    combine(&mut u1, 1.0, &u0, 0.0, &u0, dt, &l);
    post_stage(&mut u1, cfg, &bc, &mut diag)?;

    rhs(&u1, cfg, &bc, &mut l)?;
    let mut u2 = u0.clone();
    combine(&mut u2, 0.75, &u0, 0.25, &u1, 0.25 * dt, &l);
    post_stage(&mut u2, cfg, &bc, &mut diag)?;

    rhs(&u2, cfg, &bc, &mut l)?;
    let mut u3 = u1;
    combine(&mut u3, 1.0 / 3.0, &u0, 2.0 / 3.0, &u2, 2.0 / 3.0 * dt, &l);
    post_stage(&mut u3, cfg, &bc, &mut diag)?;

    diag.dt = dt;
    diag.time = if dt == remaining { cfg.t_final } else { t + dt };
    (diag.min_rho, diag.min_internal_energy) = average_minima(&u3);
    Ok((u3, diag))
}

/// Aggregate statistics of a run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunSummary {
    pub steps: usize,
    pub final_time: f64,
    /// Steps in which the cell-average limiter fired at least once.
    pub dy_trigger_steps: usize,
    /// Limiter calls, counting each RK stage separately.
    pub dy_calls: usize,
    pub dy_all_converged: bool,
    /// Most iterations used by a single limiter call.
    pub max_dy_iters: usize,
    pub max_conservation_residual: f64,
    pub projections: usize,
    pub slice_calls: usize,
    pub slice_call_range: Option<(usize, usize)>,
    /// Increment history of every limiter call.
    pub dy_histories: Vec<Vec<f64>>,
    pub initial_totals: StateVec,
    pub final_totals: StateVec,
    pub min_rho: f64,
    pub min_internal_energy: f64,
}

impl RunSummary {
    /// Relative drift of the domain integral of variable `v`.
    pub fn relative_drift(&self, v: usize) -> f64 {
        let (a, b) = (self.initial_totals[v], self.final_totals[v]);
        (b - a).abs() / a.abs().max(f64::MIN_POSITIVE)
    }

    fn absorb(&mut self, d: &StepDiagnostics) {
        self.steps += 1;
        self.final_time = d.time;
        self.min_rho = self.min_rho.min(d.min_rho);
        self.min_internal_energy = self.min_internal_energy.min(d.min_internal_energy);
        if d.dy_triggered {
            self.dy_trigger_steps += 1;
        }
        for r in &d.dy_reports {
            self.dy_calls += 1;
            self.dy_all_converged &= r.converged;
            self.max_dy_iters = self.max_dy_iters.max(r.n_iters);
            self.max_conservation_residual = self.max_conservation_residual.max(r.conservation_residual);
            self.projections += r.n_projections;
            self.slice_calls += r.n_slice_calls;
            self.slice_call_range = match (self.slice_call_range, r.slice_call_range) {
                (Some((a, b)), Some((c, d))) => Some((a.min(c), b.max(d))),
                (x, None) | (None, x) => x,
            };
            self.dy_histories.push(r.increment_history.clone());
        }
    }
}

/// Time loop with output and abort handling.
pub struct Solver {
    cfg: RunConfig,
    field: DGField,
    time: f64,
    summary: RunSummary,
}

impl Solver {
    pub fn new(cfg: RunConfig) -> Result<Self> {
        let field = init_case(&cfg)?;
        Self::with_field(cfg, field)
    }

    pub fn with_field(cfg: RunConfig, field: DGField) -> Result<Self> {
        cfg.validate()?;
        if field.nx() != cfg.nx || field.ny() != cfg.ny {
            return Err(Error::InvalidInput("field does not match the configured mesh".into()));
        }
        let (min_rho, min_e) = average_minima(&field);
        let totals = field.totals();
        Ok(Self {
            cfg,
            field,
            time: 0.0,
            summary: RunSummary {
                dy_all_converged: true,
                initial_totals: totals,
                final_totals: totals,
                min_rho,
                min_internal_energy: min_e,
                ..Default::default()
            },
        })
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    pub fn field(&self) -> &DGField {
        &self.field
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn summary(&self) -> &RunSummary {
        &self.summary
    }

    pub fn finished(&self) -> bool {
        self.time >= self.cfg.t_final
    }

    /// One time step. On failure the pre-step state is dumped as CSV and a
    /// [`Error::SolverAbort`] is returned.
    pub fn step(&mut self) -> Result<StepDiagnostics> {
        match step_ssprk3(&self.field, &self.cfg, self.time) {
            Ok((field, diag)) => {
                self.field = field;
                self.time = diag.time;
                self.summary.absorb(&diag);
                self.summary.final_totals = self.field.totals();
                Ok(diag)
            }
            Err(e) => Err(Error::SolverAbort {
                time: self.time,
                reason: e.to_string(),
                dump: self.dump().ok(),
            }),
        }
    }

    fn dump(&self) -> Result<PathBuf> {
        let dir = match &self.cfg.out_dir {
            Some(d) => d.clone(),
            None => std::env::temp_dir(),
        };
        std::fs::create_dir_all(&dir)?;
        let path = dir.join(format!(
            "abort_{}_{}_step{}.csv",
            self.cfg.case.name(),
            std::process::id(),
            self.summary.steps
        ));
        write_averages_csv(&self.field, &path)?;
        Ok(path)
    }

    /// Runs to `t_final`, writing outputs to `out_dir` if configured and
    /// calling `on_step` after every step.
    pub fn run_with<F>(&mut self, mut on_step: F) -> Result<RunSummary>
    where
        F: FnMut(&Solver, &StepDiagnostics) -> Result<()>,
    {
        let mut diag_out = match &self.cfg.out_dir {
            Some(dir) => {
                std::fs::create_dir_all(dir)?;
                Some(DiagnosticsWriter::create(&dir.join("diagnostics.csv"))?)
            }
            None => None,
        };
        while !self.finished() {
            if let Some(max) = self.cfg.max_steps {
                if self.summary.steps >= max {
                    break;
                }
            }
            let d = self.step()?;
            if let Some(w) = diag_out.as_mut() {
                w.write(&d)?;
            }
            let every = self.cfg.output_every;
            if every > 0 && self.summary.steps.is_multiple_of(every) && !self.finished() {
                self.write_fields(&format!("{:06}", self.summary.steps))?;
            }
            on_step(self, &d)?;
        }
        if let Some(w) = diag_out.as_mut() {
            w.flush()?;
        }
        if self.cfg.out_dir.is_some() {
            self.write_fields("final")?;
        }
        Ok(self.summary.clone())
    }

    pub fn run(&mut self) -> Result<RunSummary> {
        self.run_with(|_, _| Ok(()))
    }

    fn write_fields(&self, tag: &str) -> Result<()> {
        if let Some(dir) = &self.cfg.out_dir {
            write_vtk(&self.field, self.cfg.gamma, &dir.join(format!("field_{tag}.vtk")))?;
            write_averages_csv(&self.field, &dir.join(format!("averages_{tag}.csv")))?;
        }
        Ok(())
    }
}

const _: () = assert!(MAX_DIM == 3 && NVARS == 2 + 2 * MAX_DIM);
