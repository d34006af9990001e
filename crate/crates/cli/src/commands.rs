use std::path::PathBuf;

use catoptrica_core::congruence::{integrate_wavefront, LineCongruence, MuGrid};
use catoptrica_core::cylinder::{
    focal_set_numeric, normal_congruence, ray_focal_points, reflected_point_source, Branch,
    CylinderParam, FocalPoint, NormalCongruence, ReflectedCongruence, Sign, Signs,
};
use catoptrica_core::line_space::{incidence, line_through, Point3};
use catoptrica_core::{par, Complex64, Error};

use crate::config::{Format, RunConfig, WavefrontTarget};
use crate::output::{diagnostics_csv, diagnostics_path, Cell, Diagnostic, Table};
use crate::verify::{self, Fault};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_VERIFY: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Reflect,
    Focal,
    Wavefront,
    Verify,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub numeric: bool,
    pub signs_all: bool,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub fault: Option<Fault>,
}

/// Everything a command produces, before anything touches the filesystem.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub table: Table,
    pub diagnostics: Vec<Diagnostic>,
    /// Set by `verify` when a check fails.
    pub failed: bool,
    /// Human-readable summary for stdout.
    pub summary: String,
}

fn signs_for(cfg: &RunConfig, opts: &RunOptions) -> (Vec<Signs>, bool) {
    if opts.signs_all {
        (Signs::ALL.to_vec(), true)
    } else {
        let list = cfg.signs.list();
        let tagged = list.len() > 1;
        (list, tagged)
    }
}

fn tag(detail: String, signs: Signs, tagged: bool) -> String {
    if tagged {
        format!("[{signs}] {detail}")
    } else {
        detail
    }
}

fn columns(base: &[&str], signs_col_after: usize, tagged: bool, rest: &[&str]) -> Vec<String> {
    let mut c: Vec<String> = base.iter().map(|s| s.to_string()).collect();
    if tagged {
        c.insert(signs_col_after, "signs".into());
    }
    c.extend(rest.iter().map(|s| s.to_string()));
    c
}

fn xyz(p: Point3) -> [Cell; 3] {
    [p.z.re.into(), p.z.im.into(), p.t.into()]
}

pub fn reflect(cfg: &RunConfig, opts: &RunOptions) -> Outcome {
    let (signs, tagged) = signs_for(cfg, opts);
    let grid = cfg.grid();
    let jobs: Vec<(f64, f64, Signs)> = grid
        .iter()
        .flat_map(|&(u, v)| signs.iter().map(move |&s| (u, v, s)))
        .collect();
    let results = par::map_ordered(&jobs, |&(u, v, s)| {
        let line = reflected_point_source(&cfg.profile, &CylinderParam::new(u, v, s))?;
        let mirror = Point3::new(cfg.profile.z0(u), v);
        let (_, r) = line_through(mirror, line.xi);
        Ok::<_, Error>((line, r, incidence(&line, r)))
    });

    let cols = columns(
        &["u", "v"],
        2,
        tagged,
        &["xi_re", "xi_im", "eta_re", "eta_im", "r", "x1", "x2", "x3"],
    );
    let mut out = Outcome {
        table: Table::new(&cols),
        ..Outcome::default()
    };
    for (&(u, v, s), res) in jobs.iter().zip(results) {
        match res {
            Ok((line, r, p)) => {
                let mut row: Vec<Cell> = vec![u.into(), v.into()];
                if tagged {
                    row.push(s.to_string().into());
                }
                let xi = line.xi.value();
                row.extend([
                    xi.re.into(),
                    xi.im.into(),
                    line.eta.re.into(),
                    line.eta.im.into(),
                    r.into(),
                ]);
                row.extend(xyz(p));
                out.table.push(row);
            }
            Err(e) => {
                let mut d = Diagnostic::from_error(u, v, &e);
                d.detail = tag(d.detail, s, tagged);
                out.diagnostics.push(d);
            }
        }
    }
    out.summary = format!(
        "{} reflected rays, {} diagnostics",
        out.table.rows.len(),
        out.diagnostics.len()
    );
    out
}

pub fn focal(cfg: &RunConfig, opts: &RunOptions) -> Outcome {
    let (signs, tagged) = signs_for(cfg, opts);
    let grid = cfg.grid();
    let closed = par::map_ordered(&grid, |&(u, v)| {
        signs
            .iter()
            .map(|&s| ray_focal_points(&cfg.profile, &CylinderParam::new(u, v, s)))
            .collect::<Vec<_>>()
    });
    let numeric = if opts.numeric {
        Some(focal_set_numeric(&cfg.profile, &grid, &signs))
    } else {
        None
    };

    let cols = columns(
        &["u", "v", "branch"],
        3,
        tagged,
        &["virtual", "x1", "x2", "x3"],
    );
    let mut out = Outcome {
        table: Table::new(&cols),
        ..Outcome::default()
    };
    let push = |out: &mut Outcome, u: f64, v: f64, s: Signs, fp: &FocalPoint| {
        let mut row: Vec<Cell> = vec![u.into(), v.into(), fp.branch.to_string().into()];
        if tagged {
            row.push(s.to_string().into());
        }
        row.push(fp.is_virtual.into());
        row.extend(xyz(fp.point));
        out.table.push(row);
    };
    let diag = |out: &mut Outcome, u: f64, v: f64, s: Signs, branch: &str, e: &Error| {
        let detail = tag(format!("{branch}: {e}"), s, tagged);
        out.diagnostics
            .push(Diagnostic::new(u, v, e.code(), detail));
    };

    let ns = signs.len();
    for (g, &(u, v)) in grid.iter().enumerate() {
        let per_sign = &closed[g];
        // branch-major within a point: curve, surface, then numeric roots
        for (k, res) in per_sign.iter().enumerate() {
            match res {
                Ok(pts) => match &pts.curve {
                    Ok(fp) => push(&mut out, u, v, signs[k], fp),
                    Err(e) => diag(&mut out, u, v, signs[k], "curve", e),
                },
                Err(e) => diag(&mut out, u, v, signs[k], "ray", e),
            }
        }
        for (k, res) in per_sign.iter().enumerate() {
            if let Ok(pts) = res {
                match &pts.surface {
                    Ok(fp) => push(&mut out, u, v, signs[k], fp),
                    Err(e) => diag(&mut out, u, v, signs[k], "surface", e),
                }
            }
        }
        if let Some(records) = &numeric {
            let recs = &records[g * ns..(g + 1) * ns];
            for rec in recs {
                if let Err(e) = &rec.points {
                    diag(&mut out, u, v, rec.signs, "numeric", e);
                }
            }
            let max_roots = recs
                .iter()
                .filter_map(|r| r.points.as_ref().ok().map(Vec::len))
                .max()
                .unwrap_or(0);
            for root in 0..max_roots {
                for rec in recs {
                    if let Ok(points) = &rec.points {
                        if let Some(fp) = points.get(root) {
                            debug_assert_eq!(fp.branch, Branch::Numeric(root));
                            push(&mut out, u, v, rec.signs, fp);
                        }
                    }
                }
            }
        }
    }
    out.summary = format!(
        "{} focal points, {} diagnostics",
        out.table.rows.len(),
        out.diagnostics.len()
    );
    out
}

/// Wavefront congruence for one sign choice.
enum WavefrontCongruence {
    Normals(NormalCongruence),
    Reflected(ReflectedCongruence),
}

impl WavefrontCongruence {
    fn as_dyn(&self) -> &dyn LineCongruence {
        match self {
            WavefrontCongruence::Normals(c) => c,
            WavefrontCongruence::Reflected(c) => c,
        }
    }
}

pub fn wavefront(cfg: &RunConfig, opts: &RunOptions) -> Outcome {
    let (mut signs, mut tagged) = signs_for(cfg, opts);
    if cfg.wavefront.congruence == WavefrontTarget::Normals {
        // only the normal orientation matters here
        signs.dedup_by_key(|s| s.sign0);
        signs.iter_mut().for_each(|s| s.branch1 = Sign::Plus);
        tagged = tagged && signs.len() > 1;
    }
    let cols = columns(&["u", "v"], 2, tagged, &["r", "x1", "x2", "x3"]);
    let mut out = Outcome {
        table: Table::new(&cols),
        ..Outcome::default()
    };
    let grid = match MuGrid::linspace(cfg.u_range, cfg.u_samples, cfg.v_range, cfg.v_samples) {
        Ok(g) => g,
        Err(e) => {
            out.diagnostics
                .push(Diagnostic::from_error(cfg.u_range.0, cfg.v_range.0, &e));
            out.failed = true;
            return out;
        }
    };
    let mu0 = grid.node(0, 0);
    let mut fronts = Vec::with_capacity(signs.len());
    for &s in &signs {
        let cong = match cfg.wavefront.congruence {
            WavefrontTarget::Normals => {
                WavefrontCongruence::Normals(NormalCongruence::new(cfg.profile.clone(), s.sign0))
            }
            WavefrontTarget::Reflected => {
                WavefrontCongruence::Reflected(ReflectedCongruence::new(cfg.profile.clone(), s))
            }
        };
        let res = start_parameter(cfg, &cong, s, mu0).and_then(|r0| {
            let wf = integrate_wavefront(cong.as_dyn(), mu0, r0 + cfg.wavefront.offset, &grid)?;
            let points = par::map_ordered(&wf.values, |&(mu, r)| {
                cong.as_dyn().line(mu).map(|l| incidence(&l, r))
            });
            Ok((wf, points))
        });
        match res {
            Ok(f) => fronts.push(Some(f)),
            Err(e) => {
                let mut d = Diagnostic::from_error(mu0.re, mu0.im, &e);
                d.detail = tag(d.detail, s, tagged);
                out.diagnostics.push(d);
                fronts.push(None);
            }
        }
    }
    for n in 0..grid.len() {
        for (k, front) in fronts.iter().enumerate() {
            let Some((wf, points)) = front else { continue };
            let (mu, r) = wf.values[n];
            match &points[n] {
                Ok(p) => {
                    let mut row: Vec<Cell> = vec![mu.re.into(), mu.im.into()];
                    if tagged {
                        row.push(signs[k].to_string().into());
                    }
                    row.push(r.into());
                    row.extend(xyz(*p));
                    out.table.push(row);
                }
                Err(e) => {
                    let mut d = Diagnostic::from_error(mu.re, mu.im, e);
                    d.detail = tag(d.detail, signs[k], tagged);
                    out.diagnostics.push(d);
                }
            }
        }
    }
    if fronts.iter().all(Option::is_none) {
        out.failed = true;
    }
    out.summary = format!(
        "{} wavefront samples, {} diagnostics",
        out.table.rows.len(),
        out.diagnostics.len()
    );
    out
}

/// Affine parameter of the mirror point on the start line.
fn start_parameter(
    cfg: &RunConfig,
    cong: &WavefrontCongruence,
    s: Signs,
    mu0: Complex64,
) -> catoptrica_core::Result<f64> {
    let q = CylinderParam::new(mu0.re, mu0.im, s);
    match cong {
        WavefrontCongruence::Normals(_) => Ok(normal_congruence(&cfg.profile, &q)?.r0),
        WavefrontCongruence::Reflected(c) => {
            let line = c.line(mu0)?;
            Ok(line_through(Point3::new(cfg.profile.z0(mu0.re), mu0.im), line.xi).1)
        }
    }
}

/// Runs a command without writing anything.
pub fn execute(command: Command, cfg: &RunConfig, opts: &RunOptions) -> Outcome {
    let body = || match command {
        Command::Reflect => reflect(cfg, opts),
        Command::Focal => focal(cfg, opts),
        Command::Wavefront => wavefront(cfg, opts),
        Command::Verify => verify::verify(cfg, opts),
    };
    match opts.threads {
        Some(n) => par::with_threads(n, body),
        None => body(),
    }
}

/// Runs a command, writes its table and diagnostics, and returns the exit code.
pub fn run(command: Command, cfg: &RunConfig, opts: &RunOptions) -> i32 {
    let Some(out_path) = opts.out.clone().or_else(|| cfg.out.clone()) else {
        eprintln!("error: no output path (use --out or the `out` field)");
        return EXIT_CONFIG;
    };
    let format = opts.format.unwrap_or(cfg.format);
    let outcome = execute(command, cfg, opts);
    if let Err(e) = outcome.table.write(&out_path, format) {
        eprintln!("error: cannot write {}: {e}", out_path.display());
        return EXIT_CONFIG;
    }
    let diag_path = diagnostics_path(&out_path);
    if let Err(e) = std::fs::write(&diag_path, diagnostics_csv(&outcome.diagnostics)) {
        eprintln!("error: cannot write {}: {e}", diag_path.display());
        return EXIT_CONFIG;
    }
    if command == Command::Verify {
        print!("{}", outcome.table.to_csv());
    }
    println!("{}", outcome.summary);
    match (command, outcome.failed) {
        (Command::Verify, true) => EXIT_VERIFY,
        (_, true) => EXIT_CONFIG,
        _ => EXIT_OK,
    }
}
