//! Subcommand runners. Each returns a [`Report`] whose JSON form carries
//! `schema_version` and whose `passed` flag decides the exit code.

use std::fmt::Write as _;

use heis_core::convexity::{
    check_convex_hessian, check_convex_segments, linspace, radial_criterion, ConvexityVerdict, Region,
};
use heis_core::mongeampere::{jacobian_identity_check, ma_density, ma_measure};
use heis_core::quadrature::QuadratureSpec;
use heis_core::rockafellar::{build_chain, reconstruct};
use heis_core::subdiff::{
    check_inclusion_radial, disc_image_radius, monotonicity_condition, radial_circle_image,
    reconstruct_subdifferential, reconstruct_subdifferential_refined, verify_subgradient_with,
};
use heis_core::verify::{run_suite, SuiteOptions, SCHEMA_VERSION};
use heis_core::{DiffMode, Error, Exec, HVector, Point, RadialField, RadialProfile, ScalarField};
use serde::Serialize;
use serde_json::{json, Value};

use crate::{Command, Common, ConvexityMode, MaMode, NormalmapMode, RockMode, SubdiffMode};

pub struct Report {
    pub passed: bool,
    pub json: Value,
    pub csv: Option<String>,
    /// CSV is the default output (polygon, radius and chain series).
    pub prefer_csv: bool,
}

impl Report {
    pub fn json_text(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.json).expect("reports serialize");
        s.push('\n');
        s
    }
}

pub enum Outcome {
    Done(Report),
    Failed { code: u8, message: String },
}

/// Exit code for a library error: 1 when the error itself is a
/// mathematical finding, 2 for bad input.
fn error_code(e: &Error) -> u8 {
    match e {
        Error::EmptyIntersection | Error::NoConvergence(_) | Error::ChainInvariant { .. } => 1,
        _ => 2,
    }
}

type Run = Result<Report, Error>;

pub fn run(cmd: &Command, exec: Exec) -> Outcome {
    let result = match cmd {
        Command::Convexity { mode, common } => convexity(*mode, common, exec),
        Command::Subdiff { mode, common } => subdiff(*mode, common, exec),
        Command::Normalmap { mode, common } => normalmap(*mode, common),
        Command::Mameasure { mode, common } => mameasure(*mode, common, exec),
        Command::Rockafellar { mode, common } => rockafellar(*mode, common),
        Command::Verify { common } => verify(common, exec),
    };
    match result {
        Ok(r) => Outcome::Done(r),
        Err(e) => Outcome::Failed {
            code: error_code(&e),
            message: e.to_string(),
        },
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("library types serialize")
}

fn envelope(command: &str, mode: &str, passed: bool, input: Value, result: Value) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "mode": mode,
        "status": if passed { "pass" } else { "fail" },
        "input": input,
        "result": result,
    })
}

fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

fn numbers(s: &str, n: usize, what: &str) -> Result<Vec<f64>, Error> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad(format!("{what} `{s}` must be {n} comma-separated numbers")))?;
    if v.len() != n || v.iter().any(|x| !x.is_finite()) {
        return Err(bad(format!("{what} `{s}` must be {n} comma-separated numbers")));
    }
    Ok(v)
}

fn point(s: &str, what: &str) -> Result<Point, Error> {
    let v = numbers(s, 3, what)?;
    Ok(Point::new(v[0], v[1], v[2]))
}

fn required<'a>(v: &'a Option<String>, flag: &str) -> Result<&'a str, Error> {
    v.as_deref().ok_or_else(|| bad(format!("--{flag} is required")))
}

fn region(c: &Common) -> Result<Region, Error> {
    if c.grid == 0 {
        return Err(bad("--grid must be positive"));
    }
    c.region.parse::<Region>()?.with_resolution([c.grid; 3])
}

/// The field from `--field`, or the radial field generated by `--z`.
fn field(c: &Common) -> Result<(ScalarField, Option<RadialField>), Error> {
    match (&c.field, &c.z) {
        (Some(f), None) => Ok((ScalarField::parse(f)?, None)),
        (None, Some(z)) => {
            let v = RadialField::new(z)?;
            Ok((v.field().clone(), Some(v)))
        }
        (Some(_), Some(_)) => Err(bad("give either --field or --z, not both")),
        (None, None) => Err(bad("--field or --z is required")),
    }
}

fn profile(c: &Common) -> Result<RadialProfile, Error> {
    match (&c.profile, &c.z) {
        (Some(p), None) => RadialProfile::parse(p),
        (None, Some(z)) => Ok(RadialField::new(z)?.profile().clone()),
        (Some(_), Some(_)) => Err(bad("give either --profile or --z, not both")),
        (None, None) => Err(bad("--profile or --z is required")),
    }
}

fn verdict_report(mode: &str, input: Value, v: &ConvexityVerdict) -> Report {
    Report {
        passed: v.passed(),
        json: envelope("convexity", mode, v.passed(), input, to_value(v)),
        csv: None,
        prefer_csv: false,
    }
}

fn convexity(mode: ConvexityMode, c: &Common, exec: Exec) -> Run {
    let r = region(c)?;
    let (u, radial) = field(c)?;
    let input = json!({ "field": u.name(), "box": r.to_string(), "grid": c.grid });
    match mode {
        ConvexityMode::Hessian => Ok(verdict_report("hessian", input, &check_convex_hessian(&u, &r, exec)?)),
        ConvexityMode::Segments => {
            let v = check_convex_segments(&u, &r, c.samples, c.seed, exec)?;
            let input = json!({ "field": u.name(), "box": r.to_string(), "samples": c.samples, "seed": c.seed });
            Ok(verdict_report("segments", input, &v))
        }
        ConvexityMode::Radial => {
            let v = radial.ok_or_else(|| bad("radial mode needs --z"))?;
            let grid = linspace(r.lo[2], r.hi[2], c.n.unwrap_or(1001));
            let rc = radial_criterion(&v, &grid)?;
            let passed = rc.verdict.passed();
            let mut csv = String::from("t,margin\n");
            for (t, m) in &rc.margins {
                let _ = writeln!(csv, "{t},{m}");
            }
            let result = json!({
                "verdict": to_value(&rc.verdict),
                "degenerate_points": rc.degenerate_points,
            });
            Ok(Report {
                passed,
                json: envelope("convexity", "radial", passed, input, result),
                csv: Some(csv),
                prefer_csv: false,
            })
        }
    }
}

fn subdiff(mode: SubdiffMode, c: &Common, exec: Exec) -> Run {
    let (u, _) = field(c)?;
    let g = point(required(&c.at, "at")?, "--at")?;
    match mode {
        SubdiffMode::Reconstruct => {
            let s = match c.refine {
                Some(tol) => reconstruct_subdifferential_refined(&u, g, c.dirs, tol, exec)?,
                None => reconstruct_subdifferential(&u, g, c.dirs, exec)?,
            };
            let input = json!({ "field": u.name(), "at": to_value(&g), "dirs": c.dirs, "refine": c.refine });
            let result = json!({
                "shape": to_value(&s.set.shape),
                "vertices": to_value(&s.set.vertices),
                "area": s.set.area,
                "diameter": s.set.diameter,
                "lipschitz": s.lipschitz,
                "directions_used": s.support.len(),
            });
            Ok(Report {
                passed: true,
                json: envelope("subdiff", "reconstruct", true, input, result),
                csv: Some(s.to_csv()),
                prefer_csv: true,
            })
        }
        SubdiffMode::Verify => {
            let pv = numbers(required(&c.p, "p")?, 2, "--p")?;
            let p = HVector::new(pv[0], pv[1]);
            let r = region(c)?;
            let check = verify_subgradient_with(&u, g, p, &r, c.samples, c.seed, exec)?;
            let input = json!({
                "field": u.name(), "at": to_value(&g), "p": to_value(&p),
                "box": r.to_string(), "samples": c.samples, "seed": c.seed,
            });
            Ok(Report {
                passed: check.holds,
                json: envelope("subdiff", "verify", check.holds, input, to_value(&check)),
                csv: None,
                prefer_csv: false,
            })
        }
    }
}

fn range(r: &Region, axis: usize) -> (f64, f64) {
    (r.lo[axis], r.hi[axis])
}

fn normalmap(mode: NormalmapMode, c: &Common) -> Run {
    let prof = profile(c)?;
    let n = c.n.unwrap_or(200);
    match mode {
        NormalmapMode::Circle => {
            let radius = radial_circle_image(&prof, c.t, c.r)?;
            let input = json!({ "profile": prof.name(), "t": c.t, "r": c.r });
            Ok(Report {
                passed: true,
                json: envelope("normalmap", "circle", true, input, json!({ "radius": radius })),
                csv: None,
                prefer_csv: false,
            })
        }
        NormalmapMode::Disc => {
            let d = disc_image_radius(&prof, c.t, c.r, n)?;
            let mut csv = String::from("r,radius\n");
            for k in 0..=n {
                let r = c.r * k as f64 / n as f64;
                if let Ok(v) = radial_circle_image(&prof, c.t, r) {
                    let _ = writeln!(csv, "{r},{v}");
                }
            }
            let input = json!({ "profile": prof.name(), "t": c.t, "r": c.r, "n": n });
            Ok(Report {
                passed: true,
                json: envelope("normalmap", "disc", true, input, to_value(&d)),
                csv: Some(csv),
                prefer_csv: true,
            })
        }
        NormalmapMode::Monotonicity => {
            // r runs over [0, max |x|] of the box, t over its t-range.
            let b = region(c)?;
            let (x0, x1) = range(&b, 0);
            let (t0, t1) = range(&b, 2);
            let rg = linspace(0.0, x0.abs().max(x1.abs()), c.grid);
            let tg = linspace(t0, t1, c.grid);
            let rep = monotonicity_condition(&prof, &rg, &tg)?;
            let input = json!({ "profile": prof.name(), "box": b.to_string(), "grid": c.grid });
            Ok(Report {
                passed: rep.pass,
                json: envelope("normalmap", "monotonicity", rep.pass, input, to_value(&rep)),
                csv: None,
                prefer_csv: false,
            })
        }
        NormalmapMode::Inclusion => {
            let upper = RadialProfile::parse(required(&c.upper, "upper")?)?;
            let b = region(c)?;
            let (x0, x1) = range(&b, 0);
            let (t0, t1) = range(&b, 2);
            let rg = linspace(0.0, x0.abs().max(x1.abs()), c.grid.max(2));
            let tg = linspace(t0, t1, c.grid);
            let rep = check_inclusion_radial(&prof, &upper, &tg, &rg, n)?;
            let mut csv = String::from("t,boundary_radius,radius_u,radius_v,ratio\n");
            for s in &rep.slices {
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{}",
                    s.t, s.boundary_radius, s.radius_u, s.radius_v, s.ratio
                );
            }
            let input =
                json!({ "profile": prof.name(), "upper": upper.name(), "box": b.to_string(), "grid": c.grid, "n": n });
            Ok(Report {
                passed: rep.holds,
                json: envelope("normalmap", "inclusion", rep.holds, input, to_value(&rep)),
                csv: Some(csv),
                prefer_csv: false,
            })
        }
    }
}

fn mameasure(mode: MaMode, c: &Common, exec: Exec) -> Run {
    let (u, _) = field(c)?;
    match mode {
        MaMode::Density => {
            let g = point(required(&c.at, "at")?, "--at")?;
            let d = ma_density(&u, g, DiffMode::Auto)?;
            let input = json!({ "field": u.name(), "at": to_value(&g) });
            Ok(Report {
                passed: true,
                json: envelope("mameasure", "density", true, input, json!({ "density": d })),
                csv: None,
                prefer_csv: false,
            })
        }
        MaMode::Identity => {
            let g = point(required(&c.at, "at")?, "--at")?;
            let j = jacobian_identity_check(&u, g, DiffMode::Auto)?;
            let passed = j.residual <= 1e-10 * (1.0 + j.full_det.abs());
            let input = json!({ "field": u.name(), "at": to_value(&g) });
            Ok(Report {
                passed,
                json: envelope("mameasure", "identity", passed, input, to_value(&j)),
                csv: None,
                prefer_csv: false,
            })
        }
        MaMode::Integrate => {
            let r = region(c)?;
            let spec = QuadratureSpec {
                subdivisions: c.n.unwrap_or(8),
                ..QuadratureSpec::default()
            };
            let verdict = if c.certify {
                Some(check_convex_hessian(&u, &r, exec)?)
            } else {
                None
            };
            let certified = verdict.as_ref().is_some_and(|v| v.passed());
            let m = ma_measure(&u, &r, &spec, certified, exec)?;
            let passed = verdict.as_ref().is_none_or(|v| v.passed());
            let input = json!({ "field": u.name(), "box": r.to_string(), "subdivisions": spec.subdivisions });
            let result = json!({ "measure": to_value(&m), "convexity": verdict.as_ref().map(to_value) });
            Ok(Report {
                passed,
                json: envelope("mameasure", "integrate", passed, input, result),
                csv: None,
                prefer_csv: false,
            })
        }
    }
}

fn rockafellar(mode: RockMode, c: &Common) -> Run {
    let (u, _) = field(c)?;
    let g0 = point(&c.from, "--from")?;
    let g = point(required(&c.to, "to")?, "--to")?;
    match mode {
        RockMode::Build => {
            let n = c.n.unwrap_or(16);
            let chain = build_chain(&u, g0, g, n)?;
            let input = json!({ "field": u.name(), "from": to_value(&g0), "to": to_value(&g), "n": n });
            let result = json!({
                "links": chain.len(),
                "sum": chain.sum(),
                "gap": chain.gap(&u)?,
                "gap_bound": chain.gap_bound(),
                "nodes": to_value(&chain.nodes()),
            });
            Ok(Report {
                passed: true,
                json: envelope("rockafellar", "build", true, input, result),
                csv: Some(chain.to_csv()),
                prefer_csv: true,
            })
        }
        RockMode::Reconstruct => {
            let r = reconstruct(&u, g0, g, c.eps)?;
            let input = json!({ "field": u.name(), "from": to_value(&g0), "to": to_value(&g), "eps": c.eps });
            Ok(Report {
                passed: true,
                json: envelope("rockafellar", "reconstruct", true, input, to_value(&r)),
                csv: None,
                prefer_csv: false,
            })
        }
    }
}

fn verify(c: &Common, exec: Exec) -> Run {
    let report = run_suite(SuiteOptions { seed: c.seed, exec });
    let mut csv = String::from("name,passed,value,tolerance\n");
    for ch in &report.checks {
        let _ = writeln!(csv, "{},{},{},{}", ch.name, ch.passed, ch.value, ch.tolerance);
    }
    let mut json = to_value(&report);
    json["command"] = json!("verify");
    Ok(Report {
        passed: report.passed,
        json,
        csv: Some(csv),
        prefer_csv: false,
    })
}
