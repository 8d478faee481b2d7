use std::fs;

use rayon::prelude::*;
use serde_json::{json, Map, Value};
use steerkit::analytic::{steerability_x_analytic, x_derived};
use steerkit::bell::{chsh_max, corollary_bounds, sym3_eigenvalues, RegionSampler};
use steerkit::input::{
    parse_assignment, parse_family_spec, parse_grid_spec, parse_state_json, GridSpec,
};
use steerkit::{
    maximize_steerability, region_scan, steering_ellipsoid, steering_radius, to_pauli,
    DensityMatrix, Direction, Error, Family, FamilySpec, OptimizerConfig, SteeringResult,
    Tolerances, XStateParams, VERSION,
};

use crate::args::{
    CommonArgs, DirectionArg, MethodArg, OutputArg, RegionCmd, StateArgs, StateCmd, SweepCmd,
};
use crate::output::{fmt_num, fmt_opt, Csv};

/// Failure with the exit code it maps to.
#[derive(Debug)]
pub enum CliError {
    /// Exit 2.
    Usage(String),
    /// Exit 3.
    StateFile(Error),
    /// Exit 4.
    Compute(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::StateFile(_) => 3,
            CliError::Compute(_) => 4,
        }
    }

    pub fn envelope(&self) -> Value {
        let (code, message) = match self {
            CliError::Usage(m) => ("InvalidArgument", m.clone()),
            CliError::StateFile(e) | CliError::Compute(e) => (e.code(), e.to_string()),
        };
        json!({ "error": { "code": code, "message": message } })
    }
}

fn usage(e: Error) -> CliError {
    CliError::Usage(e.to_string())
}

fn compute(e: Error) -> CliError {
    CliError::Compute(e)
}

struct Settings {
    tol: Tolerances,
    cfg: OptimizerConfig,
    directions: Vec<Direction>,
    method: MethodArg,
}

fn settings(common: &CommonArgs) -> Result<Settings, CliError> {
    let mut tol = Tolerances::default();
    for item in &common.tolerances {
        let (name, value) = parse_assignment(item).map_err(usage)?;
        tol.set(&name, value).map_err(usage)?;
    }
    let cfg = OptimizerConfig {
        grid_per_angle: common.grid_per_angle,
        top_k: common.top_k,
        seed: common.seed,
        ..OptimizerConfig::default()
    };
    cfg.validate().map_err(usage)?;
    let directions = match common.direction {
        DirectionArg::AtoB => vec![Direction::AtoB],
        DirectionArg::BtoA => vec![Direction::BtoA],
        DirectionArg::Both => Direction::BOTH.to_vec(),
    };
    Ok(Settings {
        tol,
        cfg,
        directions,
        method: common.method,
    })
}

fn method_name(m: MethodArg) -> &'static str {
    match m {
        MethodArg::Auto => "auto",
        MethodArg::Analytic => "analytic",
        MethodArg::Numeric => "numeric",
    }
}

/// A resolved state with whatever structure is known about it.
struct Source {
    density: DensityMatrix,
    spec: Option<FamilySpec>,
    x: Option<XStateParams>,
}

fn family_spec_from_args(args: &StateArgs) -> Result<Option<FamilySpec>, CliError> {
    let Some(text) = &args.family else {
        if !args.params.is_empty() || args.theta.is_some() {
            return Err(CliError::Usage("--param and --theta need --family".into()));
        }
        return Ok(None);
    };
    let mut spec = parse_family_spec(text).map_err(usage)?;
    let mut extra: Vec<String> = args.params.clone();
    if let Some(theta) = &args.theta {
        extra.push(format!("theta={theta}"));
    }
    for item in &extra {
        let (key, value) = parse_assignment(item).map_err(usage)?;
        spec = spec.with(&key, value);
    }
    Ok(Some(spec))
}

fn source_from_spec(spec: FamilySpec, tol: &Tolerances) -> Result<Source, Error> {
    let family = Family::from_spec(&spec)?;
    Ok(Source {
        density: family.density(tol)?,
        x: Some(family.x_params()),
        spec: Some(spec),
    })
}

fn load_source(args: &StateArgs, tol: &Tolerances) -> Result<Source, CliError> {
    if let Some(spec) = family_spec_from_args(args)? {
        return source_from_spec(spec, tol).map_err(usage);
    }
    let Some(path) = &args.state else {
        return Err(CliError::Usage(
            "one of --state or --family is required".into(),
        ));
    };
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::StateFile(Error::Parse(format!("{}: {e}", path.display()))))?;
    let file = parse_state_json(&text).map_err(CliError::StateFile)?;
    let loaded = file.load(tol).map_err(CliError::StateFile)?;
    let x = match loaded.family {
        Some(f) => Some(f.x_params()),
        None => XStateParams::from_pauli(&to_pauli(&loaded.density), tol.psd),
    };
    let spec = match file {
        steerkit::input::StateFile::Family(spec) => Some(spec),
        _ => None,
    };
    Ok(Source {
        density: loaded.density,
        spec,
        x,
    })
}

fn input_echo(args: &StateArgs, src: Option<&Source>, common: &CommonArgs) -> Value {
    json!({
        "state": args.state.as_ref().map(|p| p.display().to_string()),
        "family": src.and_then(|s| s.spec.clone()),
        "x_state": src.and_then(|s| s.x),
        "direction": format!("{:?}", common.direction),
        "method": method_name(common.method),
        "seed": common.seed,
    })
}

fn envelope(command: &str, input: Value, s: &Settings) -> Map<String, Value> {
    let mut doc = Map::new();
    doc.insert("command".into(), json!(command));
    doc.insert("version".into(), json!(VERSION));
    doc.insert("input".into(), input);
    doc.insert("tolerances".into(), json!(s.tol));
    doc.insert("optimizer".into(), json!(s.cfg));
    doc
}

/// Steerability of a state in one direction under the requested method.
fn steer_one(
    density: &DensityMatrix,
    x: Option<&XStateParams>,
    dir: Direction,
    s: &Settings,
) -> Result<SteeringResult, CliError> {
    match s.method {
        MethodArg::Analytic => {
            let x =
                x.ok_or_else(|| CliError::Usage("--method analytic needs an X-state".into()))?;
            steerability_x_analytic(x, dir, &s.tol).map_err(compute)
        }
        MethodArg::Numeric => maximize_steerability(density, dir, &s.cfg, &s.tol).map_err(compute),
        MethodArg::Auto => {
            if let Some(x) = x {
                let d = x_derived(x, dir, &s.tol).map_err(compute)?;
                if d.t3.abs() <= s.tol.t3_zero {
                    return steerability_x_analytic(x, dir, &s.tol).map_err(compute);
                }
            }
            maximize_steerability(density, dir, &s.cfg, &s.tol).map_err(compute)
        }
    }
}

fn result_json(r: &SteeringResult) -> Value {
    json!({
        "direction": r.direction,
        "s": r.s,
        "steerable": r.steerable(),
        "method": r.method,
        "angles": r.angles,
        "deltas": r.deltas,
        "objective_at_opt": r.objective_at_opt,
    })
}

fn insert_per_direction(doc: &mut Map<String, Value>, dirs: &[Direction], values: Vec<Value>) {
    if dirs.len() == 1 {
        if let Value::Object(fields) = values.into_iter().next().unwrap_or(Value::Null) {
            doc.extend(fields);
        }
    } else {
        for (d, v) in dirs.iter().zip(values) {
            doc.insert(d.to_string(), v);
        }
    }
}

fn render(doc: Map<String, Value>) -> String {
    let mut text = serde_json::to_string_pretty(&Value::Object(doc)).unwrap_or_default();
    text.push('\n');
    text
}

pub fn steer(cmd: &StateCmd) -> Result<String, CliError> {
    let s = settings(&cmd.common)?;
    let src = load_source(&cmd.state, &s.tol)?;
    let results = s
        .directions
        .iter()
        .map(|&d| steer_one(&src.density, src.x.as_ref(), d, &s))
        .collect::<Result<Vec<_>, _>>()?;
    if cmd.common.output == Some(OutputArg::Csv) {
        let header = [
            "direction",
            "s",
            "method",
            "alpha0",
            "beta0",
            "alpha1",
            "beta1",
            "objective_at_opt",
        ];
        let mut csv = Csv::new(&header.map(String::from));
        for r in &results {
            let mut row = vec![r.direction.to_string(), fmt_num(r.s), method_label(r)];
            row.extend(r.angles.iter().map(|a| fmt_num(*a)));
            row.push(fmt_num(r.objective_at_opt));
            csv.row(&row);
        }
        return Ok(csv.finish());
    }
    let mut doc = envelope("steer", input_echo(&cmd.state, Some(&src), &cmd.common), &s);
    insert_per_direction(
        &mut doc,
        &s.directions,
        results.iter().map(result_json).collect(),
    );
    Ok(render(doc))
}

fn method_label(r: &SteeringResult) -> String {
    serde_json::to_value(r.method)
        .ok()
        .and_then(|v| v.as_str().map(String::from))
        .unwrap_or_default()
}

pub fn chsh(cmd: &StateCmd) -> Result<String, CliError> {
    let s = settings(&cmd.common)?;
    let src = load_source(&cmd.state, &s.tol)?;
    let p = to_pauli(&src.density);
    let n = chsh_max(&p);
    let tau = sym3_eigenvalues(&(p.t.transpose() * p.t));
    if cmd.common.output == Some(OutputArg::Csv) {
        let mut csv = Csv::new(&["n".into(), "tau1".into(), "tau2".into(), "tau3".into()]);
        csv.row(&[
            fmt_num(n),
            fmt_num(tau[0]),
            fmt_num(tau[1]),
            fmt_num(tau[2]),
        ]);
        return Ok(csv.finish());
    }
    let mut doc = envelope("chsh", input_echo(&cmd.state, Some(&src), &cmd.common), &s);
    doc.insert("n".into(), json!(n));
    doc.insert("tau".into(), json!(tau));
    doc.insert("violates_chsh".into(), json!(n > 2.0));
    Ok(render(doc))
}

fn require_x(src: &Source, what: &str) -> Result<XStateParams, CliError> {
    src.x
        .ok_or_else(|| CliError::Usage(format!("{what} is defined for X-states only")))
}

pub fn radius(cmd: &StateCmd) -> Result<String, CliError> {
    let s = settings(&cmd.common)?;
    let src = load_source(&cmd.state, &s.tol)?;
    let x = require_x(&src, "the steering radius")?;
    let results = s
        .directions
        .iter()
        .map(|&d| steering_radius(&x, d, &s.cfg, &s.tol).map_err(compute))
        .collect::<Result<Vec<_>, _>>()?;
    if cmd.common.output == Some(OutputArg::Csv) {
        let header = ["direction", "radius", "branch", "r_xy", "r_xz", "r_yz"];
        let mut csv = Csv::new(&header.map(String::from));
        for (d, r) in s.directions.iter().zip(&results) {
            let branch = json!(r.branch).as_str().unwrap_or_default().to_string();
            let mut row = vec![d.to_string(), fmt_num(r.radius), branch];
            row.extend(r.per_branch.iter().map(|v| fmt_num(*v)));
            csv.row(&row);
        }
        return Ok(csv.finish());
    }
    let mut doc = envelope(
        "radius",
        input_echo(&cmd.state, Some(&src), &cmd.common),
        &s,
    );
    let values = s
        .directions
        .iter()
        .zip(&results)
        .map(|(d, r)| {
            let mut v = json!(r);
            v["direction"] = json!(d);
            v
        })
        .collect();
    insert_per_direction(&mut doc, &s.directions, values);
    Ok(render(doc))
}

pub fn ellipsoid(cmd: &StateCmd) -> Result<String, CliError> {
    let s = settings(&cmd.common)?;
    let src = load_source(&cmd.state, &s.tol)?;
    let x = require_x(&src, "the steering ellipsoid")?;
    let results = s
        .directions
        .iter()
        .map(|&d| steering_ellipsoid(&x, d, &s.tol).map_err(compute))
        .collect::<Result<Vec<_>, _>>()?;
    if cmd.common.output == Some(OutputArg::Csv) {
        let mut csv = Csv::new(&["direction".into(), "center_z".into(), "volume".into()]);
        for (d, r) in s.directions.iter().zip(&results) {
            csv.row(&[d.to_string(), fmt_num(r.center_z), fmt_num(r.volume)]);
        }
        return Ok(csv.finish());
    }
    let mut doc = envelope(
        "ellipsoid",
        input_echo(&cmd.state, Some(&src), &cmd.common),
        &s,
    );
    let values = s
        .directions
        .iter()
        .zip(&results)
        .map(|(d, r)| {
            let mut v = json!(r);
            v["direction"] = json!(d);
            v
        })
        .collect();
    insert_per_direction(&mut doc, &s.directions, values);
    Ok(render(doc))
}

/// Cartesian product of the grids, first grid varying slowest.
fn grid_points(grids: &[GridSpec]) -> Result<Vec<Vec<f64>>, CliError> {
    let mut total: usize = 1;
    for g in grids {
        total = total
            .checked_mul(g.len())
            .filter(|t| *t <= steerkit::input::MAX_GRID_POINTS)
            .ok_or_else(|| CliError::Usage("grid product is too large".into()))?;
    }
    let mut points = vec![Vec::new()];
    for g in grids {
        let axis = g.points();
        points = points
            .into_iter()
            .flat_map(|prefix| {
                axis.iter().map(move |v| {
                    let mut p = prefix.clone();
                    p.push(*v);
                    p
                })
            })
            .collect();
    }
    Ok(points)
}

/// Outcome at one sweep point and direction: the result or an error code.
type PointResult = Result<SteeringResult, String>;

fn sweep_setup(cmd: &SweepCmd) -> Result<(Settings, FamilySpec, Vec<GridSpec>), CliError> {
    let s = settings(&cmd.common)?;
    let base = match family_spec_from_args(&cmd.state)? {
        Some(spec) => spec,
        None => match &cmd.state.state {
            Some(_) => load_source(&cmd.state, &s.tol)?
                .spec
                .ok_or_else(|| CliError::Usage("sweeps need a family state".into()))?,
            None => return Err(CliError::Usage("sweeps need --family".into())),
        },
    };
    let grids = cmd
        .grids
        .iter()
        .map(|g| parse_grid_spec(g).map_err(usage))
        .collect::<Result<Vec<_>, _>>()?;
    for (i, g) in grids.iter().enumerate() {
        if grids[..i].iter().any(|h| h.key == g.key) {
            return Err(CliError::Usage(format!("grid `{}` given twice", g.key)));
        }
    }
    // catch a bad family name or parameter key once instead of on every row
    let mut probe = base.clone();
    for g in &grids {
        probe = probe.with(&g.key, g.lo);
    }
    if let Err(e @ (Error::UnknownFamily(_) | Error::Parse(_) | Error::MissingParam(_))) =
        Family::from_spec(&probe)
    {
        return Err(usage(e));
    }
    Ok((s, base, grids))
}

fn evaluate_point(
    base: &FamilySpec,
    grids: &[GridSpec],
    point: &[f64],
    dirs: &[Direction],
    s: &Settings,
) -> Vec<PointResult> {
    let mut spec = base.clone();
    for (g, v) in grids.iter().zip(point) {
        spec = spec.with(&g.key, *v);
    }
    let src = match source_from_spec(spec, &s.tol) {
        Ok(src) => src,
        Err(e) => return dirs.iter().map(|_| Err(e.code().to_string())).collect(),
    };
    dirs.iter()
        .map(|&d| {
            steer_one(&src.density, src.x.as_ref(), d, s).map_err(|e| match e {
                CliError::Usage(_) => "InvalidArgument".to_string(),
                CliError::StateFile(e) | CliError::Compute(e) => e.code().to_string(),
            })
        })
        .collect()
}

fn s_field(r: &PointResult) -> String {
    fmt_opt(r.as_ref().ok().map(|r| r.s))
}

fn method_field(results: &[PointResult]) -> String {
    let mut labels: Vec<String> = Vec::new();
    for r in results {
        let label = match r {
            Ok(r) => method_label(r),
            Err(code) => code.clone(),
        };
        if !labels.contains(&label) {
            labels.push(label);
        }
    }
    labels.join("|")
}

/// I: both directions steer, II: only AtoB, III: only BtoA, IV: neither.
fn region_label(a2b: &PointResult, b2a: &PointResult) -> String {
    match (a2b, b2a) {
        (Ok(a), Ok(b)) => match (a.steerable(), b.steerable()) {
            (true, true) => "I",
            (true, false) => "II",
            (false, true) => "III",
            (false, false) => "IV",
        }
        .to_string(),
        _ => String::new(),
    }
}

fn point_json(
    grids: &[GridSpec],
    point: &[f64],
    dirs: &[Direction],
    results: &[PointResult],
) -> Value {
    let mut obj = Map::new();
    for (g, v) in grids.iter().zip(point) {
        obj.insert(g.key.clone(), json!(v));
    }
    for (d, r) in dirs.iter().zip(results) {
        let v = match r {
            Ok(r) => result_json(r),
            Err(code) => json!({ "error": code }),
        };
        obj.insert(d.to_string(), v);
    }
    Value::Object(obj)
}

fn run_sweep(cmd: &SweepCmd, command: &str, dirs: Vec<Direction>) -> Result<String, CliError> {
    let (mut s, base, grids) = sweep_setup(cmd)?;
    s.directions = dirs;
    let points = grid_points(&grids)?;
    let results: Vec<Vec<PointResult>> = points
        .par_iter()
        .map(|p| evaluate_point(&base, &grids, p, &s.directions, &s))
        .collect();

    if cmd.common.output.unwrap_or(OutputArg::Csv) == OutputArg::Csv {
        let mut header: Vec<String> = grids.iter().map(|g| g.key.clone()).collect();
        let both = s.directions.len() == 2;
        if command == "asym" {
            header.extend(["s_a2b".into(), "s_b2a".into()]);
        } else if both {
            header.extend([
                "s_a2b".into(),
                "s_b2a".into(),
                "region".into(),
                "method".into(),
            ]);
        } else {
            header.extend(["s".into(), "method".into()]);
        }
        let mut csv = Csv::new(&header);
        for (p, r) in points.iter().zip(&results) {
            let mut row: Vec<String> = p.iter().map(|v| fmt_num(*v)).collect();
            row.extend(r.iter().map(s_field));
            if command != "asym" {
                if both {
                    row.push(region_label(&r[0], &r[1]));
                }
                row.push(method_field(r));
            }
            csv.row(&row);
        }
        return Ok(csv.finish());
    }
    let mut echo = input_echo(&cmd.state, None, &cmd.common);
    echo["family"] = json!(base);
    echo["grid"] = json!(grids);
    let mut doc = envelope(command, echo, &s);
    let rows: Vec<Value> = points
        .iter()
        .zip(&results)
        .map(|(p, r)| point_json(&grids, p, &s.directions, r))
        .collect();
    doc.insert("points".into(), Value::Array(rows));
    Ok(render(doc))
}

pub fn asym(cmd: &SweepCmd) -> Result<String, CliError> {
    if cmd.grids.len() != 1 {
        return Err(CliError::Usage("asym takes exactly one --grid".into()));
    }
    run_sweep(cmd, "asym", Direction::BOTH.to_vec())
}

pub fn sweep(cmd: &SweepCmd) -> Result<String, CliError> {
    let dirs = settings(&cmd.common)?.directions;
    run_sweep(cmd, "sweep", dirs)
}

pub fn region(cmd: &RegionCmd) -> Result<String, CliError> {
    let s = settings(&cmd.common)?;
    if s.directions.len() != 1 {
        return Err(CliError::Usage(
            "region scans one direction at a time".into(),
        ));
    }
    if cmd.samples == 0 {
        return Err(CliError::Usage("--samples must be at least 1".into()));
    }
    let sampler = RegionSampler {
        direction: s.directions[0],
        ..RegionSampler::new(cmd.samples, cmd.common.seed)
    };
    // the seed drives sampling; the optimizer itself runs unjittered
    let cfg = OptimizerConfig { seed: 0, ..s.cfg };
    let samples = region_scan(&sampler, &cfg, &s.tol).map_err(compute)?;

    if cmd.common.output.unwrap_or(OutputArg::Csv) == OutputArg::Csv {
        let header = ["n", "s", "a3", "b3", "c1", "c2", "c3", "verdict"];
        let mut csv = Csv::new(&header.map(String::from));
        for x in &samples {
            let p = &x.params;
            let verdict = json!(x.verdict).as_str().unwrap_or_default().to_string();
            csv.row(&[
                fmt_num(x.n_value),
                fmt_num(x.s_value),
                fmt_num(p.a3),
                fmt_num(p.b3),
                fmt_num(p.c1),
                fmt_num(p.c2),
                fmt_num(p.c3),
                verdict,
            ]);
        }
        return Ok(csv.finish());
    }
    let violations = samples
        .iter()
        .filter(|x| !corollary_bounds(x).upper_ok)
        .count();
    let mut doc = envelope(
        "region",
        json!({ "samples": cmd.samples, "seed": cmd.common.seed, "direction": sampler.direction, "mix": sampler.mix }),
        &s,
    );
    doc.insert(
        "summary".into(),
        json!({
            "count": samples.len(),
            "upper_bound_violations": violations,
            "n_above_2_with_zero_s": samples.iter().filter(|x| x.n_value > 2.0 && x.s_value <= 0.0).count(),
        }),
    );
    doc.insert("samples".into(), json!(samples));
    Ok(render(doc))
}
