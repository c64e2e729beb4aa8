//! Execution of experiment configurations.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde_json::{json, Value};

use spcirc::brauer_weingarten::{gram, twirl, BrauerGroup, DENSE_REP_MAX_DIM};
use spcirc::circuit::{apply, CircuitSpec, StateVector};
use spcirc::dense::{read_matrices, write_matrices};
use spcirc::gp_stats::{
    anticoncentration_check, concentration_tail, run_gp_experiment, sample_expectations, sigma_grid, StateSpec,
};
use spcirc::group_sampler::{sample_group, Group, DENSE_SAMPLE_MAX_DIM};
use spcirc::lie_closure::{
    closure_with_limit, prop2_generators, so_chain_generators, theorem1_generators, GeneratorSet,
    DEFAULT_MAX_DIMENSION,
};
use spcirc::moment_propagator::{self, collision_after, depth_sweep, haar_collision};
use spcirc::{Error, Result, RngStream};

use crate::config::*;
use crate::states::parse_state;

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::Writer::from_writer(BufWriter::new(File::create(path)?)))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

fn write_json(path: &Path, v: &Value) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, v)?;
    writeln!(w)?;
    Ok(())
}

pub fn execute(cmd: &Command, dry_run: bool) -> Result<Value> {
    match cmd {
        Command::Closure(c) => closure(c, dry_run),
        Command::Sample(c) => sample(c, dry_run),
        Command::Twirl(c) => twirl_cmd(c, dry_run),
        Command::Gram(c) => gram_cmd(c, dry_run),
        Command::Simulate(c) => simulate(c, dry_run),
        Command::Gp(c) => gp(c, dry_run, true),
        Command::GpSummary(c) => gp(c, dry_run, false),
        Command::Concentration(c) => concentration(c, dry_run),
        Command::Anticoncentration(c) => anticoncentration(c, dry_run),
        Command::AnticoncentrationDepth(c) => depth(c, dry_run),
        Command::Collision(c) => collision(c, dry_run),
    }
}

fn validated() -> Value {
    json!({ "valid": true })
}

fn generator_set(c: &ClosureConfig) -> Result<GeneratorSet> {
    if c.set != SetName::Custom && c.generators.is_some() {
        return Err(Error::Domain("explicit generators are only accepted with --set custom".into()));
    }
    match c.set {
        SetName::Theorem1 => theorem1_generators(c.n),
        SetName::Prop2 => prop2_generators(c.n),
        SetName::SoChain => so_chain_generators(c.n),
        SetName::Custom => {
            let gens = c.generators.clone().ok_or_else(|| Error::Domain("--set custom needs --generators".into()))?;
            GeneratorSet::new(c.n, gens, "custom")
        }
    }
}

fn closure(c: &ClosureConfig, dry_run: bool) -> Result<Value> {
    let set = generator_set(c)?;
    if dry_run {
        return Ok(json!({ "valid": true, "generators": set.len() }));
    }
    let r = closure_with_limit(&set, c.max_dimension.unwrap_or(DEFAULT_MAX_DIMENSION))?;
    Ok(json!({
        "set": set.label(),
        "n": c.n,
        "generators": set.generators(),
        "dimension": r.dimension,
        "classification": r.classification,
        "basis_count": r.basis.len(),
        "iterations": r.iterations,
    }))
}

fn sample(c: &SampleConfig, dry_run: bool) -> Result<Value> {
    if c.d == 0 || (c.group == Group::Sp && c.d % 2 == 1) {
        return Err(Error::Domain(format!("invalid dimension {} for group {:?}", c.d, c.group)));
    }
    if c.d > DENSE_SAMPLE_MAX_DIM {
        return Err(Error::Capacity {
            what: "dense Haar sample (dimension)".into(),
            requested: c.d,
            limit: DENSE_SAMPLE_MAX_DIM,
            partial: None,
        });
    }
    if dry_run {
        return Ok(validated());
    }
    let root = RngStream::new(c.seed, 0);
    let mats = (0..c.count)
        .into_par_iter()
        .map(|i| sample_group(c.group, c.d, &mut root.substream(i as u64)))
        .collect::<Result<Vec<_>>>()?;
    let worst = mats.iter().map(|m| m.unitarity_defect()).fold(0.0, f64::max);
    write_matrices(BufWriter::new(File::create(&c.out)?), &mats)?;
    Ok(json!({
        "path": c.out,
        "format": "SPCM v1",
        "group": c.group,
        "d": c.d,
        "count": c.count,
        "max_unitarity_defect": worst,
    }))
}

fn twirl_cmd(c: &TwirlConfig, dry_run: bool) -> Result<Value> {
    let mats = read_matrices(BufReader::new(File::open(&c.input)?))?;
    let x = mats.into_iter().next().ok_or_else(|| Error::Parse("input file holds no matrix".into()))?;
    let dim = c.d.checked_pow(c.t as u32).unwrap_or(usize::MAX);
    if dim > DENSE_REP_MAX_DIM {
        return Err(Error::Capacity { what: "twirl (d^t)".into(), requested: dim, limit: DENSE_REP_MAX_DIM, partial: None });
    }
    if x.dim() != dim {
        return Err(Error::Dimension(format!("input is {0}x{0}, expected d^t = {dim}", x.dim())));
    }
    if dry_run {
        return Ok(validated());
    }
    let r = twirl(&x, c.t, c.d, c.group)?;
    let coefficients: serde_json::Map<String, Value> =
        r.coefficients.iter().map(|(s, z)| (s.to_string(), json!([z.re, z.im]))).collect();
    let out = json!({ "t": c.t, "d": c.d, "group": c.group, "residual": r.residual, "coefficients": coefficients });
    match &c.out {
        Some(p) => {
            write_json(p, &out)?;
            Ok(json!({ "path": p, "residual": r.residual, "terms": r.coefficients.len() }))
        }
        None => Ok(out),
    }
}

fn gram_cmd(c: &GramConfig, dry_run: bool) -> Result<Value> {
    if c.t == 0 || c.t > spcirc::brauer_weingarten::DEFAULT_MAX_ORDER {
        return Err(Error::Capacity {
            what: "Gram matrix (order t)".into(),
            requested: c.t,
            limit: spcirc::brauer_weingarten::DEFAULT_MAX_ORDER,
            partial: None,
        });
    }
    if c.d == 0 || (c.group == BrauerGroup::Sp && c.d % 2 == 1) {
        return Err(Error::Domain(format!("invalid dimension {} for group {:?}", c.d, c.group)));
    }
    if dry_run {
        return Ok(validated());
    }
    let w = gram(c.t, c.d, c.group)?;
    let rows: Vec<Vec<f64>> = w.entries.row_iter().map(|r| r.iter().copied().collect()).collect();
    Ok(json!({
        "t": c.t,
        "d": c.d,
        "group": c.group,
        "delta": c.group.delta(c.d),
        "diagrams": w.diagrams.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
        "matrix": rows,
        "rank": w.rank,
        "singular": w.is_singular(),
    }))
}

fn simulate(c: &SimulateConfig, dry_run: bool) -> Result<Value> {
    let circ = CircuitSpec::from_json(&fs::read_to_string(&c.circuit)?)?;
    let psi = StateVector::basis(circ.n, c.state)?;
    if dry_run {
        return Ok(json!({ "valid": true, "n": circ.n, "gates": circ.gates.len() }));
    }
    let out = apply(&circ, &psi)?;
    let amps = out.amplitudes();
    let probs = out.probabilities();
    match &c.out {
        Some(p) => {
            let mut w = csv_writer(p)?;
            w.write_record(["index", "re", "im", "probability"]).map_err(csv_err)?;
            for (i, (a, pr)) in amps.iter().zip(&probs).enumerate() {
                w.write_record([i.to_string(), a.re.to_string(), a.im.to_string(), pr.to_string()]).map_err(csv_err)?;
            }
            w.flush()?;
            Ok(json!({ "path": p, "n": circ.n, "gates": circ.gates.len(), "norm": out.norm() }))
        }
        None => Ok(json!({
            "n": circ.n,
            "gates": circ.gates.len(),
            "norm": out.norm(),
            "amplitudes": amps.iter().map(|a| [a.re, a.im]).collect::<Vec<_>>(),
            "probabilities": probs,
        })),
    }
}

fn gp_states(c: &GpConfig) -> Result<Vec<StateSpec>> {
    if c.states.is_empty() {
        return Err(Error::Domain("at least one state is required".into()));
    }
    c.states.iter().map(|s| parse_state(c.n, s)).collect()
}

fn gp(c: &GpConfig, dry_run: bool, write_csv: bool) -> Result<Value> {
    let states = gp_states(c)?;
    if write_csv && c.out.is_none() {
        return Err(Error::Domain("gp writes a CSV and needs --out".into()));
    }
    let rng = RngStream::new(c.seed, 0);
    // Zero samples runs every precondition check without drawing.
    sample_expectations(&states, &c.observable, 0, &rng)?;
    if dry_run {
        return Ok(validated());
    }
    let run = run_gp_experiment(&states, &c.observable, c.samples, &rng)?;
    let summary = serde_json::to_value(&run.summary)?;
    match (&c.out, write_csv) {
        (Some(p), true) => {
            let mut w = csv_writer(p)?;
            w.write_record(["sample_id", "state_id", "value"]).map_err(csv_err)?;
            for (i, row) in run.samples.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    w.write_record([i.to_string(), j.to_string(), v.to_string()]).map_err(csv_err)?;
                }
            }
            w.flush()?;
            Ok(json!({ "path": p, "rows": run.samples.len() * states.len(), "summary": summary }))
        }
        _ => Ok(summary),
    }
}

fn concentration(c: &ConcentrationConfig, dry_run: bool) -> Result<Value> {
    let state = parse_state(c.n, &c.state)?;
    let rng = RngStream::new(c.seed, 0);
    sample_expectations(std::slice::from_ref(&state), &c.observable, 0, &rng)?;
    let thresholds = match &c.thresholds {
        Some(t) => t.clone(),
        None => sigma_grid(&state, c.points, c.step)?,
    };
    if thresholds.is_empty() || thresholds.iter().any(|t| !(*t > 0.0)) {
        return Err(Error::Domain("thresholds must be positive and non-empty".into()));
    }
    if dry_run {
        return Ok(validated());
    }
    let table = concentration_tail(&state, &c.observable, c.samples, &thresholds, &rng)?;
    match &c.out {
        Some(p) => {
            let mut w = csv_writer(p)?;
            w.write_record(["c", "empirical", "gaussian", "moment_bound_t2", "moment_bound_t4"]).map_err(csv_err)?;
            for r in &table.rows {
                w.write_record([r.c, r.empirical, r.gaussian, r.moment_bound_t2, r.moment_bound_t4].map(|v| v.to_string()))
                    .map_err(csv_err)?;
            }
            w.flush()?;
            Ok(json!({
                "path": p,
                "algebra_purity": table.algebra_purity,
                "exact_variance": table.exact_variance,
                "sample_count": table.sample_count,
            }))
        }
        None => Ok(serde_json::to_value(table)?),
    }
}

fn anticoncentration(c: &AnticoncentrationConfig, dry_run: bool) -> Result<Value> {
    if c.alphas.iter().any(|a| !(0.0..=1.0).contains(a)) {
        return Err(Error::Domain("alpha values must lie in [0, 1]".into()));
    }
    StateSpec::basis(c.n, 0)?;
    if dry_run {
        return Ok(validated());
    }
    Ok(serde_json::to_value(anticoncentration_check(c.n, c.samples, &c.alphas, &RngStream::new(c.seed, 0))?)?)
}

fn check_label_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::Domain(format!("brick-layer propagation needs n >= 2, got {n}")));
    }
    if n > moment_propagator::MAX_QUBITS {
        return Err(Error::Capacity {
            what: "label vector (qubits)".into(),
            requested: n,
            limit: moment_propagator::MAX_QUBITS,
            partial: None,
        });
    }
    Ok(())
}

fn depth(c: &DepthConfig, dry_run: bool) -> Result<Value> {
    if c.n_min > c.n_max {
        return Err(Error::Domain(format!("empty range {}..={}", c.n_min, c.n_max)));
    }
    check_label_n(c.n_min)?;
    check_label_n(c.n_max)?;
    if !(c.epsilon > 0.0) || c.max_layers == 0 {
        return Err(Error::Domain("epsilon and max_layers must be positive".into()));
    }
    if dry_run {
        return Ok(validated());
    }
    let sweep = depth_sweep(c.n_min..=c.n_max, c.epsilon, c.max_layers)?;
    match &c.out {
        Some(p) => {
            let mut w = csv_writer(p)?;
            w.write_record(["n", "n_L_star", "z_trace"]).map_err(csv_err)?;
            for r in &sweep.rows {
                let star = r.n_l_star.map_or_else(|| "unreached".to_string(), |l| l.to_string());
                w.write_record([r.n.to_string(), star, serde_json::to_string(&r.z_trace)?]).map_err(csv_err)?;
            }
            w.flush()?;
            Ok(json!({ "path": p, "fit": sweep.fit, "nondecreasing": sweep.nondecreasing }))
        }
        None => Ok(serde_json::to_value(sweep)?),
    }
}

fn collision(c: &CollisionConfig, dry_run: bool) -> Result<Value> {
    check_label_n(c.n)?;
    if dry_run {
        return Ok(validated());
    }
    let z = collision_after(c.n, c.layers)?;
    let zh = haar_collision(c.n);
    Ok(json!({ "n": c.n, "layers": c.layers, "z": z, "z_haar": zh, "deviation": z - zh }))
}
