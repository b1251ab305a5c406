use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reldft_core::functional::{
    gradient_check, h_squared_matrix, minimize_f, random_coefficients, FunctionalError,
};
use reldft_core::lattice::{
    hk_scan, ScanConfig, CONTROL_PERIOD, COUNTEREXAMPLE_DENSITY_TOL, DEFAULT_SMOOTHNESS,
    DEFAULT_WILSON,
};
use reldft_core::model::{
    make_even_tempered, sommerfeld_binding, sommerfeld_energy, validate_channel,
};
use reldft_core::numerics::{NumericsError, DEFAULT_QUADRATURE_NODES};
use reldft_core::observables::{default_grid, energy_from_density, radial_density, virial_report};
use reldft_core::radial::{RadialError, RadialSystem};
use serde_json::{json, Map, Value};

use crate::config::{CommandKind, RunConfig};
use crate::report::{float, Report};
use crate::CliError;

/// Finite-difference step of the gradient check.
pub const GRADIENT_STEP: f64 = 1e-5;
/// Number of random points in the gradient check.
pub const GRADIENT_POINTS: usize = 10;

pub fn run(config: &RunConfig) -> Result<Report, CliError> {
    match config.command {
        CommandKind::Hydrogenic => run_hydrogenic(config),
        CommandKind::Virial => run_virial(config),
        CommandKind::Functional => run_functional(config),
        CommandKind::LatticeProbe => run_lattice_probe(config),
    }
}

fn radial_error(e: RadialError) -> CliError {
    match e {
        RadialError::Model(m) => CliError::Config(m.to_string()),
        other => CliError::Numerical(other.to_string()),
    }
}

fn numerical(e: impl std::fmt::Display) -> CliError {
    CliError::Numerical(e.to_string())
}

fn solve(config: &RunConfig) -> Result<RadialSystem, CliError> {
    let channel = validate_channel(config.kappa).map_err(|e| CliError::Config(e.to_string()))?;
    let basis = make_even_tempered(config.alpha0, config.ratio, config.basis_size, channel)
        .map_err(|e| CliError::Config(e.to_string()))?;
    RadialSystem::solve(basis, config.z, config.constants()).map_err(radial_error)
}

fn note(key: &str, value: Value) -> (String, Value) {
    (key.to_string(), value)
}

fn radial_notes() -> Vec<(String, Value)> {
    vec![note(
        "units",
        json!("hartree atomic units, energies include mc^2"),
    )]
}

fn rows_to_json(columns: &[&str], rows: &[Vec<Value>]) -> Value {
    Value::Array(
        rows.iter()
            .map(|r| {
                let mut m = Map::new();
                for (c, v) in columns.iter().zip(r) {
                    m.insert((*c).to_string(), v.clone());
                }
                Value::Object(m)
            })
            .collect(),
    )
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Number(n) if n.is_f64() => float(n.as_f64().unwrap_or(f64::NAN)),
        Value::Number(n) => n.to_string(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn table(
    notes: Vec<(String, Value)>,
    columns: Vec<&'static str>,
    rows: Vec<Vec<Value>>,
    key: &str,
) -> Report {
    let mut body = Map::new();
    body.insert(key.into(), rows_to_json(&columns, &rows));
    Report {
        notes,
        rows: rows
            .iter()
            .map(|r| r.iter().map(csv_cell).collect())
            .collect(),
        columns,
        body,
    }
}

fn f(v: f64) -> Value {
    // non-finite values have no JSON number form
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

pub fn run_hydrogenic(config: &RunConfig) -> Result<Report, CliError> {
    let sys = solve(config)?;
    let ch = sys.channel();
    let consts = sys.constants;
    let mc2 = consts.rest_energy();
    let mut rows = Vec::new();
    for (k, b) in sys.bound_states().iter().enumerate() {
        let n = sys.principal_of(k);
        let oracle = sommerfeld_energy(config.z, n, ch, &consts).map_err(numerical)?;
        let oracle_binding = sommerfeld_binding(config.z, n, ch, &consts).map_err(numerical)?;
        let binding = b.energy - mc2;
        rows.push(vec![
            Value::String(ch.state_label(n)),
            f(b.energy),
            f(binding),
            f(oracle),
            f(((binding - oracle_binding) / oracle_binding).abs()),
        ]);
    }
    let mut notes = radial_notes();
    notes.push(note(
        "rel_error",
        json!("|E_binding - oracle binding| / |oracle binding|"),
    ));
    Ok(table(
        notes,
        vec![
            "state_label",
            "E_total_au",
            "E_binding_au",
            "E_oracle_au",
            "rel_error",
        ],
        rows,
        "states",
    ))
}

pub fn run_virial(config: &RunConfig) -> Result<Report, CliError> {
    let sys = solve(config)?;
    let grid = default_grid(config.z).map_err(numerical)?;
    let report = virial_report(&sys.spectrum, &sys.blocks, &sys.constants).map_err(numerical)?;
    let mut rows = Vec::new();
    for row in &report {
        let coeffs = sys.coefficients(row.index);
        let profile = radial_density(&coeffs, &sys.basis, &sys.blocks, &grid).map_err(numerical)?;
        let from_density = energy_from_density(&profile, &sys.constants, 1);
        rows.push(vec![
            Value::String(sys.channel().state_label(sys.principal_of(row.state))),
            f(row.energy),
            f(row.virial_energy),
            f(from_density),
            f(row.relative_residual),
            f(((from_density - row.virial_energy) / row.virial_energy).abs()),
        ]);
    }
    let mut notes = radial_notes();
    notes.push(note("quadrature_nodes", json!(DEFAULT_QUADRATURE_NODES)));
    notes.push(note("quadrature_scale", f(1.0 / config.z.max(1.0))));
    Ok(table(
        notes,
        vec![
            "state_label",
            "E_total_au",
            "E_virial_au",
            "E_from_density_au",
            "virial_rel_residual",
            "route_rel_residual",
        ],
        rows,
        "states",
    ))
}

pub fn run_functional(config: &RunConfig) -> Result<Report, CliError> {
    let sys = solve(config)?;
    let sq = h_squared_matrix(&sys.h, &sys.s).map_err(numerical)?;
    let dim = sq.dim();
    let mut seeds = ChaCha8Rng::seed_from_u64(config.seed);
    let init = random_coefficients(dim, seeds.next_u64());
    let min = match minimize_f(&sq, &init, config.tol, config.max_iter) {
        Ok(m) => m,
        Err(FunctionalError::Numerics(NumericsError::NotConverged(best))) => {
            return Err(CliError::Numerical(format!(
                "functional minimizer did not converge in {} iterations; best F = {:.16e}, relative residual = {:.3e} (tolerance {:.3e})",
                best.iterations,
                best.value.max(0.0).sqrt(),
                best.relative_residual,
                config.tol
            )))
        }
        Err(e) => return Err(numerical(e)),
    };
    let mut grad_err = 0.0_f64;
    for _ in 0..GRADIENT_POINTS {
        let c = random_coefficients(dim, seeds.next_u64());
        grad_err = grad_err.max(gradient_check(&c, &sq, GRADIENT_STEP).map_err(numerical)?);
    }
    let ch = sys.channel();
    let oracle =
        sommerfeld_energy(config.z, ch.min_principal(), ch, &sys.constants).map_err(numerical)?;
    let fields = [
        ("min_eig_H", f(sys.spectrum.eigenvalues[0])),
        ("F_min", f(min.f_min)),
        ("ground_oracle", f(oracle)),
        ("minimizer_iterations", json!(min.iterations)),
        ("gradient_check_max_rel_err", f(grad_err)),
    ];
    let mut notes = radial_notes();
    notes.push(note("gradient_step", f(GRADIENT_STEP)));
    notes.push(note("gradient_points", json!(GRADIENT_POINTS)));
    let mut body = Map::new();
    for (k, v) in &fields {
        body.insert((*k).into(), v.clone());
    }
    Ok(Report {
        notes,
        columns: fields.iter().map(|(k, _)| *k).collect(),
        rows: vec![fields.iter().map(|(_, v)| csv_cell(v)).collect()],
        body,
    })
}

pub fn run_lattice_probe(config: &RunConfig) -> Result<Report, CliError> {
    let constants = config.constants();
    let amplitude = config.amplitude * constants.rest_energy();
    let scan_config = ScanConfig {
        seed: config.seed,
        trials: config.trials,
        sites: config.sites,
        amplitude,
        smoothness: DEFAULT_SMOOTHNESS,
        spacing: 1.0,
        wilson: DEFAULT_WILSON,
        constants,
    };
    let scan = hk_scan(&scan_config).map_err(numerical)?;
    let columns = vec![
        "pair_id",
        "potential_distance_mod_const",
        "density_distance",
        "constant_shift_pair",
        "counterexample_flag",
    ];
    let mut rows: Vec<Vec<String>> = scan
        .pairs
        .iter()
        .map(|p| {
            vec![
                p.pair_id.to_string(),
                float(p.verdict.potential_distance_mod_const),
                float(p.verdict.density_distance),
                p.verdict.constant_shift_pair.to_string(),
                p.counterexample.to_string(),
            ]
        })
        .collect();
    rows.push(vec![
        "summary".into(),
        String::new(),
        scan.min_density_distance.map(float).unwrap_or_default(),
        scan.constant_shift_pairs.to_string(),
        scan.counterexamples.to_string(),
    ]);
    let notes = vec![
        note("units", json!("natural units m = c = a = 1 unless --c is given")),
        note("amplitude_absolute", f(amplitude)),
        note("smoothness", json!(DEFAULT_SMOOTHNESS)),
        note("spacing", f(1.0)),
        note("wilson", f(DEFAULT_WILSON)),
        note(
            "control_pairs",
            json!(format!("every pair_id divisible by {CONTROL_PERIOD} is V vs V + amplitude")),
        ),
        note(
            "counterexample_rule",
            json!(format!(
                "potential_distance_mod_const >= {} and density_distance < {COUNTEREXAMPLE_DENSITY_TOL:e}",
                float(0.1 * amplitude)
            )),
        ),
        note(
            "summary_row",
            json!("density_distance = min over non-shift pairs; constant_shift_pair = count of shift pairs; counterexample_flag = count of flagged pairs"),
        ),
    ];
    let scan_value = serde_json::to_value(&scan).map_err(numerical)?;
    let mut body = Map::new();
    if let Value::Object(m) = scan_value {
        body.extend(m);
    }
    Ok(Report {
        notes,
        columns,
        rows,
        body,
    })
}
