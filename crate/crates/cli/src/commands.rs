use std::fs;
use std::io::{self, Write};
use std::path::Path;

use davies_gap::sweep::format_value;
use davies_gap::{
    analyze, build_davies_with_limit, evolve_and_track, gibbs, load_system, run_sweep, to_csv, AnalysisOptions,
    CMatrix, Complex64, Error, ModelKind, ModelParams, SweepConfig, SystemSpec, DEFAULT_DENSE_LIMIT,
};
use serde_json::{json, Map, Value};

use crate::error::CliError;
use crate::{BlocksArgs, BoundsArgs, EvolveArgs, ExactArgs, ExampleArgs, Format, InitialState, InstanceArgs, SweepArgs};

const DENSE_LIMIT_VAR: &str = "DAVIES_DENSE_LIMIT";

fn dense_limit() -> Result<usize, CliError> {
    match std::env::var(DENSE_LIMIT_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{DENSE_LIMIT_VAR} must be a non-negative integer, got '{v}'"))),
        Err(std::env::VarError::NotPresent) => Ok(DEFAULT_DENSE_LIMIT),
        Err(e) => Err(CliError::Usage(format!("{DENSE_LIMIT_VAR}: {e}"))),
    }
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), CliError> {
    match output {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Io {
            path: Some(p.to_path_buf()),
            source,
        }),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| CliError::Io { path: None, source })
        }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types always serialize")
}

/// `quantity,value` lines for the scalar fields of a JSON object.
fn scalar_csv(v: &Value) -> String {
    let mut out = String::from("quantity,value\n");
    if let Value::Object(map) = v {
        for (k, x) in map {
            match x {
                Value::Number(n) if n.is_f64() => out.push_str(&format!("{k},{}\n", format_value(n.as_f64()))),
                Value::Number(n) => out.push_str(&format!("{k},{n}\n")),
                Value::Null => out.push_str(&format!("{k},\n")),
                _ => {}
            }
        }
    }
    out
}

fn model_kind(name: &str) -> Result<ModelKind, CliError> {
    name.parse().map_err(|e: Error| CliError::Usage(e.to_string()))
}

fn load_instance(a: &InstanceArgs) -> Result<SystemSpec, CliError> {
    if let Some(path) = &a.input {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io {
            path: Some(path.clone()),
            source,
        })?;
        let spec = load_system(&text)?;
        return Ok(match a.beta {
            Some(beta) => SystemSpec::new(
                spec.energies().to_vec(),
                spec.couplings().to_vec(),
                beta,
                spec.bath().clone(),
            )?,
            None => spec,
        });
    }
    let name = a
        .example
        .as_deref()
        .ok_or_else(|| CliError::Usage("one of --example or --input is required".into()))?;
    let params = ModelParams {
        g: a.g.unwrap_or(0.0),
        ..ModelParams::new(
            model_kind(name)?,
            a.size.unwrap_or(8),
            a.gamma.unwrap_or(1.0),
            a.k.or(a.beta).unwrap_or(1.0),
        )
    };
    Ok(params.build()?)
}

pub fn example(a: &ExampleArgs) -> Result<(), CliError> {
    let params = ModelParams {
        g: a.model.g,
        ..ModelParams::new(model_kind(&a.name)?, a.model.size, a.model.gamma, a.model.k)
    };
    let spec = params.build()?;
    emit(a.out.output.as_deref(), &pretty(&spec.to_document()))
}

pub fn bounds(a: &BoundsArgs) -> Result<(), CliError> {
    let spec = load_instance(&a.instance)?;
    let base = if a.no_oracle {
        AnalysisOptions::bounds_only()
    } else {
        AnalysisOptions::default()
    };
    let opts = AnalysisOptions {
        dense_limit: dense_limit()?,
        epsilon: a.epsilon,
        ..base
    };
    if !(a.epsilon > 0.0 && a.epsilon < 1.0) {
        return Err(Error::InvalidArguments(format!("epsilon must lie in (0, 1), got {}", a.epsilon)).into());
    }
    let report = to_value(&analyze(&spec, &opts)?.report);
    let text = match a.format {
        Format::Json => pretty(&report),
        Format::Csv => scalar_csv(&report),
    };
    emit(a.out.output.as_deref(), &text)
}

pub fn exact(a: &ExactArgs) -> Result<(), CliError> {
    let spec = load_instance(&a.instance)?;
    let limit = dense_limit()?;
    if spec.dim() > limit {
        return Err(Error::DimensionOverflow { dim: spec.dim(), limit }.into());
    }
    let opts = AnalysisOptions {
        bounds: false,
        dense_oracle: true,
        dense_limit: limit,
        ..AnalysisOptions::default()
    };
    let r = analyze(&spec, &opts)?.report;
    let blocks: Vec<Value> = r
        .blocks
        .iter()
        .map(|b| json!({ "nu": b.nu, "size": b.size, "exact_gap": b.exact_gap }))
        .collect();
    let report = json!({
        "dim": r.dim,
        "beta": r.beta,
        "sigma_min": r.sigma_min,
        "lambda_exact_dense": r.lambda_exact_dense,
        "lambda_exact": r.lambda_exact,
        "lambda_cl_exact": r.lambda_cl_exact,
        "lambda_qm_exact": r.lambda_qm_exact,
        "detailed_balance_residual": r.detailed_balance_residual,
        "blocks": blocks,
        "failures": r.failures,
    });
    let text = match a.format {
        Format::Json => pretty(&report),
        Format::Csv => scalar_csv(&report),
    };
    emit(a.out.output.as_deref(), &text)
}

pub fn blocks(a: &BlocksArgs) -> Result<(), CliError> {
    let spec = load_instance(&a.instance)?;
    let an = analyze(&spec, &AnalysisOptions::bounds_only())?;
    let report = json!({
        "dim": spec.dim(),
        "beta": spec.beta(),
        "sigma": an.weights.sigma,
        "index": to_value(&an.index),
        "blocks": to_value(&an.blocks),
        "graphs": to_value(&an.graphs),
        "trees": to_value(&an.trees),
    });
    emit(a.out.output.as_deref(), &pretty(&report))
}

/// Comma-separated integers or inclusive ranges `lo:hi[:step]`.
pub fn parse_sizes(s: &str) -> Result<Vec<usize>, CliError> {
    let bad = || CliError::Usage(format!("invalid size list '{s}'"));
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let parts: Vec<&str> = item.split(':').collect();
        let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
        match parts.as_slice() {
            [v] => out.push(num(v)?),
            [lo, hi] | [lo, hi, _] => {
                let step = if parts.len() == 3 { num(parts[2])? } else { 1 };
                if step == 0 {
                    return Err(bad());
                }
                out.extend((num(lo)?..=num(hi)?).step_by(step));
            }
            _ => return Err(bad()),
        }
    }
    Ok(out)
}

pub fn parse_floats(s: &str, what: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| CliError::Usage(format!("invalid {what} '{t}'")))
        })
        .collect()
}

pub fn sweep(a: &SweepArgs) -> Result<(), CliError> {
    let cfg = SweepConfig {
        g: a.g,
        epsilon: a.epsilon,
        bounds: !a.no_bounds,
        block_oracles: !a.no_oracle,
        dense_oracle: a.dense_oracle && !a.no_oracle,
        dense_limit: dense_limit()?,
        ..SweepConfig::new(
            model_kind(&a.example)?,
            parse_sizes(&a.size)?,
            parse_floats(&a.beta, "inverse temperature")?,
            a.gamma,
        )
    };
    let rows = run_sweep(&cfg)?;
    let text = match a.format {
        Format::Csv => to_csv(&rows),
        Format::Json => pretty(&to_value(&rows)),
    };
    emit(a.out.output.as_deref(), &text)
}

fn initial_state(choice: InitialState, sigma: &[f64]) -> CMatrix {
    let d = sigma.len();
    let pick = |better: fn(f64, f64) -> bool| {
        (0..d).fold(0, |best, k| if better(sigma[k], sigma[best]) { k } else { best })
    };
    let projector = |k: usize| CMatrix::from_fn(d, d, |a, b| Complex64::new(f64::from(u8::from(a == k && b == k)), 0.0));
    match choice {
        InitialState::Worst => projector(pick(|x, y| x < y)),
        InitialState::Ground => projector(pick(|x, y| x > y)),
        InitialState::Sigma => CMatrix::from_fn(d, d, |a, b| Complex64::new(if a == b { sigma[a] } else { 0.0 }, 0.0)),
    }
}

pub fn evolve(a: &EvolveArgs) -> Result<(), CliError> {
    let spec = load_instance(&a.instance)?;
    let mut times = parse_floats(&a.times, "time")?;
    if times.is_empty() {
        return Err(Error::InvalidArguments("time list is empty".into()).into());
    }
    times.sort_by(f64::total_cmp);
    let sop = build_davies_with_limit(&spec, dense_limit()?)?;
    let w = gibbs(&spec);
    let rho0 = initial_state(a.rho0, &w.sigma);
    let points = evolve_and_track(&sop, &rho0, &w, &times)?;
    let lambda = analyze(&spec, &AnalysisOptions::bounds_only())?.report.lambda_lower;
    let envelope = |t: f64| lambda.map(|l| w.sigma_min.recip().sqrt() * (-l * t).exp());
    let text = match a.format {
        Format::Csv => {
            let mut out = String::from("t,trace_distance,chi2,envelope\n");
            for p in &points {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    format_value(Some(p.time)),
                    format_value(Some(p.trace_distance)),
                    format_value(Some(p.chi2)),
                    format_value(envelope(p.time))
                ));
            }
            out
        }
        Format::Json => {
            let rows: Vec<Value> = points
                .iter()
                .map(|p| {
                    let mut m = Map::new();
                    m.insert("t".into(), json!(p.time));
                    m.insert("trace_distance".into(), json!(p.trace_distance));
                    m.insert("chi2".into(), json!(p.chi2));
                    m.insert("envelope".into(), json!(envelope(p.time)));
                    Value::Object(m)
                })
                .collect();
            pretty(&json!({ "lambda_lower": lambda, "sigma_min": w.sigma_min, "points": rows }))
        }
    };
    emit(a.out.output.as_deref(), &text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_lists_and_ranges() {
        assert_eq!(parse_sizes("4,8, 16").unwrap(), vec![4, 8, 16]);
        assert_eq!(parse_sizes("4:7").unwrap(), vec![4, 5, 6, 7]);
        assert_eq!(parse_sizes("4:12:4,20").unwrap(), vec![4, 8, 12, 20]);
        assert!(parse_sizes("").unwrap().is_empty());
        assert!(parse_sizes("4:x").is_err());
        assert!(parse_sizes("4:8:0").is_err());
    }

    #[test]
    fn initial_states_are_normalized() {
        let sigma = [0.5, 0.3, 0.2];
        let worst = initial_state(InitialState::Worst, &sigma);
        assert_eq!(worst[(2, 2)].re, 1.0);
        let ground = initial_state(InitialState::Ground, &sigma);
        assert_eq!(ground[(0, 0)].re, 1.0);
        let s = initial_state(InitialState::Sigma, &sigma);
        assert!((s.trace().re - 1.0).abs() < 1e-15);
    }
}
