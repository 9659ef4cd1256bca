//! Adapter for an external solver reached over HTTP.
//!
//! The presolved model is posted as JSON to `{endpoint}/solve`. A response
//! either carries a variable assignment or a `"pending"` status with a
//! `job_id`, in which case `{endpoint}/jobs/{job_id}` is polled until the
//! time limit runs out. Returned assignments are decoded into a [`Solution`]
//! and always re-checked locally.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use super::{SolveStats, SolverBudget, SolverError, SolverResult};
use crate::builder::build_model;
use crate::model::orientation::IDENTITY;
use crate::model::{
    effective_dims, orientation_set, Axis, Instance, Placement, QuadExpr, QuadraticModel, Solution,
    VarKey, VarKind,
};
use crate::presolve::presolve;

pub const TOKEN_VAR: &str = "BINPACK_REMOTE_TOKEN";

const POLL_INTERVAL: Duration = Duration::from_millis(100);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RemoteError {
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("remote solver did not answer within the time limit")]
    Timeout,
    #[error("malformed response: {0}")]
    Malformed(String),
    #[error("remote solver reports the model infeasible")]
    Infeasible,
    #[error("remote solver error: {0}")]
    Server(String),
}

#[derive(Debug, Deserialize)]
struct Response {
    status: String,
    #[serde(default)]
    assignment: Option<BTreeMap<String, f64>>,
    #[serde(default)]
    job_id: Option<String>,
    #[serde(default)]
    message: Option<String>,
}

#[derive(Debug, Serialize)]
struct WireReal {
    name: String,
    lb: f64,
    ub: f64,
}

/// JSON form of the free part of a model; fixed variables are left out.
pub fn model_to_wire(model: &QuadraticModel) -> Value {
    let name = |id| model.variable(id).key.to_string();
    let expr = |e: &QuadExpr| {
        json!({
            "linear": e.linear.iter().map(|&(v, c)| json!([name(v), c])).collect::<Vec<_>>(),
            "quadratic": e
                .quadratic
                .iter()
                .map(|&(a, b, c)| json!([name(a), name(b), c]))
                .collect::<Vec<_>>(),
            "constant": e.constant,
        })
    };
    let mut binaries = Vec::new();
    let mut reals = Vec::new();
    for (_, var) in model.free_variables() {
        match var.kind {
            VarKind::Binary => binaries.push(var.key.to_string()),
            VarKind::Real { lower, upper } => reals.push(WireReal {
                name: var.key.to_string(),
                lb: lower,
                ub: upper,
            }),
        }
    }
    let constraints: Vec<Value> = model
        .constraints()
        .iter()
        .map(|c| {
            let mut v = expr(&c.expr);
            v["label"] = json!(c.label);
            v["sense"] = json!(c.sense);
            v
        })
        .collect();
    json!({
        "binaries": binaries,
        "reals": reals,
        "constraints": constraints,
        "objective": expr(model.objective()),
    })
}

/// Turns a variable assignment into a solution, filling fixed variables from
/// the model. Assignment and orientation variables must be one-hot.
pub fn decode_assignment(
    instance: &Instance,
    model: &QuadraticModel,
    assignment: &BTreeMap<String, f64>,
) -> Result<Solution, RemoteError> {
    let d = instance.dimensionality();
    let value = |key: VarKey| -> Result<f64, RemoteError> {
        if let Some(id) = model.var(key) {
            if let Some(&b) = model.fixed().get(&id) {
                return Ok(if b { 1.0 } else { 0.0 });
            }
        }
        let v = *assignment
            .get(&key.to_string())
            .ok_or_else(|| RemoteError::Malformed(format!("missing value for {key}")))?;
        if !v.is_finite() {
            return Err(RemoteError::Malformed(format!("{key} is not finite")));
        }
        Ok(v)
    };
    let on = |key| value(key).map(|v| v > 0.5);
    let n = instance.bin_count();
    let bins_used = (0..n)
        .map(|bin| on(VarKey::BinUsed { bin }))
        .collect::<Result<Vec<_>, _>>()?;
    let mut placements = Vec::with_capacity(instance.item_count());
    for (item, it) in instance.items().iter().enumerate() {
        let mut bins = Vec::new();
        for bin in 0..n {
            if on(VarKey::Assign { item, bin })? {
                bins.push(bin);
            }
        }
        let [bin] = bins[..] else {
            return Err(RemoteError::Malformed(format!(
                "item {item} assigned to {} bins",
                bins.len()
            )));
        };
        let choices = orientation_set(it, d);
        let orientation = if choices.is_empty() {
            IDENTITY
        } else {
            let mut active = Vec::new();
            for &k in &choices {
                if on(VarKey::Orient {
                    item,
                    orientation: k,
                })? {
                    active.push(k);
                }
            }
            let [k] = active[..] else {
                return Err(RemoteError::Malformed(format!(
                    "item {item} has {} active orientations",
                    active.len()
                )));
            };
            k
        };
        let extents = effective_dims(it, d, orientation)
            .map_err(|e| RemoteError::Malformed(format!("item {item}: {e}")))?;
        let mut position = [0.0; 3];
        for axis in Axis::ALL.iter().take(d.count()) {
            position[axis.index()] = value(VarKey::Position { axis: *axis, item })?;
        }
        placements.push(Placement {
            bin,
            orientation,
            position,
            extents,
        });
    }
    Ok(Solution::new(placements, bins_used))
}

pub fn solve_remote(
    instance: &Instance,
    budget: &SolverBudget,
    endpoint: &str,
) -> Result<SolverResult, SolverError> {
    budget.validate()?;
    let start = Instant::now();
    let mut model = build_model(instance)?;
    presolve(&mut model, instance)?;
    let request = json!({
        "model": model_to_wire(&model),
        "time_limit": budget.time_limit.as_secs_f64(),
    });
    let assignment = exchange(endpoint, &request, budget.time_limit)?;
    let solution = decode_assignment(instance, &model, &assignment)?;
    let stats = SolveStats {
        backend: "remote".into(),
        iterations: 0,
        wall_time: start.elapsed().as_secs_f64(),
        proven_optimal: false,
        lower_bound: None,
    };
    SolverResult::finalize(instance, vec![solution], stats)
}

fn exchange(
    endpoint: &str,
    request: &Value,
    time_limit: Duration,
) -> Result<BTreeMap<String, f64>, RemoteError> {
    let base = endpoint.trim_end_matches('/');
    let deadline = Instant::now() + time_limit;
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .http_status_as_error(false)
        .timeout_global(Some(time_limit + Duration::from_secs(5)))
        .build()
        .into();
    let token = std::env::var(TOKEN_VAR).ok();
    let bearer = token.map(|t| format!("Bearer {t}"));
    let mut post = agent.post(format!("{base}/solve"));
    if let Some(b) = &bearer {
        post = post.header("Authorization", b);
    }
    let mut response = read(post.send_json(request))?;
    loop {
        match response.status.as_str() {
            "ok" => {
                return response
                    .assignment
                    .ok_or_else(|| RemoteError::Malformed("status ok without assignment".into()))
            }
            "infeasible" => return Err(RemoteError::Infeasible),
            "error" => {
                return Err(RemoteError::Server(
                    response.message.unwrap_or_else(|| "unspecified".into()),
                ))
            }
            "pending" => {
                let job = response
                    .job_id
                    .take()
                    .ok_or_else(|| RemoteError::Malformed("pending without job_id".into()))?;
                if Instant::now() >= deadline {
                    return Err(RemoteError::Timeout);
                }
                std::thread::sleep(POLL_INTERVAL);
                let mut get = agent.get(format!("{base}/jobs/{job}"));
                if let Some(b) = &bearer {
                    get = get.header("Authorization", b);
                }
                response = read(get.call())?;
            }
            other => return Err(RemoteError::Malformed(format!("unknown status `{other}`"))),
        }
    }
}

fn read(
    result: Result<ureq::http::Response<ureq::Body>, ureq::Error>,
) -> Result<Response, RemoteError> {
    let mut response = result.map_err(|e| match e {
        ureq::Error::Timeout(_) => RemoteError::Timeout,
        e => RemoteError::Transport(e.to_string()),
    })?;
    let status = response.status();
    let body = response
        .body_mut()
        .read_to_string()
        .map_err(|e| RemoteError::Transport(e.to_string()))?;
    if !status.is_success() {
        return Err(RemoteError::Server(format!(
            "HTTP {}: {body}",
            status.as_u16()
        )));
    }
    serde_json::from_str(&body).map_err(|e| RemoteError::Malformed(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BinSpec, InstanceSpec, ItemSpec};

    fn instance() -> Instance {
        Instance::new(InstanceSpec {
            dimensionality: 2,
            bins: vec![BinSpec {
                dims: vec![4, 2],
                capacity: None,
            }],
            items: vec![ItemSpec {
                category: 0,
                quantity: 2,
                dims: vec![2, 2],
                weight: 1,
            }],
            associations: Default::default(),
            priority: None,
            incompatible: Vec::new(),
            heavy: Vec::new(),
            center_of_mass: None,
            weights: None,
        })
        .unwrap()
    }

    fn assignment(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
    }

    #[test]
    fn wire_lists_only_free_variables() {
        let inst = instance();
        let mut model = build_model(&inst).unwrap();
        presolve(&mut model, &inst).unwrap();
        let wire = model_to_wire(&model);
        let binaries: Vec<&str> = wire["binaries"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_str().unwrap())
            .collect();
        // a single bin fixes every u
        assert!(binaries.iter().all(|b| !b.starts_with("u_")));
        assert!(binaries.contains(&"v_0"));
        assert_eq!(wire["reals"].as_array().unwrap().len(), 4);
        for c in wire["constraints"].as_array().unwrap() {
            assert!(["<=", "==", ">="].contains(&c["sense"].as_str().unwrap()));
        }
    }

    #[test]
    fn decode_fills_fixed_variables() {
        let inst = instance();
        let mut model = build_model(&inst).unwrap();
        presolve(&mut model, &inst).unwrap();
        // square items own no orientation variables and u is fixed by presolve
        let a = assignment(&[
            ("v_0", 1.0),
            ("x_0", 0.0),
            ("y_0", 0.0),
            ("x_1", 2.0),
            ("y_1", 0.0),
        ]);
        let sol = decode_assignment(&inst, &model, &a).unwrap();
        assert_eq!(sol.placements[1].position, [2.0, 0.0, 0.0]);
        assert_eq!(sol.placements[0].bin, 0);
    }

    #[test]
    fn missing_values_are_malformed() {
        let inst = instance();
        let mut model = build_model(&inst).unwrap();
        presolve(&mut model, &inst).unwrap();
        let err = decode_assignment(&inst, &model, &assignment(&[("v_0", 1.0)])).unwrap_err();
        assert!(matches!(err, RemoteError::Malformed(_)));
    }

    #[test]
    fn unreachable_endpoint_is_transport_error() {
        let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        drop(listener);
        let budget = SolverBudget {
            time_limit: Duration::from_secs(2),
            ..SolverBudget::default()
        };
        let err = solve_remote(&instance(), &budget, &format!("http://{addr}")).unwrap_err();
        assert!(
            matches!(err, SolverError::Remote(RemoteError::Transport(_))),
            "{err}"
        );
    }
}
