//! Builtin systems. Each constructor assembles a [`SystemDefinition`] from
//! expression strings, so builtins go through the same parser and
//! validation as user files.
//!
//! Constructors panic on parameters outside their documented ranges; use
//! [`by_name`] for validated construction from user input.

use std::collections::BTreeMap;

use super::{SystemDefinition, SystemSpec};
use crate::dynamics::TangentState;
use crate::error::{Error, Result};

pub const NAMES: [&str; 9] = [
    "se2_knife",
    "se2_damped",
    "rolling_disk",
    "chaplygin",
    "offset_sleigh",
    "nonexistence_demo",
    "nonuniqueness_demo",
    "integrable_demo",
    "free_particle",
];

/// `u = −m θ̇ (cos θ ẋ + sin θ ẏ)`.
const KNIFE_LAW: &str = "-m*theta_dot*(cos(theta)*x_dot + sin(theta)*y_dot)";

fn strings(rows: &[&[&str]]) -> Vec<Vec<String>> {
    rows.iter().map(|r| r.iter().map(|s| s.to_string()).collect()).collect()
}

fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn build(def: SystemDefinition) -> SystemSpec {
    SystemSpec::from_definition(&def).expect("builtin definitions are valid")
}

fn positive(name: &str, value: f64) {
    assert!(value > 0.0 && value.is_finite(), "{name} must be positive, got {value}");
}

fn planar(name: &str, m: f64, i: f64, inputs: &[&[&str]], laws: &[&[&str]]) -> SystemDefinition {
    positive("m", m);
    positive("I", i);
    SystemDefinition {
        name: Some(name.into()),
        dim: 3,
        coordinates: vec!["x".into(), "y".into(), "theta".into()],
        parameters: params(&[("m", m), ("I", i)]),
        metric: strings(&[&["m", "0", "0"], &["0", "m", "0"], &["0", "0", "I"]]),
        potential: "0".into(),
        constraints: strings(&[&["sin(theta)", "-cos(theta)", "0"]]),
        inputs: strings(inputs),
        drift_force: None,
        reference_controls: strings(laws),
    }
}

/// Knife edge on the plane, coordinates `(x, y, θ)`, metric `diag(m, m, I)`,
/// constraint `sin θ dx − cos θ dy`, input `sin θ dx − cos θ dy + dθ`.
pub fn se2_knife(m: f64, i: f64) -> SystemSpec {
    build(planar("se2_knife", m, i, &[&["sin(theta)", "-cos(theta)", "1"]], &[&[KNIFE_LAW]]))
}

/// Knife edge with the drift `−(γ/m)(ẋ ∂x + ẏ ∂y)`.
pub fn se2_damped(m: f64, i: f64, gamma: f64) -> SystemSpec {
    assert!(gamma >= 0.0 && gamma.is_finite(), "gamma must be non-negative");
    let mut def = planar("se2_damped", m, i, &[&["sin(theta)", "-cos(theta)", "1"]], &[&[KNIFE_LAW]]);
    def.parameters.insert("gamma".into(), gamma);
    def.drift_force = Some(vec!["-(gamma/m)*x_dot".into(), "-(gamma/m)*y_dot".into(), "0".into()]);
    build(def)
}

/// Symmetric sleigh: the knife edge with input `sin θ dx − cos θ dy`, i.e.
/// the input force is a constraint reaction.
pub fn chaplygin(m: f64, i: f64) -> SystemSpec {
    build(planar("chaplygin", m, i, &[&["sin(theta)", "-cos(theta)", "0"]], &[&[KNIFE_LAW]]))
}

/// Knife edge with input `cos θ dx + sin θ dy`, which lies inside `D`.
pub fn nonexistence_demo(m: f64, i: f64) -> SystemSpec {
    build(planar("nonexistence_demo", m, i, &[&["cos(theta)", "sin(theta)", "0"]], &[]))
}

/// Knife edge with both `sin θ dx − cos θ dy + dθ` and `sin θ dx − cos θ dy`
/// as inputs; the two listed laws each make `D` invariant.
pub fn nonuniqueness_demo(m: f64, i: f64) -> SystemSpec {
    build(planar(
        "nonuniqueness_demo",
        m,
        i,
        &[&["sin(theta)", "-cos(theta)", "1"], &["sin(theta)", "-cos(theta)", "0"]],
        &[&[KNIFE_LAW, "0"], &["0", KNIFE_LAW]],
    ))
}

/// Vertical rolling disk, coordinates `(x, y, θ, φ)` with `θ` the rolling
/// angle and `φ` the heading: `ẋ = θ̇ cos φ`, `ẏ = θ̇ sin φ`.
pub fn rolling_disk(m: f64, i: f64, j: f64) -> SystemSpec {
    positive("m", m);
    positive("I", i);
    positive("J", j);
    build(SystemDefinition {
        name: Some("rolling_disk".into()),
        dim: 4,
        coordinates: vec!["x".into(), "y".into(), "theta".into(), "phi".into()],
        parameters: params(&[("m", m), ("I", i), ("J", j)]),
        metric: strings(&[&["m", "0", "0", "0"], &["0", "m", "0", "0"], &["0", "0", "I", "0"], &["0", "0", "0", "J"]]),
        potential: "0".into(),
        constraints: strings(&[&["1", "0", "-cos(phi)", "0"], &["0", "1", "-sin(phi)", "0"]]),
        inputs: strings(&[&["1", "0", "-cos(phi)", "1"], &["0", "1", "-sin(phi)", "1"]]),
        drift_force: None,
        reference_controls: strings(&[&["-m*theta_dot*phi_dot*sin(phi)", "m*theta_dot*phi_dot*cos(phi)"]]),
    })
}

/// Sleigh whose mass center sits a distance `a` ahead of the blade contact
/// point `(x, y)`; `I` is the inertia about the mass center. Input and
/// constraint are both `sin θ dx − cos θ dy`.
pub fn offset_sleigh(m: f64, i: f64, a: f64) -> SystemSpec {
    positive("m", m);
    positive("I", i);
    assert!(a >= 0.0 && a.is_finite(), "a must be non-negative");
    build(SystemDefinition {
        name: Some("offset_sleigh".into()),
        dim: 3,
        coordinates: vec!["x".into(), "y".into(), "theta".into()],
        parameters: params(&[("m", m), ("I", i), ("a", a)]),
        metric: strings(&[
            &["m", "0", "-m*a*sin(theta)"],
            &["0", "m", "m*a*cos(theta)"],
            &["-m*a*sin(theta)", "m*a*cos(theta)", "I + m*a^2"],
        ]),
        potential: "0".into(),
        constraints: strings(&[&["sin(theta)", "-cos(theta)", "0"]]),
        inputs: strings(&[&["sin(theta)", "-cos(theta)", "0"]]),
        drift_force: None,
        reference_controls: Vec::new(),
    })
}

/// Forward speed `v = cos θ ẋ + sin θ ẏ` and turning rate `ω = θ̇` of a
/// planar sleigh state.
pub fn sleigh_observables(state: &TangentState) -> (f64, f64) {
    let th = state.q[2];
    (th.cos() * state.qdot[0] + th.sin() * state.qdot[1], state.qdot[2])
}

/// Reduced sleigh equations `v̇ = a ω²`, `ω̇ = −(m a / (I + m a²)) v ω`.
pub fn sleigh_reduced_rhs(m: f64, i: f64, a: f64, v: f64, omega: f64) -> (f64, f64) {
    (a * omega * omega, -(m * a / (i + m * a * a)) * v * omega)
}

/// Euclidean `ℝ³` with `D = span{∂x, ∂y}` and input `dz`.
pub fn integrable_demo() -> SystemSpec {
    build(SystemDefinition {
        name: Some("integrable_demo".into()),
        dim: 3,
        coordinates: vec!["x".into(), "y".into(), "z".into()],
        parameters: BTreeMap::new(),
        metric: strings(&[&["1", "0", "0"], &["0", "1", "0"], &["0", "0", "1"]]),
        potential: "0".into(),
        constraints: strings(&[&["0", "0", "1"]]),
        inputs: strings(&[&["0", "0", "1"]]),
        drift_force: None,
        reference_controls: Vec::new(),
    })
}

/// Unconstrained Euclidean `ℝⁿ` without inputs.
pub fn free_particle(n: usize) -> SystemSpec {
    assert!(n >= 1);
    build(SystemDefinition {
        name: Some("free_particle".into()),
        dim: n,
        coordinates: (1..=n).map(|i| format!("x{i}")).collect(),
        parameters: BTreeMap::new(),
        metric: (0..n).map(|i| (0..n).map(|j| if i == j { "1" } else { "0" }.to_string()).collect()).collect(),
        potential: "0".into(),
        constraints: Vec::new(),
        inputs: Vec::new(),
        drift_force: None,
        reference_controls: Vec::new(),
    })
}

/// Default parameter values of a builtin.
pub fn default_parameters(name: &str) -> Option<BTreeMap<String, f64>> {
    let p = match name {
        "se2_knife" | "chaplygin" | "chaplygin_sleigh" | "nonexistence_demo" | "nonuniqueness_demo" => {
            params(&[("m", 1.0), ("I", 1.0)])
        }
        "se2_damped" => params(&[("m", 1.0), ("I", 1.0), ("gamma", 0.5)]),
        "rolling_disk" => params(&[("m", 1.0), ("I", 1.0), ("J", 1.0)]),
        "offset_sleigh" => params(&[("m", 1.0), ("I", 1.0), ("a", 0.3)]),
        "integrable_demo" => BTreeMap::new(),
        "free_particle" => params(&[("n", 2.0)]),
        _ => return None,
    };
    Some(p)
}

fn check_range(name: &str, value: f64, allow_zero: bool) -> Result<()> {
    let ok = value.is_finite() && (value > 0.0 || (allow_zero && value == 0.0));
    if ok {
        Ok(())
    } else {
        let bound = if allow_zero { "non-negative" } else { "positive" };
        Err(Error::InvalidSystem(format!("parameter `{name}` must be {bound}, got {value}")))
    }
}

/// Builtin by name with parameter overrides; unknown names or parameters
/// and out-of-range values are errors.
pub fn by_name(name: &str, overrides: &BTreeMap<String, f64>) -> Result<SystemSpec> {
    let mut p =
        default_parameters(name).ok_or_else(|| Error::InvalidSystem(format!("unknown builtin system `{name}`")))?;
    for (k, v) in overrides {
        match p.get_mut(k) {
            Some(slot) => *slot = *v,
            None => return Err(Error::InvalidSystem(format!("system `{name}` has no parameter `{k}`"))),
        }
    }
    for (k, v) in &p {
        check_range(k, *v, k == "gamma" || k == "a")?;
    }
    let g = |k: &str| p[k];
    Ok(match name {
        "se2_knife" => se2_knife(g("m"), g("I")),
        "se2_damped" => se2_damped(g("m"), g("I"), g("gamma")),
        "rolling_disk" => rolling_disk(g("m"), g("I"), g("J")),
        "chaplygin" | "chaplygin_sleigh" => chaplygin(g("m"), g("I")),
        "offset_sleigh" => offset_sleigh(g("m"), g("I"), g("a")),
        "nonexistence_demo" => nonexistence_demo(g("m"), g("I")),
        "nonuniqueness_demo" => nonuniqueness_demo(g("m"), g("I")),
        "integrable_demo" => integrable_demo(),
        "free_particle" => {
            let n = g("n");
            if n.fract() != 0.0 || n > 20.0 {
                return Err(Error::InvalidSystem(format!(
                    "free_particle dimension must be an integer in 1..=20, got {n}"
                )));
            }
            free_particle(n as usize)
        }
        _ => unreachable!("covered by default_parameters"),
    })
}

/// Default initial state for a system: `q = 0` and a velocity on `D`.
pub fn default_initial_state(system: &SystemSpec) -> TangentState {
    let n = system.dim();
    let qdot = match system.name.as_str() {
        "rolling_disk" => vec![1.0, 0.0, 1.0, 0.5],
        "integrable_demo" => vec![1.0, 0.0, 0.0],
        _ if n == 3 => vec![1.0, 0.0, 1.0],
        _ => {
            let mut v = vec![0.0; n];
            v[0] = 1.0;
            v
        }
    };
    TangentState::new(0.0, vec![0.0; n], qdot)
}
