//! Browser bindings for the demo page. Every export returns a JSON string;
//! the plain functions below are usable (and tested) natively.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use upsilon_core::contraction::{verify_contraction_sampled, ContractionTriple};
use upsilon_core::engine::{solve_observed, IterationConfig, SolveError, SolveOptions};
use upsilon_core::hammerstein::{
    check_assumption_e, closed_h_formulas, example_initial_point, HammersteinOperator,
    HammersteinProblem,
};
use upsilon_core::order::Upsilon;
use upsilon_core::sampling::ordered_pair;
use upsilon_core::space::{make_quadrature, Grid, GridSpace, QuadratureKind};
use wasm_bindgen::prelude::*;

/// Iterates kept for plotting; later ones are indistinguishable on screen.
const MAX_PLOTTED: usize = 12;

fn operator(alpha: f64, t_end: f64, n: usize) -> Result<HammersteinOperator, String> {
    let problem = HammersteinProblem::paper_example(alpha, t_end).map_err(|e| e.to_string())?;
    let grid = Grid::uniform(t_end, n).map_err(|e| e.to_string())?;
    let rule = make_quadrature(QuadratureKind::default(), t_end).map_err(|e| e.to_string())?;
    HammersteinOperator::new(problem, grid, rule).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct SolveView {
    nodes: Vec<f64>,
    /// `[lower, upper]` for the first sweeps.
    iterates: Vec<[Vec<f64>; 2]>,
    solution: Vec<f64>,
    exact: Vec<f64>,
    steps: Vec<f64>,
    gain_bound: Vec<f64>,
    converged: bool,
    iterations: usize,
    sup_error: f64,
    start_point_substituted: bool,
}

pub fn solve_example_json(alpha: f64, t_end: f64, n: usize) -> Result<String, String> {
    let op = operator(alpha, t_end, n)?;
    let (y0, substituted) = example_initial_point(alpha, op.grid()).map_err(|e| e.to_string())?;
    let u = Upsilon::cyclic_shift(1).map_err(|e| e.to_string())?;
    let triple = ContractionTriple::log();
    let mut iterates = Vec::new();
    let result = solve_observed(
        &GridSpace::default(),
        &op,
        &u,
        y0,
        &IterationConfig::default(),
        &triple,
        SolveOptions { force: true },
        |k, x| {
            if k < MAX_PLOTTED {
                iterates.push([x[0].values().to_vec(), x[1].values().to_vec()]);
            }
        },
    );
    let rep = match result {
        Ok(r) => r,
        Err(SolveError::NotConverged(r)) => *r,
        Err(e) => return Err(e.to_string()),
    };
    let nodes = op.grid().nodes().to_vec();
    let solution = rep.fixed_point[0].values().to_vec();
    let exact: Vec<f64> = nodes.iter().map(|t| alpha * t).collect();
    let sup_error = solution
        .iter()
        .zip(&exact)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let gain_bound = triple
        .gain_bound_sequence(rep.step_history[0], rep.step_history.len() - 1)
        .map_err(|e| e.to_string())?;
    let view = SolveView {
        nodes,
        iterates,
        solution,
        exact,
        steps: rep.step_history,
        gain_bound,
        converged: rep.converged,
        iterations: rep.iterations,
        sup_error,
        start_point_substituted: substituted,
    };
    serde_json::to_string(&view).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct BracketView {
    nodes: Vec<f64>,
    y0: [Vec<f64>; 2],
    h: [Vec<f64>; 2],
    closed: [Vec<f64>; 2],
    passed: bool,
}

pub fn initial_bracket_json(alpha: f64, t_end: f64, n: usize) -> Result<String, String> {
    let op = operator(alpha, t_end, n)?;
    let (y0, _) = example_initial_point(alpha, op.grid()).map_err(|e| e.to_string())?;
    let rep = check_assumption_e(&op, &y0, 0.0).map_err(|e| e.to_string())?;
    let nodes = op.grid().nodes().to_vec();
    let closed: Vec<(f64, f64)> = nodes
        .iter()
        .map(|&t| closed_h_formulas(alpha, t))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let view = BracketView {
        y0: [y0[0].values().to_vec(), y0[1].values().to_vec()],
        h: [rep.h[0].values().to_vec(), rep.h[1].values().to_vec()],
        closed: [
            closed.iter().map(|c| c.0).collect(),
            closed.iter().map(|c| c.1).collect(),
        ],
        passed: rep.passed,
        nodes,
    };
    serde_json::to_string(&view).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct ScatterView {
    /// `(d_k(x, z), d(𝔸x, 𝔸z))` per ordered pair.
    points: Vec<(f64, f64)>,
    violations: usize,
    min_slack: f64,
}

pub fn contraction_scatter_json(
    alpha: f64,
    t_end: f64,
    seed: u64,
    count: usize,
) -> Result<String, String> {
    let op = operator(alpha, t_end, 60)?;
    let u = Upsilon::cyclic_shift(1).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs = (0..count)
        .map(|_| ordered_pair(&mut rng, op.grid(), u.partition(), 1.0, 10.0))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let rep = verify_contraction_sampled(
        &GridSpace::default(),
        &op,
        u.partition(),
        &pairs,
        &ContractionTriple::log(),
        1e-8,
    )
    .map_err(|e| e.to_string())?;
    let view = ScatterView {
        points: rep.slacks.iter().map(|s| (s.d_k, s.d_image)).collect(),
        violations: rep.violations.len(),
        min_slack: rep.min_slack,
    };
    serde_json::to_string(&view).map_err(|e| e.to_string())
}

/// Solves the example and returns grid, first iterates, solution and step
/// history.
#[wasm_bindgen]
pub fn solve_example(alpha: f64, t_end: f64, n: usize) -> Result<String, JsError> {
    solve_example_json(alpha, t_end, n).map_err(|e| JsError::new(&e))
}

/// Start tuple against the numerically and analytically computed `H₁, H₂`.
#[wasm_bindgen]
pub fn initial_bracket(alpha: f64, t_end: f64, n: usize) -> Result<String, JsError> {
    initial_bracket_json(alpha, t_end, n).map_err(|e| JsError::new(&e))
}

/// Image distance against input distance for random ordered pairs.
#[wasm_bindgen]
pub fn contraction_scatter(
    alpha: f64,
    t_end: f64,
    seed: u32,
    count: usize,
) -> Result<String, JsError> {
    contraction_scatter_json(alpha, t_end, u64::from(seed), count).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_view_matches_exact_solution() {
        let v: serde_json::Value =
            serde_json::from_str(&solve_example_json(2.0, 2.0, 40).unwrap()).unwrap();
        assert_eq!(v["converged"], true);
        assert!(v["sup_error"].as_f64().unwrap() < 1e-6);
        assert_eq!(v["nodes"].as_array().unwrap().len(), 41);
    }

    #[test]
    fn bracket_and_scatter() {
        let v: serde_json::Value =
            serde_json::from_str(&initial_bracket_json(3.0, 2.0, 20).unwrap()).unwrap();
        assert_eq!(v["passed"], true);
        let v: serde_json::Value =
            serde_json::from_str(&contraction_scatter_json(2.0, 2.0, 1, 50).unwrap()).unwrap();
        assert_eq!(v["violations"], 0);
        assert_eq!(v["points"].as_array().unwrap().len(), 50);
    }

    #[test]
    fn bad_parameters_are_errors() {
        assert!(solve_example_json(0.5, 2.0, 40).is_err());
        assert!(initial_bracket_json(2.0, 0.5, 40).is_err());
    }
}
