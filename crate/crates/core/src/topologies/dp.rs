//! Exact optimization over layered path grids.
//!
//! A [`DpProblem`] is the finite relaxation of a supremum over a compact
//! path class: one layer per quadrature node, one node per admissible path
//! value, a per-node score (quadrature weight times integrand term) and a
//! step constraint between consecutive layers. The objective is additive
//! over layers, so a longest-path sweep over the layered graph solves the
//! relaxation exactly.
//!
//! Scores accumulate right to left (suffix sums); the brute-force
//! [`enumerate_paths`] oracle uses the same accumulation order, so for equal
//! inputs the two values agree bit for bit, not merely within tolerance.

use crate::error::{CoreError, Result};

/// Feasibility slack absorbing floating-point noise in lattice coordinates
/// and modulus evaluations.
pub const STEP_TOL: f64 = 1e-12;

/// Position of a path node; components not subject to any constraint are
/// kept empty.
#[derive(Debug, Clone, PartialEq)]
pub struct DpPosition {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
}

impl DpPosition {
    pub fn x_only(x: Vec<f64>) -> Self {
        DpPosition { x, u: Vec::new() }
    }

    pub fn pair(x: Vec<f64>, u: Vec<f64>) -> Self {
        DpPosition { x, u }
    }
}

/// Maximum allowed movement between consecutive layers, per component and
/// jointly; `f64::INFINITY` disables a constraint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepBound {
    pub x_max: f64,
    pub u_max: f64,
    pub joint_max: f64,
}

impl StepBound {
    pub fn free() -> Self {
        StepBound {
            x_max: f64::INFINITY,
            u_max: f64::INFINITY,
            joint_max: f64::INFINITY,
        }
    }

    pub fn is_free(&self) -> bool {
        self.x_max.is_infinite() && self.u_max.is_infinite() && self.joint_max.is_infinite()
    }

    pub fn feasible(&self, from: &DpPosition, to: &DpPosition) -> bool {
        let dx2: f64 = from
            .x
            .iter()
            .zip(&to.x)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        let du2: f64 = from
            .u
            .iter()
            .zip(&to.u)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        dx2.sqrt() <= self.x_max + STEP_TOL
            && du2.sqrt() <= self.u_max + STEP_TOL
            && (dx2 + du2).sqrt() <= self.joint_max + STEP_TOL
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DpObjective {
    MaximizeSum,
    MinimizeSum,
}

/// A layered optimization problem over a shared node set.
#[derive(Debug, Clone)]
pub struct DpProblem {
    /// Node positions, shared by every layer.
    pub positions: Vec<DpPosition>,
    /// `scores[k][i]`: contribution of node `i` at layer `k`.
    pub scores: Vec<Vec<f64>>,
    /// `steps[k]`: constraint between layer `k` and layer `k+1`.
    pub steps: Vec<StepBound>,
    pub objective: DpObjective,
}

/// Optimal value plus the achieving path, ties broken toward the
/// lexicographically smallest node-index sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct DpSolution {
    pub value: f64,
    pub path: Vec<usize>,
}

impl DpProblem {
    pub fn validate(&self) -> Result<()> {
        let n = self.positions.len();
        if n == 0 {
            return Err(CoreError::EmptyInput("layered problem has no nodes".into()));
        }
        if self.scores.len() < 2 {
            return Err(CoreError::Config(format!(
                "layered problem needs at least 2 layers, got {}",
                self.scores.len()
            )));
        }
        if self.steps.len() + 1 != self.scores.len() {
            return Err(CoreError::Config("layer/step count mismatch".into()));
        }
        if self.scores.iter().any(|layer| layer.len() != n) {
            return Err(CoreError::Config("score rows must match the node count".into()));
        }
        if self.scores.iter().flatten().any(|s| !s.is_finite()) {
            return Err(CoreError::Config("scores must be finite".into()));
        }
        Ok(())
    }

    pub fn layer_count(&self) -> usize {
        self.scores.len()
    }
}

/// Solves the layered problem with a backward sweep. Complexity
/// `O(layers * nodes^2)`, or `O(layers * nodes)` across unconstrained
/// transitions.
pub fn solve_dp(problem: &DpProblem) -> Result<DpSolution> {
    problem.validate()?;
    let n = problem.positions.len();
    let layers = problem.layer_count();
    let maximize = problem.objective == DpObjective::MaximizeSum;
    let worst = if maximize { f64::NEG_INFINITY } else { f64::INFINITY };
    let better = |a: f64, b: f64| if maximize { a > b } else { a < b };

    // suffix[k][i] = best objective of a feasible path on layers k.. starting
    // at node i, accumulated right to left
    let mut suffix = vec![vec![worst; n]; layers];
    suffix[layers - 1] = problem.scores[layers - 1].clone();
    for k in (0..layers - 1).rev() {
        let step = &problem.steps[k];
        if step.is_free() {
            let mut best = worst;
            for &v in &suffix[k + 1] {
                if better(v, best) {
                    best = v;
                }
            }
            if best == worst {
                return Err(CoreError::InfeasibleProblem { layer: k + 1 });
            }
            for (slot, score) in suffix[k].iter_mut().zip(&problem.scores[k]) {
                *slot = score + best;
            }
        } else {
            let (head, tail) = suffix.split_at_mut(k + 1);
            let next = &tail[0];
            for (i, slot) in head[k].iter_mut().enumerate() {
                let mut best = worst;
                for (j, &candidate) in next.iter().enumerate() {
                    if candidate != worst
                        && step.feasible(&problem.positions[i], &problem.positions[j])
                        && better(candidate, best)
                    {
                        best = candidate;
                    }
                }
                if best != worst {
                    *slot = problem.scores[k][i] + best;
                }
            }
        }
    }

    // forward walk, smallest index among optima at every layer
    let mut start = None;
    let mut best = worst;
    for (i, &v) in suffix[0].iter().enumerate() {
        if v != worst && better(v, best) {
            best = v;
            start = Some(i);
        }
    }
    let mut current = start.ok_or(CoreError::InfeasibleProblem { layer: 0 })?;
    let mut path = Vec::with_capacity(layers);
    path.push(current);
    for k in 0..layers - 1 {
        let step = &problem.steps[k];
        let mut next = None;
        let mut next_best = worst;
        for (j, &candidate) in suffix[k + 1].iter().enumerate() {
            if candidate == worst {
                continue;
            }
            if !step.feasible(&problem.positions[current], &problem.positions[j]) {
                continue;
            }
            if better(candidate, next_best) {
                next_best = candidate;
                next = Some(j);
            }
        }
        current = next.expect("suffix value implied a feasible successor");
        path.push(current);
    }
    Ok(DpSolution { value: best, path })
}

/// Brute-force oracle: enumerates every feasible path in lexicographic order
/// and accumulates scores right to left, exactly as [`solve_dp`] does.
pub fn enumerate_paths(problem: &DpProblem) -> Result<DpSolution> {
    problem.validate()?;
    let n = problem.positions.len();
    let layers = problem.layer_count();
    let maximize = problem.objective == DpObjective::MaximizeSum;
    let mut best: Option<DpSolution> = None;
    let mut stack = vec![0usize; layers];
    let mut depth = 0usize;
    loop {
        if depth == layers {
            let mut value = 0.0;
            for k in (0..layers).rev() {
                value += problem.scores[k][stack[k]];
            }
            let take = match &best {
                None => true,
                Some(b) => {
                    if maximize {
                        value > b.value
                    } else {
                        value < b.value
                    }
                }
            };
            if take {
                best = Some(DpSolution {
                    value,
                    path: stack.clone(),
                });
            }
            // backtrack
            depth -= 1;
            loop {
                stack[depth] += 1;
                if stack[depth] < n {
                    break;
                }
                stack[depth] = 0;
                if depth == 0 {
                    return best.ok_or(CoreError::InfeasibleProblem { layer: 0 });
                }
                depth -= 1;
            }
            continue;
        }
        let feasible = depth == 0
            || problem.steps[depth - 1].feasible(
                &problem.positions[stack[depth - 1]],
                &problem.positions[stack[depth]],
            );
        if feasible {
            depth += 1;
            continue;
        }
        // advance at this depth
        loop {
            stack[depth] += 1;
            if stack[depth] < n {
                break;
            }
            stack[depth] = 0;
            if depth == 0 {
                return best.ok_or(CoreError::InfeasibleProblem { layer: 0 });
            }
            depth -= 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_positions(values: &[f64]) -> Vec<DpPosition> {
        values.iter().map(|&v| DpPosition::x_only(vec![v])).collect()
    }

    #[test]
    fn path_independent_scores_reduce_to_layer_sums() {
        // identical scores per layer: value = sum of any node's scores
        let problem = DpProblem {
            positions: scalar_positions(&[-1.0, 0.0, 1.0]),
            scores: vec![vec![0.5; 3], vec![0.25; 3], vec![1.0; 3]],
            steps: vec![StepBound::free(), StepBound::free()],
            objective: DpObjective::MaximizeSum,
        };
        let sol = solve_dp(&problem).unwrap();
        assert_eq!(sol.value, 1.0 + (0.25 + (0.5)));
        assert_eq!(sol.path, vec![0, 0, 0]);
    }

    #[test]
    fn three_by_three_matches_brute_force() {
        // 3 layers, nodes {-1, 0, 1}, steps of at most one node, node-value
        // scores: optimum ramps up to the largest reachable node
        let bound = StepBound {
            x_max: 1.0,
            u_max: f64::INFINITY,
            joint_max: f64::INFINITY,
        };
        let scores: Vec<Vec<f64>> = (0..3).map(|_| vec![-1.0, 0.0, 1.0]).collect();
        let problem = DpProblem {
            positions: scalar_positions(&[-1.0, 0.0, 1.0]),
            scores,
            steps: vec![bound, bound],
            objective: DpObjective::MaximizeSum,
        };
        let dp = solve_dp(&problem).unwrap();
        let brute = enumerate_paths(&problem).unwrap();
        assert_eq!(dp.value, brute.value);
        assert_eq!(dp.path, brute.path);
        assert_eq!(dp.value, 3.0);
        assert_eq!(dp.path, vec![2, 2, 2]);
    }

    #[test]
    fn constrained_start_limits_the_climb() {
        // scores favor node 2 but layer-0 score pins node 0; step bound 1.0
        // forces a gradual climb
        let bound = StepBound {
            x_max: 1.0,
            u_max: f64::INFINITY,
            joint_max: f64::INFINITY,
        };
        let problem = DpProblem {
            positions: scalar_positions(&[0.0, 1.0, 2.0]),
            scores: vec![vec![10.0, 0.0, 0.0], vec![0.0, 0.0, 1.0], vec![0.0, 0.0, 5.0]],
            steps: vec![bound, bound],
            objective: DpObjective::MaximizeSum,
        };
        let dp = solve_dp(&problem).unwrap();
        let brute = enumerate_paths(&problem).unwrap();
        assert_eq!(dp.value, brute.value);
        assert_eq!(dp.path, brute.path);
        assert_eq!(dp.path, vec![0, 1, 2]);
        assert_eq!(dp.value, 15.0);
    }

    #[test]
    fn minimize_agrees_with_brute_force() {
        let bound = StepBound {
            x_max: 0.5,
            u_max: f64::INFINITY,
            joint_max: f64::INFINITY,
        };
        let problem = DpProblem {
            positions: scalar_positions(&[-0.5, 0.0, 0.5]),
            scores: vec![vec![1.0, -2.0, 0.3], vec![0.7, 0.1, -0.4], vec![0.0, 0.2, -0.1]],
            steps: vec![bound, bound],
            objective: DpObjective::MinimizeSum,
        };
        let dp = solve_dp(&problem).unwrap();
        let brute = enumerate_paths(&problem).unwrap();
        assert_eq!(dp.value, brute.value);
        assert_eq!(dp.path, brute.path);
    }

    #[test]
    fn lexicographic_tie_break() {
        // two optimal paths; the smaller node sequence must win
        let problem = DpProblem {
            positions: scalar_positions(&[0.0, 1.0]),
            scores: vec![vec![1.0, 1.0], vec![2.0, 2.0]],
            steps: vec![StepBound::free()],
            objective: DpObjective::MaximizeSum,
        };
        let dp = solve_dp(&problem).unwrap();
        assert_eq!(dp.path, vec![0, 0]);
        let brute = enumerate_paths(&problem).unwrap();
        assert_eq!(brute.path, vec![0, 0]);
    }

    #[test]
    fn infeasible_problem_fails_loudly() {
        let bound = StepBound {
            x_max: 0.1,
            u_max: f64::INFINITY,
            joint_max: f64::INFINITY,
        };
        // nodes 5 apart: no transition is feasible
        let problem = DpProblem {
            positions: vec![DpPosition::x_only(vec![0.0]), DpPosition::x_only(vec![5.0])],
            scores: vec![vec![1.0, 1.0], vec![1.0, 1.0]],
            steps: vec![bound],
            objective: DpObjective::MaximizeSum,
        };
        // a self-loop (same node both layers) is feasible, so this one passes
        assert!(solve_dp(&problem).is_ok());
        // forbid self-loops by separating the layers' usable nodes via scores
        // is not possible; instead shrink the bound below zero
        let impossible = DpProblem {
            steps: vec![StepBound {
                x_max: -1.0,
                u_max: f64::INFINITY,
                joint_max: f64::INFINITY,
            }],
            ..problem
        };
        assert!(matches!(
            solve_dp(&impossible),
            Err(CoreError::InfeasibleProblem { .. })
        ));
    }
}
