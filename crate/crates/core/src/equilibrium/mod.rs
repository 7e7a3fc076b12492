//! Minimax equilibria for explicit matrix games and for the network security
//! game.

mod matrix_game;
mod matroid;
mod security;

pub use matrix_game::{solve_matrix_game, MatrixGameSolution, GAP_TOL};
pub use matroid::decompose_matroid_point;
pub use security::{
    attack_scores, defender_best_response, security_payoff, solve_security_exact_small,
    solve_security_subgame, solve_security_subgame_unreduced, top_d_indices, topd_sum,
    MAX_DEFENDER_SETS, SADDLE_TOL,
};

use serde::Serialize;

use crate::error::{check_distribution, Error, Result};
use crate::graph::Graph;

/// A network security game on `graph` with defense budget `d` and protection
/// reward `ρ`.
#[derive(Clone, Debug)]
pub struct SecurityGame<'g> {
    graph: &'g Graph,
    budget: usize,
    reward: f64,
    prior: Vec<f64>,
}

impl<'g> SecurityGame<'g> {
    /// A game with the uniform prior over vertices.
    pub fn new(graph: &'g Graph, budget: usize, reward: f64) -> Result<Self> {
        let n = graph.n();
        Self::with_prior(graph, budget, reward, vec![1.0 / n.max(1) as f64; n])
    }

    pub fn with_prior(
        graph: &'g Graph,
        budget: usize,
        reward: f64,
        prior: Vec<f64>,
    ) -> Result<Self> {
        let n = graph.n();
        if n == 0 {
            return Err(Error::InvalidParameter("graph has no vertices".into()));
        }
        if budget == 0 || budget > n {
            return Err(Error::InvalidParameter(format!(
                "defense budget {budget} must lie in 1..={n}"
            )));
        }
        if !(reward.is_finite() && reward >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "protection reward {reward} must be >= 0"
            )));
        }
        if prior.len() != n {
            return Err(Error::Dimension(format!(
                "prior has length {}, expected {n}",
                prior.len()
            )));
        }
        check_distribution("prior", &prior, crate::game::CONSTRUCT_TOL)?;
        Ok(SecurityGame {
            graph,
            budget,
            reward,
            prior,
        })
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn reward(&self) -> f64 {
        self.reward
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EquilibriumResult {
    pub value: f64,
    #[serde(rename = "y")]
    pub attacker_strategy: Vec<f64>,
    /// Protection probability of each vertex.
    #[serde(rename = "z")]
    pub defender_marginal: Vec<f64>,
    /// Mixed defender strategy over explicit vertex sets realising the
    /// marginal.
    #[serde(rename = "decomposition")]
    pub defender_decomposition: Vec<(f64, Vec<usize>)>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn game_validation() {
        let g = Graph::empty(3);
        assert!(SecurityGame::new(&g, 0, 1.0).is_err());
        assert!(SecurityGame::new(&g, 4, 1.0).is_err());
        assert!(SecurityGame::new(&g, 1, -1.0).is_err());
        assert!(SecurityGame::with_prior(&g, 1, 1.0, vec![0.5, 0.5]).is_err());
        let gm = SecurityGame::new(&g, 3, 2.0).unwrap();
        assert_eq!(gm.prior(), &[1.0 / 3.0; 3]);
    }

    #[test]
    fn result_json_shape() {
        let r = EquilibriumResult {
            value: 1.0,
            attacker_strategy: vec![1.0],
            defender_marginal: vec![0.0],
            defender_decomposition: vec![(1.0, vec![])],
        };
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        assert!(v.get("y").is_some() && v.get("z").is_some() && v.get("decomposition").is_some());
    }
}
