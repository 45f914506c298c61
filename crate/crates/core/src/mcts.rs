//! Network-guided Monte Carlo Tree Search.
//!
//! Each simulation descends from the root selecting the child maximizing
//! `Q(s,a) + c * P(s,a) * sqrt(sum_b N(s,b)) / (1 + N(s,a))`, expands one
//! leaf, evaluates it with the network (or the true outcome at terminals) and
//! backs the value up with sign alternation per ply. The returned policy is
//! proportional to root visit counts.
//!
//! Conventions: unvisited actions count as Q = 0; when the parent has no
//! visits yet the prior alone ranks the children; argmax ties break toward
//! the lowest action index; a fresh tree is built per move (no reuse); no
//! root noise is injected. A search is therefore fully deterministic given
//! weights and configuration.

use crate::config::HyperParams;
use crate::games::{GameError, GameState};
use crate::net::{masked_policy, NetError, Network};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MctsError {
    #[error("search called on a terminal root")]
    TerminalRoot,
    #[error("search requires at least one simulation")]
    ZeroSimulations,
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("failed to write search trace: {0}")]
    Trace(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    /// Simulations per move (`m`).
    pub simulations: usize,
    /// Exploration constant (`c`).
    pub exploration: f32,
}

impl SearchConfig {
    pub fn new(simulations: usize, exploration: f32) -> SearchConfig {
        SearchConfig {
            simulations,
            exploration,
        }
    }

    pub fn from_params(params: &HyperParams) -> SearchConfig {
        SearchConfig {
            simulations: params.simulations as usize,
            exploration: params.exploration as f32,
        }
    }
}

/// Search output: the visit-count policy plus root statistics.
#[derive(Debug, Clone)]
pub struct SearchResult {
    /// Probability over the full action space, proportional to root visits.
    pub pi: Vec<f32>,
    /// Mean backed-up value at the root, from the root player's perspective.
    pub root_value: f32,
    pub root_visits: Vec<u32>,
    pub simulations: usize,
}

struct Node {
    state: GameState,
    legal: Vec<bool>,
    priors: Vec<f32>,
    visits: Vec<u32>,
    value_sums: Vec<f32>,
    children: Vec<Option<usize>>,
    /// Exact game value from the perspective of the player to move, when the
    /// node is terminal.
    terminal_value: Option<f32>,
    /// Network value estimate at creation (to-move perspective).
    eval_value: f32,
}

impl Node {
    fn new(state: GameState, net: &Network<f32>) -> Result<Node, MctsError> {
        let actions = state.spec().action_space_size();
        let outcome = state.outcome();
        if outcome.is_terminal() {
            let value = outcome.value_for(state.to_move());
            return Ok(Node {
                state,
                legal: vec![false; actions],
                priors: vec![0.0; actions],
                visits: vec![0; actions],
                value_sums: vec![0.0; actions],
                children: vec![None; actions],
                terminal_value: Some(value),
                eval_value: value,
            });
        }
        let legal = state.legal_actions()?;
        let output = net.evaluate(&state.encode())?;
        let priors = masked_policy(&output.policy, &legal);
        Ok(Node {
            state,
            legal,
            priors,
            visits: vec![0; actions],
            value_sums: vec![0.0; actions],
            children: vec![None; actions],
            terminal_value: None,
            eval_value: output.value,
        })
    }

    /// PUCT child selection with lowest-index tie-breaking.
    fn select(&self, exploration: f32) -> usize {
        let total: u32 = self.visits.iter().sum();
        let sqrt_total = (total as f32).sqrt();
        let mut best: Option<(usize, f32)> = None;
        for a in 0..self.legal.len() {
            if !self.legal[a] {
                continue;
            }
            let score = if total == 0 {
                self.priors[a]
            } else {
                let q = if self.visits[a] > 0 {
                    self.value_sums[a] / self.visits[a] as f32
                } else {
                    0.0
                };
                q + exploration * self.priors[a] * sqrt_total / (1.0 + self.visits[a] as f32)
            };
            match best {
                Some((_, s)) if score <= s => {}
                _ => best = Some((a, score)),
            }
        }
        best.expect("non-terminal node has a legal action").0
    }
}

/// Runs `config.simulations` simulations from `root` and returns the
/// visit-count policy. Deterministic for fixed weights and configuration.
pub fn search(
    root: &GameState,
    net: &Network<f32>,
    config: &SearchConfig,
) -> Result<Vec<f32>, MctsError> {
    Ok(search_with_stats(root, net, config)?.pi)
}

pub fn search_with_stats(
    root: &GameState,
    net: &Network<f32>,
    config: &SearchConfig,
) -> Result<SearchResult, MctsError> {
    search_impl(root, net, config, None)
}

/// Like [`search_with_stats`], additionally writing one JSON line per
/// simulation (`{"sim":..,"path":[..],"leaf_value":..}`) for test forensics.
pub fn search_traced(
    root: &GameState,
    net: &Network<f32>,
    config: &SearchConfig,
    sink: &mut dyn std::io::Write,
) -> Result<SearchResult, MctsError> {
    search_impl(root, net, config, Some(sink))
}

fn search_impl(
    root: &GameState,
    net: &Network<f32>,
    config: &SearchConfig,
    mut trace: Option<&mut dyn std::io::Write>,
) -> Result<SearchResult, MctsError> {
    if config.simulations == 0 {
        return Err(MctsError::ZeroSimulations);
    }
    if root.is_terminal() {
        return Err(MctsError::TerminalRoot);
    }

    // The root is expanded as setup so that all simulations descend edges;
    // the root visit total then equals the number of simulations.
    let mut nodes = vec![Node::new(root.clone(), net)?];
    for sim in 0..config.simulations {
        let mut path: Vec<(usize, usize)> = Vec::new();
        let mut current = 0usize;
        let leaf_value = loop {
            if let Some(v) = nodes[current].terminal_value {
                break v;
            }
            let action = nodes[current].select(config.exploration);
            if let Some(child) = nodes[current].children[action] {
                path.push((current, action));
                current = child;
            } else {
                let child_state = nodes[current].state.apply(action)?;
                let child = Node::new(child_state, net)?;
                let value = child.terminal_value.unwrap_or(child.eval_value);
                let child_idx = nodes.len();
                nodes.push(child);
                nodes[current].children[action] = Some(child_idx);
                path.push((current, action));
                break value;
            }
        };

        if let Some(sink) = trace.as_deref_mut() {
            let actions: Vec<usize> = path.iter().map(|&(_, a)| a).collect();
            writeln!(
                sink,
                "{}",
                serde_json::json!({"sim": sim, "path": actions, "leaf_value": leaf_value})
            )?;
        }

        // Back the leaf value up the path, flipping perspective each ply.
        let mut value = leaf_value;
        for &(node_idx, action) in path.iter().rev() {
            value = -value;
            nodes[node_idx].visits[action] += 1;
            nodes[node_idx].value_sums[action] += value;
        }
    }

    let root_node = &nodes[0];
    let total: u32 = root_node.visits.iter().sum();
    debug_assert_eq!(total as usize, config.simulations);
    let pi: Vec<f32> = root_node
        .visits
        .iter()
        .map(|&n| n as f32 / total as f32)
        .collect();
    let root_value = root_node.value_sums.iter().sum::<f32>() / total as f32;
    Ok(SearchResult {
        pi,
        root_value,
        root_visits: root_node.visits.clone(),
        simulations: config.simulations,
    })
}

/// Highest-value index, ties broken toward the lowest index.
pub fn argmax_tie_lowest(values: &[f32]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Move selection under the step threshold: steps with `step_index` below
/// `t_prime` sample from the policy, later steps play the argmax.
pub fn select_action(
    pi: &[f32],
    step_index: usize,
    t_prime: usize,
    rng: &mut ChaCha8Rng,
) -> usize {
    if step_index < t_prime {
        let draw: f32 = rng.random();
        let mut cumulative = 0.0;
        let mut fallback = 0;
        for (a, &p) in pi.iter().enumerate() {
            if p > 0.0 {
                fallback = a;
                cumulative += p;
                if draw < cumulative {
                    return a;
                }
            }
        }
        fallback
    } else {
        argmax_tie_lowest(pi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::{GameKind, GameSpec, Outcome, Player};
    use crate::net::Architecture;
    use rand::SeedableRng;

    fn zero_net(kind: GameKind, size: u8) -> Network<f32> {
        Network::zeroed(
            GameSpec::new(kind, size).unwrap(),
            Architecture::default(),
        )
    }

    #[test]
    fn forced_move_gets_full_probability() {
        // Fill four of five columns completely; only column 4 stays open.
        let spec = GameSpec::new(GameKind::ConnectFour, 5).unwrap();
        let mut cells = vec![None; 25];
        for col in 0..4 {
            for row in 0..5 {
                // Alternate colors up the column so nothing wins.
                let p = if (row / 2 + col) % 2 == 0 {
                    Player::P1
                } else {
                    Player::P2
                };
                cells[row * 5 + col] = Some(p);
            }
        }
        let state = GameState::from_cells(spec, cells, Player::P1).unwrap();
        assert_eq!(state.outcome(), Outcome::Ongoing);
        let net = zero_net(GameKind::ConnectFour, 5);
        let pi = search(&state, &net, &SearchConfig::new(16, 1.0)).unwrap();
        assert_eq!(pi[4], 1.0);
        assert!(pi[..4].iter().all(|&p| p == 0.0));
    }

    #[test]
    fn uniform_net_visits_every_root_child_on_othello_start() {
        let spec = GameSpec::new(GameKind::Othello, 6).unwrap();
        let state = GameState::initial(spec);
        let net = zero_net(GameKind::Othello, 6);
        let result = search_with_stats(&state, &net, &SearchConfig::new(25, 1.0)).unwrap();
        let legal = state.legal_actions().unwrap();
        for (a, &is_legal) in legal.iter().enumerate() {
            if is_legal {
                assert!(result.pi[a] > 0.0, "legal action {a} unvisited");
            } else {
                assert_eq!(result.pi[a], 0.0);
            }
        }
        let total: u32 = result.root_visits.iter().sum();
        assert_eq!(total, 25, "conservation: root visits equal simulations");
        let sum: f32 = result.pi.iter().sum();
        assert!((sum - 1.0).abs() < 1e-6);
    }

    #[test]
    fn search_is_deterministic() {
        let spec = GameSpec::new(GameKind::Gobang, 5).unwrap();
        let state = GameState::initial(spec);
        let net = Network::<f32>::init(spec, Architecture::default(), 42);
        let cfg = SearchConfig::new(50, 1.0);
        let a = search(&state, &net, &cfg).unwrap();
        let b = search(&state, &net, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn terminal_root_and_zero_simulations_are_rejected() {
        let spec = GameSpec::new(GameKind::Gobang, 5).unwrap();
        let net = zero_net(GameKind::Gobang, 5);
        let state = GameState::initial(spec);
        assert!(matches!(
            search(&state, &net, &SearchConfig::new(0, 1.0)),
            Err(MctsError::ZeroSimulations)
        ));
        let mut cells = vec![Some(Player::P1); 25];
        cells[24] = Some(Player::P1);
        let terminal = GameState::from_cells(spec, cells, Player::P2).unwrap();
        assert!(terminal.is_terminal());
        assert!(matches!(
            search(&terminal, &net, &SearchConfig::new(5, 1.0)),
            Err(MctsError::TerminalRoot)
        ));
    }

    #[test]
    fn exploitation_only_sticks_with_winning_child() {
        // Column 0 wins immediately for P1; with c = 0 and a policy bias
        // making action 0 the strictly highest prior, every visit lands
        // on the winning child.
        let spec = GameSpec::new(GameKind::ConnectFour, 5).unwrap();
        let mut state = GameState::initial(spec);
        for col in [0, 1, 0, 1, 0, 1] {
            state = state.apply(col).unwrap();
        }
        // P1 has three in column 0.
        let mut net = zero_net(GameKind::ConnectFour, 5);
        net.policy_head.b[0] = 4.0;
        let result = search_with_stats(&state, &net, &SearchConfig::new(30, 0.0)).unwrap();
        assert_eq!(result.root_visits[0], 30);
        assert!((result.root_value - 1.0).abs() < 1e-6);
    }

    fn all_leaves_p1(state: &GameState) -> bool {
        if state.is_terminal() {
            return state.outcome() == Outcome::P1Wins;
        }
        state
            .legal_action_indices()
            .unwrap()
            .into_iter()
            .all(|a| all_leaves_p1(&state.apply(a).unwrap()))
    }

    #[test]
    fn sign_alternation_backs_up_certain_win() {
        // Gobang position where every legal P1 move completes a four-run, so
        // every leaf of the game tree is a P1 win at depth one and the root
        // value estimate is exactly +1 from the first simulation on.
        //
        //   row4: o o x o o
        //   row3: o . . o o
        //   row2: o x x x .
        //   row1: x x x . o
        //   row0: x x x . o
        let spec = GameSpec::new(GameKind::Gobang, 5).unwrap();
        let rows: [[char; 5]; 5] = [
            ['x', 'x', 'x', '.', 'o'],
            ['x', 'x', 'x', '.', 'o'],
            ['o', 'x', 'x', 'x', '.'],
            ['o', '.', '.', 'o', 'o'],
            ['o', 'o', 'x', 'o', 'o'],
        ];
        let mut cells = vec![None; 25];
        for (r, row) in rows.iter().enumerate() {
            for (c, ch) in row.iter().enumerate() {
                cells[r * 5 + c] = match ch {
                    'x' => Some(Player::P1),
                    'o' => Some(Player::P2),
                    _ => None,
                };
            }
        }
        let root = GameState::from_cells(spec, cells, Player::P1).unwrap();
        assert_eq!(root.outcome(), Outcome::Ongoing);
        assert!(all_leaves_p1(&root), "premise: every leaf is a P1 win");

        let net = zero_net(GameKind::Gobang, 5);
        let result = search_with_stats(&root, &net, &SearchConfig::new(10, 1.0)).unwrap();
        assert!(
            (result.root_value - 1.0).abs() < 1e-6,
            "root value {}",
            result.root_value
        );
    }

    #[test]
    fn certain_win_two_plies_deep_converges_toward_one() {
        // Othello endgame: P1 must play (0,0) flipping (0,1), P2 must reply
        // (4,5) flipping (3,5); the single leaf is a P1 win by 33 to 3. The
        // inner node's first visit backs up the (zero) network estimate, so
        // the root estimate is (m-1)/m and tends to +1.
        let spec = GameSpec::new(GameKind::Othello, 6).unwrap();
        let mut cells = vec![Some(Player::P1); 36];
        cells[0] = None; // (0,0)
        cells[1] = Some(Player::P2); // (0,1)
        cells[2 * 6 + 5] = Some(Player::P2); // (2,5)
        cells[4 * 6 + 5] = None; // (4,5)
        let root = GameState::from_cells(spec, cells, Player::P1).unwrap();
        assert_eq!(root.outcome(), Outcome::Ongoing);
        assert!(all_leaves_p1(&root));

        let net = zero_net(GameKind::Othello, 6);
        let result = search_with_stats(&root, &net, &SearchConfig::new(100, 1.0)).unwrap();
        assert!(result.root_value > 0.98, "root value {}", result.root_value);
    }

    #[test]
    fn select_action_degenerate_and_boundary() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(select_action(&[0.0, 1.0, 0.0], 0, 10, &mut rng), 1);
        // At step_index == t_prime the argmax applies ("before" is exclusive).
        assert_eq!(select_action(&[0.4, 0.6], 3, 3, &mut rng), 1);
        // Argmax ties break toward the lowest index.
        assert_eq!(select_action(&[0.5, 0.5], 5, 0, &mut rng), 0);
    }

    #[test]
    fn select_action_sampling_frequencies() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pi = [0.5f32, 0.5];
        let mut counts = [0u32; 2];
        for _ in 0..10_000 {
            counts[select_action(&pi, 0, 1, &mut rng)] += 1;
        }
        let freq = counts[0] as f64 / 10_000.0;
        assert!((freq - 0.5).abs() < 0.02, "frequency {freq}");
    }

    #[test]
    fn trace_emits_one_line_per_simulation() {
        let spec = GameSpec::new(GameKind::ConnectFour, 5).unwrap();
        let state = GameState::initial(spec);
        let net = zero_net(GameKind::ConnectFour, 5);
        let mut sink = Vec::new();
        let result = search_traced(&state, &net, &SearchConfig::new(12, 1.0), &mut sink).unwrap();
        assert_eq!(result.simulations, 12);
        let text = String::from_utf8(sink).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 12);
        for line in lines {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            assert!(v["path"].is_array());
            assert!(v["leaf_value"].is_number());
        }
    }
}
