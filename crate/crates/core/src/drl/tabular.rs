//! Tabular mode for the double-Q update: the function approximators replaced
//! by lookup tables, so the update rule itself can be validated against
//! dynamic-programming ground truth.

/// Dense state-action table.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularQ {
    /// `values[state][action]`.
    pub values: Vec<Vec<f64>>,
}

impl TabularQ {
    pub fn zeros(num_states: usize, num_actions: usize) -> Self {
        TabularQ { values: vec![vec![0.0; num_actions]; num_states] }
    }

    pub fn greedy(&self, state: usize) -> usize {
        let row = &self.values[state];
        let mut best = 0;
        for (a, &v) in row.iter().enumerate() {
            if v > row[best] {
                best = a;
            }
        }
        best
    }
}

/// One double-Q update on the online table: the target table selects the
/// next action, the online table evaluates it,
/// `Q(s,a) += ν (r + ζ Q(s', argmax_a' Q'(s', a')) - Q(s,a))`.
pub fn ddqn_tabular_update(
    online: &mut TabularQ,
    target: &TabularQ,
    state: usize,
    action: usize,
    reward: f64,
    next_state: usize,
    learning_rate: f64,
    discount: f64,
) {
    let selected = target.greedy(next_state);
    let bootstrap = online.values[next_state][selected];
    let td = reward + discount * bootstrap - online.values[state][action];
    online.values[state][action] += learning_rate * td;
}
