use std::time::Instant;

/// Resource limits shared by the exploration and search procedures.
#[derive(Clone, Debug)]
pub struct Limits {
    /// Nodes of a fixed-size reachability graph or of a stabilization search.
    pub max_nodes: usize,
    /// Size of the antichain kept by backward coverability.
    pub max_antichain: usize,
    /// Frontier size of the Hilbert-basis completion.
    pub max_frontier: usize,
    /// Largest input checked exhaustively when classifying protocols.
    pub cutoff: u64,
    /// Largest saturation multiplier tried by the leaderless certificate builder.
    pub max_scale: u64,
    pub deadline: Option<Instant>,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            max_nodes: 2_000_000,
            max_antichain: 50_000,
            max_frontier: 2_000_000,
            cutoff: 40,
            max_scale: 4096,
            deadline: None,
        }
    }
}

impl Limits {
    pub fn expired(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }
}
