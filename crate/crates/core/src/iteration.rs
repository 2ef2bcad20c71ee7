//! Stopping rule shared by the fixpoint solvers.

/// Stops once the largest update is below `epsilon` and the remaining error,
/// extrapolated from the observed contraction rate, is below it as well.
///
/// A plain "update below epsilon" test stops far from the fixpoint when the
/// iteration contracts slowly. The rate is the worse of the one-step and the
/// averaged two-step ratio, since Jacobi sweeps on bipartite-like chains
/// shrink the update only every other step.
pub(crate) struct StopRule {
    epsilon: f64,
    last: Option<f64>,
    before_last: Option<f64>,
}

impl StopRule {
    pub(crate) fn new(epsilon: f64) -> Self {
        Self {
            epsilon,
            last: None,
            before_last: None,
        }
    }

    pub(crate) fn done(&mut self, change: f64) -> bool {
        if change == 0.0 {
            return true;
        }
        let (p1, p2) = (self.last.replace(change), self.before_last.take());
        self.before_last = p1;
        if change >= self.epsilon {
            return false;
        }
        let (Some(p1), Some(p2)) = (p1, p2) else {
            return false;
        };
        let rate = (change / p1).max((change / p2).sqrt());
        rate < 1.0 && change * rate / (1.0 - rate) < self.epsilon
    }
}
