/// Ordered record of forward operations and the intermediates their
/// backward passes need.
#[derive(Debug, Clone)]
pub struct GradTape<R> {
    records: Vec<R>,
}

impl<R> Default for GradTape<R> {
    fn default() -> Self {
        Self {
            records: Vec::new(),
        }
    }
}

impl<R> GradTape<R> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, record: R) {
        self.records.push(record);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[R] {
        &self.records
    }

    /// Visits records last-to-first, threading an accumulator through `step`.
    pub fn replay_backward<S, E>(
        &self,
        init: S,
        mut step: impl FnMut(S, &R) -> Result<S, E>,
    ) -> Result<S, E> {
        self.records.iter().rev().try_fold(init, |acc, r| step(acc, r))
    }
}
