/// Time-stamped state samples produced by an integrator run.
///
/// States are stored row-major in one flat buffer. Times are strictly
/// increasing; [`Trajectory::push`] enforces this.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    dim: usize,
    times: Vec<f64>,
    states: Vec<f64>,
}

impl Trajectory {
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "trajectory dimension must be positive");
        Self {
            dim,
            times: Vec::new(),
            states: Vec::new(),
        }
    }

    pub fn with_capacity(dim: usize, samples: usize) -> Self {
        let mut traj = Self::new(dim);
        traj.times.reserve(samples);
        traj.states.reserve(samples * dim);
        traj
    }

    /// Appends a sample.
    ///
    /// # Panics
    /// If `x` has the wrong length or `t` does not exceed the last stored time.
    pub fn push(&mut self, t: f64, x: &[f64]) {
        assert_eq!(x.len(), self.dim, "state dimension mismatch");
        if let Some(&last) = self.times.last() {
            assert!(t > last, "trajectory times must be strictly increasing");
        }
        self.times.push(t);
        self.states.extend_from_slice(x);
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn time(&self, i: usize) -> f64 {
        self.times[i]
    }

    pub fn state(&self, i: usize) -> &[f64] {
        &self.states[i * self.dim..(i + 1) * self.dim]
    }

    pub fn states(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.states.chunks_exact(self.dim)
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = (f64, &[f64])> + '_ {
        self.times.iter().copied().zip(self.states())
    }

    pub fn t_start(&self) -> Option<f64> {
        self.times.first().copied()
    }

    pub fn t_end(&self) -> Option<f64> {
        self.times.last().copied()
    }

    pub fn last_state(&self) -> Option<&[f64]> {
        if self.is_empty() {
            None
        } else {
            Some(self.state(self.len() - 1))
        }
    }

    /// Linear interpolation at `t`; `None` outside `[t_start, t_end]`.
    /// Sample times return the stored sample exactly.
    pub fn interpolate(&self, t: f64) -> Option<Vec<f64>> {
        let (t0, t1) = (self.t_start()?, self.t_end()?);
        if !(t >= t0 && t <= t1) {
            return None;
        }
        let i = match self.times.binary_search_by(|probe| probe.total_cmp(&t)) {
            Ok(i) => return Some(self.state(i).to_vec()),
            Err(i) => i,
        };
        // t0 < t < t1 here, so 1 <= i <= len-1
        let (ta, tb) = (self.times[i - 1], self.times[i]);
        let w = (t - ta) / (tb - ta);
        let (xa, xb) = (self.state(i - 1), self.state(i));
        Some(
            xa.iter()
                .zip(xb)
                .map(|(a, b)| a + w * (b - a))
                .collect(),
        )
    }

    /// Index of the first sample with time `>= t`.
    pub fn index_at_or_after(&self, t: f64) -> usize {
        self.times.partition_point(|&s| s < t)
    }

    /// Index where the final `fraction` of the time span begins.
    pub fn tail_start(&self, fraction: f64) -> usize {
        match (self.t_start(), self.t_end()) {
            (Some(a), Some(b)) => self.index_at_or_after(b - fraction.clamp(0.0, 1.0) * (b - a)),
            _ => 0,
        }
    }

    /// Maps every state through `f` into a new trajectory of dimension `dim`.
    pub fn map_states<F>(&self, dim: usize, mut f: F) -> Trajectory
    where
        F: FnMut(&[f64]) -> Vec<f64>,
    {
        let mut out = Trajectory::with_capacity(dim, self.len());
        for (t, x) in self.iter() {
            out.push(t, &f(x));
        }
        out
    }

    /// Keeps the components listed in `coords`, in that order.
    pub fn select(&self, coords: &[usize]) -> Trajectory {
        self.map_states(coords.len(), |x| coords.iter().map(|&c| x[c]).collect())
    }

    /// Samples with index `>= start`.
    pub fn slice_from(&self, start: usize) -> Trajectory {
        let mut out = Trajectory::with_capacity(self.dim, self.len().saturating_sub(start));
        for (t, x) in self.iter().skip(start) {
            out.push(t, x);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp() -> Trajectory {
        let mut tr = Trajectory::new(2);
        for i in 0..5 {
            let t = i as f64 * 0.5;
            tr.push(t, &[t, -2.0 * t]);
        }
        tr
    }

    #[test]
    fn interpolation_hits_samples_exactly() {
        let tr = ramp();
        for (t, x) in tr.iter() {
            assert_eq!(tr.interpolate(t).unwrap(), x.to_vec());
        }
    }

    #[test]
    fn interpolation_is_linear_between_samples() {
        let tr = ramp();
        let x = tr.interpolate(0.8).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-15);
        assert!((x[1] + 1.6).abs() < 1e-15);
        assert!(tr.interpolate(-0.1).is_none());
        assert!(tr.interpolate(2.01).is_none());
    }

    #[test]
    #[should_panic(expected = "strictly increasing")]
    fn rejects_non_increasing_time() {
        let mut tr = Trajectory::new(1);
        tr.push(1.0, &[0.0]);
        tr.push(1.0, &[0.0]);
    }

    #[test]
    fn tail_start_covers_final_fraction() {
        let tr = ramp();
        assert_eq!(tr.tail_start(0.5), 2);
        assert_eq!(tr.tail_start(1.0), 0);
    }
}
