use super::{ClockDistribution, EngineError, GrowthProcess, Step};
use crate::analysis::CompensatedSum;
use crate::lattice::Cluster;
use crate::rng::RngStream;

/// Richardson growth: after every crossing all boundary clocks restart with
/// fresh draws; the earliest one fires. Ties are broken uniformly.
#[derive(Clone, Debug)]
pub struct Richardson {
    cluster: Cluster,
    clock: ClockDistribution,
    time: CompensatedSum,
}

impl Richardson {
    pub fn new(cluster: Cluster, clock: ClockDistribution) -> Self {
        Richardson {
            cluster,
            clock,
            time: CompensatedSum::default(),
        }
    }
}

impl GrowthProcess for Richardson {
    fn cluster(&self) -> &Cluster {
        &self.cluster
    }

    fn elapsed(&self) -> f64 {
        self.time.value()
    }

    fn step(&mut self, rng: &mut RngStream) -> Result<Step, EngineError> {
        let y = self.cluster.boundary_count();
        if y == 0 {
            return Err(EngineError::EmptyBoundary);
        }
        let mut best = f64::INFINITY;
        let mut chosen = 0;
        let mut ties = 0usize;
        for i in 0..y {
            let c = self.clock.sample(rng);
            if c < best {
                best = c;
                chosen = i;
                ties = 1;
            } else if c == best {
                ties += 1;
                if rng.index(ties) == 0 {
                    chosen = i;
                }
            }
        }
        let vertex = self.cluster.boundary_head(chosen);
        self.cluster.add_vertex(vertex)?;
        self.time.add(best);
        Ok(Step {
            vertex,
            y_count: y as u32,
            increment: best,
        })
    }
}
