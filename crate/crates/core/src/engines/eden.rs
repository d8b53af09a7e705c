use super::{EngineError, GrowthProcess, Step};
use crate::analysis::CompensatedSum;
use crate::lattice::Cluster;
use crate::rng::RngStream;

/// Eden growth: each step adds the head of a uniformly chosen boundary edge
/// and advances time by an exponential of mean `1/Y`, `Y` the boundary count.
#[derive(Clone, Debug)]
pub struct Eden {
    cluster: Cluster,
    time: CompensatedSum,
}

impl Eden {
    pub fn new(cluster: Cluster) -> Self {
        Eden {
            cluster,
            time: CompensatedSum::default(),
        }
    }

    pub fn into_cluster(self) -> Cluster {
        self.cluster
    }
}

/// One Eden step on `cluster`: returns the added vertex, the boundary count
/// seen and the time increment.
#[inline]
pub fn eden_step(cluster: &mut Cluster, rng: &mut RngStream) -> Result<Step, EngineError> {
    let y = cluster.boundary_count();
    if y == 0 {
        return Err(EngineError::EmptyBoundary);
    }
    let vertex = cluster.boundary_head(rng.index(y));
    let increment = rng.exp1() / y as f64;
    cluster.add_vertex(vertex)?;
    Ok(Step {
        vertex,
        y_count: y as u32,
        increment,
    })
}

impl GrowthProcess for Eden {
    fn cluster(&self) -> &Cluster {
        &self.cluster
    }

    fn elapsed(&self) -> f64 {
        self.time.value()
    }

    #[inline]
    fn step(&mut self, rng: &mut RngStream) -> Result<Step, EngineError> {
        let s = eden_step(&mut self.cluster, rng)?;
        self.time.add(s.increment);
        Ok(s)
    }
}
