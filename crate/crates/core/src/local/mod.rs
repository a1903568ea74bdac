//! LOCAL-model simulation and the distributed algorithms built on it.

pub mod convert;
pub mod ft2;
pub mod padded;
pub mod sim;

pub use padded::{padded_decomposition, Cluster, DecompositionConfig, Partition};
pub use sim::{run_simulation, Message, NodeContext, NodeProgram, Outbox, Session, SimError, SimTrace};
pub use ft2::{distributed_ft2, lp_for_cluster, ClusterLp, ClusterSolution, DistError, DistFt2Config, DistFt2Outcome, DistFt2Report};
pub use convert::{distributed_ft_convert, ClusterNode, ClusterSpanner, ConversionNode, DistConvertError, DistConvertOutcome, DistributedBase};
