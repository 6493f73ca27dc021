//! Synthetic networks, trajectories, interval workloads, query sets and
//! their text file formats.

mod io;
mod network;
mod queries;
mod trajectories;
mod workload;

pub use io::{
    format_time, parse_network, parse_queries, parse_records, read_network, read_queries,
    read_records, write_network, write_network_to, write_queries, write_queries_to, write_records,
    write_records_to,
};
pub use network::{gen_grid_network, Network};
pub use queries::{gen_query_set, gen_temporal_queries, QueryFamily, QuerySetSpec};
pub use trajectories::{gen_trajectories, TrajectoryConfig};
pub use workload::{gen_interval_ticks, gen_interval_workload, WorkloadKind, WorkloadSpec};
