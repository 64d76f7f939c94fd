//! Byzantine consensus under the local-broadcast model.
//!
//! * [`graph`]: graphs, vertex connectivity and the fixed disjoint paths;
//! * [`conditions`]: necessary / sufficient graph conditions and f-goodness;
//! * [`protocol`]: the three-round consensus algorithm for `2f`-connected graphs;
//! * [`simnet`]: a synchronous local-broadcast simulator with Byzantine adversaries.

pub mod conditions;
pub mod graph;
pub mod protocol;
pub mod simnet;
