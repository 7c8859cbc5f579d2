//! Control-flow graphs, post-dominators, control and data dependence, and
//! the inter-procedurally linked program dependence graph.
//!
//! Linking is context-insensitive: call sites connect to the callee's entry
//! (which binds the parameters) and every callee `return` connects back to
//! every call site.

mod cfg;
mod control;
mod defuse;
mod dot;
mod merged;
mod pdg;
mod postdom;
mod reaching;

pub use cfg::{build_cfg, Cfg, EdgeKind, NodeId};
pub use control::{control_dependence, control_dependence_with};
pub use defuse::{DefUse, Var};
pub use dot::{cfg_dot, pdg_dot};
pub use merged::{DepGraph, DepKind, PointKind, ProgramGraph, ProgramPoint};
pub use pdg::{
    build_pdg, link_interprocedural, CallEdge, CallGraph, CallLink, Callee, DataEdge, DefSite, Pdg,
    ProgramAnalysis, ReturnLink,
};
pub use postdom::{post_dominators, GraphError, PostDomTree};
pub use reaching::{data_dependence, data_dependence_from, function_def_use, reaching_definitions, DataDep};
