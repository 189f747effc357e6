//! The bundled applications: improvisation with a factor oracle, graph
//! paths and k-nets.

pub mod ccfomi;
pub mod graph_path;
pub mod knets;
