//! File formats, dataset loaders, a thread-pool executor and the command
//! line for [`fgw_core`].

pub mod cli;
pub mod convert;
pub mod error;
pub mod export;
pub mod graph_dir;
pub mod graph_json;
pub mod pool;
pub mod tudataset;

pub use error::{DatasetError, Error, Result};
pub use fgw_core as core;
pub use pool::Pool;
