//! Persistence: the versioned network file format (JSON with full-precision
//! floats), trajectory directories (snapshots + diagnostics.csv +
//! termination.txt) and strictly schema'd CSV emission for every audit.

mod network_file;
mod trajectory_io;

pub use network_file::{
    load_network, network_from_file, network_to_file, save_network, CurveRecord, EndRecord,
    EndpointRecord, JunctionRecord, Metadata, NetworkFile, NETWORK_FORMAT_VERSION,
};
pub use trajectory_io::{
    load_trajectory, read_diagnostics_csv, read_numeric_csv, save_trajectory, write_area_law_csv,
    write_blowup_fit_csv, write_density_map_csv, write_diagnostics_csv, write_length_law_csv,
    write_monotonicity_csv, TERMINATION_FILE,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("i/o failure on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error in {path}: {detail}")]
    Parse { path: String, detail: String },
    #[error("integrity error in {path}: {detail}")]
    Integrity { path: String, detail: String },
    #[error("network is invalid: {0}")]
    Geometry(#[from] crate::geometry::GeometryError),
}

impl IoError {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        IoError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
