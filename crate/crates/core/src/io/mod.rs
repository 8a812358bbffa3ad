//! On-disk formats: raw IQ captures with JSON sidecars, binary containers for
//! models and datasets, and CSV/JSON reports.

pub mod container;
pub mod iq;
pub mod report;

pub use container::{load_dataset, load_model, save_dataset, save_model};
pub use iq::{read_iq, sidecar_path, split_windows, write_iq, CaptureMeta};
pub use report::{write_constellation_csv, write_curve_csv, write_eval_csv, write_json};
