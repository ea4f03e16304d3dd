//! On-disk formats: binary datasets and field dumps, JSON checkpoints,
//! `key = value` run configurations and CSV outputs. Byte layouts are
//! documented in `docs/formats.md`.

mod checkpoint;
mod config;
mod dataset;
mod fields;

pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use config::{parse_config, parse_config_str, parse_entries, render_config, resolve_config, Entry, RunConfig, KEYS};
pub use dataset::{
    read_dataset, write_dataset, CONSERVATION_TOLERANCE, DATASET_HEADER_LEN, DATASET_MAGIC, DATASET_VERSION, RECORD_LEN,
};
pub use fields::{
    read_field_dump, write_centerline_overlay_csv, write_centerlines_csv, write_csv, write_error_fields_csv,
    write_field_dump, write_loss_curve_csv, write_series_csv, write_snapshot_csv, FIELD_HEADER_LEN, FIELD_MAGIC,
    FIELD_VERSION,
};
