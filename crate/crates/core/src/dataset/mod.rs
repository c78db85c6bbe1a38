//! Loading, encoding and splitting the tabular datasets.

mod encoding;
mod partition;
mod schema;
mod split;
pub mod synthetic;
mod table;

pub use encoding::{
    encode, encode_rows, fit_encoding_stats, target_labels, ColumnStats, EncodedDataset, EncodingStats,
};
pub use partition::{build_client_partitions, build_pooled, plan_clients, ClientPartition, ClientRows};
pub use schema::{ColumnKind, ColumnSpec, FeatureSchema};
pub use split::{partition_clients, stratified_quotas, stratified_split, stratified_split_indices};
pub use table::{binarize_grade_target, load_table, read_table, RawTable};
