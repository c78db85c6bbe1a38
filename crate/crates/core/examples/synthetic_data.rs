//! Writes synthetic stand-ins for both data files into a directory, for dry
//! runs of the CLI:
//!
//! ```text
//! cargo run -p fedlearn-edu --example synthetic_data -- /tmp/fl-data
//! ```

use std::path::PathBuf;

use fedlearn_edu::dataset::synthetic::{
    student_dropout_table, student_performance_table, STUDENT_DROPOUT_ROWS, STUDENT_PERFORMANCE_ROWS,
};
use fedlearn_edu::experiment::DatasetId;

fn main() -> fedlearn_edu::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "synthetic-data".into()));
    std::fs::create_dir_all(&dir).map_err(|e| fedlearn_edu::Error::Io {
        path: dir.clone(),
        source: e,
    })?;
    let a = dir.join(DatasetId::A.default_file());
    let b = dir.join(DatasetId::B.default_file());
    student_performance_table(STUDENT_PERFORMANCE_ROWS, 7).write_delimited(&a, ';')?;
    student_dropout_table(STUDENT_DROPOUT_ROWS, 7).write_delimited(&b, ';')?;
    println!("wrote {} and {}", a.display(), b.display());
    Ok(())
}
