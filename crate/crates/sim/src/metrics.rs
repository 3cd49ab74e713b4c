//! JSON-lines metrics. One record per step plus one summary record
//! (`step = -1`) at the end of every episode.

use std::fs::{File, OpenOptions};
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

/// Running episode totals as of `step`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub episode: u64,
    /// Step count so far, or −1 for the episode summary.
    pub step: i64,
    pub coverage: f64,
    pub reward_sum: f64,
    pub cells_self: u64,
    pub cells_collab: u64,
    pub bytes_lidar: u64,
    pub bytes_map: u64,
    pub collisions: u64,
    pub level_id: u8,
    pub curriculum_counter: u32,
    /// Summary only: whether the team known count never decreased.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub known_monotone: Option<bool>,
}

impl MetricsRecord {
    pub fn is_summary(&self) -> bool {
        self.step == -1
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("record fields are finite")
    }
}

/// Appends records to a JSONL file, flushing every `flush_every` records
/// and on drop.
pub struct MetricsWriter {
    out: BufWriter<File>,
    flush_every: u64,
    pending: u64,
}

impl MetricsWriter {
    pub fn open(path: &Path, flush_every: u64) -> io::Result<Self> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(Self { out: BufWriter::new(file), flush_every: flush_every.max(1), pending: 0 })
    }

    pub fn write(&mut self, record: &MetricsRecord) -> io::Result<()> {
        debug_assert!(record.coverage.is_finite() && record.reward_sum.is_finite());
        writeln!(self.out, "{}", record.to_line())?;
        self.pending += 1;
        if self.pending >= self.flush_every {
            self.flush()?;
        }
        Ok(())
    }

    pub fn flush(&mut self) -> io::Result<()> {
        self.pending = 0;
        self.out.flush()
    }
}

impl Drop for MetricsWriter {
    fn drop(&mut self) {
        let _ = self.out.flush();
    }
}

/// Reads every record of a metrics file.
pub fn read_metrics(path: &Path) -> io::Result<Vec<MetricsRecord>> {
    let text = std::fs::read_to_string(path)?;
    text.lines()
        .filter(|l| !l.is_empty())
        .map(|l| serde_json::from_str(l).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e)))
        .collect()
}
