use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use netdiv_core::growth::{generate, GrowthConfig};
use netdiv_core::ingest::write_edge_file;
use serde::Serialize;

use crate::BundleError;

#[derive(Debug, Serialize)]
pub struct GenerationMeta {
    pub tool_version: String,
    pub config: GrowthConfig,
    pub edges: usize,
    pub vertices: usize,
    /// Triangle closing ran out of non-adjacent pairs before the target.
    pub complete: bool,
}

pub fn meta_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".meta.json");
    out.with_file_name(name)
}

fn write_atomic(
    path: &Path,
    body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> Result<(), BundleError> {
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(path.file_name().unwrap_or_default());
    tmp_name.push(".partial");
    let tmp = path.with_file_name(tmp_name);
    let result = File::create(&tmp).and_then(|f| {
        let mut w = BufWriter::new(f);
        body(&mut w)?;
        w.flush()?;
        w.get_ref().sync_all()
    });
    if let Err(e) = result.and_then(|_| fs::rename(&tmp, path)) {
        let _ = fs::remove_file(&tmp);
        return Err(BundleError::io(path.to_path_buf(), e));
    }
    Ok(())
}

/// Runs a growth model and writes the edge list plus a metadata sidecar.
/// Nothing is written when the configuration is rejected.
pub fn run_generate(config: &GrowthConfig, out: &Path) -> Result<GenerationMeta, BundleError> {
    let generated = generate(config)?;
    let meta = GenerationMeta {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config: *config,
        edges: generated.list.len(),
        vertices: generated.list.node_count_hint(),
        complete: generated.complete,
    };
    write_atomic(out, |w| {
        write_edge_file(&generated.list, &mut *w).map_err(|e| std::io::Error::other(e.to_string()))
    })?;
    write_atomic(&meta_path(out), |w| {
        serde_json::to_writer_pretty(&mut *w, &meta)?;
        writeln!(w)
    })?;
    Ok(meta)
}
