use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use attnsched_core::io::{from_json, to_json_pretty};
use attnsched_core::{ActivityTrace, FollowGraph, ProblemInstance, RunConfig, Schedule};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{CliError, CliResult};

pub fn open(path: &Path) -> CliResult<File> {
    File::open(path).map_err(|e| CliError::file(path, e))
}

pub fn create(path: &Path) -> CliResult<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::file(path, e))?;
    }
    Ok(BufWriter::new(
        File::create(path).map_err(|e| CliError::file(path, e))?,
    ))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::file(path, e))?;
    from_json(&text).map_err(|e| CliError::file(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut out = create(path)?;
    out.write_all(to_json_pretty(value).as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| CliError::file(path, e))
}

pub fn read_config(path: Option<&Path>) -> CliResult<RunConfig> {
    match path {
        None => Ok(RunConfig::default()),
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::file(path, e))?;
            RunConfig::from_json(&text).map_err(|e| CliError::file(path, e))
        }
    }
}

pub fn read_instance(path: &Path) -> CliResult<ProblemInstance> {
    let instance: ProblemInstance = read_json(path)?;
    instance.validate().map_err(|e| CliError::file(path, e))?;
    Ok(instance)
}

pub fn read_schedule(path: &Path) -> CliResult<Schedule> {
    read_json(path)
}

pub fn read_trace(path: &Path, tz_offset_minutes: i32) -> CliResult<ActivityTrace> {
    attnsched_core::io::read_trace(BufReader::new(open(path)?), tz_offset_minutes)
        .map_err(|e| CliError::file(path, e))
}

pub fn read_graph(path: &Path) -> CliResult<FollowGraph> {
    attnsched_core::io::read_graph(open(path)?).map_err(|e| CliError::file(path, e))
}
