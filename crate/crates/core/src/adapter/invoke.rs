use std::collections::{BTreeMap, VecDeque};
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, Command, Stdio};
use std::sync::mpsc;
use std::thread;
use std::time::{Duration, Instant};

use super::protocol::{parse_response, render_request};
use super::{AdapterError, AdapterManifest};
use crate::forecasters::{ForecastOutput, ForecastTask};

/// How long a child may take to exit once the batch is answered before it
/// is killed.
pub const SHUTDOWN_GRACE: Duration = Duration::from_secs(2);

const STDERR_TAIL_LINES: usize = 20;

enum Line {
    Out(String),
    Eof,
    Failed(String),
}

/// Runs one batch through an adapter process and pairs responses to tasks
/// by request id (`id` is the task's position in `batch`).
pub fn invoke_adapter(manifest: &AdapterManifest, batch: &[ForecastTask]) -> Result<Vec<ForecastOutput>, AdapterError> {
    if batch.is_empty() {
        return Ok(Vec::new());
    }
    let timeout = Duration::from_secs(manifest.timeout_seconds);
    let deadline = Instant::now() + timeout;

    let mut cmd = Command::new(&manifest.command[0]);
    cmd.args(&manifest.command[1..])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    if let Some(dir) = &manifest.base_dir {
        cmd.current_dir(dir);
    }
    let mut child = cmd
        .spawn()
        .map_err(|e| AdapterError::AdapterCrash(format!("failed to start `{}`: {e}", manifest.command[0])))?;

    let stdin = child.stdin.take().expect("stdin piped");
    let stdout = child.stdout.take().expect("stdout piped");
    let stderr = child.stderr.take().expect("stderr piped");

    let requests: Vec<String> = batch
        .iter()
        .enumerate()
        .map(|(i, t)| render_request(i as u64, t))
        .collect();
    let (write_tx, write_rx) = mpsc::channel();
    thread::spawn(move || {
        let mut stdin = std::io::BufWriter::new(stdin);
        let result = requests
            .iter()
            .try_for_each(|line| stdin.write_all(line.as_bytes()))
            .and_then(|()| stdin.flush());
        // Dropping the writer closes the child's stdin.
        drop(stdin);
        let _ = write_tx.send(result);
    });

    let (err_tx, err_rx) = mpsc::channel();
    thread::spawn(move || {
        let mut tail = VecDeque::new();
        for line in BufReader::new(stderr).lines().map_while(Result::ok) {
            if tail.len() == STDERR_TAIL_LINES {
                tail.pop_front();
            }
            tail.push_back(line);
        }
        let _ = err_tx.send(tail.into_iter().collect::<Vec<_>>().join("\n"));
    });

    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        let mut reader = BufReader::new(stdout);
        loop {
            let mut buf = String::new();
            let msg = match reader.read_line(&mut buf) {
                Ok(0) => Line::Eof,
                Ok(_) => Line::Out(buf),
                Err(e) => Line::Failed(e.to_string()),
            };
            let done = !matches!(msg, Line::Out(_));
            if tx.send(msg).is_err() || done {
                break;
            }
        }
    });

    let result = collect(&rx, batch, &manifest.model_id, deadline, manifest.timeout_seconds);
    match result {
        Ok(outputs) => {
            finish(&mut child, &err_rx)?;
            // A broken pipe on stdin only matters when everything else went fine.
            if let Ok(Err(e)) = write_rx.recv_timeout(SHUTDOWN_GRACE) {
                return Err(AdapterError::AdapterCrash(format!("writing requests: {e}")));
            }
            Ok(outputs)
        }
        Err(e) => {
            let _ = child.kill();
            let _ = child.wait();
            Err(match e {
                AdapterError::AdapterCrash(msg) => {
                    let stderr = stderr_tail(&err_rx);
                    if stderr.is_empty() {
                        AdapterError::AdapterCrash(msg)
                    } else {
                        AdapterError::AdapterCrash(format!("{msg}; stderr: {stderr}"))
                    }
                }
                other => other,
            })
        }
    }
}

fn stderr_tail(rx: &mpsc::Receiver<String>) -> String {
    rx.recv_timeout(Duration::from_millis(500)).unwrap_or_default()
}

fn collect(
    rx: &mpsc::Receiver<Line>,
    batch: &[ForecastTask],
    model_id: &str,
    deadline: Instant,
    timeout_secs: u64,
) -> Result<Vec<ForecastOutput>, AdapterError> {
    let mut received: BTreeMap<u64, BTreeMap<usize, f64>> = BTreeMap::new();
    while received.len() < batch.len() {
        let remaining = deadline.saturating_duration_since(Instant::now());
        let line = match rx.recv_timeout(remaining) {
            Ok(line) => line,
            Err(_) => return Err(AdapterError::AdapterTimeout(timeout_secs)),
        };
        let text = match line {
            Line::Out(text) => text,
            Line::Eof => {
                return Err(AdapterError::AdapterCrash(format!(
                    "output closed after {} of {} responses",
                    received.len(),
                    batch.len()
                )))
            }
            Line::Failed(e) => return Err(AdapterError::AdapterCrash(format!("reading output: {e}"))),
        };
        let text = text.trim();
        if text.is_empty() {
            continue;
        }
        let resp = parse_response(text)?;
        let Some(task) = batch.get(resp.id as usize) else {
            return Err(AdapterError::BadResponse(format!("unknown request id {}", resp.id)));
        };
        if received.contains_key(&resp.id) {
            return Err(AdapterError::BadResponse(format!(
                "duplicate response for id {}",
                resp.id
            )));
        }
        if !resp.forecasts.keys().copied().eq(task.horizons.iter().copied()) {
            return Err(AdapterError::DimensionMismatch(format!(
                "id {}: got horizons {:?}, requested {:?}",
                resp.id,
                resp.forecasts.keys().collect::<Vec<_>>(),
                task.horizons
            )));
        }
        received.insert(resp.id, resp.forecasts);
    }
    Ok(batch
        .iter()
        .zip(received.into_values())
        .map(|(task, forecasts)| ForecastOutput {
            model_id: model_id.to_string(),
            series_id: task.series_id.clone(),
            origin_index: task.origin_index,
            forecasts,
        })
        .collect())
}

fn finish(child: &mut Child, stderr: &mpsc::Receiver<String>) -> Result<(), AdapterError> {
    let grace_end = Instant::now() + SHUTDOWN_GRACE;
    loop {
        match child.try_wait() {
            Ok(Some(status)) if status.success() => return Ok(()),
            Ok(Some(status)) => {
                let tail = stderr_tail(stderr);
                return Err(AdapterError::AdapterCrash(format!(
                    "exited with {status}; stderr: {tail}"
                )));
            }
            Ok(None) if Instant::now() >= grace_end => {
                let _ = child.kill();
                let _ = child.wait();
                return Ok(());
            }
            Ok(None) => thread::sleep(Duration::from_millis(10)),
            Err(e) => return Err(AdapterError::AdapterCrash(e.to_string())),
        }
    }
}
