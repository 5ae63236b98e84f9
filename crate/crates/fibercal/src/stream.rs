//! Newline-delimited inference protocol.
//!
//! Each input line holds the seven normalized channel values separated by
//! commas. Each output line is `fx,fy,fz,depth_mm,diameter_mm,flags` with
//! six decimals per number; flags are joined by `|` and `-` marks an empty
//! set. A malformed line yields `ERR,<reason>` and the stream carries on.

use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::net::TcpListener;

use fibercal_core::sensor::CHANNELS;
use fibercal_core::{CalibrationModel, Flags, IntensityFrame, Recovery};

pub const NO_FLAGS: &str = "-";

/// Output column names, shared with the batch predictor.
pub const FIELDS: [&str; 6] = ["fx", "fy", "fz", "depth_mm", "diameter_mm", "flags"];

pub fn format_flags(flags: &Flags) -> String {
    if flags.is_empty() {
        NO_FLAGS.to_string()
    } else {
        flags.tokens().collect::<Vec<_>>().join("|")
    }
}

/// The six rendered output fields of one recovery.
pub fn recovery_fields(r: &Recovery) -> [String; 6] {
    let u = &r.indentation.state;
    [
        format!("{:.6}", r.force.fx),
        format!("{:.6}", r.force.fy),
        format!("{:.6}", r.force.fz),
        format!("{:.6}", u.depth),
        format!("{:.6}", u.diameter()),
        format_flags(&r.indentation.flags),
    ]
}

pub fn parse_frame(line: &str) -> Result<IntensityFrame, String> {
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    if fields.len() != CHANNELS {
        return Err(format!("expected {CHANNELS} channels"));
    }
    let mut pd = [0.0; CHANNELS];
    for (i, (out, field)) in pd.iter_mut().zip(&fields).enumerate() {
        *out = match field.parse::<f64>() {
            Ok(v) if v.is_finite() => v,
            _ => return Err(format!("pd{}: not a finite number", i + 1)),
        };
    }
    Ok(IntensityFrame { pd })
}

/// Response line for one input line, without the newline.
pub fn respond(model: &CalibrationModel, line: &str) -> String {
    match parse_frame(line) {
        Ok(frame) => recovery_fields(&model.recover_force(&frame)).join(","),
        Err(reason) => format!("ERR,{reason}"),
    }
}

/// Answers every line of `input` in order, flushing after each response.
/// Returns the number of lines handled.
pub fn serve_lines<R: BufRead, W: Write>(
    model: &CalibrationModel,
    input: R,
    mut output: W,
) -> io::Result<u64> {
    let mut count = 0;
    for line in input.lines() {
        let line = line?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        writeln!(output, "{}", respond(model, line))?;
        output.flush()?;
        count += 1;
    }
    Ok(count)
}

/// Serves TCP clients one at a time; later connections wait in the accept
/// queue. Stops after `max_clients` connections when given. A client that
/// drops mid-stream is reported on stderr and does not stop the server.
pub fn serve_tcp(
    model: &CalibrationModel,
    listener: &TcpListener,
    max_clients: Option<usize>,
) -> io::Result<()> {
    for (served, stream) in listener.incoming().enumerate() {
        let stream = stream?;
        let peer = stream
            .peer_addr()
            .map(|a| a.to_string())
            .unwrap_or_default();
        let reader = BufReader::new(stream.try_clone()?);
        if let Err(e) = serve_lines(model, reader, BufWriter::new(stream)) {
            eprintln!("client {peer}: {e}");
        }
        if max_clients.is_some_and(|m| served + 1 >= m) {
            break;
        }
    }
    Ok(())
}
