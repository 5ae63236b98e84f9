//! Subcommand bodies. Each writes its human-readable report to `log`, so
//! tests can capture it.

use std::fs::{self, File};
use std::io::{self, BufRead, BufWriter, Write};
use std::net::{TcpListener, ToSocketAddrs};
use std::path::Path;
use std::time::UNIX_EPOCH;

use fibercal_core::calibration::SampleResidual;
use fibercal_core::{CalibrationModel, EvaluationReport, Sample};

use crate::dataio::config::{load_config, SimulationConfig};
use crate::dataio::dataset::{load_dataset, save_dataset, write_dataset_with};
use crate::dataio::model_file::{load_model, save_model};
use crate::error::{Error, Result};
use crate::stream::{self, recovery_fields, FIELDS};

pub const SOURCE_DATE_EPOCH: &str = "SOURCE_DATE_EPOCH";

fn log_line(log: &mut dyn Write, text: std::fmt::Arguments<'_>) -> Result<()> {
    log.write_fmt(text)
        .and_then(|_| log.write_all(b"\n"))
        .map_err(|e| Error::io(Path::new("<output>"), e))
}

/// Writes the calibration grid and the midpoint test set.
pub fn simulate(
    config: Option<&Path>,
    seed: Option<u64>,
    calibration_out: &Path,
    test_out: &Path,
    log: &mut dyn Write,
) -> Result<()> {
    let mut cfg = match config {
        Some(path) => load_config(path)?,
        None => SimulationConfig::reference(),
    };
    if let Some(seed) = seed {
        cfg = cfg.with_seed(seed);
    }
    let data = cfg.sensor.generate_grid_dataset(&cfg.grid)?;
    save_dataset(&data.calibration, calibration_out)?;
    save_dataset(&data.test, test_out)?;
    log_line(log, format_args!("seed={}", cfg.sensor.seed))?;
    log_line(
        log,
        format_args!("noise_sigma={:e}", cfg.sensor.noise_sigma),
    )?;
    log_line(log, format_args!("gamma={}", cfg.sensor.gamma))?;
    log_line(
        log,
        format_args!("calibration_samples={}", data.calibration.len()),
    )?;
    log_line(log, format_args!("test_samples={}", data.test.len()))
}

/// `SOURCE_DATE_EPOCH` when set, else the dataset's modification time.
fn creation_time(dataset: &Path) -> Result<u64> {
    if let Ok(value) = std::env::var(SOURCE_DATE_EPOCH) {
        return value.trim().parse().map_err(|_| {
            Error::config(
                Path::new(SOURCE_DATE_EPOCH),
                format!("`{value}` is not a Unix timestamp"),
            )
        });
    }
    let modified = fs::metadata(dataset)
        .and_then(|m| m.modified())
        .map_err(|e| Error::io(dataset, e))?;
    Ok(modified
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs()))
}

pub fn calibrate(
    dataset: &Path,
    model_out: &Path,
    log: &mut dyn Write,
) -> Result<CalibrationModel> {
    let samples = load_dataset(dataset)?;
    let model = CalibrationModel::calibrate(&samples)?.with_created_unix(creation_time(dataset)?);
    save_model(&model, model_out)?;
    let meta = model.meta();
    log_line(
        log,
        format_args!("indentation_samples={}", meta.indentation_samples),
    )?;
    log_line(log, format_args!("shear_samples={}", meta.shear_samples))?;
    log_line(log, format_args!("residual_r={:e}", meta.residual_r))?;
    log_line(log, format_args!("residual_k={:e}", meta.residual_k))?;
    log_line(log, format_args!("residual_c={:e}", meta.residual_c))?;
    Ok(model)
}

/// Prediction column names appended by [`predict`].
pub fn prediction_columns() -> Vec<String> {
    FIELDS.iter().map(|f| format!("pred_{f}")).collect()
}

pub fn write_predictions<W: Write>(
    model: &CalibrationModel,
    samples: &[Sample],
    output: W,
) -> io::Result<()> {
    let columns = prediction_columns();
    let columns: Vec<&str> = columns.iter().map(String::as_str).collect();
    write_dataset_with(
        samples,
        &columns,
        |s| recovery_fields(&model.recover_force(&s.frame)).to_vec(),
        output,
    )
}

/// Copies the dataset with prediction columns appended, to `out` or stdout.
pub fn predict(model: &Path, dataset: &Path, out: Option<&Path>) -> Result<()> {
    let model = load_model(model)?;
    let samples = load_dataset(dataset)?;
    match out {
        Some(path) => {
            let file = File::create(path).map_err(|e| Error::io(path, e))?;
            write_predictions(&model, &samples, BufWriter::new(file))
                .map_err(|e| Error::io(path, e))
        }
        None => write_predictions(&model, &samples, io::stdout().lock())
            .map_err(|e| Error::io(Path::new("<stdout>"), e)),
    }
}

pub fn report_block(report: &EvaluationReport) -> String {
    let rows = [
        ("mae_fx_n", report.mae_fx),
        ("mae_fy_n", report.mae_fy),
        ("mae_fz_n", report.mae_fz),
        ("mae_force_mean_n", report.mean_force_mae()),
        ("mae_depth_mm", report.mae_depth),
        ("mae_diameter_mm", report.mae_diameter),
    ];
    let mut out = format!("samples={}\n", report.residuals.len());
    for (key, value) in rows {
        out.push_str(&format!("{key}={value:.9}\n"));
    }
    out
}

fn write_csv(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut wtr = csv::Writer::from_writer(BufWriter::new(file));
    let result = wtr
        .write_record(header)
        .and_then(|_| rows.into_iter().try_for_each(|r| wtr.write_record(&r)))
        .map_err(crate::dataio::dataset::into_io)
        .and_then(|_| wtr.flush());
    result.map_err(|e| Error::io(path, e))
}

fn truth_and_prediction(r: &SampleResidual) -> [(f64, f64); 5] {
    let pred = &r.recovery;
    [
        (r.true_force.fx, pred.force.fx),
        (r.true_force.fy, pred.force.fy),
        (r.true_force.fz, pred.force.fz),
        (r.true_indentation.depth, pred.indentation.state.depth),
        (
            r.true_indentation.diameter(),
            pred.indentation.state.diameter(),
        ),
    ]
}

const QUANTITIES: [&str; 5] = ["fx", "fy", "fz", "depth_mm", "diameter_mm"];

pub fn write_residuals(report: &EvaluationReport, path: &Path) -> Result<()> {
    let mut header = vec!["index".to_string()];
    for q in QUANTITIES {
        header.push(format!("true_{q}"));
        header.push(format!("pred_{q}"));
        header.push(format!("err_{q}"));
    }
    header.push("flags".into());
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = report.residuals.iter().map(|r| {
        let mut row = vec![r.index.to_string()];
        for (truth, pred) in truth_and_prediction(r) {
            row.push(truth.to_string());
            row.push(pred.to_string());
            row.push((pred - truth).to_string());
        }
        row.push(stream::format_flags(&r.recovery.indentation.flags));
        row
    });
    write_csv(path, &header, rows)
}

/// One `true,predicted` file per quantity, for real-versus-estimate plots.
pub fn write_plot_data(report: &EvaluationReport, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (q, name) in QUANTITIES.iter().enumerate() {
        let rows = report.residuals.iter().map(|r| {
            let (truth, pred) = truth_and_prediction(r)[q];
            vec![truth.to_string(), pred.to_string()]
        });
        write_csv(
            &dir.join(format!("{name}.csv")),
            &["true", "predicted"],
            rows,
        )?;
    }
    Ok(())
}

pub fn evaluate(
    model: &Path,
    dataset: &Path,
    residuals_out: Option<&Path>,
    plot_dir: Option<&Path>,
    log: &mut dyn Write,
) -> Result<EvaluationReport> {
    let model = load_model(model)?;
    let samples = load_dataset(dataset)?;
    let report = model.evaluate(&samples)?;
    if let Some(path) = residuals_out {
        write_residuals(&report, path)?;
    }
    if let Some(dir) = plot_dir {
        write_plot_data(&report, dir)?;
    }
    log.write_all(report_block(&report).as_bytes())
        .map_err(|e| Error::io(Path::new("<output>"), e))?;
    Ok(report)
}

/// Serves `input` lines to `output`, e.g. stdin to stdout.
pub fn serve_stream<R: BufRead, W: Write>(model: &Path, input: R, output: W) -> Result<u64> {
    let model = load_model(model)?;
    stream::serve_lines(&model, input, output).map_err(|e| Error::io(Path::new("<stream>"), e))
}

/// Serves TCP clients on `host:port`. The bound address goes to `log`.
pub fn serve_tcp(
    model: &Path,
    host: &str,
    port: u16,
    max_clients: Option<usize>,
    log: &mut dyn Write,
) -> Result<()> {
    let model = load_model(model)?;
    let label = format!("{host}:{port}");
    let endpoint = Path::new(&label);
    let addrs: Vec<_> = (host, port)
        .to_socket_addrs()
        .map_err(|e| Error::io(endpoint, e))?
        .collect();
    let listener = TcpListener::bind(&addrs[..]).map_err(|e| Error::io(endpoint, e))?;
    let local = listener.local_addr().map_err(|e| Error::io(endpoint, e))?;
    log_line(log, format_args!("listening on {local}"))?;
    log.flush().map_err(|e| Error::io(endpoint, e))?;
    stream::serve_tcp(&model, &listener, max_clients).map_err(|e| Error::io(endpoint, e))
}
