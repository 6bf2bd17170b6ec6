//! End-to-end restoration: file in, restored file plus reports out.
//!
//! The stage order is fixed: channel compensation → statistical balance
//! → illumination estimation → transmission estimation → variational
//! solve, each stage consuming the previous stage's output. [`restore`]
//! runs that chain in memory; [`run_single`] and [`run_batch`] wrap it
//! with file I/O, metric reports, and optional intermediate dumps.
//!
//! Everything here is deterministic: given the same input bytes and the
//! same configuration, the restored PNG and the JSON/CSV reports are
//! byte-identical across runs. Batch entries are processed in parallel
//! but aggregated in sorted path order.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::color::{color_balance, compensate_channels};
use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::illumination::{estimate_illumination, IlluminationResult};
use crate::image_io::{load_image, save_png, RgbField};
use crate::metrics::MetricReport;
use crate::solver::{solve_channel, SolveReport};
use crate::transmission::{estimate_transmission, TransmissionResult};

/// Everything produced while restoring one image.
#[derive(Debug, Clone)]
pub struct RestoreArtifacts {
    /// Final display image, clamped to `[0, 1]` (not yet quantized).
    pub restored: RgbField,
    /// After channel compensation.
    pub compensated: RgbField,
    /// After statistical balance (the solver's observation).
    pub balanced: RgbField,
    /// Illumination estimate with intermediates.
    pub illumination: IlluminationResult,
    /// Transmission estimate with the raw map.
    pub transmission: TransmissionResult,
    /// Per-channel solver convergence records (r, g, b).
    pub reports: [SolveReport; 3],
}

/// Runs the full restoration chain on an in-memory image.
///
/// # Errors
/// Configuration errors from [`PipelineConfig::validate`], shape errors
/// from the stages, and [`Error::SolverDiverged`] from the solver.
pub fn restore(img: &RgbField, cfg: &PipelineConfig) -> Result<RestoreArtifacts> {
    cfg.validate()?;
    let compensated = compensate_channels(img, &cfg.color)?;
    let balanced = color_balance(&compensated, &cfg.color)?;
    let illumination = estimate_illumination(&balanced, &cfg.illumination, &cfg.mask_filter)?;
    let transmission =
        estimate_transmission(&balanced, &illumination.l, &cfg.transmission, &cfg.transmission_filter)?;

    let solutions: Result<Vec<_>> = (0..3)
        .map(|c| {
            solve_channel(
                &balanced.channels[c],
                &illumination.l.channels[c],
                &transmission.t,
                &cfg.solver,
            )
        })
        .collect();
    let solutions = solutions?;

    let rho = cfg.output.display_rho;
    let floor = cfg.illumination.floor;
    let mut restored = RgbField::zeros(img.rows(), img.cols());
    for (c, sol) in solutions.iter().enumerate() {
        restored.channels[c] = if rho > 0.0 {
            sol.r.zip_map(&sol.l, |r, l| {
                (r.clamp(0.0, 1.0) * l.clamp(floor, 1.0).powf(rho)).clamp(0.0, 1.0)
            })
        } else {
            sol.r.map(|r| r.clamp(0.0, 1.0))
        };
    }
    let mut it = solutions.into_iter();
    let reports = [
        it.next().expect("three solutions").report,
        it.next().expect("three solutions").report,
        it.next().expect("three solutions").report,
    ];
    Ok(RestoreArtifacts {
        restored,
        compensated,
        balanced,
        illumination,
        transmission,
        reports,
    })
}

/// Outcome of restoring one file.
#[derive(Debug, Clone)]
pub struct SingleOutcome {
    /// Where the restored PNG was written.
    pub output_path: PathBuf,
    /// Scores of the restored image; `ciede2000` measured against the
    /// raw input.
    pub metrics: MetricReport,
    /// Per-channel solver records.
    pub reports: [SolveReport; 3],
    /// Human-readable warnings (large input, …). Never affects outputs.
    pub warnings: Vec<String>,
}

/// JSON report layout for one restored image.
#[derive(Serialize)]
struct SingleReport<'a> {
    input: String,
    output: String,
    metrics: &'a MetricReport,
    solver: &'a [SolveReport; 3],
}

/// Derives `<parent>/<stem><suffix>.png` from the input path.
fn default_output_path(input: &Path, suffix: &str) -> PathBuf {
    let stem = input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "image".to_string());
    input.with_file_name(format!("{stem}{suffix}.png"))
}

/// Replicates a scalar map into three equal channels for viewing.
fn gray_image(f: &Field) -> RgbField {
    RgbField::from_channels(f.clone(), f.clone(), f.clone()).expect("equal shapes")
}

/// Input and restored image side by side, separated by a thin white bar.
fn panel_image(raw: &RgbField, restored: &RgbField) -> RgbField {
    let (h, w) = raw.shape();
    const GAP: usize = 4;
    RgbField::from_fn(h, 2 * w + GAP, |i, j, c| {
        if j < w {
            raw.pixel(i, j)[c]
        } else if j < w + GAP {
            1.0
        } else {
            restored.pixel(i, j - w - GAP)[c]
        }
    })
}

/// Writes the per-stage intermediates next to the output path:
/// `<stem>_compensated.png`, `_balanced.png`, `_L0.png`, `_L.png`,
/// `_t_raw.png`, `_t.png`. Scalar maps are saved as grayscale, scaled
/// by 255 like every other image.
pub fn dump_intermediates(art: &RestoreArtifacts, output_path: &Path) -> Result<()> {
    let stem = output_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "image".to_string());
    let named = |tag: &str| output_path.with_file_name(format!("{stem}_{tag}.png"));
    save_png(&named("compensated"), &art.compensated)?;
    save_png(&named("balanced"), &art.balanced)?;
    save_png(&named("L0"), &art.illumination.l0)?;
    save_png(&named("L"), &art.illumination.l)?;
    save_png(&named("t_raw"), &gray_image(&art.transmission.t_raw))?;
    save_png(&named("t"), &gray_image(&art.transmission.t))?;
    Ok(())
}

/// Restores one file end to end.
///
/// Writes the restored PNG to `output` (default: input path with the
/// configured suffix), optionally a JSON report and the intermediate
/// dumps. Metrics are computed on the 8-bit-requantized restored image;
/// the color difference is measured against the raw input.
///
/// # Errors
/// Configuration, image I/O, and solver errors, each mapped to its own
/// exit code by the command-line wrapper.
pub fn run_single(
    input: &Path,
    output: Option<&Path>,
    report: Option<&Path>,
    dump: bool,
    cfg: &PipelineConfig,
) -> Result<SingleOutcome> {
    cfg.validate()?;
    let raw = load_image(input)?;
    let mut warnings = Vec::new();
    let long_side = raw.rows().max(raw.cols());
    if long_side > cfg.output.size_warning {
        warnings.push(format!(
            "{}: long side {long_side}px exceeds {}px; processing at full size may be slow",
            input.display(),
            cfg.output.size_warning
        ));
    }

    let art = restore(&raw, cfg)?;
    let out_path = output
        .map(Path::to_path_buf)
        .unwrap_or_else(|| default_output_path(input, &cfg.output.suffix));
    save_png(&out_path, &art.restored)?;
    if cfg.output.panel {
        let stem = out_path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "image".to_string());
        let panel_path = out_path.with_file_name(format!("{stem}_panel.png"));
        save_png(&panel_path, &panel_image(&raw, &art.restored))?;
    }
    if dump {
        dump_intermediates(&art, &out_path)?;
    }

    let metrics = MetricReport::compute(&art.restored.quantize_u8(), Some(&raw))?;
    if let Some(report_path) = report {
        let payload = SingleReport {
            input: input.display().to_string(),
            output: out_path.display().to_string(),
            metrics: &metrics,
            solver: &art.reports,
        };
        let json = serde_json::to_string_pretty(&payload).expect("report serialization");
        std::fs::write(report_path, json).map_err(|source| Error::Io {
            path: report_path.to_path_buf(),
            source,
        })?;
    }

    Ok(SingleOutcome {
        output_path: out_path,
        metrics,
        reports: art.reports,
        warnings,
    })
}

/// One line of the batch summary.
#[derive(Debug, Clone, Serialize)]
pub struct BatchRow {
    /// Input path as listed.
    pub path: String,
    /// Entropy of the restored image.
    pub entropy: f64,
    /// UCIQE of the restored image.
    pub uciqe: f64,
    /// Mean ΔE₀₀ between restored and raw input.
    pub ciede2000: f64,
    /// Largest per-channel outer iteration count.
    pub iterations: usize,
    /// Whether all three channels converged before the cap.
    pub converged: bool,
}

/// Outcome of a directory run.
#[derive(Debug, Clone)]
pub struct BatchOutcome {
    /// Per-image rows, in sorted path order.
    pub rows: Vec<BatchRow>,
    /// Files that failed, with their error messages, in sorted order.
    pub failures: Vec<(PathBuf, String)>,
    /// Where the summary CSV was written.
    pub csv_path: PathBuf,
    /// Size warnings from individual images.
    pub warnings: Vec<String>,
}

/// JSON report layout for a batch run.
#[derive(Serialize)]
struct BatchReport<'a> {
    rows: &'a [BatchRow],
    failures: Vec<BatchFailure>,
}

#[derive(Serialize)]
struct BatchFailure {
    path: String,
    error: String,
}

/// Renders the summary CSV: header, one row per image, and a mean row
/// whose numeric columns are the arithmetic means of the image rows
/// (`converged` becomes the fraction of converged images).
fn render_csv(rows: &[BatchRow]) -> String {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(["path", "entropy", "uciqe", "ciede2000", "iterations", "converged"])
        .expect("csv header");
    for r in rows {
        wtr.write_record([
            r.path.clone(),
            r.entropy.to_string(),
            r.uciqe.to_string(),
            r.ciede2000.to_string(),
            r.iterations.to_string(),
            r.converged.to_string(),
        ])
        .expect("csv row");
    }
    if !rows.is_empty() {
        let n = rows.len() as f64;
        let mean = |f: fn(&BatchRow) -> f64| rows.iter().map(f).sum::<f64>() / n;
        wtr.write_record([
            "mean".to_string(),
            mean(|r| r.entropy).to_string(),
            mean(|r| r.uciqe).to_string(),
            mean(|r| r.ciede2000).to_string(),
            mean(|r| r.iterations as f64).to_string(),
            mean(|r| if r.converged { 1.0 } else { 0.0 }).to_string(),
        ])
        .expect("csv mean row");
    }
    String::from_utf8(wtr.into_inner().expect("csv buffer")).expect("csv utf8")
}

/// Lists the batch inputs: files with a PNG/JPEG extension, sorted by
/// path for deterministic ordering.
fn list_images(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut paths = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|source| Error::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let path = entry.path();
        let is_image = path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| {
                let e = e.to_ascii_lowercase();
                e == "png" || e == "jpg" || e == "jpeg"
            })
            .unwrap_or(false);
        if path.is_file() && is_image {
            paths.push(path);
        }
    }
    paths.sort();
    Ok(paths)
}

/// Restores every PNG/JPEG in `dir`.
///
/// Restored images land in `out_dir` (default: next to their inputs)
/// and the summary CSV in `<out_dir>/summary.csv` (or `<dir>/summary.csv`).
/// Failures are collected per file — the batch continues — and an
/// optional JSON report mirrors rows plus failures.
///
/// # Errors
/// An unreadable directory or a directory with no images at all;
/// configuration errors. Per-image failures do **not** error — they are
/// returned in [`BatchOutcome::failures`].
pub fn run_batch(
    dir: &Path,
    out_dir: Option<&Path>,
    report: Option<&Path>,
    dump: bool,
    cfg: &PipelineConfig,
) -> Result<BatchOutcome> {
    cfg.validate()?;
    let inputs = list_images(dir)?;
    if inputs.is_empty() {
        return Err(Error::EmptyInput {
            context: "batch directory contains no PNG/JPEG images",
        });
    }
    if let Some(d) = out_dir {
        std::fs::create_dir_all(d).map_err(|source| Error::Io {
            path: d.to_path_buf(),
            source,
        })?;
    }

    let results: Vec<(PathBuf, std::result::Result<SingleOutcome, String>)> = inputs
        .par_iter()
        .map(|input| {
            let output = out_dir.map(|d| {
                let name = default_output_path(input, &cfg.output.suffix)
                    .file_name()
                    .map(|n| n.to_os_string())
                    .expect("derived file name");
                d.join(name)
            });
            let outcome = run_single(input, output.as_deref(), None, dump, cfg)
                .map_err(|e| e.to_string());
            (input.clone(), outcome)
        })
        .collect();

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut warnings = Vec::new();
    for (path, res) in results {
        match res {
            Ok(outcome) => {
                warnings.extend(outcome.warnings);
                rows.push(BatchRow {
                    path: path.display().to_string(),
                    entropy: outcome.metrics.entropy,
                    uciqe: outcome.metrics.uciqe,
                    ciede2000: outcome.metrics.ciede2000.unwrap_or(0.0),
                    iterations: outcome
                        .reports
                        .iter()
                        .map(|r| r.iterations)
                        .max()
                        .unwrap_or(0),
                    converged: outcome.reports.iter().all(|r| r.converged),
                });
            }
            Err(message) => failures.push((path, message)),
        }
    }

    let csv_path = out_dir.unwrap_or(dir).join("summary.csv");
    std::fs::write(&csv_path, render_csv(&rows)).map_err(|source| Error::Io {
        path: csv_path.clone(),
        source,
    })?;

    if let Some(report_path) = report {
        let payload = BatchReport {
            rows: &rows,
            failures: failures
                .iter()
                .map(|(p, e)| BatchFailure {
                    path: p.display().to_string(),
                    error: e.clone(),
                })
                .collect(),
        };
        let json = serde_json::to_string_pretty(&payload).expect("report serialization");
        std::fs::write(report_path, json).map_err(|source| Error::Io {
            path: report_path.to_path_buf(),
            source,
        })?;
    }

    Ok(BatchOutcome {
        rows,
        failures,
        csv_path,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::degraded_samples;

    fn small_cfg() -> PipelineConfig {
        // Keep unit-test runtime low: few iterations, small filters.
        let mut cfg = PipelineConfig::default();
        cfg.solver.max_iters = 4;
        cfg.transmission.patch = 2;
        cfg.transmission_filter.radius = 3;
        cfg.mask_filter.radius = 3;
        cfg
    }

    #[test]
    fn restore_preserves_channel_symmetry() {
        // A gray image (three equal channels) must stay gray through the
        // whole chain: every stage treats equal channels equally.
        let img = RgbField::from_fn(24, 24, |i, j, _| {
            0.3 + 0.4 * ((i as f64 / 24.0).sin() * (j as f64 / 24.0).cos()).abs()
        });
        let art = restore(&img, &small_cfg()).unwrap();
        assert_eq!(
            art.restored.channels[0].as_slice(),
            art.restored.channels[1].as_slice()
        );
        assert_eq!(
            art.restored.channels[1].as_slice(),
            art.restored.channels[2].as_slice()
        );
    }

    #[test]
    fn restore_output_is_clamped() {
        let sample = &degraded_samples(21, 1, 24)[0];
        let art = restore(&sample.degraded, &small_cfg()).unwrap();
        for c in 0..3 {
            assert!(art.restored.channels[c].min() >= 0.0);
            assert!(art.restored.channels[c].max() <= 1.0);
        }
    }

    #[test]
    fn display_rho_dims_the_output() {
        let sample = &degraded_samples(22, 1, 24)[0];
        let mut cfg = small_cfg();
        let plain = restore(&sample.degraded, &cfg).unwrap();
        cfg.output.display_rho = 1.0;
        let relit = restore(&sample.degraded, &cfg).unwrap();
        // multiplying by L^1 (L <= 1) can only darken
        for c in 0..3 {
            for (a, b) in plain.restored.channels[c]
                .as_slice()
                .iter()
                .zip(relit.restored.channels[c].as_slice())
            {
                assert!(*b <= a + 1e-12);
            }
        }
    }

    #[test]
    fn csv_layout_and_mean_row() {
        let rows = vec![
            BatchRow {
                path: "a.png".into(),
                entropy: 6.0,
                uciqe: 0.5,
                ciede2000: 10.0,
                iterations: 10,
                converged: true,
            },
            BatchRow {
                path: "b.png".into(),
                entropy: 7.0,
                uciqe: 0.6,
                ciede2000: 20.0,
                iterations: 20,
                converged: false,
            },
        ];
        let csv = render_csv(&rows);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "path,entropy,uciqe,ciede2000,iterations,converged");
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[3], "mean,6.5,0.55,15,15,0.5");
    }

    #[test]
    fn panel_is_input_then_restored() {
        let raw = RgbField::from_fn(3, 4, |_, _, c| [0.2, 0.4, 0.6][c]);
        let restored = RgbField::from_fn(3, 4, |_, _, c| [0.8, 0.7, 0.1][c]);
        let panel = panel_image(&raw, &restored);
        assert_eq!(panel.shape(), (3, 12));
        assert_eq!(panel.pixel(1, 0), [0.2, 0.4, 0.6]);
        assert_eq!(panel.pixel(1, 5), [1.0, 1.0, 1.0]);
        assert_eq!(panel.pixel(1, 8), [0.8, 0.7, 0.1]);
    }

    #[test]
    fn default_output_path_appends_suffix() {
        let p = default_output_path(Path::new("/data/reef.jpg"), "_restored");
        assert_eq!(p, Path::new("/data/reef_restored.png"));
    }
}
