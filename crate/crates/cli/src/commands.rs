use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;

use binotone::edges::canny;
use binotone::energy::ReferenceModel;
use binotone::io::{load_hdr, read_ldr, write_ldr, LdrFormat};
use binotone::optimizer::{optimize_problem, order_views, Problem};
use binotone::perception::ViewFeatures;
use binotone::tonemap::{check_beta, ToneMapper, BETA_CONTRAST_REF, BETA_DETAIL_REF};
use binotone::{LdrImage, StereoMode};

use crate::report::{BatchRow, EvaluationReport, OutputFiles, RunReport, SCHEMA_VERSION};
use crate::settings::Settings;

/// Optimizes one HDR image and writes the pair, both stereo compositions,
/// the report and the trajectory into `out_dir`.
pub fn cmd_optimize(
    input: &Path,
    out_dir: &Path,
    settings: &Settings,
    timing: bool,
) -> Result<RunReport> {
    let config = settings.optimizer()?;
    let img = load_hdr(input)?;
    let problem = Problem::from_config(&img, &config)?;
    let result = optimize_problem(&problem, &config)?;
    let pair = order_views(result.best_pair);
    let (bl, br) = (pair.beta_left, pair.beta_right);

    let energy = problem.evaluate(bl, br)?;
    let baseline_beta = 0.5 * (bl + br);
    let baseline = problem.evaluate(baseline_beta, baseline_beta)?;
    let swap_delta = problem
        .model()
        .detail_swap_delta(&*problem.features(bl)?, &*problem.features(br)?)?;

    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let files = OutputFiles::default();
    write_ldr(&pair.left, out_dir.join(&files.left), LdrFormat::Png)?;
    write_ldr(&pair.right, out_dir.join(&files.right), LdrFormat::Png)?;
    write_ldr(
        &pair.compose(StereoMode::SideBySide)?,
        out_dir.join(&files.side_by_side),
        LdrFormat::Png,
    )?;
    write_ldr(
        &pair.compose(StereoMode::Anaglyph)?,
        out_dir.join(&files.anaglyph),
        LdrFormat::Png,
    )?;

    let mut lines = String::new();
    for step in &result.trajectory {
        lines.push_str(&serde_json::to_string(step)?);
        lines.push('\n');
    }
    write_file(&out_dir.join(&files.trajectory), lines.as_bytes())?;

    let (width, height) = img.dims();
    let report = RunReport {
        schema_version: SCHEMA_VERSION,
        input: input.display().to_string(),
        width,
        height,
        beta_left: bl,
        beta_right: br,
        energy,
        baseline_beta,
        baseline,
        detail_swap_delta: swap_delta,
        iterations: result.iterations_used,
        stage1_iterations: result.stage1_iterations,
        stage2_iterations: result.stage2_iterations,
        converged: result.converged,
        sec_per_iter: timing.then_some(result.wall_time_per_iteration),
        outputs: files,
    };
    let mut json = serde_json::to_string_pretty(&report)?;
    json.push('\n');
    write_file(&out_dir.join(&report.outputs.report), json.as_bytes())?;
    log::info!(
        "{}: beta = ({bl:.3}, {br:.3}), E = {:.4} (baseline {:.4}), {} iterations, {:.3} s/iter",
        input.display(),
        energy.e_total,
        baseline.e_total,
        result.iterations_used,
        result.wall_time_per_iteration
    );
    Ok(report)
}

/// Writes `contrast_ref.png` and `detail_ref.png`.
pub fn cmd_refs(input: &Path, out_dir: &Path, settings: &Settings) -> Result<()> {
    let img = load_hdr(input)?;
    let mapper = ToneMapper::new(&img, &settings.operator())?;
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    write_ldr(
        &mapper.apply(BETA_CONTRAST_REF)?,
        out_dir.join("contrast_ref.png"),
        LdrFormat::Png,
    )?;
    write_ldr(
        &mapper.apply(BETA_DETAIL_REF)?,
        out_dir.join("detail_ref.png"),
        LdrFormat::Png,
    )?;
    Ok(())
}

/// Writes the monocular baseline: the image tone mapped at the midpoint of
/// the two betas.
pub fn cmd_baseline(
    input: &Path,
    beta_l: f64,
    beta_r: f64,
    out: &Path,
    settings: &Settings,
) -> Result<LdrImage> {
    for b in [beta_l, beta_r] {
        if !(settings.beta_min..=settings.beta_max).contains(&b) {
            bail!(
                "beta {b} outside the search box [{}, {}]",
                settings.beta_min,
                settings.beta_max
            );
        }
        check_beta(b)?;
    }
    let format = LdrFormat::from_path(out)
        .with_context(|| format!("{}: output must be .png or .ppm", out.display()))?;
    let img = load_hdr(input)?;
    let mapper = ToneMapper::new(&img, &settings.operator())?;
    let mono = mapper.apply(0.5 * (beta_l + beta_r))?;
    write_ldr(&mono, out, format)?;
    Ok(mono)
}

/// Energy of an 8-bit pair against the references of `input`.
///
/// The references are quantized to 8 bits like the views, so a reference
/// written by `refs` scores exactly.
pub fn cmd_evaluate(
    input: &Path,
    left: &Path,
    right: &Path,
    settings: &Settings,
) -> Result<EvaluationReport> {
    let img = load_hdr(input)?;
    let left = read_ldr(left)?;
    let right = read_ldr(right)?;
    evaluate_pair(&img, &left, &right, settings)
}

pub fn evaluate_pair(
    img: &binotone::HdrImage,
    left: &LdrImage,
    right: &LdrImage,
    settings: &Settings,
) -> Result<EvaluationReport> {
    for view in [left, right] {
        if view.dims() != img.dims() {
            return Err(binotone::Error::DimensionMismatch {
                left: img.dims(),
                right: view.dims(),
            }
            .into());
        }
    }
    let config = settings.energy();
    let mapper = ToneMapper::new(img, &settings.operator())?;
    let contrast_ref = mapper.apply(BETA_CONTRAST_REF)?.quantized();
    let detail_ref = mapper.apply(BETA_DETAIL_REF)?.quantized();
    let edges = canny(&detail_ref, &settings.canny())?;
    let model = ReferenceModel::from_images(&contrast_ref, &detail_ref, &edges, config)?;
    let fl = ViewFeatures::compute(left, &config.fusion);
    let fr = ViewFeatures::compute(right, &config.fusion);
    let energy = model.evaluate(&fl, &fr)?;
    let swapped = model.evaluate(&fr, &fl)?;
    Ok(EvaluationReport {
        schema_version: SCHEMA_VERSION,
        energy,
        swapped,
        detail_swap_delta: (energy.e_d - swapped.e_d).abs(),
    })
}

#[derive(Debug, Clone)]
pub struct BatchSummary {
    pub rows: Vec<BatchRow>,
    pub mean: BatchRow,
    /// Skipped inputs with the reason.
    pub failures: Vec<(PathBuf, String)>,
}

/// HDR inputs of a directory (`.hdr`, `.pic`, `.pfm`), sorted by name.
pub fn hdr_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))? {
        let path = entry?.path();
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        if path.is_file() && matches!(ext.as_deref(), Some("hdr" | "pic" | "pfm")) {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Optimizes every HDR file of `input_dir` and writes one CSV row per image
/// plus a mean row. Unreadable files are skipped with a warning.
pub fn cmd_batch(input_dir: &Path, out_csv: &Path, settings: &Settings) -> Result<BatchSummary> {
    let config = settings.optimizer()?;
    let files = hdr_files(input_dir)?;
    if files.is_empty() {
        bail!("no .hdr/.pic/.pfm files in {}", input_dir.display());
    }
    let outcomes: Vec<(PathBuf, Result<BatchRow>)> = files
        .into_par_iter()
        .map(|path| {
            let row = batch_row(&path, &config);
            (path, row)
        })
        .collect();

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (path, outcome) in outcomes {
        match outcome {
            Ok(row) => rows.push(row),
            Err(err) => {
                log::warn!("skipping {}: {err:#}", path.display());
                failures.push((path, format!("{err:#}")));
            }
        }
    }
    let Some(mean) = BatchRow::mean_of(&rows) else {
        bail!("all {} inputs failed", failures.len());
    };

    let mut writer = csv::Writer::from_path(out_csv)
        .with_context(|| format!("creating {}", out_csv.display()))?;
    for row in rows.iter().chain(std::iter::once(&mean)) {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(BatchSummary {
        rows,
        mean,
        failures,
    })
}

fn batch_row(path: &Path, config: &binotone::optimizer::OptimizerConfig) -> Result<BatchRow> {
    let img = load_hdr(path)?;
    let problem = Problem::from_config(&img, config)?;
    let result = optimize_problem(&problem, config)?;
    let pair = order_views(result.best_pair);
    let (bl, br) = (pair.beta_left, pair.beta_right);
    let e = problem.evaluate(bl, br)?;
    let mono = problem.evaluate_monocular(bl, br)?;
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    Ok(BatchRow {
        schema_version: SCHEMA_VERSION,
        file: name,
        beta_l: bl,
        beta_r: br,
        e_c: e.e_c,
        e_d: e.e_d,
        e_f: e.e_f,
        e: e.e_total,
        e_c_mono: mono.e_c,
        e_d_mono: mono.e_d,
        e_mono: mono.e_total,
        iterations: result.iterations_used as f64,
        sec_per_iter: result.wall_time_per_iteration,
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    f.write_all(bytes)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Process exit code for an error: 2 for a numerical abort, 1 otherwise.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    let numerical = err.chain().any(|e| {
        matches!(
            e.downcast_ref::<binotone::Error>(),
            Some(binotone::Error::NonFiniteEnergy { .. })
        )
    });
    if numerical {
        2
    } else {
        1
    }
}
