//! Command-line front end and on-disk formats.
//!
//! Exit codes: 0 pass (or perfect evaluation), 1 fail (or imperfect
//! evaluation), 2 usage, I/O, configuration or parse errors.

mod canonical;

pub use canonical::{quantize, round_sig6, to_canonical_json};

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imagekit::{decode_image, encode_image, encode_pgm, encode_png, ImageRgb};
use crate::seamcheck::{
    annotate, inspect_with_artifacts, Defect, InspectedPath, InspectionConfig, InspectionReport, Verdict,
};
use crate::synthgen::{evaluate, render_scene, GroundTruth, SceneSpec};

pub const SCHEMA_VERSION: &str = "1.0";
pub const CONFIG_ENV: &str = "SEAMCHECK_CONFIG";

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

/// Serialized inspection report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportDocument {
    pub schema_version: String,
    pub image_id: String,
    pub verdict: Verdict,
    pub threshold: Option<u8>,
    pub paths: Vec<InspectedPath>,
    pub defects: Vec<Defect>,
    pub failure: Option<String>,
    pub diagnostics: Vec<String>,
    pub params: InspectionConfig,
    /// Stage durations; present only when requested, as they vary between
    /// runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<BTreeMap<String, f64>>,
}

impl ReportDocument {
    /// Builds the document with floats already at canonical precision.
    pub fn new(report: &InspectionReport, timings: Option<&[(String, f64)]>) -> Self {
        let doc = Self {
            schema_version: SCHEMA_VERSION.to_string(),
            image_id: report.image_id.clone(),
            verdict: report.verdict,
            threshold: report.threshold,
            paths: report.paths.clone(),
            defects: report.defects.clone(),
            failure: report.failure.clone(),
            diagnostics: report.diagnostics.clone(),
            params: report.params.clone(),
            timings_ms: timings.map(|t| t.iter().cloned().collect()),
        };
        quantize(&doc)
    }

    pub fn to_json(&self) -> String {
        to_canonical_json(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::MalformedFile(format!("report: {e}")))
    }

    pub fn to_report(&self) -> InspectionReport {
        InspectionReport {
            image_id: self.image_id.clone(),
            threshold: self.threshold,
            paths: self.paths.clone(),
            defects: self.defects.clone(),
            verdict: self.verdict,
            failure: self.failure.clone(),
            diagnostics: self.diagnostics.clone(),
            params: self.params.clone(),
        }
    }
}

/// Reads a configuration file, TOML or JSON by extension.
pub fn load_config(path: &Path) -> Result<InspectionConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .unwrap_or("")
        .to_ascii_lowercase();
    match ext.as_str() {
        "toml" => InspectionConfig::from_toml(&text),
        "json" => InspectionConfig::from_json(&text),
        _ => Err(Error::InvalidConfig(format!(
            "{}: config must end in .toml or .json",
            path.display()
        ))),
    }
}

#[derive(Debug, Parser)]
#[command(name = "seamcheck", version, about = "Inspect color-coded seams in fabric images")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Inspect one or more PPM/PNG images.
    Inspect {
        /// Images to inspect.
        #[arg(required = true)]
        images: Vec<PathBuf>,
        /// Configuration file (.toml or .json). Falls back to
        /// $SEAMCHECK_CONFIG, then to built-in defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Directory for annotated images.
        #[arg(long)]
        annotate: Option<PathBuf>,
        /// Directory for report files; required with several images.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the line accumulator as a PGM graymap.
        #[arg(long)]
        dump_accumulator: bool,
        /// Include per-stage timings in the report.
        #[arg(long)]
        timings: bool,
    },
    /// Render a synthetic scene and its ground truth.
    Generate {
        /// Scene spec (JSON).
        spec: PathBuf,
        /// Output prefix; writes <prefix>.ppm and <prefix>.truth.json.
        #[arg(long)]
        out: PathBuf,
        /// Write PNG instead of PPM.
        #[arg(long)]
        png: bool,
    },
    /// Score a report against ground truth.
    Evaluate {
        /// Report written by `inspect`.
        report: PathBuf,
        /// Ground truth written by `generate`.
        truth: PathBuf,
        /// Minimum span IoU for a reported defect to match.
        #[arg(long, default_value_t = 0.3)]
        iou: f64,
    },
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Inspect {
            images,
            config,
            annotate,
            out,
            dump_accumulator,
            timings,
        } => cmd_inspect(&images, config, annotate, out, dump_accumulator, timings),
        Command::Generate { spec, out, png } => cmd_generate(&spec, &out, png),
        Command::Evaluate { report, truth, iou } => cmd_evaluate(&report, &truth, iou),
    };
    match outcome {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("seamcheck: {msg}");
            EXIT_ERROR
        }
    }
}

fn resolve_config(flag: Option<PathBuf>) -> std::result::Result<InspectionConfig, String> {
    let path = flag.or_else(|| {
        std::env::var_os(CONFIG_ENV)
            .filter(|v| !v.is_empty())
            .map(PathBuf::from)
    });
    match path {
        Some(p) => load_config(&p).map_err(|e| e.to_string()),
        None => Ok(InspectionConfig::default()),
    }
}

fn write(path: &Path, bytes: &[u8]) -> std::result::Result<(), String> {
    fs::write(path, bytes).map_err(|e| format!("{}: {e}", path.display()))
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "image".into())
}

fn is_png(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("png"))
}

fn cmd_inspect(
    images: &[PathBuf],
    config: Option<PathBuf>,
    annotate_dir: Option<PathBuf>,
    out: Option<PathBuf>,
    dump_accumulator: bool,
    timings: bool,
) -> std::result::Result<i32, String> {
    let cfg = resolve_config(config)?;
    if images.len() > 1 && out.is_none() {
        return Err("--out is required when inspecting more than one image".into());
    }
    for dir in [&out, &annotate_dir].into_iter().flatten() {
        fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    }

    let results: Vec<std::result::Result<Verdict, String>> = images
        .par_iter()
        .map(|path| {
            let bytes = fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
            let img = decode_image(&bytes).map_err(|e| format!("{}: {e}", path.display()))?;
            let id = path
                .file_name()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            let (report, artifacts) = inspect_with_artifacts(&img, &cfg, &id);
            let doc = ReportDocument::new(&report, timings.then_some(artifacts.timings.as_slice()));
            let name = stem(path);
            match &out {
                Some(dir) => write(&dir.join(format!("{name}.report.json")), doc.to_json().as_bytes())?,
                None => print!("{}", doc.to_json()),
            }
            if let Some(dir) = &annotate_dir {
                let marked = annotate(&img, &report);
                write_image(&dir.join(format!("{name}.annotated")), &marked, is_png(path))?;
            }
            if dump_accumulator {
                if let Some(acc) = &artifacts.line_accumulator {
                    let dir = out
                        .clone()
                        .unwrap_or_else(|| path.parent().map(Path::to_path_buf).unwrap_or_default());
                    write(
                        &dir.join(format!("{name}.accumulator.pgm")),
                        &encode_pgm(&acc.to_gray_image()),
                    )?;
                }
            }
            Ok(report.verdict)
        })
        .collect();

    let mut code = EXIT_PASS;
    for r in results {
        match r {
            Ok(Verdict::Pass) => {}
            Ok(Verdict::Fail) => code = code.max(EXIT_FAIL),
            Err(msg) => {
                eprintln!("seamcheck: {msg}");
                code = EXIT_ERROR;
            }
        }
    }
    Ok(code)
}

fn write_image(base: &Path, img: &ImageRgb, png: bool) -> std::result::Result<(), String> {
    if png {
        write(&with_suffix(base, ".png"), &encode_png(img))
    } else {
        write(&with_suffix(base, ".ppm"), &encode_image(img))
    }
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn cmd_generate(spec_path: &Path, prefix: &Path, png: bool) -> std::result::Result<i32, String> {
    let text = fs::read_to_string(spec_path).map_err(|e| format!("{}: {e}", spec_path.display()))?;
    let spec: SceneSpec =
        serde_json::from_str(&text).map_err(|e| format!("{}: invalid scene spec: {e}", spec_path.display()))?;
    let (img, truth) = render_scene(&spec).map_err(|e| e.to_string())?;
    if let Some(dir) = prefix.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    }
    if png {
        write(&with_suffix(prefix, ".png"), &encode_png(&img))?;
    } else {
        write(&with_suffix(prefix, ".ppm"), &encode_image(&img))?;
    }
    write(
        &with_suffix(prefix, ".truth.json"),
        to_canonical_json(&truth).as_bytes(),
    )?;
    Ok(EXIT_PASS)
}

fn cmd_evaluate(report: &Path, truth: &Path, iou: f64) -> std::result::Result<i32, String> {
    if !(iou > 0.0 && iou <= 1.0) {
        return Err(format!("--iou must be in (0, 1], got {iou}"));
    }
    let read = |p: &Path| fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()));
    let doc = ReportDocument::from_json(&read(report)?).map_err(|e| format!("{}: {e}", report.display()))?;
    let truth: GroundTruth =
        serde_json::from_str(&read(truth)?).map_err(|e| format!("{}: invalid ground truth: {e}", truth.display()))?;
    let result = evaluate(&doc.to_report(), &truth, iou);
    print!("{}", to_canonical_json(&result));
    Ok(if result.f1 == 1.0 { EXIT_PASS } else { EXIT_FAIL })
}
