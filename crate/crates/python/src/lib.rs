//! Python bindings for the seamcheck inspection library.
//!
//! Structured values (configs, reports, scene specs, ground truth,
//! evaluation results) cross the boundary as JSON text in the same
//! canonical form the command-line tool writes.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyBytes;

use seamcheck::binarization::{otsu_threshold as otsu, Histogram256};
use seamcheck::cli::{to_canonical_json, ReportDocument};
use seamcheck::imagekit::{self, HsvPixel, ImageRgb};
use seamcheck::seamcheck::InspectionConfig;
use seamcheck::synthgen::{self, GroundTruth, SceneSpec};

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// An 8-bit RGB raster.
#[pyclass(name = "Image", module = "seamcheck_py", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyImage {
    inner: ImageRgb,
}

#[pymethods]
impl PyImage {
    /// Builds an image from row-major interleaved RGB bytes.
    #[new]
    fn new(width: usize, height: usize, data: &[u8]) -> PyResult<Self> {
        if data.len() != width * height * 3 {
            return Err(value_error(format!(
                "expected {} bytes for {width}x{height}, got {}",
                width * height * 3,
                data.len()
            )));
        }
        let pixels = data.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
        let inner = ImageRgb::new(width, height, pixels).map_err(value_error)?;
        Ok(Self { inner })
    }

    /// Decodes PPM (P6) or PNG file contents.
    #[staticmethod]
    fn decode(data: &[u8]) -> PyResult<Self> {
        let inner = imagekit::decode_image(data).map_err(value_error)?;
        Ok(Self { inner })
    }

    #[getter]
    fn width(&self) -> usize {
        self.inner.width()
    }

    #[getter]
    fn height(&self) -> usize {
        self.inner.height()
    }

    fn pixel(&self, x: usize, y: usize) -> PyResult<(u8, u8, u8)> {
        if x >= self.inner.width() || y >= self.inner.height() {
            return Err(value_error(format!("({x}, {y}) is outside the image")));
        }
        let [r, g, b] = self.inner.get(x, y);
        Ok((r, g, b))
    }

    /// Raw interleaved RGB bytes.
    fn to_bytes<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        let flat: Vec<u8> = self.inner.pixels().iter().flatten().copied().collect();
        PyBytes::new(py, &flat)
    }

    /// File contents in `"ppm"` or `"png"` format.
    #[pyo3(signature = (format = "ppm"))]
    fn encode<'py>(&self, py: Python<'py>, format: &str) -> PyResult<Bound<'py, PyBytes>> {
        let bytes = match format {
            "ppm" => imagekit::encode_image(&self.inner),
            "png" => imagekit::encode_png(&self.inner),
            other => return Err(value_error(format!("unknown format {other:?}"))),
        };
        Ok(PyBytes::new(py, &bytes))
    }

    /// Rec. 601 luma as row-major bytes.
    fn grayscale<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, imagekit::to_grayscale(&self.inner).pixels())
    }

    fn __repr__(&self) -> String {
        format!("Image({}x{})", self.inner.width(), self.inner.height())
    }
}

/// Hexcone HSV: hue in degrees, saturation and value in [0, 1].
#[pyfunction]
fn rgb_to_hsv(r: u8, g: u8, b: u8) -> (f64, f64, f64) {
    let p = imagekit::rgb_to_hsv(r, g, b);
    (p.h, p.s, p.v)
}

#[pyfunction]
fn hsv_to_rgb(h: f64, s: f64, v: f64) -> (u8, u8, u8) {
    let [r, g, b] = imagekit::hsv_to_rgb(HsvPixel { h, s, v });
    (r, g, b)
}

/// Otsu threshold of a 256-bin histogram; returns `(t, within_variance)`.
#[pyfunction]
fn otsu_threshold(counts: Vec<u64>) -> PyResult<(u8, f64)> {
    let counts: [u64; 256] = counts
        .try_into()
        .map_err(|v: Vec<u64>| value_error(format!("expected 256 counts, got {}", v.len())))?;
    let r = otsu(&Histogram256::from_counts(counts)).map_err(value_error)?;
    Ok((r.t, r.objective))
}

/// Default inspection parameters as JSON.
#[pyfunction]
fn default_config() -> String {
    to_canonical_json(&InspectionConfig::default())
}

/// Inspects an image and returns the report JSON.
#[pyfunction]
#[pyo3(signature = (image, config_json = None, image_id = "image"))]
fn inspect(py: Python<'_>, image: &PyImage, config_json: Option<&str>, image_id: &str) -> PyResult<String> {
    let cfg = match config_json {
        Some(text) => InspectionConfig::from_json(text).map_err(value_error)?,
        None => InspectionConfig::default(),
    };
    let img = image.inner.clone();
    let id = image_id.to_string();
    let report = py.detach(move || seamcheck::seamcheck::inspect(&img, &cfg, &id));
    Ok(ReportDocument::new(&report, None).to_json())
}

/// Renders a scene spec; returns the image and the ground-truth JSON.
#[pyfunction]
fn render_scene(spec_json: &str) -> PyResult<(PyImage, String)> {
    let spec: SceneSpec = serde_json::from_str(spec_json).map_err(value_error)?;
    let (inner, truth) = synthgen::render_scene(&spec).map_err(value_error)?;
    Ok((PyImage { inner }, to_canonical_json(&truth)))
}

/// Scores a report against ground truth; returns the result JSON.
#[pyfunction]
#[pyo3(signature = (report_json, truth_json, iou = 0.3))]
fn evaluate(report_json: &str, truth_json: &str, iou: f64) -> PyResult<String> {
    let doc = ReportDocument::from_json(report_json).map_err(value_error)?;
    let truth: GroundTruth = serde_json::from_str(truth_json).map_err(value_error)?;
    if !(0.0..=1.0).contains(&iou) {
        return Err(value_error(format!("iou must be in [0, 1], got {iou}")));
    }
    Ok(to_canonical_json(&synthgen::evaluate(&doc.to_report(), &truth, iou)))
}

/// The reference scenes as `(name, spec_json)` pairs.
#[pyfunction]
#[pyo3(signature = (noise_sigma = 0.0))]
fn fixture_suite(noise_sigma: f64) -> Vec<(String, String)> {
    synthgen::fixture_suite(noise_sigma)
        .into_iter()
        .map(|(name, spec)| (name, to_canonical_json(&spec)))
        .collect()
}

#[pymodule]
fn seamcheck_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyImage>()?;
    m.add_function(wrap_pyfunction!(rgb_to_hsv, m)?)?;
    m.add_function(wrap_pyfunction!(hsv_to_rgb, m)?)?;
    m.add_function(wrap_pyfunction!(otsu_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(default_config, m)?)?;
    m.add_function(wrap_pyfunction!(inspect, m)?)?;
    m.add_function(wrap_pyfunction!(render_scene, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(fixture_suite, m)?)?;
    Ok(())
}
