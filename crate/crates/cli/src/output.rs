//! Output files and the hashed run manifest.
//!
//! Result JSON documents are byte-reproducible for identical config and
//! seed: timings are stripped from results and recorded only in the
//! manifest, numbers serialize through the deterministic shortest-roundtrip
//! formatter, and CSV floats are printed at 17 significant digits.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;
use sha2::{Digest, Sha256};

use pblab_core::experiments::{ConsistencyReport, MinimizeResult, MonotonicityViolation, SweepTable};
use pblab_core::partition::PartitionReport;
use pblab_core::pbnorm::PbReport;
use pblab_core::spacefill::{CellMeasure, HilbertCurve};
use pblab_core::surface::{poisson_bracket_masked, FdOrder, ScalarField};

pub struct OutputWriter {
    dir: PathBuf,
    config_sha256: String,
    seed: u64,
    outputs: Vec<ManifestEntry>,
}

#[derive(Serialize)]
struct ManifestEntry {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    config_sha256: &'a str,
    seed: u64,
    wall_time_s: f64,
    outputs: &'a [ManifestEntry],
}

fn sha_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl OutputWriter {
    pub fn new(dir: &Path, raw_config: &[u8], seed: u64) -> anyhow::Result<Self> {
        fs::create_dir_all(dir)
            .with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(OutputWriter {
            dir: dir.to_path_buf(),
            config_sha256: sha_hex(raw_config),
            seed,
            outputs: Vec::new(),
        })
    }

    fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> anyhow::Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.outputs.push(ManifestEntry {
            path: name.to_string(),
            sha256: sha_hex(bytes),
        });
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> anyhow::Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write_bytes(name, text.as_bytes())
    }

    /// Witness heat map: the absolute bracket of the two weighted witness
    /// combinations, one CSV row per grid point.
    fn write_heatmap(
        &mut self,
        report: &PbReport,
        fields: &[ScalarField],
        weights: &[f64],
    ) -> anyhow::Result<()> {
        if fields.is_empty() {
            return Ok(());
        }
        let surface = fields[0].surface().clone();
        let combine = |signs: &[i8]| -> ScalarField {
            let mut out = ScalarField::zeros(surface.clone());
            for ((f, &w), &s) in fields.iter().zip(weights).zip(signs) {
                let c = w * s as f64;
                for (o, v) in out.data_mut().iter_mut().zip(f.data()) {
                    *o += c * v;
                }
            }
            out
        };
        let fa = combine(&report.a);
        let fb = combine(&report.b);
        let bracket = poisson_bracket_masked(&fa, &fb, FdOrder::Two)
            .map_err(|e| anyhow::anyhow!("heat map bracket: {e}"))?;
        let mut text = String::from("ix,iy,x,y,value\n");
        for iy in 0..surface.ny() {
            for ix in 0..surface.nx() {
                text.push_str(&format!(
                    "{ix},{iy},{:.17e},{:.17e},{:.17e}\n",
                    surface.xs(ix),
                    surface.ys(iy),
                    bracket.get(ix, iy).abs()
                ));
            }
        }
        self.write_bytes("bracket_heatmap.csv", text.as_bytes())
    }

    fn reproducible(report: &PbReport) -> PbReport {
        let mut r = report.clone();
        r.elapsed_ms = 0.0;
        r
    }

    pub fn write_pb_result(
        &mut self,
        report: &PbReport,
        verify: &PartitionReport,
        fields: &[ScalarField],
        weights: &[f64],
    ) -> anyhow::Result<()> {
        #[derive(Serialize)]
        struct Doc<'a> {
            kind: &'static str,
            pb: PbReport,
            partition: &'a PartitionReport,
        }
        self.write_json(
            "result.json",
            &Doc {
                kind: "pbeval",
                pb: Self::reproducible(report),
                partition: verify,
            },
        )?;
        self.write_heatmap(report, fields, weights)
    }

    pub fn write_minimize_result(
        &mut self,
        result: &MinimizeResult,
        fields: &[ScalarField],
        weights: &[f64],
    ) -> anyhow::Result<()> {
        #[derive(Serialize)]
        struct Doc {
            kind: &'static str,
            theta: Vec<f64>,
            canonical_value: f64,
            evaluations: usize,
            pb: PbReport,
        }
        self.write_json(
            "result.json",
            &Doc {
                kind: "minimize",
                theta: result.theta.clone(),
                canonical_value: result.canonical_value,
                evaluations: result.evaluations,
                pb: Self::reproducible(&result.report),
            },
        )?;
        self.write_heatmap(&result.report, fields, weights)
    }

    pub fn write_sweep_result(
        &mut self,
        table: &SweepTable,
        violations: &[MonotonicityViolation],
    ) -> anyhow::Result<()> {
        #[derive(Serialize)]
        struct Doc<'a> {
            kind: &'static str,
            table: &'a SweepTable,
            violations: &'a [MonotonicityViolation],
        }
        self.write_json(
            "result.json",
            &Doc {
                kind: "sweep",
                table,
                violations,
            },
        )?;

        let mut csv = String::from("capacity,pb_value,n_sets,evaluations,cover_desc\n");
        for r in &table.rows {
            csv.push_str(&format!(
                "{:.17e},{:.17e},{},{},{}\n",
                r.capacity, r.pb_value, r.n_sets, r.evaluations, r.cover_desc
            ));
        }
        self.write_bytes("sweep.csv", csv.as_bytes())?;

        // gnuplot-ready two-column data
        let mut dat = String::from("# capacity pb_upper_bound\n");
        for r in &table.rows {
            dat.push_str(&format!("{:.17e} {:.17e}\n", r.capacity, r.pb_value));
        }
        self.write_bytes("pb_c.dat", dat.as_bytes())
    }

    pub fn write_check_result(&mut self, report: &ConsistencyReport) -> anyhow::Result<()> {
        #[derive(Serialize)]
        struct Doc<'a> {
            kind: &'static str,
            pass: bool,
            report: &'a ConsistencyReport,
        }
        self.write_json(
            "result.json",
            &Doc {
                kind: "check",
                pass: report.pass_all(),
                report,
            },
        )?;
        let mut csv = String::from("id,lhs,rhs,margin,pass\n");
        for c in &report.checks {
            csv.push_str(&format!(
                "\"{}\",{:.17e},{:.17e},{:.17e},{}\n",
                c.id, c.lhs, c.rhs, c.margin, c.pass
            ));
        }
        self.write_bytes("checks.csv", csv.as_bytes())
    }

    pub fn write_hilbert_result(
        &mut self,
        curve: &HilbertCurve,
        samples: u64,
        measures: &[CellMeasure],
    ) -> anyhow::Result<()> {
        let mut header = String::from("t");
        for j in 1..=curve.dimension {
            header.push_str(&format!(",x{j}"));
        }
        header.push('\n');
        let mut csv = header;
        for i in 0..=samples {
            let t = i as f64 / samples as f64;
            let p = curve
                .point(t)
                .map_err(|e| anyhow::anyhow!("curve sample: {e}"))?;
            csv.push_str(&format!("{t:.17e}"));
            for v in p {
                csv.push_str(&format!(",{v:.17e}"));
            }
            csv.push('\n');
        }
        self.write_bytes("curve.csv", csv.as_bytes())?;
        self.write_json("measures.json", &measures)
    }

    pub fn finish(self, wall_time_s: f64) -> anyhow::Result<()> {
        let manifest = Manifest {
            tool: "pblab",
            version: env!("CARGO_PKG_VERSION"),
            config_sha256: &self.config_sha256,
            seed: self.seed,
            wall_time_s,
            outputs: &self.outputs,
        };
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        fs::write(self.dir.join("manifest.json"), text)?;
        Ok(())
    }
}
