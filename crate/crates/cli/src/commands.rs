use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::Serialize;

use mcnn_core::eval_harness::{
    bin_overlap, evaluate_policy, load_manifest, rate_table, rate_table_text, route_records,
    write_overlap_csv, write_rate_table_csv, HarnessError,
};
use mcnn_core::flow_metrics::aepe_sequence;
use mcnn_core::mcnn_selector::{optimize_with, sweep, OptimizeOptions, SelectorError};
use mcnn_core::mv_field::{
    assemble_volume, interpolate_missing, parse_mv_sidecar, read_flo, ten_crop, VolumeSpec,
};
use mcnn_core::rate_model::{fit_rates, fit_source, kl_divergence_empirical, DEFAULT_KL_BINS};
use mcnn_core::{
    Accuracies, CropDescriptor, OptimizationProblem, RateFit, RateModel, SelectorPolicy,
    SourceModel, VideoRecord, VolumeLayout,
};

use crate::config::FileConfig;
use crate::output::{json_bytes, key_value_text, Format, RunMeta, Sink};
use crate::{AccuracyArgs, Cli, Command, LayoutArg, ModelArgs, PolicyArgs};

const DEFAULT_SWEEP: (f64, f64, f64) = (1.0, 50.0, 1.0);

struct Ctx {
    config: FileConfig,
    config_path: Option<PathBuf>,
    format: Option<Format>,
    out: Option<PathBuf>,
    out_dir: Option<PathBuf>,
    strict: bool,
}

pub fn run(cli: Cli) -> Result<()> {
    let config = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    if let Some(jobs) = cli.jobs.or(config.jobs) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .context("configuring worker pool")?;
    }
    let ctx = Ctx {
        format: cli.format.or(config.format),
        out: cli.out,
        out_dir: cli.out_dir.or_else(|| config.out_dir.clone()),
        strict: cli.strict || config.strict.unwrap_or(false),
        config_path: cli.config,
        config,
    };
    match cli.command {
        Command::FitSource { manifest, kl_bins } => ctx.fit_source(manifest, kl_bins),
        Command::FitRates { manifest } => ctx.fit_rates(manifest),
        Command::Optimize { model, budget } => ctx.optimize(&model, budget),
        Command::Sweep {
            model,
            budgets,
            start,
            stop,
            step,
        } => ctx.sweep(&model, budgets, start, stop, step),
        Command::Select {
            manifest,
            policy,
            accuracies,
        } => ctx.select(manifest, &policy, &accuracies),
        Command::Evaluate {
            manifest,
            policy,
            model,
        } => ctx.evaluate(manifest, &policy, &model),
        Command::BinOverlap {
            manifest,
            bin_width,
        } => ctx.bin_overlap(manifest, bin_width),
        Command::RateTable { manifest } => ctx.rate_table(manifest),
        Command::Aepe { mv, flow_dir } => ctx.aepe(&mv, &flow_dir),
        Command::Volumes {
            mv,
            layout,
            size,
            temporal_extent,
            t_start,
            no_loop,
            crop,
            flip,
        } => {
            let layout = match layout {
                LayoutArg::Split4d => VolumeLayout::Split4d,
                LayoutArg::Stacked3d => VolumeLayout::Stacked3d,
            };
            let mut spec = VolumeSpec::new(layout);
            spec.size = size.unwrap_or(spec.size);
            spec.temporal_extent = temporal_extent.unwrap_or(spec.temporal_extent);
            spec.t_start = t_start;
            spec.loop_short = !no_loop;
            let crop = match crop.as_deref() {
                None => None,
                Some(&[x, y]) => Some(CropDescriptor {
                    x,
                    y,
                    flipped: flip,
                }),
                Some(c) => bail!("--crop takes exactly two values, got {}", c.len()),
            };
            ctx.volumes(&mv, &spec, crop)
        }
    }
}

#[derive(Serialize)]
struct SourceFitReport {
    alpha: f64,
    beta: f64,
    samples: usize,
    kl_divergence: f64,
    kl_bins: usize,
    manifest: String,
}

#[derive(Serialize)]
struct RateFitReport {
    #[serde(flatten)]
    fit: RateFit,
    samples: usize,
    manifest: String,
}

#[derive(Serialize)]
struct RoutedVideo<'a> {
    id: &'a str,
    r_motion: f64,
    route: &'static str,
}

#[derive(Serialize)]
struct VolumeDescriptor {
    layout: VolumeLayout,
    dtype: &'static str,
    byte_order: &'static str,
    /// Leading axis indexes crops.
    shape: Vec<usize>,
    crops: Vec<CropDescriptor>,
    data: String,
    source: String,
}

impl Ctx {
    fn meta(&self, command: &'static str) -> RunMeta {
        RunMeta::new(command, self.config_path.as_deref())
    }

    fn format(&self, command: &str, default: Format, allowed: &[Format]) -> Result<Format> {
        let format = self.format.unwrap_or(default);
        if !allowed.contains(&format) {
            bail!("{command} does not support {format:?} output");
        }
        Ok(format)
    }

    fn sink(&self, command: &'static str, format: Format, meta: RunMeta) -> Sink {
        let path = self.out.clone().or_else(|| {
            self.out_dir
                .as_ref()
                .map(|d| d.join(format!("{command}.{}", format.extension())))
        });
        Sink { path, meta }
    }

    fn manifest(&self, flag: Option<PathBuf>, meta: &mut RunMeta) -> Result<Vec<VideoRecord>> {
        let path = flag
            .or_else(|| self.config.data.manifest.clone())
            .ok_or_else(|| anyhow!("no manifest given (--manifest or [data] manifest)"))?;
        meta.input(&path);
        let records =
            load_manifest(&path).with_context(|| format!("loading {}", path.display()))?;
        if records.is_empty() {
            return Err(HarnessError::EmptyDataset)
                .with_context(|| format!("loading {}", path.display()));
        }
        Ok(records)
    }

    fn source(&self, flag: &Option<PathBuf>, meta: &mut RunMeta) -> Result<Option<SourceModel>> {
        let Some(path) = flag.clone().or_else(|| self.config.model.source.clone()) else {
            return Ok(None);
        };
        meta.input(&path);
        Ok(Some(read_json(&path)?))
    }

    fn rates(&self, flag: &Option<PathBuf>, meta: &mut RunMeta) -> Result<RateModel> {
        let path = flag
            .clone()
            .or_else(|| self.config.model.rates.clone())
            .ok_or_else(|| anyhow!("no rate model given (--rates or [model] rates)"))?;
        meta.input(&path);
        let model: RateModel = read_json(&path)?;
        model
            .validate()
            .with_context(|| format!("rate model {}", path.display()))?;
        Ok(model)
    }

    fn accuracies(&self, args: &AccuracyArgs) -> Result<Accuracies> {
        let [a_3d, a_2d, a_sp] = match &args.accuracies {
            Some(v) => <[f64; 3]>::try_from(v.as_slice())
                .map_err(|_| anyhow!("--accuracies takes exactly three values, got {}", v.len()))?,
            None => self.config.model.accuracies.ok_or_else(|| {
                anyhow!("no accuracy triple given (--accuracies or [model] accuracies)")
            })?,
        };
        Ok(Accuracies::new(a_3d, a_2d, a_sp)?)
    }

    fn problem(
        &self,
        model: &ModelArgs,
        budget: f64,
        meta: &mut RunMeta,
    ) -> Result<OptimizationProblem> {
        let source = self
            .source(&model.source, meta)?
            .ok_or_else(|| anyhow!("no source model given (--source or [model] source)"))?;
        let problem = OptimizationProblem {
            source,
            rates: self.rates(&model.rates, meta)?,
            i_sp: model
                .i_sp
                .or(self.config.model.i_sp)
                .ok_or_else(|| anyhow!("no spatial rate given (--i-sp or [model] i_sp)"))?,
            accuracies: self.accuracies(&model.accuracies)?,
            r_available: budget,
        };
        problem.validate()?;
        Ok(problem)
    }

    fn policy(
        &self,
        args: &PolicyArgs,
        acc: &AccuracyArgs,
        meta: &mut RunMeta,
    ) -> Result<SelectorPolicy> {
        if let Some(path) = &args.policy {
            meta.input(path);
            let value: serde_json::Value = read_json(path)?;
            let inner = value.get("policy").cloned().unwrap_or(value);
            let p: SelectorPolicy = serde_json::from_value(inner)
                .with_context(|| format!("policy in {}", path.display()))?;
            return Ok(SelectorPolicy::new(p.r_low, p.r_high, p.accuracies)?);
        }
        match (args.r_low, args.r_high) {
            (Some(lo), Some(hi)) => Ok(SelectorPolicy::new(lo, hi, self.accuracies(acc)?)?),
            _ => bail!("no policy given (--policy or --r-low/--r-high)"),
        }
    }

    fn fit_source(&self, manifest: Option<PathBuf>, kl_bins: Option<usize>) -> Result<()> {
        let format = self.format(
            "fit-source",
            Format::Json,
            &[Format::Json, Format::Text, Format::Csv],
        )?;
        let mut meta = self.meta("fit-source");
        let records = self.manifest(manifest, &mut meta)?;
        let samples: Vec<f64> = records.iter().map(|r| r.r_motion).collect();
        let model = fit_source(&samples)?;
        let bins = kl_bins
            .or(self.config.fit.kl_bins)
            .unwrap_or(DEFAULT_KL_BINS);
        let kl = kl_divergence_empirical(&samples, &model, bins)?;
        let report = SourceFitReport {
            alpha: model.alpha,
            beta: model.beta,
            samples: samples.len(),
            kl_divergence: kl,
            kl_bins: bins,
            manifest: meta.inputs[0].clone(),
        };
        let payload = match format {
            Format::Json => json_bytes(&report)?,
            Format::Csv => format!(
                "alpha,beta,samples,kl_divergence,kl_bins\n{},{},{},{},{}\n",
                report.alpha, report.beta, report.samples, report.kl_divergence, report.kl_bins
            )
            .into_bytes(),
            Format::Text => key_value_text(&[
                ("alpha", format!("{:.6}", report.alpha)),
                ("beta", format!("{:.6}", report.beta)),
                ("samples", report.samples.to_string()),
                ("kl_divergence", format!("{:.6}", report.kl_divergence)),
                ("kl_bins", report.kl_bins.to_string()),
            ]),
        };
        self.sink("fit-source", format, meta).emit(&payload)
    }

    fn fit_rates(&self, manifest: Option<PathBuf>) -> Result<()> {
        let format = self.format(
            "fit-rates",
            Format::Json,
            &[Format::Json, Format::Text, Format::Csv],
        )?;
        let mut meta = self.meta("fit-rates");
        let records = self.manifest(manifest, &mut meta)?;
        let mut p3 = Vec::with_capacity(records.len());
        let mut p2 = Vec::with_capacity(records.len());
        for r in &records {
            let missing = |field| HarnessError::MissingField {
                id: r.id.clone(),
                field,
            };
            p3.push((r.r_motion, r.r_3d.ok_or_else(|| missing("r_3d"))?));
            p2.push((r.r_motion, r.r_2d.ok_or_else(|| missing("r_2d"))?));
        }
        let fit = fit_rates(&p3, &p2)?;
        let m = fit.model;
        let payload = match format {
            Format::Json => json_bytes(&RateFitReport {
                fit,
                samples: records.len(),
                manifest: meta.inputs[0].clone(),
            })?,
            Format::Csv => format!(
                "a_3d,b_3d,a_2d,b_2d,r2_3d,r2_2d\n{},{},{},{},{},{}\n",
                m.a_3d, m.b_3d, m.a_2d, m.b_2d, fit.r2_3d, fit.r2_2d
            )
            .into_bytes(),
            Format::Text => key_value_text(&[
                ("a_3d", format!("{:.6}", m.a_3d)),
                ("b_3d", format!("{:.6}", m.b_3d)),
                ("a_2d", format!("{:.6}", m.a_2d)),
                ("b_2d", format!("{:.6}", m.b_2d)),
                ("r2_3d", format!("{:.6}", fit.r2_3d)),
                ("r2_2d", format!("{:.6}", fit.r2_2d)),
                ("samples", records.len().to_string()),
            ]),
        };
        self.sink("fit-rates", format, meta).emit(&payload)
    }

    fn optimize(&self, model: &ModelArgs, budget: f64) -> Result<()> {
        let format = self.format(
            "optimize",
            Format::Json,
            &[Format::Json, Format::Text, Format::Csv],
        )?;
        let mut meta = self.meta("optimize");
        let problem = self.problem(model, budget, &mut meta)?;
        let result = optimize_with(
            &problem,
            OptimizeOptions {
                strict: self.strict,
            },
        )?;
        let p = &result.policy;
        let payload = match format {
            Format::Json => json_bytes(&result)?,
            Format::Csv => format!(
                "r_low,r_high,a_mcnn,r_sent,feasible\n{},{},{},{},{}\n",
                p.r_low,
                p.r_high,
                result.predicted_a_mcnn,
                result.predicted_r_sent,
                result.feasible
            )
            .into_bytes(),
            Format::Text => key_value_text(&[
                ("r_low", threshold_text(p.r_low)),
                ("r_high", threshold_text(p.r_high)),
                ("a_mcnn", format!("{:.6}", result.predicted_a_mcnn)),
                ("r_sent", format!("{:.6}", result.predicted_r_sent)),
                ("feasible", result.feasible.to_string()),
            ]),
        };
        self.sink("optimize", format, meta).emit(&payload)?;
        result.require_feasible(&problem)?;
        Ok(())
    }

    fn sweep(
        &self,
        model: &ModelArgs,
        budgets: Option<Vec<f64>>,
        start: Option<f64>,
        stop: Option<f64>,
        step: Option<f64>,
    ) -> Result<()> {
        let format = self.format(
            "sweep",
            Format::Csv,
            &[Format::Json, Format::Text, Format::Csv],
        )?;
        let mut meta = self.meta("sweep");
        let budgets = match budgets {
            Some(b) => b,
            None => {
                let cfg = &self.config.sweep;
                budget_range(
                    start.or(cfg.start).unwrap_or(DEFAULT_SWEEP.0),
                    stop.or(cfg.stop).unwrap_or(DEFAULT_SWEEP.1),
                    step.or(cfg.step).unwrap_or(DEFAULT_SWEEP.2),
                )?
            }
        };
        let first = *budgets.first().ok_or(SelectorError::EmptyBudgetList)?;
        let problem = self.problem(model, first, &mut meta)?;
        let points = sweep(
            &problem,
            &budgets,
            OptimizeOptions {
                strict: self.strict,
            },
        )?;
        let payload = match format {
            Format::Json => json_bytes(&points)?,
            Format::Csv => {
                let mut out = String::from("budget_kbps,r_low,r_high,a_mcnn,r_sent,feasible\n");
                for p in &points {
                    out.push_str(&format!(
                        "{},{},{},{},{},{}\n",
                        p.budget_kbps, p.r_low, p.r_high, p.a_mcnn, p.r_sent, p.feasible
                    ));
                }
                out.into_bytes()
            }
            Format::Text => {
                let mut out = format!(
                    "{:>10}{:>12}{:>12}{:>10}{:>10}{:>10}\n",
                    "budget", "r_low", "r_high", "a_mcnn", "r_sent", "feasible"
                );
                for p in &points {
                    out.push_str(&format!(
                        "{:>10.3}{:>12}{:>12}{:>10.4}{:>10.3}{:>10}\n",
                        p.budget_kbps,
                        threshold_text(p.r_low),
                        threshold_text(p.r_high),
                        p.a_mcnn,
                        p.r_sent,
                        p.feasible
                    ));
                }
                out.into_bytes()
            }
        };
        self.sink("sweep", format, meta).emit(&payload)
    }

    fn select(
        &self,
        manifest: Option<PathBuf>,
        policy: &PolicyArgs,
        acc: &AccuracyArgs,
    ) -> Result<()> {
        let format = self.format(
            "select",
            Format::Csv,
            &[Format::Json, Format::Text, Format::Csv],
        )?;
        let mut meta = self.meta("select");
        let policy = self.policy(policy, acc, &mut meta)?;
        let records = self.manifest(manifest, &mut meta)?;
        let routes = route_records(&records, &policy)?;
        let rows: Vec<RoutedVideo> = routes
            .iter()
            .map(|(id, r, route)| RoutedVideo {
                id,
                r_motion: *r,
                route: route.as_str(),
            })
            .collect();
        let payload = match format {
            Format::Json => json_bytes(&rows)?,
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                for row in &rows {
                    w.serialize(row)?;
                }
                w.into_inner().map_err(|e| anyhow!("{e}"))?
            }
            Format::Text => {
                let width = rows.iter().map(|r| r.id.len()).max().unwrap_or(2).max(2) + 2;
                let mut out = format!("{:<width$}{:>12}{:>10}\n", "id", "r_motion", "route");
                for r in &rows {
                    out.push_str(&format!(
                        "{:<width$}{:>12.3}{:>10}\n",
                        r.id, r.r_motion, r.route
                    ));
                }
                out.into_bytes()
            }
        };
        self.sink("select", format, meta).emit(&payload)
    }

    fn evaluate(
        &self,
        manifest: Option<PathBuf>,
        policy: &PolicyArgs,
        model: &ModelArgs,
    ) -> Result<()> {
        let format = self.format(
            "evaluate",
            Format::Json,
            &[Format::Json, Format::Text, Format::Csv],
        )?;
        let mut meta = self.meta("evaluate");
        let policy = self.policy(policy, &model.accuracies, &mut meta)?;
        let rates = self.rates(&model.rates, &mut meta)?;
        let source = self.source(&model.source, &mut meta)?;
        let records = self.manifest(manifest, &mut meta)?;
        let report = evaluate_policy(&records, &policy, &rates, source.as_ref())?;
        let opt = |v: Option<f64>| v.map_or_else(String::new, |v| v.to_string());
        let payload = match format {
            Format::Json => json_bytes(&report)?,
            Format::Text => report.to_text().into_bytes(),
            Format::Csv => format!(
                "n_videos,routed_3d,routed_2d,routed_spatial,empirical_accuracy,empirical_r_sent,model_accuracy,model_r_sent\n{},{},{},{},{},{},{},{}\n",
                report.n_videos,
                report.routed.cnn_3d,
                report.routed.cnn_2d,
                report.routed.spatial,
                report.empirical_accuracy,
                report.empirical_r_sent,
                opt(report.model_accuracy),
                opt(report.model_r_sent),
            )
            .into_bytes(),
        };
        self.sink("evaluate", format, meta).emit(&payload)
    }

    fn bin_overlap(&self, manifest: Option<PathBuf>, bin_width: Option<f64>) -> Result<()> {
        let format = self.format(
            "bin-overlap",
            Format::Csv,
            &[Format::Json, Format::Text, Format::Csv],
        )?;
        let mut meta = self.meta("bin-overlap");
        let width = bin_width
            .or(self.config.overlap.bin_width)
            .ok_or_else(|| anyhow!("no bin width given (--bin-width or [overlap] bin_width)"))?;
        let records = self.manifest(manifest, &mut meta)?;
        let bins = bin_overlap(&records, width)?;
        let payload = match format {
            Format::Json => json_bytes(&bins)?,
            Format::Csv => {
                let mut out = Vec::new();
                write_overlap_csv(&bins, &mut out)?;
                out
            }
            Format::Text => {
                let mut out = format!(
                    "{:>16}{:>8}{:>12}{:>12}\n",
                    "bin_kbps", "videos", "correct_3d", "correct_2d"
                );
                for b in &bins {
                    let range = format!("[{}, {})", b.lower_kbps, b.upper_kbps);
                    out.push_str(&format!(
                        "{:>16}{:>8}{:>12}{:>12}\n",
                        range, b.videos, b.count_correct_3d, b.count_correct_2d
                    ));
                }
                out.into_bytes()
            }
        };
        self.sink("bin-overlap", format, meta).emit(&payload)
    }

    fn rate_table(&self, manifest: Option<PathBuf>) -> Result<()> {
        let format = self.format(
            "rate-table",
            Format::Csv,
            &[Format::Json, Format::Text, Format::Csv],
        )?;
        let mut meta = self.meta("rate-table");
        let records = self.manifest(manifest, &mut meta)?;
        let rows = rate_table(&records)?;
        let payload = match format {
            Format::Json => json_bytes(&rows)?,
            Format::Csv => {
                let mut out = Vec::new();
                write_rate_table_csv(&rows, &mut out)?;
                out
            }
            Format::Text => rate_table_text(&rows).into_bytes(),
        };
        self.sink("rate-table", format, meta).emit(&payload)
    }

    fn aepe(&self, mv: &Path, flow_dir: &Path) -> Result<()> {
        let format = self.format(
            "aepe",
            Format::Csv,
            &[Format::Json, Format::Text, Format::Csv],
        )?;
        let mut meta = self.meta("aepe");
        let field = read_sidecar(mv, &mut meta)?;
        let mut flo_paths: Vec<PathBuf> = fs::read_dir(flow_dir)
            .with_context(|| format!("reading {}", flow_dir.display()))?
            .map(|e| e.map(|e| e.path()))
            .collect::<Result<_, _>>()?;
        flo_paths.retain(|p| p.extension().is_some_and(|e| e == "flo"));
        flo_paths.sort();
        let gt = flo_paths
            .iter()
            .map(|p| {
                meta.input(p);
                let file = fs::File::open(p).with_context(|| format!("opening {}", p.display()))?;
                read_flo(std::io::BufReader::new(file))
                    .with_context(|| format!("reading {}", p.display()))
            })
            .collect::<Result<Vec<_>>>()?;
        let report = aepe_sequence(&field, &gt)?;
        let payload = match format {
            Format::Json => json_bytes(&report)?,
            Format::Csv => {
                let mut out = Vec::new();
                report.write_csv(&mut out)?;
                out
            }
            Format::Text => {
                let mut out = format!("{:>8}{:>14}\n", "frame", "aepe");
                for (i, e) in report.per_frame_aepe.iter().enumerate() {
                    out.push_str(&format!("{i:>8}{e:>14.6}\n"));
                }
                out.push_str(&format!("{:>8}{:>14.6}\n", "mean", report.mean_aepe));
                out.into_bytes()
            }
        };
        self.sink("aepe", format, meta).emit(&payload)
    }

    fn volumes(&self, mv: &Path, spec: &VolumeSpec, crop: Option<CropDescriptor>) -> Result<()> {
        let mut meta = self.meta("volumes");
        let base = self
            .out
            .clone()
            .or_else(|| self.out_dir.as_ref().map(|d| d.join("volumes")))
            .ok_or_else(|| anyhow!("volumes needs --out or an output directory"))?;
        let field = interpolate_missing(&read_sidecar(mv, &mut meta)?);
        let crops = match crop {
            Some(c) => vec![c],
            None => ten_crop(field.grid_width(), field.grid_height(), spec.size)?,
        };
        let mut data = Vec::new();
        let mut shape = Vec::new();
        for c in &crops {
            let volume = assemble_volume(&field, spec, *c)?;
            shape = volume.shape();
            for s in &volume.samples {
                data.extend_from_slice(&(*s as f32).to_le_bytes());
            }
        }
        shape.insert(0, crops.len());
        let data_path = base.with_extension("f32");
        let descriptor = VolumeDescriptor {
            layout: spec.layout,
            dtype: "float32",
            byte_order: "little",
            shape,
            crops,
            data: data_path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default(),
            source: mv.display().to_string(),
        };
        let descriptor_sink = Sink {
            path: Some(base.with_extension("json")),
            meta,
        };
        if let Some(dir) = data_path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        fs::write(&data_path, &data).with_context(|| format!("writing {}", data_path.display()))?;
        descriptor_sink.emit(&json_bytes(&descriptor)?)
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn read_sidecar(path: &Path, meta: &mut RunMeta) -> Result<mcnn_core::MvField> {
    meta.input(path);
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    parse_mv_sidecar(&bytes).with_context(|| format!("parsing {}", path.display()))
}

/// `start, start + step, ...` up to `stop` inclusive, without accumulating
/// rounding error.
fn budget_range(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) {
        bail!(SelectorError::NonPositiveStep(step));
    }
    if !(start > 0.0 && stop >= start) {
        bail!("budget range needs 0 < start <= stop, got [{start}, {stop}]");
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + i as f64 * step).collect())
}

fn threshold_text(v: f64) -> String {
    if v >= mcnn_core::rate_model::RATE_SENTINEL {
        "inf".to_string()
    } else {
        format!("{v:.4}")
    }
}
