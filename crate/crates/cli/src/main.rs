//! `muchlac`: one binary over the whole pipeline — dataset build, mask
//! dumps, feature extraction, boosting, evaluation, importance ranking,
//! feature selection, and the synthetic benchmark generator.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error.

use clap::{Args, Parser, Subcommand, ValueEnum};
use muchlac_core::features::{self, ExtractConfig, Invariance};
use muchlac_core::glcm::{self, GlcmConfig};
use muchlac_core::masks;
use muchlac_core::raster::{build_patch_grid, LabeledPatchSet, MultibandRaster};
use muchlac_core::{adaboost, eval, forest, matrix::FeatureMatrix, synth};
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "muchlac",
    version = concat!(env!("CARGO_PKG_VERSION"), " (formats: MBR1, FMX1)"),
    about = "Multispectral patch classification with MUCHLAC/HLAC/GLCM features"
)]
struct Cli {
    /// Worker threads (default: machine parallelism)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Patch dataset construction
    Dataset {
        #[command(subcommand)]
        command: DatasetCommand,
    },
    /// Mask pattern enumeration
    Masks {
        #[command(subcommand)]
        command: MasksCommand,
    },
    /// Feature extraction
    Features {
        #[command(subcommand)]
        command: FeaturesCommand,
    },
    /// Train a Real AdaBoost detector
    Train(TrainArgs),
    /// k-fold cross-validated detection report
    Eval(EvalArgs),
    /// Random-Forest OOB permutation importance
    Importance(ImportanceArgs),
    /// Restrict a feature matrix to the top-k ranked components
    Select(SelectArgs),
    /// Generate a synthetic benchmark raster + label mask
    Synth(SynthArgs),
}

#[derive(Subcommand)]
enum DatasetCommand {
    /// Cut a labeled raster into a non-overlapping patch grid
    Build {
        #[arg(long)]
        raster: PathBuf,
        #[arg(long)]
        mask: PathBuf,
        #[arg(long, default_value_t = 16)]
        patch_size: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum MasksCommand {
    /// Emit the canonical mask list with D4 orbit ids as JSON
    Dump {
        #[arg(long, value_enum)]
        kind: MaskKind,
        #[arg(long, default_value_t = 1)]
        m: i32,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Copy, Clone, ValueEnum)]
enum MaskKind {
    Hlac,
    Muchlac,
}

#[derive(Copy, Clone, ValueEnum)]
enum FeatureKind {
    Muchlac,
    Hlac,
    Glcm,
}

#[derive(Copy, Clone, ValueEnum)]
enum InvarianceArg {
    None,
    D4,
}

#[derive(Subcommand)]
enum FeaturesCommand {
    /// Extract one feature row per patch into an FMX1 matrix
    Extract(ExtractArgs),
}

#[derive(Args)]
struct ExtractArgs {
    #[arg(long)]
    patches: PathBuf,
    #[arg(long)]
    raster: PathBuf,
    #[arg(long, value_enum)]
    feature: FeatureKind,
    /// Displacement distances, e.g. 1,2,3,4 (hlac/muchlac)
    #[arg(long, value_delimiter = ',', default_value = "1")]
    distances: Vec<i32>,
    /// Band indices; defaults to every band in the raster
    #[arg(long, value_delimiter = ',')]
    bands: Option<Vec<usize>>,
    #[arg(long, value_enum, default_value = "none")]
    invariance: InvarianceArg,
    /// Gray levels for GLCM quantization
    #[arg(long, default_value_t = 32)]
    levels: usize,
    /// Co-occurrence offset distance for GLCM
    #[arg(long, default_value_t = 1)]
    glcm_distance: i32,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    features: PathBuf,
    #[arg(long, default_value_t = 500)]
    rounds: usize,
    #[arg(long, default_value_t = 16)]
    bins: usize,
    /// Smoothing constant; defaults to 1/(2n)
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    features: PathBuf,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    train_fraction: f64,
    #[arg(long, default_value_t = 500)]
    rounds: usize,
    #[arg(long, default_value_t = 16)]
    bins: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ImportanceArgs {
    #[arg(long)]
    features: PathBuf,
    #[arg(long, default_value_t = 100)]
    trees: usize,
    /// Limit tree depth (default: grow to purity)
    #[arg(long)]
    max_depth: Option<usize>,
    /// Candidate features per split (default: ceil(sqrt(d)))
    #[arg(long)]
    features_per_split: Option<usize>,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SelectArgs {
    #[arg(long)]
    features: PathBuf,
    #[arg(long)]
    importance: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value = synth::SCENARIO_CROSS_CHANNEL)]
    scenario: String,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = 32)]
    cells_x: usize,
    #[arg(long, default_value_t = 32)]
    cells_y: usize,
    #[arg(long, default_value_t = 16)]
    cell_size: usize,
    #[arg(long, default_value_t = 0.3)]
    positive_fraction: f64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help/--version are successful outcomes; everything else is
            // a usage error (exit 1, not clap's default 2)
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> muchlac_core::Result<()> {
    match command {
        Command::Dataset {
            command:
                DatasetCommand::Build {
                    raster,
                    mask,
                    patch_size,
                    out,
                },
        } => {
            let r = MultibandRaster::load(&raster)?;
            let m = MultibandRaster::load(&mask)?;
            let set = build_patch_grid(&r, &m, patch_size, &raster.display().to_string())?;
            set.save(&out)?;
            println!(
                "{} patches ({} positive) -> {}",
                set.patches.len(),
                set.positives(),
                out.display()
            );
            Ok(())
        }
        Command::Masks {
            command: MasksCommand::Dump { kind, m, out },
        } => {
            let (name, list) = match kind {
                MaskKind::Hlac => ("hlac", masks::enumerate_hlac_masks(m, 2)?),
                MaskKind::Muchlac => ("muchlac", masks::enumerate_muchlac_masks(m, 2, 2)?),
            };
            let orbits = masks::d4_orbits(&list)?;
            let mut orbit_of = vec![0usize; list.len()];
            for g in &orbits {
                for &i in &g.member_indices {
                    orbit_of[i] = g.group_id;
                }
            }
            let doc = json!({
                "kind": name,
                "m": m,
                "count": list.len(),
                "n_orbits": orbits.len(),
                "masks": list.iter().enumerate().map(|(i, mk)| json!({
                    "index": i,
                    "order": mk.order,
                    "cross_channel": mk.cross_channel,
                    "orbit": orbit_of[i],
                    "points": mk.points.iter()
                        .map(|p| json!([p.slot, p.dy, p.dx])).collect::<Vec<_>>(),
                    "scan_points": mk.scan_points.iter()
                        .map(|p| json!([p.slot, p.dy, p.dx])).collect::<Vec<_>>(),
                })).collect::<Vec<_>>(),
            });
            write_json(&out, &doc)?;
            println!("{} {} masks, {} orbits -> {}", list.len(), name, orbits.len(), out.display());
            Ok(())
        }
        Command::Features {
            command: FeaturesCommand::Extract(args),
        } => extract_features(args),
        Command::Train(args) => {
            let x = FeatureMatrix::load(&args.features)?;
            let y = x.labels_or_err()?.to_vec();
            let params = adaboost::BoostParams {
                rounds: args.rounds,
                bins: args.bins,
                epsilon: args.epsilon,
                seed: args.seed,
            };
            let model = adaboost::train_real_adaboost(&x, &y, &params)?;
            model.save(&args.out)?;
            println!(
                "trained {} rounds on {} x {} -> {}",
                model.stumps.len(),
                x.rows(),
                x.cols(),
                args.out.display()
            );
            Ok(())
        }
        Command::Eval(args) => {
            let x = FeatureMatrix::load(&args.features)?;
            let y = x.labels_or_err()?.to_vec();
            let params = adaboost::BoostParams {
                rounds: args.rounds,
                bins: args.bins,
                epsilon: None,
                seed: args.seed,
            };
            let report =
                eval::cross_validate(&x, &y, args.folds, args.train_fraction, args.seed, &params)?;
            report.save(&args.out)?;
            println!(
                "mean P={:.4} R={:.4} F={:.4} -> {}",
                report.mean_precision,
                report.mean_recall,
                report.mean_f_measure,
                args.out.display()
            );
            Ok(())
        }
        Command::Importance(args) => {
            let x = FeatureMatrix::load(&args.features)?;
            let y = x.labels_or_err()?.to_vec();
            let params = forest::ForestParams {
                n_trees: args.trees,
                max_depth: args.max_depth,
                features_per_split: args.features_per_split,
                seed: args.seed,
                ..Default::default()
            };
            let f = forest::train_forest(&x, &y, &params)?;
            let report = forest::oob_permutation_importance(&f, &x, &y, args.seed)?;
            let share = report.top_k_share(100, |name| name.starts_with("muchlac/"));
            let mut doc = serde_json::to_value(&report)?;
            doc["cross_channel_share_top100"] = json!(share);
            doc["config"] = json!({
                "trees": args.trees,
                "seed": args.seed,
                "features": args.features.display().to_string(),
            });
            write_json(&args.out, &doc)?;
            println!(
                "ranked {} components, top-100 cross-channel share {:.2} -> {}",
                x.cols(),
                share,
                args.out.display()
            );
            Ok(())
        }
        Command::Select(args) => {
            let x = FeatureMatrix::load(&args.features)?;
            let report = forest::ImportanceReport::load(&args.importance)?;
            let mut selected = forest::select_top_k(&x, &report, args.k)?;
            selected.config = Some(json!({
                "selected_top_k": args.k,
                "importance": args.importance.display().to_string(),
                "source": x.config,
            }));
            selected.save(&args.out)?;
            println!("kept top {} of {} components -> {}", args.k, x.cols(), args.out.display());
            Ok(())
        }
        Command::Synth(args) => {
            let config = synth::SynthConfig {
                scenario: args.scenario,
                cells_x: args.cells_x,
                cells_y: args.cells_y,
                cell_size: args.cell_size,
                positive_fraction: args.positive_fraction,
                seed: args.seed,
            };
            let (raster, mask) = synth::synth_generate(&config)?;
            std::fs::create_dir_all(&args.out).map_err(|source| muchlac_core::Error::Io {
                path: args.out.clone(),
                source,
            })?;
            raster.save(&args.out.join("raster.mbr"))?;
            mask.save(&args.out.join("mask.mbr"))?;
            write_json(&args.out.join("scenario.json"), &serde_json::to_value(&config)?)?;
            println!(
                "{}x{} raster ({} cells) -> {}",
                raster.width(),
                raster.height(),
                config.cells_x * config.cells_y,
                args.out.display()
            );
            Ok(())
        }
    }
}

fn extract_features(args: ExtractArgs) -> muchlac_core::Result<()> {
    let raster = MultibandRaster::load(&args.raster)?;
    let patches = LabeledPatchSet::load(&args.patches)?;
    let bands = args
        .bands
        .clone()
        .unwrap_or_else(|| (0..raster.channels()).collect());

    let mut matrix = match args.feature {
        FeatureKind::Muchlac | FeatureKind::Hlac => {
            let config = ExtractConfig {
                bands,
                distances: args.distances.clone(),
                use_cross_channel: matches!(args.feature, FeatureKind::Muchlac),
                invariance: match args.invariance {
                    InvarianceArg::None => Invariance::None,
                    InvarianceArg::D4 => Invariance::RotationReflection,
                },
            };
            features::extract_dataset(&raster, &patches, &config)?
        }
        FeatureKind::Glcm => {
            let config = GlcmConfig {
                levels: args.levels,
                distance: args.glcm_distance,
                ..Default::default()
            };
            config.validate()?;
            let names = glcm::glcm_component_names(&bands, &config);
            features::extract_matrix(&raster, &patches, names, |patch| {
                Ok(glcm::extract_glcm_features(patch, &bands, &config)?.values)
            })?
        }
    };

    matrix.config = Some(json!({
        "feature": match args.feature {
            FeatureKind::Muchlac => "muchlac",
            FeatureKind::Hlac => "hlac",
            FeatureKind::Glcm => "glcm",
        },
        "raster": args.raster.display().to_string(),
        "patches": args.patches.display().to_string(),
        "distances": args.distances,
        "invariance": match args.invariance {
            InvarianceArg::None => "none",
            InvarianceArg::D4 => "d4",
        },
        "levels": args.levels,
        "glcm_distance": args.glcm_distance,
    }));
    matrix.save(&args.out)?;
    println!("{} x {} matrix -> {}", matrix.rows(), matrix.cols(), args.out.display());
    Ok(())
}

fn write_json(path: &std::path::Path, doc: &serde_json::Value) -> muchlac_core::Result<()> {
    let text = serde_json::to_string_pretty(doc)?;
    std::fs::write(path, text).map_err(|source| muchlac_core::Error::Io {
        path: path.to_owned(),
        source,
    })
}
