//! The `favtgan` command line.
//!
//! Exit codes: 0 on success, 1 for invalid input (bad flags, configs,
//! manifests, registries), 2 for runtime failures.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Parser, Subcommand};

use crate::config::{load_config, EvalLabel, SsimChannelPolicy};
use crate::data::{synthesize_dataset, DatasetManifest, SynthOptions, SynthRule};
use crate::error::{Error, Result};
use crate::eval::{
    apply_baseline, emit_report, evaluate, read_records, resolve_baselines, write_records, EvalOptions, ReportFormat,
    Source,
};
use crate::labels::SensorFamily;
use crate::train::{load_manifests, train};

#[derive(Debug, Parser)]
#[command(name = "favtgan", version, about = "Visible-to-thermal face translation experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a deterministic synthetic paired dataset and its manifest.
    SynthData {
        /// Number of pairs.
        #[arg(long)]
        n: usize,
        /// Visible-to-thermal rule: channel_inversion, blur_plus_bias or intensity_remap.
        #[arg(long)]
        rule: SynthRule,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 64)]
        image_size: usize,
        /// Fraction of pairs placed in the test split.
        #[arg(long, default_value_t = 0.25)]
        test_fraction: f64,
        /// Dataset name recorded in the manifest.
        #[arg(long, default_value = "synthetic")]
        name: String,
        /// Sensor family recorded in the manifest.
        #[arg(long, default_value = "synthetic")]
        sensor_family: SensorFamily,
    },
    /// Train an experiment described by a config file.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Continue from a checkpoint written under the same config.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Compute mean SSIM/PSNR on the test split of each manifest.
    #[command(group(ArgGroup::new("source").required(true).args(["ckpt", "oracle"])))]
    Evaluate {
        /// Checkpoint whose generator is evaluated.
        #[arg(long)]
        ckpt: Option<PathBuf>,
        /// Score the real thermal images against themselves.
        #[arg(long)]
        oracle: bool,
        /// Dataset manifest; repeat for several datasets.
        #[arg(long, required = true)]
        manifest: Vec<PathBuf>,
        /// Records file of a baseline run to compute relative change against.
        #[arg(long)]
        baseline_report: Option<PathBuf>,
        /// Write full-precision records here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Output format for standard output: text_table or csv.
        #[arg(long, default_value = "text_table")]
        format: ReportFormat,
        /// average or luminance; defaults to the run's config.
        #[arg(long)]
        ssim_channel_policy: Option<SsimChannelPolicy>,
        /// true_label or sampled; defaults to the run's config.
        #[arg(long)]
        eval_label: Option<EvalLabel>,
        /// Image size for --oracle.
        #[arg(long)]
        image_size: Option<usize>,
        /// Run id written to the records (defaults to the config name).
        #[arg(long)]
        run_id: Option<String>,
        /// Experiment label written to the records (defaults to the mode).
        #[arg(long)]
        experiment: Option<String>,
    },
    /// Render records files as a table or CSV.
    Report {
        /// Records files, concatenated in order.
        #[arg(long, required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
        /// text_table or csv.
        #[arg(long)]
        format: ReportFormat,
        /// Write here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Validate configs and print their resolved settings.
    InspectConfig {
        #[arg(long, required = true, num_args = 1..)]
        config: Vec<PathBuf>,
        /// Also check every manifest and image file exists.
        #[arg(long)]
        check_files: bool,
    },
}

/// Parse `argv` (including the program name), run the command and return
/// the process exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                1
            } else {
                2
            }
        }
    }
}

fn write_output(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::io(path, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::SynthData {
            n,
            rule,
            seed,
            out,
            image_size,
            test_fraction,
            name,
            sensor_family,
        } => {
            let mut opts = SynthOptions::new(n, image_size, seed, rule);
            opts.test_fraction = test_fraction;
            opts.dataset_name = name;
            opts.sensor_family = sensor_family;
            let m = synthesize_dataset(&opts, &out)?;
            println!(
                "{}: {} train / {} test pairs -> {}",
                m.dataset_name,
                m.split_len(crate::data::Split::Train),
                m.split_len(crate::data::Split::Test),
                out.join("manifest.toml").display()
            );
            Ok(())
        }
        Command::Train { config, resume } => {
            let cfg = load_config(&config)?;
            let run_dir = train(&cfg, resume.as_deref())?;
            println!("{}", run_dir.display());
            Ok(())
        }
        Command::Evaluate {
            ckpt,
            oracle,
            manifest,
            baseline_report,
            out,
            format,
            ssim_channel_policy,
            eval_label,
            image_size,
            run_id,
            experiment,
        } => {
            let manifests = manifest
                .iter()
                .map(|p| DatasetManifest::load(p))
                .collect::<Result<Vec<_>>>()?;
            let source = match (&ckpt, oracle) {
                (Some(path), false) => Source::Checkpoint(path),
                _ => Source::Oracle,
            };
            let options = EvalOptions {
                eval_label,
                ssim_channel_policy,
                image_size,
                run_id,
                experiment,
            };
            let mut reports = evaluate(source, &manifests, &options)?.reports;
            if let Some(path) = baseline_report {
                reports = apply_baseline(&reports, &read_records(&path)?)?;
            }
            if let Some(path) = &out {
                write_records(&reports, path)?;
            }
            write_output(&emit_report(&reports, format)?, None)
        }
        Command::Report { inputs, format, out } => {
            let mut reports = Vec::new();
            for path in &inputs {
                reports.extend(read_records(path)?);
            }
            resolve_baselines(&mut reports)?;
            write_output(&emit_report(&reports, format)?, out.as_deref())
        }
        Command::InspectConfig { config, check_files } => {
            for path in &config {
                let cfg = load_config(path)?;
                if check_files {
                    load_manifests(&cfg)?;
                }
                let n = cfg.n_labels();
                println!("{}: ok", path.display());
                println!("  name            {}", cfg.name);
                println!("  mode            {}", cfg.mode);
                println!("  config hash     {}", cfg.hash());
                println!("  run dir         {}", cfg.run_dir().display());
                println!(
                    "  schedule        {} epochs, batch {}, lr {}, decay from epoch {}",
                    cfg.epochs, cfg.batch_size, cfg.learning_rate, cfg.decay_epoch
                );
                println!(
                    "  channels        generator +{}, discriminator +{}, aux classes {}",
                    cfg.mode.generator_channels(n),
                    cfg.mode.discriminator_channels(n),
                    if cfg.mode.uses_aux() { n } else { 0 }
                );
                for label in cfg.registry()? {
                    println!(
                        "  label {}         {} ({})",
                        label.id, label.dataset_name, label.sensor_family
                    );
                }
            }
            Ok(())
        }
    }
}
