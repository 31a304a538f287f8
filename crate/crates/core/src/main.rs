use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::Context;
use clap::{Parser, Subcommand};

use haloscope::halo::{read_catalog_file, validate_forest, MergerForest};
use haloscope::service::{serve, Explorer, ExplorerConfig};
use haloscope::synth::{generate_synthetic_dataset, BlobSpec};

/// Lasso selection and merger-tree exploration server for particle datasets.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Serve every dataset found under a directory over HTTP.
    Serve {
        #[arg(long, env = "HALOSCOPE_DATA_DIR")]
        data_dir: PathBuf,
        #[arg(long, env = "HALOSCOPE_PORT", default_value_t = 8080)]
        port: u16,
        #[arg(long, env = "HALOSCOPE_GRID_N", default_value_t = 64)]
        grid_n: u32,
        #[arg(long, env = "HALOSCOPE_BIND", default_value = "127.0.0.1")]
        bind: std::net::IpAddr,
    },
    /// Write a synthetic Gaussian-blob dataset.
    Generate {
        /// JSON blob spec.
        #[arg(long, env = "HALOSCOPE_SPEC")]
        spec: PathBuf,
        #[arg(long, env = "HALOSCOPE_OUT")]
        out: PathBuf,
        #[arg(long, env = "HALOSCOPE_SEED", default_value_t = 0)]
        seed: u64,
    },
    /// Check a halo catalog and list every forest violation.
    Validate {
        #[arg(long, env = "HALOSCOPE_CATALOG")]
        catalog: PathBuf,
    },
}

fn main() -> anyhow::Result<ExitCode> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Serve {
            data_dir,
            port,
            grid_n,
            bind,
        } => {
            let explorer = Explorer::new(ExplorerConfig {
                grid_n,
                ..Default::default()
            });
            let opened = explorer
                .open_data_dir(&data_dir)
                .with_context(|| format!("opening datasets under {}", data_dir.display()))?;
            if opened.is_empty() {
                anyhow::bail!("no datasets under {}", data_dir.display());
            }
            for d in &opened {
                log::info!("dataset {}: {} timesteps, {} halos", d.name, d.timestep_count, d.halo_count);
            }
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(serve(Arc::new(explorer), SocketAddr::new(bind, port)))?;
        }
        Command::Generate { spec, out, seed } => {
            let text = std::fs::read_to_string(&spec).with_context(|| format!("reading {}", spec.display()))?;
            let spec: BlobSpec = serde_json::from_str(&text).with_context(|| format!("parsing {}", spec.display()))?;
            let d = generate_synthetic_dataset(&spec, seed, &out)?;
            println!(
                "wrote {}: {} timesteps, {} particles each, {} halos",
                out.display(),
                d.timestep_count,
                d.particle_counts.first().copied().unwrap_or(0),
                d.halo_count
            );
        }
        Command::Validate { catalog } => {
            let halos = read_catalog_file(&catalog)?;
            let n = halos.len();
            let violations = validate_forest(&MergerForest::from_records(halos));
            if violations.is_empty() {
                println!("{n} halos, no violations");
            } else {
                for v in &violations {
                    println!("{v}");
                }
                eprintln!("{n} halos, {} violations", violations.len());
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
