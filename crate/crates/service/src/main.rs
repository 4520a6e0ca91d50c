use std::fs;
use std::io::{self, Write};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use holoviz_core::ingest::{ColumnStats, CsvOptions};
use holoviz_core::mapping::ChannelMapping;
use holoviz_core::render::{encode_image, ImageFormat, Parallelism};
use holoviz_service::api::{router, ApiConfig};
use holoviz_service::ops::{self, QuiltParams, SceneRequest, ServiceError};
use holoviz_service::store::{Namespace, Store, StoreError};

#[derive(Debug, Parser)]
#[command(
    name = "holoviz",
    version,
    about = "Tabular data to holographic quilt images"
)]
struct Cli {
    /// Directory holding datasets, scenes and visualizations.
    #[arg(
        long,
        env = "HOLOVIZ_DATA_DIR",
        default_value = "holoviz-data",
        global = true
    )]
    data_dir: PathBuf,
    /// Act in the namespace of this bearer token instead of the local one.
    #[arg(long, env = "HOLOVIZ_TOKEN", global = true)]
    token: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse a CSV file and store it as a dataset.
    Ingest {
        csv: PathBuf,
        #[arg(long, default_value_t = ',')]
        delimiter: char,
        /// Treat the first row as data and name columns col1..colN.
        #[arg(long)]
        no_header: bool,
    },
    /// Map a stored dataset into a scene.
    Scene {
        dataset_id: String,
        /// ChannelMapping JSON; the default mapping is used without it.
        #[arg(long)]
        map: Option<PathBuf>,
    },
    /// Render a stored scene to a quilt image.
    Render {
        scene_id: String,
        #[arg(long)]
        views: Option<usize>,
        /// Total cone angle, degrees.
        #[arg(long)]
        cone: Option<f64>,
        #[arg(long)]
        columns: Option<usize>,
        #[arg(long)]
        rows: Option<usize>,
        #[arg(long)]
        tile_width: Option<u32>,
        #[arg(long)]
        tile_height: Option<u32>,
        /// Output file or directory; defaults to the layout-encoding file name.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write binary PPM instead of PNG.
        #[arg(long)]
        ppm: bool,
        /// Render threads; all cores by default.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Run the HTTP server.
    Serve {
        #[arg(long, env = "HOLOVIZ_PORT", default_value_t = 8080)]
        port: u16,
        #[arg(long, env = "HOLOVIZ_BIND", default_value = "127.0.0.1")]
        bind: std::net::IpAddr,
        /// Skip authentication; everything lives in the local namespace.
        #[arg(long, env = "HOLOVIZ_SINGLE_USER")]
        single_user: bool,
        /// Directory of static web client files served at `/`.
        #[arg(long)]
        ui_dir: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        max_renders: usize,
    },
    /// Issue a new bearer token and print it.
    Token,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Service(#[from] ServiceError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Usage(String),
}

impl From<StoreError> for CliError {
    fn from(e: StoreError) -> Self {
        CliError::Service(e.into())
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Service(
                ServiceError::Store(_)
                | ServiceError::Image(_)
                | ServiceError::Corrupt { .. }
                | ServiceError::Internal(_),
            )
            | CliError::Io { .. } => 2,
            _ => 1,
        }
    }
}

fn read(path: &PathBuf) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })
}

fn namespace(store: &Store, token: Option<&str>) -> Result<Namespace, CliError> {
    match token {
        None => Ok(Namespace::local()),
        Some(t) => store
            .resolve_token(t)?
            .ok_or(CliError::Service(ServiceError::Unauthorized)),
    }
}

fn print_schema(summary: &ops::DatasetSummary) {
    println!("{}", summary.id);
    println!("{} rows", summary.row_count);
    println!("{:<24} {:<12} {:>8}  summary", "column", "kind", "missing");
    for (schema, stats) in summary.schema.iter().zip(&summary.stats) {
        let detail = match stats {
            ColumnStats::Numeric(n) => format!("min {} max {} mean {:.6}", n.min, n.max, n.mean),
            ColumnStats::Categorical(c) => format!("{} categories", c.categories.len()),
        };
        println!(
            "{:<24} {:<12} {:>8}  {detail}",
            schema.name,
            schema.kind.to_string(),
            schema.missing_count,
        );
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let store = Store::open(&cli.data_dir)?;
    match cli.command {
        Command::Ingest {
            csv,
            delimiter,
            no_header,
        } => {
            let ns = namespace(&store, cli.token.as_deref())?;
            let options = CsvOptions {
                delimiter,
                has_header: !no_header,
            };
            let summary = ops::ingest(&store, &ns, &read(&csv)?, &options)?;
            print_schema(&summary);
        }
        Command::Scene { dataset_id, map } => {
            let ns = namespace(&store, cli.token.as_deref())?;
            let mapping = match map {
                Some(path) => {
                    let bytes = read(&path)?;
                    let de = &mut serde_json::Deserializer::from_slice(&bytes);
                    let m: ChannelMapping = serde_path_to_error::deserialize(de).map_err(|e| {
                        CliError::Usage(format!(
                            "{}: at {}: {}",
                            path.display(),
                            e.path(),
                            e.inner()
                        ))
                    })?;
                    Some(m)
                }
                None => None,
            };
            let created = ops::create_scene(
                &store,
                &ns,
                SceneRequest {
                    dataset_id,
                    mapping,
                    camera: None,
                },
            )?;
            println!("{}", created.scene_id);
            println!(
                "{} nodes, {} rows dropped",
                created.report.nodes_emitted, created.report.rows_dropped
            );
        }
        Command::Render {
            scene_id,
            views,
            cone,
            columns,
            rows,
            tile_width,
            tile_height,
            out,
            ppm,
            threads,
        } => {
            let ns = namespace(&store, cli.token.as_deref())?;
            let config = QuiltParams {
                views,
                cone_deg: cone,
                columns,
                rows,
                tile_w: tile_width,
                tile_h: tile_height,
            }
            .to_config()?;
            let scene = ops::load_scene(&store, &ns, &scene_id)?;
            let parallelism = match threads {
                Some(0) => return Err(CliError::Usage("--threads must be positive".into())),
                Some(1) => Parallelism::Sequential,
                Some(n) => Parallelism::Threads(n),
                None => Parallelism::Global,
            };
            let quilt = ops::render(&scene, &config, parallelism)?;
            let format = if ppm {
                ImageFormat::Ppm
            } else {
                ImageFormat::Png
            };
            let bytes = encode_image(&quilt.pixels, format).map_err(ServiceError::from)?;
            let mut name = config.file_name(&scene_id);
            if ppm {
                name.replace_range(name.len() - 3.., "ppm");
            }
            let path = match out {
                Some(p) if p.is_dir() => p.join(name),
                Some(p) => p,
                None => PathBuf::from(name),
            };
            fs::write(&path, bytes).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            println!("{}", path.display());
        }
        Command::Serve {
            port,
            bind,
            single_user,
            ui_dir,
            max_renders,
        } => {
            if max_renders == 0 {
                return Err(CliError::Usage("--max-renders must be positive".into()));
            }
            let config = ApiConfig {
                single_user,
                max_renders,
                ui_dir,
            };
            let runtime = tokio::runtime::Runtime::new().map_err(|source| CliError::Io {
                path: cli.data_dir.clone(),
                source,
            })?;
            runtime.block_on(serve(store, config, SocketAddr::new(bind, port)))?;
        }
        Command::Token => {
            println!("{}", store.create_token()?);
        }
    }
    Ok(())
}

async fn serve(store: Store, config: ApiConfig, addr: SocketAddr) -> Result<(), CliError> {
    let io_err = |source| CliError::Io {
        path: PathBuf::from(addr.to_string()),
        source,
    };
    let listener = tokio::net::TcpListener::bind(addr).await.map_err(io_err)?;
    let local = listener.local_addr().map_err(io_err)?;
    println!("listening on {local}");
    io::stdout().flush().ok();
    axum::serve(listener, router(Arc::new(store), config))
        .with_graceful_shutdown(async {
            tokio::signal::ctrl_c().await.ok();
        })
        .await
        .map_err(io_err)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
