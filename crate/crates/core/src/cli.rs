use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::graph::{Graph, GraphSpec, LaplacianVariant};
use crate::io;
use crate::kernel::Kernel;
use crate::localization;
use crate::signal::Signal;
use crate::spectral::Spectrum;
use crate::wgft;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_GENERATION: i32 = 3;
pub const EXIT_DATA: i32 = 4;
pub const EXIT_NUMERICAL: i32 = 5;

/// Vertex-frequency analysis on weighted graphs.
#[derive(Parser)]
#[command(name = "vfa", version, about)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a graph; write its edge list and, for geometric families,
    /// vertex coordinates.
    GenGraph(GenGraphArgs),
    /// Eigendecompose the Laplacian and export eigenvalues (and optionally
    /// the eigenvector matrix).
    Spectrum(SpectrumArgs),
    /// Windowed-transform spectrogram of a signal: CSV, PGM image, and a
    /// JSON sidecar with frame bounds.
    Spectrogram(SpectrogramArgs),
    /// Frame-bound table over a list of graphs and diffusion times.
    FrameReport(FrameReportArgs),
    /// Transform a signal and invert the transform, reporting the error.
    Reconstruct(ReconstructArgs),
    /// Signal-adapted clustering labels.
    Cluster(ClusterArgs),
    /// Localization bound checks, one CSV row per bound.
    CheckBounds(CheckBoundsArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphTypeArg {
    Path,
    Ring,
    Comet,
    RandomRegular,
    Sensor,
    SwissRoll,
}

#[derive(Clone, Copy, ValueEnum, Default)]
enum VariantArg {
    #[default]
    Combinatorial,
    Normalized,
}

impl From<VariantArg> for LaplacianVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Combinatorial => LaplacianVariant::Combinatorial,
            VariantArg::Normalized => LaplacianVariant::Normalized,
        }
    }
}

/// Exactly one graph source: an edge-list file or a generator spec.
#[derive(Args)]
struct GraphSourceArgs {
    /// Edge-list CSV (i,j,weight with 1-based indices).
    #[arg(long)]
    graph_file: Option<PathBuf>,
    /// Generator family.
    #[arg(long = "type", value_enum)]
    graph_type: Option<GraphTypeArg>,
    /// Vertex count for generated graphs.
    #[arg(long)]
    n: Option<usize>,
    /// Degree for random regular graphs.
    #[arg(long)]
    degree: Option<usize>,
    /// Center degree for comet graphs.
    #[arg(long)]
    center_degree: Option<usize>,
    /// Gaussian width for sensor / swiss-roll weights.
    #[arg(long)]
    sigma1: Option<f64>,
    /// Distance threshold for sensor / swiss-roll edges.
    #[arg(long)]
    sigma2: Option<f64>,
    /// Seed for randomized generators.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

struct LoadedGraph {
    graph: Graph,
    name: String,
    /// Raw file bytes when the graph came from a file (spectrum cache key).
    file_bytes: Option<Vec<u8>>,
}

impl GraphSourceArgs {
    fn spec(&self) -> std::result::Result<GraphSpec, String> {
        let need_n = || self.n.ok_or_else(|| "--n is required".to_string());
        let t = self.graph_type.ok_or("one of --graph-file or --type is required")?;
        Ok(match t {
            GraphTypeArg::Path => GraphSpec::Path { n: need_n()? },
            GraphTypeArg::Ring => GraphSpec::Ring { n: need_n()? },
            GraphTypeArg::Comet => GraphSpec::Comet {
                n: need_n()?,
                center_degree: self
                    .center_degree
                    .ok_or("--center-degree is required for comet graphs")?,
            },
            GraphTypeArg::RandomRegular => GraphSpec::RandomRegular {
                n: need_n()?,
                degree: self.degree.ok_or("--degree is required for regular graphs")?,
                seed: self.seed,
            },
            GraphTypeArg::Sensor => GraphSpec::Sensor {
                n: need_n()?,
                sigma1: self.sigma1.ok_or("--sigma1 is required for sensor graphs")?,
                sigma2: self.sigma2.ok_or("--sigma2 is required for sensor graphs")?,
                seed: self.seed,
            },
            GraphTypeArg::SwissRoll => GraphSpec::SwissRoll {
                n: need_n()?,
                sigma1: self.sigma1.ok_or("--sigma1 is required for swiss-roll graphs")?,
                sigma2: self.sigma2.ok_or("--sigma2 is required for swiss-roll graphs")?,
                seed: self.seed,
            },
        })
    }

    fn load(&self) -> std::result::Result<LoadedGraph, CliFailure> {
        match (&self.graph_file, &self.graph_type) {
            (Some(_), Some(_)) | (None, None) => Err(CliFailure::usage(
                "exactly one of --graph-file and --type must be given",
            )),
            (Some(path), None) => {
                let bytes = fs::read(path).map_err(|e| CliFailure::code(EXIT_DATA, e))?;
                let graph = io::read_edge_list(path).map_err(CliFailure::data)?;
                let name = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "graph".into());
                Ok(LoadedGraph {
                    graph,
                    name,
                    file_bytes: Some(bytes),
                })
            }
            (None, Some(_)) => {
                let spec = self.spec().map_err(CliFailure::usage)?;
                let graph = Graph::generate(&spec).map_err(CliFailure::from_error)?;
                Ok(LoadedGraph {
                    graph,
                    name: spec.describe(),
                    file_bytes: None,
                })
            }
        }
    }
}

/// Spectral window flags, or a JSON kernel spec file.
#[derive(Args)]
struct WindowArgs {
    /// Window family: heat or polynomial.
    #[arg(long, default_value = "heat")]
    window: String,
    /// Heat diffusion parameter.
    #[arg(long, default_value_t = 5.0)]
    tau: f64,
    /// Comma-separated polynomial coefficients a0,a1,...
    #[arg(long)]
    coeffs: Option<String>,
    /// Normalize the window to unit 2-norm.
    #[arg(long)]
    normalize: bool,
    /// JSON kernel spec {form, params, normalized}; overrides other flags.
    #[arg(long)]
    window_spec: Option<PathBuf>,
}

impl WindowArgs {
    fn kernel(&self) -> std::result::Result<Kernel, CliFailure> {
        if let Some(path) = &self.window_spec {
            let text = fs::read_to_string(path).map_err(|e| CliFailure::code(EXIT_DATA, e))?;
            return Kernel::from_json(&text).map_err(CliFailure::data);
        }
        let mut kernel = match self.window.as_str() {
            "heat" => {
                if !(self.tau >= 0.0) {
                    return Err(CliFailure::usage("--tau must be nonnegative"));
                }
                Kernel::heat(self.tau)
            }
            "polynomial" => {
                let text = self
                    .coeffs
                    .as_ref()
                    .ok_or_else(|| CliFailure::usage("--coeffs is required for polynomial windows"))?;
                let coeffs = parse_f64_list(text).map_err(CliFailure::usage)?;
                if coeffs.is_empty() {
                    return Err(CliFailure::usage("--coeffs must not be empty"));
                }
                Kernel::polynomial(coeffs)
            }
            other => {
                return Err(CliFailure::usage(format!(
                    "unknown window {other:?}; use heat or polynomial"
                )))
            }
        };
        if self.normalize {
            kernel = kernel.normalized();
        }
        Ok(kernel)
    }
}

#[derive(Args)]
struct GenGraphArgs {
    #[command(flatten)]
    source: GraphSourceArgs,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    source: GraphSourceArgs,
    #[arg(long, value_enum, default_value_t)]
    variant: VariantArg,
    /// Also dump the eigenvector matrix (row-major f64, little-endian).
    #[arg(long)]
    eigenvectors: bool,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SpectrogramArgs {
    #[command(flatten)]
    source: GraphSourceArgs,
    /// Signal CSV (vertex,value).
    #[arg(long)]
    signal: PathBuf,
    #[command(flatten)]
    window: WindowArgs,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct FrameReportArgs {
    /// Graph specs: path:N, ring:N, comet:N:CENTER_DEGREE,
    /// random-regular:N:DEGREE:SEED, sensor:N:S1:S2:SEED,
    /// swiss-roll:N:S1:S2:SEED, or file:PATH.
    #[arg(long, required = true, num_args = 1..)]
    graphs: Vec<String>,
    /// Comma-separated heat diffusion times; windows are normalized.
    #[arg(long, default_value = "0.5,5.0,50.0")]
    taus: String,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct ReconstructArgs {
    #[command(flatten)]
    source: GraphSourceArgs,
    #[arg(long)]
    signal: PathBuf,
    #[command(flatten)]
    window: WindowArgs,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct ClusterArgs {
    #[command(flatten)]
    source: GraphSourceArgs,
    #[arg(long)]
    signal: PathBuf,
    /// Heat window diffusion parameter.
    #[arg(long, default_value_t = 0.3)]
    tau: f64,
    /// Feature compression strength.
    #[arg(long, default_value_t = 0.75)]
    alpha: f64,
    /// Cluster count.
    #[arg(long)]
    k: usize,
    /// k-means seed.
    #[arg(long, default_value_t = 0)]
    kmeans_seed: u64,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundKind {
    TranslationNorm,
    Poly,
    SmoothDecay,
    Spread,
    Modulation,
    ModulationNormalized,
}

#[derive(Args)]
struct CheckBoundsArgs {
    #[command(flatten)]
    source: GraphSourceArgs,
    #[arg(long, value_enum)]
    kind: BoundKind,
    /// Center vertex (1-based); defaults to every vertex for poly checks.
    #[arg(long)]
    vertex: Option<usize>,
    /// Polynomial degree for --kind poly (coefficients all 1).
    #[arg(long, default_value_t = 2)]
    degree: usize,
    /// Heat diffusion parameter.
    #[arg(long, default_value_t = 2.0)]
    tau: f64,
    /// Second vertex (1-based) for smooth-decay checks.
    #[arg(long)]
    target_vertex: Option<usize>,
    /// Spread budget; adds a tau-for-spread row.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Frequency index (0-based) for modulation checks.
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Concentration margin; defaults to the largest feasible gamma.
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

/// A failure carrying the process exit code.
struct CliFailure {
    code: i32,
    message: String,
}

impl CliFailure {
    fn usage(msg: impl std::fmt::Display) -> Self {
        CliFailure {
            code: EXIT_USAGE,
            message: msg.to_string(),
        }
    }

    fn code(code: i32, msg: impl std::fmt::Display) -> Self {
        CliFailure {
            code,
            message: msg.to_string(),
        }
    }

    fn data(err: Error) -> Self {
        CliFailure::code(EXIT_DATA, err)
    }

    fn from_error(err: Error) -> Self {
        CliFailure::code(exit_code_for(&err), err)
    }
}

impl From<Error> for CliFailure {
    fn from(err: Error) -> Self {
        CliFailure::from_error(err)
    }
}

/// Run the CLI; returns the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            failure.code
        }
    }
}

fn dispatch(cli: Cli) -> std::result::Result<(), CliFailure> {
    match cli.command {
        Command::GenGraph(args) => cmd_gen_graph(args),
        Command::Spectrum(args) => cmd_spectrum(args),
        Command::Spectrogram(args) => cmd_spectrogram(args),
        Command::FrameReport(args) => cmd_frame_report(args),
        Command::Reconstruct(args) => cmd_reconstruct(args),
        Command::Cluster(args) => cmd_cluster(args),
        Command::CheckBounds(args) => cmd_check_bounds(args),
    }
}

fn ensure_out_dir(dir: &Path) -> std::result::Result<(), CliFailure> {
    fs::create_dir_all(dir).map_err(|e| CliFailure::usage(format!("out dir: {e}")))
}

/// Cache location: VF_CACHE_DIR when set, else `<out_dir>/cache`.
fn cache_dir(out_dir: &Path) -> PathBuf {
    std::env::var_os("VF_CACHE_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| out_dir.join("cache"))
}

fn load_spectrum(
    loaded: &LoadedGraph,
    variant: LaplacianVariant,
    out_dir: &Path,
) -> std::result::Result<Spectrum, CliFailure> {
    let key = match &loaded.file_bytes {
        Some(bytes) => io::cache_key_from_bytes(bytes, variant),
        None => io::cache_key_from_graph(&loaded.graph, variant),
    };
    let dir = cache_dir(out_dir);
    if let Ok(Some(cached)) = io::read_spectrum_cache(&dir, &key) {
        if cached.n() == loaded.graph.n_vertices() {
            return Ok(cached);
        }
    }
    let spectrum = Spectrum::of(&loaded.graph, variant)
        .map_err(|e| CliFailure::code(EXIT_NUMERICAL, e))?;
    if let Err(e) = io::write_spectrum_cache(&dir, &key, &spectrum) {
        log::warn!("could not write spectrum cache: {e}");
    }
    Ok(spectrum)
}

fn read_signal_checked(
    path: &Path,
    n: usize,
) -> std::result::Result<Signal, CliFailure> {
    let values = io::read_signal(path).map_err(CliFailure::data)?;
    if values.len() != n {
        return Err(CliFailure::code(
            EXIT_DATA,
            Error::DimensionMismatch {
                expected: n,
                got: values.len(),
            },
        ));
    }
    Ok(Signal::from_real(&values))
}

fn cmd_gen_graph(args: GenGraphArgs) -> std::result::Result<(), CliFailure> {
    if args.source.graph_file.is_some() {
        return Err(CliFailure::usage("gen-graph takes a generator spec, not --graph-file"));
    }
    ensure_out_dir(&args.out_dir)?;
    let loaded = args.source.load()?;
    let edges_path = args.out_dir.join(format!("{}_edges.csv", loaded.name));
    io::write_edge_list(&edges_path, &loaded.graph).map_err(CliFailure::from_error)?;
    println!("{}", edges_path.display());
    if !loaded.graph.coordinates().is_empty() {
        let coords_path = args.out_dir.join(format!("{}_coords.csv", loaded.name));
        io::write_coordinates(&coords_path, &loaded.graph).map_err(CliFailure::from_error)?;
        println!("{}", coords_path.display());
    }
    Ok(())
}

fn cmd_spectrum(args: SpectrumArgs) -> std::result::Result<(), CliFailure> {
    ensure_out_dir(&args.out_dir)?;
    let loaded = args.source.load()?;
    let spectrum = load_spectrum(&loaded, args.variant.into(), &args.out_dir)?;
    let csv_path = args.out_dir.join("spectrum.csv");
    io::write_spectrum_csv(&csv_path, &spectrum).map_err(CliFailure::from_error)?;
    println!("{}", csv_path.display());
    if args.eigenvectors {
        let bin_path = args.out_dir.join("eigenvectors.bin");
        io::write_eigenvectors_binary(&bin_path, &spectrum).map_err(CliFailure::from_error)?;
        println!("{}", bin_path.display());
    }
    println!("lambda_max,{}", spectrum.lambda_max());
    println!("mu,{}", spectrum.coherence().mu);
    Ok(())
}

fn cmd_spectrogram(args: SpectrogramArgs) -> std::result::Result<(), CliFailure> {
    ensure_out_dir(&args.out_dir)?;
    let loaded = args.source.load()?;
    let spectrum = load_spectrum(&loaded, LaplacianVariant::Combinatorial, &args.out_dir)?;
    let f = read_signal_checked(&args.signal, spectrum.n())?;
    let kernel = args.window.kernel()?;
    let coeffs = wgft::transform(&spectrum, &kernel, &f).map_err(CliFailure::from_error)?;
    let sg = wgft::spectrogram(&coeffs);
    let bounds = wgft::frame_bounds(&spectrum, &kernel).map_err(CliFailure::from_error)?;
    let csv_path = args.out_dir.join("spectrogram.csv");
    io::write_matrix_csv(&csv_path, &sg).map_err(CliFailure::from_error)?;
    let pgm_path = args.out_dir.join("spectrogram.pgm");
    io::write_pgm(&pgm_path, &sg).map_err(CliFailure::from_error)?;
    let sidecar = serde_json::json!({
        "a": bounds.a,
        "b": bounds.b,
        "mu": spectrum.coherence().mu,
        "window_hash": kernel.content_hash(),
        "window_norm_sq": kernel
            .evaluate(&spectrum)
            .map(|v| v.iter().map(|x| x * x).sum::<f64>())
            .unwrap_or(f64::NAN),
    });
    let json_path = args.out_dir.join("spectrogram.json");
    fs::write(&json_path, serde_json::to_string_pretty(&sidecar).unwrap())
        .map_err(|e| CliFailure::code(EXIT_DATA, e))?;
    println!("{}", csv_path.display());
    println!("{}", pgm_path.display());
    println!("{}", json_path.display());
    Ok(())
}

fn parse_graph_spec_string(text: &str) -> std::result::Result<(String, LoadedGraph), CliFailure> {
    let parts: Vec<&str> = text.split(':').collect();
    let usage = |msg: String| CliFailure::usage(msg);
    let parse_n = |s: &str| -> std::result::Result<usize, CliFailure> {
        s.parse()
            .map_err(|_| usage(format!("bad vertex count in graph spec {text:?}")))
    };
    let parse_f = |s: &str| -> std::result::Result<f64, CliFailure> {
        s.parse()
            .map_err(|_| usage(format!("bad float in graph spec {text:?}")))
    };
    let parse_u = |s: &str| -> std::result::Result<u64, CliFailure> {
        s.parse()
            .map_err(|_| usage(format!("bad seed in graph spec {text:?}")))
    };
    let spec = match parts.as_slice() {
        ["path", n] => GraphSpec::Path { n: parse_n(n)? },
        ["ring", n] => GraphSpec::Ring { n: parse_n(n)? },
        ["comet", n, cd] => GraphSpec::Comet {
            n: parse_n(n)?,
            center_degree: parse_n(cd)?,
        },
        ["random-regular", n, d, seed] => GraphSpec::RandomRegular {
            n: parse_n(n)?,
            degree: parse_n(d)?,
            seed: parse_u(seed)?,
        },
        ["sensor", n, s1, s2, seed] => GraphSpec::Sensor {
            n: parse_n(n)?,
            sigma1: parse_f(s1)?,
            sigma2: parse_f(s2)?,
            seed: parse_u(seed)?,
        },
        ["swiss-roll", n, s1, s2, seed] => GraphSpec::SwissRoll {
            n: parse_n(n)?,
            sigma1: parse_f(s1)?,
            sigma2: parse_f(s2)?,
            seed: parse_u(seed)?,
        },
        ["file", ..] => {
            let path = PathBuf::from(&text["file:".len()..]);
            let bytes = fs::read(&path).map_err(|e| CliFailure::code(EXIT_DATA, e))?;
            let graph = io::read_edge_list(&path).map_err(CliFailure::data)?;
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "graph".into());
            return Ok((
                name.clone(),
                LoadedGraph {
                    graph,
                    name,
                    file_bytes: Some(bytes),
                },
            ));
        }
        _ => return Err(usage(format!("unrecognized graph spec {text:?}"))),
    };
    let graph = Graph::generate(&spec).map_err(CliFailure::from_error)?;
    Ok((
        spec.describe(),
        LoadedGraph {
            graph,
            name: spec.describe(),
            file_bytes: None,
        },
    ))
}

fn cmd_frame_report(args: FrameReportArgs) -> std::result::Result<(), CliFailure> {
    ensure_out_dir(&args.out_dir)?;
    let taus = parse_f64_list(&args.taus).map_err(CliFailure::usage)?;
    if taus.is_empty() {
        return Err(CliFailure::usage("--taus must not be empty"));
    }
    let report_path = args.out_dir.join("frame_report.csv");
    let mut rows = vec!["graph,mu,tau,lower,a,b,upper".to_string()];
    for spec_text in &args.graphs {
        let (name, loaded) = parse_graph_spec_string(spec_text)?;
        let spectrum = load_spectrum(&loaded, LaplacianVariant::Combinatorial, &args.out_dir)?;
        let mu = spectrum.coherence().mu;
        for &tau in &taus {
            let kernel = Kernel::heat(tau).normalized();
            let fb = wgft::frame_bounds(&spectrum, &kernel).map_err(CliFailure::from_error)?;
            rows.push(format!(
                "{name},{mu},{tau},{},{},{},{}",
                fb.lower_theory, fb.a, fb.b, fb.upper_theory
            ));
        }
    }
    fs::write(&report_path, rows.join("\n") + "\n")
        .map_err(|e| CliFailure::code(EXIT_DATA, e))?;
    println!("{}", report_path.display());
    Ok(())
}

fn cmd_reconstruct(args: ReconstructArgs) -> std::result::Result<(), CliFailure> {
    ensure_out_dir(&args.out_dir)?;
    let loaded = args.source.load()?;
    let spectrum = load_spectrum(&loaded, LaplacianVariant::Combinatorial, &args.out_dir)?;
    let f = read_signal_checked(&args.signal, spectrum.n())?;
    let kernel = args.window.kernel()?;
    let coeffs = wgft::transform(&spectrum, &kernel, &f).map_err(CliFailure::from_error)?;
    let back = wgft::reconstruct(&spectrum, &kernel, &coeffs).map_err(CliFailure::from_error)?;
    let out_path = args.out_dir.join("reconstructed.csv");
    io::write_signal(&out_path, &back.real_parts()).map_err(CliFailure::from_error)?;
    let denom = f.max_abs().max(1e-300);
    println!("{}", out_path.display());
    println!("max_rel_error,{}", back.sub(&f).max_abs() / denom);
    Ok(())
}

fn cmd_cluster(args: ClusterArgs) -> std::result::Result<(), CliFailure> {
    ensure_out_dir(&args.out_dir)?;
    let loaded = args.source.load()?;
    let spectrum = load_spectrum(&loaded, LaplacianVariant::Combinatorial, &args.out_dir)?;
    let f = read_signal_checked(&args.signal, spectrum.n())?;
    let kernel = Kernel::heat(args.tau);
    let assignment = crate::clustering::signal_adapted_cluster(
        &spectrum,
        &f,
        &kernel,
        args.alpha,
        args.k,
        args.kmeans_seed,
    )
    .map_err(CliFailure::from_error)?;
    let labels_path = args.out_dir.join("labels.csv");
    let mut rows = vec!["vertex,label".to_string()];
    for (v, &label) in assignment.labels.iter().enumerate() {
        rows.push(format!("{},{label}", v + 1));
    }
    fs::write(&labels_path, rows.join("\n") + "\n")
        .map_err(|e| CliFailure::code(EXIT_DATA, e))?;
    println!("{}", labels_path.display());
    println!("inertia,{}", assignment.inertia);
    Ok(())
}

fn vertex_index(v: usize, n: usize) -> std::result::Result<usize, CliFailure> {
    if v < 1 || v > n {
        return Err(CliFailure::code(
            EXIT_DATA,
            Error::IndexOutOfRange { index: v, size: n },
        ));
    }
    Ok(v - 1)
}

fn cmd_check_bounds(args: CheckBoundsArgs) -> std::result::Result<(), CliFailure> {
    ensure_out_dir(&args.out_dir)?;
    let loaded = args.source.load()?;
    let n = loaded.graph.n_vertices();
    let variant = match args.kind {
        BoundKind::ModulationNormalized => LaplacianVariant::Normalized,
        _ => LaplacianVariant::Combinatorial,
    };
    let spectrum = load_spectrum(&loaded, variant, &args.out_dir)?;
    let mut rows = vec!["bound_name,lhs,rhs,satisfied,vacuous".to_string()];
    let mut push = |name: &str, lhs: f64, rhs: f64, satisfied: bool, vacuous: bool| {
        rows.push(format!("{name},{lhs},{rhs},{satisfied},{vacuous}"));
    };
    match args.kind {
        BoundKind::TranslationNorm => {
            let i = vertex_index(args.vertex.unwrap_or(1), n)?;
            let kernel = Kernel::heat(args.tau).normalized();
            let b = localization::translation_norm_bounds(&spectrum, &kernel, i)
                .map_err(CliFailure::from_error)?;
            push("translation_norm_lower", b.lower, b.value, b.lower <= b.value + 1e-9, false);
            push("translation_norm_upper", b.value, b.upper, b.value <= b.upper + 1e-9, false);
        }
        BoundKind::Poly => {
            let kernel = Kernel::polynomial(vec![1.0; args.degree + 1]);
            let dm = loaded.graph.geodesic_distances();
            let vertices: Vec<usize> = match args.vertex {
                Some(v) => vec![vertex_index(v, n)?],
                None => (0..n).collect(),
            };
            for i in vertices {
                let r = localization::poly_localization_check(&dm, &spectrum, &kernel, i)
                    .map_err(CliFailure::from_error)?;
                push(
                    &format!("poly_localization_v{}", i + 1),
                    r.max_outside,
                    1e-8 * r.max_inside,
                    r.satisfied,
                    false,
                );
            }
        }
        BoundKind::SmoothDecay => {
            let i = vertex_index(args.vertex.unwrap_or(1), n)?;
            let target = args
                .target_vertex
                .ok_or_else(|| CliFailure::usage("--target-vertex is required"))?;
            let j = vertex_index(target, n)?;
            let dm = loaded.graph.geodesic_distances();
            let r = localization::smooth_decay_bound(&dm, &spectrum, &Kernel::heat(args.tau), i, j)
                .map_err(CliFailure::from_error)?;
            push("smooth_decay", r.lhs, r.rhs, r.satisfied, r.vacuous);
        }
        BoundKind::Spread => {
            let i = vertex_index(args.vertex.unwrap_or(1), n)?;
            let dm = loaded.graph.geodesic_distances();
            let tig = crate::operators::translate_kernel(&spectrum, &Kernel::heat(args.tau), i)
                .map_err(CliFailure::from_error)?;
            let measured = localization::graph_spread(&dm, &Signal::from_real(&tig), i)
                .map_err(CliFailure::from_error)?;
            let bound = localization::heat_spread_bound(&loaded.graph, &spectrum, args.tau, i)
                .map_err(CliFailure::from_error)?;
            push(
                "heat_spread_bound",
                measured.spread_sq,
                bound,
                measured.spread_sq <= bound + 1e-9,
                bound > 1.0,
            );
            if let Some(eps) = args.epsilon {
                let tau = localization::tau_for_spread(&loaded.graph, &spectrum, eps, i)
                    .map_err(CliFailure::from_error)?;
                let tig = crate::operators::translate_kernel(&spectrum, &Kernel::heat(tau), i)
                    .map_err(CliFailure::from_error)?;
                let at_tau = localization::graph_spread(&dm, &Signal::from_real(&tig), i)
                    .map_err(CliFailure::from_error)?;
                push(
                    "tau_for_spread",
                    at_tau.spread_sq,
                    eps,
                    at_tau.spread_sq <= eps + 1e-9,
                    false,
                );
            }
        }
        BoundKind::Modulation | BoundKind::ModulationNormalized => {
            if args.k >= n {
                return Err(CliFailure::code(
                    EXIT_DATA,
                    Error::IndexOutOfRange { index: args.k, size: n },
                ));
            }
            let kernel = Kernel::heat(args.tau);
            let gamma = match args.gamma {
                Some(g) => g,
                None => {
                    let max = localization::max_gamma(&spectrum, &kernel)
                        .map_err(CliFailure::from_error)?;
                    if max > 0.0 && max.is_finite() {
                        max
                    } else {
                        1.0
                    }
                }
            };
            let r = match args.kind {
                BoundKind::Modulation => {
                    localization::modulation_concentration(&spectrum, &kernel, args.k, gamma)
                }
                _ => localization::modulation_concentration_normalized(
                    &spectrum, &kernel, args.k, gamma,
                ),
            }
            .map_err(CliFailure::from_error)?;
            push(
                "concentration_hypothesis",
                r.hypothesis_lhs,
                r.hypothesis_rhs,
                r.condition_met,
                false,
            );
            let worst = r
                .ratios
                .iter()
                .enumerate()
                .filter(|(l, _)| *l != args.k)
                .map(|(_, &x)| x)
                .fold(f64::INFINITY, f64::min);
            push(
                "concentration_conclusion",
                r.gamma,
                worst,
                r.conclusion_holds.unwrap_or(false),
                !r.condition_met,
            );
            push(
                "concentration_energy",
                r.energy_bound,
                r.energy_ratio,
                r.energy_holds.unwrap_or(false),
                !r.condition_met,
            );
        }
    }
    let path = args.out_dir.join("bounds.csv");
    fs::write(&path, rows.join("\n") + "\n").map_err(|e| CliFailure::code(EXIT_DATA, e))?;
    println!("{}", path.display());
    Ok(())
}

fn parse_f64_list(text: &str) -> std::result::Result<Vec<f64>, String> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| format!("cannot parse {s:?} as a number"))
        })
        .collect()
}

/// Exit code category for an error: 2 usage, 3 generation failure,
/// 4 data mismatch, 5 numerical failure.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::InfeasibleSpec(_) => EXIT_USAGE,
        Error::ConnectivityRetriesExceeded(_) => EXIT_GENERATION,
        Error::DisconnectedGraph
        | Error::SelfLoop(_)
        | Error::NonPositiveWeight { .. }
        | Error::DuplicateEdge { .. }
        | Error::DimensionMismatch { .. }
        | Error::IndexOutOfRange { .. }
        | Error::BadK { .. }
        | Error::BadBand { .. }
        | Error::Parse(_)
        | Error::Io(_) => EXIT_DATA,
        _ => EXIT_NUMERICAL,
    }
}
