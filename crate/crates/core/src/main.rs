use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::thread;

use clap::{Parser, Subcommand};

use sgtools::evaluator::{
    generate_questions, load_questions, run_benchmark, write_questions, Agent, EndpointAgent, QuestionType, RunOptions,
    ScriptedAgent,
};
use sgtools::ingestion::load_scene;
use sgtools::synth::{synth_scene, SynthConfig};
use sgtools::tool_server::{replay_trace_file, serve_stdio, serve_tcp, SceneStore};
use sgtools::toolbox::scene_context;

#[derive(Parser)]
#[command(name = "sgtools", version, about = "Metric 3D scene graphs, a geometric tool server and a spatial QA harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Serve the tool protocol over stdio and/or TCP.
    Serve {
        #[arg(long)]
        scenes: PathBuf,
        #[arg(long)]
        tcp: Option<String>,
        /// Also serve stdio when --tcp is given (stdio is the default otherwise).
        #[arg(long)]
        stdio: bool,
    },
    /// Run a question file against an agent and write a report.
    Eval {
        #[arg(long)]
        scenes: PathBuf,
        #[arg(long)]
        questions: PathBuf,
        /// `scripted` or `endpoint:<host:port>`.
        #[arg(long, default_value = "scripted")]
        agent: String,
        #[arg(long)]
        report: PathBuf,
        /// Comma-separated question types.
        #[arg(long, value_delimiter = ',')]
        types: Vec<QuestionType>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Generate synthetic questions for one scene file.
    Genq {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long = "type", value_delimiter = ',')]
        types: Vec<QuestionType>,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output JSONL; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write procedurally generated scene files.
    Synth {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        count: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-run persisted traces against fresh sessions and compare results.
    Replay {
        #[arg(long)]
        scenes: PathBuf,
        #[arg(required = true)]
        traces: Vec<PathBuf>,
    },
    /// Load a scene file and report structural violations.
    Validate { scene: PathBuf },
    /// Print the scene context table for a scene file.
    Context { scene: PathBuf },
}

fn scene_id_of(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "scene".into())
}

fn output(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: Cli) -> Result<(), Box<dyn std::error::Error>> {
    match cli.command {
        Command::Serve { scenes, tcp, stdio } => {
            let store = Arc::new(SceneStore::from_dir(scenes));
            match tcp {
                Some(addr) if stdio => {
                    let tcp_store = store.clone();
                    thread::spawn(move || {
                        if let Err(e) = serve_tcp(addr, tcp_store) {
                            log::error!("tcp server stopped: {e}");
                        }
                    });
                    serve_stdio(store)?;
                }
                Some(addr) => serve_tcp(addr, store)?,
                None => serve_stdio(store)?,
            }
        }
        Command::Eval {
            scenes,
            questions,
            agent,
            report,
            types,
            seed,
        } => {
            let questions = load_questions(&questions)?;
            let agent: Box<dyn Agent> = match agent.as_str() {
                "scripted" => Box::new(ScriptedAgent),
                other => match other.strip_prefix("endpoint:") {
                    Some(addr) => Box::new(EndpointAgent::new(addr)),
                    None => return Err(format!("unknown agent '{other}'; use scripted or endpoint:<addr>").into()),
                },
            };
            let store = SceneStore::from_dir(scenes);
            let opts = RunOptions {
                seed,
                types,
                output_dir: Some(report.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new(".")).to_path_buf()),
            };
            let r = run_benchmark(&questions, &store, agent.as_ref(), &opts)?;
            fs::write(&report, r.to_json() + "\n")?;
            for row in &r.rows {
                println!(
                    "{:<20} n={:<5} score={:.3} tools mean={:.2} median={}",
                    row.qtype.as_str(),
                    row.n,
                    row.mean_score,
                    row.mean_tools,
                    row.median_tools
                );
            }
            match r.overall_average {
                Some(avg) => println!("overall average {avg:.3} over {} questions", r.n_questions),
                None => println!("no questions evaluated"),
            }
        }
        Command::Genq {
            scene,
            types,
            n,
            seed,
            out,
        } => {
            let graph = load_scene(&scene)?;
            let id = scene_id_of(&scene);
            let types = if types.is_empty() { QuestionType::ALL.to_vec() } else { types };
            let mut all = Vec::new();
            for t in types {
                let qs = generate_questions(&id, &graph, t, n, seed);
                if qs.len() < n {
                    log::warn!("{id}: only {} of {n} {t} questions could be generated", qs.len());
                }
                all.extend(qs);
            }
            write_questions(output(out.as_deref())?, &all)?;
        }
        Command::Synth { seed, count, out } => {
            fs::create_dir_all(&out)?;
            let cfg = SynthConfig::default();
            for s in seed..seed + count {
                let path = out.join(format!("synth-{s}.json"));
                fs::write(&path, serde_json::to_string_pretty(&synth_scene(s, &cfg))? + "\n")?;
                println!("{}", path.display());
            }
        }
        Command::Replay { scenes, traces } => {
            let store = SceneStore::from_dir(scenes);
            let mut all_identical = true;
            for path in traces {
                let r = replay_trace_file(&path, &store)?;
                println!("{}: {}/{} identical", path.display(), r.identical, r.total);
                all_identical &= r.all_identical();
            }
            if !all_identical {
                return Err("replay produced differing results".into());
            }
        }
        Command::Validate { scene } => {
            let graph = load_scene(&scene)?;
            println!(
                "{}: ok ({} objects, {} rooms, {} edges)",
                scene.display(),
                graph.objects().count(),
                graph.rooms().count(),
                graph.edges().len()
            );
        }
        Command::Context { scene } => {
            let graph = load_scene(&scene)?;
            println!("{}", scene_context(&graph).text);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
