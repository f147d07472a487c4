use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_rational::Ratio;

use grsc::cancel::{check_gr_metric, check_gr_p};
use grsc::comerford::{comerford_transform, CosetAction};
use grsc::dot::export_dot;
use grsc::pipeline::{run_theorem_pipeline, PipelineConfig};
use grsc::ripssegev::{build_rips_segev, search_coefficients, CoefficientSystem, SearchConfig};
use grsc::updcert::{trace_product, verify_certificate, Certificate};
use grsc::{Alphabet, Error, LabelledGraph, LengthFunction, Word};

#[derive(Parser)]
#[command(name = "grsc", version, about = "Graphical small cancellation toolkit")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Length {
    Word,
    FreeProduct,
}

#[derive(Subcommand)]
enum Cmd {
    /// Search for a verified Rips–Segev coefficient system.
    Generate {
        #[arg(long, default_value = "s^2")]
        a: String,
        #[arg(long, default_value = "t^2")]
        b: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 256)]
        budget: u64,
        #[arg(long, default_value_t = 32)]
        n_max: usize,
        #[arg(long, default_value_t = 2)]
        c_min: usize,
        #[arg(long, default_value_t = 12)]
        c_max: usize,
        /// Output directory.
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Check a small cancellation condition on a graph file.
    Check {
        #[arg(long)]
        graph: PathBuf,
        /// Check Gr'(λ) with this λ, e.g. 1/6.
        #[arg(long)]
        lambda: Option<Ratio<u64>>,
        #[arg(long, value_enum, default_value = "free-product")]
        length: Length,
        /// Check Gr(p) instead.
        #[arg(long)]
        p: Option<usize>,
        #[arg(long, default_value_t = 100_000)]
        cycle_cap: usize,
    },
    /// Apply the Comerford transform for a coset action.
    Comerford {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        action: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Trace a product a·b from the base vertex of a Rips–Segev graph.
    Trace {
        #[arg(long)]
        cs: PathBuf,
        #[arg(long)]
        a_elem: String,
        #[arg(long)]
        b_elem: String,
    },
    /// Re-check a certificate against a graph file.
    VerifyCert {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        cert: PathBuf,
    },
    /// Write a graph as Graphviz dot.
    ExportDot {
        #[arg(long)]
        graph: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Run every stage for subgroups of index at most k.
    Pipeline {
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 256)]
        budget: u64,
        /// Use this coefficient system instead of searching.
        #[arg(long)]
        cs: Option<PathBuf>,
        /// Keep going after a failed stage.
        #[arg(long)]
        continue_on_failure: bool,
        /// Allow k above 3 (cost grows like k! and the count of index-k subgroups).
        #[arg(long, default_value_t = grsc::pipeline::DEFAULT_K_CAP)]
        k_cap: usize,
        #[arg(short, long)]
        out: PathBuf,
    },
}

fn read(p: &Path) -> grsc::Result<String> {
    Ok(std::fs::read_to_string(p)?)
}

fn write(p: &Path, body: &str) -> grsc::Result<()> {
    if let Some(d) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(d)?;
    }
    Ok(std::fs::write(p, body)?)
}

fn default_alphabet() -> Alphabet {
    Alphabet::with_blocks(&["s", "t"], &[vec![0], vec![1]]).expect("valid alphabet")
}

fn run(cmd: Cmd) -> grsc::Result<u8> {
    match cmd {
        Cmd::Generate {
            a,
            b,
            seed,
            budget,
            n_max,
            c_min,
            c_max,
            out,
        } => {
            let alph = default_alphabet();
            let (a, b) = (Word::parse(&a, &alph)?, Word::parse(&b, &alph)?);
            let cfg = SearchConfig {
                budget,
                seed,
                n_max,
                c_min,
                c_max,
                ..SearchConfig::default()
            };
            let res = search_coefficients(&alph, &a, &b, &cfg)?;
            write(&out.join("search.txt"), &res.stats.to_text())?;
            print!("{}", res.stats.to_text());
            let Some(f) = res.found else {
                eprintln!("no verified system within budget {budget}");
                return Ok(2);
            };
            let rsg = build_rips_segev(&f.cs)?;
            write(&out.join("coefficients.cs"), &f.cs.to_text())?;
            write(&out.join("graph.grsc"), &rsg.graph.to_text())?;
            write(&out.join("verdict.txt"), &f.verdict.report(&rsg.graph))?;
            println!("candidate {}", f.index);
            Ok(0)
        }
        Cmd::Check {
            graph,
            lambda,
            length,
            p,
            cycle_cap,
        } => {
            let g = LabelledGraph::parse(&read(&graph)?)?;
            let verdict = match (lambda, p) {
                (Some(l), None) => {
                    let lf = match length {
                        Length::Word => LengthFunction::WordLength,
                        Length::FreeProduct => LengthFunction::free_product(g.alphabet()),
                    };
                    check_gr_metric(&g, l, &lf)?
                }
                (None, Some(p)) => check_gr_p(&g, p, cycle_cap)?,
                _ => {
                    return Err(Error::InvalidCoefficients(
                        "give exactly one of --lambda and --p".into(),
                    ))
                }
            };
            print!("{}", verdict.report(&g));
            Ok(if verdict.satisfied() { 0 } else { 1 })
        }
        Cmd::Comerford { graph, action, out } => {
            let g = LabelledGraph::parse(&read(&graph)?)?;
            let act = CosetAction::parse(&read(&action)?, g.alphabet())?;
            let gh = comerford_transform(&g, &act)?;
            write(&out, &gh.graph.to_text())?;
            print!("{}", gh.metadata_text());
            Ok(0)
        }
        Cmd::Trace { cs, a_elem, b_elem } => {
            let cs = CoefficientSystem::parse(&read(&cs)?)?;
            let rsg = build_rips_segev(&cs)?;
            let a = Word::parse(&a_elem, &cs.alphabet)?;
            let b = Word::parse(&b_elem, &cs.alphabet)?;
            let w = trace_product(&rsg, &a, &b)?;
            println!("vertex {}", w.endvertex);
            println!("path {}", w.path.to_text());
            Ok(0)
        }
        Cmd::VerifyCert { graph, cert } => {
            let g = LabelledGraph::parse(&read(&graph)?)?;
            let c = Certificate::parse(&read(&cert)?, g.alphabet())?;
            let chk = verify_certificate(&g, &c);
            for p in &chk.problems {
                println!("problem {p}");
            }
            println!(
                "certificate {} buckets {} witnesses {}",
                if chk.ok() { "valid" } else { "invalid" },
                c.buckets.len(),
                c.num_witnesses()
            );
            Ok(if chk.ok() { 0 } else { 1 })
        }
        Cmd::ExportDot { graph, out } => {
            let g = LabelledGraph::parse(&read(&graph)?)?;
            let name = graph
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "graph".into());
            let d = export_dot(&g, &name);
            match out {
                Some(o) => write(&o, &d)?,
                None => print!("{d}"),
            }
            Ok(0)
        }
        Cmd::Pipeline {
            k,
            seed,
            budget,
            cs,
            continue_on_failure,
            k_cap,
            out,
        } => {
            let mut cfg = PipelineConfig::new(k, seed, budget);
            cfg.k_cap = k_cap;
            cfg.halt_on_failure = !continue_on_failure;
            if k > grsc::pipeline::DEFAULT_K_CAP && k <= k_cap {
                eprintln!("warning: k = {k} is above the default cap; expect a long run");
            }
            if let Some(p) = cs {
                cfg.coefficients = Some(CoefficientSystem::parse(&read(&p)?)?);
            }
            let run = run_theorem_pipeline(&cfg)?;
            run.write(&out)?;
            print!("{}", run.report.to_text());
            Ok(run.report.status.exit_code() as u8)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(c) => ExitCode::from(c),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if matches!(e, Error::Resource(_)) {
                2
            } else {
                1
            })
        }
    }
}
