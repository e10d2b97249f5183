//! Subcommand bodies. Each writes data to `out` and notes to stderr.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::ops::ControlFlow;
use std::path::Path;

use cilist_core::baselines::{self, DEFAULT_ACS_CAP, DEFAULT_BF_CAP, DEFAULT_GMP_CAP};
use cilist_core::citest::{load_csv, test_model, ColumnKind};
use cilist_core::format::{ci_json, format_set_ci, set_ci_json, write_graph_json, write_graph_text};
use cilist_core::sweep::{bench_sweep, write_csv, BenchConfig};
use cilist_core::{
    default_order, format_ci, is_separated, latent_project, list_ci, project_latents_fraction, random_graph,
    read_graph_file, CausalGraph, CiStatement, RandomGraphSpec, VariableOrder,
};

use crate::{
    BenchArgs, BfArgs, CitestArgs, Command, DsepArgs, Failure, Format, GmpArgs, ListArgs, OrderArg, ProjectArgs,
    RandgenArgs, VerifyArgs,
};

type Outcome = Result<(), Failure>;

pub(crate) fn run(command: Command, out: &mut dyn Write) -> Outcome {
    match command {
        Command::Listci(a) => listci(a, out),
        Command::Listgmp(a) => listgmp(a, out),
        Command::Listcibf(a) => listcibf(a, out),
        Command::Dsep(a) => dsep(a, out),
        Command::Project(a) => project(a, out),
        Command::Randgen(a) => randgen(a, out),
        Command::Bench(a) => bench(a, out),
        Command::Citest(a) => citest(a, out),
        Command::Verify(a) => verify(a, out),
    }
}

/// A graph ready for the listing algorithms: latents projected out and an
/// order chosen.
struct Loaded {
    graph: CausalGraph,
    order: VariableOrder,
}

fn load(path: &Path, order: &OrderArg) -> Result<Loaded, Failure> {
    let file = read_graph_file(path)?;
    let embedded: Option<Vec<String>> =
        file.order.as_ref().map(|o| o.sequence().iter().map(|&v| file.graph.name(v).to_string()).collect());
    let graph = if file.graph.has_latents() {
        let latents = file.graph.node_count() - file.graph.observed().len();
        eprintln!("note: projecting out {latents} latent node(s)");
        latent_project(&file.graph)?
    } else {
        file.graph
    };
    let order = match order.order.as_ref().or(embedded.as_ref()) {
        Some(names) => {
            let o = VariableOrder::from_names(&graph, names)?;
            cilist_core::order::check_order(&graph, &o)?;
            o
        }
        None => default_order(&graph),
    };
    Ok(Loaded { graph, order })
}

fn cap_from(flag: Option<usize>, force: bool, var: &str, default: usize) -> Result<usize, Failure> {
    if force {
        return Ok(usize::MAX);
    }
    if let Some(c) = flag {
        return Ok(c);
    }
    match std::env::var(var) {
        Ok(v) => {
            v.trim().parse().map_err(|_| Failure::Input(format!("${var} must be a non-negative integer, got `{v}`")))
        }
        Err(_) => Ok(default),
    }
}

fn emit_ci(out: &mut dyn Write, g: &CausalGraph, ci: &CiStatement, format: Format) -> std::io::Result<()> {
    match format {
        Format::Text => writeln!(out, "{}", format_ci(g, ci)),
        Format::Json => writeln!(out, "{}", ci_json(g, ci)),
    }
}

/// Runs a streaming listing whose sink may hit an I/O error, turning that
/// error into a break and surfacing it afterwards.
fn stream<F>(body: F) -> Outcome
where
    F: FnOnce(&mut dyn FnMut(std::io::Result<()>) -> ControlFlow<()>) -> Result<(), Failure>,
{
    let mut failed: Option<std::io::Error> = None;
    let mut check = |r: std::io::Result<()>| match r {
        Ok(()) => ControlFlow::Continue(()),
        Err(e) => {
            failed = Some(e);
            ControlFlow::Break(())
        }
    };
    body(&mut check)?;
    match failed {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

fn listci(a: ListArgs, out: &mut dyn Write) -> Outcome {
    let Loaded { graph: g, order } = load(&a.graph.graph, &a.order)?;
    if a.count_only {
        let mut count = 0u64;
        let _ = list_ci(&g, &order, |_| {
            count += 1;
            ControlFlow::Continue(())
        })?;
        writeln!(out, "{count}")?;
        return Ok(());
    }
    stream(|check| {
        let _ = list_ci(&g, &order, |ci| check(emit_ci(out, &g, &ci, a.format)))?;
        Ok(())
    })
}

fn listgmp(a: GmpArgs, out: &mut dyn Write) -> Outcome {
    let Loaded { graph: g, .. } = load(&a.graph.graph, &OrderArg { order: None })?;
    let cap = cap_from(a.cap, a.force, "CILIST_GMP_CAP", DEFAULT_GMP_CAP)?;
    if a.count_only {
        writeln!(out, "{}", baselines::count_gmp(&g, cap)?)?;
        return Ok(());
    }
    stream(|check| {
        let _ = baselines::list_gmp(&g, cap, |x, y, z| {
            check(match a.format {
                Format::Text => writeln!(out, "{}", format_set_ci(&g, x, y, z)),
                Format::Json => writeln!(out, "{}", set_ci_json(&g, x, y, z)),
            })
        })?;
        Ok(())
    })
}

fn listcibf(a: BfArgs, out: &mut dyn Write) -> Outcome {
    let Loaded { graph: g, order } = load(&a.graph.graph, &a.order)?;
    let cap = cap_from(a.cap, a.force, "CILIST_BF_CAP", DEFAULT_BF_CAP)?;
    let keep = |ci: &CiStatement| a.include_vacuous || !ci.is_vacuous();
    if a.count_only {
        let mut count = 0u64;
        let _ = baselines::list_ci_bf(&g, &order, cap, |_, ci| {
            count += u64::from(keep(&ci));
            ControlFlow::Continue(())
        })?;
        writeln!(out, "{count}")?;
        return Ok(());
    }
    stream(|check| {
        let _ = baselines::list_ci_bf(&g, &order, cap, |_, ci| {
            if keep(&ci) {
                check(emit_ci(out, &g, &ci, a.format))
            } else {
                ControlFlow::Continue(())
            }
        })?;
        Ok(())
    })
}

fn dsep(a: DsepArgs, out: &mut dyn Write) -> Outcome {
    let g = read_graph_file(&a.graph.graph)?.graph;
    let x = g.set_of(&a.x)?;
    let y = g.set_of(&a.y)?;
    let z = g.set_of(&a.z)?;
    if is_separated(&g, &x, &y, &z)? {
        writeln!(out, "separated")?;
        Ok(())
    } else {
        writeln!(out, "connected")?;
        out.flush()?;
        Err(Failure::Negative)
    }
}

fn write_output(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Outcome {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Input(format!("cannot write {}: {e}", p.display()))),
        None => Ok(out.write_all(text.as_bytes())?),
    }
}

fn render_graph(g: &CausalGraph, order: Option<&VariableOrder>, format: Format) -> String {
    match format {
        Format::Text => write_graph_text(g, order),
        Format::Json => write_graph_json(g, order) + "\n",
    }
}

fn project(a: ProjectArgs, out: &mut dyn Write) -> Outcome {
    let g = read_graph_file(&a.graph.graph)?.graph;
    let projected = match (a.latent_percent, a.seed) {
        (Some(u), Some(seed)) => project_latents_fraction(&g, u, seed)?,
        _ => latent_project(&g)?,
    };
    write_output(a.output.as_deref(), &render_graph(&projected, None, a.format), out)
}

fn randgen(a: RandgenArgs, out: &mut dyn Write) -> Outcome {
    let g = match (a.pd, a.md) {
        (Some(pd), None) => random_graph(&RandomGraphSpec::new(a.n, pd, a.pb, a.seed)?)?,
        (None, Some(md)) => cilist_core::randgen::random_graph_fixed_md(a.n, md, a.pb, a.seed)?,
        _ => unreachable!("clap enforces exactly one density flag"),
    };
    write_output(a.output.as_deref(), &render_graph(&g, None, a.format), out)
}

fn bench(a: BenchArgs, out: &mut dyn Write) -> Outcome {
    let text =
        fs::read_to_string(&a.grid).map_err(|e| Failure::Input(format!("cannot read {}: {e}", a.grid.display())))?;
    let mut cfg = BenchConfig::from_json(&text)?;
    if a.threads.is_some() {
        cfg.threads = a.threads;
    }
    let records = bench_sweep(&cfg)?;
    let timed_out = records.iter().filter(|r| r.timed_out).count();
    if timed_out > 0 {
        eprintln!("note: {timed_out} of {} runs hit the {} s timeout", records.len(), cfg.timeout_secs);
    }
    let mut buf = Vec::new();
    write_csv(&mut buf, &records)?;
    write_output(a.output.as_deref(), &String::from_utf8_lossy(&buf), out)
}

fn citest(a: CitestArgs, out: &mut dyn Write) -> Outcome {
    let Loaded { graph: g, order } = load(&a.graph.graph, &a.order)?;
    let mut hints = HashMap::new();
    for c in &a.continuous {
        hints.insert(c.clone(), ColumnKind::Continuous);
    }
    for c in &a.categorical {
        if hints.insert(c.clone(), ColumnKind::Categorical).is_some() {
            return Err(Failure::Input(format!("column `{c}` forced both continuous and categorical")));
        }
    }
    let data = load_csv(&a.data, &hints)?;
    if data.dropped_rows() > 0 {
        eprintln!("note: dropped {} row(s) with missing values", data.dropped_rows());
    }
    let report = test_model(&g, &order, &data, a.alpha)?;
    match a.format {
        Format::Text => write!(out, "{}", report.render_text(&g))?,
        Format::Json => {
            writeln!(out, "{}", serde_json::to_string_pretty(&report.to_json(&g)).expect("report serializes"))?
        }
    }
    if report.errors() > 0 {
        eprintln!("note: {} statement(s) could not be tested", report.errors());
    }
    if report.violations() > 0 {
        out.flush()?;
        return Err(Failure::Negative);
    }
    Ok(())
}

fn verify(a: VerifyArgs, out: &mut dyn Write) -> Outcome {
    let Loaded { graph: g, order } = load(&a.graph.graph, &a.order)?;
    if g.node_count() > DEFAULT_ACS_CAP {
        return Err(Failure::Cap(format!("verify: {} nodes exceeds the cap of {DEFAULT_ACS_CAP}", g.node_count())));
    }
    let checks = baselines::oracle::verify(&g, &order)?;
    for c in &checks {
        if c.passed {
            writeln!(out, "PASS {}", c.name)?;
        } else {
            writeln!(out, "FAIL {}: {}", c.name, c.detail)?;
        }
    }
    if checks.iter().all(|c| c.passed) {
        Ok(())
    } else {
        out.flush()?;
        Err(Failure::Negative)
    }
}
