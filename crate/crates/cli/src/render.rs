//! Text and CSV renderings of the core report types.  Vertices print as
//! bitstrings throughout.

use std::fmt::Write;

use hcf_core::conjectures::{
    Conjecture, ConjectureReport, RatioParts, SearchWitness, TheoremSweep,
};
use hcf_core::hypercube::Vertex;
use hcf_core::lr_routing::{DoubleLRSolution, LRSolution};
use hcf_core::Rational;

/// Up to 12 significant digits, trailing zeros trimmed.
pub fn float(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let decimals = (11 - x.abs().log10().floor() as i64).max(0) as usize;
    let full = format!("{x:.decimals$}");
    full.trim_end_matches('0').trim_end_matches('.').to_string()
}

pub fn ratio(p: RatioParts) -> String {
    Rational::from(p).to_string()
}

pub fn opt_ratio(p: Option<RatioParts>) -> String {
    p.map_or_else(|| "none".to_string(), ratio)
}

pub fn conjecture_name(c: Conjecture) -> &'static str {
    match c {
        Conjecture::Glr => "glr",
        Conjecture::Rout => "rout",
    }
}

fn path_line(path: &[Vertex]) -> String {
    path.iter().map(Vertex::to_string).collect::<Vec<_>>().join(" -> ")
}

fn spaced(vs: &[Vertex]) -> String {
    vs.iter().map(Vertex::to_string).collect::<Vec<_>>().join(" ")
}

fn vertex_set(vs: &[Vertex]) -> String {
    format!("{{{}}}", vs.iter().map(Vertex::to_string).collect::<Vec<_>>().join(", "))
}

pub fn witness(w: &SearchWitness) -> String {
    match w {
        SearchWitness::Glr(pair) => {
            let phi: Vec<String> =
                pair.pairs().iter().map(|(s, t)| format!("{s} -> {t}")).collect();
            format!("d={} phi=[{}]", pair.d().get(), phi.join(", "))
        }
        SearchWitness::Rout { d, set } => format!("d={d} S={}", vertex_set(set)),
    }
}

pub fn solution_text(sol: &LRSolution) -> String {
    let mut out = String::new();
    for path in sol.paths() {
        out.push_str(&path_line(path));
        out.push('\n');
    }
    out
}

pub fn solution_csv(sol: &LRSolution) -> String {
    let mut out = String::from("path,vertices\n");
    for (i, path) in sol.paths().iter().enumerate() {
        writeln!(out, "{i},{}", spaced(path)).unwrap();
    }
    out
}

pub fn double_text(sol: &DoubleLRSolution) -> String {
    format!(
        "collection 1:\n{}collection 2:\n{}",
        solution_text(sol.first()),
        solution_text(sol.second())
    )
}

pub fn double_csv(sol: &DoubleLRSolution) -> String {
    let mut out = String::from("collection,path,vertices\n");
    for (c, collection) in [sol.first(), sol.second()].into_iter().enumerate() {
        for (i, path) in collection.paths().iter().enumerate() {
            writeln!(out, "{},{i},{}", c + 1, spaced(path)).unwrap();
        }
    }
    out
}

pub fn report_text(r: &ConjectureReport) -> String {
    let mut out = String::new();
    writeln!(out, "conjecture: {}", conjecture_name(r.conjecture)).unwrap();
    writeln!(out, "seed: {}", r.seed).unwrap();
    writeln!(out, "instances: {}", r.instances).unwrap();
    writeln!(out, "min ratio: {}", opt_ratio(r.min_ratio)).unwrap();
    match &r.witness {
        Some(w) => writeln!(out, "witness: {}", witness(w)).unwrap(),
        None => writeln!(out, "witness: none").unwrap(),
    }
    writeln!(out, "failures: {}", r.failures.len()).unwrap();
    for failure in &r.failures {
        writeln!(out, "failure: {}: {}", witness(&failure.instance), failure.reason).unwrap();
    }
    out
}

pub fn sweep_text(s: &TheoremSweep) -> String {
    let mut out = String::new();
    writeln!(out, "d: {}", s.d).unwrap();
    writeln!(out, "mode: {}", s.mode).unwrap();
    writeln!(out, "seed: {}", s.seed).unwrap();
    writeln!(out, "instances: {}", s.instances).unwrap();
    writeln!(out, "flowpoin failures: {}", s.flowpoin_failures).unwrap();
    writeln!(out, "cspoin failures: {}", s.cspoin_failures).unwrap();
    writeln!(out, "cslr failures: {}", s.cslr_failures).unwrap();
    writeln!(out, "sachdeva failures: {}", s.sachdeva_failures).unwrap();
    writeln!(out, "min cslr empirical: {}", opt_ratio(s.min_cslr_empirical)).unwrap();
    match &s.min_cslr_witness {
        Some(w) => writeln!(out, "min cslr witness: {}", witness(w)).unwrap(),
        None => writeln!(out, "min cslr witness: none").unwrap(),
    }
    writeln!(out, "all pass: {}", if s.all_pass() { "yes" } else { "no" }).unwrap();
    for failure in &s.failures {
        writeln!(out, "failure: {}: {}", witness(&failure.instance), failure.reason).unwrap();
    }
    out
}

pub fn sweep_csv(s: &TheoremSweep) -> String {
    let (num, den) = match s.min_cslr_empirical {
        Some(p) => (p.num.to_string(), p.den.to_string()),
        None => (String::new(), String::new()),
    };
    format!(
        "d,mode,seed,instances,flowpoin_failures,cspoin_failures,cslr_failures,\
         sachdeva_failures,min_cslr_num,min_cslr_den,failures\n\
         {},{},{},{},{},{},{},{},{},{},{}\n",
        s.d,
        s.mode,
        s.seed,
        s.instances,
        s.flowpoin_failures,
        s.cspoin_failures,
        s.cslr_failures,
        s.sachdeva_failures,
        num,
        den,
        s.failures.len()
    )
}
