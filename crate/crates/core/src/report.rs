//! Line-oriented `key=value` run reports.

use std::fmt::Write;

use crate::exhaustion::{ExhaustionReport, LevelRecord};
use crate::graph::WeightedGraph;
use crate::io::format_float as num;
use crate::spaces::FuzzSummary;
use crate::yamabe::{GeometryReport, YamabeReport};

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".to_string(), num)
}

fn list(ks: &[usize]) -> String {
    ks.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(",")
}

pub fn level_line(l: &LevelRecord) -> String {
    let mut s = format!(
        "level k={} lambda={} norm_sq={} residual={} gap={} u_min={} u_max={} doubling_lhs={} doubling_rhs={} doubling={} bracket={} iterations={} ball_size={}",
        l.k,
        num(l.energy),
        num(l.norm_sq),
        num(l.residual),
        opt(l.gap),
        num(l.u_min),
        num(l.u_max),
        num(l.doubling.lhs),
        num(l.doubling.rhs),
        l.doubling.holds,
        l.bracket_holds(),
        l.iterations,
        l.ball_size,
    );
    if let Some(g) = l.gamma {
        write!(s, " gamma={}", num(g)).unwrap();
    }
    if let Some(d) = l.nehari_defect {
        write!(s, " nehari_defect={}", num(d)).unwrap();
    }
    if let Some(p) = l.positive {
        write!(s, " positive={p}").unwrap();
    }
    s
}

/// The full exhaustion report, ending with the summary line.
pub fn exhaustion_report(graph: &WeightedGraph, r: &ExhaustionReport) -> String {
    let mut out = String::new();
    writeln!(out, "equation={}", r.equation).unwrap();
    writeln!(out, "origin={}", graph.id(r.origin)).unwrap();
    writeln!(out, "witness_radius={}", r.witness_radius).unwrap();
    writeln!(out, "finite_graph_mode={}", r.finite_graph_mode).unwrap();
    for l in &r.levels {
        writeln!(out, "{}", level_line(l)).unwrap();
    }
    writeln!(out, "nonmonotone_gaps={}", list(&r.nonmonotone_gaps)).unwrap();
    writeln!(out, "energy_increases={}", list(&r.energy_increases)).unwrap();
    if let Some(g) = &r.gamma {
        writeln!(
            out,
            "gamma_final={} gamma_integral={} gamma_defect={}",
            num(g.gamma_final),
            num(g.integral),
            num(g.defect)
        )
        .unwrap();
        for (l, tail) in &g.tails {
            writeln!(out, "g_tail ell={l} mass={}", num(*tail)).unwrap();
        }
    }
    writeln!(out, "cauchy_gap={}", num(r.cauchy_gap)).unwrap();
    writeln!(out, "global_residual={}", num(r.global_residual)).unwrap();
    writeln!(out, "{}", r.summary_line()).unwrap();
    out
}

pub fn geometry_lines(g: &GeometryReport) -> String {
    format!(
        "h1 j_zero={} holds={}\nh2 delta={} sphere_min={} samples={} holds={}\nh3 t={} energy={} norm={} holds={}\n",
        num(g.j_zero),
        g.h1(),
        num(g.delta),
        num(g.sphere_min),
        g.samples,
        g.h2(),
        opt(g.escape_t),
        num(g.escape_energy),
        num(g.escape_norm),
        g.h3(),
    )
}

pub fn yamabe_report(r: &YamabeReport) -> String {
    format!(
        "energy={}\nnehari_defect={}\nresidual={}\ndelta={}\nbracket_lo={}\nbracket_hi={}\n",
        num(r.energy),
        num(r.nehari_defect),
        num(r.residual),
        num(r.delta),
        num(r.mp_level_bracket.0),
        num(r.mp_level_bracket.1),
    )
}

pub fn fuzz_report(s: &FuzzSummary) -> String {
    let mut out = format!("samples={}\n", s.samples);
    for (name, (pass, fail)) in &s.counts {
        writeln!(out, "check name={name} pass={pass} fail={fail}").unwrap();
    }
    if let Some((sample, c)) = &s.first_failure {
        writeln!(
            out,
            "first_failure sample={sample} name={} lhs={} rhs={}",
            c.name,
            num(c.lhs),
            num(c.rhs)
        )
        .unwrap();
    }
    writeln!(out, "{}", if s.all_pass() { "ALL_PASS" } else { "FAILURES" }).unwrap();
    out
}
