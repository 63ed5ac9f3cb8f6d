use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use subcover::asymptotics::{band_edge_asymptotic, competing_extrema, AsymptoticConfig, AsymptoticEstimate};
use subcover::floquet::{band_functions, floquet_matrix, sample_dispersion, HERMITIAN_TOL};
use subcover::graph::{connectivity_check, quotient_general, quotient_primitive, FundamentalGraph, GraphFile};
use subcover::intlat::{complete_to_basis, is_primitive_set, saturation, IntMatrix};
use subcover::iso::{isospectral_verdict, IsoVerdict};
use subcover::spectrum::{
    band_edges, band_edges_seeded, inclusion_check, spectrum_set, subcovering_band_edges_seeded, BandEdge,
    EdgeConfig, SpectrumSet,
};
use subcover::ChiralMatrix;

use crate::input::{parse_chiral, parse_graph_file, parse_k0, parse_level_sets_file};
use crate::output::{csv_row, json, point, sig17, union};
use crate::{CliError, Command, Format, RunConfig, EXIT_NEGATIVE, EXIT_OK};

type Out<'a> = &'a mut dyn Write;

/// Tolerance for the inclusion of subcovering spectra in the base spectrum.
const INCLUSION_TOL: f64 = 1e-6;
/// Edges closer than this count as numerically coincident.
const NUMERIC_COINCIDENCE_TOL: f64 = 1e-6;
/// Other grid clusters within this of the edge value break uniqueness.
const UNIQUENESS_TOL: f64 = 1e-6;

pub fn dispatch(cmd: &Command, cfg: &RunConfig, out: Out, err: Out) -> Result<i32, CliError> {
    match cmd {
        Command::CheckPrimitive { chiral } => check_primitive(&chiral_arg(chiral)?, cfg, out),
        Command::Complete { chiral } => complete(&chiral_arg(chiral)?, cfg, out),
        Command::Bands { graph } => bands(&parse_graph_file(graph)?, cfg, out),
        Command::Edges { graph } => edges(&parse_graph_file(graph)?, cfg, out),
        Command::SubEdges { graph, chiral } => sub_edges(&parse_graph_file(graph)?, &chiral_arg(chiral)?, cfg, out),
        Command::Quotient { graph, chiral, out: path } => {
            quotient(&parse_graph_file(graph)?, &chiral_arg(chiral)?, path, cfg, out, err)
        }
        Command::Asymptotics { graph, chiral, band, side, k0, numeric } => {
            let g = parse_graph_file(graph)?;
            let t = chiral_arg(chiral)?;
            let k0 = parse_k0(k0).map_err(|e| CliError::Usage(format!("--k0: {e}")))?;
            let acfg = AsymptoticConfig { step: cfg.step, richardson: true };
            let est = band_edge_asymptotic(&g, *band, *side, &k0, &t, &acfg)?;
            let competing = competing_clusters(&g, &est, cfg)?;
            if !competing.is_empty() {
                let pts: Vec<String> = competing.iter().map(|p| point(p)).collect();
                writeln!(
                    err,
                    "warning: band {} {} edge is also attained within {UNIQUENESS_TOL:e} at {}; \
                     the estimate assumes a unique extremum up to sign",
                    est.band,
                    est.side.as_str(),
                    pts.join(" ")
                )?;
            }
            let numeric = if *numeric { Some(numeric_edge(&g, &t, &est, cfg)?) } else { None };
            asymptotics(&est, numeric, &competing, cfg, out)
        }
        Command::Isospectral { graph, chiral, level_sets, numeric } => {
            let g = parse_graph_file(graph)?;
            let t = chiral_arg(chiral)?;
            isospectral(&g, &t, level_sets, *numeric, cfg, out)
        }
        Command::ExportDispersion { graph, out: path } => export_dispersion(&parse_graph_file(graph)?, path, cfg, out),
        Command::PropertyCheck { graph, samples } => property_check(&parse_graph_file(graph)?, *samples, cfg, out),
    }
}

fn chiral_arg(s: &str) -> Result<ChiralMatrix, CliError> {
    parse_chiral(s).map_err(|e| CliError::Usage(format!("chiral matrix {s:?}: {e}")))
}

fn check_dims(g: &FundamentalGraph, t: &ChiralMatrix) -> Result<(), CliError> {
    if t.dim() != g.dim() {
        return Err(CliError::Usage(format!(
            "chiral matrix has {} columns but the graph is {}-dimensional",
            t.dim(),
            g.dim()
        )));
    }
    Ok(())
}

fn rows_of(m: &IntMatrix) -> String {
    m.to_string()
}

#[derive(Serialize)]
struct PrimitiveReport {
    chiral: String,
    primitive: bool,
    index: u128,
}

fn check_primitive(t: &ChiralMatrix, cfg: &RunConfig, out: Out) -> Result<i32, CliError> {
    let primitive = is_primitive_set(t)?;
    let index = saturation(t)?.index;
    let r = PrimitiveReport { chiral: t.to_string(), primitive, index };
    match cfg.format {
        Format::Text => writeln!(out, "primitive: {primitive}\nindex: {index}")?,
        Format::Csv => {
            csv_row(out, &["chiral".into(), "primitive".into(), "index".into()])?;
            csv_row(out, &[format!("\"{}\"", r.chiral), primitive.to_string(), index.to_string()])?;
        }
        Format::Json => json(out, &r)?,
    }
    Ok(if primitive { EXIT_OK } else { EXIT_NEGATIVE })
}

#[derive(Serialize)]
struct CompletionReport {
    chiral: Vec<Vec<i64>>,
    matrix: Vec<Vec<i64>>,
    inverse: Vec<Vec<i64>>,
    determinant: i128,
}

fn complete(t: &ChiralMatrix, cfg: &RunConfig, out: Out) -> Result<i32, CliError> {
    let c = complete_to_basis(t)?;
    match cfg.format {
        Format::Text => {
            writeln!(out, "completion: {}", rows_of(c.matrix()))?;
            writeln!(out, "inverse: {}", rows_of(c.inverse()))?;
            writeln!(out, "determinant: {}", c.determinant())?;
        }
        Format::Csv => {
            let d = t.dim();
            let mut header = vec!["matrix".to_string(), "row".to_string()];
            header.extend((1..=d).map(|j| format!("c{j}")));
            csv_row(out, &header)?;
            for (name, m) in [("completion", c.matrix()), ("inverse", c.inverse())] {
                for (i, row) in m.to_rows().iter().enumerate() {
                    let mut f = vec![name.to_string(), (i + 1).to_string()];
                    f.extend(row.iter().map(|x| x.to_string()));
                    csv_row(out, &f)?;
                }
            }
        }
        Format::Json => json(
            out,
            &CompletionReport {
                chiral: t.to_rows(),
                matrix: c.matrix().to_rows(),
                inverse: c.inverse().to_rows(),
                determinant: c.determinant(),
            },
        )?,
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct BandRange {
    band: usize,
    lower: f64,
    upper: f64,
}

fn ranges(edges: &[BandEdge]) -> Vec<BandRange> {
    edges.iter().map(|e| BandRange { band: e.band, lower: e.lo(), upper: e.hi() }).collect()
}

#[derive(Serialize)]
struct SpectrumReport<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    chiral: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    index: Option<u128>,
    bands: Vec<BandRange>,
    spectrum: &'a SpectrumSet,
    gaps: Vec<(f64, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    inclusion: Option<bool>,
}

fn write_spectrum(r: &SpectrumReport, cfg: &RunConfig, out: Out) -> Result<(), CliError> {
    match cfg.format {
        Format::Text => {
            if let Some(c) = &r.chiral {
                writeln!(out, "chiral: {c}")?;
            }
            if let Some(i) = r.index {
                writeln!(out, "index: {i}")?;
            }
            for b in &r.bands {
                writeln!(out, "band {}: [{}, {}]", b.band, b.lower, b.upper)?;
            }
            writeln!(out, "spectrum: {}", union(&r.spectrum.intervals))?;
            for f in &r.spectrum.flat_bands {
                writeln!(out, "flat band {}: {}", f.band, f.value)?;
            }
            writeln!(out, "gaps: {}", if r.gaps.is_empty() { "none".into() } else { union(&r.gaps) })?;
            if let Some(incl) = r.inclusion {
                writeln!(out, "inclusion: {incl}")?;
            }
        }
        Format::Csv => {
            csv_row(out, &["band".into(), "lower".into(), "upper".into()])?;
            for b in &r.bands {
                csv_row(out, &[b.band.to_string(), sig17(b.lower), sig17(b.upper)])?;
            }
        }
        Format::Json => json(out, r)?,
    }
    Ok(())
}

fn bands(g: &FundamentalGraph, cfg: &RunConfig, out: Out) -> Result<i32, CliError> {
    cfg.counts(g.dim())?;
    let edges = band_edges(g, &cfg.edge_config())?;
    let set = spectrum_set(&edges, cfg.flat_tol);
    let r = SpectrumReport {
        chiral: None,
        index: None,
        bands: ranges(&edges),
        gaps: set.gaps(),
        spectrum: &set,
        inclusion: None,
    };
    write_spectrum(&r, cfg, out)?;
    Ok(EXIT_OK)
}

fn edges(g: &FundamentalGraph, cfg: &RunConfig, out: Out) -> Result<i32, CliError> {
    cfg.counts(g.dim())?;
    let edges = band_edges(g, &cfg.edge_config())?;
    match cfg.format {
        Format::Text => {
            for e in &edges {
                for side in [subcover::spectrum::Side::Lower, subcover::spectrum::Side::Upper] {
                    let x = e.side(side);
                    let pts: Vec<String> = x.points.iter().map(|p| point(p)).collect();
                    writeln!(
                        out,
                        "band {} {}: {} at {}{}",
                        e.band,
                        side.as_str(),
                        x.value,
                        pts.join(" "),
                        if x.non_isolated { " (non-isolated)" } else { "" }
                    )?;
                }
            }
        }
        Format::Csv => {
            let mut header: Vec<String> =
                ["band", "side", "value", "residual", "non_isolated"].iter().map(|s| s.to_string()).collect();
            header.extend((1..=g.dim()).map(|j| format!("k_{j}")));
            csv_row(out, &header)?;
            for e in &edges {
                for side in [subcover::spectrum::Side::Lower, subcover::spectrum::Side::Upper] {
                    let x = e.side(side);
                    for p in &x.points {
                        let mut f = vec![
                            e.band.to_string(),
                            side.as_str().to_string(),
                            sig17(x.value),
                            sig17(x.residual),
                            x.non_isolated.to_string(),
                        ];
                        f.extend(p.iter().map(|&v| sig17(v)));
                        csv_row(out, &f)?;
                    }
                }
            }
        }
        Format::Json => json(out, &edges)?,
    }
    Ok(EXIT_OK)
}

/// Edge config for a zone of dimension `dim`, falling back to the largest
/// requested count when the per-axis list does not fit.
fn zone_config(cfg: &RunConfig, dim: usize) -> EdgeConfig {
    let mut ec = cfg.edge_config();
    if ec.grid.len() != 1 && ec.grid.len() != dim {
        ec.grid = vec![*ec.grid.iter().max().unwrap()];
    }
    ec
}

/// Extremal points of the base operator, used to seed subcovering searches.
fn base_seeds(edges: &[BandEdge]) -> Vec<Vec<f64>> {
    let mut seeds: Vec<Vec<f64>> = Vec::new();
    for e in edges {
        for p in e.lower.points.iter().chain(&e.upper.points) {
            if !seeds.contains(p) {
                seeds.push(p.clone());
            }
        }
    }
    seeds
}

fn subcovering_edges(
    g: &FundamentalGraph,
    t: &ChiralMatrix,
    base: &[BandEdge],
    cfg: &RunConfig,
) -> Result<(Vec<BandEdge>, u128), CliError> {
    let sat = saturation(t)?;
    let rdim = t.dim() - t.count();
    if sat.index == 1 {
        let view = quotient_primitive(g, t)?;
        let edges = subcovering_band_edges_seeded(&view, &zone_config(cfg, rdim), &base_seeds(base))?;
        Ok((edges, 1))
    } else {
        let q = quotient_general(g, t)?;
        let edges = band_edges_seeded(&q, &zone_config(cfg, rdim), &[vec![0.0; rdim]])?;
        Ok((edges, sat.index))
    }
}

fn sub_edges(g: &FundamentalGraph, t: &ChiralMatrix, cfg: &RunConfig, out: Out) -> Result<i32, CliError> {
    check_dims(g, t)?;
    let base = band_edges(g, &zone_config(cfg, g.dim()))?;
    let (edges, index) = subcovering_edges(g, t, &base, cfg)?;
    let set = spectrum_set(&edges, cfg.flat_tol);
    let full = spectrum_set(&base, cfg.flat_tol);
    let incl = inclusion_check(&set, &full, INCLUSION_TOL);
    let r = SpectrumReport {
        chiral: Some(t.to_string()),
        index: Some(index),
        bands: ranges(&edges),
        gaps: set.gaps(),
        spectrum: &set,
        inclusion: Some(incl.holds),
    };
    write_spectrum(&r, cfg, out)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct QuotientReport {
    path: String,
    vertices: usize,
    edges: usize,
    dimension: usize,
    index: u128,
    connected: bool,
}

fn quotient(
    g: &FundamentalGraph,
    t: &ChiralMatrix,
    path: &Path,
    cfg: &RunConfig,
    out: Out,
    err: Out,
) -> Result<i32, CliError> {
    check_dims(g, t)?;
    let q = quotient_general(g, t)?;
    let connected = connectivity_check(&q).is_connected();
    if !connected {
        writeln!(err, "warning: the subcovering graph is disconnected")?;
    }
    let mut text = serde_json::to_string_pretty(&GraphFile::from_graph(&q)).expect("graph serializes");
    text.push('\n');
    std::fs::write(path, text)?;
    let r = QuotientReport {
        path: path.display().to_string(),
        vertices: q.order(),
        edges: q.edges().len(),
        dimension: q.dim(),
        index: saturation(t)?.index,
        connected,
    };
    match cfg.format {
        Format::Text => writeln!(
            out,
            "wrote {}: {} vertices, {} edges, dimension {}, index {}",
            r.path, r.vertices, r.edges, r.dimension, r.index
        )?,
        Format::Csv => {
            csv_row(out, &["path", "vertices", "edges", "dimension", "index", "connected"].map(String::from))?;
            csv_row(
                out,
                &[
                    r.path.clone(),
                    r.vertices.to_string(),
                    r.edges.to_string(),
                    r.dimension.to_string(),
                    r.index.to_string(),
                    connected.to_string(),
                ],
            )?;
        }
        Format::Json => json(out, &r)?,
    }
    Ok(EXIT_OK)
}

/// Grid clusters other than `±k_o` attaining the same base edge within
/// [`UNIQUENESS_TOL`]; uniqueness itself cannot be certified.
fn competing_clusters(g: &FundamentalGraph, est: &AsymptoticEstimate, cfg: &RunConfig) -> Result<Vec<Vec<f64>>, CliError> {
    let mut ec = zone_config(cfg, g.dim());
    ec.tie_value = UNIQUENESS_TOL;
    let edges = band_edges_seeded(g, &ec, std::slice::from_ref(&est.k_o))?;
    let x = edges[est.band - 1].side(est.side);
    Ok(competing_extrema(&x.points, &est.k_o, ec.tie_radius))
}

/// Numerically computed subcovering edge for the band and side of `est`.
fn numeric_edge(
    g: &FundamentalGraph,
    t: &ChiralMatrix,
    est: &AsymptoticEstimate,
    cfg: &RunConfig,
) -> Result<f64, CliError> {
    let view = quotient_primitive(g, t)?;
    let rdim = t.dim() - t.count();
    let edges = subcovering_band_edges_seeded(&view, &zone_config(cfg, rdim), std::slice::from_ref(&est.k_o))?;
    Ok(edges[est.band - 1].side(est.side).value)
}

#[derive(Serialize)]
struct AsymptoticReport<'a> {
    #[serde(flatten)]
    estimate: &'a AsymptoticEstimate,
    #[serde(skip_serializing_if = "Option::is_none")]
    numeric: Option<f64>,
    competing: &'a [Vec<f64>],
}

fn asymptotics(
    est: &AsymptoticEstimate,
    numeric: Option<f64>,
    competing: &[Vec<f64>],
    cfg: &RunConfig,
    out: Out,
) -> Result<i32, CliError> {
    match cfg.format {
        Format::Text => {
            writeln!(out, "band: {} {}", est.band, est.side.as_str())?;
            if let Some(k) = &est.k_o_exact {
                writeln!(out, "k0: π·({k})")?;
            }
            writeln!(out, "edge: {}", est.edge)?;
            writeln!(out, "x0: {}", point(&est.x_o))?;
            writeln!(out, "correction: {}", est.correction)?;
            writeln!(out, "predicted: {}", est.predicted)?;
            writeln!(out, "tau: {}", est.tau)?;
            writeln!(out, "remainder: O(tau^-{})", est.remainder_order)?;
            if let Some(n) = numeric {
                writeln!(out, "numeric: {n}")?;
                writeln!(out, "difference: {}", n - est.predicted)?;
            }
        }
        Format::Csv => {
            let mut header: Vec<String> =
                ["band", "side", "edge", "correction", "predicted", "tau", "remainder_order"].map(String::from).to_vec();
            let mut row = vec![
                est.band.to_string(),
                est.side.as_str().to_string(),
                sig17(est.edge),
                sig17(est.correction),
                sig17(est.predicted),
                sig17(est.tau),
                est.remainder_order.to_string(),
            ];
            if let Some(n) = numeric {
                header.push("numeric".into());
                row.push(sig17(n));
            }
            csv_row(out, &header)?;
            csv_row(out, &row)?;
        }
        Format::Json => json(out, &AsymptoticReport { estimate: est, numeric, competing })?,
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct NumericCoincidence {
    band: usize,
    side: &'static str,
    base: f64,
    subcovering: f64,
    difference: f64,
    coincides: bool,
}

#[derive(Serialize)]
struct IsoReport<'a> {
    #[serde(flatten)]
    verdict: &'a IsoVerdict,
    numeric: &'a [NumericCoincidence],
}

/// Numeric edge comparison for every edge in the verdict; reported next to,
/// never instead of, the exact answer.
fn numeric_coincidence(
    g: &FundamentalGraph,
    t: &ChiralMatrix,
    v: &IsoVerdict,
    cfg: &RunConfig,
) -> Result<Vec<NumericCoincidence>, CliError> {
    let base = band_edges(g, &zone_config(cfg, g.dim()))?;
    let (sub, _) = subcovering_edges(g, t, &base, cfg)?;
    Ok(v.edges
        .iter()
        .filter(|e| e.band >= 1 && e.band <= base.len())
        .map(|e| {
            let b = base[e.band - 1].side(e.side).value;
            let s = sub[e.band - 1].side(e.side).value;
            NumericCoincidence {
                band: e.band,
                side: e.side.as_str(),
                base: b,
                subcovering: s,
                difference: (s - b).abs(),
                coincides: (s - b).abs() < NUMERIC_COINCIDENCE_TOL,
            }
        })
        .collect())
}

fn isospectral(
    g: &FundamentalGraph,
    t: &ChiralMatrix,
    path: &Path,
    numeric: bool,
    cfg: &RunConfig,
    out: Out,
) -> Result<i32, CliError> {
    check_dims(g, t)?;
    let sets = parse_level_sets_file(path)?;
    for s in &sets.sets {
        if s.band == 0 || s.band > g.order() {
            return Err(CliError::Usage(format!("level set for band {} but the graph has {} bands", s.band, g.order())));
        }
        if let Some(p) = s.points.iter().find(|p| p.dim() != g.dim()) {
            return Err(CliError::Usage(format!("level-set point {p} has the wrong dimension")));
        }
    }
    let v: IsoVerdict = isospectral_verdict(&sets, t)?;
    let checks = if numeric { numeric_coincidence(g, t, &v, cfg)? } else { Vec::new() };
    match cfg.format {
        Format::Text => {
            writeln!(out, "isospectral: {}", v.isospectral)?;
            for e in &v.edges {
                match &e.witness {
                    Some(w) => writeln!(out, "band {} {}: coincides at π·({w})", e.band, e.side.as_str())?,
                    None => writeln!(out, "band {} {}: shifted", e.band, e.side.as_str())?,
                }
            }
            if !v.isospectral && !v.complete {
                writeln!(out, "note: level sets are not marked complete; the negative verdict is not conclusive")?;
            }
            for c in &checks {
                writeln!(
                    out,
                    "numeric band {} {}: base {} subcovering {} difference {:e} ({})",
                    c.band,
                    c.side,
                    c.base,
                    c.subcovering,
                    c.difference,
                    if c.coincides { "coincides" } else { "differs" }
                )?;
            }
        }
        Format::Csv => {
            let mut header = ["band", "side", "coincides", "witness"].map(String::from).to_vec();
            if numeric {
                header.extend(["base", "subcovering", "numeric_coincides"].map(String::from));
            }
            csv_row(out, &header)?;
            for e in &v.edges {
                let w = e.witness.as_ref().map(|w| format!("\"{w}\"")).unwrap_or_default();
                let mut row = vec![e.band.to_string(), e.side.as_str().into(), e.coincides.to_string(), w];
                if let Some(c) = checks.iter().find(|c| c.band == e.band && c.side == e.side.as_str()) {
                    row.extend([sig17(c.base), sig17(c.subcovering), c.coincides.to_string()]);
                }
                csv_row(out, &row)?;
            }
        }
        Format::Json if numeric => json(out, &IsoReport { verdict: &v, numeric: &checks })?,
        Format::Json => json(out, &v)?,
    }
    Ok(if v.isospectral { EXIT_OK } else { EXIT_NEGATIVE })
}

fn export_dispersion(g: &FundamentalGraph, path: &Path, cfg: &RunConfig, out: Out) -> Result<i32, CliError> {
    let counts = cfg.counts(g.dim())?;
    let sample = sample_dispersion(g, &counts)?;
    let mut text = String::new();
    let mut header: Vec<String> = (1..=g.dim()).map(|j| format!("k_{j}")).collect();
    header.extend((1..=g.order()).map(|j| format!("lambda_{j}")));
    text.push_str(&header.join(","));
    text.push('\n');
    for (k, v) in sample.grid.iter().zip(&sample.values) {
        let row: Vec<String> = k.iter().chain(v).map(|&x| sig17(x)).collect();
        text.push_str(&row.join(","));
        text.push('\n');
    }
    std::fs::write(path, text)?;
    match cfg.format {
        Format::Json => json(out, &serde_json::json!({ "path": path.display().to_string(), "rows": sample.grid.len() }))?,
        _ => writeln!(out, "wrote {} rows to {}", sample.grid.len(), path.display())?,
    }
    Ok(EXIT_OK)
}

#[derive(Serialize, Default)]
struct PropertyReport {
    samples: usize,
    seed: u64,
    hermiticity: usize,
    periodicity: usize,
    evenness: usize,
    trace: usize,
}

impl PropertyReport {
    fn failures(&self) -> usize {
        self.hermiticity + self.periodicity + self.evenness + self.trace
    }
}

fn property_check(g: &FundamentalGraph, samples: usize, cfg: &RunConfig, out: Out) -> Result<i32, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut r = PropertyReport { samples, seed: cfg.seed, ..Default::default() };
    let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-10);
    for _ in 0..samples {
        let k: Vec<f64> = (0..g.dim()).map(|_| rng.gen_range(-PI..PI)).collect();
        let h = floquet_matrix(g, &k)?;
        let scale = h.entries().iter().fold(1.0f64, |m, z| m.max(z.norm()));
        r.hermiticity += usize::from(h.hermitian_deviation() > HERMITIAN_TOL * scale);
        let ev = band_functions(g, &k)?;
        let shifted: Vec<f64> = k.iter().map(|x| x + 2.0 * PI * rng.gen_range(-3..=3) as f64).collect();
        r.periodicity += usize::from(!close(&ev, &band_functions(g, &shifted)?));
        let neg: Vec<f64> = k.iter().map(|x| -x).collect();
        r.evenness += usize::from(!close(&ev, &band_functions(g, &neg)?));
        r.trace += usize::from((ev.iter().sum::<f64>() - h.trace()).abs() > 1e-10 * scale);
    }
    match cfg.format {
        Format::Text => {
            writeln!(out, "samples: {} (seed {})", r.samples, r.seed)?;
            for (name, n) in
                [("hermiticity", r.hermiticity), ("periodicity", r.periodicity), ("evenness", r.evenness), ("trace", r.trace)]
            {
                writeln!(out, "{name}: {}", if n == 0 { "ok".to_string() } else { format!("{n} failures") })?;
            }
        }
        Format::Csv => {
            csv_row(out, &["property", "failures"].map(String::from))?;
            for (name, n) in
                [("hermiticity", r.hermiticity), ("periodicity", r.periodicity), ("evenness", r.evenness), ("trace", r.trace)]
            {
                csv_row(out, &[name.to_string(), n.to_string()])?;
            }
        }
        Format::Json => json(out, &r)?,
    }
    Ok(if r.failures() == 0 { EXIT_OK } else { EXIT_NEGATIVE })
}
