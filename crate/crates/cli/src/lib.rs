//! Command layer behind the `permbox` binary: parses an expression, runs one
//! analysis verb and renders the result as JSON or DOT.

pub mod parse;

use permbox::decompose::{self, Caps, ClassifyInput, GroupExpr, PrimitivityReport, SdChain};
use permbox::graph::{self, EndsParams, EndsVerdict, GammaGraph, Graph};
use permbox::products::{self, CartesianDecomposition};
use permbox::treebox::{self, LegalColouring, Side, Site, TreeBall};
use permbox::{blocks, Error, Result, Suborbit};
use serde::Serialize;

pub use parse::{parse_expr, parse_graph_expr, parse_input, GraphExpr, Input};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verb {
    Analyze,
    Suborbits,
    Primitivity,
    Ends,
    Decompose,
    LocalAction,
    Render,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Dot,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Options {
    /// Radius of box nodes without an explicit `@r`, and lobe generations of
    /// `gamma` graphs without one.
    pub radius: Option<usize>,
    pub cap_degree: Option<usize>,
    pub cap_order: Option<u128>,
    /// Selects a random legal colouring for `localaction`.
    pub seed: Option<u64>,
    pub format: Option<Format>,
    /// `render` the block-cut-vertex tree instead of the graph.
    pub bcv: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Command {
    pub verb: Verb,
    pub expr: String,
    pub options: Options,
}

/// Process exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } | Error::InvalidInput(_) => 2,
        Error::CapExceeded { .. } => 3,
        Error::Hypothesis(_) | Error::NotTransitive | Error::RegularGroup => 4,
        _ => 1,
    }
}

impl Command {
    fn caps(&self) -> Result<Caps> {
        let mut caps = Caps::default();
        if let Some(r) = self.options.radius {
            if r < 2 {
                return Err(Error::Parse {
                    position: 0,
                    message: "--radius must be at least 2".into(),
                });
            }
            caps.default_radius = r;
        }
        if let Some(d) = self.options.cap_degree {
            caps.degree = d;
            caps.decomposition_degree = caps.decomposition_degree.min(d);
        }
        if let Some(o) = self.options.cap_order {
            caps.order = o;
        }
        Ok(caps)
    }

    fn format(&self) -> Format {
        self.options.format.unwrap_or(match self.verb {
            Verb::Render => Format::Dot,
            _ => Format::Json,
        })
    }
}

/// Runs a command, returning the text to print (newline terminated).
pub fn run(cmd: &Command) -> Result<String> {
    let caps = cmd.caps()?;
    let input = parse_input(&cmd.expr)?;
    let format = cmd.format();
    if format == Format::Dot && cmd.verb != Verb::Render {
        return Err(Error::InvalidInput("only render produces DOT".into()));
    }
    match (cmd.verb, &input) {
        (Verb::Render, _) => render(&input, cmd, &caps, format),
        (Verb::Ends, _) => json(&ends(&input, &caps)?),
        (_, Input::Graph(g)) => Err(Error::InvalidInput(format!("{g} is a graph; this verb needs a group"))),
        (Verb::Analyze, Input::Group(e)) => json(&decompose::classify(ClassifyInput::Expr(e), &caps)?),
        (Verb::Suborbits, Input::Group(e)) => json(&suborbits(e, &caps)?),
        (Verb::Primitivity, Input::Group(e)) => json(&primitivity(e, &caps)?),
        (Verb::Decompose, Input::Group(e)) => json(&decomposition(e, &caps)?),
        (Verb::LocalAction, Input::Group(e)) => json(&local_actions(e, cmd.options.seed, &caps)?),
    }
}

fn json<T: Serialize>(doc: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(doc).map_err(|e| Error::Internal(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

#[derive(Debug, Serialize)]
struct SuborbitDocument {
    schema: &'static str,
    input: String,
    realization: &'static str,
    degree: usize,
    base_point: usize,
    /// Finite groups: suborbits with pairing. Box truncations: orbits of the
    /// root stabilizer on `V2` ball vertices (pairing is not defined there).
    suborbits: Vec<Suborbit>,
    subdegrees: Vec<usize>,
    sd: Option<usize>,
}

fn suborbits(e: &GroupExpr, caps: &Caps) -> Result<SuborbitDocument> {
    e.validate()?;
    if e.is_finite() {
        let g = e.realize_finite(caps)?;
        let rep = g.suborbits(0)?;
        return Ok(SuborbitDocument {
            schema: "permbox.suborbits/1",
            input: e.to_string(),
            realization: "finite",
            degree: g.degree(),
            base_point: 0,
            subdegrees: rep.sizes(),
            suborbits: rep.suborbits,
            sd: rep.sd,
        });
    }
    let t = decompose::realize_box(e, caps)?;
    let pa = treebox::box_point_action(&t)?;
    let suborbits = pa
        .suborbits
        .iter()
        .enumerate()
        .map(|(i, o)| Suborbit {
            points: o.clone(),
            size: o.len(),
            paired: i,
        })
        .collect();
    Ok(SuborbitDocument {
        schema: "permbox.suborbits/1",
        input: e.to_string(),
        realization: "box-truncation",
        degree: pa.points.len(),
        base_point: 0,
        suborbits,
        subdegrees: pa.subdegrees,
        sd: pa.sd,
    })
}

#[derive(Debug, Serialize)]
struct PrimitivityDocument {
    schema: &'static str,
    input: String,
    primitive: bool,
    report: PrimitivityReport,
    /// Finite inputs: the block system with the smallest blocks, if any.
    blocks: Option<Vec<Vec<usize>>>,
    higman: Option<bool>,
}

fn primitivity(e: &GroupExpr, caps: &Caps) -> Result<PrimitivityDocument> {
    let report = decompose::expr_primitivity_report(e, caps)?;
    let (blocks, higman) = if e.is_finite() {
        let g = e.realize_finite(caps)?;
        if g.is_transitive() {
            (
                blocks::primitivity(&g)?.map(|b| b.blocks),
                Some(blocks::higman_primitivity(&g)?),
            )
        } else {
            (None, Some(false))
        }
    } else {
        (None, None)
    };
    Ok(PrimitivityDocument {
        schema: "permbox.primitivity/1",
        input: e.to_string(),
        primitive: report.primitive,
        report,
        blocks,
        higman,
    })
}

#[derive(Debug, Serialize)]
struct DecomposeDocument {
    schema: &'static str,
    input: String,
    radii: Vec<usize>,
    primitivity: PrimitivityReport,
    sd_chain: Option<SdChain>,
    sd_chain_error: Option<String>,
    /// Invariant cartesian decompositions of a finite realization.
    decompositions: Option<Vec<CartesianDecomposition>>,
}

fn decomposition(e: &GroupExpr, caps: &Caps) -> Result<DecomposeDocument> {
    let primitivity = decompose::expr_primitivity_report(e, caps)?;
    let (sd_chain, sd_chain_error) = match decompose::sd_chain_with(e, caps) {
        Ok(c) => (Some(c), None),
        Err(err @ (Error::RegularGroup | Error::Hypothesis(_))) => (None, Some(err.to_string())),
        Err(err) => return Err(err),
    };
    let decompositions = if e.is_finite() {
        let g = e.realize_finite(caps)?;
        (g.is_transitive() && g.degree() <= caps.decomposition_degree)
            .then(|| products::find_cartesian_decompositions(&g, caps.decomposition_degree))
            .transpose()?
    } else {
        None
    };
    Ok(DecomposeDocument {
        schema: "permbox.decompose/1",
        input: e.to_string(),
        radii: e.radii(caps),
        primitivity,
        sd_chain,
        sd_chain_error,
        decompositions,
    })
}

#[derive(Debug, Serialize)]
struct LocalActionRecord {
    vertex: usize,
    side: Side,
    depth: usize,
    equal_to_local_group: bool,
    isomorphic_to_local_group: bool,
}

#[derive(Debug, Serialize)]
struct LocalActionDocument {
    schema: &'static str,
    input: String,
    radius: usize,
    colouring: String,
    order: u128,
    vertices: Vec<LocalActionRecord>,
    locally_prescribed: bool,
    transitive_on_interior_v1: bool,
    transitive_on_interior_v2: bool,
}

fn local_actions(e: &GroupExpr, seed: Option<u64>, caps: &Caps) -> Result<LocalActionDocument> {
    let (g1, g2, r) = match e {
        GroupExpr::Box { left, right, radius } if left.is_finite() && right.is_finite() => {
            e.validate()?;
            (
                left.realize_finite(caps)?,
                right.realize_finite(caps)?,
                radius.unwrap_or(caps.default_radius),
            )
        }
        _ => return Err(Error::InvalidInput(format!("{e} is not a box product of finite groups"))),
    };
    let ball = TreeBall::build(g1.degree(), g2.degree(), r, Side::V2)?;
    let (col, colouring) = match seed {
        Some(s) => (LegalColouring::random(&ball, s), format!("seeded:{s}")),
        None => (LegalColouring::deterministic(&ball), "deterministic".to_string()),
    };
    let t = treebox::truncated_universal_group_on(&ball, &col, &g1, &g2, caps.order)?;
    let vertices = permbox::par::try_map(&ball.interior(), |&v| {
        treebox::local_action_verify(&t, Site::Vertex(v)).map(|la| LocalActionRecord {
            vertex: v,
            side: la.side,
            depth: ball.depth(v),
            equal_to_local_group: la.equal_to_local_group,
            isomorphic_to_local_group: la.isomorphic_to_local_group,
        })
    })?;
    Ok(LocalActionDocument {
        schema: "permbox.localaction/1",
        input: e.to_string(),
        radius: r,
        colouring,
        order: t.group.order(),
        locally_prescribed: vertices.iter().all(|v| v.equal_to_local_group),
        vertices,
        transitive_on_interior_v1: t.transitive_on_interior(Side::V1),
        transitive_on_interior_v2: t.transitive_on_interior(Side::V2),
    })
}

/// The graph an input stands for: the graph itself, the minimal orbital graph
/// of a finite group, or the point graph of a box product.
struct Realized {
    graph: Graph,
    gamma: Option<GammaGraph>,
}

fn realize_graph(input: &Input, caps: &Caps) -> Result<Realized> {
    match input {
        Input::Graph(g) => graph_expr(g, caps),
        Input::Group(e) if e.is_finite() => Ok(Realized {
            graph: graph::minimal_orbital_graph(&e.realize_finite(caps)?)?,
            gamma: None,
        }),
        Input::Group(e @ GroupExpr::Box { left, right, .. }) if left.is_finite() && right.is_finite() => {
            e.validate()?;
            let r = e.radii(caps)[0];
            let pg = decompose::box_point_graph(&left.realize_finite(caps)?, &right.realize_finite(caps)?, r)?;
            if pg.graph.len() > caps.degree {
                return Err(Error::CapExceeded {
                    what: "graph vertex count",
                    limit: caps.degree as u128,
                    actual: pg.graph.len() as u128,
                });
            }
            Ok(Realized {
                graph: pg.graph.clone(),
                gamma: Some(pg),
            })
        }
        Input::Group(e) => Err(Error::InvalidInput(format!("{e} has no finite realization"))),
    }
}

fn graph_expr(g: &GraphExpr, caps: &Caps) -> Result<Realized> {
    let plain = |graph: Graph| {
        if graph.len() > caps.degree {
            return Err(Error::CapExceeded {
                what: "graph vertex count",
                limit: caps.degree as u128,
                actual: graph.len() as u128,
            });
        }
        Ok(Realized { graph, gamma: None })
    };
    match g {
        GraphExpr::Complete(n) if *n <= caps.degree => plain(Graph::complete(*n)),
        GraphExpr::Path(n) if *n <= caps.degree => plain(Graph::path(*n)),
        GraphExpr::Cycle(n) if *n <= caps.degree => plain(Graph::cycle(*n)?),
        GraphExpr::Complete(n) | GraphExpr::Path(n) | GraphExpr::Cycle(n) => Err(Error::CapExceeded {
            what: "graph vertex count",
            limit: caps.degree as u128,
            actual: *n as u128,
        }),
        GraphExpr::Gamma { lambda, m, generations } => {
            let lambda = graph_expr(lambda, caps)?.graph;
            let r = generations.unwrap_or(caps.default_radius);
            let gamma = graph::gamma_digraph_with_cap(&lambda.to_digraph(), *m, r, caps.degree)?;
            Ok(Realized {
                graph: gamma.graph.clone(),
                gamma: Some(gamma),
            })
        }
        GraphExpr::Cart(a, b) => {
            let (a, b) = (graph_expr(a, caps)?.graph, graph_expr(b, caps)?.graph);
            plain(graph::cartesian_graph_product(&a, &b, caps.degree)?)
        }
    }
}

fn input_text(input: &Input) -> String {
    match input {
        Input::Group(e) => e.to_string(),
        Input::Graph(g) => g.to_string(),
    }
}

#[derive(Debug, Serialize)]
struct EndsDocument {
    schema: &'static str,
    input: String,
    vertices: usize,
    edges: usize,
    ends: EndsVerdict,
}

fn ends(input: &Input, caps: &Caps) -> Result<EndsDocument> {
    let r = realize_graph(input, caps)?;
    Ok(EndsDocument {
        schema: "permbox.ends/1",
        input: input_text(input),
        vertices: r.graph.len(),
        edges: r.graph.edges().len(),
        ends: graph::ends_estimate(&r.graph, EndsParams::default())?,
    })
}

#[derive(Debug, Serialize)]
struct GraphDocument {
    schema: &'static str,
    input: String,
    vertices: usize,
    edges: Vec<(usize, usize)>,
    lobes: Option<Vec<Vec<usize>>>,
}

fn render(input: &Input, cmd: &Command, caps: &Caps, format: Format) -> Result<String> {
    let r = realize_graph(input, caps)?;
    let name = if cmd.options.bcv { "bcv" } else { "G" };
    match (format, cmd.options.bcv) {
        (Format::Dot, false) => Ok(graph::graph_to_dot(&r.graph, name)),
        (Format::Dot, true) => Ok(graph::bcv_to_dot(&graph::lobes_and_bcv_tree(&r.graph)?, name)),
        (Format::Json, bcv) => {
            let lobes = if bcv {
                Some(graph::lobes_and_bcv_tree(&r.graph)?.lobes)
            } else {
                r.gamma.map(|g| g.lobes.into_iter().map(|l| l.vertices).collect())
            };
            json(&GraphDocument {
                schema: "permbox.graph/1",
                input: input_text(input),
                vertices: r.graph.len(),
                edges: r.graph.edges(),
                lobes,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cmd(verb: Verb, expr: &str) -> Command {
        Command {
            verb,
            expr: expr.into(),
            options: Options::default(),
        }
    }

    #[test]
    fn analyze_product_action() {
        let out = run(&cmd(Verb::Analyze, "(S(3) pwr S(2))")).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["degree"], 9);
        assert_eq!(v["order"], 72);
        assert_eq!(v["subdegrees"], serde_json::json!([1, 4, 4]));
        assert_eq!(v["verdict"], "PA");
    }

    #[test]
    fn exit_codes() {
        let e = run(&cmd(Verb::Analyze, "S(3) box S(2) pwr S(2)")).unwrap_err();
        assert_eq!(exit_code(&e), 2);
        let mut c = cmd(Verb::Analyze, "(S(5) pwr S(5))");
        c.options.cap_degree = Some(100);
        assert_eq!(exit_code(&run(&c).unwrap_err()), 3);
        assert_eq!(exit_code(&run(&cmd(Verb::Render, "gamma(P3,2)")).unwrap_err()), 4);
        let mut c = cmd(Verb::Suborbits, "S(3)");
        c.options.format = Some(Format::Dot);
        assert_eq!(exit_code(&run(&c).unwrap_err()), 2);
    }

    #[test]
    fn ends_of_box() {
        let out = run(&cmd(Verb::Ends, "(S(3) box S(2))@4")).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["ends"]["verdict"], "Many");
    }

    #[test]
    fn render_bcv() {
        let mut c = cmd(Verb::Render, "gamma(K4,3)@2");
        c.options.bcv = true;
        let dot = run(&c).unwrap();
        assert!(dot.starts_with("graph bcv {"));
        assert!(dot.contains("L0 -- p0;"));
    }

    #[test]
    fn local_actions_of_box() {
        let out = run(&cmd(Verb::LocalAction, "(S(3) box S(2))@3")).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["locally_prescribed"], true);
        assert_eq!(v["transitive_on_interior_v2"], true);
    }
}
