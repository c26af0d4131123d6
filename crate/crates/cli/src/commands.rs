use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context as _, Result};
use closurelab::closure::{acl0_verdict, dcl0_verdict, trace_line};
use closurelab::constructions::{
    bipartite_from_source, bipartite_named, build_chain_graph, build_path_witness, build_sorted_halting,
    decode_parities, pairing::nth_prime, psi_formula, xi_formulas, EnumerationSource, LimitFunction,
};
use closurelab::transforms::NAT_SORT;
use closurelab::{
    augment_with_nat, build_psi, build_upsilon, cl_fixpoint, cl_from_acl_dcl, eval, in_acl0, in_dcl0, lift_qf, limit_encode, morleyize, parse_formula, parse_limit_table, parse_structure,
    print_structure, set_membership, solve, truncate, Assignment, Cardinality, ClosureResult, CountVerdict,
    Element, LimitPresentation, MembershipVerdict, PartitionedFormula, SolutionCountSet,
    StructureSpec, TruthVerdict,
};

use crate::args::*;

type Names = Arc<dyn Fn(&str) -> Option<Element>>;

/// A structure available to a command, with its element names.
#[derive(Clone)]
pub struct Loaded {
    pub spec: StructureSpec,
    names: Option<Names>,
    /// Horizon covering everything a chain-graph construction has placed.
    horizon_hint: Option<u64>,
    /// Used when a command is given no --formula.
    defaults: Vec<PartitionedFormula>,
}

impl Loaded {
    fn plain(spec: StructureSpec) -> Self {
        Loaded {
            spec,
            names: None,
            horizon_hint: None,
            defaults: Vec::new(),
        }
    }

    fn formulas(&self, texts: &[String]) -> Result<Vec<PartitionedFormula>> {
        if texts.is_empty() {
            if self.defaults.is_empty() {
                bail!("--formula is required for this structure");
            }
            return Ok(self.defaults.clone());
        }
        texts.iter().map(|f| self.formula(f)).collect()
    }

    fn element(&self, text: &str) -> Result<Element> {
        let text = text.trim();
        if let Some(e) = self.names.as_ref().and_then(|n| n(text)) {
            return Ok(e);
        }
        let e = Element::parse(&self.spec.sig, text)?;
        if !self.spec.contains(e) {
            bail!("{text} is not an element of the structure");
        }
        Ok(e)
    }

    fn elements(&self, list: &str) -> Result<BTreeSet<Element>> {
        list.split(',')
            .filter(|p| !p.trim().is_empty())
            .map(|p| self.element(p))
            .collect()
    }

    fn formula(&self, text: &str) -> Result<PartitionedFormula> {
        parse_formula(text, &self.spec.sig).with_context(|| format!("in formula `{text}`"))
    }

    fn assignment(&self, items: &[String]) -> Result<Assignment> {
        let mut out = Assignment::new();
        for item in items.iter().flat_map(|s| s.split(',')) {
            if item.trim().is_empty() {
                continue;
            }
            let (var, val) = item
                .split_once('=')
                .ok_or_else(|| anyhow!("expected v=Sort#k in --assign, got `{item}`"))?;
            if out.insert(var.trim().to_string(), self.element(val)?).is_some() {
                bail!("variable {} assigned twice", var.trim());
            }
        }
        Ok(out)
    }

    fn left_tuple(&self, pf: &PartitionedFormula, asg: &Assignment) -> Result<Vec<Element>> {
        pf.left
            .iter()
            .map(|v| {
                asg.get(&v.name)
                    .copied()
                    .ok_or_else(|| anyhow!("missing --assign for {}", v.name))
            })
            .collect()
    }

    fn show(&self, e: Element) -> String {
        e.display(&self.spec.sig).to_string()
    }

    fn show_tuple(&self, t: &[Element]) -> String {
        closurelab::structure::tuple_string(&self.spec.sig, t)
    }
}

#[derive(Default)]
pub struct Context {
    current: Option<Loaded>,
}

/// Lines for stdout and the exit code (0 decided, 2 Unknown).
#[derive(Default)]
pub struct Outcome {
    pub lines: Vec<String>,
    pub code: i32,
}

impl Outcome {
    fn push(&mut self, line: impl Into<String>) {
        self.lines.push(line.into());
    }

    fn extend_lines(&mut self, lines: Vec<String>) {
        self.lines.extend(lines);
    }

    fn unknown_if(&mut self, cond: bool) {
        if cond {
            self.code = 2;
        }
    }
}

fn tracing() -> bool {
    std::env::var("CLOSURELAB_TRACE").is_ok_and(|v| v == "1")
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load(ctx: &Context, arg: &StructureArg) -> Result<Loaded> {
    match (&arg.structure, &ctx.current) {
        (Some(path), _) => {
            let spec = parse_structure(&read(path)?).with_context(|| format!("in {}", path.display()))?;
            Ok(Loaded::plain(spec))
        }
        (None, Some(l)) => Ok(l.clone()),
        (None, None) => bail!("no structure: pass --structure or chain after `construct`"),
    }
}

fn table_path(spec: &str) -> Result<&Path> {
    spec.strip_prefix("table:")
        .map(Path::new)
        .ok_or_else(|| anyhow!("--limit-fn expects table:<file>, got `{spec}`"))
}

fn count_str(c: CountVerdict) -> String {
    match c {
        CountVerdict::Exact(k) => format!("Exact({k})"),
        CountVerdict::AtLeast(k) => format!("AtLeast({k})"),
        CountVerdict::Unknown => "Unknown".into(),
    }
}

fn cardinality_str(c: Cardinality) -> String {
    match c {
        Cardinality::Finite(k) => k.to_string(),
        Cardinality::Infinite => "infinite".into(),
    }
}

pub fn run(cmd: Command, ctx: &mut Context) -> Result<Outcome> {
    match cmd {
        Command::Eval(c) => run_eval(c, ctx),
        Command::Count(c) => run_count(c, ctx),
        Command::Acl(c) => run_member(c, ctx, true),
        Command::Dcl(c) => run_member(c, ctx, false),
        Command::Closure(c) => run_closure(c, ctx),
        Command::Reduce(c) => run_reduce(c, ctx),
        Command::Morleyize(c) => run_morleyize(c, ctx),
        Command::LimitEncode(c) => run_limit(c, ctx),
        Command::Construct(c) => run_construct(c, ctx),
        Command::DecodeParities(c) => run_decode(c, ctx),
    }
}

fn run_eval(c: QueryCmd, ctx: &Context) -> Result<Outcome> {
    let l = load(ctx, &c.structure)?;
    let b = c.budget.resolve()?;
    let pf = l.formula(&c.formula)?;
    let asg = l.assignment(&c.assign)?;
    let v = eval(&l.spec, &pf.formula, &asg, &b)?;
    let mut out = Outcome::default();
    out.push(format!("verdict={v:?}"));
    out.unknown_if(v == TruthVerdict::Unknown);
    Ok(out)
}

fn run_count(c: QueryCmd, ctx: &Context) -> Result<Outcome> {
    let l = load(ctx, &c.structure)?;
    let b = c.budget.resolve()?;
    let pf = l.formula(&c.formula)?;
    let a = l.left_tuple(&pf, &l.assignment(&c.assign)?)?;
    let sol = solve(&l.spec, &pf, &a, &b)?;
    let mut out = Outcome::default();
    out.push(sol.verdict.to_string());
    for t in &sol.found {
        out.push(format!("solution={}", l.show_tuple(t)));
    }
    out.unknown_if(sol.verdict == CountVerdict::Unknown);
    Ok(out)
}

fn run_member(c: MemberCmd, ctx: &Context, acl: bool) -> Result<Outcome> {
    let l = load(ctx, &c.structure)?;
    let b = c.budget.resolve()?;
    let phis = l.formulas(&c.formula)?;
    if let Some(base) = &c.base {
        if !c.assign.is_empty() {
            bail!("--assign and --base are exclusive");
        }
        let target = c
            .target
            .as_deref()
            .ok_or_else(|| anyhow!("--base needs --target"))?;
        let counts = match &c.counts {
            Some(t) => SolutionCountSet::parse(t)?,
            None if acl => SolutionCountSet::AllOfN,
            None => SolutionCountSet::singleton(),
        };
        let base = l.elements(base)?;
        let target = l.element(target)?;
        let m = set_membership(&l.spec, &phis, &base, &counts, target, &b)?;
        let mut out = Outcome::default();
        out.push(format!("verdict={}", m.verdict));
        report_closure(&l, &m.closure, m.verdict, Some(target), &mut out);
        return Ok(out);
    }
    if c.target.is_some() || c.counts.is_some() {
        bail!("--target and --S need --base");
    }
    let [pf] = phis.as_slice() else {
        bail!("tuple mode takes exactly one --formula");
    };
    let a = l.left_tuple(pf, &l.assignment(&c.assign)?)?;
    let sol = solve(&l.spec, pf, &a, &b)?;
    let analytic = l.spec.oracle.as_ref().and_then(|o| o.cardinality(pf, &a));
    let v = if acl {
        acl0_verdict(sol.verdict, analytic)
    } else {
        dcl0_verdict(sol.verdict, analytic)
    };
    let mut out = Outcome::default();
    out.push(format!("verdict={v}"));
    out.push(format!("count={}", count_str(sol.verdict)));
    match (v, sol.verdict) {
        (MembershipVerdict::Member, CountVerdict::Exact(k)) => {
            if !acl {
                out.push(format!("witness={}", l.show_tuple(&sol.found[0])));
            }
            out.push(format!("certificate=exact k={k}"));
        }
        (MembershipVerdict::NonMember, CountVerdict::Exact(k)) => out.push(format!("certificate=exact k={k}")),
        (MembershipVerdict::NonMember, CountVerdict::AtLeast(k)) if !acl && k >= 2 => {
            let shown: Vec<String> = sol.found.iter().take(2).map(|t| l.show_tuple(t)).collect();
            out.push(format!("certificate=at-least k={k} solutions={}", shown.join(" ")));
        }
        (MembershipVerdict::NonMember, _) => {
            let card = analytic.map_or_else(|| "?".to_string(), cardinality_str);
            out.push(format!("certificate=oracle cardinality={card}"));
        }
        _ => {}
    }
    out.unknown_if(v == MembershipVerdict::Unknown);
    Ok(out)
}

fn report_closure(
    l: &Loaded,
    r: &ClosureResult,
    verdict: MembershipVerdict,
    target: Option<Element>,
    out: &mut Outcome,
) {
    let sig = &l.spec.sig;
    out.push(format!("iterations={}", r.iterations_used));
    out.push(format!("converged={}", r.converged));
    match (verdict, target) {
        (MembershipVerdict::Member, Some(t)) => {
            let steps = r.witness(t);
            if steps.is_empty() {
                out.push(format!("witness=base {}", l.show(t)));
            }
            for step in steps {
                out.push(format!("witness={}", trace_line(sig, step)));
            }
        }
        (MembershipVerdict::NonMember, _) => {
            let all: Vec<String> = r.elements.iter().map(|e| l.show(*e)).collect();
            out.push(format!(
                "certificate=fixpoint iterations={} elements={}",
                r.iterations_used,
                all.join(",")
            ));
        }
        _ => {}
    }
    if !r.suppressed.is_empty() {
        out.push(format!("suppressed={}", r.suppressed.len()));
    }
    if tracing() {
        for line in r.trace_lines(sig).into_iter().chain(r.suppressed_lines(sig)) {
            out.push(format!("trace={line}"));
        }
    }
    out.unknown_if(verdict == MembershipVerdict::Unknown);
}

fn run_closure(c: ClosureCmd, ctx: &Context) -> Result<Outcome> {
    let l = load(ctx, &c.structure)?;
    let b = c.budget.resolve()?;
    let phis = l.formulas(&c.formula)?;
    let counts = SolutionCountSet::parse(&c.counts)?;
    let base = l.elements(&c.base)?;
    let mut out = Outcome::default();
    let (r, verdict, target) = match &c.target {
        Some(t) => {
            let t = l.element(t)?;
            let m = set_membership(&l.spec, &phis, &base, &counts, t, &b)?;
            out.push(format!("verdict={}", m.verdict));
            (m.closure, m.verdict, Some(t))
        }
        None => {
            let r = cl_fixpoint(&l.spec, &phis, &base, &counts, &b)?;
            let complete = r.converged && r.suppressed.is_empty();
            out.push(if complete { "verdict=Complete" } else { "verdict=Unknown" });
            let v = if complete {
                MembershipVerdict::NonMember
            } else {
                MembershipVerdict::Unknown
            };
            (r, v, None)
        }
    };
    let all: Vec<String> = r.elements.iter().map(|e| l.show(*e)).collect();
    out.push(format!("size={}", r.elements.len()));
    out.push(format!("elements={}", all.join(",")));
    report_closure(&l, &r, verdict, target, &mut out);
    Ok(out)
}

fn run_reduce(c: ReduceCmd, ctx: &Context) -> Result<Outcome> {
    let l = load(ctx, &c.structure)?;
    let sig = &l.spec.sig;
    let pf = l.formula(&c.formula)?;
    let mut out = Outcome::default();
    match c.kind {
        ReduceKind::Upsilon => {
            let u = build_upsilon(sig, &pf, c.k)?;
            out.push(format!("upsilon={}", u.formula.display(sig)));
            for (j, tau) in u.partitions.iter().enumerate() {
                out.push(format!("tau_{j}={}", tau.display(sig)));
            }
        }
        ReduceKind::Psi => {
            let psi = build_psi(sig, &pf)?;
            out.push(format!("psi={}", psi.display(sig)));
        }
        ReduceKind::Count => {
            let b = c.budget.resolve()?;
            let a = l.left_tuple(&pf, &l.assignment(&c.assign)?)?;
            let s = &l.spec;
            let acl = |p: &PartitionedFormula, t: &[Element]| in_acl0(s, p, t, &b);
            let dcl = |p: &PartitionedFormula, t: &[Element]| in_dcl0(s, p, t, &b);
            let r = cl_from_acl_dcl(s, &pf, &a, &acl, &dcl, &b)?;
            if r.infinite_per_oracle {
                out.push("verdict=Infinite");
                out.push("certificate=acl NonMember");
            } else {
                out.push(r.verdict.to_string());
                out.unknown_if(r.verdict == CountVerdict::Unknown);
            }
        }
    }
    Ok(out)
}

fn run_morleyize(c: MorleyCmd, ctx: &Context) -> Result<Outcome> {
    let l = load(ctx, &c.structure)?;
    let pfs = c.formula.iter().map(|f| l.formula(f)).collect::<Result<Vec<_>>>()?;
    let m = morleyize(&l.spec, &pfs, c.level)?;
    let tables = m.structure.tables().expect("morleyize returns a finite structure");
    let mut out = Outcome::default();
    for (pf, phi) in pfs.iter().zip(&m.phi_of_psi) {
        let rel = *phi.formula.relations().iter().next().expect("φ_ψ is an atom");
        out.push(format!(
            "relation={} rows={} level={} phi={} psi={}",
            m.sig.relation(rel).name,
            tables.relations[rel.0].len(),
            pf.formula.bc_sigma_level(),
            phi.display(&m.sig),
            pf.display(&l.spec.sig)
        ));
    }
    if let Some(path) = c.output {
        fs::write(&path, print_structure(&m.structure)?)
            .with_context(|| format!("cannot write {}", path.display()))?;
        out.push(format!("written={}", path.display()));
    }
    Ok(out)
}

fn run_limit(c: LimitCmd, ctx: &Context) -> Result<Outcome> {
    let l = load(ctx, &c.structure)?;
    let b = c.budget.resolve()?;
    let base = if l.spec.sig.sort_id(NAT_SORT).is_some() {
        l.spec.clone()
    } else {
        augment_with_nat(&l.spec)?
    };
    let limits = match &c.limit_fn {
        Some(spec) => parse_limit_table(&read(table_path(spec)?)?, &base.sig)?,
        None => Default::default(),
    };
    let lp = LimitPresentation {
        base: base.clone(),
        depth: c.depth,
        limits,
        scan_horizon: b.domain_horizon,
    };
    let enc = limit_encode(&lp)?;
    let plus = &enc.structure.sig;
    let mut out = Outcome::default();
    for (rel, phi) in &enc.phi {
        out.push(format!(
            "phi[{}]={} level={}",
            base.sig.relation(*rel).name,
            phi.display(plus),
            phi.formula.bc_sigma_level()
        ));
    }
    if let Some(text) = &c.formula {
        let eta = parse_formula(text, &base.sig).with_context(|| format!("in formula `{text}`"))?;
        let lifted = lift_qf(&enc, &base.sig, &eta.formula)?;
        out.push(format!("lifted={}", lifted.display(plus)));
        if !c.assign.is_empty() {
            let view = Loaded::plain(truncate(&enc.structure, b.domain_horizon)?);
            let asg = view.assignment(&c.assign)?;
            let v = eval(&view.spec, &lifted, &asg, &b)?;
            out.push(format!("verdict={v:?} horizon={}", b.domain_horizon));
            out.unknown_if(v == TruthVerdict::Unknown);
        }
    }
    Ok(out)
}

fn chain_function(spec: Option<&str>) -> Result<LimitFunction> {
    match spec {
        Some(s) => Ok(LimitFunction::table(&read(table_path(s)?)?)?),
        None => Ok(LimitFunction::new(|_, _| 0)),
    }
}

fn run_construct(c: ConstructCmd, ctx: &mut Context) -> Result<Outcome> {
    let infinite = c
        .infinite
        .split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| p.trim().parse::<u64>().map_err(|_| anyhow!("bad column `{p}` in --infinite")))
        .collect::<Result<Vec<_>>>()?;
    let mut src = EnumerationSource::parse(&c.source, &infinite)?;
    if let Some(n) = c.columns {
        src = src.with_columns(n);
    }
    let mut out = Outcome::default();
    let loaded = match c.kind {
        ConstructKind::SortedHalting => {
            let sh = build_sorted_halting(&src)?;
            let m = sh.structure.sig.num_sorts() as u64;
            out.push(format!("columns={m}"));
            for e in 0..m {
                out.push(format!("sort=X{e} size={}", cardinality_str(sh.sort_size(e))));
            }
            let spec = sh.structure.clone();
            Loaded {
                defaults: xi_formulas(&spec.sig)?,
                spec,
                names: Some(Arc::new(move |n| sh.named(n))),
                horizon_hint: None,
            }
        }
        ConstructKind::PathWitness => {
            let pw = build_path_witness(&src)?;
            out.push(format!("columns={}", src.columns()));
            for e in 0..src.columns() {
                let w = pw.least_witness(e).map_or_else(|| "none".to_string(), |k| k.to_string());
                out.push(format!("column={e} least_witness={w}"));
            }
            let spec = pw.structure.clone();
            Loaded {
                defaults: vec![parse_formula("F(x,y;z)", &spec.sig)?],
                spec,
                names: Some(Arc::new(move |n| pw.named(n))),
                horizon_hint: None,
            }
        }
        ConstructKind::Bipartite => {
            let p = bipartite_from_source(&src)?;
            out.push(format!("columns={}", src.columns()));
            for e in 0..src.columns() {
                out.push(format!(
                    "column={e} degree0={} degree1={}",
                    cardinality_str(p.g0.degree(e)),
                    cardinality_str(p.g1.degree(e))
                ));
            }
            out.push(format!("side={}", c.side));
            let spec = if c.side == 0 { p.z0 } else { p.z1 };
            Loaded {
                defaults: vec![psi_formula(&spec.sig)?],
                spec,
                names: Some(Arc::new(bipartite_named)),
                horizon_hint: None,
            }
        }
        ConstructKind::ChainGraph => {
            let f = chain_function(c.limit_fn.as_deref())?;
            let (spec, inv) = build_chain_graph(&f, c.stages)?;
            let h = inv.horizon();
            out.push(format!("stage={} f_used={} horizon={h}", inv.stage, inv.f_used));
            out.extend_lines(inv.export());
            out.push(format!(
                "nat_chains_below={} int_chains_below={}",
                inv.nat_chains_below(h),
                inv.int_chains_below(h)
            ));
            Loaded {
                spec,
                names: None,
                horizon_hint: Some(h),
                defaults: Vec::new(),
            }
        }
    };
    ctx.current = Some(loaded);
    Ok(out)
}

fn run_decode(c: DecodeCmd, ctx: &Context) -> Result<Outcome> {
    let (spec, hint) = match &c.limit_fn {
        Some(f) => {
            if c.structure.structure.is_some() {
                bail!("--limit-fn and --structure are exclusive");
            }
            let (spec, inv) = build_chain_graph(&chain_function(Some(f))?, c.stages)?;
            (spec, Some(inv.horizon()))
        }
        None => {
            let l = load(ctx, &c.structure)?;
            (l.spec, l.horizon_hint)
        }
    };
    let horizon = c
        .horizon
        .or(hint)
        .ok_or_else(|| anyhow!("--horizon is required for this structure"))?;
    let parities = decode_parities(&spec, horizon)?;
    let mut out = Outcome::default();
    out.push(format!("horizon={horizon} chains={}", parities.len()));
    for (n, parity) in parities {
        out.push(format!("n={n} prime={} parity={parity}", nth_prime(n)));
    }
    Ok(out)
}
