use std::collections::{HashMap, HashSet};
use std::str::FromStr;

use super::lexer::{tokenize, Tok, Token};
use super::{ParseDiagnostic, Parsed};
use crate::diagnostic::SourceSpan;
use crate::metamodel::{
    Activity, ActivitySpace, Alpha, AlphaState, Area, AreaDecl, Color, Competency, CompetencyRequirement,
    Declaration, ElementId, ElementKind, Kernel, Method, ModelDocument, Practice, Ref, Role, WorkProduct,
    WorkProductCategory, WorkProductContribution,
};
use crate::togaf::{ActivitySpec, ActivityTag, Feed, OutputSpec, PhaseId, StepSpec, TogafPhaseSpec};

type PResult<T> = Result<T, ParseDiagnostic>;

/// Parses one `.ess` source. Syntax errors stop the parse; structural
/// errors (missing goals, duplicate ids, unknown areas...) are collected.
/// Cross-references are left unresolved.
pub fn parse(source: &str, file: &str) -> Result<Parsed, Vec<ParseDiagnostic>> {
    let toks = tokenize(source, file).map_err(|e| vec![e])?;
    let mut p = Parser {
        file,
        toks,
        pos: 0,
        errors: Vec::new(),
        warnings: Vec::new(),
        spans: HashMap::new(),
    };
    let decls = match p.document() {
        Ok(d) => d,
        Err(e) => {
            p.errors.push(e);
            p.errors.sort_by(|a, b| a.span.cmp(&b.span));
            return Err(p.errors);
        }
    };
    if !p.errors.is_empty() {
        p.errors.sort_by(|a, b| a.span.cmp(&b.span));
        return Err(p.errors);
    }
    let fallback = SourceSpan::new(file, (1, 1), (1, 1));
    let document = ModelDocument::new(decls, p.spans).map_err(|diags| {
        diags
            .into_iter()
            .map(|d| ParseDiagnostic::error(d.span.unwrap_or_else(|| fallback.clone()), d.message))
            .collect::<Vec<_>>()
    })?;
    Ok(Parsed {
        document,
        warnings: p.warnings,
    })
}

/// Parses several `(file name, source)` pairs into one document, checking
/// id uniqueness across files.
pub fn parse_files<N, S>(files: &[(N, S)]) -> Result<Parsed, Vec<ParseDiagnostic>>
where
    N: AsRef<str>,
    S: AsRef<str>,
{
    let mut docs = Vec::new();
    let mut warnings = Vec::new();
    let mut errors = Vec::new();
    for (name, source) in files {
        match parse(source.as_ref(), name.as_ref()) {
            Ok(parsed) => {
                docs.push(parsed.document);
                warnings.extend(parsed.warnings);
            }
            Err(e) => errors.extend(e),
        }
    }
    if !errors.is_empty() {
        return Err(errors);
    }
    let document = ModelDocument::merge(docs).map_err(|diags| {
        diags
            .into_iter()
            .map(|d| {
                let span = d
                    .span
                    .unwrap_or_else(|| SourceSpan::new("<merged>", (1, 1), (1, 1)));
                ParseDiagnostic::error(span, d.message)
            })
            .collect::<Vec<_>>()
    })?;
    Ok(Parsed { document, warnings })
}

struct Parser<'a> {
    file: &'a str,
    toks: Vec<Token>,
    pos: usize,
    errors: Vec<ParseDiagnostic>,
    warnings: Vec<ParseDiagnostic>,
    spans: HashMap<ElementId, SourceSpan>,
}

struct SpaceNode {
    name: String,
    area: Option<Area>,
    goal: Option<String>,
    span: SourceSpan,
    activities: Vec<(Activity, SourceSpan)>,
    children: Vec<SpaceNode>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn peek_keyword(&self) -> Option<&str> {
        match &self.peek().tok {
            Tok::Ident(s) => Some(s.as_str()),
            _ => None,
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        self.peek_keyword() == Some(kw)
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn prev_end(&self) -> (usize, usize) {
        self.toks[self.pos.saturating_sub(1)].end
    }

    fn span(&self, start: (usize, usize), end: (usize, usize)) -> SourceSpan {
        SourceSpan::new(self.file, start, end)
    }

    fn token_span(&self, t: &Token) -> SourceSpan {
        self.span(t.start, t.end)
    }

    fn unexpected(&self, expected: &str) -> ParseDiagnostic {
        let t = self.peek();
        ParseDiagnostic::error(self.token_span(t), format!("unexpected {}", t.tok.describe()))
            .expected(expected)
    }

    fn error(&mut self, span: SourceSpan, msg: impl Into<String>) {
        self.errors.push(ParseDiagnostic::error(span, msg));
    }

    fn keyword(&mut self, kw: &str) -> PResult<Token> {
        if self.at_keyword(kw) {
            Ok(self.bump())
        } else {
            Err(self.unexpected(&format!("`{kw}`")))
        }
    }

    fn lbrace(&mut self) -> PResult<Token> {
        match self.peek().tok {
            Tok::LBrace => Ok(self.bump()),
            _ => Err(self.unexpected("`{`")),
        }
    }

    fn rbrace(&mut self, expected: &str) -> PResult<Token> {
        match self.peek().tok {
            Tok::RBrace => Ok(self.bump()),
            _ => Err(self.unexpected(expected)),
        }
    }

    fn at(&mut self) -> PResult<Token> {
        match self.peek().tok {
            Tok::At => Ok(self.bump()),
            _ => Err(self.unexpected("`@`")),
        }
    }

    fn string(&mut self, what: &str) -> PResult<(String, Token)> {
        match &self.peek().tok {
            Tok::Str(s) => {
                let s = s.clone();
                Ok((s, self.bump()))
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn ident(&mut self, what: &str) -> PResult<(String, Token)> {
        match &self.peek().tok {
            Tok::Ident(s) => {
                let s = s.clone();
                Ok((s, self.bump()))
            }
            _ => Err(self.unexpected(what)),
        }
    }

    /// IDENT or STRING.
    fn name(&mut self, what: &str) -> PResult<(String, Token)> {
        match &self.peek().tok {
            Tok::Ident(s) | Tok::Str(s) => {
                let s = s.clone();
                Ok((s, self.bump()))
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn int(&mut self) -> PResult<u32> {
        match self.peek().tok {
            Tok::Int(n) => {
                self.bump();
                Ok(u32::try_from(n).unwrap_or(u32::MAX))
            }
            _ => Err(self.unexpected("a number")),
        }
    }

    fn register(&mut self, id: &ElementId, span: SourceSpan) {
        if let Some(first) = self.spans.get(id) {
            let msg = format!("duplicate id `{id}`, first declared at {first}");
            self.error(span, msg);
        } else {
            self.spans.insert(id.clone(), span);
        }
    }

    fn document(&mut self) -> PResult<Vec<Declaration>> {
        let mut decls = Vec::new();
        loop {
            if self.peek().tok == Tok::Eof {
                return Ok(decls);
            }
            let decl = match self.peek_keyword() {
                Some("kernel") => Declaration::Kernel(self.kernel()?),
                Some("practice") => Declaration::Practice(self.practice()?),
                Some("method") => Declaration::Method(self.method()?),
                Some("role") => Declaration::Role(self.role()?),
                Some("togaf_phase") => Declaration::Phase(self.phase()?),
                _ => {
                    return Err(self.unexpected(
                        "`kernel`, `practice`, `method`, `role` or `togaf_phase`",
                    ))
                }
            };
            decls.push(decl);
        }
    }

    fn area_ref(&mut self) -> PResult<Area> {
        let (name, tok) = self.ident("an area name")?;
        Ok(Area::from_name(&name).unwrap_or_else(|| {
            let span = self.token_span(&tok);
            self.error(
                span,
                format!("unknown area `{name}` (expected Customer, Solution or Endeavor)"),
            );
            Area::Customer
        }))
    }

    fn category(&mut self) -> PResult<WorkProductCategory> {
        let (name, tok) = self.ident("a work product category")?;
        Ok(WorkProductCategory::from_name(&name).unwrap_or_else(|| {
            let span = self.token_span(&tok);
            self.error(
                span,
                format!("unknown category `{name}` (expected catalog, matrix, diagram or other)"),
            );
            WorkProductCategory::Other
        }))
    }

    fn tag(&mut self) -> PResult<String> {
        let (tag, tok) = self.ident("a tag")?;
        if ActivityTag::from_name(&tag).is_none() {
            let span = self.token_span(&tok);
            self.warnings
                .push(ParseDiagnostic::warning(span, format!("unknown activity tag `{tag}`")));
        }
        Ok(tag)
    }

    fn kernel(&mut self) -> PResult<Kernel> {
        let kw = self.bump();
        let (name, _) = self.string("a kernel name")?;
        let mut k = Kernel::new(name);
        self.lbrace()?;
        loop {
            match self.peek_keyword() {
                Some("area") => {
                    let a = self.area_decl()?;
                    k.areas.push(a);
                }
                Some("alpha") => {
                    let a = self.alpha()?;
                    k.alphas.push(a);
                }
                Some("competency") => {
                    let start = self.bump().start;
                    let (name, _) = self.name("a competency name")?;
                    self.keyword("area")?;
                    let area = self.area_ref()?;
                    let mut c = Competency::new(name, area);
                    if self.at_keyword("levels") {
                        self.bump();
                        c.max_level = self.int()?;
                    }
                    let span = self.span(start, self.prev_end());
                    self.register(&c.id, span);
                    k.competencies.push(c);
                }
                Some("space") => {
                    let start = self.bump().start;
                    let (name, _) = self.string("a space name")?;
                    self.keyword("area")?;
                    let area = self.area_ref()?;
                    let parent = if self.at_keyword("in") {
                        self.bump();
                        Some(Ref::named(self.string("a parent space name")?.0))
                    } else {
                        None
                    };
                    let goal = self.optional_string("goal")?;
                    let space = ActivitySpace {
                        id: ElementId::derive(ElementKind::Space, &name),
                        name,
                        area,
                        parent,
                        goal,
                    };
                    let span = self.span(start, self.prev_end());
                    self.register(&space.id, span);
                    k.spaces.push(space);
                }
                Some("workproduct") => {
                    let w = self.work_product(None)?;
                    k.work_products.push(w);
                }
                _ => {
                    self.rbrace("`area`, `alpha`, `competency`, `space`, `workproduct` or `}`")?;
                    break;
                }
            }
        }
        let span = self.span(kw.start, self.prev_end());
        self.register(&k.id, span);
        Ok(k)
    }

    fn optional_string(&mut self, kw: &str) -> PResult<Option<String>> {
        if self.at_keyword(kw) {
            self.bump();
            Ok(Some(self.string(&format!("a {kw} string"))?.0))
        } else {
            Ok(None)
        }
    }

    fn area_decl(&mut self) -> PResult<AreaDecl> {
        let start = self.bump().start;
        let area = self.area_ref()?;
        self.keyword("color")?;
        let (color, tok) = self.ident("a color")?;
        let span = self.token_span(&tok);
        match Color::from_name(&color) {
            None => self.error(
                span,
                format!("unknown color `{color}` (expected green, yellow or blue)"),
            ),
            Some(c) if c != area.color() => self.error(
                span,
                format!("area {area} is colored {}, not {c}", area.color()),
            ),
            Some(_) => {}
        }
        let decl = AreaDecl::new(area);
        let span = self.span(start, self.prev_end());
        self.register(&decl.id, span);
        Ok(decl)
    }

    fn alpha(&mut self) -> PResult<Alpha> {
        let start = self.bump().start;
        let (name, name_tok) = self.name("an alpha name")?;
        self.keyword("area")?;
        let area = self.area_ref()?;
        self.lbrace()?;
        let mut states: Vec<AlphaState> = Vec::new();
        while self.at_keyword("state") {
            let kw = self.bump();
            let (state_name, _) = self.name("a state name")?;
            self.lbrace()?;
            let mut checklist: Vec<String> = Vec::new();
            while self.at_keyword("check") {
                self.bump();
                let (text, tok) = self.string("checklist text")?;
                if checklist.contains(&text) {
                    let span = self.token_span(&tok);
                    self.error(span, format!("duplicate check item \"{text}\""));
                }
                checklist.push(text);
            }
            let close = self.rbrace("`check` or `}`")?;
            let span = self.span(kw.start, close.end);
            if checklist.is_empty() {
                self.error(span.clone(), "state requires at least one check item");
            }
            if states.iter().any(|s| s.name == state_name) {
                self.error(span, format!("duplicate state `{state_name}`"));
            }
            states.push(AlphaState {
                name: state_name,
                checklist,
            });
        }
        self.rbrace("`state` or `}`")?;
        if states.is_empty() {
            let span = self.token_span(&name_tok);
            self.error(span, "alpha requires at least one state");
        }
        let alpha = Alpha::new(name, area, states);
        let span = self.span(start, self.prev_end());
        self.register(&alpha.id, span);
        Ok(alpha)
    }

    fn work_product(&mut self, owner: Option<&ElementId>) -> PResult<WorkProduct> {
        let start = self.bump().start;
        let (name, _) = self.string("a work product name")?;
        self.keyword("category")?;
        let category = self.category()?;
        let description = self.optional_string("description")?;
        let id = match owner {
            Some(o) => o.child(ElementKind::WorkProduct, &name),
            None => ElementId::derive(ElementKind::WorkProduct, &name),
        };
        let span = self.span(start, self.prev_end());
        self.register(&id, span);
        Ok(WorkProduct {
            id,
            name,
            category,
            description,
        })
    }

    fn role(&mut self) -> PResult<Role> {
        let start = self.bump().start;
        let (name, name_tok) = self.string("a role name")?;
        self.lbrace()?;
        let mut competencies = Vec::new();
        while self.at_keyword("competency") {
            self.bump();
            let (c, _) = self.name("a competency name")?;
            self.at()?;
            let level = self.int()?;
            competencies.push(CompetencyRequirement::new(c, level));
        }
        self.rbrace("`competency` or `}`")?;
        if competencies.is_empty() {
            let span = self.token_span(&name_tok);
            self.error(span, "role requires at least one competency");
        }
        let role = Role::new(name, competencies);
        let span = self.span(start, self.prev_end());
        self.register(&role.id, span);
        Ok(role)
    }

    fn practice(&mut self) -> PResult<Practice> {
        let start = self.bump().start;
        let (name, name_tok) = self.string("a practice name")?;
        self.keyword("area")?;
        let area = self.area_ref()?;
        let mut p = Practice::new(name, area);
        self.lbrace()?;
        let mut nodes = Vec::new();
        loop {
            match self.peek_keyword() {
                Some("goal") => {
                    self.bump();
                    p.goals.push(self.string("goal text")?.0);
                }
                Some("input") => {
                    self.bump();
                    p.inputs.push(self.string("input text")?.0);
                }
                Some("output") => {
                    self.bump();
                    p.outputs.push(Ref::named(self.string("a work product name")?.0));
                }
                Some("workproduct") => {
                    let owner = p.id.clone();
                    let w = self.work_product(Some(&owner))?;
                    p.work_products.push(w);
                }
                Some("space") => nodes.push(self.space_block()?),
                _ => {
                    self.rbrace("`goal`, `input`, `output`, `workproduct`, `space` or `}`")?;
                    break;
                }
            }
        }
        if p.goals.is_empty() {
            let span = self.token_span(&name_tok);
            self.error(span, "practice requires at least one goal");
        }
        let span = self.span(start, self.prev_end());
        self.register(&p.id.clone(), span);
        for node in nodes {
            self.flatten(&mut p, node, None, area);
        }
        Ok(p)
    }

    fn space_block(&mut self) -> PResult<SpaceNode> {
        let start = self.bump().start;
        let (name, _) = self.string("a space name")?;
        let area = if self.at_keyword("area") {
            self.bump();
            Some(self.area_ref()?)
        } else {
            None
        };
        let goal = self.optional_string("goal")?;
        self.lbrace()?;
        let mut node = SpaceNode {
            name,
            area,
            goal,
            span: self.span(start, start),
            activities: Vec::new(),
            children: Vec::new(),
        };
        loop {
            match self.peek_keyword() {
                Some("space") => node.children.push(self.space_block()?),
                Some("activity") => node.activities.push(self.activity()?),
                _ => {
                    self.rbrace("`space`, `activity` or `}`")?;
                    break;
                }
            }
        }
        node.span = self.span(start, self.prev_end());
        Ok(node)
    }

    /// Parses an activity. Its id and space are set when the enclosing
    /// space is flattened.
    fn activity(&mut self) -> PResult<(Activity, SourceSpan)> {
        let start = self.bump().start;
        let (name, _) = self.string("an activity name")?;
        let mut a = Activity::new(&ElementId::new(""), name);
        loop {
            match self.peek_keyword() {
                Some("requires") => {
                    self.bump();
                    let (c, _) = self.name("a competency name")?;
                    self.at()?;
                    let level = self.int()?;
                    a.required_competencies.push(CompetencyRequirement::new(c, level));
                }
                Some("produces") => {
                    self.bump();
                    let (text, _) = self.string("a work product name")?;
                    a.produces.push(WorkProductContribution::from_text(&text));
                }
                Some("role") => {
                    let kw = self.bump();
                    let (r, _) = self.string("a role name")?;
                    if a.responsible_role.is_some() {
                        let span = self.token_span(&kw);
                        self.error(span, "activity has more than one role");
                    }
                    a.responsible_role = Some(Ref::named(r));
                }
                Some("tag") => {
                    self.bump();
                    let tag = self.tag()?;
                    a.tags.push(tag);
                }
                _ => break,
            }
        }
        Ok((a, self.span(start, self.prev_end())))
    }

    fn flatten(&mut self, p: &mut Practice, node: SpaceNode, parent: Option<ElementId>, inherited: Area) {
        let area = node.area.unwrap_or(inherited);
        let id = p.add_space(parent.as_ref(), node.name, area, node.goal);
        self.register(&id, node.span);
        for (mut a, span) in node.activities {
            a.id = id.child(ElementKind::Activity, &a.name);
            a.space = Some(id.clone());
            self.register(&a.id, span);
            p.activities.push(a);
        }
        for child in node.children {
            self.flatten(p, child, Some(id.clone()), area);
        }
    }

    fn method(&mut self) -> PResult<Method> {
        let start = self.bump().start;
        let (name, name_tok) = self.string("a method name")?;
        self.lbrace()?;
        let mut preamble: Option<Ref> = None;
        let mut cycle: Vec<Ref> = Vec::new();
        let mut concurrent: Vec<Ref> = Vec::new();
        loop {
            match self.peek_keyword() {
                Some("preamble") => {
                    let kw = self.bump();
                    let (p, _) = self.string("a practice name")?;
                    if preamble.is_some() {
                        let span = self.token_span(&kw);
                        self.error(span, "method has more than one preamble");
                    }
                    preamble = Some(Ref::named(p));
                }
                Some("cycle") => {
                    self.bump();
                    cycle.push(Ref::named(self.string("a practice name")?.0));
                }
                Some("concurrent") => {
                    self.bump();
                    concurrent.push(Ref::named(self.string("a practice name")?.0));
                }
                _ => {
                    self.rbrace("`preamble`, `cycle`, `concurrent` or `}`")?;
                    break;
                }
            }
        }
        let name_span = self.token_span(&name_tok);
        if cycle.is_empty() {
            self.error(name_span.clone(), "method requires at least one cycle practice");
        }
        let in_cycle: HashSet<&str> = cycle.iter().map(|r| r.name.as_str()).collect();
        let mut clashes = Vec::new();
        for r in preamble.iter().chain(concurrent.iter()) {
            if in_cycle.contains(r.name.as_str()) {
                clashes.push(format!(
                    "practice `{}` is in the cycle and cannot also be preamble or concurrent",
                    r.name
                ));
            }
        }
        for msg in clashes {
            self.error(name_span.clone(), msg);
        }
        let m = Method {
            id: ElementId::derive(ElementKind::Method, &name),
            name,
            preamble,
            cycle,
            concurrent,
        };
        let span = self.span(start, self.prev_end());
        self.register(&m.id, span);
        Ok(m)
    }

    fn phase(&mut self) -> PResult<TogafPhaseSpec> {
        let start = self.bump().start;
        let (phase_name, phase_tok) = self.ident("a phase id")?;
        let phase = PhaseId::from_str(&phase_name).unwrap_or_else(|msg| {
            let span = self.token_span(&phase_tok);
            self.error(span, msg);
            PhaseId::P
        });
        let (name, _) = self.string("a phase name")?;
        let mut spec = TogafPhaseSpec::new(phase, name, "");
        let mut objective: Option<String> = None;
        self.lbrace()?;
        loop {
            match self.peek_keyword() {
                Some("objective") => {
                    let kw = self.bump();
                    let (text, _) = self.string("objective text")?;
                    if objective.is_some() {
                        let span = self.token_span(&kw);
                        self.error(span, "togaf_phase has more than one objective");
                    }
                    objective = Some(text);
                }
                Some("step") => {
                    let kw = self.bump();
                    let (step_name, _) = self.string("a step name")?;
                    let goal = self.optional_string("goal")?;
                    self.lbrace()?;
                    let mut activities = Vec::new();
                    while self.at_keyword("activity") {
                        activities.push(self.activity_spec()?);
                    }
                    self.rbrace("`activity` or `}`")?;
                    if spec.steps.iter().any(|s| s.name == step_name) {
                        let span = self.token_span(&kw);
                        self.error(span, format!("duplicate step \"{step_name}\""));
                    }
                    spec.steps.push(StepSpec {
                        name: step_name,
                        goal,
                        activities,
                    });
                }
                Some("output") => {
                    let kw = self.bump();
                    let (out_name, _) = self.string("an output name")?;
                    self.keyword("category")?;
                    let category = self.category()?;
                    let description = self.optional_string("description")?;
                    if spec.outputs.iter().any(|o| o.name == out_name) {
                        let span = self.token_span(&kw);
                        self.error(span, format!("duplicate output \"{out_name}\""));
                    }
                    spec.outputs.push(OutputSpec {
                        name: out_name,
                        category,
                        description,
                    });
                }
                _ => {
                    self.rbrace("`objective`, `step`, `output` or `}`")?;
                    break;
                }
            }
        }
        match objective {
            Some(o) => spec.objective = o,
            None => {
                let span = self.token_span(&phase_tok);
                self.error(span, "togaf_phase requires an objective");
            }
        }
        let span = self.span(start, self.prev_end());
        self.register(&spec.id.clone(), span);
        Ok(spec)
    }

    fn activity_spec(&mut self) -> PResult<ActivitySpec> {
        let kw = self.bump();
        let (name, _) = self.string("an activity name")?;
        let mut spec = ActivitySpec {
            name,
            ..ActivitySpec::default()
        };
        loop {
            match self.peek_keyword() {
                Some("tag") => {
                    self.bump();
                    let tag = self.tag()?;
                    spec.tags.push(tag);
                }
                Some("feeds") => {
                    self.bump();
                    let (text, _) = self.string("an output name")?;
                    spec.feeds.push(Feed::from_text(&text));
                }
                Some("role") => {
                    let role_kw = self.bump();
                    let (r, _) = self.string("a role name")?;
                    if spec.role.is_some() {
                        let span = self.token_span(&role_kw);
                        self.error(span, "activity has more than one role");
                    }
                    spec.role = Some(r);
                }
                _ => break,
            }
        }
        if self.peek().tok == Tok::LBrace {
            let open = self.bump();
            while self.at_keyword("activity") {
                spec.sub_activities.push(self.activity_spec()?);
            }
            self.rbrace("`activity` or `}`")?;
            if spec.sub_activities.is_empty() {
                let span = self.token_span(&open);
                self.error(span, "sub-activity block must not be empty");
            }
        }
        if spec.tags.is_empty() && spec.sub_activities.is_empty() {
            let span = self.span(kw.start, self.prev_end());
            self.error(span, "activity needs at least one tag or a block of sub-activities");
        }
        Ok(spec)
    }
}
