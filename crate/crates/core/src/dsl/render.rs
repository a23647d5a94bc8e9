use std::fmt::Write;

use super::lexer::{is_ident_continue, is_ident_start};
use crate::metamodel::{
    ActivitySpace, Area, Declaration, Kernel, Method, ModelDocument, Practice, Role, WorkProduct,
};
use crate::togaf::{ActivitySpec, TogafPhaseSpec};

const INDENT: &str = "  ";

/// Canonical text form: two-space indentation, declarations in source
/// order separated by a blank line, LF line endings. Parsing the output
/// yields a structurally equal document.
pub fn render_canonical(model: &ModelDocument) -> String {
    let mut out = String::new();
    for (i, decl) in model.declarations().iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        match decl {
            Declaration::Kernel(k) => kernel(&mut out, k),
            Declaration::Practice(p) => practice(&mut out, p),
            Declaration::Method(m) => method(&mut out, m),
            Declaration::Role(r) => role(&mut out, r),
            Declaration::Phase(ph) => phase(&mut out, ph),
        }
    }
    out
}

/// Renders one practice as a standalone declaration.
pub fn render_practice(p: &Practice) -> String {
    let mut out = String::new();
    practice(&mut out, p);
    out
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\\\""))
}

fn name(s: &str) -> String {
    let mut chars = s.chars();
    let bare = chars.next().is_some_and(is_ident_start) && chars.all(is_ident_continue);
    if bare {
        s.to_string()
    } else {
        quote(s)
    }
}

fn line(out: &mut String, depth: usize, text: &str) {
    for _ in 0..depth {
        out.push_str(INDENT);
    }
    out.push_str(text);
    out.push('\n');
}

fn kernel(out: &mut String, k: &Kernel) {
    line(out, 0, &format!("kernel {} {{", quote(&k.name)));
    for a in &k.areas {
        line(out, 1, &format!("area {} color {}", a.name(), a.color()));
    }
    for c in &k.competencies {
        let mut s = format!("competency {} area {}", name(&c.name), c.area);
        if c.max_level != crate::metamodel::MAX_LEVEL {
            let _ = write!(s, " levels {}", c.max_level);
        }
        line(out, 1, &s);
    }
    for a in &k.alphas {
        line(out, 1, &format!("alpha {} area {} {{", name(&a.name), a.area));
        for s in &a.states {
            line(out, 2, &format!("state {} {{", name(&s.name)));
            for item in &s.checklist {
                line(out, 3, &format!("check {}", quote(item)));
            }
            line(out, 2, "}");
        }
        line(out, 1, "}");
    }
    for s in &k.spaces {
        line(out, 1, &format!("space {} area {}", quote(&s.name), s.area));
        if let Some(parent) = &s.parent {
            line(out, 2, &format!("in {}", quote(&parent.name)));
        }
        if let Some(goal) = &s.goal {
            line(out, 2, &format!("goal {}", quote(goal)));
        }
    }
    for w in &k.work_products {
        work_product(out, 1, w);
    }
    line(out, 0, "}");
}

fn work_product(out: &mut String, depth: usize, w: &WorkProduct) {
    line(out, depth, &format!("workproduct {} category {}", quote(&w.name), w.category));
    if let Some(d) = &w.description {
        line(out, depth + 1, &format!("description {}", quote(d)));
    }
}

fn role(out: &mut String, r: &Role) {
    line(out, 0, &format!("role {} {{", quote(&r.name)));
    for c in &r.competencies {
        line(out, 1, &format!("competency {} @ {}", name(&c.competency.name), c.level));
    }
    line(out, 0, "}");
}

fn practice(out: &mut String, p: &Practice) {
    line(out, 0, &format!("practice {} area {} {{", quote(&p.name), p.area));
    for g in &p.goals {
        line(out, 1, &format!("goal {}", quote(g)));
    }
    for i in &p.inputs {
        line(out, 1, &format!("input {}", quote(i)));
    }
    for w in &p.work_products {
        work_product(out, 1, w);
    }
    for o in &p.outputs {
        line(out, 1, &format!("output {}", quote(&o.name)));
    }
    for s in p.top_level_spaces() {
        space(out, 1, p, s, p.area);
    }
    line(out, 0, "}");
}

fn space(out: &mut String, depth: usize, p: &Practice, s: &ActivitySpace, inherited: Area) {
    let mut header = format!("space {}", quote(&s.name));
    if s.area != inherited {
        let _ = write!(header, " area {}", s.area);
    }
    if let Some(goal) = &s.goal {
        let _ = write!(header, " goal {}", quote(goal));
    }
    let mut activities = p.activities_in(&s.id).peekable();
    let mut children = p.child_spaces(&s.id).peekable();
    if activities.peek().is_none() && children.peek().is_none() {
        line(out, depth, &format!("{header} {{}}"));
        return;
    }
    line(out, depth, &format!("{header} {{"));
    for a in activities {
        line(out, depth + 1, &format!("activity {}", quote(&a.name)));
        for r in &a.required_competencies {
            line(out, depth + 2, &format!("requires {} @ {}", name(&r.competency.name), r.level));
        }
        for c in &a.produces {
            line(out, depth + 2, &format!("produces {}", quote(&c.rendered_name())));
        }
        if let Some(role) = &a.responsible_role {
            line(out, depth + 2, &format!("role {}", quote(&role.name)));
        }
        for t in &a.tags {
            line(out, depth + 2, &format!("tag {t}"));
        }
    }
    for c in children {
        space(out, depth + 1, p, c, s.area);
    }
    line(out, depth, "}");
}

fn method(out: &mut String, m: &Method) {
    line(out, 0, &format!("method {} {{", quote(&m.name)));
    if let Some(p) = &m.preamble {
        line(out, 1, &format!("preamble {}", quote(&p.name)));
    }
    for c in &m.cycle {
        line(out, 1, &format!("cycle {}", quote(&c.name)));
    }
    for c in &m.concurrent {
        line(out, 1, &format!("concurrent {}", quote(&c.name)));
    }
    line(out, 0, "}");
}

fn phase(out: &mut String, ph: &TogafPhaseSpec) {
    line(out, 0, &format!("togaf_phase {} {} {{", ph.phase, quote(&ph.name)));
    line(out, 1, &format!("objective {}", quote(&ph.objective)));
    for s in &ph.steps {
        let mut header = format!("step {}", quote(&s.name));
        if let Some(goal) = &s.goal {
            let _ = write!(header, " goal {}", quote(goal));
        }
        if s.activities.is_empty() {
            line(out, 1, &format!("{header} {{}}"));
            continue;
        }
        line(out, 1, &format!("{header} {{"));
        for a in &s.activities {
            activity_spec(out, 2, a);
        }
        line(out, 1, "}");
    }
    for o in &ph.outputs {
        line(out, 1, &format!("output {} category {}", quote(&o.name), o.category));
        if let Some(d) = &o.description {
            line(out, 2, &format!("description {}", quote(d)));
        }
    }
    line(out, 0, "}");
}

fn activity_spec(out: &mut String, depth: usize, a: &ActivitySpec) {
    if a.sub_activities.is_empty() {
        line(out, depth, &format!("activity {}", quote(&a.name)));
        for t in &a.tags {
            line(out, depth + 1, &format!("tag {t}"));
        }
        for f in &a.feeds {
            line(out, depth + 1, &format!("feeds {}", quote(&f.text())));
        }
        if let Some(r) = &a.role {
            line(out, depth + 1, &format!("role {}", quote(r)));
        }
        return;
    }
    let mut header = format!("activity {}", quote(&a.name));
    for t in &a.tags {
        let _ = write!(header, " tag {t}");
    }
    for f in &a.feeds {
        let _ = write!(header, " feeds {}", quote(&f.text()));
    }
    if let Some(r) = &a.role {
        let _ = write!(header, " role {}", quote(r));
    }
    line(out, depth, &format!("{header} {{"));
    for sub in &a.sub_activities {
        activity_spec(out, depth + 1, sub);
    }
    line(out, depth, "}");
}
