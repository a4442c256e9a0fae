use std::fmt;

use crate::domain::{
    Action, ActionKind, ActionPattern, Components, Fluent, FluentKind, HoldsFact, Ident, Literal, NonOccurrence,
    Occurrence, Slot, Sort,
};

use super::{Diagnostic, ProblemSpec, Span};

/// Parsing failed; every diagnostic carries a line and column.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub diagnostics: Vec<Diagnostic>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.diagnostics.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Name(String),
    Wild,
    Open,
    Close,
    Comma,
    Dot,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Name(n) => write!(f, "`{n}`"),
            Tok::Wild => f.write_str("`_`"),
            Tok::Open => f.write_str("`(`"),
            Tok::Close => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Dot => f.write_str("`.`"),
        }
    }
}

type Spanned = (Tok, Span);

fn lex(text: &str) -> Result<Vec<Spanned>, Diagnostic> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut column) = (1, 1);
    while let Some(&c) = chars.peek() {
        let span = Span { line, column };
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars<'_>>| {
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
            c
        };
        match c {
            '%' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    bump(&mut chars);
                }
            }
            c if c.is_whitespace() => {
                bump(&mut chars);
            }
            '(' | ')' | ',' | '.' => {
                bump(&mut chars);
                let tok = match c {
                    '(' => Tok::Open,
                    ')' => Tok::Close,
                    ',' => Tok::Comma,
                    _ => Tok::Dot,
                };
                out.push((tok, span));
            }
            '_' => {
                bump(&mut chars);
                if matches!(chars.peek(), Some(c) if c.is_ascii_alphanumeric() || *c == '_') {
                    return Err(Diagnostic::error(
                        Some(span),
                        "named variables are not allowed; use `_` for a wildcard",
                    ));
                }
                out.push((Tok::Wild, span));
            }
            c if c.is_ascii_alphabetic() => {
                let mut name = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        name.push(c);
                        bump(&mut chars);
                    } else {
                        break;
                    }
                }
                if !Ident::is_valid(&name) {
                    let msg = if name.starts_with(|c: char| c.is_ascii_uppercase()) {
                        format!("`{name}`: variables are not allowed in facts")
                    } else {
                        format!("`{name}` is not a valid identifier (expected [a-z][a-zA-Z0-9]*)")
                    };
                    return Err(Diagnostic::error(Some(span), msg));
                }
                out.push((Tok::Name(name), span));
            }
            other => {
                return Err(Diagnostic::error(Some(span), format!("unexpected character {other:?}")));
            }
        }
    }
    Ok(out)
}

/// A parsed but uninterpreted term.
#[derive(Debug, Clone)]
enum Term {
    Atom { name: String, args: Vec<Term>, span: Span },
    Wild(Span),
}

impl Term {
    fn span(&self) -> Span {
        match self {
            Term::Atom { span, .. } | Term::Wild(span) => *span,
        }
    }
}

struct Parser<'a> {
    toks: &'a [Spanned],
    pos: usize,
    end: Span,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a Spanned> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<&'a Spanned> {
        let t = self.toks.get(self.pos);
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok) -> Result<Span, Diagnostic> {
        match self.next() {
            Some((t, span)) if *t == want => Ok(*span),
            Some((t, span)) => Err(Diagnostic::error(Some(*span), format!("expected {want}, found {t}"))),
            None => Err(Diagnostic::error(Some(self.end), format!("expected {want}, found end of input"))),
        }
    }

    fn term(&mut self) -> Result<Term, Diagnostic> {
        match self.next() {
            Some((Tok::Wild, span)) => Ok(Term::Wild(*span)),
            Some((Tok::Name(name), span)) => {
                let mut args = Vec::new();
                if matches!(self.peek(), Some((Tok::Open, _))) {
                    self.pos += 1;
                    loop {
                        args.push(self.term()?);
                        match self.next() {
                            Some((Tok::Comma, _)) => continue,
                            Some((Tok::Close, _)) => break,
                            Some((t, s)) => {
                                return Err(Diagnostic::error(Some(*s), format!("expected `,` or `)`, found {t}")))
                            }
                            None => return Err(Diagnostic::error(Some(self.end), "unclosed `(` at end of input")),
                        }
                    }
                }
                Ok(Term::Atom { name: name.clone(), args, span: *span })
            }
            Some((t, span)) => Err(Diagnostic::error(Some(*span), format!("expected a term, found {t}"))),
            None => Err(Diagnostic::error(Some(self.end), "expected a term, found end of input")),
        }
    }

    /// Skips to just past the next `.` after an error.
    fn recover(&mut self) {
        if self.pos > 0 && matches!(self.toks.get(self.pos - 1), Some((Tok::Dot, _))) {
            return;
        }
        while let Some((t, _)) = self.next() {
            if *t == Tok::Dot {
                break;
            }
        }
    }
}

fn err(span: Span, msg: impl Into<String>) -> Diagnostic {
    Diagnostic::error(Some(span), msg)
}

fn ident(term: &Term, what: &str) -> Result<Ident, Diagnostic> {
    match term {
        Term::Atom { name, args, span } => {
            if args.is_empty() {
                Ok(Ident::new(name))
            } else {
                Err(err(*span, format!("expected {what}, found compound term `{name}(..)`")))
            }
        }
        Term::Wild(span) => Err(err(*span, format!("expected {what}, found wildcard `_`"))),
    }
}

fn compound<'t>(term: &'t Term, what: &str) -> Result<(&'t str, &'t [Term], Span), Diagnostic> {
    match term {
        Term::Atom { name, args, span } => Ok((name.as_str(), args.as_slice(), *span)),
        Term::Wild(span) => Err(err(*span, format!("expected {what}, found wildcard `_`"))),
    }
}

fn fluent(term: &Term) -> Result<Fluent, Diagnostic> {
    let (name, args, span) = compound(term, "a fluent")?;
    let kind = FluentKind::from_name(name).ok_or_else(|| err(span, format!("unknown fluent `{name}`")))?;
    if args.len() != kind.arity() {
        return Err(err(span, format!("fluent `{name}` takes {} argument(s), found {}", kind.arity(), args.len())));
    }
    let ids = args.iter().map(|a| ident(a, "an identifier")).collect::<Result<Vec<_>, _>>()?;
    Ok(Fluent::from_parts(kind, ids).expect("arity checked"))
}

fn pattern(term: &Term) -> Result<ActionPattern, Diagnostic> {
    let (name, args, span) = compound(term, "an action")?;
    // Quantified schemas written as dedicated action names in Prolog encodings.
    let (kind, args): (ActionKind, Vec<Slot>) = match name {
        "unsealToAnything" | "loadIntoSomething" => {
            if args.len() != 1 {
                return Err(err(span, format!("`{name}` takes 1 argument, found {}", args.len())));
            }
            let first = Slot::Is(ident(&args[0], "an identifier")?);
            if name == "unsealToAnything" {
                (ActionKind::Unseal, vec![first, Slot::Any, Slot::Any])
            } else {
                (ActionKind::Load, vec![first, Slot::Any])
            }
        }
        _ => {
            let kind = ActionKind::from_name(name).ok_or_else(|| err(span, format!("unknown action `{name}`")))?;
            if args.len() != kind.arity() {
                return Err(err(
                    span,
                    format!("action `{name}` takes {} argument(s), found {}", kind.arity(), args.len()),
                ));
            }
            let slots = args
                .iter()
                .map(|a| match a {
                    Term::Wild(_) => Ok(Slot::Any),
                    t => ident(t, "an identifier or `_`").map(Slot::Is),
                })
                .collect::<Result<Vec<_>, _>>()?;
            (kind, slots)
        }
    };
    Ok(ActionPattern::new(kind, args).expect("arity checked"))
}

fn action(term: &Term) -> Result<Action, Diagnostic> {
    let p = pattern(term)?;
    if !p.is_ground() {
        return Err(err(term.span(), "occurrences must be ground; wildcards are only allowed in notOccurs"));
    }
    let args = p
        .slots
        .into_iter()
        .map(|s| match s {
            Slot::Is(id) => id,
            Slot::Any => unreachable!(),
        })
        .collect();
    Ok(Action::from_parts(p.kind, args).expect("arity checked"))
}

fn arity(head: &str, args: &[Term], n: usize, span: Span) -> Result<(), Diagnostic> {
    if args.len() == n {
        Ok(())
    } else {
        Err(err(span, format!("`{head}` takes {n} argument(s), found {}", args.len())))
    }
}

fn record(spec: &mut ProblemSpec, key: String, span: Span, inserted: bool) {
    if inserted {
        spec.origins.entry(key).or_insert(span);
    } else {
        spec.notes.push(Diagnostic::warning(Some(span), format!("duplicate fact `{key}` merged")));
    }
}

fn statement(spec: &mut ProblemSpec, term: &Term) -> Result<(), Diagnostic> {
    let (head, args, span) = compound(term, "a statement")?;
    if let Some(sort) = Sort::from_keyword(head) {
        arity(head, args, 1, span)?;
        let id = ident(&args[0], "an object identifier")?;
        let key = format!("{head}({id})");
        match spec.signature.objects.get(&id) {
            Some(old) if *old == sort => record(spec, key, span, false),
            Some(old) => return Err(err(span, format!("duplicate sort declaration: `{id}` is already a {old}"))),
            None => {
                spec.signature.objects.insert(id, sort);
                record(spec, key, span, true);
            }
        }
        return Ok(());
    }
    match head {
        "location" => {
            arity(head, args, 1, span)?;
            let id = ident(&args[0], "a location identifier")?;
            let key = format!("location({id})");
            let inserted = spec.signature.locations.insert(id);
            record(spec, key, span, inserted);
        }
        "fresh" => {
            arity(head, args, 1, span)?;
            let id = ident(&args[0], "an identifier")?;
            let key = format!("fresh({id})");
            let inserted = spec.fresh.insert(id);
            record(spec, key, span, inserted);
        }
        "components" => {
            arity(head, args, 3, span)?;
            let c = Components {
                open: ident(&args[0], "an open container")?,
                lid: ident(&args[1], "a lid")?,
                lidded: ident(&args[2], "a lidded container")?,
            };
            let key = format!("components({},{},{})", c.open, c.lid, c.lidded);
            let inserted = spec.signature.components.insert(c);
            record(spec, key, span, inserted);
        }
        "earlier" => {
            arity(head, args, 2, span)?;
            let pair = (ident(&args[0], "a time point")?, ident(&args[1], "a time point")?);
            let key = format!("earlier({},{})", pair.0, pair.1);
            let inserted = spec.earlier.insert(pair);
            record(spec, key, span, inserted);
        }
        "holds" => {
            arity(head, args, 2, span)?;
            let h = HoldsFact { time: ident(&args[0], "a time point")?, fluent: fluent(&args[1])? };
            let key = h.to_string();
            let inserted = spec.holds.insert(h);
            record(spec, key, span, inserted);
        }
        "occurs" => {
            arity(head, args, 3, span)?;
            let o = Occurrence {
                start: ident(&args[0], "a time point")?,
                end: ident(&args[1], "a time point")?,
                action: action(&args[2])?,
            };
            let key = o.to_string();
            let inserted = spec.occurrences.insert(o);
            record(spec, key, span, inserted);
        }
        "notOccurs" => {
            arity(head, args, 3, span)?;
            let n = NonOccurrence {
                start: ident(&args[0], "a time point")?,
                end: ident(&args[1], "a time point")?,
                pattern: pattern(&args[2])?,
            };
            let key = n.to_string();
            let inserted = spec.non_occurrences.insert(n);
            record(spec, key, span, inserted);
        }
        other => return Err(err(span, format!("unknown statement head `{other}`"))),
    }
    Ok(())
}

/// Parses `.ow` text. Comments run from `%` to end of line.
pub fn parse_spec(text: &str) -> Result<ProblemSpec, ParseError> {
    let toks = lex(text).map_err(|d| ParseError { diagnostics: vec![d] })?;
    let end = end_span(text);
    let mut parser = Parser { toks: &toks, pos: 0, end };
    let mut spec = ProblemSpec::default();
    let mut errors = Vec::new();
    while parser.peek().is_some() {
        let result = parser.term().and_then(|t| {
            parser.expect(Tok::Dot)?;
            Ok(t)
        });
        match result {
            Ok(term) => {
                if let Err(d) = statement(&mut spec, &term) {
                    errors.push(d);
                }
            }
            Err(d) => {
                errors.push(d);
                parser.recover();
            }
        }
    }
    if errors.is_empty() {
        Ok(spec)
    } else {
        Err(ParseError { diagnostics: errors })
    }
}

/// Like [`parse_spec`] for raw bytes; invalid UTF-8 is reported as a diagnostic.
pub fn parse_spec_bytes(bytes: &[u8]) -> Result<ProblemSpec, ParseError> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse_spec(text),
        Err(e) => {
            let prefix = &bytes[..e.valid_up_to()];
            let line = 1 + prefix.iter().filter(|&&b| b == b'\n').count();
            let column = 1 + prefix.iter().rev().take_while(|&&b| b != b'\n').count();
            Err(ParseError {
                diagnostics: vec![Diagnostic::error(Some(Span { line, column }), "input is not valid UTF-8")],
            })
        }
    }
}

fn end_span(text: &str) -> Span {
    let line = 1 + text.matches('\n').count();
    let column = 1 + text.rsplit('\n').next().map_or(0, |l| l.chars().count());
    Span { line, column }
}

fn single_term(text: &str) -> Result<Term, ParseError> {
    let wrap = |d| ParseError { diagnostics: vec![d] };
    let toks = lex(text).map_err(wrap)?;
    let mut parser = Parser { toks: &toks, pos: 0, end: end_span(text) };
    let term = parser.term().map_err(wrap)?;
    if let Some((t, span)) = parser.peek() {
        return Err(wrap(err(*span, format!("unexpected {t} after term"))));
    }
    Ok(term)
}

/// Parses a single fluent such as `contained(oa,ow)`.
pub fn parse_fluent(text: &str) -> Result<Fluent, ParseError> {
    fluent(&single_term(text)?).map_err(|d| ParseError { diagnostics: vec![d] })
}

/// Parses a query goal: a fluent, or `not(<fluent>)`.
pub fn parse_literal(text: &str) -> Result<Literal, ParseError> {
    let term = single_term(text)?;
    let wrap = |d| ParseError { diagnostics: vec![d] };
    match &term {
        Term::Atom { name, args, span } if name == "not" => {
            arity("not", args, 1, *span).map_err(wrap)?;
            Ok(Literal::NotHolds(fluent(&args[0]).map_err(wrap)?))
        }
        t => Ok(Literal::Holds(fluent(t).map_err(wrap)?)),
    }
}

/// Parses an action pattern such as `unseal(ow,_,_)`.
pub fn parse_pattern(text: &str) -> Result<ActionPattern, ParseError> {
    pattern(&single_term(text)?).map_err(|d| ParseError { diagnostics: vec![d] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    #[test]
    fn parses_the_running_example() {
        let spec = parse_spec(corpus::B1).unwrap();
        let sig = &spec.signature;
        assert_eq!(sig.objects.len() + sig.components.len() + sig.locations.len(), 6);
        assert_eq!(sig.objects.len(), 4);
        assert_eq!(sig.locations.len(), 1);
        assert_eq!(spec.timeline().unwrap().len(), 4);
        assert_eq!(spec.holds.len(), 6);
        assert_eq!(spec.occurrences.len(), 2);
        assert_eq!(spec.non_occurrences.len(), 1);
        assert!(spec.notes.is_empty());
    }

    #[test]
    fn empty_input_is_an_empty_spec() {
        let spec = parse_spec("").unwrap();
        assert_eq!(spec, ProblemSpec::default());
        let report = super::super::validate_spec(&spec);
        assert!(!report.is_valid());
        assert!(report.errors().any(|d| d.message.contains("no time points declared")));
    }

    #[test]
    fn fluent_arity_error_reports_line() {
        let text = "block(oa).\nlocation(la).\nholds(t0, outsideAt(oa)).\n";
        let e = parse_spec(text).unwrap_err();
        assert_eq!(e.diagnostics.len(), 1);
        assert_eq!(e.diagnostics[0].span.unwrap().line, 3);
        assert!(e.diagnostics[0].message.contains("argument"));
    }

    #[test]
    fn syntax_errors_carry_line_and_column() {
        let e = parse_spec("block(oa).\n  lid(ol\n").unwrap_err();
        let d = &e.diagnostics[0];
        assert!(d.span.is_some());
        let e = parse_spec("block(Oa).").unwrap_err();
        assert_eq!(e.diagnostics[0].span, Some(Span { line: 1, column: 7 }));
        let e = parse_spec("block(oa)").unwrap_err();
        assert!(e.diagnostics[0].message.contains("`.`"));
    }

    #[test]
    fn duplicate_sort_declaration_is_an_error() {
        let e = parse_spec("block(oa). lid(oa).").unwrap_err();
        assert!(e.diagnostics[0].message.contains("duplicate sort declaration"));
    }

    #[test]
    fn identical_duplicates_merge_with_warning() {
        let spec = parse_spec("block(oa). block(oa). location(la). location(la).").unwrap();
        assert_eq!(spec.signature.objects.len(), 1);
        assert_eq!(spec.notes.len(), 2);
        assert!(spec.notes.iter().all(|d| !d.is_error()));
    }

    #[test]
    fn unknown_statement_head() {
        let e = parse_spec("box(oa).").unwrap_err();
        assert!(e.diagnostics[0].message.contains("unknown statement head"));
    }

    #[test]
    fn errors_are_collected_across_statements() {
        let e = parse_spec("box(oa).\nblock(oa).\nfoo(.\nlid(ol).\nholds(t0,effective).").unwrap_err();
        assert_eq!(e.diagnostics.len(), 3);
    }

    #[test]
    fn comments_are_ignored() {
        let spec = parse_spec("% header\nblock(oa). % trailing\n%block(ob).\n").unwrap();
        assert_eq!(spec.signature.objects.len(), 1);
    }

    #[test]
    fn prolog_schema_aliases_desugar_to_wildcards() {
        assert_eq!(parse_pattern("unsealToAnything(ow)").unwrap(), parse_pattern("unseal(ow,_,_)").unwrap());
        assert_eq!(parse_pattern("loadIntoSomething(o)").unwrap(), parse_pattern("load(o,_)").unwrap());
    }

    #[test]
    fn wildcards_rejected_in_occurrences() {
        let e = parse_spec("occurs(t0,t1,load(oa,_)).").unwrap_err();
        assert!(e.diagnostics[0].message.contains("ground"));
    }

    #[test]
    fn literal_goals() {
        assert_eq!(
            parse_literal("not(contained(o,oc))").unwrap(),
            Literal::NotHolds(parse_fluent("contained(o,oc)").unwrap())
        );
        assert!(parse_literal("contained(o,oc) x").is_err());
        assert!(parse_fluent("contained(o)").is_err());
    }

    #[test]
    fn invalid_utf8_is_diagnosed() {
        let e = parse_spec_bytes(b"block(oa).\nlid(\xff).").unwrap_err();
        assert_eq!(e.diagnostics[0].span.unwrap().line, 2);
    }

    mod props {
        use super::*;
        use crate::fuzz::{FuzzConfig, SpecGenerator};
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn parser_never_panics_on_bytes(bytes in prop::collection::vec(any::<u8>(), 0..200)) {
                let _ = parse_spec_bytes(&bytes);
            }

            #[test]
            fn parser_never_panics_on_fact_like_text(
                text in "([a-z_()., %\n]|holds|occurs|notOccurs|block|earlier|load|carry|[A-Z0-9]){0,80}"
            ) {
                let _ = parse_spec(&text);
            }

            #[test]
            fn format_then_parse_round_trips(seed in any::<u64>()) {
                let spec = SpecGenerator::new(FuzzConfig::default(), seed).next_spec().spec;
                let text = spec.to_string();
                let back = parse_spec(&text).unwrap();
                prop_assert_eq!(back, spec);
            }
        }
    }
}
