//! Source-to-tree frontend and model-input assembly.
//!
//! The built-in toy language is deliberately small. Its grammar, shared
//! by both dialects (which differ only in keyword spellings, the
//! assignment operator, and node names):
//!
//! ```text
//! module      := item+
//! item        := function | statement
//! function    := DEF name parameters ":" body
//! parameters  := "(" [name ("," name)*] ")"
//! body        := statement (";" statement)*
//! statement   := assignment | return_stmt | expr_stmt
//! assignment  := name ASSIGN expression
//! return_stmt := RETURN expression
//! expr_stmt   := expression
//! expression  := term (("+"|"-") term)*
//! term        := factor (("*"|"/") factor)*
//! factor      := NUMBER | name [arguments] | "(" expression ")" | "-" factor
//! arguments   := "(" [expression ("," expression)*] ")"
//! ```
//!
//! Every source token, keywords and punctuation included, becomes a leaf,
//! so the leaf frontier of a parse tree is exactly the lexed token
//! stream. Real-language trees enter the pipeline pre-parsed through the
//! corpus record format instead.

use crate::ast::{AstTree, FlatToken};
use crate::textio::{parse_tree, render_tree, TextError};
use crate::vocab;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FrontendError {
    #[error("parse error at line {line}, column {column}: {message}")]
    ParseError {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("format error: {0}")]
    FormatError(String),
    #[error("encoder-decoder input requires a target sequence")]
    MissingTarget,
    #[error("mode {0:?} does not accept a target sequence")]
    UnexpectedTarget(Mode),
    #[error("maximum length {0} cannot hold even the mode prefix")]
    OverLength(usize),
}

impl From<TextError> for FrontendError {
    fn from(e: TextError) -> Self {
        FrontendError::FormatError(e.to_string())
    }
}

// ---------------------------------------------------------------------------
// Toy language, two dialects
// ---------------------------------------------------------------------------

/// The two surface dialects of the toy language. They share the grammar
/// shape but have disjoint keywords, assignment operators, and node
/// names, so cross-dialect retrieval cannot succeed on surface overlap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dialect {
    Alpha,
    Beta,
}

struct DialectTable {
    def_kw: &'static str,
    return_kw: &'static str,
    assign_op: &'static str,
    n_module: &'static str,
    n_function: &'static str,
    n_parameters: &'static str,
    n_body: &'static str,
    n_assignment: &'static str,
    n_return: &'static str,
    n_expr_stmt: &'static str,
    n_binary: &'static str,
    n_unary: &'static str,
    n_call: &'static str,
    n_arguments: &'static str,
    n_paren: &'static str,
}

const ALPHA: DialectTable = DialectTable {
    def_kw: "def",
    return_kw: "return",
    assign_op: "=",
    n_module: "module",
    n_function: "function_def",
    n_parameters: "parameters",
    n_body: "body",
    n_assignment: "assignment",
    n_return: "return_statement",
    n_expr_stmt: "expression_statement",
    n_binary: "binary_expression",
    n_unary: "unary_expression",
    n_call: "call",
    n_arguments: "arguments",
    n_paren: "paren_expression",
};

const BETA: DialectTable = DialectTable {
    def_kw: "fn",
    return_kw: "give",
    assign_op: ":=",
    n_module: "program",
    n_function: "fn_decl",
    n_parameters: "param_list",
    n_body: "fn_body",
    n_assignment: "let_binding",
    n_return: "give_statement",
    n_expr_stmt: "expr_statement",
    n_binary: "infix_expr",
    n_unary: "prefix_expr",
    n_call: "invoke",
    n_arguments: "invoke_args",
    n_paren: "group_expr",
};

impl Dialect {
    fn table(self) -> &'static DialectTable {
        match self {
            Dialect::Alpha => &ALPHA,
            Dialect::Beta => &BETA,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TokKind {
    Name,
    Number,
    Punct,
    DefKw,
    ReturnKw,
    Assign,
}

#[derive(Debug, Clone)]
struct Tok {
    text: String,
    kind: TokKind,
    line: usize,
    column: usize,
}

/// Splits source text into tokens. Token text is kept verbatim; the leaf
/// frontier of the parse tree reproduces this stream exactly.
pub fn lex(source: &str, dialect: Dialect) -> Result<Vec<String>, FrontendError> {
    Ok(lex_toks(source, dialect)?.into_iter().map(|t| t.text).collect())
}

fn lex_toks(source: &str, dialect: Dialect) -> Result<Vec<Tok>, FrontendError> {
    let table = dialect.table();
    let chars: Vec<char> = source.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    let mut line = 1;
    let mut column = 1;
    let mut bump = |c: char, line: &mut usize, column: &mut usize| {
        if c == '\n' {
            *line += 1;
            *column = 1;
        } else {
            *column += 1;
        }
    };
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            bump(c, &mut line, &mut column);
            i += 1;
            continue;
        }
        let start_line = line;
        let start_col = column;
        if c.is_ascii_alphabetic() || c == '_' {
            let mut text = String::new();
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                text.push(chars[i]);
                bump(chars[i], &mut line, &mut column);
                i += 1;
            }
            let kind = if text == table.def_kw {
                TokKind::DefKw
            } else if text == table.return_kw {
                TokKind::ReturnKw
            } else {
                TokKind::Name
            };
            toks.push(Tok {
                text,
                kind,
                line: start_line,
                column: start_col,
            });
            continue;
        }
        if c.is_ascii_digit() {
            let mut text = String::new();
            while i < chars.len() && chars[i].is_ascii_digit() {
                text.push(chars[i]);
                bump(chars[i], &mut line, &mut column);
                i += 1;
            }
            toks.push(Tok {
                text,
                kind: TokKind::Number,
                line: start_line,
                column: start_col,
            });
            continue;
        }
        // Two-character assignment operator (Beta's ":=").
        if table.assign_op.len() == 2 && i + 1 < chars.len() {
            let pair: String = chars[i..i + 2].iter().collect();
            if pair == table.assign_op {
                toks.push(Tok {
                    text: pair,
                    kind: TokKind::Assign,
                    line: start_line,
                    column: start_col,
                });
                bump(chars[i], &mut line, &mut column);
                bump(chars[i + 1], &mut line, &mut column);
                i += 2;
                continue;
            }
        }
        let single = c.to_string();
        let kind = if single == table.assign_op {
            TokKind::Assign
        } else if matches!(c, '(' | ')' | ',' | ':' | ';' | '+' | '-' | '*' | '/') {
            TokKind::Punct
        } else {
            return Err(FrontendError::ParseError {
                line: start_line,
                column: start_col,
                message: format!("unexpected character {c:?}"),
            });
        };
        toks.push(Tok {
            text: single,
            kind,
            line: start_line,
            column: start_col,
        });
        bump(c, &mut line, &mut column);
        i += 1;
    }
    Ok(toks)
}

struct Parser<'a> {
    toks: Vec<Tok>,
    pos: usize,
    table: &'a DialectTable,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn peek_is_punct(&self, text: &str) -> bool {
        matches!(self.peek(), Some(t) if t.kind == TokKind::Punct && t.text == text)
    }

    fn error_here(&self, message: impl Into<String>) -> FrontendError {
        match self.peek() {
            Some(t) => FrontendError::ParseError {
                line: t.line,
                column: t.column,
                message: message.into(),
            },
            None => {
                let (line, column) = self
                    .toks
                    .last()
                    .map(|t| (t.line, t.column + t.text.chars().count()))
                    .unwrap_or((1, 1));
                FrontendError::ParseError {
                    line,
                    column,
                    message: format!("{} (at end of input)", message.into()),
                }
            }
        }
    }

    fn take(&mut self) -> Result<Tok, FrontendError> {
        let t = self
            .peek()
            .cloned()
            .ok_or_else(|| self.error_here("unexpected end of input"))?;
        self.pos += 1;
        Ok(t)
    }

    fn expect_punct(&mut self, text: &str) -> Result<AstTree, FrontendError> {
        if self.peek_is_punct(text) {
            Ok(AstTree::leaf(self.take()?.text))
        } else {
            Err(self.error_here(format!("expected {text:?}")))
        }
    }

    fn expect_name(&mut self) -> Result<AstTree, FrontendError> {
        match self.peek() {
            Some(t) if t.kind == TokKind::Name => Ok(AstTree::leaf(self.take()?.text)),
            _ => Err(self.error_here("expected identifier")),
        }
    }

    fn module(&mut self) -> Result<AstTree, FrontendError> {
        if self.peek().is_none() {
            return Err(self.error_here("empty input"));
        }
        let mut items = Vec::new();
        while self.peek().is_some() {
            items.push(self.item()?);
        }
        Ok(AstTree::node(self.table.n_module, items))
    }

    fn item(&mut self) -> Result<AstTree, FrontendError> {
        if matches!(self.peek(), Some(t) if t.kind == TokKind::DefKw) {
            self.function()
        } else {
            self.statement()
        }
    }

    fn function(&mut self) -> Result<AstTree, FrontendError> {
        let def = AstTree::leaf(self.take()?.text);
        let name = self.expect_name()?;
        let params = self.parameters()?;
        let colon = self.expect_punct(":")?;
        let body = self.body()?;
        Ok(AstTree::node(
            self.table.n_function,
            vec![def, name, params, colon, body],
        ))
    }

    fn parameters(&mut self) -> Result<AstTree, FrontendError> {
        let mut children = vec![self.expect_punct("(")?];
        if !self.peek_is_punct(")") {
            children.push(self.expect_name()?);
            while self.peek_is_punct(",") {
                children.push(self.expect_punct(",")?);
                children.push(self.expect_name()?);
            }
        }
        children.push(self.expect_punct(")")?);
        Ok(AstTree::node(self.table.n_parameters, children))
    }

    fn body(&mut self) -> Result<AstTree, FrontendError> {
        let mut children = vec![self.statement()?];
        while self.peek_is_punct(";") {
            children.push(self.expect_punct(";")?);
            children.push(self.statement()?);
        }
        Ok(AstTree::node(self.table.n_body, children))
    }

    fn statement(&mut self) -> Result<AstTree, FrontendError> {
        match self.peek() {
            Some(t) if t.kind == TokKind::ReturnKw => {
                let kw = AstTree::leaf(self.take()?.text);
                let expr = self.expression()?;
                Ok(AstTree::node(self.table.n_return, vec![kw, expr]))
            }
            Some(t) if t.kind == TokKind::Name => {
                // Assignment needs two tokens of lookahead: name ASSIGN.
                if matches!(self.toks.get(self.pos + 1), Some(n) if n.kind == TokKind::Assign) {
                    let name = self.expect_name()?;
                    let op = AstTree::leaf(self.take()?.text);
                    let expr = self.expression()?;
                    Ok(AstTree::node(self.table.n_assignment, vec![name, op, expr]))
                } else {
                    let expr = self.expression()?;
                    Ok(AstTree::node(self.table.n_expr_stmt, vec![expr]))
                }
            }
            Some(t) if t.kind == TokKind::DefKw => {
                Err(self.error_here("function definitions cannot appear inside a body"))
            }
            _ => {
                let expr = self.expression()?;
                Ok(AstTree::node(self.table.n_expr_stmt, vec![expr]))
            }
        }
    }

    fn expression(&mut self) -> Result<AstTree, FrontendError> {
        let mut node = self.term()?;
        while self.peek_is_punct("+") || self.peek_is_punct("-") {
            let op = AstTree::leaf(self.take()?.text);
            let rhs = self.term()?;
            node = AstTree::node(self.table.n_binary, vec![node, op, rhs]);
        }
        Ok(node)
    }

    fn term(&mut self) -> Result<AstTree, FrontendError> {
        let mut node = self.factor()?;
        while self.peek_is_punct("*") || self.peek_is_punct("/") {
            let op = AstTree::leaf(self.take()?.text);
            let rhs = self.factor()?;
            node = AstTree::node(self.table.n_binary, vec![node, op, rhs]);
        }
        Ok(node)
    }

    fn factor(&mut self) -> Result<AstTree, FrontendError> {
        match self.peek() {
            Some(t) if t.kind == TokKind::Number => Ok(AstTree::leaf(self.take()?.text)),
            Some(t) if t.kind == TokKind::Name => {
                let name = self.expect_name()?;
                if self.peek_is_punct("(") {
                    let args = self.arguments()?;
                    Ok(AstTree::node(self.table.n_call, vec![name, args]))
                } else {
                    Ok(name)
                }
            }
            Some(t) if t.kind == TokKind::Punct && t.text == "(" => {
                let open = self.expect_punct("(")?;
                let expr = self.expression()?;
                let close = self.expect_punct(")")?;
                Ok(AstTree::node(self.table.n_paren, vec![open, expr, close]))
            }
            Some(t) if t.kind == TokKind::Punct && t.text == "-" => {
                let op = self.expect_punct("-")?;
                let operand = self.factor()?;
                Ok(AstTree::node(self.table.n_unary, vec![op, operand]))
            }
            _ => Err(self.error_here("expected expression")),
        }
    }

    fn arguments(&mut self) -> Result<AstTree, FrontendError> {
        let mut children = vec![self.expect_punct("(")?];
        if !self.peek_is_punct(")") {
            children.push(self.expression()?);
            while self.peek_is_punct(",") {
                children.push(self.expect_punct(",")?);
                children.push(self.expression()?);
            }
        }
        children.push(self.expect_punct(")")?);
        Ok(AstTree::node(self.table.n_arguments, children))
    }
}

/// Parses toy-language source in the given dialect.
pub fn parse_dialect(source: &str, dialect: Dialect) -> Result<AstTree, FrontendError> {
    let toks = lex_toks(source, dialect)?;
    if toks.is_empty() {
        return Err(FrontendError::ParseError {
            line: 1,
            column: 1,
            message: "empty input".into(),
        });
    }
    let mut p = Parser {
        toks,
        pos: 0,
        table: dialect.table(),
    };
    p.module()
}

/// Parses toy-language source in the default (Alpha) dialect.
pub fn parse_toy(source: &str) -> Result<AstTree, FrontendError> {
    parse_dialect(source, Dialect::Alpha)
}

// ---------------------------------------------------------------------------
// Corpus records
// ---------------------------------------------------------------------------

/// A comment/tree pair with its language tag. The tree's leaf frontier is
/// the code token stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeDocument {
    pub comment: String,
    pub tree: AstTree,
    pub language_tag: String,
}

/// One corpus line: a document plus optional problem (semantic cluster)
/// metadata used by the retrieval harness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusRecord {
    pub doc: CodeDocument,
    pub problem: Option<String>,
}

fn escape_field(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            _ => out.push(c),
        }
    }
    out
}

fn unescape_field(s: &str) -> Result<String, FrontendError> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some(other) => out.push(other),
            None => return Err(FrontendError::FormatError("dangling escape".into())),
        }
    }
    Ok(out)
}

/// Renders a record as one corpus line:
/// `lang=<tag>\tcomment=<escaped>[\tproblem=<id>]\ttree=<s-expression>`.
pub fn render_record(record: &CorpusRecord) -> String {
    let mut out = format!(
        "lang={}\tcomment={}",
        escape_field(&record.doc.language_tag),
        escape_field(&record.doc.comment)
    );
    if let Some(problem) = &record.problem {
        out.push_str("\tproblem=");
        out.push_str(&escape_field(problem));
    }
    out.push_str("\ttree=");
    out.push_str(&render_tree(&record.doc.tree));
    out
}

/// Parses one corpus line. Fields may appear in any order; `lang`,
/// `comment`, and `tree` are required.
pub fn parse_record(line: &str) -> Result<CorpusRecord, FrontendError> {
    let mut lang = None;
    let mut comment = None;
    let mut problem = None;
    let mut tree = None;
    for field in line.split('\t') {
        let (key, value) = field.split_once('=').ok_or_else(|| {
            FrontendError::FormatError(format!("field {field:?} is not key=value"))
        })?;
        match key {
            "lang" => lang = Some(unescape_field(value)?),
            "comment" => comment = Some(unescape_field(value)?),
            "problem" => problem = Some(unescape_field(value)?),
            "tree" => tree = Some(parse_tree(value)?),
            other => {
                return Err(FrontendError::FormatError(format!(
                    "unknown field key {other:?}"
                )))
            }
        }
    }
    Ok(CorpusRecord {
        doc: CodeDocument {
            comment: comment
                .ok_or_else(|| FrontendError::FormatError("missing comment field".into()))?,
            tree: tree.ok_or_else(|| FrontendError::FormatError("missing tree field".into()))?,
            language_tag: lang
                .ok_or_else(|| FrontendError::FormatError("missing lang field".into()))?,
        },
        problem,
    })
}

/// Decodes one serialized record into a document, discarding retrieval
/// metadata.
pub fn load_tree(serialized: &[u8]) -> Result<CodeDocument, FrontendError> {
    let text = std::str::from_utf8(serialized)
        .map_err(|e| FrontendError::FormatError(format!("invalid UTF-8: {e}")))?;
    Ok(parse_record(text.trim_end_matches(['\n', '\r']))?.doc)
}

/// Parses a whole corpus file (one record per line, blank lines skipped).
pub fn parse_corpus(contents: &str) -> Result<Vec<CorpusRecord>, FrontendError> {
    contents
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            parse_record(l).map_err(|e| {
                FrontendError::FormatError(format!("line {}: {e}", i + 1))
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Model-input assembly
// ---------------------------------------------------------------------------

/// Work mode selected by the sequence's leading prefix token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Enc,
    Dec,
    E2d,
}

impl Mode {
    pub fn prefix_surface(self) -> &'static str {
        match self {
            Mode::Enc => vocab::ENC,
            Mode::Dec => vocab::DEC,
            Mode::E2d => vocab::E2D,
        }
    }

    pub fn prefix_token(self) -> FlatToken {
        FlatToken::special(self.prefix_surface())
    }
}

/// An assembled input: `[prefix] source ++ target`. The prefix token is
/// always first in the serialized form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelInput {
    pub prefix: Mode,
    pub source_tokens: Vec<FlatToken>,
    pub target_tokens: Option<Vec<FlatToken>>,
}

impl ModelInput {
    /// Full token sequence: prefix, then source, then target (if any).
    pub fn full_sequence(&self) -> Vec<FlatToken> {
        let mut seq = Vec::with_capacity(self.len());
        seq.push(self.prefix.prefix_token());
        seq.extend(self.source_tokens.iter().cloned());
        if let Some(t) = &self.target_tokens {
            seq.extend(t.iter().cloned());
        }
        seq
    }

    /// Length of the source block including the prefix token.
    pub fn source_len(&self) -> usize {
        1 + self.source_tokens.len()
    }

    pub fn target_len(&self) -> usize {
        self.target_tokens.as_ref().map_or(0, Vec::len)
    }

    pub fn len(&self) -> usize {
        self.source_len() + self.target_len()
    }

    pub fn is_empty(&self) -> bool {
        false // the prefix token is always present
    }
}

/// Splits a comment into word tokens on whitespace; no normalization.
pub fn tokenize_comment(comment: &str) -> Vec<FlatToken> {
    comment.split_whitespace().map(FlatToken::word).collect()
}

/// Lays out `[prefix] comment [SEP] ast (++ target)` and truncates to
/// `max_len`, dropping from the tail of the AST segment first, then the
/// comment, then the separator, then the target tail. The prefix always
/// survives; only a limit that cannot hold it is an error.
pub fn assemble_input(
    mode: Mode,
    comment_tokens: &[FlatToken],
    flat_ast_tokens: &[FlatToken],
    target_tokens: Option<Vec<FlatToken>>,
    max_len: usize,
) -> Result<ModelInput, FrontendError> {
    if mode == Mode::E2d && target_tokens.is_none() {
        return Err(FrontendError::MissingTarget);
    }
    if mode != Mode::E2d && target_tokens.is_some() {
        return Err(FrontendError::UnexpectedTarget(mode));
    }
    if max_len < 1 {
        return Err(FrontendError::OverLength(max_len));
    }
    let mut comment: Vec<FlatToken> = comment_tokens.to_vec();
    let mut ast: Vec<FlatToken> = flat_ast_tokens.to_vec();
    let mut sep = true;
    let mut target = target_tokens;

    let total = |c: &Vec<FlatToken>, a: &Vec<FlatToken>, sep: bool, t: &Option<Vec<FlatToken>>| {
        1 + c.len() + usize::from(sep) + a.len() + t.as_ref().map_or(0, Vec::len)
    };
    let mut over = total(&comment, &ast, sep, &target).saturating_sub(max_len);
    if over > 0 {
        let cut = over.min(ast.len());
        ast.truncate(ast.len() - cut);
        over -= cut;
    }
    if over > 0 {
        let cut = over.min(comment.len());
        comment.truncate(comment.len() - cut);
        over -= cut;
    }
    if over > 0 {
        sep = false;
        over -= 1;
    }
    if over > 0 {
        if let Some(t) = &mut target {
            let cut = over.min(t.len());
            t.truncate(t.len() - cut);
        }
    }
    debug_assert!(total(&comment, &ast, sep, &target) <= max_len);

    let mut source_tokens = comment;
    if sep {
        source_tokens.push(FlatToken::special(vocab::SEP));
    }
    source_tokens.extend(ast);
    Ok(ModelInput {
        prefix: mode,
        source_tokens,
        target_tokens: target,
    })
}
