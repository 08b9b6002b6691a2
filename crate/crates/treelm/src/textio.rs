//! Text formats: s-expression trees and whitespace-separated flat sequences.
//!
//! Tree files hold one tree per line as `(name child1 child2 ...)` with
//! leaves as bare atoms; atoms containing whitespace or syntax characters
//! are double-quoted. Flat-sequence files hold whitespace-separated tokens
//! with markers rendered `<name,left>` / `<name,right>`; token text that
//! would collide with the marker syntax or the whitespace separator is
//! backslash-escaped. The in-memory values are canonical; escaping exists
//! only in the textual form.

use crate::ast::{AstTree, FlatToken, TokenKind};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TextError {
    #[error("s-expression parse error at byte {pos}: {message}")]
    Sexpr { pos: usize, message: String },
    #[error("flat token parse error in {token:?}: {message}")]
    FlatToken { token: String, message: String },
}

// ---------------------------------------------------------------------------
// S-expressions
// ---------------------------------------------------------------------------

fn atom_needs_quoting(name: &str) -> bool {
    name.is_empty()
        || name
            .chars()
            .any(|c| c.is_whitespace() || matches!(c, '(' | ')' | '"' | '\\'))
}

fn render_atom(name: &str, out: &mut String) {
    if !atom_needs_quoting(name) {
        out.push_str(name);
        return;
    }
    out.push('"');
    for c in name.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            _ => out.push(c),
        }
    }
    out.push('"');
}

/// Renders a tree as a single-line s-expression.
pub fn render_tree(tree: &AstTree) -> String {
    let mut out = String::new();
    render_tree_into(tree, &mut out);
    out
}

fn render_tree_into(tree: &AstTree, out: &mut String) {
    if tree.is_leaf() {
        render_atom(&tree.name, out);
    } else {
        out.push('(');
        render_atom(&tree.name, out);
        for child in &tree.children {
            out.push(' ');
            render_tree_into(child, out);
        }
        out.push(')');
    }
}

/// Parses one s-expression tree. Trailing content after the tree is an
/// error; `(name)` parses as a leaf named `name`.
pub fn parse_tree(input: &str) -> Result<AstTree, TextError> {
    let bytes: Vec<char> = input.chars().collect();
    let mut pos = 0usize;
    let tree = parse_node(&bytes, &mut pos)?;
    skip_ws(&bytes, &mut pos);
    if pos != bytes.len() {
        return Err(TextError::Sexpr {
            pos,
            message: "trailing content after tree".into(),
        });
    }
    Ok(tree)
}

fn skip_ws(s: &[char], pos: &mut usize) {
    while *pos < s.len() && s[*pos].is_whitespace() {
        *pos += 1;
    }
}

fn parse_node(s: &[char], pos: &mut usize) -> Result<AstTree, TextError> {
    skip_ws(s, pos);
    match s.get(*pos) {
        None => Err(TextError::Sexpr {
            pos: *pos,
            message: "unexpected end of input".into(),
        }),
        Some('(') => {
            *pos += 1;
            skip_ws(s, pos);
            let name = parse_atom(s, pos)?;
            let mut children = Vec::new();
            loop {
                skip_ws(s, pos);
                match s.get(*pos) {
                    Some(')') => {
                        *pos += 1;
                        return Ok(AstTree::node(name, children));
                    }
                    Some(_) => children.push(parse_node(s, pos)?),
                    None => {
                        return Err(TextError::Sexpr {
                            pos: *pos,
                            message: "unclosed parenthesis".into(),
                        })
                    }
                }
            }
        }
        Some(')') => Err(TextError::Sexpr {
            pos: *pos,
            message: "unexpected ')'".into(),
        }),
        Some(_) => Ok(AstTree::leaf(parse_atom(s, pos)?)),
    }
}

fn parse_atom(s: &[char], pos: &mut usize) -> Result<String, TextError> {
    skip_ws(s, pos);
    match s.get(*pos) {
        Some('"') => {
            *pos += 1;
            let mut out = String::new();
            loop {
                match s.get(*pos) {
                    Some('"') => {
                        *pos += 1;
                        return Ok(out);
                    }
                    Some('\\') => {
                        *pos += 1;
                        let c = s.get(*pos).ok_or(TextError::Sexpr {
                            pos: *pos,
                            message: "dangling escape in quoted atom".into(),
                        })?;
                        out.push(match c {
                            'n' => '\n',
                            't' => '\t',
                            'r' => '\r',
                            other => *other,
                        });
                        *pos += 1;
                    }
                    Some(c) => {
                        out.push(*c);
                        *pos += 1;
                    }
                    None => {
                        return Err(TextError::Sexpr {
                            pos: *pos,
                            message: "unterminated quoted atom".into(),
                        })
                    }
                }
            }
        }
        Some(c) if !c.is_whitespace() && !matches!(c, '(' | ')') => {
            let mut out = String::new();
            while let Some(c) = s.get(*pos) {
                if c.is_whitespace() || matches!(c, '(' | ')' | '"') {
                    break;
                }
                out.push(*c);
                *pos += 1;
            }
            Ok(out)
        }
        _ => Err(TextError::Sexpr {
            pos: *pos,
            message: "expected atom".into(),
        }),
    }
}

// ---------------------------------------------------------------------------
// Flat-sequence text
// ---------------------------------------------------------------------------

/// Escapes text so it survives whitespace-separated parsing and cannot be
/// mistaken for a marker. The empty string renders as `\e`.
fn escape_text(text: &str, out: &mut String) {
    if text.is_empty() {
        out.push_str("\\e");
        return;
    }
    for c in text.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            ' ' => out.push_str("\\s"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '<' => out.push_str("\\<"),
            '>' => out.push_str("\\>"),
            ',' => out.push_str("\\,"),
            _ => out.push(c),
        }
    }
}

fn unescape_text(raw: &str) -> Result<String, TextError> {
    if raw == "\\e" {
        return Ok(String::new());
    }
    let mut out = String::new();
    let mut chars = raw.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        let next = chars.next().ok_or_else(|| TextError::FlatToken {
            token: raw.to_string(),
            message: "dangling escape".into(),
        })?;
        out.push(match next {
            's' => ' ',
            't' => '\t',
            'n' => '\n',
            'r' => '\r',
            other => other,
        });
    }
    Ok(out)
}

/// Canonical surface string of a token: markers render `<name,left>` /
/// `<name,right>`, everything else renders its (escaped) text. The same
/// surface form is used in flat-sequence files and as vocabulary keys.
pub fn render_token(tok: &FlatToken) -> String {
    let mut out = String::new();
    match tok.kind {
        TokenKind::NontermLeft => {
            out.push('<');
            escape_text(&tok.name, &mut out);
            out.push_str(",left>");
        }
        TokenKind::NontermRight => {
            out.push('<');
            escape_text(&tok.name, &mut out);
            out.push_str(",right>");
        }
        TokenKind::Special => out.push_str(&tok.name),
        TokenKind::Leaf | TokenKind::Word => escape_text(&tok.name, &mut out),
    }
    out
}

/// Renders a sequence as one whitespace-separated line.
pub fn render_sequence(seq: &[FlatToken]) -> String {
    seq.iter()
        .map(render_token)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Parses one whitespace-separated chunk back into a token. Non-marker
/// chunks are leaves: flat-sequence files carry flattened trees.
pub fn parse_token(chunk: &str) -> Result<FlatToken, TextError> {
    if let Some(rest) = chunk.strip_prefix('<') {
        if let Some(name) = strip_marker_suffix(rest, ",left>") {
            return Ok(FlatToken::left(unescape_text(name)?));
        }
        if let Some(name) = strip_marker_suffix(rest, ",right>") {
            return Ok(FlatToken::right(unescape_text(name)?));
        }
        return Err(TextError::FlatToken {
            token: chunk.to_string(),
            message: "starts with '<' but is not a marker; escape it as \\<".into(),
        });
    }
    Ok(FlatToken::leaf(unescape_text(chunk)?))
}

/// Strips `suffix` only when the preceding character is not an escaping
/// backslash, so `<a\,left\>x,right>` keeps its name intact.
fn strip_marker_suffix<'a>(body: &'a str, suffix: &str) -> Option<&'a str> {
    let name = body.strip_suffix(suffix)?;
    let backslashes = name.chars().rev().take_while(|&c| c == '\\').count();
    if backslashes % 2 == 1 {
        return None;
    }
    Some(name)
}

pub fn parse_sequence(line: &str) -> Result<Vec<FlatToken>, TextError> {
    line.split_whitespace().map(parse_token).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{flatten, random_tree, reconstruct};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn tree_rendering_matches_expected_surface() {
        let t = AstTree::node(
            "parameters",
            vec![
                AstTree::leaf("("),
                AstTree::leaf("data"),
                AstTree::leaf(")"),
            ],
        );
        assert_eq!(render_tree(&t), r#"(parameters "(" data ")")"#);
        assert_eq!(parse_tree(&render_tree(&t)).unwrap(), t);
    }

    #[test]
    fn quoted_atoms_roundtrip() {
        let t = AstTree::node(
            "string literal",
            vec![AstTree::leaf("a b"), AstTree::leaf("quote\"back\\slash")],
        );
        assert_eq!(parse_tree(&render_tree(&t)).unwrap(), t);
    }

    #[test]
    fn parse_tree_rejects_garbage() {
        assert!(parse_tree("").is_err());
        assert!(parse_tree("(a").is_err());
        assert!(parse_tree("a b").is_err());
        assert!(parse_tree(")").is_err());
        assert!(parse_tree("(a \"x)").is_err());
    }

    #[test]
    fn marker_surface_form() {
        assert_eq!(render_token(&FlatToken::left("parameters")), "<parameters,left>");
        assert_eq!(render_token(&FlatToken::right("parameters")), "<parameters,right>");
        assert_eq!(
            render_sequence(&[
                FlatToken::left("parameters"),
                FlatToken::leaf("("),
                FlatToken::leaf("data"),
                FlatToken::leaf(")"),
                FlatToken::right("parameters"),
            ]),
            "<parameters,left> ( data ) <parameters,right>"
        );
    }

    #[test]
    fn colliding_leaf_text_is_escaped() {
        // A leaf whose text looks like a marker must not parse as one.
        let tricky = FlatToken::leaf("<parameters,left>");
        let rendered = render_token(&tricky);
        assert_eq!(parse_token(&rendered).unwrap(), tricky);
        // Whitespace inside a leaf survives a render/parse cycle.
        let spaced = FlatToken::leaf("a b\tc");
        assert_eq!(
            parse_sequence(&render_sequence(&[spaced.clone()])).unwrap(),
            vec![spaced]
        );
        // Empty leaf text.
        let empty = FlatToken::leaf("");
        assert_eq!(parse_token(&render_token(&empty)).unwrap(), empty);
    }

    #[test]
    fn marker_names_with_syntax_characters_roundtrip() {
        for name in ["a,b", "a<b>c", "x\\y", "", "with space"] {
            for tok in [FlatToken::left(name), FlatToken::right(name)] {
                assert_eq!(parse_token(&render_token(&tok)).unwrap(), tok);
            }
        }
    }

    #[test]
    fn flat_text_roundtrips_flattened_trees() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..500 {
            let t = random_tree(&mut rng, 6, 4).unwrap();
            let seq = flatten(&t);
            let parsed = parse_sequence(&render_sequence(&seq)).unwrap();
            assert_eq!(parsed, seq);
            assert_eq!(reconstruct(&parsed).unwrap(), t);
        }
    }

    #[test]
    fn sexpr_roundtrips_random_trees() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..500 {
            let t = random_tree(&mut rng, 6, 4).unwrap();
            assert_eq!(parse_tree(&render_tree(&t)).unwrap(), t);
        }
    }
}
