//! `--fiber` grammar: `[RANK*](b1,b2,...)`, parentheses optional.
//!
//! `(2)` is A itself over `M_2(ℂ)`, `3*(1,2)` is A³ over `ℂ ⊕ M_2(ℂ)`.

use hodge_cstar::{AlgebraSpec, Error, ModuleSpec, Result};

pub fn parse_fiber(text: &str) -> Result<ModuleSpec> {
    let text = text.trim();
    let (rank, blocks) = match text.split_once('*') {
        Some((r, b)) => (parse_count(r, "rank")?, b),
        None => (1, text),
    };
    let blocks = blocks.trim();
    let inner = blocks
        .strip_prefix('(')
        .and_then(|b| b.strip_suffix(')'))
        .unwrap_or(blocks);
    let sizes = inner
        .split(',')
        .map(|b| parse_count(b, "block size"))
        .collect::<Result<Vec<_>>>()?;
    let spec = AlgebraSpec::new(sizes)?;
    Ok(ModuleSpec::free(&spec, rank))
}

fn parse_count(s: &str, what: &str) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("fiber {what} '{}' is not a non-negative integer", s.trim())))
}
