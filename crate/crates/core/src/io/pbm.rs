//! Plain (`P1`) portable bitmap snapshots of lattice states.
//! `+1` is rendered white (`0`), `-1` black (`1`).

use std::path::Path;

use crate::dynamics::{Opinion, OpinionState};
use crate::error::{Error, Result};

/// Plain PBM lines are limited to 70 characters.
const MAX_LINE: usize = 70;

pub fn render_pbm(state: &OpinionState, side: usize) -> Result<String> {
    if state.len() != side * side {
        return Err(Error::State(format!("{} opinions do not fill a {side}x{side} lattice", state.len())));
    }
    let mut out = format!("P1\n{side} {side}\n");
    for row in state.opinions.chunks(side.max(1)) {
        for chunk in row.chunks(MAX_LINE) {
            out.extend(chunk.iter().map(|&o| if o == Opinion::Plus { '0' } else { '1' }));
            out.push('\n');
        }
    }
    Ok(out)
}

pub fn write_pbm(path: &Path, state: &OpinionState, side: usize) -> Result<()> {
    super::write_file(path, render_pbm(state, side)?.as_bytes())
}
