//! Ehrenfeucht-Fraisse games: the classical `q`-round game, the two-pebble
//! game and its counting variant, the explicit duplicator strategy on
//! constructed order pairs, and interactive play.

mod fo;
mod pebble;
mod play;
mod strategy;

pub use fo::{fo_game_winner, fo_game_winner_capped, DEFAULT_GAME_CAP};
pub use pebble::{counting_game_winner, fo2_game_winner, PebbleGame, DEFAULT_PAIR_CAP};
pub use play::{interactive_play, replay, HumanRole, Transcript};
pub use strategy::{
    check_invariants, duplicator_move, GameKind, GameState, InvariantReport, Response, SpoilerMove,
    StrategyCase, StrategyContext, SweepReport,
};

use std::fmt;

use thiserror::Error;

use crate::locality::LocalityError;
use crate::structure::StructureError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Winner {
    Spoiler,
    Duplicator,
}

impl fmt::Display for Winner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Winner::Spoiler => "spoiler",
            Winner::Duplicator => "duplicator",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("structures have different signatures or order symbols")]
    SignatureMismatch,
    #[error("games on structures with constants are not supported")]
    Constants,
    #[error("search cap exceeded: {needed} > {cap}")]
    CapExceeded { needed: u64, cap: u64 },
    #[error("strategy precondition violated: {0}")]
    Precondition(String),
    #[error("illegal move: {0}")]
    IllegalMove(String),
    #[error("transcript mismatch at line {line}: expected `{expected}`, replay gave `{found}`")]
    ReplayMismatch {
        line: usize,
        expected: String,
        found: String,
    },
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Locality(#[from] LocalityError),
}

/// Names of the two pebbles.
pub const PEBBLES: [&str; 2] = ["x", "y"];
