//! Interactive two-pebble play against the exact solver, with a replayable transcript.
//!
//! Transcript lines: `duplicator x0 y0 x1 y1` (initial placement),
//! `round <n> spoiler <structure> <pebble> <element>`, `duplicator <element>`,
//! an optional `R_<r> violated: ...` line, and `winner <player>`.

use std::collections::VecDeque;
use std::io::{BufRead, Write};

use super::{GameError, PebbleGame, Winner, PEBBLES};
use crate::structure::{vocab_literal_names, Element, OrderAtom, Structure};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HumanRole {
    Spoiler,
    Duplicator,
    /// Both sides played by the solver.
    Nobody,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    pub lines: Vec<String>,
    pub winner: Winner,
}

impl Transcript {
    pub fn to_text(&self) -> String {
        let mut out = self.lines.join("\n");
        out.push('\n');
        out
    }
}

type Move = (usize, usize, Element);

enum Agent<'a> {
    Machine(&'a PebbleGame),
    Human(&'a mut dyn BufRead, &'a mut dyn Write),
    Script(VecDeque<Vec<String>>),
}

fn io_err(e: std::io::Error) -> GameError {
    GameError::Io(e.to_string())
}

impl Agent<'_> {
    /// Reads lines until `parse` accepts one; invalid input is re-prompted.
    fn ask<T>(&mut self, prompt: &str, parse: impl Fn(&[&str]) -> Result<T, String>) -> Result<T, GameError> {
        let Agent::Human(input, output) = self else {
            unreachable!("only human agents are prompted");
        };
        loop {
            write!(output, "{prompt}> ").map_err(io_err)?;
            output.flush().map_err(io_err)?;
            let mut line = String::new();
            if input.read_line(&mut line).map_err(io_err)? == 0 {
                return Err(GameError::Io("input ended".into()));
            }
            let words: Vec<&str> = line.split_whitespace().collect();
            match parse(&words) {
                Ok(v) => return Ok(v),
                Err(msg) => writeln!(output, "invalid input: {msg}; try again").map_err(io_err)?,
            }
        }
    }

    fn next_script(&mut self, what: &str) -> Result<Vec<String>, GameError> {
        let Agent::Script(q) = self else {
            unreachable!("only scripts are read");
        };
        q.pop_front()
            .ok_or_else(|| GameError::Io(format!("transcript has no {what} line")))
    }

    fn place(&mut self, sizes: [usize; 2], rounds: usize) -> Result<[[Element; 2]; 2], GameError> {
        let parse = |w: &[&str]| -> Result<[[Element; 2]; 2], String> {
            if w.len() != 4 {
                return Err("expected four elements x0 y0 x1 y1".into());
            }
            let v: Vec<Element> = w
                .iter()
                .enumerate()
                .map(|(i, s)| element(s, sizes[i / 2]))
                .collect::<Result<_, _>>()?;
            Ok([[v[0], v[1]], [v[2], v[3]]])
        };
        match self {
            Agent::Machine(game) => Ok((0..=rounds)
                .rev()
                .find_map(|r| game.initial_placement(r))
                .unwrap_or([[0, 0], [0, 0]])),
            Agent::Human(..) => self.ask("place x0 y0 x1 y1", parse),
            Agent::Script(_) => {
                let w = self.next_script("placement")?;
                let words: Vec<&str> = w.iter().map(String::as_str).collect();
                parse(&words).map_err(GameError::IllegalMove)
            }
        }
    }

    fn spoil(&mut self, sizes: [usize; 2], pebbles: [[Element; 2]; 2], r: usize, round: usize) -> Result<Move, GameError> {
        let parse = |w: &[&str]| -> Result<Move, String> {
            if w.len() != 3 {
                return Err("expected <structure> <pebble> <element>".into());
            }
            let side = match w[0] {
                "0" => 0,
                "1" => 1,
                s => return Err(format!("structure must be 0 or 1, got {s}")),
            };
            let pebble = match w[1] {
                "x" | "0" => 0,
                "y" | "1" => 1,
                s => return Err(format!("pebble must be x or y, got {s}")),
            };
            Ok((side, pebble, element(w[2], sizes[side])?))
        };
        match self {
            Agent::Machine(game) => Ok(game.spoiler_move(pebbles, r).unwrap_or((0, 0, 0))),
            Agent::Human(..) => self.ask(
                &format!("round {round}, {}; spoiler: structure pebble element", positions(pebbles)),
                parse,
            ),
            Agent::Script(_) => {
                let w = self.next_script("spoiler")?;
                let words: Vec<&str> = w.iter().map(String::as_str).collect();
                parse(&words).map_err(GameError::IllegalMove)
            }
        }
    }

    fn reply(&mut self, sizes: [usize; 2], pebbles: [[Element; 2]; 2], r: usize, mv: Move) -> Result<Element, GameError> {
        let (side, pebble, e) = mv;
        let other = 1 - side;
        let parse = |w: &[&str]| -> Result<Element, String> {
            match w {
                [s] => element(s, sizes[other]),
                _ => Err("expected one element".into()),
            }
        };
        match self {
            Agent::Machine(game) => Ok(game.duplicator_reply(pebbles, r, side, pebble, e).unwrap_or(0)),
            Agent::Human(..) => self.ask(
                &format!(
                    "{}; spoiler moved {} to {e} in structure {side}; duplicator: element of structure {other}",
                    positions(pebbles),
                    PEBBLES[pebble]
                ),
                parse,
            ),
            Agent::Script(_) => {
                let w = self.next_script("duplicator")?;
                let words: Vec<&str> = w.iter().map(String::as_str).collect();
                parse(&words).map_err(GameError::IllegalMove)
            }
        }
    }
}

fn positions(p: [[Element; 2]; 2]) -> String {
    format!("x0={} y0={} x1={} y1={}", p[0][0], p[0][1], p[1][0], p[1][1])
}

fn element(s: &str, n: usize) -> Result<Element, String> {
    match s.parse::<Element>() {
        Ok(e) if e < n => Ok(e),
        Ok(e) => Err(format!("element {e} out of range 0..{n}")),
        Err(_) => Err(format!("not an element: {s}")),
    }
}

/// First atom on which the pebbled pairs disagree.
fn type_difference(s: [&Structure; 2], pebbles: [[Element; 2]; 2]) -> Result<Option<String>, GameError> {
    let (_, _, t0) = s[0].atomic_types(pebbles[0][0], pebbles[0][1])?;
    let (_, _, t1) = s[1].atomic_types(pebbles[1][0], pebbles[1][1])?;
    let names = vocab_literal_names(s[0].signature());
    for ((name, &v0), &v1) in names.iter().zip(&t0.vocab).zip(&t1.vocab) {
        if v0 != v1 {
            let (yes, no) = if v0 { (0, 1) } else { (1, 0) };
            return Ok(Some(format!("{name} holds in structure {yes} but not in structure {no}")));
        }
    }
    let atom = |o: OrderAtom, name: &str| match o {
        OrderAtom::Less => format!("x{name}y"),
        OrderAtom::Equal => "x=y".to_string(),
        OrderAtom::Greater => format!("y{name}x"),
    };
    for ((name, o0), (_, o1)) in t0.orders.iter().zip(&t1.orders) {
        if o0 != o1 {
            return Ok(Some(format!(
                "{} in structure 0 but {} in structure 1",
                atom(*o0, name),
                atom(*o1, name)
            )));
        }
    }
    Ok(None)
}

fn run(
    a: [&Structure; 2],
    k: usize,
    spoiler: &mut Agent,
    duplicator: &mut Agent,
    echo: &mut dyn Write,
) -> Result<Transcript, GameError> {
    let sizes = [a[0].size(), a[1].size()];
    if sizes.contains(&0) {
        return Err(GameError::IllegalMove("empty structure".into()));
    }
    let mut lines = Vec::new();
    let mut emit = |lines: &mut Vec<String>, line: String| -> Result<(), GameError> {
        writeln!(echo, "{line}").map_err(io_err)?;
        lines.push(line);
        Ok(())
    };
    let mut p = duplicator.place(sizes, k)?;
    emit(&mut lines, format!("duplicator {} {} {} {}", p[0][0], p[0][1], p[1][0], p[1][1]))?;
    let mut winner = Winner::Duplicator;
    if let Some(diff) = type_difference(a, p)? {
        emit(&mut lines, format!("R_{k} violated: {diff}"))?;
        winner = Winner::Spoiler;
    }
    if winner == Winner::Duplicator {
        for round in 1..=k {
            let r = k - round + 1;
            let mv = spoiler.spoil(sizes, p, r, round)?;
            let (side, pebble, e) = mv;
            emit(&mut lines, format!("round {round} spoiler {side} {} {e}", PEBBLES[pebble]))?;
            let f = duplicator.reply(sizes, p, r, mv)?;
            emit(&mut lines, format!("duplicator {f}"))?;
            p[side][pebble] = e;
            p[1 - side][pebble] = f;
            if let Some(diff) = type_difference(a, p)? {
                emit(&mut lines, format!("R_{} violated: {diff}", r - 1))?;
                winner = Winner::Spoiler;
                break;
            }
        }
    }
    emit(&mut lines, format!("winner {winner}"))?;
    Ok(Transcript { lines, winner })
}

/// Plays `k` rounds of the two-pebble game; the human side reads moves from
/// `input` and prompts on `output`, the other side is the exact solver.
pub fn interactive_play(
    a0: &Structure,
    a1: &Structure,
    k: usize,
    role: HumanRole,
    input: &mut dyn BufRead,
    output: &mut dyn Write,
) -> Result<Transcript, GameError> {
    let game = PebbleGame::new(a0, a1, k, 1)?;
    let mut echo: Vec<u8> = Vec::new();
    let transcript = match role {
        HumanRole::Spoiler => {
            let mut human = Agent::Human(input, &mut *output);
            run([a0, a1], k, &mut human, &mut Agent::Machine(&game), &mut echo)?
        }
        HumanRole::Duplicator => {
            let mut human = Agent::Human(input, &mut *output);
            run([a0, a1], k, &mut Agent::Machine(&game), &mut human, &mut echo)?
        }
        HumanRole::Nobody => run(
            [a0, a1],
            k,
            &mut Agent::Machine(&game),
            &mut Agent::Machine(&game),
            &mut echo,
        )?,
    };
    if role != HumanRole::Nobody {
        // Report the end of the game to the human.
        for line in transcript.lines.iter().filter(|l| l.starts_with("R_") || l.starts_with("winner")) {
            writeln!(output, "{line}").map_err(io_err)?;
        }
    }
    Ok(transcript)
}

/// Re-plays the moves of a transcript and checks that every line is reproduced.
pub fn replay(a0: &Structure, a1: &Structure, k: usize, text: &str) -> Result<Transcript, GameError> {
    let expected: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
    let mut spoiler_moves = VecDeque::new();
    let mut duplicator_moves = VecDeque::new();
    for line in &expected {
        let words: Vec<String> = line.split_whitespace().map(String::from).collect();
        match words.first().map(String::as_str) {
            Some("duplicator") => duplicator_moves.push_back(words[1..].to_vec()),
            Some("round") if words.len() == 6 && words[2] == "spoiler" => spoiler_moves.push_back(words[3..].to_vec()),
            _ => {}
        }
    }
    let mut sink: Vec<u8> = Vec::new();
    let t = run(
        [a0, a1],
        k,
        &mut Agent::Script(spoiler_moves),
        &mut Agent::Script(duplicator_moves),
        &mut sink,
    )?;
    for (i, (want, got)) in expected.iter().zip(t.lines.iter()).enumerate() {
        if want != got {
            return Err(GameError::ReplayMismatch {
                line: i + 1,
                expected: want.to_string(),
                found: got.clone(),
            });
        }
    }
    if expected.len() != t.lines.len() {
        let line = expected.len().min(t.lines.len()) + 1;
        return Err(GameError::ReplayMismatch {
            line,
            expected: expected.get(line - 1).map(|s| s.to_string()).unwrap_or_default(),
            found: t.lines.get(line - 1).cloned().unwrap_or_default(),
        });
    }
    Ok(t)
}
