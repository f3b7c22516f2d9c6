//! Terminal Tic-Tac-Toe boards ("x" moves first), labelled by whether x won.

use std::collections::BTreeSet;
use std::path::Path;

use super::{seeded_split, Dataset};
use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Training rows of the generated dataset; the other 192 are validation.
pub const TICTACTOE_TRAIN: usize = 766;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Cell {
    X,
    O,
    Blank,
}

impl Cell {
    pub fn encode(self) -> f64 {
        match self {
            Cell::X => 1.0,
            Cell::O => -1.0,
            Cell::Blank => 0.0,
        }
    }

    fn token(self) -> &'static str {
        match self {
            Cell::X => "x",
            Cell::O => "o",
            Cell::Blank => "b",
        }
    }

    fn parse(token: &str) -> Option<Cell> {
        match token {
            "x" => Some(Cell::X),
            "o" => Some(Cell::O),
            "b" => Some(Cell::Blank),
            _ => None,
        }
    }
}

pub type Board = [Cell; 9];

const LINES: [[usize; 3]; 8] = [
    [0, 1, 2],
    [3, 4, 5],
    [6, 7, 8],
    [0, 3, 6],
    [1, 4, 7],
    [2, 5, 8],
    [0, 4, 8],
    [2, 4, 6],
];

fn has_three(board: &Board, who: Cell) -> bool {
    LINES.iter().any(|l| l.iter().all(|&i| board[i] == who))
}

fn walk(board: &mut Board, to_move: Cell, out: &mut BTreeSet<Board>) {
    let full = board.iter().all(|&c| c != Cell::Blank);
    if has_three(board, Cell::X) || has_three(board, Cell::O) || full {
        out.insert(*board);
        return;
    }
    let next = if to_move == Cell::X { Cell::O } else { Cell::X };
    for i in 0..9 {
        if board[i] == Cell::Blank {
            board[i] = to_move;
            walk(board, next, out);
            board[i] = Cell::Blank;
        }
    }
}

/// Every distinct board on which a legal game can end, with its label
/// (`true` iff x has three in a row), in sorted board order.
pub fn enumerate_endgames() -> Vec<(Board, bool)> {
    let mut boards = BTreeSet::new();
    walk(&mut [Cell::Blank; 9], Cell::X, &mut boards);
    boards
        .into_iter()
        .map(|b| (b, has_three(&b, Cell::X)))
        .collect()
}

fn build(name: &str, rows: Vec<(Board, bool)>, split_seed: u64) -> Dataset {
    let n = rows.len();
    let data = rows
        .iter()
        .flat_map(|(b, _)| b.iter().map(|c| c.encode()))
        .collect();
    // floor(0.8 · 958) = 766
    let (train, validation) = seeded_split(n, n * 4 / 5, split_seed);
    Dataset {
        name: name.into(),
        features: Matrix::new(n, 9, data).expect("consistent shape"),
        labels: rows.iter().map(|&(_, win)| usize::from(win)).collect(),
        sample_ids: (0..n).collect(),
        train,
        validation,
        num_classes: 2,
    }
}

/// The endgame dataset from exhaustive game-tree enumeration, split 766/192.
pub fn gen_tictactoe(split_seed: u64) -> Dataset {
    build("tictactoe", enumerate_endgames(), split_seed)
}

/// `cell×9,class` in the UCI endgame file's spelling.
pub fn format_tictactoe_line(board: &Board, win: bool) -> String {
    let mut tokens: Vec<&str> = board.iter().map(|c| c.token()).collect();
    tokens.push(if win { "positive" } else { "negative" });
    tokens.join(",")
}

/// Parses one `cell×9,class` line.
pub fn parse_tictactoe_line(line: &str, line_no: usize) -> Result<(Board, bool)> {
    let tokens: Vec<&str> = line.split(',').map(str::trim).collect();
    if tokens.len() != 10 {
        return Err(Error::Parse {
            line: line_no,
            detail: format!("expected 10 comma-separated tokens, found {}", tokens.len()),
        });
    }
    let mut board = [Cell::Blank; 9];
    for (i, t) in tokens[..9].iter().enumerate() {
        board[i] = Cell::parse(t).ok_or_else(|| Error::Parse {
            line: line_no,
            detail: format!("unknown cell token {t:?}"),
        })?;
    }
    let win = match tokens[9] {
        "positive" => true,
        "negative" => false,
        other => {
            return Err(Error::Parse {
                line: line_no,
                detail: format!("unknown class token {other:?}"),
            })
        }
    };
    Ok((board, win))
}

/// Loads the endgame CSV, keeping file order. Blank lines are skipped.
pub fn load_tictactoe_csv(path: &Path, split_seed: u64) -> Result<Dataset> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let rows = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| parse_tictactoe_line(l, i + 1))
        .collect::<Result<Vec<_>>>()?;
    if rows.is_empty() {
        return Err(Error::format(path, "no rows"));
    }
    Ok(build("tictactoe", rows, split_seed))
}
