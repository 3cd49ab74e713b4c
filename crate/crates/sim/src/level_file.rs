//! Plain-text level files.
//!
//! ```text
//! 10 6 0.1 0
//! ##########
//! #........#
//! #..S.....#
//! #....##..#
//! #.....S..#
//! ##########
//! ```
//!
//! The header is `width height cell_size_m level_id`. Each following line is
//! one row of cells, `#` occupied, `.` free, `S` a free cell holding a spawn
//! point at its center. The first row is the top of the map (largest `y`).

use std::fmt::Write as _;
use std::path::Path;

use imagine_core::world::{Cell, GridWorld, WorldError};
use imagine_core::Vec2;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LevelFileError {
    #[error("line 1: expected header `width height cell_size_m level_id`")]
    Header,
    #[error("line {line}: expected {expected} cells, found {found}")]
    RowLength { line: usize, expected: usize, found: usize },
    #[error("line {line}: unexpected character {ch:?} (use '#', '.' or 'S')")]
    BadChar { line: usize, ch: char },
    #[error("expected {expected} rows, found {found}")]
    RowCount { expected: usize, found: usize },
    #[error("invalid level: {0}")]
    World(#[from] WorldError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

pub fn parse_level(text: &str) -> Result<GridWorld, LevelFileError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or(LevelFileError::Header)?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 4 {
        return Err(LevelFileError::Header);
    }
    let width: usize = fields[0].parse().map_err(|_| LevelFileError::Header)?;
    let height: usize = fields[1].parse().map_err(|_| LevelFileError::Header)?;
    let cell_size: f64 = fields[2].parse().map_err(|_| LevelFileError::Header)?;
    let level_id: u8 = fields[3].parse().map_err(|_| LevelFileError::Header)?;

    let mut occupied = vec![false; width * height];
    let mut spawns = Vec::new();
    let mut rows = 0;
    for (lineno, line) in lines {
        let line = line.trim_end();
        if rows == height {
            return Err(LevelFileError::RowCount { expected: height, found: rows + 1 });
        }
        let chars: Vec<char> = line.chars().collect();
        if chars.len() != width {
            return Err(LevelFileError::RowLength { line: lineno + 1, expected: width, found: chars.len() });
        }
        let y = height - 1 - rows;
        for (x, &ch) in chars.iter().enumerate() {
            match ch {
                '#' => occupied[y * width + x] = true,
                '.' => {}
                'S' => spawns.push((x, y)),
                other => return Err(LevelFileError::BadChar { line: lineno + 1, ch: other }),
            }
        }
        rows += 1;
    }
    if rows != height {
        return Err(LevelFileError::RowCount { expected: height, found: rows });
    }
    // Spawn order: top row first, left to right, as written.
    let spawn_points = spawns
        .into_iter()
        .map(|(x, y)| Vec2::new((x as f64 + 0.5) * cell_size, (y as f64 + 0.5) * cell_size))
        .collect();
    Ok(GridWorld::new(width, height, cell_size, occupied, spawn_points, level_id)?)
}

pub fn load_level(path: &Path) -> Result<GridWorld, LevelFileError> {
    parse_level(&std::fs::read_to_string(path)?)
}

/// Writes `world` in the level-file format. Spawn points are marked in the
/// cell that contains them.
pub fn write_level(world: &GridWorld) -> String {
    let (w, h) = (world.width(), world.height());
    let mut grid: Vec<Vec<char>> = (0..h)
        .map(|y| {
            (0..w)
                .map(|x| if world.is_occupied(Cell::new(x as i32, y as i32)) { '#' } else { '.' })
                .collect()
        })
        .collect();
    for &p in world.spawn_points() {
        let c = world.cell_of(p);
        grid[c.y as usize][c.x as usize] = 'S';
    }
    let mut out = String::new();
    writeln!(out, "{} {} {} {}", w, h, world.cell_size(), world.level_id()).unwrap();
    for row in grid.iter().rev() {
        out.extend(row.iter());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
6 4 0.5 2
######
#S..##
#...S#
######
";

    #[test]
    fn parses_sample() {
        let w = parse_level(SAMPLE).unwrap();
        assert_eq!((w.width(), w.height(), w.level_id()), (6, 4, 2));
        assert_eq!(w.cell_size(), 0.5);
        // Top text row is y = 3.
        assert!(w.is_occupied(Cell::new(4, 2)));
        assert!(!w.is_occupied(Cell::new(4, 1)));
        assert_eq!(w.spawn_points(), &[Vec2::new(0.75, 1.25), Vec2::new(2.25, 0.75)]);
        assert_eq!(w.explorable_area(), 7);
    }

    #[test]
    fn round_trips() {
        let w = parse_level(SAMPLE).unwrap();
        assert_eq!(write_level(&w), SAMPLE);
    }

    #[test]
    fn reports_line_numbers() {
        let bad = "3 3 1 0\n###\n#x#\n###\n";
        assert!(matches!(parse_level(bad), Err(LevelFileError::BadChar { line: 3, ch: 'x' })));
        let short = "3 3 1 0\n###\n##\n###\n";
        assert!(matches!(parse_level(short), Err(LevelFileError::RowLength { line: 3, .. })));
        assert!(matches!(parse_level("3 3 x 0\n"), Err(LevelFileError::Header)));
        assert!(matches!(parse_level("3 3 1 0\n###\n"), Err(LevelFileError::RowCount { .. })));
    }

    #[test]
    fn rejects_spawn_without_clearance() {
        // Cell size 0.1 leaves 0.05 m to the walls, less than the body radius.
        let cramped = "3 3 0.1 0\n###\n#S#\n###\n";
        assert!(matches!(parse_level(cramped), Err(LevelFileError::World(_))));
    }
}
