use rand::Rng;

use super::setup::{add_object, blank_state};
use crate::error::EnvError;
use crate::rng::{self, StreamRng};
use crate::state::{Material, Position, WorldState};

const CELL: i32 = 6;

struct ValueNoise {
    lattice: Vec<f64>,
    cols: i32,
}

impl ValueNoise {
    fn new(w: i32, h: i32, rng: &mut StreamRng) -> Self {
        let cols = w / CELL + 2;
        let rows = h / CELL + 2;
        let lattice = (0..cols * rows).map(|_| rng.gen::<f64>()).collect();
        Self { lattice, cols }
    }

    fn at(&self, x: i32, y: i32) -> f64 {
        let (cx, cy) = (x / CELL, y / CELL);
        let fx = f64::from(x % CELL) / f64::from(CELL);
        let fy = f64::from(y % CELL) / f64::from(CELL);
        let v = |i: i32, j: i32| self.lattice[(j * self.cols + i) as usize];
        let smooth = |t: f64| t * t * (3.0 - 2.0 * t);
        let (sx, sy) = (smooth(fx), smooth(fy));
        let top = v(cx, cy) * (1.0 - sx) + v(cx + 1, cy) * sx;
        let bottom = v(cx, cy + 1) * (1.0 - sx) + v(cx + 1, cy + 1) * sx;
        top * (1.0 - sy) + bottom * sy
    }
}

/// Seeded world: value-noise terrain, a guaranteed tech-tree kit around the
/// centered player and a small fixed NPC population.
pub fn initial_state(seed: u64, size: (i32, i32)) -> Result<WorldState, EnvError> {
    let mut s = blank_state(size, seed)?;
    let (w, h) = size;
    let mut rng = rng::substream(seed, "worldgen");
    let elevation = ValueNoise::new(w, h, &mut rng);
    let moisture = ValueNoise::new(w, h, &mut rng);
    for x in 0..w {
        for y in 0..h {
            let e = elevation.at(x, y);
            let m = moisture.at(x, y);
            let r: f64 = rng.gen();
            let mat = if e < 0.22 {
                Material::Water
            } else if e < 0.28 {
                Material::Sand
            } else if e > 0.7 {
                match r {
                    r if r < 0.07 => Material::Path,
                    r if r < 0.13 => Material::Coal,
                    r if r < 0.16 => Material::Iron,
                    r if r < 0.17 => Material::Diamond,
                    r if r < 0.18 => Material::Lava,
                    _ => Material::Stone,
                }
            } else if (m > 0.6 && r < 0.35) || r < 0.03 {
                Material::Tree
            } else {
                Material::Grass
            };
            s.set_material(Position::new(x, y), Some(mat));
        }
    }

    let c = s.player_position();
    let kit: &[((i32, i32), Material)] = &[
        ((-2, -2), Material::Tree),
        ((-3, -2), Material::Tree),
        ((-2, -3), Material::Tree),
        ((2, -3), Material::Water),
        ((3, -3), Material::Water),
        ((3, -2), Material::Water),
        ((-2, 2), Material::Sand),
        ((2, 2), Material::Stone),
        ((3, 2), Material::Stone),
        ((4, 2), Material::Coal),
        ((2, 3), Material::Stone),
        ((3, 3), Material::Iron),
        ((4, 3), Material::Diamond),
        ((5, 3), Material::Lava),
    ];
    for dx in -1..=1 {
        for dy in -1..=1 {
            s.set_material(c.offset(Position::new(dx, dy)), Some(Material::Grass));
        }
    }
    for &((dx, dy), mat) in kit {
        s.set_material(c.offset(Position::new(dx, dy)), Some(mat));
    }

    let tiles = |s: &WorldState, mat: Material, min_dist: i32| -> Vec<Position> {
        let mut out = Vec::new();
        for x in 0..w {
            for y in 0..h {
                let p = Position::new(x, y);
                if s.material(p) == Some(mat) && p.manhattan(c) >= min_dist && !s.is_occupied(p) {
                    out.push(p);
                }
            }
        }
        out
    };
    let none = serde_json::Map::new();
    for (kind, mat, min_dist, n) in [
        ("cow", Material::Grass, 3, 2),
        ("zombie", Material::Grass, 6, 1),
        ("skeleton", Material::Path, 4, 1),
    ] {
        for _ in 0..n {
            let free = tiles(&s, mat, min_dist);
            if free.is_empty() {
                break;
            }
            let p = free[rng.gen_range(0..free.len())];
            s = add_object(&s, kind, p, &none)?;
        }
    }
    Ok(s)
}
