use crate::state::{EntityKind, Material, Position, WorldState};

pub fn glyph_for_material(m: Option<Material>) -> char {
    match m {
        None => ' ',
        Some(Material::Grass) => '.',
        Some(Material::Tree) => 'T',
        Some(Material::Water) => '~',
        Some(Material::Stone) => '#',
        Some(Material::Coal) => 'c',
        Some(Material::Iron) => 'i',
        Some(Material::Diamond) => 'd',
        Some(Material::Sand) => ':',
        Some(Material::Path) => '_',
        Some(Material::Table) => 't',
        Some(Material::Furnace) => 'f',
        Some(Material::Lava) => '%',
    }
}

pub fn glyph_for_entity(kind: EntityKind) -> char {
    match kind {
        EntityKind::Player => '@',
        EntityKind::Cow => 'C',
        EntityKind::Zombie => 'Z',
        EntityKind::Skeleton => 'S',
        EntityKind::Arrow => '*',
        EntityKind::Plant => 'p',
        EntityKind::Fence => '+',
    }
}

/// One line per grid row, one glyph per tile, live entities overlaid.
pub fn render_ascii(s: &WorldState) -> String {
    let (w, h) = s.size;
    let mut out = String::with_capacity(((w + 1) * h) as usize);
    for y in 0..h {
        for x in 0..w {
            let p = Position::new(x, y);
            let g = match s.entity_at(p) {
                Some(e) => glyph_for_entity(e.kind()),
                None => glyph_for_material(s.material(p)),
            };
            out.push(g);
        }
        out.push('\n');
    }
    out
}
