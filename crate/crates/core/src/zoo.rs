//! Named test bodies shipped as JSON fixtures.

use crate::io::parse_polytope;
use crate::polytope::HPolytope;

pub const FIXTURES: &[(&str, &str)] = &[
    ("triangle", include_str!("../fixtures/triangle.json")),
    ("square", include_str!("../fixtures/square.json")),
    ("rhombus_1_4", include_str!("../fixtures/rhombus_1_4.json")),
    ("rhombus_1_2", include_str!("../fixtures/rhombus_1_2.json")),
    ("rhombus_3_4", include_str!("../fixtures/rhombus_3_4.json")),
    ("cube", include_str!("../fixtures/cube.json")),
    ("regular_tetrahedron", include_str!("../fixtures/regular_tetrahedron.json")),
    ("standard_simplex", include_str!("../fixtures/standard_simplex.json")),
    ("crosspolytope_3", include_str!("../fixtures/crosspolytope_3.json")),
    ("crosspolytope_4", include_str!("../fixtures/crosspolytope_4.json")),
    ("box_simplex", include_str!("../fixtures/box_simplex.json")),
    ("coordinate_crosspolytope", include_str!("../fixtures/coordinate_crosspolytope.json")),
];

/// Load a fixture by name.
pub fn body(name: &str) -> Option<HPolytope> {
    FIXTURES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, src)| parse_polytope(src).expect("fixture parses"))
}

pub fn all() -> Vec<(&'static str, HPolytope)> {
    FIXTURES.iter().map(|(n, src)| (*n, parse_polytope(src).expect("fixture parses"))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    #[test]
    fn fixtures_load() {
        let z = all();
        assert_eq!(z.len(), FIXTURES.len());
        assert_eq!(body("cube").unwrap().volume(), qi(8));
        assert_eq!(body("regular_tetrahedron").unwrap().volume(), q(8, 3));
        assert_eq!(body("crosspolytope_3").unwrap().num_facets(), 8);
        assert_eq!(body("crosspolytope_4").unwrap().num_facets(), 16);
        assert_eq!(body("box_simplex").unwrap().volume(), q(8, 3));
        assert!(body("nonexistent").is_none());
    }
}
