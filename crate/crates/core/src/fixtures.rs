//! Named example queries used by tests, benchmarks, and the CLI fixture set.
//!
//! All are scalar graph queries (binary atoms) unless noted; head variants are
//! built with [`Query::with_head`]. Edge atoms are named `R_XY` for the edge
//! X-Y except where a fixed numbering is conventional.

use crate::query::{Query, QueryBuilder, VarSet};

/// `Q() <- R1(A,B), R2(B,C).`
pub fn three_path() -> Query {
    Query::new(&[], &[("R1", &["A", "B"]), ("R2", &["B", "C"])]).unwrap()
}

/// `Q() <- R1(A,B), R2(B,C), R3(C,D).`
pub fn four_path() -> Query {
    Query::new(
        &[],
        &[("R1", &["A", "B"]), ("R2", &["B", "C"]), ("R3", &["C", "D"])],
    )
    .unwrap()
}

/// Scalar 4-cycle `E1(A1,A2) ⊗ E2(A2,A3) ⊗ E3(A3,A4) ⊗ E4(A1,A4)`.
pub fn four_cycle() -> Query {
    Query::new(
        &[],
        &[
            ("E1", &["A1", "A2"]),
            ("E2", &["A2", "A3"]),
            ("E3", &["A3", "A4"]),
            ("E4", &["A1", "A4"]),
        ],
    )
    .unwrap()
}

fn edge_query(edges: &[(&str, &str)]) -> Query {
    let mut b = QueryBuilder::default();
    for (u, v) in edges {
        let name = format!("R_{u}{v}");
        b.atom(&name, &[u, v]).unwrap();
    }
    b.finish(&[]).unwrap()
}

/// Hub B over pendants A, C and the diamond B-D-E-F (triangles BDE and BEF
/// sharing edge B-E). Seven relations R1..R7; rho*(var) = 4.
pub fn diamond_pendants() -> Query {
    Query::new(
        &[],
        &[
            ("R1", &["A", "B"]),
            ("R2", &["B", "C"]),
            ("R3", &["B", "D"]),
            ("R4", &["B", "E"]),
            ("R5", &["B", "F"]),
            ("R6", &["D", "E"]),
            ("R7", &["E", "F"]),
        ],
    )
    .unwrap()
}

/// Apexes A and B over the path C-D-E, plus F adjacent to both apexes only.
pub fn double_fan_gap() -> Query {
    edge_query(&[
        ("A", "B"),
        ("A", "C"),
        ("A", "D"),
        ("A", "E"),
        ("A", "F"),
        ("B", "C"),
        ("B", "D"),
        ("B", "E"),
        ("B", "F"),
        ("E", "D"),
        ("D", "C"),
    ])
}

/// Apexes A and B over the path F-E-D-C (the full double fan on six nodes).
pub fn double_fan() -> Query {
    edge_query(&[
        ("A", "B"),
        ("A", "C"),
        ("A", "D"),
        ("A", "E"),
        ("A", "F"),
        ("B", "C"),
        ("B", "D"),
        ("B", "E"),
        ("B", "F"),
        ("F", "E"),
        ("E", "D"),
        ("D", "C"),
    ])
}

/// Fan: apex B over the path A-C-D-E (drawn as a pentagon).
pub fn fan_5() -> Query {
    edge_query(&[
        ("A", "B"),
        ("A", "C"),
        ("B", "C"),
        ("B", "D"),
        ("B", "E"),
        ("C", "D"),
        ("D", "E"),
    ])
}

/// Three near-5-cliques (each K5 minus one edge) chained on the shared pairs
/// DE and GH; eleven variables A..K.
pub fn clique_chain() -> Query {
    edge_query(&[
        ("A", "B"),
        ("A", "C"),
        ("A", "D"),
        ("B", "C"),
        ("B", "D"),
        ("B", "E"),
        ("C", "D"),
        ("C", "E"),
        ("D", "E"),
        ("D", "F"),
        ("D", "G"),
        ("E", "F"),
        ("E", "G"),
        ("E", "H"),
        ("F", "G"),
        ("F", "H"),
        ("G", "H"),
        ("G", "I"),
        ("G", "J"),
        ("H", "I"),
        ("H", "J"),
        ("H", "K"),
        ("I", "J"),
        ("I", "K"),
        ("J", "K"),
    ])
}

/// [`clique_chain`] plus an apex L adjacent to all eleven variables.
pub fn clique_chain_apex() -> Query {
    let mut edges: Vec<(&str, &str)> = vec![
        ("A", "B"),
        ("A", "C"),
        ("A", "D"),
        ("B", "C"),
        ("B", "D"),
        ("B", "E"),
        ("C", "D"),
        ("C", "E"),
        ("D", "E"),
        ("D", "F"),
        ("D", "G"),
        ("E", "F"),
        ("E", "G"),
        ("E", "H"),
        ("F", "G"),
        ("F", "H"),
        ("G", "H"),
        ("G", "I"),
        ("G", "J"),
        ("H", "I"),
        ("H", "J"),
        ("H", "K"),
        ("I", "J"),
        ("I", "K"),
        ("J", "K"),
    ];
    for v in ["A", "B", "C", "D", "E", "F", "G", "H", "I", "J", "K"] {
        edges.push(("L", v));
    }
    edge_query(&edges)
}

/// Octahedron (antipodal pairs A-D, B-E, C-F) with an apex P joined to all
/// six vertices.
pub fn octahedron_apex() -> Query {
    edge_query(&[
        ("A", "B"),
        ("A", "C"),
        ("A", "E"),
        ("A", "F"),
        ("B", "C"),
        ("B", "D"),
        ("B", "F"),
        ("C", "D"),
        ("C", "E"),
        ("D", "E"),
        ("D", "F"),
        ("E", "F"),
        ("P", "A"),
        ("P", "B"),
        ("P", "C"),
        ("P", "D"),
        ("P", "E"),
        ("P", "F"),
    ])
}

/// All fixtures by CLI name.
pub fn by_name(name: &str) -> Option<Query> {
    Some(match name {
        "three_path" => three_path(),
        "four_path" => four_path(),
        "four_cycle" => four_cycle(),
        "diamond_pendants" => diamond_pendants(),
        "double_fan_gap" => double_fan_gap(),
        "double_fan" => double_fan(),
        "fan_5" => fan_5(),
        "clique_chain" => clique_chain(),
        "clique_chain_apex" => clique_chain_apex(),
        "octahedron_apex" => octahedron_apex(),
        _ => return None,
    })
}

pub const FIXTURE_NAMES: &[&str] = &[
    "three_path",
    "four_path",
    "four_cycle",
    "diamond_pendants",
    "double_fan_gap",
    "double_fan",
    "fan_5",
    "clique_chain",
    "clique_chain_apex",
    "octahedron_apex",
];

/// Test helper: variable set from names.
pub fn vars(q: &Query, names: &[&str]) -> VarSet {
    VarSet::from_iter(names.iter().map(|n| {
        q.var_by_name(n)
            .unwrap_or_else(|| panic!("no variable `{n}` in {q}"))
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_shapes() {
        assert_eq!(three_path().all_vars().len(), 3);
        assert_eq!(four_cycle().atoms().len(), 4);
        assert_eq!(diamond_pendants().atoms().len(), 7);
        assert_eq!(double_fan().atoms().len(), 12);
        assert_eq!(double_fan_gap().atoms().len(), 11);
        assert_eq!(fan_5().atoms().len(), 7);
        assert_eq!(clique_chain().all_vars().len(), 11);
        assert_eq!(clique_chain().atoms().len(), 25);
        assert_eq!(clique_chain_apex().all_vars().len(), 12);
        assert_eq!(clique_chain_apex().atoms().len(), 36);
        assert_eq!(octahedron_apex().atoms().len(), 18);
        for name in FIXTURE_NAMES {
            assert!(by_name(name).is_some());
        }
    }
}
