//! Y-variables in the belt: the A3 table and the constant-term property.

use cluster_cone::finite_type::{catalog_seed_with_frozen, BipartiteBelt, DynkinType};
use cluster_cone::seeds::ExchangeData;
use cluster_cone::uvars::{has_unit_constant_term, y_laurent_forms};
use cluster_cone::LaurentPolynomial;

#[test]
fn a3_y_variables_match_the_table() {
    let e = ExchangeData::new(
        3,
        0,
        vec![vec![0, 1, 0], vec![-1, 0, -1], vec![0, 1, 0]],
        vec![1, 1, 1],
        vec!["x1".into(), "x2".into(), "x3".into()],
    )
    .unwrap();
    let belt = BipartiteBelt::from_exchange(&e).unwrap();
    assert!(belt.path.is_empty());
    let ys = y_laurent_forms(&belt).unwrap();
    // (root, numerator over p1..p3 as x0..x2, denominator exponents)
    let table: [(&str, &str, [i64; 3]); 9] = [
        ("x[-1,0,0]", "x0", [0, 0, 0]),
        ("x[0,0,-1]", "x2", [0, 0, 0]),
        ("x[0,-1,0]", "x1", [0, 0, 0]),
        ("x[1,0,0]", "1 + x1", [1, 0, 0]),
        ("x[0,0,1]", "1 + x1", [0, 0, 1]),
        ("x[1,1,1]", "1 + x0 + 2 * x1 + x2 + x0 * x1 + x0 * x2 + x1 * x2 + x1^2", [1, 1, 1]),
        ("x[0,1,1]", "1 + x0 + x1 + x2 + x0 * x2", [0, 1, 1]),
        ("x[1,1,0]", "1 + x0 + x1 + x2 + x0 * x2", [1, 1, 0]),
        ("x[0,1,0]", "1 + x0 + x2 + x0 * x2", [0, 1, 0]),
    ];
    // Each Y-variable is labelled by its own denominator vector.
    let label = |y: &LaurentPolynomial| {
        let d: Vec<String> = y.min_exponents().iter().map(|e| (-e).to_string()).collect();
        format!("x[{}]", d.join(","))
    };
    let mut seen: Vec<String> = ys.iter().map(label).collect();
    seen.sort();
    seen.dedup();
    assert_eq!(seen.len(), 9);
    for (name, num, den) in table {
        let y = ys.iter().find(|y| label(y) == name).unwrap_or_else(|| panic!("no Y-variable with root {name}"));
        assert_eq!(y.mul_monomial(&den), LaurentPolynomial::parse(num, 3).unwrap(), "{name}");
    }
}

#[test]
fn y_numerators_have_constant_term_one_up_to_rank_4() {
    for name in ["A1", "A2", "A3", "A4", "B3", "B4", "C2", "C3", "C4", "D4", "G2", "F4"] {
        let t: DynkinType = name.parse().unwrap();
        let belt = BipartiteBelt::from_exchange(&catalog_seed_with_frozen(t, 0).unwrap()).unwrap();
        let ys = y_laurent_forms(&belt).unwrap();
        for (id, y) in ys.iter().enumerate() {
            assert!(has_unit_constant_term(y), "{name}: {} has y = {y}", belt.names[id]);
        }
    }
}
