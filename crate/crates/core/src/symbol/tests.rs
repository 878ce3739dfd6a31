use num_complex::Complex64;
use proptest::prelude::*;

use super::*;
use crate::geometry::BallGeometry;

const CORPUS: &[&str] = &[
    "1",
    "0.5",
    "i",
    "2 * i",
    "z1",
    "zc1",
    "r1",
    "r2",
    "abs2(z)",
    "abs2(zc)",
    "1 - abs2(z)",
    "2 - abs2(zc)",
    "re(z1) * im(z2)",
    "conj(z1)",
    "sqrt(abs2(z1))",
    "r1^2",
    "r1^2 * r2",
    "-r1^2",
    "-(1 - r1)",
    "--z1",
    "(1 + z1)^3",
    "(-z1)^2",
    "1 - 2 - 3",
    "1 - (2 - 3)",
    "1 + (2 + 3)",
    "(1 + 2) * 3",
    "1 / (2 / 3)",
    "1 / 2 / 3",
    "z1 * (z2 * z3)",
    "abs2(z1 + z2)",
    "abs2(z1) + abs2(z2)",
    "re(z1 * conj(z2))",
    "im(z1)^2 + re(z1)^2",
    "(r1^2)^3",
    "1.25e-3 * r1",
    "100000 * abs2(z1)",
    "z1^0",
    "sqrt(1 - abs2(z))",
    "conj(conj(z1))",
    "re(i * z1)",
    "-(z1 * z2)",
    "-z1 * z2",
    "(z1 - z2) / (2 - abs2(z))",
    "r1 * r2 * r3",
    "r1 - r2 + r3",
    "r1 - (r2 + r3)",
    "zc2 * conj(zc1)",
    "abs2(zc1 - zc2) / 4",
    "1 + i * im(zc1)",
    "sqrt(re(z1)^2)",
    "prod(a = r1^2, c = 1 - abs2(zc))",
    "prod(a = 1 - r1^2, c = re(zc1))",
    "prod(a = 1, c = 1)",
    "prod(a = -r1, c = -(zc1 + 1))",
];

#[test]
fn corpus_round_trips() {
    assert!(CORPUS.len() >= 50);
    for text in CORPUS {
        let first = parse_symbol(text).unwrap();
        let printed = first.to_string();
        let second = parse_symbol(&printed).unwrap_or_else(|e| panic!("{text} -> {printed}: {e}"));
        assert_eq!(first, second, "{text} -> {printed}");
        assert_eq!(printed, second.to_string());
    }
}

#[test]
fn canonical_forms() {
    let canon = |t: &str| parse_symbol(t).unwrap().to_string();
    assert_eq!(canon("1-abs2( z )"), "1 - abs2(z)");
    assert_eq!(canon("((r1))^2*r2"), "r1^2 * r2");
    assert_eq!(canon("1-(2-3)"), "1 - (2 - 3)");
    assert_eq!(canon("prod(a=r1^2,c=1-abs2(zc))"), "prod(a = r1^2, c = 1 - abs2(zc))");
}

fn leaf() -> impl Strategy<Value = String> {
    prop_oneof![
        (0u32..100).prop_map(|v| v.to_string()),
        (0.0f64..10.0).prop_map(|v| v.to_string()),
        Just("i".to_string()),
        (1u32..4).prop_map(|j| format!("z{j}")),
        (1u32..3).prop_map(|j| format!("zc{j}")),
        (1u32..3).prop_map(|j| format!("r{j}")),
        Just("abs2(z)".to_string()),
        Just("abs2(zc)".to_string()),
    ]
}

fn expr_text() -> impl Strategy<Value = String> {
    leaf().prop_recursive(5, 48, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone(), prop_oneof![Just("+"), Just("-"), Just("*"), Just("/")])
                .prop_map(|(a, b, op)| format!("({a}) {op} ({b})")),
            (inner.clone(), 0u32..4).prop_map(|(a, k)| format!("({a})^{k}")),
            inner.clone().prop_map(|a| format!("-({a})")),
            (inner, prop_oneof![Just("re"), Just("im"), Just("conj"), Just("abs2")])
                .prop_map(|(a, f)| format!("{f}({a})")),
        ]
    })
}

fn ball_point(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    (prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n), 0.0f64..0.98).prop_filter_map(
        "nonzero direction",
        |(v, radius)| {
            let z: Vec<Complex64> = v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect();
            let norm = z.iter().map(|w| w.norm_sqr()).sum::<f64>().sqrt();
            (norm > 1e-6).then(|| z.iter().map(|w| w * (radius / norm)).collect())
        },
    )
}

proptest! {
    #[test]
    fn generated_round_trip(text in expr_text()) {
        let first = parse_symbol(&text).unwrap();
        let second = parse_symbol(&first.to_string()).unwrap();
        prop_assert_eq!(first, second);
    }

    #[test]
    fn product_matches_manual_composition(
        a_text in prop_oneof![Just("r1^2"), Just("1 - r1^2 * r2"), Just("re(z1 * conj(z2))"), Just("abs2(z)")],
        c_text in prop_oneof![Just("1 - abs2(zc)"), Just("re(zc1)"), Just("zc1 * i + 2")],
        z in ball_point(4),
    ) {
        let g = BallGeometry::new(4, 2, vec![1, 1]).unwrap();
        let f = Symbol::parse(&format!("prod(a = {a_text}, c = {c_text})"), &g).unwrap();
        let a = BoundSymbol::parse(a_text, Domain::Prime(g.clone())).unwrap();
        let c = BoundSymbol::parse(c_text, Domain::Ball(2)).unwrap();
        let s = (1.0 - z[2].norm_sqr() - z[3].norm_sqr()).sqrt();
        let stretched = [z[0] / s, z[1] / s];
        let manual = a.eval(&stretched).unwrap() * c.eval(&z[2..]).unwrap();
        let got = f.eval(&z).unwrap();
        prop_assert!((got - manual).norm() <= 1e-14 * (1.0 + manual.norm()), "{} vs {}", got, manual);
    }
}
