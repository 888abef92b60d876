use proptest::prelude::*;
use vnc::exprlang::{eval_coordinate_gradient, parse, Expr, SymbolTable};

fn table() -> SymbolTable {
    SymbolTable::for_chart(&["x", "y", "theta"]).with_param("m", 2.5)
}

/// Random source text over the full grammar.
fn source() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        (0u32..1000).prop_map(|n| format!("{}", n as f64 / 8.0)),
        prop::sample::select(vec!["x", "y", "theta", "q1", "v2", "theta_dot", "m"]).prop_map(String::from),
    ];
    leaf.prop_recursive(5, 48, 2, |inner| {
        prop_oneof![
            (inner.clone(), prop::sample::select(vec!["+", "-", "*", "/", "^"]), inner.clone())
                .prop_map(|(a, op, b)| format!("({a}){op}({b})")),
            inner.clone().prop_map(|a| format!("-({a})")),
            (prop::sample::select(vec!["sin", "cos", "tan", "exp", "log", "sqrt", "abs"]), inner)
                .prop_map(|(f, a)| format!("{f}({a})")),
        ]
    })
}

/// Smooth expressions in the coordinates only, for derivative checks.
fn smooth_source() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        (1u32..9).prop_map(|n| format!("{}", n as f64 / 4.0)),
        prop::sample::select(vec!["x", "y", "theta"]).prop_map(String::from),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), prop::sample::select(vec!["+", "-", "*"]), inner.clone())
                .prop_map(|(a, op, b)| format!("({a}){op}({b})")),
            (inner.clone(), 1u32..4).prop_map(|(a, k)| format!("({a})^{k}")),
            (prop::sample::select(vec!["sin", "cos"]), inner).prop_map(|(f, a)| format!("{f}({a})")),
        ]
    })
}

fn central_difference(e: &Expr, q: &[f64], i: usize) -> f64 {
    let h = 1e-6;
    let (mut a, mut b) = (q.to_vec(), q.to_vec());
    a[i] += h;
    b[i] -= h;
    (e.eval(&a, &[0.0; 3]).unwrap() - e.eval(&b, &[0.0; 3]).unwrap()) / (2.0 * h)
}

proptest! {
    #[test]
    fn printed_form_reparses_to_the_same_tree(src in source()) {
        let syms = table();
        let e = parse(&src, &syms).unwrap();
        let again = parse(&e.to_string(), &syms).unwrap();
        prop_assert_eq!(&again, &e);
        prop_assert_eq!(again.to_string(), e.to_string());
    }

    #[test]
    fn printed_form_evaluates_identically(src in source(), q in prop::array::uniform3(-2.0f64..2.0), v in prop::array::uniform3(-2.0f64..2.0)) {
        let syms = table();
        let e = parse(&src, &syms).unwrap();
        let again = parse(&e.to_string(), &syms).unwrap();
        let (a, b) = (e.eval(&q, &v), again.eval(&q, &v));
        prop_assert_eq!(a.map(f64::to_bits).ok(), b.map(f64::to_bits).ok());
    }

    #[test]
    fn dual_gradient_matches_central_differences(src in smooth_source(), q in prop::array::uniform3(-1.5f64..1.5)) {
        let e = parse(&src, &table()).unwrap();
        let d = eval_coordinate_gradient(&e, &q, &[0.0; 3]).unwrap();
        prop_assert!((d.value() - e.eval(&q, &[0.0; 3]).unwrap()).abs() <= 1e-12 * (1.0 + d.value().abs()));
        for i in 0..3 {
            let fd = central_difference(&e, &q, i);
            let ad = d.partials().get(i).copied().unwrap_or(0.0);
            prop_assert!((ad - fd).abs() <= 1e-5 * (1.0 + ad.abs()), "d/dq{i} of {src}: {ad} vs {fd}");
        }
    }
}

#[test]
fn textbook_values() {
    let syms = table();
    let cases = [
        ("2^3^2", 512.0),
        ("-2^2", -4.0),
        ("(1 + 2)*3 - 4/8", 8.5),
        ("m*sin(theta)^2 + m*cos(theta)^2", 2.5),
        ("sqrt(abs(-16)) + log(exp(1.5))", 5.5),
    ];
    for (src, want) in cases {
        let got = parse(src, &syms).unwrap().eval(&[0.0, 0.0, 0.7], &[0.0; 3]).unwrap();
        assert!((got - want).abs() < 1e-14, "{src}: {got}");
    }
}

#[test]
fn velocities_resolve_by_both_names() {
    let syms = table();
    let a = parse("theta_dot*v1", &syms).unwrap();
    let b = parse("v3*x_dot", &syms).unwrap();
    let (q, v) = ([0.0; 3], [2.0, 0.0, 3.0]);
    assert_eq!(a.eval(&q, &v).unwrap(), 6.0);
    assert_eq!(b.eval(&q, &v).unwrap(), 6.0);
}
