use bartool::instances::{builtin, parse_predicate, CmpOp, Expr, Instance, Term};
use bartool::Error;
use proptest::prelude::*;

fn term() -> impl Strategy<Value = Term> {
    prop_oneof![
        Just(Term::Len),
        Just(Term::Sum),
        Just(Term::MaxEntry),
        (0u64..20).prop_map(Term::Entry),
        any::<u64>().prop_map(Term::Lit),
    ]
}

fn op() -> impl Strategy<Value = CmpOp> {
    prop_oneof![
        Just(CmpOp::Lt),
        Just(CmpOp::Le),
        Just(CmpOp::Gt),
        Just(CmpOp::Ge),
        Just(CmpOp::Eq),
        Just(CmpOp::Ne),
    ]
}

fn expr() -> impl Strategy<Value = Expr> {
    let leaf = (op(), term(), term()).prop_map(|(o, x, y)| Expr::Cmp(o, x, y));
    leaf.prop_recursive(4, 32, 4, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Not(Box::new(e))),
            prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::And),
            prop::collection::vec(inner, 2..4).prop_map(Expr::Or),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn printed_predicates_parse_back(e in expr()) {
        let printed = e.to_string();
        prop_assert_eq!(parse_predicate(&printed).unwrap(), e, "{}", printed);
    }

    #[test]
    fn parsing_never_panics(src in "[a-z()<>=! 0-9]{0,30}") {
        let _ = parse_predicate(&src);
    }
}

#[test]
fn spellings_agree() {
    let a = parse_predicate("not (len ≤ 2) and entry(0) ≠ 1").unwrap();
    let b = parse_predicate("not (len <= 2) and entry(0) != 1").unwrap();
    assert_eq!(a, b);
    assert_eq!(
        parse_predicate("len == 3").unwrap(),
        parse_predicate("len = 3").unwrap()
    );
}

#[test]
fn builtin_ids() {
    let inst = builtin().unwrap();
    assert!(inst.fan_ids().any(|id| id == "uneven"));
    assert!(inst.bar_ids().any(|id| id == "q_p_len2"));
    assert!(inst.function_ids().any(|id| id == "weighted5"));
    assert!(inst.metric_ids().any(|id| id == "cantor"));
    assert!(matches!(
        inst.bar("nope"),
        Err(Error::UnknownId { kind: "bar", .. })
    ));
}

#[test]
fn load_errors() {
    assert!(matches!(Instance::from_json("{"), Err(Error::Schema(_))));
    assert!(matches!(
        Instance::from_json(r#"{"fan": "kary:x"}"#),
        Err(Error::Schema(_) | Error::Validation { .. })
    ));
    let bad_pred =
        Instance::from_json(r#"{"fan": "binary", "bar": {"kind": "dec", "pred": "len >"}}"#);
    assert!(bad_pred.is_err());
    let missing = Instance::from_json(
        r#"{"bar": {"kind": "cset", "from_pi01": {"bar": "p", "fan": "binary"}}}"#,
    );
    assert!(
        matches!(
            missing,
            Err(Error::UnknownId { .. }) | Err(Error::Validation { .. })
        ),
        "{:?}",
        missing.err()
    );
    let path = std::env::temp_dir().join("bartool-does-not-exist.json");
    assert!(matches!(Instance::load(&path), Err(Error::Schema(_))));
}

#[test]
fn singular_declarations() {
    let inst =
        Instance::from_json(r#"{"fan": "kary:4", "bar": {"kind": "dec", "pred": "len >= 1"}}"#)
            .unwrap();
    assert_eq!(inst.fan("default").unwrap().children(&[]), vec![0, 1, 2, 3]);
    assert!(inst
        .bar("default")
        .unwrap()
        .check(&[2], 0)
        .unwrap()
        .is_none());
}
