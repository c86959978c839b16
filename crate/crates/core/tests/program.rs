use hybridpp_core::poly::{PiecewisePolynomial, Polynomial};
use hybridpp_core::program::*;
use hybridpp_core::Error;
use proptest::prelude::*;

const LISTINGS: &str = include_str!("fixtures/listings.pl");

fn roundtrip(p: &Program) -> Program {
    parse(&print(p)).unwrap_or_else(|e| panic!("{e}\n{}", print(p)))
}

#[test]
fn coin_fact() {
    let p = parse("0.6 :: heads.").unwrap();
    assert_eq!(
        p.statements,
        vec![Statement::Prob(ProbFact {
            probability: 0.6,
            atom: Atom::prop("heads")
        })]
    );
}

#[test]
fn mixture_clause_has_two_literals() {
    let p = parse("mix(I) :- heads, intelligence(I).").unwrap();
    let c = p.clauses().next().unwrap();
    assert_eq!(c.head, Atom::new("mix", vec![Term::var("I")]));
    assert_eq!(c.body.len(), 2);
}

#[test]
fn builtin_in_body() {
    let p = parse("average :- intelligence(I), ininterval(I,65,85).").unwrap();
    let c = p.clauses().next().unwrap();
    let b = c.body[1].atom();
    assert!(b.is_builtin());
    assert_eq!(b.args[1], Term::number(65.0));
}

#[test]
fn listings_round_trip() {
    let p = parse(LISTINGS).unwrap();
    assert_eq!(p.statements.len(), 31);
    assert_eq!(roundtrip(&p), p);
    let text = print(&p);
    assert!(text.contains("-0.024719432823743857 + 0.0005171566890546171*I :: int_low(I)."));
    assert!(text.contains("\\+ heads"));
    assert!(text.contains("(I, Gaussian(90, 10)) :: intelligence(I)."));
}

#[test]
fn empty_program_prints_nothing() {
    assert_eq!(print(&parse("  % nothing\n").unwrap()), "");
    assert_eq!(print(&Program::default()), "");
}

#[test]
fn syntax_errors_carry_positions() {
    match parse("a :- b.\nc :- d e.") {
        Err(Error::Syntax { line, column, .. }) => assert_eq!((line, column), (2, 8)),
        other => panic!("{other:?}"),
    }
    assert!(matches!(parse("a :- b"), Err(Error::Syntax { line: 1, .. })));
    assert!(matches!(parse("1.5 :: a."), Err(Error::Semantic(_))));
    assert!(parse("x^1.5 :: a(X).").is_err());
}

#[test]
fn substitution() {
    let p = parse_atom("p(X, Y)").unwrap();
    let mut theta = Substitution::new();
    theta.insert("X".into(), Term::symbol("a"));
    assert_eq!(substitute(&p, &theta), parse_atom("p(a, Y)").unwrap());

    let mut theta = Substitution::new();
    theta.insert(
        "X".into(),
        parse_atom("f(b)").map(|a| Term::Compound(a.predicate, a.args)).unwrap(),
    );
    assert_eq!(
        substitute(&parse_atom("p(X)").unwrap(), &theta),
        parse_atom("p(f(b))").unwrap()
    );

    let ground = parse_atom("q(a, 3)").unwrap();
    theta.insert("Z".into(), Term::symbol("c"));
    assert_eq!(substitute(&ground, &theta), ground);
}

#[test]
fn simultaneous_substitution() {
    let mut theta = Substitution::new();
    theta.insert("X".into(), Term::var("Y"));
    theta.insert("Y".into(), Term::var("X"));
    assert_eq!(
        substitute(&parse_atom("p(X, Y)").unwrap(), &theta),
        parse_atom("p(Y, X)").unwrap()
    );
}

const UNIFORM: &str = "
1*X^0 :: att_1(X).
att_1(X) :- att(X), ininterval(X, 0, 1).
avg :- att(X), ininterval(X, 0.2, 0.5).
query(avg).
";

#[test]
fn load_builds_attribute_density() {
    let hp = load(parse(UNIFORM).unwrap()).unwrap();
    let attr = &hp.attributes[&PredKey::new("att", 1)];
    assert_eq!(attr.continuous, vec![0]);
    assert_eq!(attr.support, vec![(0.0, 1.0)]);
    assert!((attr.pieces[0].mass - 1.0).abs() < 1e-15);
    assert_eq!(hp.piece_owner[&PredKey::new("att_1", 1)], PredKey::new("att", 1));
}

#[test]
fn load_rejects_non_densities_with_the_mass() {
    let text = "0.5*X^0 :: a_1(X). a_1(X) :- a(X), ininterval(X, 0, 1).";
    match load(parse(text).unwrap()) {
        Err(Error::NotADensity { mass, .. }) => assert!((mass - 0.5).abs() < 1e-12),
        other => panic!("{other:?}"),
    }
    let negative = "2 - 4*X :: a_1(X). a_1(X) :- a(X), ininterval(X, 0, 1).";
    assert!(matches!(load(parse(negative).unwrap()), Err(Error::NotADensity { .. })));
}

#[test]
fn load_rejects_semantic_problems() {
    let cases = [
        // duplicate density
        "1*X^0 :: a_1(X). 1*X^0 :: a_1(X). a_1(X) :- a(X), ininterval(X, 0, 1).",
        // no guard
        "1*X^0 :: a_1(X).",
        // negation through recursion
        "p :- \\+ q. q :- \\+ p.",
        // unsafe
        "p(X) :- \\+ q(X).",
        // undefined query
        "query(nothing).",
        // unbounded piece
        "0.01*X^0 :: a_1(X). a_1(X) :- a(X), above(X, 0).",
        // weight variable not in the guard
        "1*Y^0 + 0*Y :: a_1(X). a_1(X) :- a(X), ininterval(X, 0, 1).",
        // parametric weights
        "(I, Gaussian(90, 10)) :: intelligence(I).",
        // overlapping pieces
        "0.5*X^0 :: a_1(X). a_1(X) :- a(X), ininterval(X, 0, 1.5). 0.5*X^0 :: a_2(X). a_2(X) :- a(X), ininterval(X, 1, 2).",
    ];
    for text in cases {
        assert!(load(parse(text).unwrap()).is_err(), "{text}");
    }
}

#[test]
fn half_lines_close_where_the_weight_vanishes() {
    // 2X on [0, 1] written with an open lower end
    let text = "
        2*X :: lo(X). lo(X) :- a(X), below(X, 1).
    ";
    let hp = load(parse(text).unwrap()).unwrap();
    let attr = &hp.attributes[&PredKey::new("a", 1)];
    assert_eq!(attr.support, vec![(0.0, 1.0)]);
    assert!((attr.pieces[0].mass - 1.0).abs() < 1e-12);
    // 2X - 2 on [1, 2] with an open upper end
    let text = "
        0.5*X^0 :: lo(X). lo(X) :- a(X), ininterval(X, 0, 1).
        X - 1 :: hi(X). hi(X) :- a(X), above(X, 1).
    ";
    assert!(matches!(load(parse(text).unwrap()), Err(Error::Semantic(_))));
    let text = "
        0.75*X^0 :: lo(X). lo(X) :- a(X), ininterval(X, 0, 1).
        1.5 - 0.5*X :: hi(X). hi(X) :- a(X), above(X, 2).
    ";
    let hp = load(parse(text).unwrap()).unwrap();
    let attr = &hp.attributes[&PredKey::new("a", 1)];
    assert_eq!(attr.support, vec![(0.0, 3.0)]);
    assert!((attr.pieces[1].mass - 0.25).abs() < 1e-12);
}

#[test]
fn int_low_listing_closes_at_its_root() {
    let text = "
        -0.024719432823743857 + 0.0005171566890546171*I :: int_low(I).
        int_low(I) :- intelligence(I), below(I, 70).
    ";
    let err = load(parse(text).unwrap()).unwrap_err();
    let Error::NotADensity { mass, .. } = err else {
        panic!("{err:?}")
    };
    // the lone low piece spans [47.80, 70] and carries about 0.12
    assert!((mass - 0.12745233520414123).abs() < 1e-9, "{mass}");
}

#[test]
fn multivariate_attribute() {
    let text = "
        4*X*Y :: s_1(X, Y).
        s_1(X, Y) :- s(X, Y), ininterval(X, 0, 1), ininterval(Y, 0, 1).
        corner :- s(X, Y), ininterval(X, 0, 0.5), ininterval(Y, 0, 0.5).
    ";
    let hp = load(parse(text).unwrap()).unwrap();
    let attr = &hp.attributes[&PredKey::new("s", 2)];
    assert_eq!(attr.dimension(), 2);
    let p = attr.density.probability(&[(0.0, 0.5), (0.0, 0.5)]).unwrap();
    assert!((p - 0.0625).abs() < 1e-15);
}

#[test]
fn emitted_fragments_read_back_exactly() {
    let pp = PiecewisePolynomial::new(
        vec![50.0, 70.0, 90.0, 130.0],
        vec![
            Polynomial::anchored([0.001, 0.000_123_456_789_012_345_67, 1.5e-6], 50.0),
            Polynomial::anchored([0.0071, -0.000_2, 3.3e-7, -1e-9], 70.0),
            Polynomial::anchored([0.004], 90.0),
        ],
    )
    .unwrap();
    let scale = 1.0 / pp.total_mass();
    let pieces: Vec<Polynomial> = pp.pieces().iter().map(|p| p.scaled(scale)).collect();
    let pp = PiecewisePolynomial::new(pp.cutpoints().to_vec(), pieces).unwrap();
    let frag = density_fragment("intelligence", &pp, &FragmentOptions::default()).unwrap();
    let text = print(&frag);
    assert!(
        text.contains("intelligence_1(I) :- intelligence(I), ininterval(I, 50, 70)."),
        "{text}"
    );
    assert!(text.contains("*I^0 :: intelligence_3(I)."), "{text}");
    let hp = load(parse(&text).unwrap()).unwrap();
    let attr = &hp.attributes[&PredKey::new("intelligence", 1)];
    for (piece, original) in attr.pieces.iter().zip(pp.pieces()) {
        let Weight::Univariate(w) = &piece.weight else { panic!() };
        if original.degree() > 0 {
            assert_eq!(w, original);
        } else {
            assert_eq!(w.coefficients(), original.coefficients());
        }
    }
}

#[test]
fn keyed_fragment_and_aliases() {
    let pp = PiecewisePolynomial::new(
        vec![0.0, 1.0, 2.0],
        vec![Polynomial::anchored([0.5], 0.0), Polynomial::anchored([0.5], 1.0)],
    )
    .unwrap();
    let opts = FragmentOptions {
        aliases: Some(vec!["low".into(), "high".into()]),
        keyed: true,
    };
    let text = print(&density_fragment("nrhours", &pp, &opts).unwrap());
    assert!(text.contains("low(E) :- nrhours(E, N), ininterval(N, 0, 1)."), "{text}");
    let hp = load(parse(&text).unwrap()).unwrap();
    assert_eq!(hp.attributes[&PredKey::new("nrhours", 2)].continuous, vec![1]);
}

fn name() -> impl Strategy<Value = String> {
    prop_oneof!["[a-z][a-z0-9_]{0,5}", "[A-Za-z ']{1,6}".prop_map(|s| s),]
}

fn number() -> impl Strategy<Value = f64> {
    prop_oneof![
        any::<f64>().prop_filter("finite", |x| x.is_finite()),
        (-1000i32..1000).prop_map(f64::from),
        (0.0f64..1.0),
    ]
    .prop_map(|x| if x == 0.0 { 0.0 } else { x })
}

fn term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        name().prop_map(Term::Symbol),
        number().prop_map(Term::number),
        "[A-Z][a-z0-9]{0,3}".prop_map(Term::Var),
    ];
    leaf.prop_recursive(2, 8, 3, |inner| {
        (name(), prop::collection::vec(inner, 1..3)).prop_map(|(f, args)| Term::Compound(f, args))
    })
}

fn atom() -> impl Strategy<Value = Atom> {
    (name(), prop::collection::vec(term(), 0..3)).prop_map(|(p, args)| Atom::new(p, args))
}

fn literal() -> impl Strategy<Value = Literal> {
    (atom(), any::<bool>()).prop_map(|(a, neg)| if neg { Literal::Neg(a) } else { Literal::Pos(a) })
}

fn poly_expr() -> impl Strategy<Value = PolyExpr> {
    let leaf = prop_oneof![number().prop_map(PolyExpr::Num), "[A-Z][0-9]?".prop_map(PolyExpr::Var),];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| PolyExpr::Neg(Box::new(a))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| PolyExpr::Add(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| PolyExpr::Sub(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| PolyExpr::Mul(Box::new(a), Box::new(b))),
            (inner, 0u32..4).prop_map(|(a, n)| PolyExpr::Pow(Box::new(a), n)),
        ]
    })
}

fn statement() -> impl Strategy<Value = Statement> {
    prop_oneof![
        (atom(), prop::collection::vec(literal(), 0..3)).prop_map(|(h, b)| Statement::Clause(Clause::new(h, b))),
        (0.0f64..=1.0, atom()).prop_map(|(p, a)| Statement::Prob(ProbFact {
            probability: p,
            atom: a
        })),
        (poly_expr(), atom())
            .prop_filter("non-numeric weight", |(w, _)| !matches!(w, PolyExpr::Num(_)))
            .prop_map(|(w, a)| Statement::Continuous(ContinuousFact { weight: w, atom: a })),
        atom().prop_map(Statement::Query),
        literal().prop_map(Statement::Evidence),
    ]
}

proptest! {
    #[test]
    fn print_then_parse_is_identity(statements in prop::collection::vec(statement(), 0..6)) {
        let p = Program::new(statements);
        prop_assert_eq!(roundtrip(&p), p);
    }

    #[test]
    fn anchored_weights_round_trip(
        coeffs in prop::collection::vec(-1e3f64..1e3, 2..9),
        origin in -1e4f64..1e4,
    ) {
        let p = Polynomial::anchored(coeffs, origin);
        prop_assume!(p.degree() > 0);
        let text = weight::expression(&p, "X").to_string();
        let back = weight::univariate(&parse_poly_expr(&text).unwrap(), "X").unwrap();
        prop_assert_eq!(back, p);
    }
}
