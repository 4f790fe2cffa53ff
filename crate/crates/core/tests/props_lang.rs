mod common;

use common::*;
use hyperflow::error::Span;
use hyperflow::lang::ast::*;
use hyperflow::lang::{compile, parse, pretty};
use hyperflow::random::{self, TrialRng};
use hyperflow::rat::Rat;
use hyperflow::AbstractHmm;
use proptest::prelude::*;

const KEYWORDS: &[&str] = &[
    "state", "channel", "markov", "prior", "reveal", "leak", "print", "update", "step", "repeat", "skip", "bits",
    "cols",
];

fn ident() -> impl Strategy<Value = String> {
    "[a-z][a-z0-9_]{0,4}".prop_filter("keyword", |s| !KEYWORDS.contains(&s.as_str()))
}

fn label() -> impl Strategy<Value = String> {
    prop_oneof!["[a-z0-9]{1,3}", "[01]{1,4}"]
}

fn rational() -> impl Strategy<Value = Rat> {
    (0i64..12, 1i64..9).prop_map(|(n, d)| r(n, d))
}

fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        ident().prop_map(Expr::Name),
        "[01]{1,3}".prop_map(Expr::Name),
        (ident(), 0usize..6).prop_map(|(n, i)| Expr::Index(n, i)),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Not(Box::new(e))),
            (inner.clone(), rational(), inner).prop_map(|(a, p, b)| Expr::Choice(Box::new(a), p, Box::new(b))),
        ]
    })
}

fn rows() -> impl Strategy<Value = Vec<(String, Vec<Rat>)>> {
    prop::collection::vec((label(), prop::collection::vec(rational(), 1..4)), 0..4)
}

fn prior_expr() -> impl Strategy<Value = PriorExpr> {
    prop_oneof![
        ident().prop_map(PriorExpr::Named),
        prop::collection::vec(rational(), 1..4).prop_map(PriorExpr::Vector),
        prop::collection::vec((label(), rational()), 1..4).prop_map(PriorExpr::Map),
    ]
}

fn decl() -> impl Strategy<Value = Decl> {
    let span = Span::default();
    prop_oneof![
        (
            prop_oneof![
                (1usize..8).prop_map(StateKind::Bits),
                prop::collection::vec(label(), 1..4).prop_map(StateKind::Labels),
            ],
            prop_oneof![Just(DEFAULT_VAR.to_string()), ident()],
        )
            .prop_map(move |(kind, var)| Decl::State { kind, var, span }),
        (ident(), prop::collection::vec(label(), 0..3), rows()).prop_map(move |(name, cols, rows)| Decl::Channel {
            name,
            cols,
            rows,
            span
        }),
        (ident(), rows()).prop_map(move |(name, rows)| Decl::Markov { name, rows, span }),
        (prop::option::of(ident()), prior_expr()).prop_map(move |(name, value)| Decl::Prior { name, value, span }),
    ]
}

fn stmt() -> impl Strategy<Value = Stmt> {
    let span = Span::default();
    let leaf = prop_oneof![
        expr().prop_map(move |expr| Stmt::Reveal { expr, span }),
        ident().prop_map(move |m| Stmt::Update {
            target: UpdateTarget::Markov(m),
            span
        }),
        (ident(), expr()).prop_map(move |(var, expr)| Stmt::Update {
            target: UpdateTarget::Assign { var, expr },
            span
        }),
        (ident(), ident()).prop_map(move |(channel, markov)| Stmt::Step { channel, markov, span }),
        Just(Stmt::Skip { span }),
    ];
    leaf.prop_recursive(3, 16, 3, move |inner| {
        (0usize..6, prop::collection::vec(inner, 0..3)).prop_map(move |(count, body)| Stmt::Repeat {
            count,
            body,
            span,
        })
    })
}

fn program() -> impl Strategy<Value = Program> {
    (prop::collection::vec(decl(), 0..4), prop::collection::vec(stmt(), 0..5))
        .prop_map(|(decls, body)| Program { decls, body })
}

const SOUP: &[&str] = &[
    "state", "bits", "2", "{", "}", "(", ")", "[", "]", ";", ":", ",", "=", ":=", "-", "1/2<>", "<>", "reveal",
    "update", "step", "repeat", "skip", "channel", "markov", "prior", "cols", "xs", "oneBit", "invert", "1/3", "0",
    "#", "\n", "/", "x",
];

/// Statements over the default two-bit state.
const FRAGMENTS: &[&str] = &[
    "reveal oneBit;",
    "update invert;",
    "reveal xs[0] 1/3<> xs[1];",
    "update xs := xs 1/4<> -xs;",
    "reveal xs;",
    "update xs := 01 1/2<> xs;",
    "skip;",
    "repeat 2 { reveal xs[1] 2/3<> -xs[0] }",
];

fn channel_source(g: &mut TrialRng, n: usize, k: usize) -> String {
    let s = space(n);
    let c = random::channel(g, &s, k);
    let cols: Vec<String> = (0..k).map(|y| format!("y{y}")).collect();
    let mut out = format!(
        "state {{{}}};\nchannel c {{ cols {};",
        s.labels().join(", "),
        cols.join(" ")
    );
    for (x, row) in c.entries().iter().enumerate() {
        let vals: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out += &format!(" {}: {};", s.label(x), vals.join(" "));
    }
    out + " }\n"
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn parser_is_total_on_text(src in "\\PC{0,80}") {
        let _ = parse(&src);
    }

    #[test]
    fn parser_is_total_on_token_soup(words in prop::collection::vec(prop::sample::select(SOUP), 0..40)) {
        let _ = parse(&words.join(" "));
    }

    #[test]
    fn printed_programs_parse_back(p in program()) {
        let text = pretty::program(&p);
        let back = parse(&text).map_err(|e| TestCaseError::fail(format!("{e} in\n{text}")))?;
        prop_assert_eq!(back, p);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn concatenation_is_sequencing(
        a in prop::collection::vec(prop::sample::select(FRAGMENTS), 0..4),
        b in prop::collection::vec(prop::sample::select(FRAGMENTS), 0..4),
        seed: u64,
    ) {
        let (a, b) = (a.join("\n"), b.join("\n"));
        let (whole, prior) = compile(&format!("{a}\n{b}")).unwrap();
        let (ha, _) = compile(&a).unwrap();
        let (hb, _) = compile(&b).unwrap();
        let seq = AbstractHmm::Seq(Box::new(ha), Box::new(hb));
        let mut g = random::seeded(seed);
        for d in [prior.clone(), random::dist(&mut g, prior.space())] {
            prop_assert_eq!(whole.eval(&d).unwrap(), seq.eval(&d).unwrap());
        }
    }

    #[test]
    fn repeated_reveals_are_parallel_channels(seed: u64, n in 1usize..=3, k in 1usize..=3, count in 0usize..=4) {
        let mut g = random::seeded(seed);
        let decl = channel_source(&mut g, n, k);
        let (h, _) = compile(&format!("{decl}repeat {count} {{ reveal c }}")).unwrap();
        let (one, _) = compile(&format!("{decl}reveal c;")).unwrap();
        let AbstractHmm::Channel(c) = one else { panic!("single reveal is a channel") };
        let prior = random::dist(&mut g, c.rows());
        let expected = match count {
            0 => hyperflow::Hyper::point(prior.clone()),
            _ => {
                let mut acc = (*c).clone();
                for _ in 1..count {
                    acc = acc.parallel(&c).unwrap();
                }
                AbstractHmm::denote_channel(acc).eval(&prior).unwrap()
            }
        };
        prop_assert_eq!(h.eval(&prior).unwrap(), expected);
    }
}
