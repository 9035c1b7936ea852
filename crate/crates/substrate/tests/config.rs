//! The TOML examples in the README are the files under tests/data; they must stay in sync and parse.

use substrate::cli::Workspace;
use substrate::geom::InflationRule;
use substrate::subst::{is_primitive, Rule};

const README: &str = include_str!("../../../README.md");

fn example(name: &str) -> String {
    let text = std::fs::read_to_string(format!("{}/tests/data/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap();
    assert!(README.contains(text.trim_end()), "README is missing the contents of {name}");
    text
}

#[test]
fn word_rule_example() {
    let r = Rule::from_toml(&example("fibonacci.toml")).unwrap();
    assert_eq!(r.name(), "fib");
    assert_eq!(r.dim(), 1);
    assert!(is_primitive(&r));
}

#[test]
fn block_rule_examples() {
    let pd = Rule::from_toml(&example("period_doubling.toml")).unwrap();
    assert_eq!(pd.dim(), 1);
    assert!(is_primitive(&pd));
    let chair = Rule::from_toml(&example("chair.toml")).unwrap();
    assert_eq!(chair.dim(), 2);
    let builtin = Rule::builtin("chair").unwrap();
    for a in builtin.alphabet().iter() {
        assert_eq!(chair.image(a), builtin.image(a));
    }
}

#[test]
fn geometry_example() {
    let g = InflationRule::from_toml(&example("square.toml")).unwrap();
    assert_eq!(g.name(), "square_file");
    assert!(g.is_stone());
    assert_eq!(g.matrix(), vec![vec![4]]);
}

#[test]
fn workspace_example() {
    let ws = Workspace::parse(&example("workspace.toml")).unwrap();
    assert_eq!(ws.rule.as_deref(), Some("mask5"));
    assert_eq!(ws.caps.window_schedule, Some(vec![8, 16, 32, 64]));
}

#[test]
fn malformed_files_are_rejected() {
    let bad_rules = [
        "kind = \"word\"\nalphabet = [\"a\"]\n[rules]\na = \"\"\n",
        "kind = \"word\"\nalphabet = [\"a\", \"b\"]\n[rules]\na = \"a a\"\nb = \"a\"\n",
        "kind = \"block\"\nalphabet = [\"a\", \"b\"]\n[rules]\na = [\"a\", \"b\"]\nb = [\"a\"]\n",
        "kind = \"block\"\nalphabet = [\"a\", \"b\"]\n[rules]\na = [[\"a\", \"b\"], [\"b\"]]\nb = [[\"a\", \"b\"], [\"b\", \"a\"]]\n",
        "kind = \"tree\"\nalphabet = [\"a\"]\n[rules]\na = \"a a\"\n",
    ];
    for text in bad_rules {
        assert!(Rule::from_toml(text).is_err(), "accepted:\n{text}");
    }
    let clockwise = example("square.toml").replace("[[0, 0], [1, 0], [1, 1], [0, 1]]", "[[0, 0], [0, 1], [1, 1], [1, 0]]");
    assert!(InflationRule::from_toml(&clockwise).is_err());
    let schedule = "[caps]\nwindow_schedule = [8, 8]\n";
    assert!(Workspace::parse(schedule).is_err());
}
