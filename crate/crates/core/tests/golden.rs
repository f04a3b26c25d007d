//! Exact averaged moments of the tiny universe, pinned in `golden/`.
//! Set `LONGTAIL_LAB_BLESS=1` to rewrite the files from the oracle.

use std::fs;
use std::path::PathBuf;

use longtail_lab::oracle::{format_golden, golden_header, golden_values, parse_golden, TinyUniverse};

fn check(name: &str, u: &TinyUniverse, ts: &[u32]) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    let values = golden_values(u, ts).unwrap();
    if std::env::var_os("LONGTAIL_LAB_BLESS").is_some() {
        fs::write(&path, format_golden(&golden_header(u), &values)).unwrap();
    }
    let pinned = parse_golden(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(pinned, values);
}

#[test]
fn tiny_universe_moments() {
    check("avg_moment_L2_nw4_nc2.txt", &TinyUniverse::new(2, 4, 2).unwrap(), &[1, 2, 3, 7, 19]);
}

#[test]
fn small_universe_moments() {
    check("avg_moment_L3_nw6_nc2.txt", &TinyUniverse::new(3, 6, 2).unwrap(), &[1, 3, 7]);
}
