use std::fs;

use dirac_cavity::bogoliubov::{build_matrices, Region};
use dirac_cavity::io::{cache_load, cache_store, load_or_build, read_table, render_cache, write_table, RunManifest};
use dirac_cavity::{Error, FieldConfig};

fn config() -> FieldConfig {
    // r = 1/3 with m = 0 makes some local and global frequencies coincide,
    // so the cache also carries fallback entries
    FieldConfig::new(0.0, 1.0 / 3.0, 4, 30)
}

#[test]
fn cache_round_trip_is_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cache.csv");
    let set = build_matrices(&config()).unwrap();
    assert!(set.fallback_count() > 0);
    cache_store(&path, &set).unwrap();
    let back = cache_load(&path, &config()).unwrap();
    for region in [Region::Left, Region::Right] {
        for (x, y) in set.alpha(region).iter().zip(back.alpha(region)).chain(set.beta(region).iter().zip(back.beta(region))) {
            assert_eq!(x.re.to_bits(), y.re.to_bits());
            assert_eq!(x.im.to_bits(), y.im.to_bits());
        }
        assert_eq!(set.fallback(region), back.fallback(region));
    }
    assert_eq!(render_cache(&back), fs::read_to_string(&path).unwrap());
}

#[test]
fn rendering_is_deterministic() {
    let a = render_cache(&build_matrices(&config()).unwrap());
    let b = render_cache(&build_matrices(&config()).unwrap());
    assert_eq!(a, b);
}

#[test]
fn mismatched_configuration_invalidates_the_cache() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cache.csv");
    cache_store(&path, &build_matrices(&config()).unwrap()).unwrap();
    let other_mass = FieldConfig { mass_times_r: 0.5, ..config() };
    assert!(matches!(cache_load(&path, &other_mass), Err(Error::CacheInvalid { .. })));
    let other_tol = FieldConfig { quad_tol: 1e-9, ..config() };
    assert!(matches!(cache_load(&path, &other_tol), Err(Error::CacheInvalid { .. })));
}

#[test]
fn damaged_files_are_parse_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cache.csv");
    cache_store(&path, &build_matrices(&config()).unwrap()).unwrap();
    let text = fs::read_to_string(&path).unwrap();

    let truncated: String = text.lines().take(text.lines().count() - 5).map(|l| format!("{l}\n")).collect();
    fs::write(&path, truncated).unwrap();
    assert!(matches!(cache_load(&path, &config()), Err(Error::Parse { .. })));

    let lines: Vec<&str> = text.lines().collect();
    let body = lines.iter().position(|l| l.starts_with("left,")).unwrap();
    let mut duplicated = lines.clone();
    duplicated[body + 1] = lines[body];
    fs::write(&path, duplicated.join("\n")).unwrap();
    match cache_load(&path, &config()) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, body + 2),
        other => panic!("{other:?}"),
    }

    let garbled = text.replacen("left,1,1,", "left,1,1,x", 1);
    fs::write(&path, garbled).unwrap();
    assert!(matches!(cache_load(&path, &config()), Err(Error::Parse { .. })));
}

#[test]
fn load_or_build_reuses_a_matching_cache() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cache.csv");
    let (first, hit) = load_or_build(&path, &config()).unwrap();
    assert!(!hit);
    let (second, hit) = load_or_build(&path, &config()).unwrap();
    assert!(hit);
    assert_eq!(first.beta, second.beta);
    let other = FieldConfig { n_global: 31, ..config() };
    let (_, hit) = load_or_build(&path, &other).unwrap();
    assert!(!hit);
    assert!(cache_load(&path, &other).is_ok());
}

#[test]
fn missing_cache_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(cache_load(&dir.path().join("none.csv"), &config()), Err(Error::Io(_))));
}

#[test]
fn manifest_hashes_written_files() {
    let dir = tempfile::tempdir().unwrap();
    write_table(&dir.path().join("t.csv"), &["x", "y"], &[vec![0.1, 1.0 / 3.0]]).unwrap();
    let (cols, rows) = read_table(&dir.path().join("t.csv")).unwrap();
    assert_eq!(cols, ["x", "y"]);
    assert_eq!(rows[0][1], 1.0 / 3.0);

    let mut m = RunManifest::new("test", serde_json::to_value(config()).unwrap());
    m.record(dir.path(), "t.csv").unwrap();
    let path = m.write(dir.path()).unwrap();
    let back: RunManifest = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(back, m);
    back.verify(dir.path()).unwrap();

    fs::write(dir.path().join("t.csv"), "x,y\n0,0\n").unwrap();
    assert!(matches!(back.verify(dir.path()), Err(Error::CacheInvalid { .. })));
}
