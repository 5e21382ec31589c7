mod common;

use std::collections::BTreeSet;
use std::fs;

use common::oracle::{self, Rel};
use common::{corpus, corpus_dir};
use tql_core::ast::{CmpOp, PropExpr, Signature};
use tql_core::{parse_query, run, EngineConfig};

fn naive(query: &str) -> tql_core::QueryReport {
    let catalog = corpus();
    run(&parse_query(query).unwrap(), &catalog, &EngineConfig::default()).unwrap()
}

/// Each expected relation matches exactly one result and nothing is left over.
fn same_relations(got: &[Rel], expected: &[Rel]) -> bool {
    got.len() == expected.len() && expected.iter().all(|e| got.iter().filter(|g| *g == e).count() == 1)
}

#[test]
fn constraint_search_finds_every_gdp_table() {
    // header scan straight from the files
    let mut expected = BTreeSet::new();
    for entry in fs::read_dir(corpus_dir()).unwrap() {
        let path = entry.unwrap().path();
        let text = fs::read_to_string(&path).unwrap();
        let header = text.lines().next().unwrap_or("");
        if header.split(',').any(|c| c.trim_matches('"').to_lowercase().contains("gdp")) {
            expected.insert(path.file_stem().unwrap().to_string_lossy().into_owned());
        }
    }
    assert_eq!(expected.len(), 3);

    let report = naive(r#"Q : {COL*["gdp"]};"#);
    let got: BTreeSet<String> = report.results.iter().map(|t| t.name().unwrap().to_owned()).collect();
    assert_eq!(got, expected);
    assert!(report.results.iter().all(|t| t.row_count() > 0));
}

#[test]
fn composition_matches_a_nested_loop_join() {
    let catalog = corpus();
    let gdp = Rel::of(catalog.table("cities_gdp").unwrap());
    let pop = Rel::of(catalog.table("cities_population").unwrap());
    let product = oracle::product(&gdp, "cities_gdp", &pop, "cities_population");
    let (i, j) = (
        product.names.iter().position(|n| n == "cities_gdp.nm").unwrap(),
        product.names.iter().position(|n| n == "cities_population.nm").unwrap(),
    );
    let expected = oracle::select(&product, |_, row| oracle::compare_values(CmpOp::Eq, &row[i], &row[j]));
    assert!(!expected.rows.is_empty());

    let report = naive(r#"JOIN[S["nm"] = T["nm"]] (S : {SRC[cities_gdp]}) (T : {SRC[cities_population]});"#);
    assert_eq!(report.results.len(), 1);
    let joined = &report.results[0];
    assert!(oracle::matches(joined, &expected), "{:?}\nvs\n{:?}", Rel::of(joined), expected);
    let provenance: Vec<&str> = joined.provenance().iter().map(String::as_str).collect();
    assert_eq!(provenance, ["cities_gdp", "cities_population"]);
}

#[test]
fn combined_query_matches_brute_force_enumeration() {
    let catalog = corpus();
    let sig = Signature::and(
        Signature::prop(PropExpr::ColStar("obesity".into())),
        Signature::prop(PropExpr::ColStar("social media".into())),
    );
    let mut expected: Vec<Rel> = Vec::new();
    for a in catalog.tables() {
        for b in catalog.tables() {
            let Some(joined) = oracle::natural_join(&Rel::of(a), &Rel::of(b)) else { continue };
            // a⋈b and b⋈a differ only in column order and are one table
            let joined = joined.normalized();
            let names = joined.names.clone();
            let satisfied = |k: &str| names.iter().any(|n| n.to_lowercase().contains(k));
            if satisfied("obesity") && satisfied("social media") && !expected.contains(&joined) {
                expected.push(joined);
            }
        }
    }
    assert!(!expected.is_empty());

    let report = naive(r#"(JOIN S T) : {COL*["obesity"] AND COL*["social media"]};"#);
    let got: Vec<Rel> = report.results.iter().map(|t| Rel::of(t).normalized()).collect();
    assert!(same_relations(&got, &expected), "got {} tables, expected {}", got.len(), expected.len());
    assert!(report.results.iter().all(|t| oracle::holds(&sig, t)));
}

#[test]
fn similarity_search_contains_its_reference() {
    let report = naive(r#"A = X : {SRC[cities_population]}; Q : {SIML[A]};"#);
    let names: Vec<&str> = report.results.iter().filter_map(|t| t.name()).collect();
    assert!(names.contains(&"cities_population"));
    assert!(names.contains(&"cities_population_2010"));
    assert!(!names.contains(&"flights"));
}

#[test]
fn key_search_finds_referencing_tables() {
    let report = naive(r#"K = X : {SRC[customers]}; Q : {PFKEY[K]};"#);
    let names: Vec<&str> = report.results.iter().filter_map(|t| t.name()).collect();
    assert!(names.contains(&"orders"), "{names:?}");
}

#[test]
fn an_empty_catalog_yields_nothing() {
    let catalog = tql_core::Catalog::default();
    for q in common::CORPUS_QUERIES {
        let report = run(&parse_query(q).unwrap(), &catalog, &EngineConfig::default()).unwrap();
        assert!(report.collection.is_empty(), "{q}");
    }
}
