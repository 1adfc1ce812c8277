mod common;

use std::collections::BTreeSet;

use axum::http::{Method, StatusCode};
use common::{app, call, get};
use oak::api::ErrorCode;
use oak_core::seed;
use serde_json::{json, Value};

fn code(v: &Value) -> &str {
    v["code"].as_str().unwrap_or_else(|| panic!("not an ApiError: {v}"))
}

fn result_ids(v: &Value) -> BTreeSet<String> {
    v["results"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["iri"].as_str().unwrap().rsplit('#').next().unwrap().to_string())
        .collect()
}

#[tokio::test]
async fn search_endpoint() {
    let (app, _) = app(&common::shipped_data());
    let r = get(&app, "/api/search?q=predict%20soilPH").await;
    assert_eq!(r.status, StatusCode::OK);
    assert!(r.content_type.starts_with("application/json"));
    let v = r.json();
    assert_eq!(v["query"], "predict soilPH");
    assert_eq!(result_ids(&v), BTreeSet::from(["Regressor_004".to_string(), "Classifier_002".to_string()]));
    assert_eq!(v["count"], 2);
    let first = &v["results"][0];
    for key in ["iri", "label", "kind", "algorithms", "conditions", "targets", "states", "evaluations"] {
        assert!(first.get(key).is_some(), "summary lacks {key}");
    }

    let unknown = get(&app, "/api/search?q=predict%20unobtainium").await;
    assert_eq!(unknown.status, StatusCode::NOT_FOUND);
    assert_eq!(code(&unknown.json()), "UnknownConcept");
    let bad = get(&app, "/api/search?q=frobnicate%20soilPH").await;
    assert_eq!(bad.status, StatusCode::BAD_REQUEST);
    assert_eq!(code(&bad.json()), "InvalidQuery");
    assert_eq!(code(&get(&app, "/api/search").await.json()), "InvalidQuery");
}

#[tokio::test]
async fn item_endpoints() {
    let (app, _) = app(&common::shipped_data());
    let list = get(&app, "/api/items").await.json();
    assert_eq!(list["count"], 5);
    let r = get(&app, "/api/items/Regressor_004").await;
    assert_eq!(r.status, StatusCode::OK);
    let v = r.json();
    assert_eq!(v["item"]["label"], "Regressor 004");
    assert_eq!(v["item"]["algorithms"].as_array().unwrap().len(), 4);
    assert!(v["turtle"].as_str().unwrap().contains("AgriKMaps:Regressor_004"));
    let full = get(&app, "/api/items/http:%2F%2Fwww.ucd.ie%2Fconsus%2FAgriKMaps%23Regressor_004").await;
    assert_eq!(full.json(), v);
    let missing = get(&app, "/api/items/Regressor_999").await;
    assert_eq!(missing.status, StatusCode::NOT_FOUND);
    assert_eq!(code(&missing.json()), "UnknownEntity");
}

#[tokio::test]
async fn posting_a_manifest_creates_an_item() {
    let dir = common::scratch_data();
    let (app, repo) = app(dir.path());
    let manifest = seed::MANIFEST_FILES[1].1;
    let r = call(&app, Method::POST, "/api/items?seq=42", Some(manifest)).await;
    assert_eq!(r.status, StatusCode::CREATED, "{}", String::from_utf8_lossy(&r.bytes));
    let v = r.json();
    assert_eq!(v["seq"], 42);
    assert_eq!(v["step_log"].as_array().unwrap().len(), 6);
    assert!(v["item"]["iri"].as_str().unwrap().ends_with("Classifier_042"));
    assert!(dir.path().join("kmaps/Classifier_042.ttl").exists());
    assert_eq!(repo.snapshot().models().len(), 6);
    assert_eq!(get(&app, "/api/items").await.json()["count"], 6);

    let again = call(&app, Method::POST, "/api/items?seq=42", Some(manifest)).await;
    assert_eq!(again.status, StatusCode::CONFLICT);
    assert_eq!(code(&again.json()), "AlreadyExists");

    let bad = call(&app, Method::POST, "/api/items", Some(r#"{"title": "x"}"#)).await;
    assert_eq!(bad.status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(code(&bad.json()), "InvalidManifest");
    assert!(bad.json()["detail"]["path"].is_string());

    let mut m: Value = serde_json::from_str(manifest).unwrap();
    m["conditions"][0]["concept_name"] = json!("unobtainium");
    let r = call(&app, Method::POST, "/api/items", Some(&m.to_string())).await;
    assert_eq!(code(&r.json()), "UnknownConcept");
    assert_eq!(r.status, StatusCode::NOT_FOUND);

    let mut m: Value = serde_json::from_str(manifest).unwrap();
    m["conditions"][0]["transformation_names"] = json!(["Transformation_Nope"]);
    let r = call(&app, Method::POST, "/api/items", Some(&m.to_string())).await;
    assert_eq!(code(&r.json()), "UnknownTransformation");
    assert_eq!(repo.snapshot().models().len(), 6);
}

#[tokio::test]
async fn explain_endpoint() {
    let (app, _) = app(&common::shipped_data());
    let r = get(&app, "/api/explain?uri=AgriComO:Transformation_SoilPH_Tier11&audience=agronomist&form=natural").await;
    assert_eq!(r.status, StatusCode::OK);
    let v = r.json();
    assert_eq!(v["audience"], "agronomist");
    assert_eq!(v["form"], "natural");
    let paragraphs = v["paragraphs"].as_array().unwrap();
    let states = paragraphs.iter().find(|p| p["section"] == "states").unwrap();
    let tier = "http://www.ucd.ie/consus/AgriComO#Transformation_SoilPH_Tier11";
    let rows = states["sentences"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|s| !s["entities"].as_array().unwrap().iter().any(|e| e == tier));
    assert_eq!(rows.count(), 11);

    let formal = get(&app, "/api/explain?uri=AgriKMaps:Regressor_004&form=formal").await.json();
    assert!(!formal["triples"].as_array().unwrap().is_empty());
    let graphic = get(&app, "/api/explain?uri=AgriKMaps:Regressor_004&form=graphic").await.json();
    assert_eq!(graphic["graph"]["nodes"].as_array().unwrap().len(), 9);

    let bogus = get(&app, "/api/explain?uri=bogus").await;
    assert_eq!(bogus.status, StatusCode::NOT_FOUND);
    assert_eq!(code(&bogus.json()), "UnknownEntity");
    let absent = get(&app, "/api/explain?uri=AgriComO:Nothing").await;
    assert_eq!(code(&absent.json()), "UnknownEntity");
    let aud = get(&app, "/api/explain?uri=AgriComO:SoilPH&audience=ceo").await;
    assert_eq!(aud.status, StatusCode::BAD_REQUEST);
    assert_eq!(code(&aud.json()), "InvalidRequest");
    assert_eq!(code(&get(&app, "/api/explain").await.json()), "InvalidRequest");
}

#[tokio::test]
async fn concept_and_graph_endpoints() {
    let (app, _) = app(&common::shipped_data());
    let c = get(&app, "/api/concepts/Transformation_SoilPH_Max").await.json();
    assert_eq!(c["entry"]["unit"], "pH");
    assert_eq!(c["category_title"], "Data Transformations");
    let missing = get(&app, "/api/concepts/Nope").await;
    assert_eq!((missing.status, code(&missing.json())), (StatusCode::NOT_FOUND, "UnknownEntity"));

    let g = get(&app, "/api/graph?uri=AgriKMaps:Regressor_004").await.json();
    assert_eq!(g["nodes"].as_array().unwrap().len(), 9);
    assert_eq!(g["version"], 1);
    let deeper = get(&app, "/api/graph?uri=AgriKMaps:Regressor_004&depth=2").await.json();
    assert!(deeper["nodes"].as_array().unwrap().len() > 9);
    let zero = get(&app, "/api/graph?uri=AgriKMaps:Regressor_004&depth=0").await;
    assert_eq!((zero.status, code(&zero.json())), (StatusCode::BAD_REQUEST, "InvalidDepth"));
    let junk = get(&app, "/api/graph?uri=AgriKMaps:Regressor_004&depth=deep").await;
    assert_eq!(code(&junk.json()), "InvalidRequest");
}

#[tokio::test]
async fn query_endpoint() {
    let (app, _) = app(&common::shipped_data());
    let q = "PREFIX AgriComO: <http://www.ucd.ie/consus/AgriComO#>\n\
             SELECT ?m WHERE { ?m AgriComO:hasAlgorithm AgriComO:Algorithm_RF . }";
    let r = call(&app, Method::POST, "/api/query", Some(q)).await;
    assert_eq!(r.status, StatusCode::OK, "{}", String::from_utf8_lossy(&r.bytes));
    let v = r.json();
    assert_eq!(v["variables"], json!(["m"]));
    assert_eq!(v["bindings"].as_array().unwrap().len(), 3);
    let wrapped = call(&app, Method::POST, "/api/query", Some(&json!({ "query": q }).to_string())).await;
    assert_eq!(wrapped.json(), v);
    // ontology triples are queryable too
    let onto = "SELECT ?c WHERE { ?c <http://www.w3.org/2000/01/rdf-schema#label> \"Soil pH\" . }";
    assert_eq!(call(&app, Method::POST, "/api/query", Some(onto)).await.json()["count"], 1);
    let bad = call(&app, Method::POST, "/api/query", Some("SELECT WHERE")).await;
    assert_eq!((bad.status, code(&bad.json())), (StatusCode::BAD_REQUEST, "InvalidQuery"));
}

#[tokio::test]
async fn stats_endpoint() {
    let (app, _) = app(&common::shipped_data());
    let v = get(&app, "/api/stats").await.json();
    let cats = v["categories"].as_array().unwrap();
    assert_eq!(cats.len(), 8);
    let sum: u64 = cats.iter().map(|c| c["count"].as_u64().unwrap()).sum();
    assert_eq!(v["total"].as_u64().unwrap(), sum);
    assert_eq!(v["items"], 5);
}

#[tokio::test]
async fn unknown_routes_and_methods() {
    let (app, _) = app(&common::shipped_data());
    let r = get(&app, "/api/nothing").await;
    assert_eq!((r.status, code(&r.json())), (StatusCode::NOT_FOUND, "UnknownRoute"));
    let r = call(&app, Method::DELETE, "/api/items", None).await;
    assert_eq!((r.status, code(&r.json())), (StatusCode::METHOD_NOT_ALLOWED, "MethodNotAllowed"));
}

#[tokio::test]
async fn identical_gets_are_byte_identical() {
    let (app, _) = app(&common::shipped_data());
    let urls = [
        "/api/search?q=uses%20soil%20pH",
        "/api/items",
        "/api/items/Clusterer_003",
        "/api/explain?uri=AgriKMaps:AssociationRuleModel_005&audience=data_scientist",
        "/api/explain?uri=AgriComO:SoilPH&form=graphic",
        "/api/concepts/SoilPH",
        "/api/graph?uri=AgriKMaps:Classifier_002&depth=2",
        "/api/stats",
        "/api/explain?uri=bogus",
    ];
    for url in urls {
        let a = get(&app, url).await;
        let b = get(&app, url).await;
        assert_eq!(a.bytes, b.bytes, "{url}");
        // a freshly opened repository answers the same way
        let (other, _) = common::app(&common::shipped_data());
        assert_eq!(get(&other, url).await.bytes, a.bytes, "{url}");
    }
}

#[test]
fn every_error_code_has_a_client_or_server_status() {
    for c in ErrorCode::ALL {
        let s = c.status();
        assert!(s.is_client_error() || s.is_server_error(), "{c:?}");
        assert_eq!(serde_json::to_value(c).unwrap(), c.as_str());
    }
}
