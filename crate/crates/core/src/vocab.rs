//! Namespaces and well-known terms.

use alloc::string::String;
use alloc::vec::Vec;

use crate::rdf::Iri;

macro_rules! terms {
    ($ns:ident; $($name:ident => $local:literal),* $(,)?) => {
        $(
            pub fn $name() -> $crate::rdf::Iri {
                $crate::rdf::Iri::from_static($ns, $local)
            }
        )*
    };
}

pub mod rdf {
    pub const NS: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
    pub const TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
    pub const LANG_STRING: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#langString";
    terms!(NS; type_ => "type", lang_string => "langString");
}

pub mod rdfs {
    pub const NS: &str = "http://www.w3.org/2000/01/rdf-schema#";
    terms!(NS;
        label => "label",
        comment => "comment",
        is_defined_by => "isDefinedBy",
        see_also => "seeAlso",
        sub_class_of => "subClassOf",
    );
}

pub mod owl {
    pub const NS: &str = "http://www.w3.org/2002/07/owl#";
    terms!(NS;
        named_individual => "NamedIndividual",
        class => "Class",
        object_property => "ObjectProperty",
        datatype_property => "DatatypeProperty",
    );
}

pub mod xsd {
    pub const NS: &str = "http://www.w3.org/2001/XMLSchema#";
    pub const STRING: &str = "http://www.w3.org/2001/XMLSchema#string";
    terms!(NS;
        string => "string",
        integer => "integer",
        decimal => "decimal",
        double => "double",
        boolean => "boolean",
    );
}

pub mod dc {
    pub const NS: &str = "http://purl.org/dc/elements/1.1/";
    terms!(NS; identifier => "identifier");
}

pub mod skos {
    pub const NS: &str = "http://www.w3.org/2004/02/skos/core#";
    terms!(NS; alt_label => "altLabel");
}

/// The ontology layer: concepts, transformations, relations and their explanations.
pub mod agricomo {
    pub const NS: &str = "http://www.ucd.ie/consus/AgriComO#";
    terms!(NS;
        knowledge_model => "KnowledgeModel",
        regressor => "Regressor",
        classifier => "Classifier",
        clusterer => "Clusterer",
        association_rule_model => "AssociationRuleModel",
        regression => "Regression",
        classification => "Classification",
        clustering => "Clustering",
        association_rule => "AssociationRule",
        dataset => "Dataset",
        article => "Article",
        state => "State",
        has_algorithm => "hasAlgorithm",
        has_condition => "hasCondition",
        predicts => "predicts",
        has_transformation => "hasTransformation",
        has_state => "hasState",
        has_dataset => "hasDataset",
        defined_in => "definedIn",
        has_evaluation => "hasEvaluation",
        has_antecedent => "hasAntecedent",
        has_consequent => "hasConsequent",
        has_cluster => "hasCluster",
        has_interval => "hasInterval",
        has_unit => "hasUnit",
        has_value => "hasValue",
        has_value_range => "hasValueRange",
        has_precision => "hasPrecision",
        applies_to => "appliesTo",
        agronomic_index => "AgronomicIndex",
        agroclimatic_index => "AgroclimaticIndex",
        vegetation_index => "VegetationIndex",
        ecological_index => "EcologicalIndex",
        pretrain_model => "PretrainModel",
        mining_algorithm => "MiningAlgorithm",
        evaluation_metric => "EvaluationMetric",
        data_transformation => "DataTransformation",
    );

    pub fn term(local: &str) -> crate::rdf::Iri {
        crate::rdf::Iri::from_static(NS, local)
    }
}

/// The knowledge-map repository layer: instances minted for wrapped items.
pub mod agrikmaps {
    pub const NS: &str = "http://www.ucd.ie/consus/AgriKMaps#";

    pub fn term(local: &str) -> crate::rdf::Iri {
        crate::rdf::Iri::from_static(NS, local)
    }
}

/// The prefix bindings every graph starts with.
pub fn default_prefixes() -> Vec<(String, Iri)> {
    [
        ("rdf", rdf::NS),
        ("rdfs", rdfs::NS),
        ("owl", owl::NS),
        ("xsd", xsd::NS),
        ("dc", dc::NS),
        ("AgriComO", agricomo::NS),
        ("AgriKMaps", agrikmaps::NS),
    ]
    .into_iter()
    .map(|(p, ns)| (String::from(p), Iri::from_static(ns, "")))
    .collect()
}
