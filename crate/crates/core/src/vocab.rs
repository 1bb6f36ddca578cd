//! Namespace constants for the vocabularies the engine understands.

macro_rules! vocabulary {
    ($modname:ident, $ns:literal, { $($konst:ident / $func:ident = $local:literal),* $(,)? }) => {
        pub mod $modname {
            use crate::term::Iri;

            pub const NS: &str = $ns;
            $(
                pub const $konst: &str = concat!($ns, $local);
                pub fn $func() -> Iri {
                    Iri::new_unchecked($konst)
                }
            )*
        }
    };
}

vocabulary!(rdf, "http://www.w3.org/1999/02/22-rdf-syntax-ns#", {
    TYPE / type_ = "type",
    PROPERTY / property = "Property",
    SEQ / seq = "Seq",
    LANG_STRING / lang_string = "langString",
});

vocabulary!(rdfs, "http://www.w3.org/2000/01/rdf-schema#", {
    CLASS / class = "Class",
    SUB_CLASS_OF / sub_class_of = "subClassOf",
    SUB_PROPERTY_OF / sub_property_of = "subPropertyOf",
    DOMAIN / domain = "domain",
    RANGE / range = "range",
    LABEL / label = "label",
});

vocabulary!(owl, "http://www.w3.org/2002/07/owl#", {
    CLASS / class = "Class",
    OBJECT_PROPERTY / object_property = "ObjectProperty",
    DATATYPE_PROPERTY / datatype_property = "DatatypeProperty",
    SAME_AS / same_as = "sameAs",
    EQUIVALENT_CLASS / equivalent_class = "equivalentClass",
    DISJOINT_WITH / disjoint_with = "disjointWith",
    ONTOLOGY / ontology = "Ontology",
});

vocabulary!(xsd, "http://www.w3.org/2001/XMLSchema#", {
    STRING / string = "string",
    INTEGER / integer = "integer",
    DECIMAL / decimal = "decimal",
    DOUBLE / double = "double",
    FLOAT / float = "float",
    BOOLEAN / boolean = "boolean",
    DATE / date = "date",
    DATE_TIME / date_time = "dateTime",
});

vocabulary!(qb, "http://purl.org/linked-data/cube#", {
    DATA_STRUCTURE_DEFINITION / data_structure_definition = "DataStructureDefinition",
    DATA_SET / data_set = "DataSet",
    DIMENSION_PROPERTY / dimension_property = "DimensionProperty",
    MEASURE_PROPERTY / measure_property = "MeasureProperty",
    OBSERVATION / observation = "Observation",
    COMPONENT / component = "component",
    MEASURE / measure = "measure",
    DIMENSION / dimension = "dimension",
    STRUCTURE / structure = "structure",
    DATASET / dataset = "dataSet",
});

vocabulary!(qb4o, "http://purl.org/qb4olap/cubes#", {
    LEVEL_PROPERTY / level_property = "LevelProperty",
    LEVEL_ATTRIBUTE / level_attribute = "LevelAttribute",
    ROLLUP_PROPERTY / rollup_property = "RollupProperty",
    HIERARCHY / hierarchy = "Hierarchy",
    HIERARCHY_STEP / hierarchy_step = "HierarchyStep",
    LEVEL_MEMBER / level_member = "LevelMember",
    MEMBER_OF / member_of = "memberOf",
    HAS_HIERARCHY / has_hierarchy = "hasHierarchy",
    IN_HIERARCHY / in_hierarchy = "inHierarchy",
    IN_DIMENSION / in_dimension = "inDimension",
    HAS_LEVEL / has_level = "hasLevel",
    HAS_ATTRIBUTE / has_attribute = "hasAttribute",
    IN_LEVEL / in_level = "inLevel",
    CHILD_LEVEL / child_level = "childLevel",
    PARENT_LEVEL / parent_level = "parentLevel",
    PC_CARDINALITY / pc_cardinality = "pcCardinality",
    ROLLUP / rollup = "rollup",
    LEVEL / level = "level",
    AGGREGATE_FUNCTION / aggregate_function = "aggregateFunction",
    UPDATE_TYPE / update_type = "updateType",
    TYPE1 / type1 = "Type1",
    TYPE2 / type2 = "Type2",
    TYPE3 / type3 = "Type3",
    ONE_TO_ONE / one_to_one = "OneToOne",
    ONE_TO_MANY / one_to_many = "OneToMany",
    MANY_TO_ONE / many_to_one = "ManyToOne",
    MANY_TO_MANY / many_to_many = "ManyToMany",
    SUM / sum = "sum",
    AVG / avg = "avg",
    MAX / max = "max",
    MIN / min = "min",
    COUNT / count = "count",
});

vocabulary!(map, "http://extbi.lab.aau.dk/ontology/s2tmap/", {
    DATASET / dataset = "Dataset",
    CONCEPT_MAPPING_CLASS / concept_mapping_class = "ConceptMapping",
    PROPERTY_MAPPING_CLASS / property_mapping_class = "PropertyMapping",
    SOURCE_TBOX / source_tbox = "sourceTBox",
    TARGET_TBOX / target_tbox = "targetTBox",
    MAP_DATASET / map_dataset = "mapDataset",
    SOURCE_CONCEPT / source_concept = "sourceConcept",
    TARGET_CONCEPT / target_concept = "targetConcept",
    SOURCE_LOCATION / source_location = "sourceLocation",
    TARGET_LOCATION / target_location = "targetLocation",
    RELATION / relation = "relation",
    MAPPED_INSTANCE / mapped_instance = "mappedInstance",
    TARGET_INSTANCE_IRI_UNIQUE_VALUE_TYPE / target_instance_iri_unique_value_type = "targetInstanceIRIUniqueValueType",
    TARGET_INSTANCE_IRI_VALUE_TYPE / target_instance_iri_value_type = "targetInstanceIRIValueType",
    TARGET_INSTANCE_IRI_VALUE / target_instance_iri_value = "targetInstanceIRIValue",
    OPERATION / operation = "operation",
    COMMON_PROPERTY / common_property = "commonProperty",
    SOURCE_COMMON_PROPERTY / source_common_property = "sourceCommonProperty",
    TARGET_COMMON_PROPERTY / target_common_property = "targetCommonProperty",
    COMMON_SOURCE_PROPERTY / common_source_property = "commonSourceProperty",
    COMMON_TARGET_PROPERTY / common_target_property = "commonTargetProperty",
    CONCEPT_MAPPING / concept_mapping = "conceptMapping",
    TARGET_PROPERTY / target_property = "targetProperty",
    SOURCE_TYPE_4_TARGET_PROPERTY_VALUE / source_type4_target_property_value = "sourceType4TargetPropertyValue",
    SOURCE_4_TARGET_PROPERTY_VALUE / source4_target_property_value = "source4TargetPropertyValue",
    PROPERTY / property = "Property",
    EXPRESSION / expression = "Expression",
    SAME_AS_SOURCE_IRI / same_as_source_iri = "SameAsSourceIRI",
    INCREMENTAL / incremental = "Incremental",
    SUPERSUMPTION / supersumption = "supersumption",
    JOIN / join = "join",
    LEFT_OUTER_JOIN / left_outer_join = "leftOuterjoin",
    RIGHT_OUTER_JOIN / right_outer_join = "rightOuterjoin",
});

vocabulary!(prov, "http://www.w3.org/ns/prov#", {
    TYPE / type_ = "type",
    WAS_REVISION_OF / was_revision_of = "wasRevisionOf",
});

/// Well-known prefixes available to every Turtle document and expression.
pub const DEFAULT_PREFIXES: &[(&str, &str)] = &[
    ("rdf", rdf::NS),
    ("rdfs", rdfs::NS),
    ("owl", owl::NS),
    ("xsd", xsd::NS),
    ("qb", qb::NS),
    ("qb4o", qb4o::NS),
    ("map", map::NS),
];

/// `rdf:_n` container membership property.
pub fn rdf_member(n: usize) -> crate::term::Iri {
    crate::term::Iri::new_unchecked(alloc::format!("{}_{}", rdf::NS, n).as_str())
}
