//! The ETL operation catalogue and its successor table.

use core::fmt;

use crate::term::Iri;
use crate::vocab::map;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Operation {
    /// Sentinel that begins every generated flow.
    StartOp,
    GraphExtractor,
    TBoxExtraction,
    TransformationOnLiteral,
    JoinTransformation,
    LevelMemberGenerator,
    ObservationGenerator,
    ChangedDataCapture,
    UpdateLevel,
    MaterializeInference,
    ExternalLinking,
    Loader,
}

use Operation::*;

/// Compatible successors of each operation.
const SUCCESSORS: &[(Operation, &[Operation])] = &[
    (
        GraphExtractor,
        &[
            GraphExtractor,
            TBoxExtraction,
            TransformationOnLiteral,
            JoinTransformation,
            LevelMemberGenerator,
            ObservationGenerator,
            ChangedDataCapture,
            UpdateLevel,
            Loader,
        ],
    ),
    (TBoxExtraction, &[]),
    (
        TransformationOnLiteral,
        &[
            TransformationOnLiteral,
            JoinTransformation,
            LevelMemberGenerator,
            ObservationGenerator,
            Loader,
        ],
    ),
    (
        JoinTransformation,
        &[
            TransformationOnLiteral,
            JoinTransformation,
            LevelMemberGenerator,
            ObservationGenerator,
            Loader,
        ],
    ),
    (LevelMemberGenerator, &[Loader]),
    (ObservationGenerator, &[Loader]),
    (ChangedDataCapture, &[LevelMemberGenerator, UpdateLevel]),
    (UpdateLevel, &[Loader]),
    (MaterializeInference, &[Loader]),
    (ExternalLinking, &[Loader]),
    (Loader, &[]),
];

impl Operation {
    pub const ALL: [Operation; 12] = [
        StartOp,
        GraphExtractor,
        TBoxExtraction,
        TransformationOnLiteral,
        JoinTransformation,
        LevelMemberGenerator,
        ObservationGenerator,
        ChangedDataCapture,
        UpdateLevel,
        MaterializeInference,
        ExternalLinking,
        Loader,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StartOp => "StartOp",
            GraphExtractor => "GraphExtractor",
            TBoxExtraction => "TBoxExtraction",
            TransformationOnLiteral => "TransformationOnLiteral",
            JoinTransformation => "JoinTransformation",
            LevelMemberGenerator => "LevelMemberGenerator",
            ObservationGenerator => "ObservationGenerator",
            ChangedDataCapture => "ChangedDataCapture",
            UpdateLevel => "UpdateLevel",
            MaterializeInference => "MaterializeInference",
            ExternalLinking => "ExternalLinking",
            Loader => "Loader",
        }
    }

    /// Case-insensitive lookup; `DataChangeDetector` is accepted for
    /// `ChangedDataCapture`.
    pub fn from_name(name: &str) -> Option<Self> {
        if name.eq_ignore_ascii_case("DataChangeDetector") {
            return Some(ChangedDataCapture);
        }
        Self::ALL
            .iter()
            .copied()
            .find(|op| op.name().eq_ignore_ascii_case(name))
    }

    /// `map:<Name>`.
    pub fn iri(self) -> Iri {
        Iri::new_unchecked(alloc::format!("{}{}", map::NS, self.name()).as_str())
    }

    pub fn successors(self) -> &'static [Operation] {
        if self == StartOp {
            return &Self::ALL[1..];
        }
        SUCCESSORS
            .iter()
            .find(|(op, _)| *op == self)
            .map(|(_, s)| *s)
            .unwrap_or(&[])
    }

    pub fn accepts_successor(self, next: Operation) -> bool {
        self.successors().contains(&next)
    }
}

impl fmt::Display for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
