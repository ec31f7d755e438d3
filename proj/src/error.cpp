#include "netclass/error.hpp"

namespace netclass {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::MalformedHeader: return "MalformedHeader";
        case ErrorCode::NonNumericCell: return "NonNumericCell";
        case ErrorCode::MissingLabel: return "MissingLabel";
        case ErrorCode::EmptyDataset: return "EmptyDataset";
        case ErrorCode::TooFewSamples: return "TooFewSamples";
        case ErrorCode::ClassTooSmall: return "ClassTooSmall";
        case ErrorCode::SingleClass: return "SingleClass";
        case ErrorCode::DuplicateGeneId: return "DuplicateGeneId";
        case ErrorCode::DuplicateSampleId: return "DuplicateSampleId";
        case ErrorCode::EmptyIntersection: return "EmptyIntersection";
        case ErrorCode::GeneAbsent: return "GeneAbsent";
        case ErrorCode::OverlappingModules: return "OverlappingModules";
        case ErrorCode::UnparsableLine: return "UnparsableLine";
        case ErrorCode::DuplicateSetName: return "DuplicateSetName";
        case ErrorCode::EmptySet: return "EmptySet";
        case ErrorCode::EmptySubset: return "EmptySubset";
        case ErrorCode::UnmeasuredGene: return "UnmeasuredGene";
        case ErrorCode::EmptyNetwork: return "EmptyNetwork";
        case ErrorCode::AllZeros: return "AllZeros";
        case ErrorCode::NoFeatures: return "NoFeatures";
        case ErrorCode::Misaligned: return "Misaligned";
        case ErrorCode::UniverseTooSmall: return "UniverseTooSmall";
        case ErrorCode::NonConvergentModel: return "NonConvergentModel";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::InvalidSpec: return "InvalidSpec";
        case ErrorCode::MissingInput: return "MissingInput";
        case ErrorCode::CacheMismatch: return "CacheMismatch";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

}
