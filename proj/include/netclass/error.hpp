#ifndef NETCLASS_ERROR_HPP
#define NETCLASS_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace netclass {

enum class ErrorCode {
    MalformedHeader,
    NonNumericCell,
    MissingLabel,
    EmptyDataset,
    TooFewSamples,
    ClassTooSmall,
    SingleClass,
    DuplicateGeneId,
    DuplicateSampleId,
    EmptyIntersection,
    GeneAbsent,
    OverlappingModules,
    UnparsableLine,
    DuplicateSetName,
    EmptySet,
    EmptySubset,
    UnmeasuredGene,
    EmptyNetwork,
    AllZeros,
    NoFeatures,
    Misaligned,
    UniverseTooSmall,
    NonConvergentModel,
    DimensionMismatch,
    InvalidArgument,
    InvalidSpec,
    MissingInput,
    CacheMismatch,
    Io
};

std::string_view to_string(ErrorCode code);

/**
 * Exception carrying a machine-checkable error code.
 * All fallible operations in the library throw this type.
 */
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}

#endif
