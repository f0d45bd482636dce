#pragma once

#include <stdexcept>
#include <string>

namespace deocc {

// Base of every error thrown by the library. Callers that only care about
// "did the engine fail" catch this; the subclasses carry the kind.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char* kind() const noexcept { return "error"; }
};

#define DEOCC_DEFINE_ERROR(Name, Kind)                                   \
    class Name : public Error {                                          \
    public:                                                              \
        using Error::Error;                                              \
        const char* kind() const noexcept override { return Kind; }      \
    }

DEOCC_DEFINE_ERROR(DimensionError, "dimension");
DEOCC_DEFINE_ERROR(EmptyTargetError, "empty_target");
DEOCC_DEFINE_ERROR(SamplingExhaustedError, "sampling_exhausted");
DEOCC_DEFINE_ERROR(SpecificationError, "specification");
DEOCC_DEFINE_ERROR(DomainError, "domain");
DEOCC_DEFINE_ERROR(ShapeError, "shape");
DEOCC_DEFINE_ERROR(StateError, "state");
DEOCC_DEFINE_ERROR(LookupError, "lookup");
DEOCC_DEFINE_ERROR(EmptyEraserError, "empty_eraser");
DEOCC_DEFINE_ERROR(NoBoundaryError, "no_boundary");
DEOCC_DEFINE_ERROR(UndefinedMetricError, "undefined_metric");
DEOCC_DEFINE_ERROR(FormatError, "format");
DEOCC_DEFINE_ERROR(IoError, "io");

#undef DEOCC_DEFINE_ERROR

class TrainingDivergedError : public Error {
public:
    TrainingDivergedError(int iteration, const std::string& what)
        : Error(what), iteration_(iteration) {}
    const char* kind() const noexcept override { return "training_diverged"; }
    int iteration() const noexcept { return iteration_; }

private:
    int iteration_;
};

class EditError : public Error {
public:
    EditError(std::size_t edit_index, const std::string& what)
        : Error(what), edit_index_(edit_index) {}
    const char* kind() const noexcept override { return "edit"; }
    std::size_t edit_index() const noexcept { return edit_index_; }

private:
    std::size_t edit_index_;
};

}  // namespace deocc
