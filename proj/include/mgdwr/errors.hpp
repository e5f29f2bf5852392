#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mgdwr {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define MGDWR_DEFINE_ERROR(Name)                 \
    class Name : public Error {                  \
    public:                                      \
        using Error::Error;                      \
    }

MGDWR_DEFINE_ERROR(DistortionInvertsCell);
MGDWR_DEFINE_ERROR(ConflictingConstraints);
MGDWR_DEFINE_ERROR(MeshMismatch);
MGDWR_DEFINE_ERROR(PointOutsideDomain);
MGDWR_DEFINE_ERROR(SingularMatrix);
MGDWR_DEFINE_ERROR(QuadratureFailure);
MGDWR_DEFINE_ERROR(FunctionalSingular);
MGDWR_DEFINE_ERROR(UnknownExperiment);
MGDWR_DEFINE_ERROR(LineSearchExhausted);
MGDWR_DEFINE_ERROR(MaxIterations);
MGDWR_DEFINE_ERROR(IterationCap);
MGDWR_DEFINE_ERROR(ZeroTrueError);
MGDWR_DEFINE_ERROR(MalformedCsv);
MGDWR_DEFINE_ERROR(ConfigError);

#undef MGDWR_DEFINE_ERROR

/// |J_i(u_h)| vanished, so the relative error weighting is undefined.
class ZeroReferenceFunctional : public Error {
public:
    explicit ZeroReferenceFunctional(std::size_t index)
        : Error("functional " + std::to_string(index + 1) + " vanishes at the reference state"),
          index_(index)
    {
    }
    [[nodiscard]] std::size_t index() const { return index_; }

private:
    std::size_t index_;
};

}  // namespace mgdwr
