#pragma once

#include <stdexcept>
#include <string>

namespace hyponorm {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Measure mass differs from 1 and normalization was not requested.
class NonProbabilityMass : public Error {
public:
    using Error::Error;
};

/// The measure places positive mass on the point x = 1.
class AtomAtOne : public Error {
public:
    using Error::Error;
};

/// The measure carries no mass at all.
class EmptySupport : public Error {
public:
    using Error::Error;
};

/// A measure violating the standing hypotheses was used without force.
class HypothesesViolated : public Error {
public:
    using Error::Error;
};

/// Adaptive quadrature exhausted its panel budget above tolerance.
class QuadratureNonConvergence : public Error {
public:
    using Error::Error;
};

/// A square-root argument in a matrix entry is numerically indistinguishable
/// from zero; happens only for hypothesis-violating measures.
class DegenerateDenominator : public Error {
public:
    using Error::Error;
};

/// A coefficient vector was identically zero.
class ZeroVector : public Error {
public:
    using Error::Error;
};

/// Malformed input file (CSV measure or vector files).
class BadInputFile : public Error {
public:
    using Error::Error;
};

} // namespace hyponorm
