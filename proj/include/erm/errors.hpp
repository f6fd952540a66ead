#pragma once

#include <stdexcept>
#include <string>

namespace erm {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed input file (bad JSON, bad CSV header, unparsable field).
struct ParseError : Error {
    using Error::Error;
};

/// Structurally valid input that violates a domain invariant; the message
/// names the offending record.
struct ValidationError : Error {
    using Error::Error;
};

/// File could not be opened, read, or written.
struct IoError : Error {
    using Error::Error;
};

/// Nonpositive argument where a strictly positive quantity is required.
struct DomainError : Error {
    using Error::Error;
};

/// Path length does not exceed the BS-UE baseline: the ellipse of candidate
/// reflection points collapses (line-of-sight or nonphysical record).
struct EllipseDegenerate : Error {
    using Error::Error;
};

/// Solved reflection distance came out nonpositive.
struct BehindBaseline : Error {
    using Error::Error;
};

/// Iterative solve exhausted its iteration budget.
struct NoConvergence : Error {
    using Error::Error;
};

/// Only the geometrically inconsistent branch of the distance equation has a
/// root; the mirror constraint rejects it.
struct AmbiguousRoot : Error {
    using Error::Error;
};

/// BS, reflection point, and UE are collinear: the incidence bisector is
/// undefined (grazing geometry).
struct DegenerateBisector : Error {
    using Error::Error;
};

/// Fewer cluster peaks than the threshold rule requires.
struct TooFewClusters : Error {
    using Error::Error;
};

/// Line fit requested through two points with equal abscissae; callers switch
/// to the rotated parameterization.
struct VerticalLine : Error {
    using Error::Error;
};

/// Terminal placed on a wall or another impossible scene configuration.
struct GeometryError : Error {
    using Error::Error;
};

/// Statistics requested over an empty sample.
struct EmptyInput : Error {
    using Error::Error;
};

}  // namespace erm
