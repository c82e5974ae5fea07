#pragma once

#include <stdexcept>
#include <string>

namespace plca {

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Dimension mismatch between arguments (M/N/K disagree).
struct ShapeError : Error {
    using Error::Error;
};

// An input value violates a contract (negative mass, column not stochastic,
// all-zero table, invalid solver configuration, ...).
struct ValidationError : Error {
    using Error::Error;
};

// Row/column or pair index outside the declared dimensions.
struct IndexError : Error {
    using Error::Error;
};

// A file could not be parsed; message carries line/column context.
struct ParseError : Error {
    using Error::Error;
};

// A structurally valid document is missing a field or has a field of the
// wrong type; message names the field.
struct SchemaError : Error {
    using Error::Error;
};

// Recognized format but unsupported format version.
struct VersionError : Error {
    using Error::Error;
};

// Operation undefined for the given input (empty corpus, zero sample count).
struct DomainError : Error {
    using Error::Error;
};

// Grid-search request whose lattice exceeds the enumeration limit; message
// carries the computed point count.
struct SearchSpaceError : Error {
    using Error::Error;
};

// Filesystem failure (open/write), with the offending path.
struct IoError : Error {
    using Error::Error;
};

}  // namespace plca
