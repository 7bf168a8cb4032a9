#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mgl {

// Base class for every error thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A precondition on caller-supplied data was violated.
struct InvalidInput : Error {
    using Error::Error;
};

// Cholesky factorization hit a non-positive pivot; the input is not
// positive definite.
struct NotPositiveDefinite : Error {
    std::size_t pivot_index;

    explicit NotPositiveDefinite(std::size_t pivot)
        : Error("matrix is not positive definite (pivot " + std::to_string(pivot) + ")"),
          pivot_index(pivot) {}
};

// A mixture component lost essentially all responsibility mass.
struct DegenerateComponent : Error {
    std::size_t component;

    explicit DegenerateComponent(std::size_t k)
        : Error("component " + std::to_string(k) +
                " collapsed: responsibility mass too small"),
          component(k) {}
};

// Malformed text input. Positions are 1-based; column counts tokens.
struct ParseError : Error {
    std::size_t line;
    std::size_t column;

    ParseError(std::size_t line_no, std::size_t column_no, const std::string& detail)
        : Error("line " + std::to_string(line_no) + ", column " +
                std::to_string(column_no) + ": " + detail),
          line(line_no),
          column(column_no) {}
};

// A CSV row whose width differs from the first data row.
struct RaggedRows : Error {
    std::size_t line;

    explicit RaggedRows(std::size_t line_no)
        : Error("line " + std::to_string(line_no) +
                ": row width differs from first row"),
          line(line_no) {}
};

// Config key that the schema does not define (likely a typo).
struct UnknownKey : Error {
    std::string key;

    explicit UnknownKey(const std::string& name)
        : Error("unknown key '" + name + "'"), key(name) {}
};

// Required config key absent.
struct MissingKey : Error {
    std::string key;

    explicit MissingKey(const std::string& name)
        : Error("missing required key '" + name + "'"), key(name) {}
};

// File carries a version tag this build does not understand.
struct FormatVersionMismatch : Error {
    using Error::Error;
};

}  // namespace mgl
