#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace iklkit {

// Base class for everything thrown by the library.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid arguments, malformed files, dimension mismatches.
class InputError : public Error {
  public:
    explicit InputError(const std::string& what) : Error(what) {}
};

// Size limits exceeded (joint cells, MEC enumeration, faithfulness dimension).
class CapacityError : public Error {
  public:
    explicit CapacityError(const std::string& what) : Error(what) {}
};

// A structural invariant does not hold (e.g. a cycle in a Dag edge set).
class StructureError : public Error {
  public:
    explicit StructureError(const std::string& what) : Error(what) {}
};

// A requested quantity is mathematically undefined on reachable inputs.
class DomainError : public Error {
  public:
    explicit DomainError(const std::string& what) : Error(what) {}
};

// A random generator exhausted its retry budget.
class GenerationError : public Error {
  public:
    explicit GenerationError(const std::string& what) : Error(what) {}
};

namespace config {

// Maximum number of cells a dense joint table may hold. Default 2^20.
// The CLI overrides this from the IKLKIT_LIMIT_CELLS environment variable.
std::size_t cell_limit();
void set_cell_limit(std::size_t cells);

}  // namespace config

}  // namespace iklkit
