#pragma once

#include <stdexcept>
#include <string>

namespace ex2sm {

// Exit code mapping used by the CLI:
//   0 success, 1 usage, 2 data/format, 3 resource.

// Malformed input data (bad FASTA, corrupt partition or result files).
class format_error : public std::runtime_error {
public:
    explicit format_error(const std::string& what) : std::runtime_error(what) {}
};

// Arguments outside an operation's domain.
class parameter_error : public std::invalid_argument {
public:
    explicit parameter_error(const std::string& what) : std::invalid_argument(what) {}
};

// API misuse: a precondition the caller controls was violated
// (e.g. running detection on an unsorted partition).
class contract_error : public std::logic_error {
public:
    explicit contract_error(const std::string& what) : std::logic_error(what) {}
};

// Filesystem and I/O failures.
class storage_error : public std::runtime_error {
public:
    explicit storage_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ex2sm
