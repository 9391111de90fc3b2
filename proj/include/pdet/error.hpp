#pragma once

#include <stdexcept>
#include <string>

namespace pdet {

// Failure categories carried by every rejection the library raises. The CLI
// maps empty_input/infeasible to exit code 1 and everything else to 2.
enum class Errc {
  format,       // malformed container or header data
  truncated,    // input ended in the middle of a structure
  unsupported,  // recognized format, out-of-scope variant
  parse,        // unparseable text (JSON, CSV, numbers)
  schema,       // parsed fine but a field violates its contract
  duplicate,    // duplicate key where uniqueness is required
  shape,        // dimension mismatch between operands
  domain,       // argument outside its numeric domain
  empty_input,  // operation requires non-empty input
  bitstream,    // corrupted compressed payload
  coverage,     // annotations do not cover the video
  infeasible,   // no result satisfies the requested constraint
  config,       // invalid configuration value or unusable file
  contract,     // caller violated an API precondition
};

inline const char* code_name(Errc c) {
  switch (c) {
    case Errc::format: return "format";
    case Errc::truncated: return "truncated";
    case Errc::unsupported: return "unsupported";
    case Errc::parse: return "parse";
    case Errc::schema: return "schema";
    case Errc::duplicate: return "duplicate";
    case Errc::shape: return "shape";
    case Errc::domain: return "domain";
    case Errc::empty_input: return "empty input";
    case Errc::bitstream: return "bitstream";
    case Errc::coverage: return "coverage";
    case Errc::infeasible: return "infeasible";
    case Errc::config: return "config";
    case Errc::contract: return "contract";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(code_name(code)) + ": " + what),
        code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

}  // namespace pdet
