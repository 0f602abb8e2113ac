#pragma once

#include <stdexcept>
#include <string>

namespace bvmc {

// Failure raised by every module. `code` is a short stable identifier
// (e.g. "parse_error", "cap_exceeded") that the CLI prints verbatim.
class Error : public std::runtime_error
{
public:
  Error(std::string code, const std::string &message)
    : std::runtime_error(message), code_(std::move(code))
  {}

  const std::string &code() const noexcept { return code_; }

private:
  std::string code_;
};

} // namespace bvmc
