#pragma once

#include <stdexcept>
#include <string>

namespace choq {

// Every failure carries a stable machine-readable code; the CLI maps codes to
// its documented exit-code table.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& msg)
      : std::runtime_error(code + ": " + msg), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

[[noreturn]] inline void fail(const std::string& code, const std::string& msg) {
  throw Error(code, msg);
}

}  // namespace choq
