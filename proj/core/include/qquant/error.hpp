#pragma once

#include <stdexcept>
#include <string>

namespace qquant {

enum class Errc {
  invalid_argument,   // caller passed something outside an operation's domain
  data_precondition,  // the data cannot support the request (e.g. too few distinct rows)
  numerical,          // a quantity is numerically undefined (empty cell, zero weight)
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace qquant
