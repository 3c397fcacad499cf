#ifndef CSLAB_ERRORS_HPP
#define CSLAB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace cslab {

struct NotComplete : std::runtime_error {
  explicit NotComplete(const std::string& what) : std::runtime_error(what) {}
};

struct BudgetExceeded : std::runtime_error {
  explicit BudgetExceeded(const std::string& what) : std::runtime_error(what) {}
};

struct Infeasible : std::runtime_error {
  explicit Infeasible(const std::string& what) : std::runtime_error(what) {}
};

struct OutOfRange : std::runtime_error {
  explicit OutOfRange(const std::string& what) : std::runtime_error(what) {}
};

struct InvalidArgs : std::invalid_argument {
  explicit InvalidArgs(const std::string& what) : std::invalid_argument(what) {}
};

} // namespace cslab

#endif
