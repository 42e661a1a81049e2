#pragma once

#include <stdexcept>
#include <string>

namespace fbmlt {

/// Argument outside the mathematical domain of an operation (e.g. H outside (0,1)).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A numerical procedure could not deliver a trustworthy result
/// (non-PD factorization, negative circulant embedding, quadrature failure).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Request refused because it exceeds a declared computational budget.
class CostGuardError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fbmlt
