#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace idp {

// Upper bounds on the problem sizes handled here: 2D Euler has d + 2 = 4
// conserved components.
inline constexpr int kMaxDim = 2;
inline constexpr int kMaxComponents = 4;

/// Spatial d-vector. Entries past the active dimension are kept at zero.
using Vec = std::array<double, kMaxDim>;

/// Conserved state of one node. Entries past the model's component count are zero.
using State = std::array<double, kMaxComponents>;

/// Flux of one state: row k is the d-vector flux of component k.
using Flux = std::array<Vec, kMaxComponents>;

inline double dot(const Vec& a, const Vec& b) { return a[0] * b[0] + a[1] * b[1]; }
inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }
inline Vec operator-(const Vec& a) { return {-a[0], -a[1]}; }
inline Vec operator*(double s, const Vec& a) { return {s * a[0], s * a[1]}; }

/// Base error type; every rejection in the library derives from it.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a state leaves the admissible set of the active model.
class InadmissibleState : public Error {
 public:
  InadmissibleState(const std::string& what, long node = -1)
      : Error(node >= 0 ? what + " (node " + std::to_string(node) + ")" : what), node_(node) {}
  long node() const { return node_; }

 private:
  long node_;
};

}  // namespace idp
