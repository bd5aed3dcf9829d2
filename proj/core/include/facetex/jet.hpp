// Copyright 2026 The facetex Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FACETEX_JET_HPP_
#define FACETEX_JET_HPP_

#include <array>
#include <cmath>
#include <cstddef>

namespace facetex::internal {

// Forward-mode dual number carrying N partial derivatives. Used to obtain
// exact local Jacobians of small closed-form kernels (rotations,
// barycentrics) without hand-expanding them.
template <std::size_t N>
struct Jet {
  double a = 0.0;
  std::array<double, N> v{};

  Jet() = default;
  Jet(double value) : a(value) {}  // NOLINT(google-explicit-constructor)
  static Jet variable(double value, std::size_t k) {
    Jet j(value);
    j.v[k] = 1.0;
    return j;
  }

  Jet& operator+=(const Jet& o) { return *this = *this + o; }
  Jet& operator-=(const Jet& o) { return *this = *this - o; }
  Jet& operator*=(const Jet& o) { return *this = *this * o; }

  friend Jet operator+(const Jet& x, const Jet& y) {
    Jet r(x.a + y.a);
    for (std::size_t k = 0; k < N; ++k) r.v[k] = x.v[k] + y.v[k];
    return r;
  }
  friend Jet operator-(const Jet& x, const Jet& y) {
    Jet r(x.a - y.a);
    for (std::size_t k = 0; k < N; ++k) r.v[k] = x.v[k] - y.v[k];
    return r;
  }
  friend Jet operator-(const Jet& x) {
    Jet r(-x.a);
    for (std::size_t k = 0; k < N; ++k) r.v[k] = -x.v[k];
    return r;
  }
  friend Jet operator*(const Jet& x, const Jet& y) {
    Jet r(x.a * y.a);
    for (std::size_t k = 0; k < N; ++k) r.v[k] = x.a * y.v[k] + x.v[k] * y.a;
    return r;
  }
  friend Jet operator/(const Jet& x, const Jet& y) {
    Jet r(x.a / y.a);
    for (std::size_t k = 0; k < N; ++k) r.v[k] = (x.v[k] - r.a * y.v[k]) / y.a;
    return r;
  }
  friend bool operator<(const Jet& x, const Jet& y) { return x.a < y.a; }
};

template <std::size_t N>
Jet<N> sqrt(const Jet<N>& x) {
  const double s = std::sqrt(x.a);
  Jet<N> r(s);
  const double d = 0.5 / s;
  for (std::size_t k = 0; k < N; ++k) r.v[k] = d * x.v[k];
  return r;
}

template <std::size_t N>
Jet<N> sin(const Jet<N>& x) {
  Jet<N> r(std::sin(x.a));
  const double d = std::cos(x.a);
  for (std::size_t k = 0; k < N; ++k) r.v[k] = d * x.v[k];
  return r;
}

template <std::size_t N>
Jet<N> cos(const Jet<N>& x) {
  Jet<N> r(std::cos(x.a));
  const double d = -std::sin(x.a);
  for (std::size_t k = 0; k < N; ++k) r.v[k] = d * x.v[k];
  return r;
}

inline double value_of(double x) { return x; }
template <std::size_t N>
double value_of(const Jet<N>& x) {
  return x.a;
}

}  // namespace facetex::internal

#endif  // FACETEX_JET_HPP_
