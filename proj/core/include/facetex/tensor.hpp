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

#ifndef FACETEX_TENSOR_HPP_
#define FACETEX_TENSOR_HPP_

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace facetex {

using Shape = std::vector<std::size_t>;

// Product of the extents; 1 for the rank-0 (scalar) shape.
std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

class Tape;

// Dense row-major array of doubles. Tensors are immutable once constructed and
// share their storage on copy. A tensor that requires gradients is bound to a
// Tape node; constants never allocate one.
class Tensor {
 public:
  // Rank-0 zero constant.
  Tensor();

  static Tensor constant(Shape shape, std::vector<double> values);
  static Tensor full(Shape shape, double value);
  static Tensor zeros(Shape shape) { return full(std::move(shape), 0.0); }
  static Tensor scalar(double value);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const noexcept { return data_->size(); }

  std::span<const double> values() const noexcept { return *data_; }
  double operator[](std::size_t i) const { return (*data_)[i]; }
  // Value of a single-element tensor.
  double item() const;
  std::vector<double> to_vector() const { return *data_; }

  bool requires_grad() const noexcept { return tape_ != nullptr; }
  Tape* tape() const noexcept { return tape_; }
  std::optional<std::size_t> node() const;

  // Same values, cut from the tape.
  Tensor detach() const;
  // Differentiable view with a new shape of equal size.
  Tensor reshape(Shape shape) const;

  // Non-empty when the op that produced the tensor hit a soft failure, e.g. a
  // masked reduction over an empty mask.
  const std::string& warning() const noexcept { return warning_; }

 private:
  friend class Tape;
  friend Tensor with_warning(Tensor t, std::string warning);

  std::shared_ptr<const std::vector<double>> data_;
  Shape shape_;
  Tape* tape_ = nullptr;
  std::size_t node_ = 0;
  std::string warning_;
};

// Write access to the gradient buffers of an op's inputs during the backward
// sweep. `input(k)` is empty when input k does not require gradients.
class GradSink {
 public:
  explicit GradSink(std::vector<std::span<double>> inputs)
      : inputs_(std::move(inputs)) {}
  std::span<double> input(std::size_t k) const { return inputs_.at(k); }
  bool wants(std::size_t k) const { return !inputs_.at(k).empty(); }

 private:
  std::vector<std::span<double>> inputs_;
};

// Vector-Jacobian product of one recorded op: receives the gradient with
// respect to the op's output and accumulates into its inputs.
using BackwardFn = std::function<void(std::span<const double>, GradSink&)>;

// Gradients of a loss with respect to the leaves of a tape.
class Gradients {
 public:
  // Gradient of `leaf`, shaped like it. All zeros for leaves the loss does
  // not depend on.
  Tensor of(const Tensor& leaf) const;
  std::span<const double> values(const Tensor& leaf) const;

 private:
  friend class Tape;
  const Tape* tape_ = nullptr;
  std::vector<std::vector<double>> grads_;
  std::vector<Shape> shapes_;
};

// Ordered record of differentiable operations. A node's inputs always precede
// it, so a single reverse sweep visits every node exactly once. One tape per
// fitting session; tensors bound to a tape must not outlive it.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Tensor leaf(Shape shape, std::vector<double> values);
  Tensor leaf(const Tensor& value);

  // Records the result of an op. Returns a constant when no input requires
  // gradients.
  Tensor record(Shape shape, std::vector<double> values,
                const std::vector<const Tensor*>& inputs, BackwardFn backward);

  // Reverse sweep from a scalar `loss`. A second call without reset() throws.
  Gradients backward(const Tensor& loss);

  // Discards every node. Tensors bound to the tape become invalid.
  void reset();

  std::size_t node_count() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    Shape shape;
    std::size_t size = 0;
    std::vector<std::optional<std::size_t>> inputs;
    BackwardFn backward;
    bool leaf = false;
  };

  std::vector<Node> nodes_;
  bool swept_ = false;
};

// Builds the result of an op. When any input requires gradients the result is
// recorded on that input's tape (all such inputs must share one tape).
Tensor make_result(Shape shape, std::vector<double> values,
                   std::initializer_list<const Tensor*> inputs,
                   BackwardFn backward);

// Attaches a warning to a freshly made tensor.
Tensor with_warning(Tensor t, std::string warning);

}  // namespace facetex

#endif  // FACETEX_TENSOR_HPP_
