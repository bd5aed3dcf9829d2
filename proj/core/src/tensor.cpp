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

#include "facetex/tensor.hpp"

#include <algorithm>
#include <sstream>

#include "facetex/error.hpp"

namespace facetex {

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t e : shape) n *= e;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

namespace {

void CheckShape(const Shape& shape, std::size_t values) {
  for (std::size_t e : shape) {
    if (e == 0) throw ShapeError("tensor extents must be positive, got " + shape_string(shape));
  }
  if (shape_size(shape) != values) {
    throw ShapeError("shape " + shape_string(shape) + " does not hold " +
                     std::to_string(values) + " values");
  }
}

}  // namespace

Tensor::Tensor() : data_(std::make_shared<const std::vector<double>>(1, 0.0)) {}

Tensor Tensor::constant(Shape shape, std::vector<double> values) {
  CheckShape(shape, values.size());
  Tensor t;
  t.data_ = std::make_shared<const std::vector<double>>(std::move(values));
  t.shape_ = std::move(shape);
  return t;
}

Tensor Tensor::full(Shape shape, double value) {
  const std::size_t n = shape_size(shape);
  return constant(std::move(shape), std::vector<double>(n, value));
}

Tensor Tensor::scalar(double value) { return constant({}, {value}); }

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= shape_.size()) {
    throw ShapeError("axis " + std::to_string(axis) + " out of range for shape " +
                     shape_string(shape_));
  }
  return shape_[axis];
}

double Tensor::item() const {
  if (size() != 1) throw ShapeError("item() on tensor of shape " + shape_string(shape_));
  return (*data_)[0];
}

std::optional<std::size_t> Tensor::node() const {
  if (tape_ == nullptr) return std::nullopt;
  return node_;
}

Tensor Tensor::detach() const {
  Tensor t;
  t.data_ = data_;
  t.shape_ = shape_;
  return t;
}

Tensor Tensor::reshape(Shape shape) const {
  CheckShape(shape, size());
  if (!requires_grad()) {
    Tensor t = detach();
    t.shape_ = std::move(shape);
    return t;
  }
  Tensor t = tape_->record(std::move(shape), *data_, {this},
                           [](std::span<const double> up, GradSink& sink) {
                             auto g = sink.input(0);
                             for (std::size_t i = 0; i < g.size(); ++i) g[i] += up[i];
                           });
  return t;
}

Tensor Tape::leaf(Shape shape, std::vector<double> values) {
  CheckShape(shape, values.size());
  Node node;
  node.shape = shape;
  node.size = values.size();
  node.leaf = true;
  nodes_.push_back(std::move(node));
  Tensor t;
  t.data_ = std::make_shared<const std::vector<double>>(std::move(values));
  t.shape_ = std::move(shape);
  t.tape_ = this;
  t.node_ = nodes_.size() - 1;
  return t;
}

Tensor Tape::leaf(const Tensor& value) { return leaf(value.shape(), value.to_vector()); }

Tensor Tape::record(Shape shape, std::vector<double> values,
                    const std::vector<const Tensor*>& inputs, BackwardFn backward) {
  CheckShape(shape, values.size());
  Node node;
  node.shape = shape;
  node.size = values.size();
  node.backward = std::move(backward);
  bool any = false;
  for (const Tensor* in : inputs) {
    if (in->tape_ == this) {
      node.inputs.emplace_back(in->node_);
      any = true;
    } else if (in->tape_ != nullptr) {
      throw TapeError("operands are bound to different tapes");
    } else {
      node.inputs.emplace_back(std::nullopt);
    }
  }
  Tensor t;
  t.data_ = std::make_shared<const std::vector<double>>(std::move(values));
  t.shape_ = std::move(shape);
  if (!any) return t;
  nodes_.push_back(std::move(node));
  t.tape_ = this;
  t.node_ = nodes_.size() - 1;
  return t;
}

Gradients Tape::backward(const Tensor& loss) {
  if (loss.tape_ != this) throw TapeError("loss is not recorded on this tape (detached?)");
  if (loss.size() != 1) {
    throw TapeError("backward needs a scalar loss, got shape " + shape_string(loss.shape()));
  }
  if (swept_) throw TapeError("backward already ran on this tape; call reset() first");
  swept_ = true;

  Gradients out;
  out.tape_ = this;
  out.grads_.resize(nodes_.size());
  out.shapes_.resize(nodes_.size());
  out.grads_[loss.node_].assign(1, 1.0);

  for (std::size_t id = loss.node_ + 1; id-- > 0;) {
    Node& node = nodes_[id];
    out.shapes_[id] = node.shape;
    if (node.leaf) continue;
    std::vector<double>& g = out.grads_[id];
    if (g.empty()) continue;  // not on a path to the loss
    std::vector<std::span<double>> spans;
    spans.reserve(node.inputs.size());
    for (const auto& in : node.inputs) {
      if (!in) {
        spans.emplace_back();
        continue;
      }
      std::vector<double>& dst = out.grads_[*in];
      if (dst.empty()) dst.assign(nodes_[*in].size, 0.0);
      spans.emplace_back(dst);
    }
    GradSink sink(std::move(spans));
    node.backward(g, sink);
    std::vector<double>().swap(g);
  }
  return out;
}

void Tape::reset() {
  nodes_.clear();
  swept_ = false;
}

Tensor Gradients::of(const Tensor& leaf) const {
  auto v = values(leaf);
  if (v.empty()) return Tensor::zeros(leaf.shape());
  return Tensor::constant(leaf.shape(), std::vector<double>(v.begin(), v.end()));
}

std::span<const double> Gradients::values(const Tensor& leaf) const {
  if (leaf.tape() != tape_ || !leaf.node()) {
    throw TapeError("gradient requested for a tensor that is not a leaf of this tape");
  }
  const std::size_t id = *leaf.node();
  if (id >= grads_.size()) return {};
  return grads_[id];
}

Tensor make_result(Shape shape, std::vector<double> values,
                   std::initializer_list<const Tensor*> inputs, BackwardFn backward) {
  Tape* tape = nullptr;
  for (const Tensor* in : inputs) {
    if (in->tape() == nullptr) continue;
    if (tape != nullptr && tape != in->tape()) {
      throw TapeError("operands are bound to different tapes");
    }
    tape = in->tape();
  }
  if (tape == nullptr) return Tensor::constant(std::move(shape), std::move(values));
  return tape->record(std::move(shape), std::move(values),
                      std::vector<const Tensor*>(inputs), std::move(backward));
}

Tensor with_warning(Tensor t, std::string warning) {
  t.warning_ = std::move(warning);
  return t;
}

}  // namespace facetex
