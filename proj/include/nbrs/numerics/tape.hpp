// Copyright (c) 2026 The nbrs Authors
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

#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "nbrs/numerics/array.hpp"

namespace nbrs::num {

// Handle to a value recorded on a Tape.
struct Var {
  std::int32_t id = -1;
  bool valid() const { return id >= 0; }
};

// Reverse-mode tape. Ops append nodes in evaluation order; backward() walks
// them in reverse, handing each node its accumulated output gradient.
// A tape built with recording == false keeps values only (inference).
template <class T>
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, const Array<T>& out_grad)>;

  explicit Tape(bool recording = true) : recording_(recording) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return recording_; }
  std::size_t size() const { return nodes_.size(); }

  Var constant(Array<T> value) {
    Node n;
    n.owned = std::move(value);
    return add(std::move(n));
  }

  // A differentiable leaf that references caller-owned storage; the caller
  // must keep `value` alive for the lifetime of the tape.
  Var leaf(const Array<T>& value) {
    Node n;
    n.external = &value;
    n.needs_grad = recording_;
    return add(std::move(n));
  }

  // Differentiable leaf owning its value (used by tests and grad checks).
  Var variable(Array<T> value) {
    Node n;
    n.owned = std::move(value);
    n.needs_grad = recording_;
    return add(std::move(n));
  }

  Var push(Array<T> value, std::initializer_list<Var> parents, BackwardFn fn) {
    return push(std::move(value), std::vector<Var>(parents), std::move(fn));
  }

  Var push(Array<T> value, const std::vector<Var>& parents, BackwardFn fn) {
    Node n;
    n.owned = std::move(value);
    if (recording_) {
      for (Var p : parents) n.needs_grad = n.needs_grad || needs_grad(p);
      if (n.needs_grad) n.backward = std::move(fn);
    }
    return add(std::move(n));
  }

  const Array<T>& value(Var v) const {
    const Node& n = nodes_.at(static_cast<std::size_t>(v.id));
    return n.external ? *n.external : n.owned;
  }

  bool needs_grad(Var v) const {
    return nodes_.at(static_cast<std::size_t>(v.id)).needs_grad;
  }

  // Gradient buffer of `v`, allocated as zeros on first use.
  Array<T>& grad(Var v) {
    Node& n = nodes_.at(static_cast<std::size_t>(v.id));
    if (!n.grad_ready) {
      n.grad = Array<T>(value(v).shape());
      n.grad_ready = true;
    }
    return n.grad;
  }

  bool has_grad(Var v) const {
    return nodes_.at(static_cast<std::size_t>(v.id)).grad_ready;
  }

  // Seeds d(root)/d(root) = 1 for a single-element root and back-propagates.
  void backward(Var root) {
    if (value(root).size() != 1) {
      throw DimensionError("backward() needs a scalar root, got shape " +
                           shape_string(value(root).shape()));
    }
    grad(root)[0] = T{1};
    for (std::int32_t id = root.id; id >= 0; --id) {
      Node& n = nodes_[static_cast<std::size_t>(id)];
      if (!n.backward || !n.grad_ready) continue;
      Array<T> g = std::move(n.grad);
      n.backward(*this, g);
      nodes_[static_cast<std::size_t>(id)].grad = std::move(g);
    }
  }

 private:
  struct Node {
    Array<T> owned;
    const Array<T>* external = nullptr;
    Array<T> grad;
    bool grad_ready = false;
    bool needs_grad = false;
    BackwardFn backward;
  };

  Var add(Node n) {
    nodes_.push_back(std::move(n));
    return Var{static_cast<std::int32_t>(nodes_.size() - 1)};
  }

  bool recording_;
  std::vector<Node> nodes_;
};

}  // namespace nbrs::num
