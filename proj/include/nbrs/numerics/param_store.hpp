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

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "nbrs/numerics/array.hpp"
#include "nbrs/numerics/rng.hpp"
#include "nbrs/numerics/tape.hpp"

namespace nbrs::num {

template <class T>
struct Parameter {
  std::string name;
  Array<T> value;
  Array<T> first_moment;
  Array<T> second_moment;
};

// Gradients indexed like the ParamStore they belong to.
template <class T>
using Gradients = std::vector<Array<T>>;

// Named, ordered parameter arrays plus optimizer state.
template <class T>
class ParamStore {
 public:
  std::size_t add(const std::string& name, Array<T> init) {
    if (index_.count(name)) {
      throw DimensionError("parameter '" + name + "' registered twice");
    }
    Parameter<T> p;
    p.name = name;
    p.first_moment = Array<T>(init.shape());
    p.second_moment = Array<T>(init.shape());
    p.value = std::move(init);
    index_[name] = params_.size();
    params_.push_back(std::move(p));
    return params_.size() - 1;
  }

  bool contains(const std::string& name) const { return index_.count(name) > 0; }

  std::size_t index(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) {
      throw DimensionError("no parameter named '" + name + "'");
    }
    return it->second;
  }

  std::size_t size() const { return params_.size(); }
  Parameter<T>& at(std::size_t i) { return params_.at(i); }
  const Parameter<T>& at(std::size_t i) const { return params_.at(i); }
  Array<T>& value(std::size_t i) { return params_.at(i).value; }
  const Array<T>& value(std::size_t i) const { return params_.at(i).value; }
  Array<T>& value(const std::string& name) { return value(index(name)); }
  const Array<T>& value(const std::string& name) const {
    return value(index(name));
  }

  std::uint64_t step() const { return step_; }
  void set_step(std::uint64_t s) { step_ = s; }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p.value.size();
    return n;
  }

  Gradients<T> zero_gradients() const {
    Gradients<T> g;
    g.reserve(params_.size());
    for (const auto& p : params_) g.emplace_back(p.value.shape());
    return g;
  }

  template <class U>
  ParamStore<U> cast() const {
    ParamStore<U> out;
    for (const auto& p : params_) {
      const std::size_t i = out.add(p.name, p.value.template cast<U>());
      out.at(i).first_moment = p.first_moment.template cast<U>();
      out.at(i).second_moment = p.second_moment.template cast<U>();
    }
    out.set_step(step_);
    return out;
  }

 private:
  std::vector<Parameter<T>> params_;
  std::map<std::string, std::size_t> index_;
  std::uint64_t step_ = 0;
};

// Lazily places parameters of a store onto one tape and collects their
// gradients after backward().
template <class T>
class BoundParams {
 public:
  BoundParams(Tape<T>& tape, const ParamStore<T>& store)
      : tape_(tape), store_(store), vars_(store.size()) {}

  Tape<T>& tape() { return tape_; }
  const ParamStore<T>& store() const { return store_; }

  Var operator()(std::size_t index) {
    Var& v = vars_.at(index);
    if (!v.valid()) v = tape_.leaf(store_.value(index));
    return v;
  }

  // Parameters never touched by the forward pass get zero gradients.
  Gradients<T> gradients() const {
    Gradients<T> g = store_.zero_gradients();
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      if (vars_[i].valid() && tape_.has_grad(vars_[i])) {
        g[i] = const_cast<Tape<T>&>(tape_).grad(vars_[i]);
      }
    }
    return g;
  }

 private:
  Tape<T>& tape_;
  const ParamStore<T>& store_;
  std::vector<Var> vars_;
};

// Glorot-style uniform matrix.
template <class T>
Array<T> glorot_uniform(std::size_t fan_in, std::size_t fan_out,
                        RngState& rng) {
  Array<T> a(Shape{fan_in, fan_out});
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (auto& v : a.values()) v = static_cast<T>(rng.uniform(-limit, limit));
  return a;
}

template <class T>
Array<T> normal_init(Shape shape, double stddev, RngState& rng) {
  Array<T> a(std::move(shape));
  for (auto& v : a.values()) v = static_cast<T>(rng.normal(0.0, stddev));
  return a;
}

}  // namespace nbrs::num
