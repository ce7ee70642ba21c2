// Part of the loo verification toolkit, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace loo {

struct SrcPos {
  int line = 0;
  int col = 0;
};

struct SrcSpan {
  SrcPos begin;
  SrcPos end;
};

struct Diagnostic {
  SrcSpan span;
  std::string message;
};

using Diagnostics = std::vector<Diagnostic>;

// Lightweight success-or-error carrier for operations whose failure is a
// value, not an exception (interpretation, evaluation, stepping).
template <class T>
class Outcome {
 public:
  Outcome(T v) : value_(std::move(v)) {}
  static Outcome err(std::string msg) {
    Outcome o;
    o.error_ = std::move(msg);
    return o;
  }

  bool ok() const { return value_.has_value(); }
  explicit operator bool() const { return ok(); }
  const T& operator*() const { return *value_; }
  T& operator*() { return *value_; }
  const T* operator->() const { return &*value_; }
  T* operator->() { return &*value_; }
  const std::string& error() const { return error_; }

 private:
  Outcome() = default;
  std::optional<T> value_;
  std::string error_;
};

// Heap addresses are opaque ids; the machine mints them densely from 1.
using Addr = std::uint32_t;

// Runtime values: addresses, null, and the scalar extension (int/bool/str).
class Value {
 public:
  enum class Kind { Null, Address, Int, Bool, Str };

  Value() : k_(Kind::Null) {}
  static Value null() { return Value(); }
  static Value address(Addr a) {
    Value v;
    v.k_ = Kind::Address;
    v.a_ = a;
    return v;
  }
  static Value integer(std::int64_t i) {
    Value v;
    v.k_ = Kind::Int;
    v.i_ = i;
    return v;
  }
  static Value boolean(bool b) {
    Value v;
    v.k_ = Kind::Bool;
    v.b_ = b;
    return v;
  }
  static Value str(std::string s) {
    Value v;
    v.k_ = Kind::Str;
    v.s_ = std::move(s);
    return v;
  }

  Kind kind() const { return k_; }
  bool is_null() const { return k_ == Kind::Null; }
  bool is_address() const { return k_ == Kind::Address; }
  bool is_int() const { return k_ == Kind::Int; }
  bool is_bool() const { return k_ == Kind::Bool; }
  bool is_str() const { return k_ == Kind::Str; }
  bool is_scalar() const { return is_int() || is_bool() || is_str(); }

  Addr addr() const { return a_; }
  std::int64_t as_int() const { return i_; }
  bool as_bool() const { return b_; }
  const std::string& as_str() const { return s_; }

  friend bool operator==(const Value& x, const Value& y) {
    if (x.k_ != y.k_) return false;
    switch (x.k_) {
      case Kind::Null: return true;
      case Kind::Address: return x.a_ == y.a_;
      case Kind::Int: return x.i_ == y.i_;
      case Kind::Bool: return x.b_ == y.b_;
      case Kind::Str: return x.s_ == y.s_;
    }
    return false;
  }
  friend bool operator!=(const Value& x, const Value& y) { return !(x == y); }
  friend bool operator<(const Value& x, const Value& y) {
    if (x.k_ != y.k_) return static_cast<int>(x.k_) < static_cast<int>(y.k_);
    switch (x.k_) {
      case Kind::Null: return false;
      case Kind::Address: return x.a_ < y.a_;
      case Kind::Int: return x.i_ < y.i_;
      case Kind::Bool: return x.b_ < y.b_;
      case Kind::Str: return x.s_ < y.s_;
    }
    return false;
  }

  std::string show() const {
    switch (k_) {
      case Kind::Null: return "null";
      case Kind::Address: return "@" + std::to_string(a_);
      case Kind::Int: return std::to_string(i_);
      case Kind::Bool: return b_ ? "true" : "false";
      case Kind::Str: return "\"" + s_ + "\"";
    }
    return "?";
  }

 private:
  Kind k_;
  Addr a_ = 0;
  std::int64_t i_ = 0;
  bool b_ = false;
  std::string s_;
};

// FNV-1a, used to fingerprint report inputs.
inline std::uint64_t fnv64(const std::string& data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace loo
