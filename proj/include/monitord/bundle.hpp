#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"
#include "monitord/base64.hpp"
#include "monitord/errors.hpp"

namespace monitord {

class Bundle;

// Value-semantic heap indirection; breaks the Bundle <-> Value cycle.
template <typename T>
class Box {
 public:
  Box() : ptr_(std::make_unique<T>()) {}
  Box(T value) : ptr_(std::make_unique<T>(std::move(value))) {}
  Box(const Box& other) : ptr_(std::make_unique<T>(*other.ptr_)) {}
  Box(Box&&) noexcept = default;
  Box& operator=(const Box& other) {
    if (this != &other) ptr_ = std::make_unique<T>(*other.ptr_);
    return *this;
  }
  Box& operator=(Box&&) noexcept = default;

  T& operator*() { return *ptr_; }
  const T& operator*() const { return *ptr_; }
  T* operator->() { return ptr_.get(); }
  const T* operator->() const { return ptr_.get(); }

  friend bool operator==(const Box& a, const Box& b) { return *a.ptr_ == *b.ptr_; }

 private:
  std::unique_ptr<T> ptr_;
};

enum class ValueKind { integer, real, boolean, text, bytes, nested, list };

inline const char* value_kind_name(ValueKind k) {
  switch (k) {
    case ValueKind::integer: return "integer";
    case ValueKind::real: return "real";
    case ValueKind::boolean: return "boolean";
    case ValueKind::text: return "text";
    case ValueKind::bytes: return "bytes";
    case ValueKind::nested: return "bundle";
    case ValueKind::list: return "list";
  }
  return "?";
}

struct Value {
  using List = std::vector<Value>;
  using Variant =
      std::variant<std::int64_t, double, bool, std::string, Bytes, Box<Bundle>, List>;

  Value() : data(std::int64_t{0}) {}
  Value(std::int64_t v) : data(v) {}
  Value(int v) : data(static_cast<std::int64_t>(v)) {}
  Value(double v) : data(v) {}
  Value(bool v) : data(v) {}
  Value(const char* v) : data(std::string(v)) {}
  Value(std::string v) : data(std::move(v)) {}
  Value(Bytes v) : data(std::move(v)) {}
  Value(Bundle v);       // defined after Bundle
  Value(List v);         // homogeneity enforced

  ValueKind kind() const { return static_cast<ValueKind>(data.index()); }

  bool is_int() const { return kind() == ValueKind::integer; }
  bool is_real() const { return kind() == ValueKind::real; }
  bool is_bool() const { return kind() == ValueKind::boolean; }
  bool is_text() const { return kind() == ValueKind::text; }
  bool is_bytes() const { return kind() == ValueKind::bytes; }
  bool is_bundle() const { return kind() == ValueKind::nested; }
  bool is_list() const { return kind() == ValueKind::list; }

  std::int64_t as_int() const { return get<std::int64_t>(); }
  double as_real() const { return get<double>(); }
  bool as_bool() const { return get<bool>(); }
  const std::string& as_text() const { return get<std::string>(); }
  const Bytes& as_bytes() const { return get<Bytes>(); }
  const Bundle& as_bundle() const;
  Bundle& as_bundle();
  const List& as_list() const { return get<List>(); }
  List& as_list() { return get_mut<List>(); }

  // Number of Bundle nesting levels contained in this value; scalars are 0.
  int depth() const;

  nlohmann::ordered_json to_json() const;
  static Value from_json(const nlohmann::ordered_json& j);

  // Untagged JSON for human-facing interfaces (CLI bundles, reports). Bytes
  // are wrapped as {"$bytes": <base64>} so the mapping stays invertible.
  nlohmann::ordered_json to_plain_json() const;
  static Value from_plain_json(const nlohmann::ordered_json& j);

  friend bool operator==(const Value& a, const Value& b) { return a.data == b.data; }
  friend bool operator!=(const Value& a, const Value& b) { return !(a == b); }

  Variant data;

 private:
  template <typename T>
  const T& get() const {
    const T* p = std::get_if<T>(&data);
    if (!p) throw Error(Errc::type_mismatch, std::string("value is ") + value_kind_name(kind()));
    return *p;
  }
  template <typename T>
  T& get_mut() {
    T* p = std::get_if<T>(&data);
    if (!p) throw Error(Errc::type_mismatch, std::string("value is ") + value_kind_name(kind()));
    return *p;
  }
};

using ValueList = Value::List;

// Ordered heterogeneous key-value record. Keys are unique; equality is
// structural and order-sensitive; nesting depth is capped at kMaxDepth and
// enforced on insertion and deserialization.
class Bundle {
 public:
  static constexpr int kMaxDepth = 16;

  using Entry = std::pair<std::string, Value>;

  Bundle() = default;

  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }

  bool has(const std::string& key) const { return find(key) != nullptr; }

  const Value* find(const std::string& key) const {
    for (const auto& e : entries_)
      if (e.first == key) return &e.second;
    return nullptr;
  }

  const Value& at(const std::string& key) const {
    const Value* v = find(key);
    if (!v) throw Error(Errc::unknown_key, key);
    return *v;
  }

  // Upsert: an existing key keeps its position, a new key appends.
  Bundle& put(const std::string& key, Value value) {
    int candidate = 1;
    for (const auto& e : entries_) {
      if (e.first == key) continue;
      candidate = std::max(candidate, 1 + e.second.depth());
    }
    candidate = std::max(candidate, 1 + value.depth());
    if (candidate > kMaxDepth)
      throw Error(Errc::depth_exceeded, "bundle depth would exceed 16");
    for (auto& e : entries_) {
      if (e.first == key) {
        e.second = std::move(value);
        return *this;
      }
    }
    entries_.emplace_back(key, std::move(value));
    return *this;
  }

  Bundle& put_int(const std::string& key, std::int64_t v) { return put(key, Value(v)); }
  Bundle& put_real(const std::string& key, double v) { return put(key, Value(v)); }
  Bundle& put_bool(const std::string& key, bool v) { return put(key, Value(v)); }
  Bundle& put_text(const std::string& key, std::string v) { return put(key, Value(std::move(v))); }
  Bundle& put_bytes(const std::string& key, Bytes v) { return put(key, Value(std::move(v))); }
  Bundle& put_bundle(const std::string& key, Bundle v) { return put(key, Value(std::move(v))); }
  Bundle& put_list(const std::string& key, ValueList v) { return put(key, Value(std::move(v))); }

  std::optional<std::int64_t> get_int(const std::string& key) const {
    const Value* v = find(key);
    if (v && v->is_int()) return v->as_int();
    return std::nullopt;
  }
  std::optional<double> get_real(const std::string& key) const {
    const Value* v = find(key);
    if (v && v->is_real()) return v->as_real();
    if (v && v->is_int()) return static_cast<double>(v->as_int());
    return std::nullopt;
  }
  std::optional<bool> get_bool(const std::string& key) const {
    const Value* v = find(key);
    if (v && v->is_bool()) return v->as_bool();
    return std::nullopt;
  }
  std::optional<std::string> get_text(const std::string& key) const {
    const Value* v = find(key);
    if (v && v->is_text()) return v->as_text();
    return std::nullopt;
  }
  const Bundle* get_bundle(const std::string& key) const {
    const Value* v = find(key);
    if (v && v->is_bundle()) return &v->as_bundle();
    return nullptr;
  }
  const ValueList* get_list(const std::string& key) const {
    const Value* v = find(key);
    if (v && v->is_list()) return &v->as_list();
    return nullptr;
  }

  bool erase(const std::string& key) {
    for (auto it = entries_.begin(); it != entries_.end(); ++it) {
      if (it->first == key) {
        entries_.erase(it);
        return true;
      }
    }
    return false;
  }

  const std::vector<Entry>& entries() const { return entries_; }

  std::vector<std::string> keys() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.first);
    return out;
  }

  int depth() const {
    int d = 0;
    for (const auto& e : entries_) d = std::max(d, e.second.depth());
    return 1 + d;
  }

  nlohmann::ordered_json to_json() const {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& e : entries_) arr.push_back({e.first, e.second.to_json()});
    return arr;
  }

  static Bundle from_json(const nlohmann::ordered_json& j) {
    if (!j.is_array()) throw Error(Errc::parse_error, "bundle json must be an array of entries");
    Bundle b;
    for (const auto& item : j) {
      if (!item.is_array() || item.size() != 2 || !item[0].is_string())
        throw Error(Errc::parse_error, "bundle entry must be [key, value]");
      std::string key = item[0].get<std::string>();
      if (b.has(key)) throw Error(Errc::parse_error, "duplicate bundle key: " + key);
      b.put(key, Value::from_json(item[1]));
    }
    return b;
  }

  std::string serialize() const { return to_json().dump(); }

  static Bundle deserialize(const std::string& text) {
    nlohmann::ordered_json j;
    try {
      j = nlohmann::ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(Errc::parse_error, e.what());
    }
    return from_json(j);
  }

  nlohmann::ordered_json to_plain_json() const {
    auto obj = nlohmann::ordered_json::object();
    for (const auto& e : entries_) obj[e.first] = e.second.to_plain_json();
    return obj;
  }

  static Bundle from_plain_json(const nlohmann::ordered_json& j) {
    if (!j.is_object()) throw Error(Errc::parse_error, "expected a json object");
    Bundle b;
    for (const auto& [key, val] : j.items()) b.put(key, Value::from_plain_json(val));
    return b;
  }

  friend bool operator==(const Bundle& a, const Bundle& b) { return a.entries_ == b.entries_; }
  friend bool operator!=(const Bundle& a, const Bundle& b) { return !(a == b); }

 private:
  std::vector<Entry> entries_;
};

inline Value::Value(Bundle v) : data(Box<Bundle>(std::move(v))) {}

inline Value::Value(List v) : data(std::int64_t{0}) {
  if (!v.empty()) {
    ValueKind k = v.front().kind();
    for (const auto& e : v) {
      if (e.kind() != k)
        throw Error(Errc::heterogeneous_list, "list elements must share one kind");
    }
  }
  data = std::move(v);
}

inline const Bundle& Value::as_bundle() const {
  const Box<Bundle>* p = std::get_if<Box<Bundle>>(&data);
  if (!p) throw Error(Errc::type_mismatch, std::string("value is ") + value_kind_name(kind()));
  return **p;
}

inline Bundle& Value::as_bundle() {
  Box<Bundle>* p = std::get_if<Box<Bundle>>(&data);
  if (!p) throw Error(Errc::type_mismatch, std::string("value is ") + value_kind_name(kind()));
  return **p;
}

inline int Value::depth() const {
  switch (kind()) {
    case ValueKind::nested:
      return as_bundle().depth();
    case ValueKind::list: {
      int d = 0;
      for (const auto& e : as_list()) d = std::max(d, e.depth());
      return d;
    }
    default:
      return 0;
  }
}

inline nlohmann::ordered_json Value::to_json() const {
  nlohmann::ordered_json j;
  switch (kind()) {
    case ValueKind::integer: j["i"] = as_int(); break;
    case ValueKind::real: j["f"] = as_real(); break;
    case ValueKind::boolean: j["b"] = as_bool(); break;
    case ValueKind::text: j["s"] = as_text(); break;
    case ValueKind::bytes: j["x"] = base64_encode(as_bytes()); break;
    case ValueKind::nested: j["m"] = as_bundle().to_json(); break;
    case ValueKind::list: {
      auto arr = nlohmann::ordered_json::array();
      for (const auto& e : as_list()) arr.push_back(e.to_json());
      j["l"] = arr;
      break;
    }
  }
  return j;
}

inline Value Value::from_json(const nlohmann::ordered_json& j) {
  if (!j.is_object() || j.size() != 1)
    throw Error(Errc::parse_error, "value json must be a single-key tag object");
  const std::string tag = j.begin().key();
  const auto& body = *j.begin();
  if (tag == "i") {
    if (!body.is_number_integer()) throw Error(Errc::parse_error, "tag i expects an integer");
    return Value(body.get<std::int64_t>());
  }
  if (tag == "f") {
    if (!body.is_number()) throw Error(Errc::parse_error, "tag f expects a number");
    return Value(body.get<double>());
  }
  if (tag == "b") {
    if (!body.is_boolean()) throw Error(Errc::parse_error, "tag b expects a boolean");
    return Value(body.get<bool>());
  }
  if (tag == "s") {
    if (!body.is_string()) throw Error(Errc::parse_error, "tag s expects a string");
    return Value(body.get<std::string>());
  }
  if (tag == "x") {
    if (!body.is_string()) throw Error(Errc::parse_error, "tag x expects a base64 string");
    return Value(base64_decode(body.get<std::string>()));
  }
  if (tag == "m") return Value(Bundle::from_json(body));
  if (tag == "l") {
    if (!body.is_array()) throw Error(Errc::parse_error, "tag l expects an array");
    ValueList list;
    list.reserve(body.size());
    for (const auto& e : body) list.push_back(from_json(e));
    return Value(std::move(list));
  }
  throw Error(Errc::parse_error, "unknown value tag: " + tag);
}

inline nlohmann::ordered_json Value::to_plain_json() const {
  switch (kind()) {
    case ValueKind::integer: return as_int();
    case ValueKind::real: return as_real();
    case ValueKind::boolean: return as_bool();
    case ValueKind::text: return as_text();
    case ValueKind::bytes: {
      nlohmann::ordered_json j;
      j["$bytes"] = base64_encode(as_bytes());
      return j;
    }
    case ValueKind::nested: return as_bundle().to_plain_json();
    case ValueKind::list: {
      auto arr = nlohmann::ordered_json::array();
      for (const auto& e : as_list()) arr.push_back(e.to_plain_json());
      return arr;
    }
  }
  return nullptr;
}

inline Value Value::from_plain_json(const nlohmann::ordered_json& j) {
  if (j.is_number_integer()) return Value(j.get<std::int64_t>());
  if (j.is_number_float()) return Value(j.get<double>());
  if (j.is_boolean()) return Value(j.get<bool>());
  if (j.is_string()) return Value(j.get<std::string>());
  if (j.is_array()) {
    ValueList list;
    list.reserve(j.size());
    for (const auto& e : j) list.push_back(from_plain_json(e));
    return Value(std::move(list));
  }
  if (j.is_object()) {
    if (j.size() == 1 && j.contains("$bytes") && j["$bytes"].is_string())
      return Value(base64_decode(j["$bytes"].get<std::string>()));
    return Value(Bundle::from_plain_json(j));
  }
  throw Error(Errc::parse_error, "unsupported plain json value");
}

}  // namespace monitord
