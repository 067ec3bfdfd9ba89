#pragma once

#include <map>
#include <string>
#include <vector>

#include "monitord/bundle.hpp"
#include "monitord/errors.hpp"

namespace monitord {

enum class Layer { kernel, middleware, application };

inline const char* layer_name(Layer l) {
  switch (l) {
    case Layer::kernel: return "kernel";
    case Layer::middleware: return "middleware";
    case Layer::application: return "application";
  }
  return "?";
}

// Five enforcement styles. The first two truncate only (the service surfaces
// a Deny either as a dropped action or as an access error); edit-return and
// list-filter may additionally replace the value the caller sees.
enum class HookCategory {
  boolean_truncation,
  error_truncation,
  edit_return,
  list_filter,
  observe_only,
};

inline const char* category_name(HookCategory c) {
  switch (c) {
    case HookCategory::boolean_truncation: return "boolean-truncation";
    case HookCategory::error_truncation: return "error-truncation";
    case HookCategory::edit_return: return "edit-return";
    case HookCategory::list_filter: return "list-filter";
    case HookCategory::observe_only: return "observe-only";
  }
  return "?";
}

inline bool is_truncation_category(HookCategory c) {
  return c == HookCategory::boolean_truncation || c == HookCategory::error_truncation;
}

inline bool is_edit_category(HookCategory c) {
  return c == HookCategory::edit_return || c == HookCategory::list_filter;
}

// Semantic value shapes used in hook argument/return schemas.
enum class SemType {
  none,
  integer,
  real,
  boolean,
  text,
  bytes,
  record,       // arbitrary bundle
  text_list,
  record_list,  // list of bundles
  location_fix,
  result_set,
};

inline const char* sem_type_name(SemType t) {
  switch (t) {
    case SemType::none: return "none";
    case SemType::integer: return "integer";
    case SemType::real: return "real";
    case SemType::boolean: return "boolean";
    case SemType::text: return "text";
    case SemType::bytes: return "bytes";
    case SemType::record: return "record";
    case SemType::text_list: return "text-list";
    case SemType::record_list: return "record-list";
    case SemType::location_fix: return "location-fix";
    case SemType::result_set: return "result-set";
  }
  return "?";
}

// Structural conformance of a value to a semantic type. Empty lists conform
// to every list type.
inline bool conforms(SemType t, const Value& v) {
  switch (t) {
    case SemType::none:
      return false;
    case SemType::integer:
      return v.is_int();
    case SemType::real:
      return v.is_real() || v.is_int();
    case SemType::boolean:
      return v.is_bool();
    case SemType::text:
      return v.is_text();
    case SemType::bytes:
      return v.is_bytes();
    case SemType::record:
      return v.is_bundle();
    case SemType::text_list:
      return v.is_list() && (v.as_list().empty() || v.as_list().front().is_text());
    case SemType::record_list:
      return v.is_list() && (v.as_list().empty() || v.as_list().front().is_bundle());
    case SemType::location_fix: {
      if (!v.is_bundle()) return false;
      const Bundle& b = v.as_bundle();
      auto lat = b.get_real("lat");
      auto lon = b.get_real("lon");
      auto ts = b.get_int("ts");
      return lat && lon && ts && *lat >= -90.0 && *lat <= 90.0 && *lon >= -180.0 && *lon <= 180.0;
    }
    case SemType::result_set: {
      if (!v.is_bundle()) return false;
      const Bundle& b = v.as_bundle();
      const ValueList* cols = b.get_list("columns");
      const ValueList* rows = b.get_list("rows");
      if (!cols || !rows) return false;
      for (const auto& c : *cols)
        if (!c.is_text()) return false;
      for (const auto& r : *rows) {
        if (!r.is_list() || r.as_list().size() != cols->size()) return false;
      }
      return true;
    }
  }
  return false;
}

struct ArgSpec {
  std::string name;
  SemType type;
};

// One enforcement point: identity, layer, category and argument schema.
struct HookDescriptor {
  std::string id;  // dotted name, e.g. "broadcast.deliverToRegisteredReceiver"
  Layer layer = Layer::middleware;
  HookCategory category = HookCategory::boolean_truncation;
  std::vector<ArgSpec> args;
  SemType return_type = SemType::none;
};

class HookRegistry {
 public:
  // Returns the hook id. Rejects duplicate ids and edit-return hooks that
  // lack a return schema.
  const std::string& register_hook(HookDescriptor desc) {
    if (desc.id.empty()) throw Error(Errc::malformed_schema, "hook id must be non-empty");
    if (desc.category == HookCategory::edit_return && desc.return_type == SemType::none)
      throw Error(Errc::malformed_schema, "edit-return hook needs a return schema: " + desc.id);
    auto [it, inserted] = hooks_.emplace(desc.id, std::move(desc));
    if (!inserted) throw Error(Errc::duplicate_hook_id, it->first);
    order_.push_back(it->first);
    return it->first;
  }

  const HookDescriptor* find(const std::string& id) const {
    auto it = hooks_.find(id);
    return it == hooks_.end() ? nullptr : &it->second;
  }

  const HookDescriptor& require(const std::string& id) const {
    const HookDescriptor* d = find(id);
    if (!d) throw Error(Errc::unknown_hook, id);
    return *d;
  }

  bool has(const std::string& id) const { return hooks_.count(id) != 0; }
  std::size_t size() const { return hooks_.size(); }

  // Registration order.
  const std::vector<std::string>& ids() const { return order_; }

 private:
  std::map<std::string, HookDescriptor> hooks_;
  std::vector<std::string> order_;
};

}  // namespace monitord
