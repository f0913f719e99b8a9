#ifndef ROCCG_COMMON_IO_INL_HPP_
#define ROCCG_COMMON_IO_INL_HPP_

#include "common/error.hpp"

namespace roccg {

template <typename T>
T RequireField(const nlohmann::json& doc, const char* field,
               const std::string& context) {
  if (!doc.is_object() || !doc.contains(field)) {
    throw InputError(context + ": missing field '" + field + "'");
  }
  try {
    return doc.at(field).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InputError(context + ": field '" + field + "' has the wrong type");
  }
}

}  // namespace roccg

#endif  // ROCCG_COMMON_IO_INL_HPP_
