#ifndef ROCCG_COMMON_IO_HPP_
#define ROCCG_COMMON_IO_HPP_

#include <string>

#include "json.hpp"

namespace roccg {

// Writes to a sibling temporary file and renames it over `path`, so readers
// never observe a partial file. Throws InputError when the path is unwritable.
void WriteFileAtomic(const std::string& path, const std::string& content);
std::string ReadFile(const std::string& path);

nlohmann::json ReadJsonFile(const std::string& path);
void WriteJsonFile(const std::string& path, const nlohmann::json& doc);

// Required field lookup with a typed conversion; errors name the field.
template <typename T>
T RequireField(const nlohmann::json& doc, const char* field,
               const std::string& context);

// Shortest round-trip decimal form; "inf", "-inf" and "nan" otherwise.
std::string FormatDouble(double v);
// The number itself when finite, else its FormatDouble string (JSON has no
// infinities).
nlohmann::json JsonNumber(double v);

void CheckSchemaVersion(const nlohmann::json& doc, int expected,
                        const std::string& context);

}  // namespace roccg

#include "common/io_inl.hpp"

#endif  // ROCCG_COMMON_IO_HPP_
