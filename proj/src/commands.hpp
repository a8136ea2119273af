#pragma once

#include <string>

#include "blowup_lab/acceptance.hpp"
#include "json.hpp"

namespace blab {

using Json = nlohmann::ordered_json;

const char* version_string();

// result layout: {command, version, config, ok, report, checks, tables{name: {columns, rows}}, plots}
Json run_command(const std::string& command, const Json& args);

}  // namespace blab
