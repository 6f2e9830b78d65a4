#pragma once

#include <string_view>

namespace kfrev::log {

void set_quiet(bool quiet);
bool quiet();

void info(std::string_view message);
void warn(std::string_view message);
void error(std::string_view message);

}  // namespace kfrev::log
