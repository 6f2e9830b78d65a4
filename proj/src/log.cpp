#include "kfrev/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace kfrev::log {

namespace {

std::atomic<bool> g_quiet{false};
std::mutex g_mutex;

void emit(std::string_view level, std::string_view message) {
  std::lock_guard lock(g_mutex);
  std::clog << '[' << level << "] " << message << '\n';
}

}  // namespace

void set_quiet(bool quiet) { g_quiet = quiet; }
bool quiet() { return g_quiet; }

void info(std::string_view message) {
  if (!g_quiet) emit("info", message);
}

void warn(std::string_view message) {
  if (!g_quiet) emit("warn", message);
}

void error(std::string_view message) { emit("error", message); }

}  // namespace kfrev::log
