#include "psyprobe/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace psyprobe {

namespace {

LogLevel level_from_env() {
  const char* env = std::getenv("PSYPROBE_LOG");
  if (env == nullptr) return LogLevel::Info;
  if (std::strcmp(env, "error") == 0) return LogLevel::Error;
  if (std::strcmp(env, "warn") == 0) return LogLevel::Warn;
  if (std::strcmp(env, "info") == 0) return LogLevel::Info;
  if (std::strcmp(env, "debug") == 0) return LogLevel::Debug;
  return LogLevel::Info;
}

LogLevel& current_level() {
  static LogLevel level = level_from_env();
  return level;
}

const char* tag(LogLevel level) {
  switch (level) {
    case LogLevel::Error: return "error";
    case LogLevel::Warn: return "warn";
    case LogLevel::Info: return "info";
    case LogLevel::Debug: return "debug";
  }
  return "?";
}

}  // namespace

LogLevel log_level() { return current_level(); }

void set_log_level(LogLevel level) { current_level() = level; }

void log_message(LogLevel level, const std::string& message) {
  if (static_cast<int>(level) > static_cast<int>(current_level())) return;
  std::fprintf(stderr, "[%s] %s\n", tag(level), message.c_str());
}

}  // namespace psyprobe
