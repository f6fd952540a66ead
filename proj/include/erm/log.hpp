#pragma once

#include <cstdio>
#include <cstdlib>
#include <string>

namespace erm::log {

enum class Level { off = 0, info = 1, debug = 2 };

/// Verbosity from the ERM_LOG environment variable (off|info|debug), read once.
inline Level level() {
    static const Level lvl = [] {
        const char* env = std::getenv("ERM_LOG");
        if (env == nullptr) return Level::off;
        const std::string v(env);
        if (v == "debug") return Level::debug;
        if (v == "info") return Level::info;
        return Level::off;
    }();
    return lvl;
}

inline void info(const std::string& msg) {
    if (level() >= Level::info) std::fprintf(stderr, "[erm] %s\n", msg.c_str());
}

inline void debug(const std::string& msg) {
    if (level() >= Level::debug) std::fprintf(stderr, "[erm:debug] %s\n", msg.c_str());
}

}  // namespace erm::log
