#include "ridgekit/parallel.hpp"

#include <cstdlib>
#include <string>

namespace ridgekit {

namespace {

std::size_t env_threads() {
    const char* env = std::getenv("RIDGEKIT_THREADS");
    if (env == nullptr || *env == '\0') return 0;
    try {
        const long v = std::stol(env);
        return v > 0 ? static_cast<std::size_t>(v) : 0;
    } catch (...) {
        return 0;
    }
}

}  // namespace

std::size_t default_thread_count() {
    if (const auto env = env_threads(); env > 0) return env;
    const auto hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

std::size_t resolve_thread_count(std::size_t requested) {
    if (const auto env = env_threads(); env > 0) return env;
    return requested == 0 ? default_thread_count() : requested;
}

}  // namespace ridgekit
