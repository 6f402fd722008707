#include "clump/parallel.hpp"

#include <cstdlib>
#include <string>

namespace clump {

unsigned default_threads() {
  if (const char* env = std::getenv("CLUMP_THREADS"); env != nullptr && *env != '\0') {
    try {
      const long n = std::stol(env);
      if (n > 0) return static_cast<unsigned>(n);
    } catch (const std::exception&) {
      // fall through to the hardware default
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace clump
