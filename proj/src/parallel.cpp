#include "hsm/parallel.hpp"

#include <atomic>

namespace hsm {

namespace {
std::atomic<int> g_threads{1};
}

void set_thread_count(int count) {
  if (count <= 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    count = hw == 0 ? 1 : static_cast<int>(hw);
  }
  g_threads.store(count);
}

int thread_count() { return g_threads.load(); }

}  // namespace hsm
