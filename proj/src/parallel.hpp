#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace srd::detail {

// Fixed block size keeps every element's computation (including SIMD lane
// assignment) independent of the worker count.
inline constexpr std::size_t kBlockSize = 4096;

// Runs body(begin, end) over [0, count) in kBlockSize blocks. On failure the
// exception from the lowest-indexed failing block is rethrown.
template <class Body>
void parallel_blocks(std::size_t count, unsigned workers, Body&& body) {
  const std::size_t blocks = (count + kBlockSize - 1) / kBlockSize;
  const auto run_block = [&](std::size_t b) {
    const std::size_t begin = b * kBlockSize;
    body(begin, std::min(count, begin + kBlockSize));
  };
  if (workers <= 1 || blocks <= 1) {
    for (std::size_t b = 0; b < blocks; ++b) run_block(b);
    return;
  }

  std::vector<std::exception_ptr> errors(blocks);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t b = next.fetch_add(1); b < blocks; b = next.fetch_add(1)) {
      try {
        run_block(b);
      } catch (...) {
        errors[b] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const unsigned n_threads = static_cast<unsigned>(std::min<std::size_t>(workers, blocks));
  for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace srd::detail
