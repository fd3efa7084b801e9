#pragma once

#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

namespace xalign {

std::string sha256_hex(std::string_view data);

std::string trim(std::string_view s);
std::string lower_ascii(std::string_view s);

// Shortest decimal form that round-trips, locale independent. Used for cache
// keys and manifest digests so that number formatting never drifts.
std::string format_double(double v);

std::string read_file(const std::filesystem::path& path);

// Writes to a temp file in the same directory, then renames into place.
void atomic_write_file(const std::filesystem::path& path, std::string_view content);

// Runs fn(0..n-1) on up to `workers` threads. The first exception aborts
// scheduling of unstarted items and is rethrown after all running items
// finish.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

class Semaphore {
 public:
  explicit Semaphore(int count) : count_(count) {}
  void acquire() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return count_ > 0; });
    --count_;
  }
  void release() {
    {
      std::lock_guard lock(mu_);
      ++count_;
    }
    cv_.notify_one();
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  int count_;
};

struct SemaphoreGuard {
  explicit SemaphoreGuard(Semaphore& s) : sem(s) { sem.acquire(); }
  ~SemaphoreGuard() { sem.release(); }
  SemaphoreGuard(const SemaphoreGuard&) = delete;
  SemaphoreGuard& operator=(const SemaphoreGuard&) = delete;
  Semaphore& sem;
};

// Decodes UTF-8 into codepoints; invalid bytes come back as U+FFFD.
std::vector<char32_t> utf8_decode(std::string_view s);

// Folds full-width ASCII variants (U+FF01..U+FF5E) and the ideographic space
// to their ASCII counterparts; other codepoints pass through.
char32_t fold_fullwidth(char32_t cp);

}  // namespace xalign
